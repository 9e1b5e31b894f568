"""
textworld.py: Text-command interface over the grid world model.

    Receptacles standing on the floor are places the agent can "go to";
    everything else is named by class and index ("mug 1") and reached
    through the receptacle holding it. Commands map onto simulator actions,
    so the text interface and the embodied agent share one world model.

        look | inventory | go to <r> | open <r> | close <r> | take <o> from <r>
        put <o> in/on <r> | toggle <o> | use <o> | clean <o> with <r>
        heat <o> with <r> | cool <o> with <r> | slice <o> with <k> | examine <o>

    Failed commands answer "Nothing happens: <simulator error>".

"""
import logging
import re
from collections import deque

from homestead import goals as goal_conditions
from homestead import world
from homestead.exceptions import ExpertPathError

logger = logging.getLogger('homestead')

NOTHING_HAPPENS = 'Nothing happens'
UNKNOWN_COMMAND = 'unknown command'
NOT_HERE = world.NOT_VISIBLE

_COMMANDS = [('look', re.compile(r'^look$')),
             ('inventory', re.compile(r'^inventory$')),
             ('go', re.compile(r'^go to (?P<r>.+)$')),
             ('open', re.compile(r'^open (?P<r>.+)$')),
             ('close', re.compile(r'^close (?P<r>.+)$')),
             ('take', re.compile(r'^take (?P<o>.+?) from (?P<r>.+)$')),
             ('put', re.compile(r'^put (?P<o>.+?) (?:in|on|in/on) (?P<r>.+)$')),
             ('toggle', re.compile(r'^(?:toggle|use) (?P<o>.+)$')),
             ('clean', re.compile(r'^clean (?P<o>.+?) with (?P<r>.+)$')),
             ('heat', re.compile(r'^heat (?P<o>.+?) with (?P<r>.+)$')),
             ('cool', re.compile(r'^cool (?P<o>.+?) with (?P<r>.+)$')),
             ('slice', re.compile(r'^slice (?P<o>.+?) with (?P<k>.+)$')),
             ('examine', re.compile(r'^examine (?P<o>.+)$'))]


def _article(name):
    return 'an' if name[0] in 'aeiou' else 'a'


def _listing(names):
    if not names:
        return 'nothing'
    named = ['{0} {1}'.format(_article(name), name) for name in names]
    if len(named) == 1:
        return named[0]
    return '{0}, and {1}'.format(', '.join(named[:-1]), named[-1])


def parse_command(command):
    text = ' '.join(command.lower().strip().rstrip('.').split())
    for verb, pattern in _COMMANDS:
        match = pattern.match(text)
        if match:
            return verb, match.groupdict()
    return None, {}


class TextEnvironment:
    def __init__(self, scenario):
        self.scenario = scenario
        self.task = scenario.instruction.high_level
        self.goals = scenario.goals
        self.names = {}
        counts = {}
        for object_id in sorted(scenario.state.objects):
            obj = scenario.state.objects[object_id]
            base = obj.object_class.lower()
            counts[base] = counts.get(base, 0) + 1
            self.names[object_id] = '{0} {1}'.format(base, counts[base])
        self.ids = {name: object_id for object_id, name in self.names.items()}
        self.reset()

    def reset(self):
        self.state = self.scenario.state.copy()
        self.location = None
        self.commands = 0
        return self.initial_observation()

    def copy(self):
        duplicate = TextEnvironment.__new__(TextEnvironment)
        duplicate.__dict__.update(self.__dict__)
        duplicate.state = self.state.copy()
        return duplicate

    def places(self):
        """Floor-standing receptacles and switches the agent can go to, by name"""
        return sorted((self.names[obj.id] for obj in self.state.objects.values()
                       if obj.occupies_cell() and (obj.is_receptacle or obj.toggleable)), key=_natural_key)

    def initial_observation(self):
        return 'You are in the middle of a {0}. Looking quickly around you, you see {1}. Your task is to: {2}.'.format(
            self.scenario.room_type, _listing(self.places()), self.task)

    def held_name(self):
        held = self.state.held_object()
        return None if held is None else self.names[held.id]

    def goal_status(self):
        return goal_conditions.check_goal(self.state, self.goals)

    def signature(self, object_ids=None):
        return (self.location, self.state.held, tuple(self.state.objects[object_id].signature()
                                                      for object_id in (object_ids or sorted(self.state.objects))))

    def _visible_contents(self, place):
        if self.state.objects[place].is_closed:
            return []
        return [self.names[obj.id] for obj in self.state.contents(place) if obj.location != world.HELD]

    def _describe_place(self, place):
        name = self.names[place]
        obj = self.state.objects[place]
        if not obj.is_receptacle:
            return 'You see the {0}.'.format(name)
        if obj.is_closed:
            return 'The {0} is closed.'.format(name)
        return 'On the {0}, you see {1}.'.format(name, _listing(sorted(self._visible_contents(place),
                                                                       key=_natural_key)))

    def _resolve(self, name):
        return self.ids.get(name)

    def _at_place_of(self, object_id):
        """Whether the object sits at (in or on) the place the agent stands at"""
        if self.location is None:
            return False
        obj = self.state.objects[object_id]
        chain = [object_id] + [container.id for container in self.state.container_chain(obj)]
        return self.location in chain

    def _act(self, kind, target):
        self.state, outcome = world.step(self.state, world.LowLevelAction(kind, target))
        return outcome

    def _failure(self, error):
        return '{0}: {1}'.format(NOTHING_HAPPENS, error)

    def step(self, command):
        """Run one command and return the observation text"""
        self.commands += 1
        verb, arguments = parse_command(command)
        if verb is None:
            return self._failure(UNKNOWN_COMMAND)
        handler = getattr(self, '_do_{0}'.format(verb))
        return handler(**arguments)

    def _do_look(self):
        if self.location is None:
            return 'You are in the middle of the room. Around you, you see {0}.'.format(_listing(self.places()))
        return 'You are facing the {0}. {1}'.format(self.names[self.location], self._describe_place(self.location))

    def _do_inventory(self):
        held = self.held_name()
        if held is None:
            return 'You are not carrying anything.'
        return 'You are carrying: {0} {1}.'.format(_article(held), held)

    def _do_go(self, r):
        place = self._resolve(r)
        if place is None or r not in self.places():
            return self._failure(world.UNKNOWN_TARGET)
        obj = self.state.objects[place]
        poses = world.interaction_poses(self.state, obj)
        if not poses:
            return self._failure(world.NOT_INTERACTABLE)
        self.state = self.state.with_pose(*min(poses, key=lambda pose: pose[0]))
        self.location = place
        return 'You arrive at {0}. {1}'.format(r, self._describe_place(place))

    def _do_open(self, r):
        place = self._resolve(r)
        if place is None or place != self.location:
            return self._failure(NOT_HERE)
        outcome = self._act('OpenObject', place)
        if not outcome.success:
            return self._failure(outcome.error_message)
        return 'You open the {0}. The {0} is open. In it, you see {1}.'.format(
            r, _listing(sorted(self._visible_contents(place), key=_natural_key)))

    def _do_close(self, r):
        place = self._resolve(r)
        if place is None or place != self.location:
            return self._failure(NOT_HERE)
        outcome = self._act('CloseObject', place)
        if not outcome.success:
            return self._failure(outcome.error_message)
        return 'You close the {0}.'.format(r)

    def _do_take(self, o, r):
        object_id, place = self._resolve(o), self._resolve(r)
        if object_id is None or place is None or place != self.location or \
                self.state.objects[object_id].location != place:
            return self._failure(NOT_HERE)
        outcome = self._act('PickupObject', object_id)
        if not outcome.success:
            return self._failure(outcome.error_message)
        return 'You pick up the {0} from the {1}.'.format(o, r)

    def _put_into(self, object_id, place):
        if self.state.held != object_id:
            return world.StepOutcome(False, world.HANDS_EMPTY)
        return self._act('PutObject', place)

    def _do_put(self, o, r):
        object_id, place = self._resolve(o), self._resolve(r)
        if object_id is None or place is None or not self._at_place_of(place):
            return self._failure(NOT_HERE)
        outcome = self._put_into(object_id, place)
        if not outcome.success:
            return self._failure(outcome.error_message)
        return 'You put the {0} in/on the {1}.'.format(o, r)

    def _do_toggle(self, o):
        object_id = self._resolve(o)
        if object_id is None or not self._at_place_of(object_id):
            return self._failure(NOT_HERE)
        obj = self.state.objects[object_id]
        kind = 'ToggleObjectOff' if obj.flags['toggled_on'] else 'ToggleObjectOn'
        outcome = self._act(kind, object_id)
        if not outcome.success:
            return self._failure(outcome.error_message)
        return 'You turn {0} the {1}.'.format('off' if kind == 'ToggleObjectOff' else 'on', o)

    def _appliance_sequence(self, role, object_id, place):
        """Low-level actions a clean, heat or cool command expands into"""
        appliance = self.state.objects[place]
        if role == 'cleaning':
            switches = [obj.id for obj in self.state.contents(place) if obj.toggleable]
            if not switches:
                return None
            return [('PutObject', place), ('ToggleObjectOn', switches[0]), ('ToggleObjectOff', switches[0]),
                    ('PickupObject', object_id)]
        opening = [('OpenObject', place)] if appliance.is_closed else []
        if role == 'heating':
            return opening + [('PutObject', place), ('ToggleObjectOn', place), ('ToggleObjectOff', place),
                              ('PickupObject', object_id)]
        return opening + [('PutObject', place), ('CloseObject', place), ('OpenObject', place),
                          ('PickupObject', object_id)]

    def _transform(self, role, past_tense, o, r):
        object_id, place = self._resolve(o), self._resolve(r)
        if object_id is None or place is None or place != self.location:
            return self._failure(NOT_HERE)
        if self.state.held != object_id:
            return self._failure(world.HANDS_EMPTY)
        if not self.state.objects[place].has_role(role):
            return self._failure(world.NOT_INTERACTABLE)
        sequence = self._appliance_sequence(role, object_id, place)
        if sequence is None:
            return self._failure(world.NOT_INTERACTABLE)
        saved = self.state
        for kind, target in sequence:
            outcome = self._act(kind, target)
            if not outcome.success:
                self.state = saved
                return self._failure(outcome.error_message)
        return 'You {0} the {1} using the {2}.'.format(past_tense, o, r)

    def _do_clean(self, o, r):
        return self._transform('cleaning', 'clean', o, r)

    def _do_heat(self, o, r):
        return self._transform('heating', 'heat', o, r)

    def _do_cool(self, o, r):
        return self._transform('cooling', 'cool', o, r)

    def _do_slice(self, o, k):
        object_id, knife = self._resolve(o), self._resolve(k)
        if object_id is None or knife is None or not self._at_place_of(object_id):
            return self._failure(NOT_HERE)
        if self.state.held != knife:
            return self._failure(world.NEEDS_KNIFE)
        outcome = self._act('SliceObject', object_id)
        if not outcome.success:
            return self._failure(outcome.error_message)
        return 'You slice the {0} with the {1}.'.format(o, k)

    def _do_examine(self, o):
        object_id = self._resolve(o)
        if object_id is None or not (self._at_place_of(object_id) or self.state.held == object_id):
            return self._failure(NOT_HERE)
        obj = self.state.objects[object_id]
        states = [flag.replace('_', ' ') for flag in world.FLAGS if obj.flags[flag]]
        if obj.openable:
            states.append('open' if obj.is_open else 'closed')
        description = 'This is a {0}.'.format(o)
        if states:
            description += ' It is {0}.'.format(', '.join(states))
        return description

    def admissible_commands(self):
        commands = ['look', 'inventory'] + ['go to {0}'.format(place) for place in self.places()]
        held = self.held_name()
        if self.location is not None:
            here = self.names[self.location]
            place = self.state.objects[self.location]
            if place.openable:
                commands.append('{0} {1}'.format('close' if place.is_open else 'open', here))
            for name in sorted(self._visible_contents(self.location), key=_natural_key):
                obj = self.state.objects[self.ids[name]]
                if obj.pickupable:
                    commands.append('take {0} from {1}'.format(name, here))
                if obj.toggleable:
                    commands.append('use {0}'.format(name))
                if obj.is_receptacle and held is not None and obj.id != self.state.held:
                    commands.append('put {0} in/on {1}'.format(held, name))
                if obj.sliceable and held is not None and self.state.held_object().has_role('knife'):
                    commands.append('slice {0} with {1}'.format(name, held))
            if place.toggleable:
                commands.append('use {0}'.format(here))
            if held is not None and place.is_receptacle:
                commands.append('put {0} in/on {1}'.format(held, here))
                for role, verb in (('cleaning', 'clean'), ('heating', 'heat'), ('cooling', 'cool')):
                    if place.has_role(role):
                        commands.append('{0} {1} with {2}'.format(verb, held, here))
        if held is not None:
            commands.append('examine {0}'.format(held))
        return commands


def _natural_key(name):
    base, _, index = name.rpartition(' ')
    return (base, int(index)) if index.isdigit() else (name, 0)


def expert_command_count(env, max_expansions=100000):
    """Fewest commands reaching the goal, by breadth-first search over admissible commands"""
    start = env.copy()
    if start.goal_status().success:
        return 0
    relevant = goal_conditions.relevant_object_ids(start.state, start.goals)
    seen = {start.signature(relevant)}
    queue = deque([(start, 0)])
    expansions = 0
    while queue:
        current, depth = queue.popleft()
        expansions += 1
        if expansions > max_expansions:
            break
        for command in current.admissible_commands():
            if command in ('look', 'inventory') or command.startswith('examine'):
                continue
            successor = current.copy()
            observation = successor.step(command)
            if observation.startswith(NOTHING_HAPPENS):
                continue
            if successor.goal_status().success:
                return depth + 1
            signature = successor.signature(relevant)
            if signature not in seen:
                seen.add(signature)
                queue.append((successor, depth + 1))
    raise ExpertPathError('no expert trajectory')
