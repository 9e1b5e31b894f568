"""
oracles.py: Deterministic rule policies behind the rule-oracle backend.

    Every role reads the same rendered prompt a language model would see and
    answers in the same output grammar, so the oracle can stand in for any
    backend without changes to the agent or the dialogue loop.

        planner   fixed subtask templates per task type
        observer  identity summary of the structured prompt fields
        executor  a finite-state script per subtask with exception handling
        reasoner  advice list per task type, aware of injected knowledge
        actor     grounds advice into one text-environment command

"""
import logging
import re

from homestead import goals as goal_conditions
from homestead import knowledge, prompts, settings, world
from homestead.exceptions import BackendError

logger = logging.getLogger('homestead')

_CLEAN_WORDS = {'clean', 'cleaned', 'washed', 'wash', 'rinse', 'rinsed'}
_HEAT_WORDS = {'hot', 'heat', 'heated', 'warm', 'warmed', 'microwaved'}
_COOL_WORDS = {'cold', 'cool', 'cooled', 'chill', 'chilled'}
_EXAMINE_WORDS = {'examine', 'look', 'inspect'}
_SLICE_WORDS = {'slice', 'sliced'}

_TRANSFORM_VERBS = {'Clean&Place': 'clean', 'Heat&Place': 'heat', 'Cool&Place': 'cool'}

_OBSERVER_FIELDS = ('Room type', 'Task description', 'Current subtask', 'Previously found objects',
                    'Objects in current view', 'Holding object', 'Error message')

_MAX_EXPLORES = 6


def respond(role, prompt, runtime_context=None):
    if role == 'planner':
        return plan_response(prompt)
    if role == 'observer':
        return observer_response(prompt)
    if role == 'executor':
        return executor_response(prompt, runtime_context)
    if role == 'reasoner':
        return reasoner_response(prompt)
    if role == 'actor':
        return actor_response(prompt)
    raise BackendError('The rule oracle has no {0} policy'.format(role))


def _class_of_word(word):
    for candidate in (word, word[:-2] if word.endswith('es') else None, word[:-1] if word.endswith('s') else None):
        if candidate:
            object_class = world.canonical_class_name(candidate)
            if object_class is not None and object_class != world.WALL_CLASS:
                return object_class
    return None


def class_mentions(text):
    """Catalog classes named in free text, in order; two-word names such as 'desk lamp' win over 'desk'"""
    words = re.findall(r'[a-z]+', text.lower())
    mentions, index = [], 0
    while index < len(words):
        for width in (2, 1):
            if index + width > len(words):
                continue
            object_class = _class_of_word(''.join(words[index:index + width]))
            if object_class is not None:
                mentions.append(object_class)
                index += width
                break
        else:
            index += 1
    return mentions


def parse_instruction(text):
    """Task type and arguments read off a high-level instruction"""
    catalog = world.load_catalog()
    words = set(re.findall(r'[a-z]+', text.lower()))
    mentions = class_mentions(text)
    lamps = [name for name in mentions if 'light' in catalog[name].roles]
    pickupables = [name for name in mentions if catalog[name].pickupable and 'knife' not in catalog[name].roles]
    target = pickupables[0] if pickupables else None
    after_target = mentions[mentions.index(target) + 1:] if target else []
    bases = [name for name in after_target if catalog[name].pickupable and catalog[name].receptacle]

    if words & _CLEAN_WORDS:
        task_type = 'Clean&Place'
    elif words & _HEAT_WORDS:
        task_type = 'Heat&Place'
    elif words & _COOL_WORDS:
        task_type = 'Cool&Place'
    elif 'two' in words:
        task_type = 'PickTwo&Place'
    elif words & _EXAMINE_WORDS or lamps:
        task_type = 'ExamineInLight'
    elif bases:
        task_type = 'Stack&Place'
    else:
        task_type = 'Pick&Place'

    appliances = goal_conditions.TASK_APPLIANCES.get(task_type, ())
    places = [name for name in mentions if catalog[name].receptacle and not catalog[name].pickupable]
    receptacle = None
    if task_type != 'ExamineInLight':
        preferred = [name for name in places if name not in appliances]
        receptacle = (preferred or places or [None])[-1]
    return {'task_type': task_type,
            'object': target,
            'receptacle': receptacle,
            'base': bases[0] if task_type == 'Stack&Place' else None,
            'lamp': (lamps or ['DeskLamp'])[0] if task_type == 'ExamineInLight' else None,
            'sliced': bool(words & _SLICE_WORDS)}


def template_plan(task):
    """Subtask list for a parsed instruction"""
    target = (task['object'] or 'object').lower()
    receptacle = (task['receptacle'] or 'receptacle').lower()
    task_type = task['task_type']
    if task_type == 'Stack&Place':
        base = task['base'].lower()
        subtasks = ['pick up the {0}'.format(target), 'put the {0} in the {1}'.format(target, base),
                    'pick up the {0}'.format(base), 'put the {0} in the {1}'.format(base, receptacle)]
    elif task_type == 'PickTwo&Place':
        subtasks = ['pick up the {0}'.format(target), 'put the {0} in the {1}'.format(target, receptacle),
                    'pick up another {0}'.format(target), 'put the {0} in the {1}'.format(target, receptacle)]
    elif task_type in _TRANSFORM_VERBS:
        subtasks = ['pick up the {0}'.format(target), '{0} the {1}'.format(_TRANSFORM_VERBS[task_type], target),
                    'put the {0} in the {1}'.format(target, receptacle)]
    elif task_type == 'ExamineInLight':
        subtasks = ['pick up the {0}'.format(target), 'turn on the {0}'.format(task['lamp'].lower())]
    else:
        subtasks = ['pick up the {0}'.format(target), 'put the {0} in the {1}'.format(target, receptacle)]
    if task['sliced']:
        subtasks = ['pick up the knife', 'slice the {0}'.format(target), 'put down the knife'] + subtasks
    return subtasks


def _query_instruction(prompt):
    """The instruction under the '### Task' heading (the last 'Instruction:' line)"""
    instruction = prompts.field_value(prompt, 'Instruction')
    if not instruction:
        raise BackendError('Planner prompt carries no instruction')
    return instruction


def plan_response(prompt):
    task = parse_instruction(_query_instruction(prompt))
    subtasks = template_plan(task)
    lines = ['Task type: {0}'.format(goal_conditions.TASK_TYPE_LABELS[task['task_type']]),
             'Thought: First {0}.'.format(', then '.join(subtasks)),
             'Plan:']
    lines += ['{0}. {1}'.format(index, subtask) for index, subtask in enumerate(subtasks, start=1)]
    return '\n'.join(lines)


def observer_response(prompt):
    fields = ['{0}: {1}'.format(label, prompts.field_value(prompt, label)) for label in _OBSERVER_FIELDS]
    return '; '.join(fields)


_MEMORY_LINE = re.compile(r'^\d+\.\s*(?P<action>Play\[[^\]]*\]|Finish)\s*->\s*'
                          r'(?P<result>[a-z-]+)(?::\s*(?P<error>.*))?$')


def parse_memory_line(line):
    """(skill, target, result, error) of one 'Previous steps' line, or None"""
    match = _MEMORY_LINE.match(line.strip())
    if match is None:
        return None
    action = match.group('action')
    skill, target = None, None
    if action != 'Finish':
        inner = action[len('Play['):-1]
        skill, _, target = [part.strip() for part in inner.partition(',')]
    return skill, target or None, match.group('result'), match.group('error')


def _known_class(name, names, role=None):
    """Class name as the agent knows it; role-tagged classes match any found class carrying the role"""
    if name in names:
        return name
    if role is not None:
        catalog = world.load_catalog()
        found = [candidate for candidate in names if role in catalog[candidate].roles]
        if found:
            return found[0]
    return name


def _surface(names):
    """A found plain surface to put things down on"""
    catalog = world.load_catalog()
    for name in names:
        properties = catalog.get(name)
        if properties is not None and properties.receptacle and not properties.pickupable and \
                not properties.openable and not properties.roles:
            return name
    return None


def subtask_script(objective, names):
    """Skill invocations that carry out one subtask, or None when the objective is not a template subtask"""
    text = ' '.join(objective.lower().strip().rstrip('.').split())
    catalog = world.load_catalog()

    def class_in(fragment):
        object_class = _class_of_word(fragment.replace(' ', ''))
        if object_class is None:
            return None
        role = 'knife' if 'knife' in catalog[object_class].roles else None
        return _known_class(object_class, names, role)

    match = re.match(r'^pick up (?:the|a|an|another) (.+)$', text)
    if match and class_in(match.group(1)):
        target = class_in(match.group(1))
        return [('NavigateToObject', target), ('PickupObject', target)]
    match = re.match(r'^put down the (.+)$', text)
    if match:
        surface = _surface(names)
        if surface is None:
            return [('Explore', None)]
        return [('NavigateToObject', surface), ('PutObject', surface)]
    match = re.match(r'^put the (.+?) (?:in|on|into|onto) (?:the|a|an) (.+)$', text)
    if match and class_in(match.group(2)):
        receptacle = class_in(match.group(2))
        return [('NavigateToObject', receptacle), ('PutObject', receptacle)]
    match = re.match(r'^(clean|heat|cool) the (.+)$', text)
    if match and class_in(match.group(2)):
        target = class_in(match.group(2))
        if match.group(1) == 'clean':
            return [('NavigateToObject', 'SinkBasin'), ('PutObject', 'SinkBasin'), ('ToggleObjectOn', 'Faucet'),
                    ('ToggleObjectOff', 'Faucet'), ('PickupObject', target)]
        if match.group(1) == 'heat':
            return [('OpenObject', 'Microwave'), ('PutObject', 'Microwave'), ('ToggleObjectOn', 'Microwave'),
                    ('ToggleObjectOff', 'Microwave'), ('PickupObject', target)]
        return [('OpenObject', 'Fridge'), ('PutObject', 'Fridge'), ('CloseObject', 'Fridge'),
                ('OpenObject', 'Fridge'), ('PickupObject', target)]
    match = re.match(r'^turn on the (.+)$', text)
    if match and class_in(match.group(1)):
        lamp = class_in(match.group(1))
        return [('NavigateToObject', lamp), ('ToggleObjectOn', lamp)]
    match = re.match(r'^slice the (.+)$', text)
    if match and class_in(match.group(1)):
        target = class_in(match.group(1))
        return [('NavigateToObject', target), ('SliceObject', target)]
    return None


def _generic_script(objective):
    """Fallback for objectives outside the templates: fetch the object and put it in the receptacle"""
    task = parse_instruction(objective)
    if task['object'] is None:
        return []
    script = [('NavigateToObject', task['object']), ('PickupObject', task['object'])]
    if task['receptacle'] is not None:
        script += [('NavigateToObject', task['receptacle']), ('PutObject', task['receptacle'])]
    return script


def _same(step, skill, target):
    return step[0] == skill and (step[1] or '').lower() == (target or '').lower()


def _executor_answer(thought, skill=None, target=None):
    if skill is None:
        return 'Thought: {0}\nAction: Finish'.format(thought)
    action = 'Play[{0}]'.format(skill) if target is None else 'Play[{0}, {1}]'.format(skill, target)
    return 'Thought: {0}\nAction: {1}'.format(thought, action)


def executor_response(prompt, runtime_context=None):
    objective = prompts.field_value(prompt, 'Current objective') or ''
    found = prompts.split_names(prompts.field_value(prompt, 'Found objects'))
    visible = prompts.split_names(prompts.field_value(prompt, 'Objects seeing in current observation'))
    names = found + [name for name in visible if name not in found]
    history = [parsed for parsed in (parse_memory_line(line) for line in
                                     prompts.block_after(prompt, 'Previous steps', ('Current objective',)))
               if parsed is not None]

    script = subtask_script(objective, names)
    if script is None:
        script = _generic_script(objective)

    position = 0
    for skill, target, result, error in history:
        if position < len(script) and _same(script[position], skill, target) and \
                (result == 'done' or (result == 'failed' and error and error.startswith('object is already'))):
            position += 1
    if position >= len(script):
        return _executor_answer('Every step of "{0}" is done.'.format(objective))

    failures = sum(1 for _, _, result, _ in history if result in ('failed', 'invalid'))
    threshold = getattr(runtime_context, 'ORACLE_FAILURES_BEFORE_REPLAN', settings.ORACLE_FAILURES_BEFORE_REPLAN)
    if failures >= threshold:
        return _executor_answer('"{0}" keeps failing; the plan needs revising.'.format(objective), 'RequireReplan')

    skill, target = script[position]
    if history:
        last_skill, last_target, last_result, last_error = history[-1]
        if last_result == 'failed' and last_skill == 'PutObject' and last_error == world.RECEPTACLE_CLOSED:
            return _executor_answer('The {0} is closed, so it must be opened first.'.format(last_target),
                                    'OpenObject', last_target)

    if target is not None and target not in names:
        return _search_step(target, names, history)
    if target is None:
        return _executor_answer('Nothing needs a target now.', skill)
    return _executor_answer('The {0} is found; next is {1}.'.format(target, skill), skill, target)


def _search_step(target, names, history):
    """Look for a class the agent has not found yet"""
    played = [(skill, target_name, result) for skill, target_name, result, _ in history]
    if not any(skill == 'LookAround' for skill, _, _ in played):
        return _executor_answer('The {0} is not found yet; look around first.'.format(target), 'LookAround')
    explores = sum(1 for skill, _, _ in played if skill == 'Explore')
    if explores < _MAX_EXPLORES:
        return _executor_answer('The {0} is still missing; explore the room.'.format(target), 'Explore')
    catalog = world.load_catalog()
    opened = {target_name for skill, target_name, result in played if skill == 'OpenObject'}
    for name in names:
        properties = catalog.get(name)
        if properties is not None and properties.openable and name not in opened:
            return _executor_answer('The {0} may be inside the {1}.'.format(target, name), 'OpenObject', name)
    return _executor_answer('The {0} cannot be found with this plan.'.format(target), 'RequireReplan')


# Dialogue policies

def _knowledge_triples(prompt):
    statements = [line.lstrip('- ').strip() for line in
                  prompts.block_after(prompt, 'Known facts about this world', ('Task',))]
    triples = set()
    for statement in statements:
        triple = knowledge.normalize_statement(statement)
        if triple is not None:
            triples.add(triple)
    return triples


class Advice:
    def __init__(self, text, verb, object_class=None):
        self.text = text
        self.verb = verb
        self.object_class = object_class


def advice_list(task, triples):
    """Ordered advice for a task; the hold-one rule changes how two-object tasks interleave"""
    target = (task['object'] or 'object').lower()
    receptacle = (task['receptacle'] or 'receptacle').lower()
    task_type = task['task_type']
    advice = []
    if task['sliced']:
        advice += [Advice('find a knife and take it', 'take', 'knife'),
                   Advice('slice the {0} with the knife'.format(target), 'slice', target),
                   Advice('put the knife down here', 'put', 'knife')]
    take = Advice('find a {0} and take it'.format(target), 'take', target)
    place = Advice('put the {0} in the {1}'.format(target, receptacle), 'put', receptacle)
    if task_type == 'Stack&Place':
        base = task['base'].lower()
        advice += [take, Advice('put the {0} in the {1}'.format(target, base), 'put', base),
                   Advice('find a {0} and take it'.format(base), 'take', base),
                   Advice('put the {0} in the {1}'.format(base, receptacle), 'put', receptacle)]
    elif task_type == 'PickTwo&Place':
        another = Advice('find another {0} and take it'.format(target), 'take', target)
        if knowledge.HOLD_ONE in triples:
            advice += [take, place, another, place]
        else:
            advice += [take, another, Advice('put the {0}s in the {1}'.format(target, receptacle), 'put', receptacle)]
    elif task_type in _TRANSFORM_VERBS:
        appliance = goal_conditions.TASK_APPLIANCES[task_type][0].lower()
        verb = _TRANSFORM_VERBS[task_type]
        advice += [take, Advice('{0} the {1} with the {2}'.format(verb, target, appliance), verb, appliance), place]
    elif task_type == 'ExamineInLight':
        lamp = task['lamp'].lower()
        advice += [take, Advice('turn on the {0}'.format(lamp), 'use', lamp)]
    else:
        advice += [take, place]
    return advice


FINISH_ADVICE = 'the task is complete, finish'


class TextMemory:
    """What the actor has learned about the text environment from the conversation"""
    def __init__(self, history):
        self.places = []
        self.location = None
        self.sightings = {}
        self.closed = set()
        self.visited = []
        self.held = None
        self.placed = set()
        self.successes = []
        self.last_failure = None
        command = None
        for line in history:
            if line.startswith('Actor:'):
                command = line[len('Actor:'):].strip()
            elif line.startswith('Observation:'):
                self._observe(command, line[len('Observation:'):].strip())
                command = None

    def _observe(self, command, observation):
        if command is None:
            names = re.findall(r'\b(?:a|an) ([a-z]+ \d+)', observation.split('Your task is to:')[0])
            self.places = self.places or names
            return
        if observation.startswith('Nothing happens'):
            self.last_failure = observation
            return
        self.last_failure = None
        self.successes.append(command)
        verb = command.split(' ', 1)[0]
        if verb == 'go':
            self.location = command[len('go to '):]
            if self.location not in self.visited:
                self.visited.append(self.location)
        elif verb == 'open':
            self.closed.discard(command[len('open '):])
        elif verb == 'close':
            self.closed.add(command[len('close '):])
        elif verb == 'take':
            taken = re.match(r'^take (.+?) from ', command).group(1)
            self.held = taken
            self.sightings.pop(taken, None)
        elif verb == 'put':
            put = re.match(r'^put (.+?) in/on (.+)$', command)
            if put:
                self.placed.add(put.group(1))
                self.sightings[put.group(1)] = self.location
                self.held = None
        if re.search(r'The ([a-z]+ \d+) is closed', observation):
            self.closed.add(re.search(r'The ([a-z]+ \d+) is closed', observation).group(1))
        listing = re.search(r'(?:On the [a-z]+ \d+|In it), you see (.+?)\.$', observation)
        if listing and self.location is not None:
            for name in re.findall(r'\b(?:a|an) ([a-z]+ \d+)', listing.group(1)):
                if name != self.held:
                    self.sightings[name] = self.location

    def find(self, object_class, exclude=()):
        """Where an unplaced object of the class was seen, as (name, place)"""
        for name in sorted(self.sightings):
            if name.rsplit(' ', 1)[0] == object_class and name not in exclude and name != self.held:
                return name, self.sightings[name]
        return None

    def place_of_class(self, object_class):
        for name in self.places:
            if name.rsplit(' ', 1)[0] == object_class:
                return name
        found = self.find(object_class)
        return found[0] if found else None

    def next_unvisited(self):
        for name in self.places:
            if name not in self.visited:
                return name
        return None


def _advice_progress(advice, memory):
    """How many advice items the successful commands so far have completed"""
    position = 0
    for command in memory.successes:
        if position >= len(advice):
            break
        item = advice[position]
        verb = command.split(' ', 1)[0]
        if verb != item.verb:
            continue
        if verb == 'take' and not command[len('take '):].startswith(item.object_class + ' '):
            continue
        position += 1
    return position


def _history(prompt):
    return prompts.block_after(prompt, 'Conversation so far', ('Latest observation',))


def reasoner_response(prompt):
    task = parse_instruction(prompts.field_value(prompt, 'Task') or '')
    advice = advice_list(task, _knowledge_triples(prompt))
    position = _advice_progress(advice, TextMemory(_history(prompt)))
    if position >= len(advice):
        return FINISH_ADVICE
    return advice[position].text


def _explore_command(memory):
    unvisited = memory.next_unvisited()
    if unvisited is not None:
        return 'go to {0}'.format(unvisited)
    for place in memory.places:
        if place in memory.closed:
            if memory.location != place:
                return 'go to {0}'.format(place)
            return 'open {0}'.format(place)
    return 'look'


def _reach(memory, place, open_first, then):
    if memory.location != place:
        return 'go to {0}'.format(place)
    if place in memory.closed and (open_first or memory.last_failure):
        return 'open {0}'.format(place)
    return then


def actor_response(prompt):
    advice = (prompts.field_value(prompt, 'Reasoner advice') or '').lower().strip().rstrip('.')
    memory = TextMemory(_history(prompt))
    open_first = knowledge.OPEN_FIRST in _knowledge_triples(prompt)
    if advice == FINISH_ADVICE or 'finish' in advice:
        return 'finish'

    match = re.match(r'^find (?:a|an|another) ([a-z]+) and take it$', advice)
    if match:
        found = memory.find(match.group(1), exclude=memory.placed)
        if found is None:
            return _explore_command(memory)
        name, place = found
        return _reach(memory, place, open_first, 'take {0} from {1}'.format(name, place))

    match = re.match(r'^put the ([a-z]+?)s? (?:in|on) the ([a-z]+)$', advice)
    if match and memory.held is not None:
        destination = memory.place_of_class(match.group(2))
        if destination is None:
            return _explore_command(memory)
        place = memory.sightings.get(destination, destination)
        return _reach(memory, place, open_first, 'put {0} in/on {1}'.format(memory.held, destination))

    if advice.startswith('put the knife down') and memory.held is not None:
        if memory.location is None:
            return _explore_command(memory)
        return 'put {0} in/on {1}'.format(memory.held, memory.location)

    match = re.match(r'^(clean|heat|cool) the ([a-z]+) with the ([a-z]+)$', advice)
    if match and memory.held is not None:
        appliance = memory.place_of_class(match.group(3))
        if appliance is None:
            return _explore_command(memory)
        return _reach(memory, appliance, False, '{0} {1} with {2}'.format(match.group(1), memory.held, appliance))

    match = re.match(r'^turn on the ([a-z]+)$', advice)
    if match:
        found = memory.find(match.group(1))
        if found is None:
            standing = memory.place_of_class(match.group(1))
            if standing is None:
                return _explore_command(memory)
            found = (standing, standing)
        name, place = found
        return _reach(memory, place, open_first, 'use {0}'.format(name))

    match = re.match(r'^slice the ([a-z]+) with the knife$', advice)
    if match and memory.held is not None:
        found = memory.find(match.group(1))
        if found is None:
            return _explore_command(memory)
        name, place = found
        return _reach(memory, place, open_first, 'slice {0} with {1}'.format(name, memory.held))

    return 'look'
