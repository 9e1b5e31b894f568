"""
scenarios.py: Scenario documents.

    A scenario document is JSON-compatible (scenario files are YAML):

        name: pick_mug
        seed: 3
        room_type: kitchen
        grid: ['#####', '#...#', ...]         # '#' wall, '.' floor
        agent: {cell: [row, col], heading: N, pitch: level}
        receptacles: [{id, class, cell | in, open, openable, height}, ...]
        objects: [{id, class, cell | in, flags, height}, ...]
        task: {type, object, receptacle, base, lamp, sliced, high_level, low_level}
        goals: [{kind, object, receptacle, count}, ...]      # optional
        noise: {mislabel, drop, confusion: {Fridge: Wall}}   # optional

"""
import copy
import logging
import os

import numpy as np

from homestead import goals as goal_conditions
from homestead import settings, world
from homestead.exceptions import ScenarioError, ExpertPathError
from homestead.utils import file_utils, rng_utils

logger = logging.getLogger('homestead')

_REQUIRED_FIELDS = ('grid', 'agent', 'task')


class Scenario:
    def __init__(self, name, state, instruction, goals, noise, seed, room_type='house', task=None, document=None):
        self.name = name
        self.state = state
        self.instruction = instruction
        self.goals = goals
        self.noise = noise
        self.seed = seed
        self.room_type = room_type
        self.task = task or {}
        self.document = document

    def goal_classes(self):
        return sorted({goal.object_class for goal in self.goals})

    def relevant_classes(self):
        relevant = set()
        for goal in self.goals:
            relevant.update(goal.classes())
        relevant.update(goal_conditions.TASK_APPLIANCES.get(self.instruction.task_type, ()))
        if self.task.get('sliced'):
            relevant.update(world.classes_with_role('knife'))
        return sorted(relevant)

    def closed_goal_receptacles(self):
        """Receptacles that start closed while holding a goal object"""
        goal_classes = set(self.goal_classes())
        closed = set()
        for obj in self.state.objects.values():
            if obj.object_class in goal_classes:
                closed.update(container.id for container in self.state.container_chain(obj) if container.is_closed)
        return sorted(closed)

    def expert_path_length(self):
        return goal_conditions.expert_path_length(self.state, self.goals)


def _field_error(field, message):
    return ScenarioError('{0}: {1}'.format(field, message))


def _as_cell(value, field):
    try:
        row, column = value
        return int(row), int(column)
    except (TypeError, ValueError):
        raise _field_error(field, 'expected a [row, col] pair')


def _validate_grid(grid):
    if not isinstance(grid, (list, tuple)) or not grid:
        raise _field_error('grid', 'expected a non-empty list of rows')
    widths = {len(row) for row in grid}
    if len(widths) != 1 or 0 in widths:
        raise _field_error('grid', 'rows must be non-empty and of equal length')
    for index, row in enumerate(grid):
        unknown = set(row) - {world.WALL, world.FLOOR}
        if unknown:
            raise _field_error('grid[{0}]'.format(index), 'unknown cell codes {0}'.format(''.join(sorted(unknown))))
    return tuple(grid)


def _build_objects(document, grid, catalog):
    entries = [('receptacles', entry) for entry in document.get('receptacles') or []]
    entries += [('objects', entry) for entry in document.get('objects') or []]
    objects = {}
    for index, (section, entry) in enumerate(entries):
        field = '{0}[{1}]'.format(section, sum(1 for other, _ in entries[:index] if other == section))
        object_id = entry.get('id')
        if not object_id:
            raise _field_error(field + '.id', 'missing field')
        if object_id in objects or object_id == world.HELD:
            raise _field_error(field + '.id', 'duplicate or reserved id {0}'.format(object_id))
        class_name = entry.get('class')
        if class_name is None:
            raise _field_error(field + '.class', 'missing field')
        if class_name not in catalog:
            raise _field_error(field + '.class', 'unknown object class {0}'.format(class_name))
        if 'cell' in entry:
            location = _as_cell(entry['cell'], field + '.cell')
            if not (0 <= location[0] < len(grid) and 0 <= location[1] < len(grid[0])):
                raise _field_error(field + '.cell', 'outside the grid')
            if grid[location[0]][location[1]] == world.WALL:
                raise _field_error(field + '.cell', 'object placed on a wall cell')
        elif 'in' in entry:
            location = entry['in']
        else:
            raise _field_error(field, 'missing field cell or in')
        height = entry.get('height', 'level')
        if height not in world.HEIGHTS:
            raise _field_error(field + '.height', 'unknown height {0}'.format(height))
        overrides = {'height': height}
        for key, attribute in (('openable', 'openable'), ('open', 'is_open')):
            if key in entry:
                overrides[attribute] = bool(entry[key])
        if 'open' not in entry and catalog[class_name].openable:
            overrides['is_open'] = False
        flags = dict(entry.get('flags') or {})
        unknown_flags = set(flags) - set(world.FLAGS)
        if unknown_flags:
            raise _field_error(field + '.flags', 'unknown flags {0}'.format(', '.join(sorted(unknown_flags))))
        overrides['flags'] = flags
        objects[object_id] = world.ObjectInstance.from_catalog(object_id, class_name, location, catalog=catalog,
                                                                **overrides)
    for object_id, obj in objects.items():
        if isinstance(obj.location, str):
            container = objects.get(obj.location)
            if container is None:
                raise _field_error('objects.{0}.in'.format(object_id), 'unknown container {0}'.format(obj.location))
            if not container.is_receptacle:
                raise _field_error('objects.{0}.in'.format(object_id), '{0} is not a receptacle'.format(container.id))
    for object_id, obj in objects.items():
        seen = [object_id]
        location = obj.location
        while isinstance(location, str):
            if location in seen:
                raise _field_error('objects.{0}.in'.format(object_id),
                                   'containment cycle {0}'.format(' -> '.join(seen + [location])))
            seen.append(location)
            location = objects[location].location
    return objects


def _build_goals(document, task):
    if 'goals' in document:
        entries = document['goals'] or []
        if not entries:
            raise _field_error('goals', 'total ≥ 1 violated')
        try:
            return [goal_conditions.GoalCondition.from_dict(entry) for entry in entries]
        except (KeyError, ValueError) as exception:
            raise _field_error('goals', str(exception))
    if not task.get('object'):
        raise _field_error('task.object', 'missing field')
    try:
        return goal_conditions.derive_goals(task['type'], task['object'], task.get('receptacle'), task.get('base'),
                                            task.get('lamp'), bool(task.get('sliced', False)))
    except ValueError as exception:
        raise _field_error('task', str(exception))


def load_scenario(document, name=None):
    """
    Build a Scenario from a parsed scenario document.

    Raises ScenarioError naming the offending field. Identical documents yield
    identical states.
    """
    if not isinstance(document, dict):
        raise ScenarioError('scenario: expected a mapping')
    document = copy.deepcopy(document)
    for field in _REQUIRED_FIELDS:
        if field not in document:
            raise _field_error(field, 'missing field')
    catalog = world.load_catalog()
    grid = _validate_grid(document['grid'])

    agent = document['agent'] or {}
    if 'cell' not in agent:
        raise _field_error('agent.cell', 'missing field')
    agent_cell = _as_cell(agent['cell'], 'agent.cell')
    heading = agent.get('heading', 'N')
    if heading not in world.HEADINGS:
        raise _field_error('agent.heading', 'unknown heading {0}'.format(heading))
    pitch = agent.get('pitch', 'level')
    if pitch not in world.PITCHES:
        raise _field_error('agent.pitch', 'unknown pitch {0}'.format(pitch))

    objects = _build_objects(document, grid, catalog)
    state = world.WorldState(grid, agent_cell, heading, pitch, objects,
                             fov_distance=int(document.get('fov_distance', settings.FOV_DISTANCE)))
    if not state.is_traversable(agent_cell):
        raise _field_error('agent.cell', 'agent not on traversable cell')

    task = dict(document['task'] or {})
    task_type = task.get('type')
    if task_type not in goal_conditions.TASK_TYPES:
        raise _field_error('task.type', 'unknown task type {0}'.format(task_type))
    high_level = task.get('high_level') or describe_task(task)
    instruction = goal_conditions.TaskInstruction(high_level, task_type, task.get('low_level') or [])
    goals = _build_goals(document, task)
    for goal in goals:
        for class_name in goal.classes():
            if class_name not in catalog:
                raise _field_error('goals', 'unknown object class {0}'.format(class_name))
    if goal_conditions.check_goal(state, goals).satisfied > 0:
        raise _field_error('goals', 'goal conditions already satisfied at load')

    noise_document = document.get('noise') or {}
    try:
        noise = world.NoiseConfig(float(noise_document.get('mislabel', 0.0)), float(noise_document.get('drop', 0.0)),
                                  noise_document.get('confusion'))
    except ValueError as exception:
        raise _field_error('noise', str(exception))

    return Scenario(name or document.get('name', 'scenario'), state, instruction, goals, noise,
                    int(document.get('seed', 0)), document.get('room_type', 'house'), task, document)


def read_scenario(path):
    document = file_utils.read_yaml(path)
    default_name = os.path.splitext(os.path.basename(path))[0]
    return load_scenario(document, name=(document or {}).get('name', default_name))


def _article(noun):
    return 'an' if noun[0].lower() in 'aeiou' else 'a'


def describe_task(task):
    """Default high-level instruction text for a task block"""
    task_type = task.get('type')
    target = _spaced(task.get('object', 'object'))
    receptacle = _spaced(task.get('receptacle') or 'receptacle')
    sliced = 'sliced ' if task.get('sliced') else ''
    if task_type == 'Pick&Place':
        return 'put {0} {1}{2} in the {3}'.format(_article(sliced or target), sliced, target, receptacle)
    if task_type == 'Stack&Place':
        base = _spaced(task.get('base') or 'container')
        return 'put {0} {1}{2} in {3} {4} and place it in the {5}'.format(_article(sliced or target), sliced,
                                                                            target, _article(base), base, receptacle)
    if task_type == 'PickTwo&Place':
        return 'put two {0}{1}s in the {2}'.format(sliced, target, receptacle)
    if task_type in ('Clean&Place', 'Heat&Place', 'Cool&Place'):
        adjective = {'Clean&Place': 'clean', 'Heat&Place': 'hot', 'Cool&Place': 'cold'}[task_type]
        return 'put {0} {1} {2}{3} in the {4}'.format(_article(adjective), adjective, sliced, target, receptacle)
    if task_type == 'ExamineInLight':
        lamp = _spaced(task.get('lamp') or 'lamp')
        return 'examine {0} {1}{2} under the {3}'.format(_article(sliced or target), sliced, target, lamp)
    return 'complete the task'


def _spaced(class_name):
    return class_name.lower()


# Generated rooms: a 7x7 walled square. The twelve non-corner cells of the
# ring next to the wall hold receptacles; the agent starts in the middle and
# every ring cell lies in its sensing range.
_GENERATED_GRID = ('#######',
                   '##...##',
                   '#.....#',
                   '#.....#',
                   '#.....#',
                   '##...##',
                   '#######')
_RING_SLOTS = ((1, 2), (1, 3), (1, 4), (2, 5), (3, 5), (4, 5), (5, 4), (5, 3), (5, 2), (4, 1), (3, 1), (2, 1))
_GENERATED_START = (3, 3)

_TASK_OBJECTS = {'Pick&Place': ('Mug', 'Book', 'CellPhone', 'KeyChain', 'Pen', 'Vase', 'Apple'),
                 'Stack&Place': ('Apple', 'Egg', 'Fork', 'Spoon', 'Tomato'),
                 'PickTwo&Place': ('Mug', 'Book', 'Pencil', 'CreditCard', 'Apple'),
                 'Clean&Place': ('Mug', 'Plate', 'Bowl', 'Cup', 'Apple', 'Cloth'),
                 'Heat&Place': ('Mug', 'Potato', 'Egg', 'Bread', 'Cup'),
                 'Cool&Place': ('Apple', 'Tomato', 'Lettuce', 'Cup', 'Potato'),
                 'ExamineInLight': ('Book', 'AlarmClock', 'Vase', 'Statue', 'CellPhone')}
_BASES = ('Plate', 'Bowl', 'Pan', 'Pot')
_DESTINATIONS = ('CounterTop', 'Cabinet', 'Shelf', 'DiningTable', 'SideTable', 'Drawer', 'Dresser')
_SOURCES = ('CounterTop', 'Shelf', 'DiningTable', 'SideTable', 'CoffeeTable', 'Desk')
_DISTRACTOR_OBJECTS = ('Pen', 'Book', 'Spoon', 'Fork', 'KeyChain', 'Cloth', 'RemoteControl', 'Statue')
_ROOM_TYPES = {'Pick&Place': 'living room', 'Stack&Place': 'kitchen', 'PickTwo&Place': 'living room',
               'Clean&Place': 'kitchen', 'Heat&Place': 'kitchen', 'Cool&Place': 'kitchen',
               'ExamineInLight': 'bedroom'}


def _choice(rng, options, exclude=()):
    options = [option for option in options if option not in exclude]
    return options[int(rng.integers(len(options)))]


def generate_document(task_type, seed, mislabel=0.0):
    """Seeded scenario document for a generated room"""
    if task_type not in goal_conditions.TASK_TYPES:
        raise ValueError('Unknown task type {0}'.format(task_type))
    rng = np.random.default_rng(rng_utils.derive_seed(task_type, seed))
    slots = [_RING_SLOTS[index] for index in rng.permutation(len(_RING_SLOTS))]
    receptacles, objects = [], []
    counts = {}

    def add_receptacle(class_name, **properties):
        counts[class_name] = counts.get(class_name, 0) + 1
        entry = {'id': '{0}_{1}'.format(class_name.lower(), counts[class_name]), 'class': class_name,
                 'cell': list(slots.pop(0))}
        entry.update(properties)
        receptacles.append(entry)
        return entry['id']

    def add_object(class_name, container):
        counts[class_name] = counts.get(class_name, 0) + 1
        entry = {'id': '{0}_{1}'.format(class_name.lower(), counts[class_name]), 'class': class_name,
                 'in': container}
        objects.append(entry)
        return entry['id']

    target = _choice(rng, _TASK_OBJECTS[task_type])
    destination = _choice(rng, _DESTINATIONS)
    task = {'type': task_type, 'object': target, 'receptacle': destination}
    destination_id = add_receptacle(destination, **({'open': False} if destination in ('Cabinet', 'Drawer') else {}))
    source_id = add_receptacle(_choice(rng, _SOURCES, exclude=(destination,)))

    if task_type == 'Stack&Place':
        base = _choice(rng, _BASES)
        task['base'] = base
        base_source = add_receptacle(_choice(rng, _SOURCES, exclude=(destination,)))
        add_object(base, base_source)
        add_object(target, source_id)
    elif task_type == 'PickTwo&Place':
        add_object(target, source_id)
        second_source = add_receptacle(_choice(rng, _SOURCES, exclude=(destination,)))
        add_object(target, second_source)
    elif task_type == 'ExamineInLight':
        lamp_holder = add_receptacle('Desk' if 'Desk' not in counts else 'SideTable')
        add_object('DeskLamp', lamp_holder)
        task['lamp'] = 'DeskLamp'
        add_object(target, source_id)
    else:
        add_object(target, source_id)

    if task_type == 'Clean&Place':
        sink = add_receptacle('SinkBasin')
        add_object('Faucet', sink)
    elif task_type == 'Heat&Place':
        add_receptacle('Microwave', open=False)
    elif task_type == 'Cool&Place':
        add_receptacle('Fridge', open=False)

    for _ in range(int(rng.integers(1, 3))):
        add_object(_choice(rng, _DISTRACTOR_OBJECTS, exclude=(target,)),
                   add_receptacle(_choice(rng, _SOURCES, exclude=(destination,))))

    # Mislabels turn the target into a distractor class and the destination into a wall
    confusion = {target: _choice(rng, _DISTRACTOR_OBJECTS, exclude=(target,)), destination: world.WALL_CLASS}
    if task_type == 'Cool&Place':
        confusion['Fridge'] = world.WALL_CLASS
    task['high_level'] = describe_task(task)
    return {'name': '{0}-{1}'.format(goal_conditions.TASK_TYPE_LABELS[task_type].lower(), seed),
            'seed': int(seed),
            'room_type': _ROOM_TYPES[task_type],
            'grid': list(_GENERATED_GRID),
            'agent': {'cell': list(_GENERATED_START), 'heading': _choice(rng, world.HEADINGS), 'pitch': 'level'},
            'receptacles': receptacles,
            'objects': objects,
            'task': task,
            'noise': {'mislabel': float(mislabel), 'drop': 0.0, 'confusion': confusion}}


def generate_scenario(task_type, seed, mislabel=0.0):
    return load_scenario(generate_document(task_type, seed, mislabel))


def check_solvable(scenario):
    try:
        return scenario.expert_path_length()
    except ExpertPathError:
        logger.warning('Scenario has no expert trajectory', extra_tags={'scenario': scenario.name})
        return None
