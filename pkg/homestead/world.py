"""
world.py: The grid household simulator.

    Cells are (row, col) tuples with row 0 on the northern edge. The
    simulator owns the ground truth: agent pose, every object instance
    and the flags the tasks are judged on. Agents only ever see it
    through observe().

"""
import functools
import logging

from homestead import settings
from homestead.utils import file_utils, rng_utils

logger = logging.getLogger('homestead')

HEADINGS = ('N', 'E', 'S', 'W')
HEADING_OFFSETS = {'N': (-1, 0), 'E': (0, 1), 'S': (1, 0), 'W': (0, -1)}
PITCHES = ('down', 'level', 'up')
HEIGHTS = ('low', 'level', 'high')
VISIBLE_HEIGHTS = {'up': ('level', 'high'), 'level': ('level',), 'down': ('low', 'level')}
CANONICAL_PITCH = {'low': 'down', 'level': 'level', 'high': 'up'}

NAVIGATION_ACTIONS = ('RotateRight', 'RotateLeft', 'MoveAhead', 'LookUp', 'LookDown')
INTERACTION_ACTIONS = ('PickupObject', 'PutObject', 'OpenObject', 'CloseObject',
                       'ToggleObjectOn', 'ToggleObjectOff', 'SliceObject')
FLAGS = ('clean', 'hot', 'cold', 'sliced', 'toggled_on')

WALL = '#'
FLOOR = '.'
WALL_CLASS = 'Wall'
HELD = 'held'

COLLISION = 'collision: path blocked'
HANDS_FULL = 'cannot hold more than one object'
HANDS_EMPTY = 'not holding any object'
NOT_VISIBLE = 'target not visible'
NOT_INTERACTABLE = 'target not interactable'
RECEPTACLE_CLOSED = 'receptacle is closed'
ALREADY_OPEN = 'object is already open'
ALREADY_CLOSED = 'object is already closed'
ALREADY_ON = 'object is already on'
ALREADY_OFF = 'object is already off'
ALREADY_SLICED = 'object is already sliced'
NEEDS_KNIFE = 'slicing requires holding a knife'
PITCH_LIMIT = 'camera cannot tilt further'
UNKNOWN_TARGET = 'unknown target'
MISSING_TARGET = 'interaction requires a target'

ERROR_KINDS = {COLLISION: 'collision',
               HANDS_FULL: 'hands-full',
               HANDS_EMPTY: 'hands-empty',
               NOT_VISIBLE: 'target-not-visible',
               NOT_INTERACTABLE: 'target-not-interactable',
               RECEPTACLE_CLOSED: 'receptacle-closed',
               ALREADY_OPEN: 'no-effect',
               ALREADY_CLOSED: 'no-effect',
               ALREADY_ON: 'no-effect',
               ALREADY_OFF: 'no-effect',
               ALREADY_SLICED: 'no-effect',
               NEEDS_KNIFE: 'target-not-interactable',
               PITCH_LIMIT: 'no-effect',
               UNKNOWN_TARGET: 'target-not-visible',
               MISSING_TARGET: 'target-not-interactable'}


def error_kind(message):
    if not message:
        return None
    return ERROR_KINDS.get(message, 'other')


class ObjectClass:
    def __init__(self, name, pickupable=False, receptacle=False, openable=False, toggleable=False,
                 sliceable=False, roles=()):
        self.name = name
        self.pickupable = pickupable
        self.receptacle = receptacle
        self.openable = openable
        self.toggleable = toggleable
        self.sliceable = sliceable
        self.roles = tuple(roles)


@functools.lru_cache(maxsize=None)
def load_catalog(path=None):
    if path is None:
        path = file_utils.package_path(settings.OBJECT_CATALOG)
    document = file_utils.read_yaml(path)
    return {name: ObjectClass(name, **(properties or {})) for name, properties in document.items()}


def classes_with_role(role, catalog=None):
    catalog = catalog or load_catalog()
    return sorted(name for name, object_class in catalog.items() if role in object_class.roles)


def canonical_class_name(name, catalog=None):
    """Map free text such as 'sinkbasin' or 'desk lamp' onto a catalog class, or None"""
    catalog = catalog or load_catalog()
    key = name.replace(' ', '').replace('_', '').lower()
    for class_name in catalog:
        if class_name.lower() == key:
            return class_name
    if key == WALL_CLASS.lower():
        return WALL_CLASS
    return None


class ObjectInstance:
    def __init__(self, object_id, object_class, location, pickupable=False, is_receptacle=False,
                 openable=False, toggleable=False, sliceable=False, roles=(), is_open=True,
                 height='level', flags=None, picked=False):
        self.id = object_id
        self.object_class = object_class
        self.location = location
        self.pickupable = pickupable
        self.is_receptacle = is_receptacle
        self.openable = openable
        self.toggleable = toggleable
        self.sliceable = sliceable
        self.roles = tuple(roles)
        self.is_open = is_open
        self.height = height
        self.flags = {flag: False for flag in FLAGS}
        if flags:
            self.flags.update(flags)
        self.picked = picked

    @classmethod
    def from_catalog(cls, object_id, class_name, location, catalog=None, **overrides):
        catalog = catalog or load_catalog()
        object_class = catalog[class_name]
        properties = {'pickupable': object_class.pickupable, 'is_receptacle': object_class.receptacle,
                      'openable': object_class.openable, 'toggleable': object_class.toggleable,
                      'sliceable': object_class.sliceable, 'roles': object_class.roles}
        properties.update(overrides)
        return cls(object_id, class_name, location, **properties)

    def copy(self):
        duplicate = ObjectInstance.__new__(ObjectInstance)
        duplicate.__dict__.update(self.__dict__)
        duplicate.flags = dict(self.flags)
        return duplicate

    @property
    def is_closed(self):
        return not self.is_open

    def has_role(self, role):
        return role in self.roles

    def occupies_cell(self):
        return isinstance(self.location, tuple) and not self.pickupable

    def signature(self):
        return (self.id, self.location, self.is_open, self.picked, tuple(self.flags[flag] for flag in FLAGS))

    def __repr__(self):
        return 'ObjectInstance({0}, {1}, {2})'.format(self.id, self.object_class, self.location)


class LowLevelAction:
    def __init__(self, kind, target=None):
        if kind not in NAVIGATION_ACTIONS and kind not in INTERACTION_ACTIONS:
            raise ValueError('Unknown low-level action {0}'.format(kind))
        self.kind = kind
        self.target = target

    @property
    def is_interaction(self):
        return self.kind in INTERACTION_ACTIONS

    def __eq__(self, other):
        return isinstance(other, LowLevelAction) and (self.kind, self.target) == (other.kind, other.target)

    def __hash__(self):
        return hash((self.kind, self.target))

    def __repr__(self):
        if self.target is None:
            return self.kind
        return '{0}({1})'.format(self.kind, self.target)


class StepOutcome:
    def __init__(self, success, error_message=None):
        self.success = success
        self.error_message = error_message

    @property
    def error_kind(self):
        return error_kind(self.error_message)


class WorldState:
    def __init__(self, grid, agent_cell, heading='N', pitch='level', objects=None, held=None, step_count=0,
                 fov_distance=None):
        self.grid = tuple(grid)
        self.agent_cell = tuple(agent_cell)
        self.heading = heading
        self.pitch = pitch
        self.objects = objects if objects is not None else {}
        self.held = held
        self.step_count = step_count
        self.fov_distance = fov_distance if fov_distance is not None else settings.FOV_DISTANCE
        self._occupants = None

    @property
    def shape(self):
        return len(self.grid), len(self.grid[0])

    @property
    def pose(self):
        return self.agent_cell, self.heading, self.pitch

    def copy(self):
        duplicate = WorldState.__new__(WorldState)
        duplicate.__dict__.update(self.__dict__)
        duplicate.objects = {object_id: obj.copy() for object_id, obj in self.objects.items()}
        # Cell-occupying objects never move, so the index is shared between copies
        duplicate._occupants = self.occupants
        return duplicate

    def with_pose(self, cell, heading, pitch):
        duplicate = self.copy()
        duplicate.agent_cell, duplicate.heading, duplicate.pitch = tuple(cell), heading, pitch
        return duplicate

    @property
    def occupants(self):
        if self._occupants is None:
            self._occupants = {}
            for object_id in sorted(self.objects):
                obj = self.objects[object_id]
                if obj.occupies_cell():
                    self._occupants.setdefault(obj.location, object_id)
        return self._occupants

    def in_bounds(self, cell):
        rows, columns = self.shape
        return 0 <= cell[0] < rows and 0 <= cell[1] < columns

    def is_wall(self, cell):
        return self.grid[cell[0]][cell[1]] == WALL

    def occupant(self, cell):
        object_id = self.occupants.get(cell)
        return None if object_id is None else self.objects[object_id]

    def is_opaque(self, cell):
        return self.is_wall(cell) or cell in self.occupants

    def is_traversable(self, cell):
        return self.in_bounds(cell) and not self.is_wall(cell) and cell not in self.occupants

    def front_cell(self, cell=None, heading=None):
        cell = self.agent_cell if cell is None else cell
        offset = HEADING_OFFSETS[heading or self.heading]
        return cell[0] + offset[0], cell[1] + offset[1]

    def held_object(self):
        return None if self.held is None else self.objects[self.held]

    def container_chain(self, obj):
        chain = []
        location = obj.location
        while isinstance(location, str) and location != HELD:
            container = self.objects[location]
            chain.append(container)
            location = container.location
        return chain

    def root_cell(self, obj):
        chain = self.container_chain(obj)
        outermost = chain[-1] if chain else obj
        return outermost.location if isinstance(outermost.location, tuple) else None

    def effective_height(self, obj):
        chain = self.container_chain(obj)
        return chain[-1].height if chain else obj.height

    def is_enclosed(self, obj):
        return any(container.is_closed for container in self.container_chain(obj))

    def contents(self, receptacle_id, recursive=False):
        direct = [self.objects[object_id] for object_id in sorted(self.objects)
                  if self.objects[object_id].location == receptacle_id]
        if not recursive:
            return direct
        everything = list(direct)
        for obj in direct:
            everything += self.contents(obj.id, recursive=True)
        return everything

    def objects_of_class(self, object_class):
        return [self.objects[object_id] for object_id in sorted(self.objects)
                if self.objects[object_id].object_class == object_class]

    def is_visible(self, obj, cells=None):
        """Whether obj is in view under the current pose and camera pitch"""
        if obj.location == HELD:
            return False
        root = self.root_cell(obj)
        if root is None:
            return False
        if cells is None:
            cells = field_of_view(self)
        if root not in cells:
            return False
        if obj.occupies_cell():
            return True
        if self.is_enclosed(obj):
            return False
        return self.effective_height(obj) in VISIBLE_HEIGHTS[self.pitch]

    def is_interactable(self, obj):
        if obj.location == HELD or self.root_cell(obj) != self.front_cell():
            return False
        if self.is_enclosed(obj):
            return False
        # Even cell-sized receptacles need the camera on their shelf height
        return self.effective_height(obj) in VISIBLE_HEIGHTS[self.pitch] and self.is_visible(obj)

    def egocentric(self, cell):
        """(forward, lateral) offset of cell from the agent, lateral positive to the right"""
        forward_offset = HEADING_OFFSETS[self.heading]
        right_offset = (forward_offset[1], -forward_offset[0])
        delta = (cell[0] - self.agent_cell[0], cell[1] - self.agent_cell[1])
        forward = delta[0] * forward_offset[0] + delta[1] * forward_offset[1]
        lateral = delta[0] * right_offset[0] + delta[1] * right_offset[1]
        return forward, lateral

    def signature(self, object_ids=None):
        if object_ids is None:
            object_ids = sorted(self.objects)
        return (self.pose, self.held, tuple(self.objects[object_id].signature() for object_id in object_ids))

    def traversable_cells(self):
        rows, columns = self.shape
        return [(row, column) for row in range(rows) for column in range(columns)
                if self.is_traversable((row, column))]


def _line_cells(start, end):
    """Intermediate cells of the Bresenham line from start to end"""
    (row, column), (end_row, end_column) = start, end
    delta_row, delta_column = abs(end_row - row), abs(end_column - column)
    step_row = 1 if end_row > row else -1
    step_column = 1 if end_column > column else -1
    error = delta_column - delta_row
    cells = []
    while (row, column) != (end_row, end_column):
        doubled = 2 * error
        if doubled > -delta_row:
            error -= delta_row
            column += step_column
        if doubled < delta_column:
            error += delta_column
            row += step_row
        cells.append((row, column))
    return cells[:-1]


def line_of_sight(state, start, end):
    for line in (_line_cells(start, end), _line_cells(end, start)):
        if not any(state.is_opaque(cell) for cell in line):
            return True
    return False


def field_of_view(state):
    """Cells in the forward cone: forward f >= 1, |lateral| <= f, f + |lateral| <= D, unoccluded"""
    forward_offset = HEADING_OFFSETS[state.heading]
    right_offset = (forward_offset[1], -forward_offset[0])
    row, column = state.agent_cell
    cells = set()
    for forward in range(1, state.fov_distance + 1):
        for lateral in range(-forward, forward + 1):
            if forward + abs(lateral) > state.fov_distance:
                continue
            cell = (row + forward * forward_offset[0] + lateral * right_offset[0],
                    column + forward * forward_offset[1] + lateral * right_offset[1])
            if state.in_bounds(cell) and line_of_sight(state, state.agent_cell, cell):
                cells.add(cell)
    return frozenset(cells)


def visible_objects(state, cells=None):
    if cells is None:
        cells = field_of_view(state)
    return [state.objects[object_id] for object_id in sorted(state.objects)
            if state.is_visible(state.objects[object_id], cells)]


class Detection:
    def __init__(self, object_class, cell, instance_id):
        self.object_class = object_class
        self.cell = tuple(cell)
        self.instance_id = instance_id

    def __eq__(self, other):
        return isinstance(other, Detection) and self.as_tuple() == other.as_tuple()

    def __hash__(self):
        return hash(self.as_tuple())

    def as_tuple(self):
        return self.object_class, self.cell, self.instance_id

    def __repr__(self):
        return 'Detection({0}, {1}, {2})'.format(*self.as_tuple())


def wall_token(cell):
    return 'wall-{0}-{1}'.format(*cell)


class NoiseConfig:
    def __init__(self, mislabel=0.0, drop=0.0, confusion=None):
        if not 0.0 <= mislabel <= 1.0 or not 0.0 <= drop <= 1.0:
            raise ValueError('Noise probabilities must lie in [0, 1]')
        self.mislabel = mislabel
        self.drop = drop
        self.confusion = dict(confusion or {})

    def with_mislabel(self, mislabel):
        return NoiseConfig(mislabel=mislabel, drop=self.drop, confusion=self.confusion)


class EgocentricObservation:
    def __init__(self, detections, visible_cells, rgb_digest, pitch):
        self.detections = tuple(detections)
        self.visible_cells = frozenset(visible_cells)
        self.rgb_digest = rgb_digest
        self.pitch = pitch

    def classes(self):
        return sorted({detection.object_class for detection in self.detections
                       if detection.object_class != WALL_CLASS})


def scene_digest(state, cells=None):
    """Hash of the true visible scene in egocentric terms; absolute pose is deliberately absent"""
    if cells is None:
        cells = field_of_view(state)
    facts = []
    for cell in cells:
        facts.append(state.egocentric(cell) + ('wall' if state.is_wall(cell) else 'floor',))
    for obj in visible_objects(state, cells):
        facts.append(state.egocentric(state.root_cell(obj)) + _appearance(obj))
    facts.append(('pitch', state.pitch))
    held = state.held_object()
    if held is not None:
        facts.append(('held',) + _appearance(held))
    return file_utils.text_digest(repr(sorted(facts, key=repr)))


def _appearance(obj):
    return obj.object_class, obj.is_open, tuple(obj.flags[flag] for flag in FLAGS)


def observe(state, noise=None, rng=None):
    """
    Egocentric detections of the current view.

    Parameters
    ----------
    state : WorldState
    noise : NoiseConfig, optional
        Each visible object draws two uniforms in id order: the first drops it
        when below noise.drop, the second swaps its class through the confusion
        table when below noise.mislabel. Walls are never corrupted.
    rng : int, seed sequence or numpy Generator

    Returns
    -------
    EgocentricObservation
    """
    cells = field_of_view(state)
    detections = [Detection(WALL_CLASS, cell, wall_token(cell)) for cell in sorted(cells) if state.is_wall(cell)]
    if noise is not None:
        rng = rng_utils.make_rng(rng)
    for obj in visible_objects(state, cells):
        object_class = obj.object_class
        if noise is not None:
            drop_draw, label_draw = rng.random(2)
            if drop_draw < noise.drop:
                continue
            if label_draw < noise.mislabel:
                object_class = noise.confusion.get(object_class, object_class)
        detections.append(Detection(object_class, state.root_cell(obj), obj.id))
    return EgocentricObservation(detections, cells, scene_digest(state, cells), state.pitch)


def step(state, action):
    """
    Apply one low-level action.

    Returns a new WorldState and a StepOutcome. A failed action returns a copy
    of the input whose only change is the incremented step count.
    """
    advanced = state.copy()
    advanced.step_count = state.step_count + 1
    if action.kind in NAVIGATION_ACTIONS:
        error = _NAVIGATION_HANDLERS[action.kind](advanced)
    else:
        error = _interact(advanced, action.kind, action.target)
    if error is not None:
        unchanged = state.copy()
        unchanged.step_count = state.step_count + 1
        return unchanged, StepOutcome(False, error)
    return advanced, StepOutcome(True)


def _rotate(offset):
    def rotate(state):
        state.heading = HEADINGS[(HEADINGS.index(state.heading) + offset) % len(HEADINGS)]
    return rotate


def _tilt(offset):
    def tilt(state):
        index = PITCHES.index(state.pitch) + offset
        if not 0 <= index < len(PITCHES):
            return PITCH_LIMIT
        state.pitch = PITCHES[index]
    return tilt


def _move_ahead(state):
    cell = state.front_cell()
    if not state.is_traversable(cell):
        return COLLISION
    state.agent_cell = cell


_NAVIGATION_HANDLERS = {'RotateRight': _rotate(1), 'RotateLeft': _rotate(-1), 'MoveAhead': _move_ahead,
                        'LookUp': _tilt(1), 'LookDown': _tilt(-1)}


def _interact(state, kind, target_id):
    if target_id is None:
        return MISSING_TARGET
    target = state.objects.get(target_id)
    if target is None:
        return UNKNOWN_TARGET
    if kind == 'PickupObject' and state.held is not None:
        return HANDS_FULL
    if not state.is_interactable(target):
        return NOT_VISIBLE
    return _INTERACTION_HANDLERS[kind](state, target)


def _pickup(state, target):
    if not target.pickupable:
        return NOT_INTERACTABLE
    target.location = HELD
    target.picked = True
    state.held = target.id


def _put(state, target):
    if state.held is None:
        return HANDS_EMPTY
    if not target.is_receptacle:
        return NOT_INTERACTABLE
    if target.is_closed:
        return RECEPTACLE_CLOSED
    state.objects[state.held].location = target.id
    state.held = None
    _apply_appliances(state, target)


def _open(state, target):
    if not target.openable:
        return NOT_INTERACTABLE
    if target.is_open:
        return ALREADY_OPEN
    target.is_open = True


def _close(state, target):
    if not target.openable:
        return NOT_INTERACTABLE
    if not target.is_open:
        return ALREADY_CLOSED
    target.is_open = False
    if target.has_role('cooling'):
        for obj in state.contents(target.id, recursive=True):
            obj.flags['cold'] = True


def _toggle_on(state, target):
    if not target.toggleable:
        return NOT_INTERACTABLE
    if target.flags['toggled_on']:
        return ALREADY_ON
    target.flags['toggled_on'] = True
    _apply_appliances(state, target)
    if isinstance(target.location, str) and target.location != HELD:
        _apply_appliances(state, state.objects[target.location])


def _toggle_off(state, target):
    if not target.toggleable:
        return NOT_INTERACTABLE
    if not target.flags['toggled_on']:
        return ALREADY_OFF
    target.flags['toggled_on'] = False


def _slice(state, target):
    if not target.sliceable:
        return NOT_INTERACTABLE
    held = state.held_object()
    if held is None or not held.has_role('knife'):
        return NEEDS_KNIFE
    if target.flags['sliced']:
        return ALREADY_SLICED
    target.flags['sliced'] = True


def _apply_appliances(state, receptacle):
    """Cleaning and heating happen while the receptacle's appliance is running"""
    if receptacle.has_role('cleaning'):
        contents = state.contents(receptacle.id)
        if any(obj.toggleable and obj.flags['toggled_on'] for obj in contents):
            for obj in state.contents(receptacle.id, recursive=True):
                if obj.pickupable:
                    obj.flags['clean'] = True
    if receptacle.has_role('heating') and receptacle.flags['toggled_on']:
        for obj in state.contents(receptacle.id, recursive=True):
            obj.flags['hot'] = True


_INTERACTION_HANDLERS = {'PickupObject': _pickup, 'PutObject': _put, 'OpenObject': _open,
                         'CloseObject': _close, 'ToggleObjectOn': _toggle_on, 'ToggleObjectOff': _toggle_off,
                         'SliceObject': _slice}


def heading_towards(cell, neighbour):
    delta = (neighbour[0] - cell[0], neighbour[1] - cell[1])
    for heading, offset in HEADING_OFFSETS.items():
        if offset == delta:
            return heading
    return None


def interaction_pitches(height):
    """Camera pitches that bring an object at height into view, canonical pitch first"""
    canonical = CANONICAL_PITCH[height]
    return [canonical] + [pitch for pitch in PITCHES if pitch != canonical and height in VISIBLE_HEIGHTS[pitch]]


def interaction_poses(state, obj):
    """Poses (cell, heading, pitch) from which obj can be reached, if its root cell is on the grid"""
    root = state.root_cell(obj)
    if root is None:
        return []
    pitches = interaction_pitches(state.effective_height(obj))
    poses = []
    for heading in HEADINGS:
        offset = HEADING_OFFSETS[heading]
        cell = (root[0] - offset[0], root[1] - offset[1])
        if state.is_traversable(cell):
            poses.extend((cell, heading, pitch) for pitch in pitches)
    return poses
