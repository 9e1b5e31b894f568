"""
navigation.py: Deterministic action policy.

    Distance fields come from a first-order Fast Marching solve of the unit
    speed eikonal equation on the traversability grid. Navigation goals are
    picked from the semantic maps, and next_action descends the field one
    low-level action at a time.

"""
import heapq
import logging
import math

import numpy as np
from scipy import ndimage

from homestead import maps as semantic_maps
from homestead import world
from homestead.exceptions import PolicyError
from homestead.utils import rng_utils

logger = logging.getLogger('homestead')

LANDMARK = 'landmark'
EXPLORATION = 'exploration'
SLICE_REPLAY = 'slice-replay'

_NEIGHBOUR_ORDER = ('N', 'E', 'S', 'W')


def _eikonal_update(horizontal, vertical):
    """Upwind solution of |grad T| = 1 from the smaller known neighbour along each axis"""
    if np.isinf(horizontal) and np.isinf(vertical):
        return np.inf
    if np.isinf(horizontal) or np.isinf(vertical) or abs(horizontal - vertical) >= 1.0:
        return min(horizontal, vertical) + 1.0
    return 0.5 * (horizontal + vertical + math.sqrt(2.0 - (horizontal - vertical) ** 2))


def fmm_distance_field(traversable, goals):
    """
    Geodesic distance from every cell to the nearest goal cell.

    Parameters
    ----------
    traversable : 2d bool array
    goals : iterable of (row, col)
        Must be non-empty and traversable.

    Returns
    -------
    field : 2d float array
        0 on goal cells, numpy.inf where no goal is reachable.
    """
    traversable = np.asarray(traversable, dtype=bool)
    goals = [tuple(goal) for goal in goals]
    if not goals:
        raise ValueError('fmm_distance_field needs at least one goal cell')
    rows, columns = traversable.shape
    field = np.full(traversable.shape, np.inf)
    accepted = np.zeros(traversable.shape, dtype=bool)
    heap = []
    for goal in goals:
        if not (0 <= goal[0] < rows and 0 <= goal[1] < columns) or not traversable[goal]:
            raise ValueError('Goal cell {0} is not traversable'.format(goal))
        field[goal] = 0.0
        heapq.heappush(heap, (0.0, goal))

    def known(row, column):
        if 0 <= row < rows and 0 <= column < columns and accepted[row, column]:
            return field[row, column]
        return np.inf

    while heap:
        value, cell = heapq.heappop(heap)
        if accepted[cell]:
            continue
        accepted[cell] = True
        for offset in world.HEADING_OFFSETS.values():
            row, column = cell[0] + offset[0], cell[1] + offset[1]
            if not (0 <= row < rows and 0 <= column < columns):
                continue
            if accepted[row, column] or not traversable[row, column]:
                continue
            horizontal = min(known(row, column - 1), known(row, column + 1))
            vertical = min(known(row - 1, column), known(row + 1, column))
            candidate = _eikonal_update(horizontal, vertical)
            if candidate < field[row, column]:
                field[row, column] = candidate
                heapq.heappush(heap, (candidate, (row, column)))
    return field


class NavGoal:
    def __init__(self, cell, kind, target_class=None, target_cell=None, tokens=(), pitch=None, source=None):
        self.cell = tuple(cell)
        self.kind = kind
        self.target_class = target_class
        self.target_cell = None if target_cell is None else tuple(target_cell)
        self.tokens = tuple(tokens)
        self.pitch = pitch
        self.source = source

    def as_tuple(self):
        return self.cell, self.kind, self.target_class, self.target_cell, self.tokens, self.pitch, self.source

    def __eq__(self, other):
        return isinstance(other, NavGoal) and self.as_tuple() == other.as_tuple()

    def __repr__(self):
        return 'NavGoal({0}, {1}, target={2}@{3})'.format(self.cell, self.kind, self.target_class, self.target_cell)


class SliceMemory:
    def __init__(self, cell=None, object_id=None, object_class=None, target_cell=None):
        self.cell = None if cell is None else tuple(cell)
        self.object_id = object_id
        self.object_class = object_class
        self.target_cell = None if target_cell is None else tuple(target_cell)

    @property
    def is_set(self):
        return self.cell is not None


def record_slice(slice_mem, cell, object_id, object_class=None, target_cell=None, success=True):
    """Remember where the agent stood for the latest successful slice"""
    if not success:
        return slice_mem
    return SliceMemory(cell, object_id, object_class, target_cell)


class ExploreState:
    """Per-episode exploration bookkeeping: call count, seeded sampler, explored mask, visit times"""
    def __init__(self, shape, seed=0):
        self.calls = 0
        self.rng = rng_utils.make_rng(seed)
        self.explored = np.zeros(shape, dtype=bool)
        self.last_visit = {}
        self.clock = 0

    def visit(self, cell, explored=None):
        self.clock += 1
        self.last_visit[tuple(cell)] = self.clock
        if explored is not None:
            self.explored = explored


def _nearest(cells, anchor):
    return min(cells, key=lambda cell: (abs(cell[0] - anchor[0]) + abs(cell[1] - anchor[1]), cell))


def exploration_goal(explore_state, traversable, reachable=None):
    """
    Next exploration target.

    The first four calls visit the traversable cells nearest the NW, NE, SE
    and SW grid corners. Later calls sample, with the episode's seeded
    generator, among the cells farthest from anything explored. Once nothing
    unexplored is left the least recently visited cell is returned.
    """
    traversable = np.asarray(traversable, dtype=bool)
    candidates_mask = traversable if reachable is None else traversable & reachable
    candidates = [(int(row), int(column)) for row, column in zip(*np.nonzero(candidates_mask))]
    if not candidates:
        raise ValueError('exploration_goal needs at least one traversable cell')
    explore_state.calls += 1
    rows, columns = traversable.shape
    corners = ((0, 0), (0, columns - 1), (rows - 1, columns - 1), (rows - 1, 0))
    if explore_state.calls <= len(corners):
        return _nearest(candidates, corners[explore_state.calls - 1])

    explored = explore_state.explored
    if explored.shape != traversable.shape:
        explored = np.zeros(traversable.shape, dtype=bool)
    if explored.any():
        frontier_distance = ndimage.distance_transform_edt(~explored)
    else:
        frontier_distance = np.ones(traversable.shape)
    scores = np.array([frontier_distance[cell] for cell in candidates])
    if scores.max() > 0:
        best = [cell for cell, score in zip(candidates, scores) if score == scores.max()]
        return best[int(explore_state.rng.integers(len(best)))]
    return min(candidates, key=lambda cell: (explore_state.last_visit.get(cell, 0), cell))


def _manhattan(first, second):
    return abs(first[0] - second[0]) + abs(first[1] - second[1])


def _band_cells(traversable, centre, radius, agent_field):
    rows, columns = traversable.shape
    cells = []
    for row in range(centre[0] - radius, centre[0] + radius + 1):
        for column in range(centre[1] - radius, centre[1] + radius + 1):
            cell = (row, column)
            if not (0 <= row < rows and 0 <= column < columns) or not traversable[cell]:
                continue
            if 1 <= _manhattan(cell, centre) <= radius and np.isfinite(agent_field[cell]):
                cells.append(cell)
    return cells


def _touching_cells(traversable, centre, agent_field):
    """Traversable cells in the 8-neighbourhood, the goal rule used when the band heuristic is ablated"""
    rows, columns = traversable.shape
    cells = []
    for row in range(centre[0] - 1, centre[0] + 2):
        for column in range(centre[1] - 1, centre[1] + 2):
            cell = (row, column)
            if cell == centre or not (0 <= row < rows and 0 <= column < columns):
                continue
            if traversable[cell] and np.isfinite(agent_field[cell]):
                cells.append(cell)
    return cells


def select_navigation_goal(maps, target_class, explore_state, slice_mem, agent_cell, runtime_context,
                           exclude_tokens=()):
    """
    Deterministic navigation goal for target_class.

    Order of preference: the slice-replay site when the target is the sliced
    object; the closest located instance (geodesic distance from the agent)
    with a goal cell from the traversable band around it; otherwise an
    exploration goal.
    """
    agent_cell = tuple(agent_cell)
    use_supplementary = 'm-prime' not in runtime_context.ablate
    traversable = semantic_maps.traversability_grid(maps, runtime_context.OPTIMISTIC_UNKNOWN, use_supplementary)
    traversable[agent_cell] = True

    if SLICE_REPLAY not in runtime_context.ablate and slice_mem is not None and slice_mem.is_set \
            and target_class == slice_mem.object_class and traversable[slice_mem.cell]:
        return NavGoal(slice_mem.cell, SLICE_REPLAY, target_class, slice_mem.target_cell,
                       (slice_mem.object_id,), maps.track_pitch.get(slice_mem.object_id))

    agent_field = fmm_distance_field(traversable, [agent_cell])
    located = semantic_maps.locate(maps, target_class, use_supplementary)
    exclude_tokens = set(exclude_tokens)
    instances = [] if located is None else \
        [cell for cell in located.cells if not set(located.tokens[cell]) <= exclude_tokens]
    if instances:
        options = []
        for instance in instances:
            if 'traversable-goal' in runtime_context.ablate:
                band = _touching_cells(traversable, instance, agent_field)
            else:
                band = _band_cells(traversable, instance, runtime_context.BAND_RADIUS, agent_field)
            if band:
                options.append((min(agent_field[cell] for cell in band), instance, band))
        if options:
            _, instance, band = min(options, key=lambda option: (option[0], option[1]))
            if 'traversable-goal' in runtime_context.ablate:
                goal_cell = min(band, key=lambda cell: (agent_field[cell], cell))
            else:
                goal_cell = min(band, key=lambda cell: (_manhattan(cell, instance), agent_field[cell], cell))
            tokens = [token for token in located.tokens[instance] if token not in exclude_tokens]
            pitch = maps.track_pitch.get(tokens[0])
            return NavGoal(goal_cell, LANDMARK, target_class, instance, tokens, pitch, located.source)
        logger.warning('No traversable cell near {0}, exploring instead'.format(target_class),
                       extra_tags={'target_class': target_class})

    reachable = np.isfinite(agent_field)
    cell = exploration_goal(explore_state, traversable, reachable)
    return NavGoal(cell, EXPLORATION, target_class)


def _turn_towards(heading, wanted):
    difference = (world.HEADINGS.index(wanted) - world.HEADINGS.index(heading)) % 4
    if difference == 3:
        return world.LowLevelAction('RotateLeft')
    return world.LowLevelAction('RotateRight')


def next_action(pose, field, target_cell=None, target_pitch=None, pending=None):
    """
    One low-level action towards the goal of field.

    When target_cell is 4-adjacent the agent turns to face it, tilts the
    camera to target_pitch and then emits pending (None once in position).
    Otherwise it takes the steepest-descent neighbour, ties broken N, E, S, W.
    Returns None on arrival.
    """
    cell, heading, pitch = pose
    cell = tuple(cell)
    if target_cell is not None and _manhattan(cell, target_cell) == 1:
        wanted = world.heading_towards(cell, target_cell)
        if heading != wanted:
            return _turn_towards(heading, wanted)
        if target_pitch is not None and pitch != target_pitch:
            if world.PITCHES.index(target_pitch) > world.PITCHES.index(pitch):
                return world.LowLevelAction('LookUp')
            return world.LowLevelAction('LookDown')
        return pending

    if not np.isfinite(field[cell]):
        raise PolicyError('stranded')
    if field[cell] == 0.0:
        return None
    rows, columns = field.shape
    best_heading, best_value = None, field[cell]
    for candidate in _NEIGHBOUR_ORDER:
        offset = world.HEADING_OFFSETS[candidate]
        neighbour = (cell[0] + offset[0], cell[1] + offset[1])
        if not (0 <= neighbour[0] < rows and 0 <= neighbour[1] < columns):
            continue
        if field[neighbour] < best_value:
            best_heading, best_value = candidate, field[neighbour]
    if best_heading is None:
        return None
    if best_heading == heading:
        return world.LowLevelAction('MoveAhead')
    return _turn_towards(heading, best_heading)


def dump_field(field, agent_cell=None, precision=1):
    width = precision + 5
    lines = []
    for row in range(field.shape[0]):
        entries = []
        for column in range(field.shape[1]):
            if agent_cell is not None and (row, column) == tuple(agent_cell):
                entries.append('@'.rjust(width))
            elif np.isinf(field[row, column]):
                entries.append('inf'.rjust(width))
            else:
                entries.append('{0:{1}.{2}f}'.format(field[row, column], width, precision))
        lines.append(''.join(entries))
    return '\n'.join(lines)
