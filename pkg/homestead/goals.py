"""
goals.py: Task types, goal conditions and the expert path length.

    A goal condition is one atomic, countable predicate over the world
    state. Counted conditions ("two mugs placed") expand into one
    condition per count so the goal-condition ratio moves one step at a
    time.

"""
import heapq
import itertools
import logging
from collections import deque

from homestead import world
from homestead.exceptions import ExpertPathError

logger = logging.getLogger('homestead')

TASK_TYPES = ('Pick&Place', 'Stack&Place', 'PickTwo&Place', 'Clean&Place', 'Heat&Place', 'Cool&Place',
              'ExamineInLight')

TASK_TYPE_LABELS = {'Pick&Place': 'PICK_AND_PLACE_SIMPLE',
                    'Stack&Place': 'PICK_AND_PLACE_WITH_MOVABLE_RECEP',
                    'PickTwo&Place': 'PICK_TWO_OBJ_AND_PLACE',
                    'Clean&Place': 'PICK_CLEAN_THEN_PLACE_IN_RECEP',
                    'Heat&Place': 'PICK_HEAT_THEN_PLACE_IN_RECEP',
                    'Cool&Place': 'PICK_COOL_THEN_PLACE_IN_RECEP',
                    'ExamineInLight': 'LOOK_AT_OBJ_IN_LIGHT'}

TASK_APPLIANCES = {'Clean&Place': ('SinkBasin', 'Faucet'),
                   'Heat&Place': ('Microwave',),
                   'Cool&Place': ('Fridge',)}

CONDITION_KINDS = ('picked', 'placed', 'stacked', 'cleaned', 'heated', 'cooled', 'sliced', 'holding', 'toggled_on')

_FLAG_CONDITIONS = {'cleaned': 'clean', 'heated': 'hot', 'cooled': 'cold', 'sliced': 'sliced'}


class TaskInstruction:
    def __init__(self, high_level, task_type, low_level=()):
        if not high_level or not high_level.strip():
            raise ValueError('high_level instruction must be non-empty')
        if task_type not in TASK_TYPES:
            raise ValueError('task_type {0} is not one of {1}'.format(task_type, ', '.join(TASK_TYPES)))
        self.high_level = high_level
        self.task_type = task_type
        self.low_level = list(low_level)

    @property
    def label(self):
        return TASK_TYPE_LABELS[self.task_type]


class GoalCondition:
    def __init__(self, kind, object_class, receptacle_class=None, count=1):
        if kind not in CONDITION_KINDS:
            raise ValueError('Unknown goal condition kind {0}'.format(kind))
        if kind in ('placed', 'stacked') and receptacle_class is None:
            raise ValueError('{0} conditions need a receptacle class'.format(kind))
        if count < 1:
            raise ValueError('Goal condition counts start at 1')
        self.kind = kind
        self.object_class = object_class
        self.receptacle_class = receptacle_class
        self.count = count

    def holds(self, state):
        return self.tally(state) >= self.count

    def tally(self, state):
        if self.kind == 'holding':
            held = state.held_object()
            return int(held is not None and held.object_class == self.object_class)
        candidates = state.objects_of_class(self.object_class)
        if self.kind == 'picked':
            return sum(obj.picked for obj in candidates)
        if self.kind == 'toggled_on':
            return sum(obj.flags['toggled_on'] for obj in candidates)
        if self.kind in _FLAG_CONDITIONS:
            return sum(obj.flags[_FLAG_CONDITIONS[self.kind]] for obj in candidates)
        # placed and stacked both mean: directly inside a receptacle of the named class
        return sum(1 for obj in candidates if isinstance(obj.location, str) and obj.location != world.HELD
                   and state.objects[obj.location].object_class == self.receptacle_class)

    def classes(self):
        return [name for name in (self.object_class, self.receptacle_class) if name is not None]

    def to_dict(self):
        document = {'kind': self.kind, 'object': self.object_class, 'count': self.count}
        if self.receptacle_class is not None:
            document['receptacle'] = self.receptacle_class
        return document

    @classmethod
    def from_dict(cls, document):
        return cls(document['kind'], document['object'], document.get('receptacle'), document.get('count', 1))

    def __eq__(self, other):
        return isinstance(other, GoalCondition) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return 'GoalCondition({0})'.format(self.to_dict())


class GoalStatus:
    def __init__(self, satisfied, total):
        if total < 1:
            raise ValueError('total ≥ 1 violated')
        if not 0 <= satisfied <= total:
            raise ValueError('satisfied must lie in [0, total]')
        self.satisfied = satisfied
        self.total = total

    @property
    def success(self):
        return self.satisfied == self.total

    @property
    def ratio(self):
        return self.satisfied / self.total

    def to_dict(self):
        return {'satisfied': self.satisfied, 'total': self.total, 'success': self.success}


def derive_goals(task_type, object_class, receptacle_class=None, base_class=None, lamp_class=None,
                 sliced=False):
    """Goal conditions implied by a task type and its arguments"""
    if task_type == 'Pick&Place':
        goals = [GoalCondition('picked', object_class), GoalCondition('placed', object_class, receptacle_class)]
    elif task_type == 'Stack&Place':
        goals = [GoalCondition('picked', object_class), GoalCondition('stacked', object_class, base_class),
                 GoalCondition('placed', base_class, receptacle_class)]
    elif task_type == 'PickTwo&Place':
        goals = [GoalCondition('picked', object_class, count=1), GoalCondition('picked', object_class, count=2),
                 GoalCondition('placed', object_class, receptacle_class, count=1),
                 GoalCondition('placed', object_class, receptacle_class, count=2)]
    elif task_type in ('Clean&Place', 'Heat&Place', 'Cool&Place'):
        kind = {'Clean&Place': 'cleaned', 'Heat&Place': 'heated', 'Cool&Place': 'cooled'}[task_type]
        goals = [GoalCondition(kind, object_class), GoalCondition('placed', object_class, receptacle_class)]
    elif task_type == 'ExamineInLight':
        goals = [GoalCondition('holding', object_class), GoalCondition('toggled_on', lamp_class)]
    else:
        raise ValueError('Unknown task type {0}'.format(task_type))
    if sliced:
        goals.insert(0, GoalCondition('sliced', object_class))
    return goals


def check_goal(state, goals):
    goals = list(goals)
    return GoalStatus(sum(goal.holds(state) for goal in goals), len(goals))


class PoseGraph:
    """Exact shortest navigation-action counts between agent poses on a static grid"""
    def __init__(self, state):
        self.state = state
        self._distances = {}

    def neighbours(self, pose):
        cell, heading, pitch = pose
        index = world.HEADINGS.index(heading)
        yield cell, world.HEADINGS[(index + 1) % 4], pitch
        yield cell, world.HEADINGS[(index - 1) % 4], pitch
        ahead = self.state.front_cell(cell, heading)
        if self.state.is_traversable(ahead):
            yield ahead, heading, pitch
        pitch_index = world.PITCHES.index(pitch)
        for offset in (1, -1):
            if 0 <= pitch_index + offset < len(world.PITCHES):
                yield cell, heading, world.PITCHES[pitch_index + offset]

    def distances_from(self, pose):
        if pose not in self._distances:
            distances = {pose: 0}
            queue = deque([pose])
            while queue:
                current = queue.popleft()
                for neighbour in self.neighbours(current):
                    if neighbour not in distances:
                        distances[neighbour] = distances[current] + 1
                        queue.append(neighbour)
            self._distances[pose] = distances
        return self._distances[pose]

    def distance(self, start, end):
        return self.distances_from(start).get(end)


def relevant_object_ids(state, goals):
    """Objects the expert may touch: goal classes, task appliances, knives, and whatever contains them"""
    classes = set()
    for goal in goals:
        classes.update(goal.classes())
        if goal.kind in ('cleaned',):
            classes.update(('SinkBasin', 'Faucet'))
        elif goal.kind == 'heated':
            classes.add('Microwave')
        elif goal.kind == 'cooled':
            classes.add('Fridge')
        elif goal.kind == 'sliced':
            classes.update(world.classes_with_role('knife'))
    relevant = {obj.id for obj in state.objects.values() if obj.object_class in classes}
    # The cleaning faucet sits inside a sink, so the sink's contents matter too
    for obj in state.objects.values():
        if obj.location in relevant and obj.toggleable:
            relevant.add(obj.id)
    frontier = list(relevant)
    while frontier:
        obj = state.objects[frontier.pop()]
        for container in state.container_chain(obj):
            if container.id not in relevant:
                relevant.add(container.id)
                frontier.append(container.id)
    return sorted(relevant)


def expert_path_length(state, goals, max_expansions=200000):
    """
    Length of a shortest low-level action sequence reaching every goal condition.

    Uniform-cost search over simulator states. Navigation between the poses
    from which an interaction is possible is contracted into exact pose-graph
    distances, so the optimum equals a breadth-first search over single
    actions. Objects that cannot influence the goals are never touched.
    """
    goals = list(goals)
    if check_goal(state, goals).success:
        return 0
    relevant = relevant_object_ids(state, goals)
    poses = PoseGraph(state)
    counter = itertools.count()
    start = state.copy()
    best = {start.signature(relevant): 0}
    frontier = [(0, next(counter), start)]
    expansions = 0
    while frontier:
        cost, _, current = heapq.heappop(frontier)
        if best.get(current.signature(relevant), cost) < cost:
            continue
        if check_goal(current, goals).success:
            return cost
        expansions += 1
        if expansions > max_expansions:
            break
        reachable = poses.distances_from(current.pose)
        for object_id in relevant:
            obj = current.objects[object_id]
            for pose in world.interaction_poses(current, obj):
                travel = reachable.get(pose)
                if travel is None:
                    continue
                placed = current.with_pose(*pose)
                for kind in world.INTERACTION_ACTIONS:
                    successor, outcome = world.step(placed, world.LowLevelAction(kind, object_id))
                    if not outcome.success:
                        continue
                    total = cost + travel + 1
                    signature = successor.signature(relevant)
                    if total < best.get(signature, float('inf')):
                        best[signature] = total
                        heapq.heappush(frontier, (total, next(counter), successor))
    raise ExpertPathError('no expert trajectory')
