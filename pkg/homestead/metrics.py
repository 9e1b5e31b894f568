"""
metrics.py: Success metrics, error-mode classification and results tables.

    SR      mean success
    GC      mean fraction of goal conditions satisfied
    PLWSR   mean of success x w
    PLWGC   mean of GC x w

    with the per-episode path-length weight w = L* / max(L*, L_hat), L* the
    expert length and L_hat the agent's path length.

"""
import logging
from collections import OrderedDict

from astropy.table import Table

from homestead import settings, world
from homestead.exceptions import MetricsError
from homestead.textworld import NOTHING_HAPPENS

logger = logging.getLogger('homestead')

GOAL_OBJECT_NOT_FOUND = 'GoalObjectNotFound'
OBJECT_IN_CLOSED_RECEPTACLE = 'ObjectInClosedReceptacle'
COLLISIONS = 'Collisions'
INTERACTION_FAILURES = 'InteractionFailures'
OTHERS = 'Others'

ERROR_MODES = (GOAL_OBJECT_NOT_FOUND, INTERACTION_FAILURES, COLLISIONS, OBJECT_IN_CLOSED_RECEPTACLE, OTHERS)

RESULTS_COLUMNS = ('episode', 'success', 'GC', 'L_star', 'L_hat', 'w', 'error_mode')


def path_weight(expert_length, path_length):
    """L* / max(L*, L_hat); an episode with nothing to do and nothing done weighs 1"""
    denominator = max(expert_length, path_length)
    if denominator == 0:
        return 1.0
    return expert_length / denominator


class RunMetrics:
    def __init__(self, sr, gc, plwsr, plwgc, weights, episodes):
        self.sr = sr
        self.gc = gc
        self.plwsr = plwsr
        self.plwgc = plwgc
        self.weights = list(weights)
        self.episodes = list(episodes)

    def as_percentages(self):
        return OrderedDict((name, 100.0 * getattr(self, name.lower()))
                           for name in ('SR', 'GC', 'PLWSR', 'PLWGC'))

    def to_dict(self):
        return {'SR': self.sr, 'GC': self.gc, 'PLWSR': self.plwsr, 'PLWGC': self.plwgc,
                'episodes': len(self.episodes)}


def compute_metrics(trajectories):
    trajectories = list(trajectories)
    if not trajectories:
        raise MetricsError('No trajectories to score')
    successes, ratios, weights = [], [], []
    for trajectory in trajectories:
        if trajectory.expert_length is None:
            raise MetricsError('Episode {0} has no expert length'.format(trajectory.episode_id))
        if trajectory.total is None:
            raise MetricsError('Episode {0} has no final goal status'.format(trajectory.episode_id))
        successes.append(1.0 if trajectory.success else 0.0)
        ratios.append(trajectory.goal_ratio)
        weights.append(path_weight(trajectory.expert_length, trajectory.path_length))
    count = float(len(trajectories))
    return RunMetrics(sum(successes) / count, sum(ratios) / count,
                      sum(success * weight for success, weight in zip(successes, weights)) / count,
                      sum(ratio * weight for ratio, weight in zip(ratios, weights)) / count,
                      weights, [trajectory.episode_id for trajectory in trajectories])


def _turns(trajectory):
    return [record for record in trajectory.records if record['type'] == 'turn']


def _goal_ever_located(trajectory):
    steps = trajectory.steps()
    if steps or not _turns(trajectory):
        return any(step.get('goal_located') for step in steps)
    names = [goal_class.lower() for goal_class in trajectory.goal_classes]
    return any(name in (turn.get('observation') or '') for turn in _turns(trajectory) for name in names)


def _closed_receptacle_opened(trajectory):
    closed = set(trajectory.closed_goal_receptacles)
    if not _turns(trajectory):
        return any(step['action'] == 'OpenObject' and step['success'] and step.get('target') in closed
                   for step in trajectory.steps())
    return any((turn.get('grounded_action') or '').startswith('open ') and
               not (turn.get('observation') or '').startswith(NOTHING_HAPPENS) for turn in _turns(trajectory))


def classify_error(trajectory, collision_fraction=None, interaction_failures=None):
    """
    Error mode of a failed episode; the first matching rule wins.

        goal object class never in the maps        GoalObjectNotFound
        goal object behind a never-opened door     ObjectInClosedReceptacle
        collisions >= 30% of failed steps          Collisions
        >= 3 failed interactions with goal-relevant objects   InteractionFailures
        anything else                              Others
    """
    if trajectory.success:
        raise ValueError('Episode {0} succeeded; only failures have an error mode'.format(trajectory.episode_id))
    if collision_fraction is None:
        collision_fraction = settings.COLLISION_FRACTION_THRESHOLD
    if interaction_failures is None:
        interaction_failures = settings.INTERACTION_FAILURE_THRESHOLD

    if not _goal_ever_located(trajectory):
        return GOAL_OBJECT_NOT_FOUND
    if trajectory.closed_goal_receptacles and not _closed_receptacle_opened(trajectory):
        return OBJECT_IN_CLOSED_RECEPTACLE
    failed = trajectory.failed_steps()
    collisions = sum(1 for step in failed if step.get('error') == world.COLLISION)
    if failed and collisions >= collision_fraction * len(failed):
        return COLLISIONS
    relevant = set(trajectory.relevant_classes)
    interaction = sum(1 for step in failed
                      if step['action'] in world.INTERACTION_ACTIONS and step.get('target_class') in relevant)
    if interaction >= interaction_failures:
        return INTERACTION_FAILURES
    return OTHERS


def error_histogram(trajectories):
    histogram = OrderedDict((mode, 0) for mode in ERROR_MODES)
    for trajectory in trajectories:
        if not trajectory.success:
            histogram[classify_error(trajectory)] += 1
    return histogram


def results_table(trajectories):
    rows = []
    for trajectory in trajectories:
        weight = path_weight(trajectory.expert_length, trajectory.path_length) \
            if trajectory.expert_length is not None else float('nan')
        rows.append((trajectory.episode_id, bool(trajectory.success), float(trajectory.goal_ratio),
                     -1 if trajectory.expert_length is None else int(trajectory.expert_length),
                     int(trajectory.path_length), float(weight),
                     '' if trajectory.success else classify_error(trajectory)))
    return Table(rows=rows or None, names=RESULTS_COLUMNS,
                 dtype=(str, bool, float, int, int, float, str))


def write_results(table, path):
    table.write(path, format='ascii.csv', overwrite=True)
    return path
