import json
import logging

from homestead import scenarios
from homestead.goals import GoalStatus
from homestead.trajectory import Trajectory
from homestead.suite import public_settings

logger = logging.getLogger('homestead')

OPEN_ROOM = ['#######',
             '#.....#',
             '#.....#',
             '#.....#',
             '#######']


class FakeContext(object):
    def __init__(self, ablate=(), seed=0, noise=None, backend='oracle', **overrides):
        for setting, value in public_settings().items():
            setattr(self, setting, value)
        self.ablate = tuple(ablate)
        self.seed = seed
        self.noise = noise
        self.backend = backend
        for key, value in overrides.items():
            setattr(self, key, value)


class FakeResponse(object):
    def __init__(self, data=None, filename=None, status_code=200):
        if filename is not None:
            with open(filename) as f:
                data = json.load(f)
        self.data = data
        self.status_code = status_code

    def json(self):
        return self.data

    def raise_for_status(self):
        pass


def scenario_document(receptacles, objects, task, grid=None, agent=None, **extra):
    document = {'name': extra.pop('name', 'test-room'),
                'grid': list(grid or OPEN_ROOM),
                'agent': agent or {'cell': [2, 3], 'heading': 'N', 'pitch': 'level'},
                'receptacles': receptacles,
                'objects': objects,
                'task': task}
    document.update(extra)
    return document


def make_scenario(receptacles, objects, task, grid=None, agent=None, **extra):
    return scenarios.load_scenario(scenario_document(receptacles, objects, task, grid, agent, **extra))


def mug_on_counter(**extra):
    """The mug sits on a counter in the NW corner; the shelf it belongs on is in the NE corner"""
    return make_scenario([{'id': 'countertop_1', 'class': 'CounterTop', 'cell': [1, 1]},
                          {'id': 'shelf_1', 'class': 'Shelf', 'cell': [1, 5]}],
                         [{'id': 'mug_1', 'class': 'Mug', 'in': 'countertop_1'}],
                         {'type': 'Pick&Place', 'object': 'Mug', 'receptacle': 'Shelf'}, **extra)


def step_record(t, action='MoveAhead', success=True, error=None, target=None, target_class=None,
                goal_located=True, error_kind=None):
    return {'type': 'step', 't': t, 'digest': 'd{0}'.format(t), 'skill': None, 'action': action, 'target': target,
            'target_class': target_class, 'success': success, 'error': error, 'error_kind': error_kind,
            'goal_located': goal_located}


def make_trajectory(episode_id, satisfied, total, path_length, expert_length, steps=(), goal_classes=('Mug',),
                    relevant_classes=('Mug', 'Shelf'), closed_goal_receptacles=(), records=()):
    trajectory = Trajectory(episode_id, {'scenario': episode_id, 'task_type': 'Pick&Place',
                                         'goal_classes': list(goal_classes),
                                         'relevant_classes': list(relevant_classes),
                                         'closed_goal_receptacles': list(closed_goal_receptacles)})
    for step in steps:
        trajectory.records.append(dict(step))
    for record in records:
        trajectory.records.append(dict(record))
    trajectory.finish(GoalStatus(satisfied, total), 'success' if satisfied == total else 'maximum number of steps',
                      expert_length, path_length)
    return trajectory


def failed_steps(count, start, action='PickupObject', error='target not visible', target_class='Mug', **kwargs):
    return [step_record(start + index, action, False, error, target_class=target_class, **kwargs)
            for index in range(count)]


def moves(count, start=1, goal_located=True):
    return [step_record(start + index, goal_located=goal_located) for index in range(count)]


def labeled_trajectories():
    """Fifteen failed trajectories with their hand-assigned error modes, three per mode"""
    collision = 'collision: path blocked'
    labeled = []

    # Goal class never in either map
    labeled.append((make_trajectory('unseen-1', 0, 2, 40, 10, moves(40, goal_located=False)),
                    'GoalObjectNotFound'))
    labeled.append((make_trajectory('unseen-2', 0, 2, 30, 10,
                                    moves(10, goal_located=False) +
                                    failed_steps(10, 11, 'MoveAhead', collision, None, goal_located=False)),
                    'GoalObjectNotFound'))
    labeled.append((make_trajectory('unseen-3', 0, 4, 12, 10,
                                    failed_steps(5, 1, 'PickupObject', goal_located=False) + moves(7, 6, False),
                                    goal_classes=('Book',), relevant_classes=('Book', 'Shelf')),
                    'GoalObjectNotFound'))

    # Goal object starts in a closed drawer that is never opened
    closed = {'closed_goal_receptacles': ['drawer_1']}
    labeled.append((make_trajectory('closed-1', 0, 2, 20, 8, moves(20), **closed), 'ObjectInClosedReceptacle'))
    labeled.append((make_trajectory('closed-2', 0, 2, 14, 8,
                                    moves(10) + failed_steps(4, 11, 'OpenObject', 'target not visible', 'Drawer'),
                                    **closed), 'ObjectInClosedReceptacle'))
    labeled.append((make_trajectory('closed-3', 1, 2, 16, 8,
                                    moves(10) + failed_steps(6, 11, 'MoveAhead', collision, None), **closed),
                    'ObjectInClosedReceptacle'))

    # Collisions dominate the failed steps
    labeled.append((make_trajectory('bump-1', 0, 2, 20, 8, moves(10) + failed_steps(10, 11, 'MoveAhead', collision,
                                                                                     None)), 'Collisions'))
    labeled.append((make_trajectory('bump-2', 0, 2, 16, 8,
                                    moves(10) + failed_steps(2, 11, 'MoveAhead', collision, None) +
                                    failed_steps(4, 13, 'PickupObject', 'target not visible', 'Pen')),
                    'Collisions'))
    labeled.append((make_trajectory('bump-3', 1, 2, 30, 8,
                                    moves(20) + failed_steps(4, 21, 'MoveAhead', collision, None) +
                                    failed_steps(6, 25, 'PickupObject', 'target not visible', 'Mug')),
                    'Collisions'))

    # Repeated failed interactions with goal-relevant objects
    labeled.append((make_trajectory('grasp-1', 0, 2, 15, 8, moves(10) + failed_steps(5, 11)), 'InteractionFailures'))
    labeled.append((make_trajectory('grasp-2', 1, 2, 13, 8,
                                    moves(10) + failed_steps(3, 11, 'PutObject', 'receptacle is closed', 'Shelf')),
                    'InteractionFailures'))
    opened = [step_record(11, 'OpenObject', True, target='drawer_1', target_class='Drawer')]
    labeled.append((make_trajectory('grasp-3', 0, 2, 18, 8,
                                    moves(10) + opened + failed_steps(7, 12, 'PickupObject', 'target not visible',
                                                                      'Mug'), **closed),
                    'InteractionFailures'))

    # Nothing stands out
    labeled.append((make_trajectory('other-1', 0, 2, 40, 8, moves(40)), 'Others'))
    labeled.append((make_trajectory('other-2', 1, 2, 14, 8,
                                    moves(10) + failed_steps(2, 11) + failed_steps(2, 13, 'PickupObject',
                                                                                   'target not visible', 'Pen')),
                    'Others'))
    labeled.append((make_trajectory('other-3', 0, 2, 20, 8,
                                    moves(10) + failed_steps(9, 11, 'LookUp', 'camera cannot tilt further', None) +
                                    failed_steps(1, 20, 'MoveAhead', collision, None)), 'Others'))
    return labeled
