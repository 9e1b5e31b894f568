"""
trajectory.py: Execution trajectories and their line-delimited logs.

    A trajectory log is one JSON object per line with sorted keys:

        {"type": "header", ...}     config echo, goal and relevant classes
        {"type": "step", ...}       one per low-level action
        {"type": "skill", ...}      one per skill invocation
        {"type": "plan", ...}       planner output and replans
        {"type": "turn", ...}       dialogue turns
        {"type": "result", ...}     final goal status, path lengths, termination cause

"""
import logging

from homestead.utils import file_utils

logger = logging.getLogger('homestead')

RECORD_TYPES = ('header', 'step', 'skill', 'plan', 'turn', 'result')


class Trajectory:
    def __init__(self, episode_id, header=None):
        self.episode_id = episode_id
        self.header = dict(header or {})
        self.header['episode'] = episode_id
        self.records = []
        self.satisfied = None
        self.total = None
        self.path_length = 0
        self.expert_length = None
        self.cause = None
        self.parse_failures = 0

    @property
    def scenario_name(self):
        return self.header.get('scenario', '')

    @property
    def task_type(self):
        return self.header.get('task_type', '')

    @property
    def goal_classes(self):
        return self.header.get('goal_classes', [])

    @property
    def relevant_classes(self):
        return self.header.get('relevant_classes', [])

    @property
    def closed_goal_receptacles(self):
        return self.header.get('closed_goal_receptacles', [])

    @property
    def success(self):
        return self.total is not None and self.satisfied == self.total

    @property
    def goal_ratio(self):
        return self.satisfied / self.total

    @property
    def finished(self):
        return self.cause is not None

    def steps(self):
        return [record for record in self.records if record['type'] == 'step']

    def failed_steps(self):
        return [record for record in self.steps() if not record['success']]

    def append(self, record_type, **fields):
        if record_type not in RECORD_TYPES or record_type in ('header', 'result'):
            raise ValueError('Cannot append a {0} record'.format(record_type))
        if self.finished:
            raise ValueError('Trajectory {0} is already finished'.format(self.episode_id))
        if record_type == 'step':
            steps = self.steps()
            if steps and fields['t'] <= steps[-1]['t']:
                raise ValueError('Step records must be strictly time ordered')
            self.path_length = fields['t']
        record = {'type': record_type}
        record.update(fields)
        self.records.append(record)
        return record

    def finish(self, goal_status, cause, expert_length=None, path_length=None):
        self.satisfied = goal_status.satisfied
        self.total = goal_status.total
        self.cause = cause
        self.expert_length = expert_length
        if path_length is not None:
            self.path_length = path_length
        logger.info('Episode finished: {0}'.format(cause), episode=self,
                    extra_tags={'satisfied': self.satisfied, 'total': self.total})
        return self

    def result_record(self):
        return {'type': 'result', 'episode': self.episode_id, 'success': self.success,
                'satisfied': self.satisfied, 'total': self.total, 'path_length': self.path_length,
                'expert_length': self.expert_length, 'cause': self.cause, 'parse_failures': self.parse_failures}

    def to_records(self):
        header = {'type': 'header'}
        header.update(self.header)
        records = [header] + list(self.records)
        if self.finished:
            records.append(self.result_record())
        return records

    @classmethod
    def from_records(cls, records):
        records = list(records)
        if not records or records[0].get('type') != 'header':
            raise ValueError('Trajectory logs start with a header record')
        header = {key: value for key, value in records[0].items() if key != 'type'}
        trajectory = cls(header.get('episode'), header)
        for record in records[1:]:
            if record.get('type') == 'result':
                trajectory.satisfied = record['satisfied']
                trajectory.total = record['total']
                trajectory.path_length = record['path_length']
                trajectory.expert_length = record.get('expert_length')
                trajectory.cause = record['cause']
                trajectory.parse_failures = record.get('parse_failures', 0)
            else:
                trajectory.records.append(dict(record))
        return trajectory


def write_trajectory(trajectory, path):
    file_utils.write_json_lines(trajectory.to_records(), path)
    return path


def read_trajectories(path):
    """All trajectories in one log; a log may hold several concatenated episodes"""
    trajectories, current = [], []
    for record in file_utils.read_json_lines(path):
        if record.get('type') == 'header' and current:
            trajectories.append(Trajectory.from_records(current))
            current = []
        current.append(record)
    if current:
        trajectories.append(Trajectory.from_records(current))
    return trajectories


def read_trajectory(path):
    trajectories = read_trajectories(path)
    if len(trajectories) != 1:
        raise ValueError('{0} holds {1} trajectories, expected one'.format(path, len(trajectories)))
    return trajectories[0]
