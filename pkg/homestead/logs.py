import logging
import traceback
import sys
import multiprocessing


class HomesteadLogger(logging.getLoggerClass()):
    def __init__(self, name, level='NOTSET'):
        super(HomesteadLogger, self).__init__(name, level)

    def _log(self, level, msg, *args, **kwargs):
        kwargs = _create_logging_tags_dictionary(kwargs)
        super(HomesteadLogger, self)._log(level, msg, *args, **kwargs)


def _create_logging_tags_dictionary(kwargs):
    try:
        tags = {}
        episode = kwargs.pop('episode', None)
        extra_tags = kwargs.pop('extra_tags', None)
        if episode is not None:
            tags.update(_episode_to_tags(episode))
        if extra_tags:
            tags.update(extra_tags)
        tags['processName'] = multiprocessing.current_process().name
        kwargs['extra'] = {'tags': tags}
    except Exception:
        logger = logging.getLogger('homestead')
        logger.error(format_exception())
        kwargs = {'extra': {'tags': {'error': 'Check implementation of this logging message'}}}
    return kwargs


def _episode_to_tags(episode):
    # Works for both live episodes and finished trajectories
    scenario = getattr(episode, 'scenario', None)
    instruction = getattr(scenario, 'instruction', None)
    state = getattr(episode, 'state', None)
    tags = {'episode_id': getattr(episode, 'episode_id', '-'),
            'scenario': getattr(scenario, 'name', getattr(episode, 'scenario_name', '')),
            'task_type': getattr(instruction, 'task_type', getattr(episode, 'task_type', '')),
            'step': getattr(state, 'step_count', getattr(episode, 'path_length', '-'))}
    return tags


def set_log_level(log_level='INFO'):
    root_logger = logging.getLogger('homestead')
    root_logger.setLevel(log_level.upper())


def format_exception():
    exc_type, exc_value, exc_tb = sys.exc_info()
    return traceback.format_exception(exc_type, exc_value, exc_tb)
