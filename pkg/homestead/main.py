""" main.py: Main driver script for homestead.

    Console entry points to run episodes and suites, score trajectory logs,
    inspect maps and distance fields, and build the knowledge base and the
    example pool.
"""
import argparse
import logging
import os

import numpy as np

from homestead import knowledge, logs, maps, metrics, navigation, scenarios, selector, settings, suite, world
from homestead.backends import make_backend
from homestead.context import Context
from homestead.episode import Episode
from homestead.exceptions import EpisodeTerminated, ManifestError, MetricsError, ScenarioError
from homestead.trajectory import read_trajectories
from homestead.goals import TASK_TYPES
from homestead.utils import file_utils

logger = logging.getLogger('homestead')


def parse_args(extra_console_arguments=None, parser_description='Run homestead episodes.'):
    """Parse arguments, including default command line argument, and set the overall log level"""

    parser = argparse.ArgumentParser(description=parser_description)

    parser.add_argument("--log-level", default='info', choices=['debug', 'info', 'warning',
                                                                'critical', 'fatal', 'error'])

    if extra_console_arguments is None:
        extra_console_arguments = []
    for argument in extra_console_arguments:
        parser.add_argument(*argument['args'], **argument['kwargs'])
    args = parser.parse_args()

    logs.set_log_level(args.log_level)

    # Get all of the public settings and store them in the context object
    for setting, value in suite.public_settings().items():
        setattr(args, setting, value)

    return Context(args)


_EPISODE_ARGUMENTS = [{'args': ['--backend'],
                       'kwargs': {'dest': 'backend', 'default': 'oracle', 'choices': list(settings.BACKENDS),
                                  'help': 'Completion backend behind every role'}},
                      {'args': ['--transcript'],
                       'kwargs': {'dest': 'transcript', 'default': None,
                                  'help': 'Transcript replayed by the scripted backend'}},
                      {'args': ['--noise'],
                       'kwargs': {'dest': 'noise', 'default': None, 'type': float,
                                  'help': 'Detection mislabel probability'}},
                      {'args': ['--seed'],
                       'kwargs': {'dest': 'seed', 'default': 0, 'type': int, 'help': 'Episode seed'}},
                      {'args': ['--ablate'],
                       'kwargs': {'dest': 'ablate', 'nargs': '*', 'default': [], 'choices': list(settings.ABLATIONS),
                                  'help': 'Components to disable'}}]


def run_episode():
    extra_console_arguments = [{'args': ['scenario'], 'kwargs': {'help': 'Scenario YAML file'}},
                               {'args': ['--mode'],
                                'kwargs': {'dest': 'mode', 'default': suite.AGENT, 'choices': list(suite.MODES),
                                           'help': 'Embodied agent or text dialogue'}},
                               {'args': ['--knowledge'],
                                'kwargs': {'dest': 'knowledge', 'nargs': '*', 'default': [],
                                           'help': 'Knowledge files injected into the dialogue'}},
                               {'args': ['--log-path'],
                                'kwargs': {'dest': 'log_path', 'default': None,
                                           'help': 'Where to write the trajectory log'}}]
    runtime_context = parse_args(_EPISODE_ARGUMENTS + extra_console_arguments,
                                 parser_description='Run one episode.')
    try:
        trajectory = suite.run_episode({'scenario': runtime_context.scenario, 'mode': runtime_context.mode,
                                        'backend': runtime_context.backend,
                                        'transcript': runtime_context.transcript, 'seed': runtime_context.seed,
                                        'noise': runtime_context.noise, 'ablate': runtime_context.ablate,
                                        'knowledge': runtime_context.knowledge,
                                        'log_path': runtime_context.log_path})
    except (ManifestError, ScenarioError) as exception:
        logger.error('Cannot run episode: {0}'.format(exception), extra_tags={'scenario': runtime_context.scenario})
        raise SystemExit(1)
    logger.info('Episode result', episode=trajectory, extra_tags=trajectory.result_record())


def run_suite():
    extra_console_arguments = [{'args': ['manifest'], 'kwargs': {'help': 'Suite manifest YAML file'}},
                               {'args': ['--output-dir'],
                                'kwargs': {'dest': 'output_directory', 'default': 'homestead-results',
                                           'help': 'Directory for the trajectory log, results table and summary'}},
                               {'args': ['--n-processes'],
                                'kwargs': {'dest': 'n_processes', 'default': 1, 'type': int,
                                           'help': 'Number of worker processes'}}]
    runtime_context = parse_args(extra_console_arguments, parser_description='Run a suite of episodes.')
    try:
        result = suite.run_suite(runtime_context.manifest, runtime_context.output_directory,
                                 runtime_context.n_processes)
    except (ManifestError, ScenarioError) as exception:
        logger.error('Cannot run suite: {0}'.format(exception), extra_tags={'manifest': runtime_context.manifest})
        raise SystemExit(1)
    logger.info('Suite metrics', extra_tags=result.metrics.as_percentages())
    logger.info('Error modes', extra_tags=dict(result.histogram))


def _read_logs(paths):
    trajectories = []
    for path in paths:
        trajectories.extend(read_trajectories(path))
    return trajectories


def score_logs():
    extra_console_arguments = [{'args': ['logs'], 'kwargs': {'nargs': '+', 'help': 'Trajectory log files'}},
                               {'args': ['--results'],
                                'kwargs': {'dest': 'results', 'default': None,
                                           'help': 'Also write the per-episode results table here'}}]
    runtime_context = parse_args(extra_console_arguments, parser_description='Score trajectory logs.')
    trajectories = _read_logs(runtime_context.logs)
    try:
        run_metrics = metrics.compute_metrics(trajectories)
    except MetricsError as exception:
        logger.error(str(exception))
        raise SystemExit(1)
    logger.info('Metrics', extra_tags=dict(run_metrics.as_percentages(), episodes=len(trajectories)))
    if runtime_context.results:
        metrics.write_results(metrics.results_table(trajectories), runtime_context.results)


def classify_logs():
    extra_console_arguments = [{'args': ['logs'], 'kwargs': {'nargs': '+', 'help': 'Trajectory log files'}}]
    runtime_context = parse_args(extra_console_arguments, parser_description='Label failed episodes by error mode.')
    trajectories = _read_logs(runtime_context.logs)
    for trajectory in trajectories:
        if not trajectory.success:
            logger.info('Error mode: {0}'.format(metrics.classify_error(trajectory)), episode=trajectory)
    logger.info('Error modes', extra_tags=dict(metrics.error_histogram(trajectories)))


def _parse_action(text):
    kind, _, target = text.partition(':')
    return world.LowLevelAction(kind, target or None)


def dump_maps():
    extra_console_arguments = [{'args': ['scenario'], 'kwargs': {'help': 'Scenario YAML file'}},
                               {'args': ['--actions'],
                                'kwargs': {'dest': 'actions', 'nargs': '*', 'default': [],
                                           'help': 'Actions to take first, e.g. MoveAhead PickupObject:mug_1'}},
                               {'args': ['--noise'],
                                'kwargs': {'dest': 'noise', 'default': None, 'type': float,
                                           'help': 'Detection mislabel probability'}},
                               {'args': ['--seed'], 'kwargs': {'dest': 'seed', 'default': 0, 'type': int}}]
    runtime_context = parse_args(extra_console_arguments, parser_description='Render the semantic maps.')
    episode = Episode(scenarios.read_scenario(runtime_context.scenario),
                      suite.make_runtime_context(seed=runtime_context.seed, noise=runtime_context.noise))
    try:
        for action in runtime_context.actions:
            episode.act(_parse_action(action))
    except EpisodeTerminated as exception:
        logger.warning('Episode terminated: {0}'.format(exception.cause), episode=episode)
    logger.info('Semantic maps\n{0}'.format(maps.dump_maps(episode.maps)), episode=episode)


def dump_field():
    extra_console_arguments = [{'args': ['scenario'], 'kwargs': {'help': 'Scenario YAML file'}},
                               {'args': ['--target'],
                                'kwargs': {'dest': 'target', 'default': None,
                                           'help': 'Object class to navigate to (default: the first goal class)'}},
                               {'args': ['--precision'],
                                'kwargs': {'dest': 'precision', 'default': 1, 'type': int}}]
    runtime_context = parse_args(extra_console_arguments,
                                 parser_description='Render the distance field towards an object class.')
    scenario = scenarios.read_scenario(runtime_context.scenario)
    state = scenario.state
    target = runtime_context.target or scenario.goal_classes()[0]
    goals = sorted({pose[0] for obj in state.objects.values() if obj.object_class == target
                    for pose in world.interaction_poses(state, obj)})
    if not goals:
        logger.error('No reachable instance of {0}'.format(target), extra_tags={'scenario': scenario.name})
        raise SystemExit(1)
    traversable = np.array([[state.is_traversable((row, column)) for column in range(state.shape[1])]
                            for row in range(state.shape[0])])
    field = navigation.fmm_distance_field(traversable, goals)
    logger.info('Distance field to {0}\n{1}'.format(target, navigation.dump_field(field, state.agent_cell,
                                                                                   runtime_context.precision)),
                extra_tags={'scenario': scenario.name})


def _knowledge_scenarios(runtime_context):
    loaded = [scenarios.read_scenario(path) for path in runtime_context.scenarios]
    for task_type in runtime_context.task_types:
        loaded.extend(scenarios.generate_scenario(task_type, runtime_context.seed + index)
                      for index in range(runtime_context.episodes_per_task_type))
    if not loaded:
        raise ManifestError('Exploration needs --scenarios or --task-types')
    return loaded


def manage_knowledge():
    extra_console_arguments = [{'args': ['action'], 'kwargs': {'choices': ['explore', 'summarize', 'filter', 'show']}},
                               {'args': ['--scenarios'],
                                'kwargs': {'dest': 'scenarios', 'nargs': '*', 'default': [],
                                           'help': 'Scenario files to explore'}},
                               {'args': ['--task-types'],
                                'kwargs': {'dest': 'task_types', 'nargs': '*', 'default': [],
                                           'choices': list(TASK_TYPES), 'help': 'Generate scenarios to explore'}},
                               {'args': ['--episodes-per-task-type'],
                                'kwargs': {'dest': 'episodes_per_task_type', 'default': 3, 'type': int}},
                               {'args': ['--budget'],
                                'kwargs': {'dest': 'budget', 'default': 20, 'type': int,
                                           'help': 'Number of exploration episodes'}},
                               {'args': ['--seed'], 'kwargs': {'dest': 'seed', 'default': 0, 'type': int}},
                               {'args': ['--backend'],
                                'kwargs': {'dest': 'backend', 'default': 'oracle', 'choices': list(settings.BACKENDS)}},
                               {'args': ['--transcript'], 'kwargs': {'dest': 'transcript', 'default': None}},
                               {'args': ['--threshold'],
                                'kwargs': {'dest': 'threshold', 'default': None, 'type': int,
                                           'help': 'Episodes of evidence a learned fact needs'}},
                               {'args': ['--input'],
                                'kwargs': {'dest': 'inputs', 'nargs': '*', 'default': [],
                                           'help': 'Exploration log (summarize) or learned knowledge files'}},
                               {'args': ['--human'],
                                'kwargs': {'dest': 'human', 'nargs': '*', 'default': [],
                                           'help': 'Human-supplied knowledge files (filter)'}},
                               {'args': ['--output'], 'kwargs': {'dest': 'output', 'default': None}}]
    runtime_context = parse_args(extra_console_arguments, parser_description='Build and inspect prior knowledge.')
    action = runtime_context.action
    if action in ('explore', 'summarize', 'filter') and not runtime_context.output:
        logger.error('{0} needs --output'.format(action))
        raise SystemExit(1)
    if action == 'explore':
        log = knowledge.explore_collect(_knowledge_scenarios(runtime_context), knowledge.RandomPolicy(),
                                        runtime_context.budget, runtime_context.seed)
        log.write(runtime_context.output)
    elif action == 'summarize':
        log = knowledge.ExplorationLog()
        for path in runtime_context.inputs:
            log.sequences.extend(knowledge.ExplorationLog.read(path).sequences)
        backend = make_backend(runtime_context.backend, runtime_context, runtime_context.transcript)
        knowledge.write_knowledge(knowledge.summarize_knowledge(log, backend, runtime_context.threshold),
                                  runtime_context.output)
    elif action == 'filter':
        candidates = [item for path in runtime_context.inputs for item in knowledge.read_knowledge(path)]
        candidates += [item for path in runtime_context.human
                       for item in knowledge.read_knowledge(path, knowledge.HUMAN)]
        knowledge.write_knowledge(knowledge.filter_knowledge(candidates), runtime_context.output)
    else:
        for path in runtime_context.inputs:
            logger.info('Knowledge in {0}\n{1}'.format(path, knowledge.render_knowledge(
                knowledge.read_knowledge(path))))


def build_pool():
    extra_console_arguments = [{'args': ['--output'],
                                'kwargs': {'dest': 'output', 'required': True, 'help': 'Pool JSON file to write'}},
                               {'args': ['--episodes-per-task-type'],
                                'kwargs': {'dest': 'episodes_per_task_type', 'default': None, 'type': int}},
                               {'args': ['--embedding'],
                                'kwargs': {'dest': 'embedding', 'default': 'hash',
                                           'choices': sorted(settings.EMBEDDING_BACKENDS),
                                           'help': 'Embed the pool instructions with this backend'}}]
    runtime_context = parse_args(extra_console_arguments, parser_description='Build the in-context example pool.')
    backend = selector.make_embedding_backend(runtime_context.embedding, runtime_context)
    pool = selector.build_example_pool(runtime_context.episodes_per_task_type, backend=backend)
    file_utils.make_output_directory(os.path.dirname(os.path.abspath(runtime_context.output)))
    pool.write(runtime_context.output)
