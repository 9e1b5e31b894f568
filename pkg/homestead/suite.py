"""
suite.py: Episode and suite runners.

    A manifest is a YAML document:

        defaults: {mode: agent, backend: oracle, seed: 0, noise: null, ablate: []}
        episodes:
          - scenario: ../scenarios/pick_mug.yaml     # relative to the manifest
          - generate: {task_type: Heat&Place, seed: 3}
            config: {noise: 0.2, ablate: [m-prime]}
            seeds: [0, 1, 2]                         # one episode per seed

    Every scenario is loaded before the first episode starts, so a broken
    scenario aborts the suite with its name and nothing is written.

"""
import copy
import logging
import multiprocessing
import os
from types import ModuleType

from homestead import agent, dialogue, knowledge, metrics, scenarios, selector, settings
from homestead.backends import make_backend
from homestead.context import Context
from homestead.exceptions import ManifestError, ScenarioError
from homestead.trajectory import write_trajectory
from homestead.utils import file_utils

logger = logging.getLogger('homestead')

AGENT = 'agent'
DIALOGUE = 'dialogue'
MODES = (AGENT, DIALOGUE)

TRAJECTORY_LOG = 'trajectories.jsonl'
RESULTS_TABLE = 'results.csv'
SUMMARY = 'summary.yaml'

_DEFAULT_CONFIG = {'mode': AGENT, 'backend': 'oracle', 'transcript': None, 'seed': 0, 'noise': None,
                   'ablate': [], 'knowledge': []}

# Episode config keys that override a setting
_SETTING_KEYS = {'top_k': 'TOP_K', 'max_steps': 'MAX_STEPS', 'max_failures': 'MAX_FAILURES',
                 'nav_budget': 'NAV_BUDGET', 'band_radius': 'BAND_RADIUS', 'turn_cap': 'DIALOGUE_TURN_CAP'}


def public_settings():
    return {setting: getattr(settings, setting) for setting in dir(settings)
            if not setting.startswith('_') and not isinstance(getattr(settings, setting), ModuleType)}


def make_runtime_context(**overrides):
    """A Context of every public setting plus the run options (backend, seed, noise, ablate)"""
    args = public_settings()
    args.update({'backend': 'oracle', 'seed': 0, 'noise': None, 'ablate': ()})
    for key, value in overrides.items():
        args[_SETTING_KEYS.get(key, key)] = value
    args['ablate'] = tuple(sorted(args['ablate'] or ()))
    return Context(args)


def validate_config(config):
    if config['mode'] not in MODES:
        raise ManifestError('Unknown mode {0}; expected one of {1}'.format(config['mode'], ', '.join(MODES)))
    if config['backend'] not in settings.BACKENDS:
        raise ManifestError('Unknown backend {0}; expected one of {1}'.format(config['backend'],
                                                                              ', '.join(settings.BACKENDS)))
    if config['backend'] == 'scripted' and not config.get('transcript'):
        raise ManifestError('The scripted backend needs a transcript')
    for name in config['ablate'] or ():
        if name not in settings.ABLATIONS:
            raise ManifestError('Unknown ablation {0}; expected one of {1}'.format(name,
                                                                                  ', '.join(settings.ABLATIONS)))
    if config['noise'] is not None and not 0.0 <= float(config['noise']) <= 1.0:
        raise ManifestError('Noise must lie in [0, 1], got {0}'.format(config['noise']))


def episode_config(**config):
    merged = copy.deepcopy(_DEFAULT_CONFIG)
    merged.update(config)
    validate_config(merged)
    return merged


def load_episode_scenario(config):
    """The Scenario an episode config names, through 'scenario' (object or path), 'document' or 'generate'"""
    if isinstance(config.get('scenario'), scenarios.Scenario):
        return config['scenario']
    if config.get('document') is not None:
        return scenarios.load_scenario(config['document'])
    if config.get('generate') is not None:
        generate = config['generate']
        return scenarios.generate_scenario(generate['task_type'], int(generate.get('seed', 0)),
                                           float(generate.get('mislabel', 0.0)))
    if config.get('scenario'):
        return scenarios.read_scenario(config['scenario'])
    raise ManifestError('Episode config names no scenario')


def _knowledge_items(config):
    entries = config.get('knowledge') or []
    if isinstance(entries, str):
        entries = [entries]
    items = []
    for entry in entries:
        if isinstance(entry, knowledge.KnowledgeItem):
            items.append(entry)
        else:
            items.extend(knowledge.read_knowledge(entry))
    return knowledge.filter_knowledge(items) if items else []


def select_examples(instruction, runtime_context, pool=None):
    if 'planner' in runtime_context.ablate:
        return []
    pool = pool if pool is not None else selector.default_pool()
    backend = selector.HashEmbeddingBackend(runtime_context)
    return [ranked.example for ranked in selector.select_top_k(instruction, pool, runtime_context.TOP_K, backend)]


def run_episode(config):
    """
    Run one episode from its config and return the finished trajectory.

    Config errors raise ManifestError or ScenarioError before any action is
    taken. With log_path set the trajectory is also written there.
    """
    config = episode_config(**config)
    scenario = load_episode_scenario(config)
    overrides = {key: config[key] for key in _SETTING_KEYS if config.get(key) is not None}
    runtime_context = make_runtime_context(backend=config['backend'], seed=int(config['seed']),
                                           noise=config['noise'], ablate=config['ablate'], **overrides)
    backend = make_backend(config['backend'], runtime_context, config.get('transcript'))
    episode_id = config.get('episode_id')
    if config['mode'] == DIALOGUE:
        trajectory = dialogue.run_dialogue(scenario, _knowledge_items(config), backend,
                                           runtime_context.DIALOGUE_TURN_CAP, episode_id)
    else:
        examples = select_examples(scenario.instruction.high_level, runtime_context)
        trajectory = agent.run_agent(scenario, backend, runtime_context, examples, episode_id)
    if config.get('log_path'):
        write_trajectory(trajectory, config['log_path'])
    return trajectory


def _resolve(path, base_directory):
    return path if os.path.isabs(path) else os.path.normpath(os.path.join(base_directory, path))


def read_manifest(manifest):
    """
    Episode configs of a manifest (path or parsed document), in manifest order.

    Scenario documents are loaded here; a failure raises ScenarioError naming
    the scenario.
    """
    base_directory = os.getcwd()
    if isinstance(manifest, str):
        base_directory = os.path.dirname(os.path.abspath(manifest))
        manifest = file_utils.read_yaml(manifest)
    if not isinstance(manifest, dict) or not manifest.get('episodes'):
        raise ManifestError('Manifest lists no episodes')
    defaults = dict(manifest.get('defaults') or {})
    configs = []
    for index, entry in enumerate(manifest['episodes']):
        config = dict(defaults)
        config.update(entry.get('config') or {})
        if entry.get('scenario'):
            path = _resolve(entry['scenario'], base_directory)
            name = os.path.splitext(os.path.basename(path))[0]
            try:
                document = file_utils.read_yaml(path)
            except (IOError, OSError) as exception:
                raise ScenarioError('{0}: {1}'.format(name, exception))
            if not isinstance(document, dict):
                raise ScenarioError('{0}: scenario: expected a mapping'.format(name))
            document.setdefault('name', name)
        elif entry.get('generate'):
            generate = entry['generate']
            document = scenarios.generate_document(generate['task_type'], int(generate.get('seed', 0)),
                                                   float(generate.get('mislabel', 0.0)))
        else:
            raise ManifestError('Episode {0} names neither a scenario nor a generator'.format(index))
        try:
            scenarios.load_scenario(document)
        except ScenarioError as exception:
            raise ScenarioError('{0}: {1}'.format(document.get('name', index), exception))
        if config.get('knowledge'):
            paths = config['knowledge'] if isinstance(config['knowledge'], list) else [config['knowledge']]
            config['knowledge'] = [_resolve(path, base_directory) for path in paths]
        if config.get('transcript'):
            config['transcript'] = _resolve(config['transcript'], base_directory)
        for seed in entry.get('seeds') or [config.get('seed', 0)]:
            episode = episode_config(**dict(config, seed=seed))
            episode['document'] = document
            episode['episode_id'] = entry.get('id') or '{0:03d}-{1}-s{2}'.format(len(configs), document['name'],
                                                                                  seed)
            configs.append(episode)
    return configs


class SuiteResult:
    def __init__(self, trajectories):
        self.trajectories = list(trajectories)
        self.metrics = metrics.compute_metrics(self.trajectories)
        self.histogram = metrics.error_histogram(self.trajectories)
        self.table = metrics.results_table(self.trajectories)
        self.parse_failures = sum(trajectory.parse_failures for trajectory in self.trajectories)

    def summary(self):
        return {'metrics': self.metrics.to_dict(),
                'error_modes': dict(self.histogram),
                'parse_failures': self.parse_failures}

    def write(self, output_directory):
        file_utils.make_output_directory(output_directory)
        records = [record for trajectory in self.trajectories for record in trajectory.to_records()]
        file_utils.write_json_lines(records, os.path.join(output_directory, TRAJECTORY_LOG))
        metrics.write_results(self.table, os.path.join(output_directory, RESULTS_TABLE))
        file_utils.write_yaml(self.summary(), os.path.join(output_directory, SUMMARY))
        return output_directory


def _run_configured_episode(config):
    try:
        return run_episode(config)
    except Exception:
        logger.error('Episode failed', extra_tags={'episode_id': config.get('episode_id')})
        raise


def run_suite(manifest, output_directory=None, n_processes=1):
    """Run every manifest episode, aggregate metrics and optionally write the results"""
    configs = read_manifest(manifest)
    logger.info('Running suite', extra_tags={'episodes': len(configs), 'processes': n_processes})
    if n_processes > 1:
        with multiprocessing.Pool(n_processes) as pool:
            trajectories = pool.map(_run_configured_episode, configs)
    else:
        trajectories = [_run_configured_episode(config) for config in configs]
    result = SuiteResult(trajectories)
    logger.info('Suite finished', extra_tags=result.metrics.to_dict())
    if output_directory is not None:
        result.write(output_directory)
    return result
