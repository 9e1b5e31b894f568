"""
settings.py: Settings script for homestead.

    Important note: due to the way that the parameters are read in,
    variables that begin with an underscore will not be added to the
    runtime context.

"""
import os

# Episode caps
MAX_STEPS = 400
MAX_FAILURES = 30
MAX_REPLANS = 3
MAX_EXECUTOR_STEPS = 40

# Skill and navigation budgets
NAV_BUDGET = 50
BAND_RADIUS = 2
REPLAN_INTERVAL = 10
OPTIMISTIC_UNKNOWN = True
AUTO_NAVIGATE = True

# Perception
FOV_DISTANCE = 5

# Example selection
TOP_K = 3
EMBEDDING_DIMENSION = 64
EMBEDDING_SEED = 0
EMBEDDING_NGRAM = 3
POOL_EPISODES_PER_TASK_TYPE = 10
POOL_SEED_OFFSET = 1000

# Rule-oracle executor: failures within one subtask before asking for a new plan
ORACLE_FAILURES_BEFORE_REPLAN = 4

# Knowledge pipeline
KNOWLEDGE_SUPPORT_THRESHOLD = 2
KNOWLEDGE_EPISODE_STEPS = 30
DIALOGUE_TURN_CAP = 40

# Error-mode classification
COLLISION_FRACTION_THRESHOLD = 0.3
INTERACTION_FAILURE_THRESHOLD = 3

ABLATIONS = ('m-prime', 'planner', 'observer', 'slice-replay', 'traversable-goal')

BACKENDS = {'scripted': 'homestead.backends.ScriptedBackend',
            'oracle': 'homestead.backends.RuleOracleBackend',
            'remote': 'homestead.backends.RemoteBackend'}

OBJECT_CATALOG = 'data/object_classes.yaml'

PROMPT_DIRECTORY = 'data/prompts'

SKILL_LIBRARY = {'NavigateToObject': 'homestead.skills.NavigateToObject',
                 'Explore': 'homestead.skills.Explore',
                 'LookAround': 'homestead.skills.LookAround',
                 'RequireReplan': 'homestead.skills.RequireReplan',
                 'PickupObject': 'homestead.skills.PickupObject',
                 'PutObject': 'homestead.skills.PutObject',
                 'OpenObject': 'homestead.skills.OpenObject',
                 'CloseObject': 'homestead.skills.CloseObject',
                 'ToggleObjectOn': 'homestead.skills.ToggleObjectOn',
                 'ToggleObjectOff': 'homestead.skills.ToggleObjectOff',
                 'SliceObject': 'homestead.skills.SliceObject'}

EMBEDDING_BACKENDS = {'hash': 'homestead.selector.HashEmbeddingBackend',
                      'remote': 'homestead.selector.RemoteEmbeddingBackend'}

COMPLETION_ENDPOINT = os.getenv('HOMESTEAD_COMPLETION_ENDPOINT', 'http://localhost:8080/v1/completions')
EMBEDDING_ENDPOINT = os.getenv('HOMESTEAD_EMBEDDING_ENDPOINT', 'http://localhost:8080/v1/embeddings')
REMOTE_MODEL = os.getenv('HOMESTEAD_REMOTE_MODEL', 'gpt-4')
REMOTE_TIMEOUT = 60
REMOTE_RETRIES = 3

# Credentials are only ever read from the environment
_API_KEY_VARIABLE = 'HOMESTEAD_API_KEY'
