import logging

# DEFAULT CONFIG:
ENCODING = 'utf-8'
LOGGING_LVL = logging.DEBUG
DEFAULT_LOG_NAME = 'bundleconn'
BUNDLECONN_CONFIG = 'bundleconn.ini'
SEED_ENV_VAR = 'BUNDLECONN_SEED'
LOG_LEVEL_ENV_VAR = 'BUNDLECONN_LOG_LEVEL'
DEFAULT_SEED = 20240101
DEFAULT_TRIALS = 20
DEFAULT_DATABASE_PATH = 'db'
DEFAULT_DATABASE_FILE = 'run_history.db3'
MAX_LOGGED_ARGUMENT = 120

# RANDOM GENERATION BOUNDS:
MAX_NUMERATOR = 5
MAX_DENOMINATOR = 3
MAX_POLY_DEGREE = 2
MAX_MORPHISM_DEGREE = 3
RANK_DRAWS = 3
MAX_RANK_DRAWS = 8

# EXIT CODES:
EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_ORDER_EXHAUSTED = 3

# REPORT KEYS:
SCHEMA_VERSION = 1
SCHEMA = 'schema'
COMMAND = 'command'
SCENE_DIGEST = 'scene_digest'
SEED = 'seed'
RESULTS = 'results'
SUMMARY = 'summary'
PASSED = 'passed'
SUITE = 'suite'
TRIALS = 'trials'
PASSES = 'passes'
FAILURES = 'failures'

# COMMANDS, TARGETS AND SUITES:
COMMANDS = ('curvature', 'induce', 'verify', 'weights')
TARGETS = ('d', 'd-tilde', 'gamma', 'gamma-tilde')
SUITES = ('prop21', 'naturality', 'rank', 'kernel', 'affine', 'weights',
          'geometric', 'calculus', 'chi', 'all')

# SCENE KEYS:
SCENE_M = 'm'
SCENE_N = 'n'
SCENE_ORDER = 'order'
SCENE_POINT = 'point'
SCENE_LAMBDA = 'lambda'
SCENE_K = 'k'
SCENE_PARAMS15 = 'params15'
SCENE_PARAMS14 = 'params14'
SCENE_SEED = 'seed'
SCENE_JETS = 'jets'

# JET TRUNCATION:
# Extra total degree granted to base jets lifted to E or J1E, so that
# multiplication by fiber coordinates never truncates base-degree terms.
FIBER_DEGREE_SLACK = 3
