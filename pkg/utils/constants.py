# Application constants

# Version
APP_VERSION = "1.0.0"
APP_NAME = "qiline"

# Default sample grid (x0, ratio, count)
DEFAULT_GRID = (1.0, 2.0, 40)
MIN_QI_GRID_POINTS = 3
MIN_DRIFT_GRID_POINTS = 10

# Evaluation defaults
DEFAULT_ABS_TOL = 1e-12
DEFAULT_MAX_BISECT_ITERS = 400
DEFAULT_BRACKET_GROWTH = 2.0
DEFAULT_PRECISION_BITS = 53
EXTENDED_PRECISION_THRESHOLD = 1e8
EXTENDED_PRECISION_BITS = 96
# Extra bits on top of log2|x| so order-one differences survive at large x
EXTENDED_GUARD_BITS = 64
DERIVATIVE_STEP = 1e-4
# Relative slack when testing germ-domain membership
DOMAIN_SLACK = 1e-9
# First inverse bracket half-width, relative to max(1, |y|)
INITIAL_BRACKET_STEP = 2.0 ** -10

# H (sublinear drift) classification
DRIFT_TAIL_LENGTH = 5
DRIFT_TAIL_BOUND = 1e-3
LINEAR_DRIFT_BAND = 1e-3
LINEAR_DRIFT_MIN = 1e-2

# Divergence rule for bounded-distance verdicts
DIVERGENCE_SLOPE = 0.1
DIVERGENCE_GROWTH_FACTOR = 10.0
DIVERGENCE_FLOOR = 1.0

# Relations
RELATION_TOLERANCE = 1e-6
RELATION_IDS = ("conj", "addB", "commB", "multA")
CERTIFY_T_VALUES = ("1/2", "2", "4")
CERTIFY_I_VALUES = (1, 2, 5)
CERTIFY_S_VALUES = (-1, 1, 3)

# Independence
TRIVIAL_BOUND_FACTOR = 10.0

# Diff_Z lifts
DIFFZ_SEARCH_POINTS = 1024
DIFFZ_LEVELS = 20
DIFFZ_TOLERANCE = 0.01

# Ordering
WITNESS_THRESHOLD = 1e3
WORD_BUDGET = 100000
DEFAULT_MAX_WORD_LENGTH = 3

# Actions
DEFAULT_TAU_ITERATIONS = 10000
ADDITIVITY_TOLERANCE = 1e-3
SEMICONJUGACY_TOLERANCE = 1e-2
COMMUTE_TOLERANCE = 1e-8
FIXED_POINT_MAX_ITER = 200
FIXED_POINT_TOLERANCE = 1e-9
FUNCTIONAL_EQUATION_TOLERANCE = 1e-9
OBSTRUCTION_TOLERANCE = 1e-2
KERNEL_TOLERANCE = 1e-12
LINEARITY_MIN_SAMPLES = 10

# Output
OUTPUT_FORMATS = ("json", "csv", "plain")
SIGNIFICANT_DIGITS = 17
PRECISION_ENV_VAR = "QILINE_PRECISION_BITS"
PROFILE_CSV_HEADER = ("x", "displacement")
ORBIT_CSV_HEADER = ("step", "x")

# Exit codes
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

# Worker pool for parameter scans
DEFAULT_MAX_WORKERS = 4
