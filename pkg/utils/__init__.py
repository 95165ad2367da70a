from utils.constants import *

__all__ = [
    'APP_VERSION', 'APP_NAME', 'DEFAULT_GRID', 'MIN_QI_GRID_POINTS', 'MIN_DRIFT_GRID_POINTS',
    'DEFAULT_ABS_TOL', 'DEFAULT_MAX_BISECT_ITERS', 'DEFAULT_BRACKET_GROWTH',
    'DEFAULT_PRECISION_BITS', 'EXTENDED_PRECISION_THRESHOLD', 'EXTENDED_PRECISION_BITS',
    'EXTENDED_GUARD_BITS', 'DERIVATIVE_STEP', 'DOMAIN_SLACK', 'INITIAL_BRACKET_STEP',
    'DRIFT_TAIL_LENGTH', 'DRIFT_TAIL_BOUND', 'LINEAR_DRIFT_BAND', 'LINEAR_DRIFT_MIN',
    'DIVERGENCE_SLOPE', 'DIVERGENCE_GROWTH_FACTOR', 'DIVERGENCE_FLOOR',
    'RELATION_TOLERANCE', 'RELATION_IDS', 'CERTIFY_T_VALUES', 'CERTIFY_I_VALUES', 'CERTIFY_S_VALUES',
    'TRIVIAL_BOUND_FACTOR', 'DIFFZ_SEARCH_POINTS', 'DIFFZ_LEVELS', 'DIFFZ_TOLERANCE',
    'WITNESS_THRESHOLD', 'WORD_BUDGET', 'DEFAULT_MAX_WORD_LENGTH',
    'DEFAULT_TAU_ITERATIONS', 'ADDITIVITY_TOLERANCE', 'SEMICONJUGACY_TOLERANCE',
    'COMMUTE_TOLERANCE', 'FIXED_POINT_MAX_ITER', 'FIXED_POINT_TOLERANCE',
    'FUNCTIONAL_EQUATION_TOLERANCE', 'OBSTRUCTION_TOLERANCE', 'KERNEL_TOLERANCE',
    'LINEARITY_MIN_SAMPLES', 'OUTPUT_FORMATS', 'SIGNIFICANT_DIGITS', 'PRECISION_ENV_VAR',
    'PROFILE_CSV_HEADER', 'ORBIT_CSV_HEADER', 'EXIT_OK', 'EXIT_CHECK_FAILED', 'EXIT_USAGE',
    'DEFAULT_MAX_WORKERS'
]
