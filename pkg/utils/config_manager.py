# Configuration management system

import json
import logging
import os
from dataclasses import dataclass, asdict, fields, replace
from typing import Optional, Tuple

from utils.constants import (
    DEFAULT_GRID, DEFAULT_ABS_TOL, DEFAULT_MAX_BISECT_ITERS, DEFAULT_BRACKET_GROWTH,
    DEFAULT_PRECISION_BITS, EXTENDED_PRECISION_THRESHOLD, EXTENDED_PRECISION_BITS,
    DRIFT_TAIL_LENGTH, DRIFT_TAIL_BOUND, LINEAR_DRIFT_BAND, LINEAR_DRIFT_MIN,
    DIVERGENCE_SLOPE, DIVERGENCE_GROWTH_FACTOR, DIVERGENCE_FLOOR, RELATION_TOLERANCE,
    TRIVIAL_BOUND_FACTOR, DIFFZ_SEARCH_POINTS, DIFFZ_LEVELS, DIFFZ_TOLERANCE,
    WITNESS_THRESHOLD, WORD_BUDGET, DEFAULT_MAX_WORD_LENGTH, DEFAULT_TAU_ITERATIONS,
    ADDITIVITY_TOLERANCE, SEMICONJUGACY_TOLERANCE, COMMUTE_TOLERANCE,
    FIXED_POINT_MAX_ITER, FIXED_POINT_TOLERANCE, FUNCTIONAL_EQUATION_TOLERANCE,
    OBSTRUCTION_TOLERANCE, OUTPUT_FORMATS, PRECISION_ENV_VAR, DEFAULT_MAX_WORKERS,
)
from utils.errors import InvariantViolation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalConfig:
    """Numerical settings for evaluating map expressions."""
    abs_tol: float = DEFAULT_ABS_TOL
    max_bisect_iters: int = DEFAULT_MAX_BISECT_ITERS
    bracket_growth: float = DEFAULT_BRACKET_GROWTH
    precision_bits: int = DEFAULT_PRECISION_BITS
    extended_threshold: float = EXTENDED_PRECISION_THRESHOLD
    extended_bits: int = EXTENDED_PRECISION_BITS

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise InvariantViolation("absTol must be > 0")
        if self.max_bisect_iters < 1:
            raise InvariantViolation("maxBisectIters must be a positive integer")
        if not self.bracket_growth > 1:
            raise InvariantViolation("bracketGrowth must be > 1")
        if self.precision_bits < 1:
            raise InvariantViolation("precisionBits must be a positive integer")


@dataclass(frozen=True)
class RunConfig:
    """Settings of a single CLI run; recorded in every report."""
    grid: Tuple[float, float, int] = DEFAULT_GRID
    abs_tol: float = DEFAULT_ABS_TOL
    precision_bits: int = DEFAULT_PRECISION_BITS
    output_format: str = "json"
    seed: int = 0
    max_len: int = DEFAULT_MAX_WORD_LENGTH
    max_workers: int = DEFAULT_MAX_WORKERS

    def __post_init__(self):
        if self.output_format not in OUTPUT_FORMATS:
            raise InvariantViolation(f"output format must be one of {', '.join(OUTPUT_FORMATS)}")

    def to_dict(self):
        return {
            "grid": list(self.grid),
            "absTol": self.abs_tol,
            "precisionBits": self.precision_bits,
            "outputFormat": self.output_format,
            "seed": self.seed,
            "maxLen": self.max_len,
        }


@dataclass
class AppConfig:
    """Application configuration class"""
    # Evaluation settings
    abs_tol: float = DEFAULT_ABS_TOL
    max_bisect_iters: int = DEFAULT_MAX_BISECT_ITERS
    bracket_growth: float = DEFAULT_BRACKET_GROWTH
    precision_bits: int = DEFAULT_PRECISION_BITS
    extended_threshold: float = EXTENDED_PRECISION_THRESHOLD
    extended_bits: int = EXTENDED_PRECISION_BITS

    # Sample grid
    grid_x0: float = DEFAULT_GRID[0]
    grid_ratio: float = DEFAULT_GRID[1]
    grid_count: int = DEFAULT_GRID[2]

    # Drift classification (membership in H)
    drift_tail_length: int = DRIFT_TAIL_LENGTH
    drift_tail_bound: float = DRIFT_TAIL_BOUND
    linear_drift_band: float = LINEAR_DRIFT_BAND
    linear_drift_min: float = LINEAR_DRIFT_MIN

    # Bounded distance
    divergence_slope: float = DIVERGENCE_SLOPE
    divergence_growth_factor: float = DIVERGENCE_GROWTH_FACTOR
    divergence_floor: float = DIVERGENCE_FLOOR

    # Generators
    relation_tolerance: float = RELATION_TOLERANCE
    trivial_bound_factor: float = TRIVIAL_BOUND_FACTOR
    diffz_search_points: int = DIFFZ_SEARCH_POINTS
    diffz_levels: int = DIFFZ_LEVELS
    diffz_tolerance: float = DIFFZ_TOLERANCE

    # Ordering
    witness_threshold: float = WITNESS_THRESHOLD
    word_budget: int = WORD_BUDGET
    max_word_length: int = DEFAULT_MAX_WORD_LENGTH

    # Actions
    tau_iterations: int = DEFAULT_TAU_ITERATIONS
    additivity_tolerance: float = ADDITIVITY_TOLERANCE
    semiconjugacy_tolerance: float = SEMICONJUGACY_TOLERANCE
    commute_tolerance: float = COMMUTE_TOLERANCE
    fixed_point_max_iter: int = FIXED_POINT_MAX_ITER
    fixed_point_tolerance: float = FIXED_POINT_TOLERANCE
    functional_equation_tolerance: float = FUNCTIONAL_EQUATION_TOLERANCE
    obstruction_tolerance: float = OBSTRUCTION_TOLERANCE

    # Run settings
    output_format: str = "json"
    seed: int = 0
    max_workers: int = DEFAULT_MAX_WORKERS

    @property
    def grid(self):
        return (self.grid_x0, self.grid_ratio, self.grid_count)


class ConfigManager:
    """Configuration manager for the application"""

    def __init__(self, config_file="config.json"):
        self.config_file = config_file
        self.config = AppConfig()
        self.load_config()

    def load_config(self):
        """Load configuration from file"""
        if os.path.exists(self.config_file):
            try:
                with open(self.config_file, 'r') as f:
                    data = json.load(f)
                    # Update config with loaded data
                    for key, value in data.items():
                        if hasattr(self.config, key):
                            setattr(self.config, key, value)
                        else:
                            logger.debug("Ignoring unknown config key %s", key)
            except Exception as e:
                logger.warning("Error loading config %s: %s", self.config_file, e)
                self.config = AppConfig()

    def save_config(self):
        """Save configuration to file"""
        try:
            with open(self.config_file, 'w') as f:
                json.dump(asdict(self.config), f, indent=4)
        except Exception as e:
            logger.warning("Error saving config %s: %s", self.config_file, e)

    def get(self, key: str, default=None):
        """Get configuration value"""
        return getattr(self.config, key, default)

    def set(self, key: str, value, persist=True):
        """Set configuration value; the file is rewritten only when persist is true"""
        if hasattr(self.config, key):
            setattr(self.config, key, value)
            if persist:
                self.save_config()
        else:
            logger.debug("Ignoring unknown config key %s", key)

    def precision_override(self) -> Optional[int]:
        """Precision requested through the environment, if any."""
        raw = os.environ.get(PRECISION_ENV_VAR)
        if not raw:
            return None
        try:
            bits = int(raw)
        except ValueError:
            logger.warning("Ignoring %s=%r: not an integer", PRECISION_ENV_VAR, raw)
            return None
        if bits < 1:
            logger.warning("Ignoring %s=%r: must be positive", PRECISION_ENV_VAR, raw)
            return None
        return bits

    def eval_config(self, **overrides) -> EvalConfig:
        """Build the evaluation settings from the stored config."""
        names = {f.name for f in fields(EvalConfig)}
        values = {name: self.get(name) for name in names}
        values.update({k: v for k, v in overrides.items() if v is not None})
        env_bits = self.precision_override()
        if env_bits is not None:
            values["precision_bits"] = env_bits
        return EvalConfig(**values)

    def run_config(self, **overrides) -> RunConfig:
        """Build the settings of one CLI run; the environment wins over --bits."""
        run = RunConfig(
            grid=self.get("grid"),
            abs_tol=self.get("abs_tol"),
            precision_bits=self.get("precision_bits"),
            output_format=self.get("output_format"),
            seed=self.get("seed"),
            max_len=self.get("max_word_length"),
            max_workers=self.get("max_workers"),
        )
        run = replace(run, **{k: v for k, v in overrides.items() if v is not None})
        env_bits = self.precision_override()
        if env_bits is not None:
            run = replace(run, precision_bits=env_bits)
        return run
