"""
Actions on the line: generator sets, translation numbers, semi-conjugacies,
diagonal embeddings and the obstruction reports of the falsification harness.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from models.map_expr import Affine, DiagonalConjugate, Inverse, compose_all
from utils.errors import InvariantViolation, OverlappingIntervals, PreconditionError
from utils.precision import json_real


@dataclass(frozen=True)
class ActionSpec:
    """
    Named full-line generators and the relations expected to hold between them.

    A word is a tuple of (generator name, exponent) pairs, outermost first.
    """
    generators: Tuple[Tuple[str, object], ...]
    relations: Tuple[Tuple[tuple, tuple], ...] = ()

    def __post_init__(self):
        generators = tuple((str(name), f) for name, f in self.generators)
        names = [name for name, _ in generators]
        if len(set(names)) != len(names):
            raise InvariantViolation("generator names must be distinct")
        for name, f in generators:
            if not f.full_line:
                raise InvariantViolation(f"generator {name} must be defined on the whole line")
            if f.orientation < 0:
                raise InvariantViolation(f"generator {name} must be increasing")
        relations = tuple((tuple(lhs), tuple(rhs)) for lhs, rhs in self.relations)
        for lhs, rhs in relations:
            for name, _ in lhs + rhs:
                if name not in names:
                    raise InvariantViolation(f"relation uses unknown generator {name!r}")
        object.__setattr__(self, "generators", generators)
        object.__setattr__(self, "relations", relations)

    @property
    def names(self):
        return [name for name, _ in self.generators]

    def generator(self, name):
        return dict(self.generators)[name]

    def word_map(self, word):
        """The map of a word; the empty word is the identity."""
        factors = []
        for name, n in word:
            f = self.generator(name)
            factors.extend([Inverse(f) if n < 0 else f] * abs(int(n)))
        return compose_all(factors)

    def to_dict(self):
        return {
            "generators": {name: f.to_text() for name, f in self.generators},
            "relations": [
                {"lhs": [list(letter) for letter in lhs], "rhs": [list(letter) for letter in rhs]}
                for lhs, rhs in self.relations
            ],
        }


@dataclass(frozen=True)
class TranslationNumber:
    value: float
    iterations: int
    error_estimate: float
    x0: float = 0.0
    chart: Optional[int] = None

    def to_dict(self):
        data = {
            "value": json_real(self.value),
            "iterations": self.iterations,
            "errorEstimate": json_real(self.error_estimate),
            "x0": json_real(self.x0),
        }
        if self.chart is not None:
            data["chart"] = self.chart
        return data


@dataclass(frozen=True)
class SemiConjugacy:
    """Monotone φ sampled on an orbit, with φ(h(x)) = φ(x) + τ(h) up to ``residual``."""
    grid_points: Tuple[Tuple[float, float], ...]
    residual: float
    taus: Tuple[Tuple[str, float], ...] = ()

    def __post_init__(self):
        values = [phi for _, phi in self.grid_points]
        if any(b < a for a, b in zip(values, values[1:])):
            raise InvariantViolation("semi-conjugacy values must be non-decreasing")

    def __call__(self, x):
        """Monotone interpolation of φ; constant beyond the sampled orbit."""
        xs = [p for p, _ in self.grid_points]
        phis = [v for _, v in self.grid_points]
        return float(np.interp(float(x), xs, phis))

    def to_dict(self):
        return {
            "gridPoints": [[json_real(x), json_real(phi)] for x, phi in self.grid_points],
            "residual": json_real(self.residual),
            "tau": {name: json_real(value) for name, value in self.taus},
        }


@dataclass(frozen=True)
class LogisticChart:
    """u -> a + (b - a)/(1 + e^-u), a homeomorphism from the line onto (a, b)."""
    a: float
    b: float

    def __call__(self, u):
        if u >= 0:
            return self.a + (self.b - self.a) / (1 + math.exp(-u))
        e = math.exp(u)
        return self.a + (self.b - self.a) * e / (1 + e)

    def inverse(self, x):
        if not self.a < x < self.b:
            raise PreconditionError(f"x={x!r} lies outside the chart interval ({self.a}, {self.b})")
        return math.log(x - self.a) - math.log(self.b - x)


@dataclass(frozen=True)
class DiagonalEmbedding:
    """Disjoint open intervals, each carrying a logistic chart."""
    intervals: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        if not self.intervals:
            raise InvariantViolation("a diagonal embedding needs at least one interval")
        intervals = tuple(tuple(pair) for pair in self.intervals)
        for a, b in intervals:
            if not a < b:
                raise InvariantViolation("interval ends must satisfy a < b")
        ordered = sorted(intervals)
        for (a0, b0), (a1, b1) in zip(ordered, ordered[1:]):
            if a1 < b0:
                raise OverlappingIntervals(f"({a0}, {b0}) and ({a1}, {b1}) overlap")
        object.__setattr__(self, "intervals", intervals)

    def chart(self, n):
        a, b = self.intervals[n]
        return LogisticChart(a, b)

    def embed(self, f):
        return DiagonalConjugate(f, self.intervals)

    def to_dict(self):
        return {"intervals": [[json_real(a), json_real(b)] for a, b in self.intervals]}


@dataclass(frozen=True)
class ObstructionReport:
    parameters: Tuple[Tuple[str, object], ...]
    residuals: Tuple[Tuple[str, float], ...]
    fixed_point_witness: Optional[float]
    conclusion: str
    details: dict = field(default_factory=dict, compare=False)

    @property
    def max_violation(self):
        return max((value for _, value in self.residuals), default=0.0)

    def residual(self, name):
        return dict(self.residuals)[name]

    def to_dict(self):
        return {
            "parameters": {key: json_real(value) for key, value in self.parameters},
            "residuals": {name: json_real(value) for name, value in self.residuals},
            "maxViolation": json_real(self.max_violation),
            "fixedPointWitness": json_real(self.fixed_point_witness)
            if self.fixed_point_witness is not None else None,
            "conclusion": self.conclusion,
            "details": self.details,
        }


@dataclass(frozen=True)
class HolderCheck:
    additive: bool
    residual: float
    taus: Tuple[Tuple[str, TranslationNumber], ...]

    def to_dict(self):
        return {
            "additive": self.additive,
            "residual": json_real(self.residual),
            "tau": {name: tau.to_dict() for name, tau in self.taus},
        }


@dataclass(frozen=True)
class LinearityResult:
    linear: bool
    slope: float
    max_deviation: float

    def to_dict(self):
        return {"linear": self.linear, "slope": self.slope, "maxDeviation": self.max_deviation}


# -- candidate families for the semidirect-product harness ---------------------------

# Unit interval hosting every candidate action
CANDIDATE_INTERVAL = (0.0, 1.0)


class CandidateFamily:
    """
    A candidate action of the affine-by-sum group: A_t and the B_{i,s} of
    two summands i = 1, 2, each conjugated into one chart interval.
    """
    kind = "candidate"
    summands = (1, 2)
    #: True when the B-summands act freely in chart coordinates
    translating = True

    def __init__(self, c1, c2, kappa):
        if c1 == 0 or c2 == 0:
            raise PreconditionError("summand coefficients must be nonzero")
        self.c1 = c1
        self.c2 = c2
        self.kappa = kappa
        self.embedding = DiagonalEmbedding((CANDIDATE_INTERVAL,))

    def coefficient(self, i):
        if i not in self.summands:
            raise PreconditionError(f"family has no summand {i}")
        return self.c1 if i == 1 else self.c2

    def A(self, t):
        """Chart translation by kappa * ln t."""
        return self.embedding.embed(Affine(1, self.kappa * math.log(float(t))))

    def chart_B(self, i, s):
        raise NotImplementedError

    def B(self, i, s):
        return self.embedding.embed(self.chart_B(i, s))

    @property
    def fixed_point(self):
        return None

    def parameters(self):
        return (("c1", self.c1), ("c2", self.c2), ("kappa", self.kappa))


class TranslationFamily(CandidateFamily):
    """B_{i,s} acts as the chart translation by c_i * s."""
    kind = "translation"

    def chart_B(self, i, s):
        return Affine(1, self.coefficient(i) * float(s))


class ScalingFamily(CandidateFamily):
    """B_{i,s} acts as the chart scaling by e^(c_i * s), fixing the chart origin."""
    kind = "scaling"
    translating = False

    def chart_B(self, i, s):
        return Affine(math.exp(self.coefficient(i) * float(s)), 0)

    @property
    def fixed_point(self):
        return self.embedding.chart(0)(0.0)


CANDIDATE_FAMILIES = {"translation": TranslationFamily, "scaling": ScalingFamily}
