"""
Sample grids and the evidence-carrying verdicts of the coarse-geometry measurements.
"""

from dataclasses import dataclass, field
from typing import Tuple

import mpmath

from utils.errors import InvariantViolation
from utils.precision import FLOAT_SAFE_LIMIT, json_real


@dataclass(frozen=True)
class SampleGrid:
    """Geometric grid x0 * ratio**k, k = 0 .. count-1."""
    x0: float = 1.0
    ratio: float = 2.0
    count: int = 40

    def __post_init__(self):
        if not self.x0 >= 1:
            raise InvariantViolation("grid x0 must be ≥ 1")
        if not self.ratio > 1:
            raise InvariantViolation("grid ratio must be > 1")
        if int(self.count) != self.count or self.count < 1:
            raise InvariantViolation("grid count must be a positive integer")

    def point(self, k):
        try:
            value = float(self.x0) * float(self.ratio) ** k
        except OverflowError:
            value = float("inf")
        if value < FLOAT_SAFE_LIMIT:
            return value
        # beyond the float range the grid continues in mpmath
        return mpmath.mpf(self.x0) * mpmath.mpf(self.ratio) ** k

    def points(self):
        return [self.point(k) for k in range(int(self.count))]

    def top_half(self):
        """Indices of the upper half of the grid."""
        return list(range(int(self.count) // 2, int(self.count)))

    def first_decade(self):
        """Indices of the points with x ≤ 10*x0 (at least the first point)."""
        limit = 10 * self.x0
        indices = [k for k, x in enumerate(self.points()) if x <= limit]
        return indices or [0]

    def last_decade(self):
        """Indices of the points with x ≥ x_last/10."""
        points = self.points()
        limit = points[-1] / 10
        return [k for k, x in enumerate(points) if x >= limit]

    def with_x0(self, x0):
        return SampleGrid(x0, self.ratio, self.count)

    def to_dict(self):
        return {"x0": self.x0, "ratio": self.ratio, "count": int(self.count)}


@dataclass(frozen=True)
class QIEstimate:
    K: float
    C: float
    grid: SampleGrid

    def to_dict(self):
        return {"K": self.K, "C": self.C, "grid": self.grid.to_dict()}


class DriftClass:
    """Membership evidence for the sublinear-drift subgroup."""
    kind = "DriftClass"

    def to_dict(self):
        return {"drift": self.kind}


@dataclass(frozen=True)
class Sublinear(DriftClass):
    kind = "Sublinear"


@dataclass(frozen=True)
class LinearDrift(DriftClass):
    lam: float
    kind = "LinearDrift"

    def to_dict(self):
        return {"drift": self.kind, "lambda": self.lam}


@dataclass(frozen=True)
class Unresolved(DriftClass):
    evidence: Tuple[float, ...]
    kind = "Unresolved"

    def to_dict(self):
        return {"drift": self.kind, "evidence": list(self.evidence)}


class DistanceVerdict:
    """Bounded-distance evidence between two maps."""
    kind = "DistanceVerdict"

    @property
    def bounded(self):
        return isinstance(self, (BoundedEvidence, ExactEqual))

    def to_dict(self):
        return {"verdict": self.kind}


@dataclass(frozen=True)
class BoundedEvidence(DistanceVerdict):
    M: float
    kind = "BoundedEvidence"

    def to_dict(self):
        return {"verdict": self.kind, "M": json_real(self.M)}


@dataclass(frozen=True)
class Divergent(DistanceVerdict):
    """The difference grows without bound; ``sign`` is the sign of its tail."""
    fit_slope: float
    sign: int = 1
    sup: float = 0.0
    kind = "Divergent"

    def to_dict(self):
        return {"verdict": self.kind, "fitSlope": self.fit_slope, "sign": self.sign,
                "supDifference": json_real(self.sup)}


@dataclass(frozen=True)
class ExactEqual(DistanceVerdict):
    kind = "ExactEqual"


@dataclass(frozen=True)
class ExactDifferent(DistanceVerdict):
    kind = "ExactDifferent"


@dataclass(frozen=True)
class WMembership:
    in_w: bool
    sup_disp: float
    sup_deriv: float
    details: dict = field(default_factory=dict, compare=False)

    def to_dict(self):
        return {"inW": self.in_w, "supDisp": json_real(self.sup_disp),
                "supDeriv": json_real(self.sup_deriv)}
