"""
Expression trees for orientation-preserving homeomorphism germs.

Every analytic map is a germ on [x0, +inf); the variants listed in
``FULL_LINE_VARIANTS`` are defined on the whole line. Composition is written
``left * right`` and applies ``right`` first.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple, Union

from models.rational_pl import RationalPL, format_rational
from utils.errors import InvariantViolation

Number = Union[int, float, Fraction]


def format_number(value: Number) -> str:
    """Canonical DSL text of a parameter; floats keep their shortest round-trip form."""
    if isinstance(value, float):
        return repr(value)
    return format_rational(Fraction(value))


def _require_finite(value, name):
    if isinstance(value, float) and not math.isfinite(value):
        raise InvariantViolation(f"{name} must be finite")


class MapExpr:
    """Base class of all map expression variants."""

    #: +1 for increasing maps, -1 for decreasing ones
    orientation = 1

    @property
    def full_line(self) -> bool:
        return True

    def to_text(self) -> str:
        raise NotImplementedError

    def children(self):
        return ()

    def __str__(self):
        return self.to_text()


@dataclass(frozen=True)
class Identity(MapExpr):
    def to_text(self):
        return "id"


@dataclass(frozen=True)
class Affine(MapExpr):
    """x -> a*x + b with a > 0 (the generator A_t is Affine(t, 0))."""
    a: Number
    b: Number = Fraction(0)

    def __post_init__(self):
        _require_finite(self.a, "a")
        _require_finite(self.b, "b")
        if not self.a > 0:
            raise InvariantViolation("a must be > 0")

    def to_text(self):
        if self.b == 0:
            return f"A({format_number(self.a)})"
        return f"affine({format_number(self.a)},{format_number(self.b)})"


@dataclass(frozen=True)
class PowerShift(MapExpr):
    """x -> x + s*x^(1/(i+1)), the generator B_{i,s}."""
    i: Number
    s: Number

    def __post_init__(self):
        _require_finite(self.i, "i")
        _require_finite(self.s, "s")
        if not self.i >= 1:
            raise InvariantViolation("i must be ≥ 1")

    @property
    def full_line(self):
        return False

    def to_text(self):
        return f"B({format_number(self.i)},{format_number(self.s)})"


@dataclass(frozen=True)
class LogShift(MapExpr):
    """x -> x + s*ln(1+x)."""
    s: Number

    def __post_init__(self):
        _require_finite(self.s, "s")

    @property
    def full_line(self):
        return False

    def to_text(self):
        return f"logshift({format_number(self.s)})"


@dataclass(frozen=True)
class LogPowerShift(MapExpr):
    """x -> ln(e^x + s*e^(x/(i+1))), the logarithmic model b_{i,s}."""
    i: Number
    s: Number

    def __post_init__(self):
        _require_finite(self.i, "i")
        _require_finite(self.s, "s")
        if not self.i >= 1:
            raise InvariantViolation("i must be ≥ 1")

    @property
    def full_line(self):
        return self.s >= 0

    def to_text(self):
        return f"b({format_number(self.i)},{format_number(self.s)})"


@dataclass(frozen=True)
class ExpGlue(MapExpr):
    """e^x for x >= 1, -e^(-x) for x <= -1, e*x in between."""

    def to_text(self):
        return "h"


@dataclass(frozen=True)
class Reflect(MapExpr):
    """The reflection x -> -x."""
    orientation = -1

    def to_text(self):
        return "refl"


@dataclass(frozen=True)
class RationalPLRef(MapExpr):
    pl: RationalPL

    def to_text(self):
        return f"pl[{self.pl.body_text()}]"


@dataclass(frozen=True)
class PeriodicLift(MapExpr):
    """The lift x -> pl01(frac(x)) + floor(x), which commutes with x -> x+1."""
    pl01: RationalPL

    def __post_init__(self):
        if not self.pl01.is_unit_lift_body():
            raise InvariantViolation(
                "lift body must run from x=0 to x=1 and satisfy pl01(1) = pl01(0) + 1"
            )

    def to_text(self):
        return f"lift[{self.pl01.body_text()}]"


@dataclass(frozen=True)
class Extend(MapExpr):
    """inner on [c, +inf), continued to the left by the translation through (c, inner(c))."""
    c: Number
    inner: MapExpr

    def __post_init__(self):
        _require_finite(self.c, "c")
        if self.inner.orientation < 0:
            raise InvariantViolation("ext() needs an increasing inner map")

    def children(self):
        return (self.inner,)

    def to_text(self):
        return f"ext({format_number(self.c)},{self.inner.to_text()})"


@dataclass(frozen=True)
class DiagonalConjugate(MapExpr):
    """
    Conjugate of ``inner`` into each interval (a, b) through the logistic
    chart u -> a + (b - a)/(1 + e^-u); the identity outside the intervals.
    """
    inner: MapExpr
    intervals: Tuple[Tuple[Number, Number], ...]

    def __post_init__(self):
        if not self.intervals:
            raise InvariantViolation("a diagonal embedding needs at least one interval")
        if not self.inner.full_line or self.inner.orientation < 0:
            raise InvariantViolation("diag() needs an increasing full-line inner map")
        ordered = sorted(self.intervals, key=lambda pair: pair[0])
        for a, b in ordered:
            _require_finite(a, "interval end")
            _require_finite(b, "interval end")
            if not a < b:
                raise InvariantViolation("interval ends must satisfy a < b")
        for (_, b0), (a1, _) in zip(ordered, ordered[1:]):
            if a1 < b0:
                raise InvariantViolation("diagonal intervals must be pairwise disjoint")
        object.__setattr__(self, "intervals", tuple(tuple(pair) for pair in ordered))

    def children(self):
        return (self.inner,)

    def to_text(self):
        body = "".join(f"{format_number(a)}:{format_number(b)};" for a, b in self.intervals)
        return f"diag[{body}]({self.inner.to_text()})"


@dataclass(frozen=True)
class Compose(MapExpr):
    """left ∘ right: right is applied first."""
    left: MapExpr
    right: MapExpr

    def __post_init__(self):
        reversing = self.left.orientation < 0 or self.right.orientation < 0
        if reversing and not (self.left.full_line and self.right.full_line):
            raise InvariantViolation("refl can only be composed with full-line maps")

    @property
    def orientation(self):
        return self.left.orientation * self.right.orientation

    @property
    def full_line(self):
        return self.left.full_line and self.right.full_line

    def children(self):
        return (self.left, self.right)

    def factors(self):
        """Flattened factors, outermost first."""
        result = []
        for part in (self.left, self.right):
            if isinstance(part, Compose):
                result.extend(part.factors())
            else:
                result.append(part)
        return result

    def to_text(self):
        return " * ".join(factor.to_text() for factor in self.factors())


@dataclass(frozen=True)
class Inverse(MapExpr):
    inner: MapExpr

    @property
    def orientation(self):
        return self.inner.orientation

    @property
    def full_line(self):
        return self.inner.full_line

    def children(self):
        return (self.inner,)

    def to_text(self):
        return f"inv({self.inner.to_text()})"


@dataclass(frozen=True)
class GermDomain:
    """[x0, +inf) on which an expression is defined and strictly monotone."""
    x0: float
    full_line: bool

    def contains(self, x, slack=0.0):
        return self.full_line or x >= self.x0 - slack

    def to_dict(self):
        return {"x0": self.x0, "fullLine": self.full_line}


FULL_LINE_VARIANTS = (Identity, Affine, ExpGlue, Reflect, RationalPLRef, PeriodicLift,
                      Extend, DiagonalConjugate)


def compose_all(factors):
    """Right-nested composite of ``factors`` (outermost first)."""
    factors = list(factors)
    if not factors:
        return Identity()
    result = factors[-1]
    for factor in reversed(factors[:-1]):
        result = Compose(factor, result)
    return result


def canonical(expr: MapExpr) -> MapExpr:
    """Right-nest every composition chain so that equal texts give equal trees."""
    if isinstance(expr, Compose):
        return compose_all(canonical(f) for f in expr.factors())
    if isinstance(expr, Inverse):
        return Inverse(canonical(expr.inner))
    if isinstance(expr, Extend):
        return Extend(expr.c, canonical(expr.inner))
    if isinstance(expr, DiagonalConjugate):
        return DiagonalConjugate(canonical(expr.inner), expr.intervals)
    return expr
