from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from utils.errors import InvariantViolation


def as_fraction(value):
    """Exact rational for ints, Fractions, floats and "p/q" strings."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value)
    return Fraction(value)


def format_rational(value: Fraction) -> str:
    value = as_fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class RationalPL:
    """
    Piecewise-linear homeomorphism of the real line with rational breakpoints.

    Beyond the first breakpoint the map continues with ``left_slope`` and
    beyond the last one with ``right_slope``.
    """
    breakpoints: Tuple[Tuple[Fraction, Fraction], ...]
    left_slope: Fraction
    right_slope: Fraction

    def __post_init__(self):
        points = tuple((as_fraction(x), as_fraction(y)) for x, y in self.breakpoints)
        object.__setattr__(self, "breakpoints", points)
        object.__setattr__(self, "left_slope", as_fraction(self.left_slope))
        object.__setattr__(self, "right_slope", as_fraction(self.right_slope))
        if not points:
            raise InvariantViolation("a PL map needs at least one breakpoint")
        if self.left_slope <= 0 or self.right_slope <= 0:
            raise InvariantViolation("PL end slopes must be positive")
        for (x0, y0), (x1, y1) in zip(points, points[1:]):
            if x1 <= x0:
                raise InvariantViolation("PL breakpoint x-coordinates must be strictly increasing")
            if y1 <= y0:
                raise InvariantViolation("PL induced slopes must be positive")

    # -- constructors -------------------------------------------------

    @classmethod
    def identity(cls):
        return cls(((Fraction(0), Fraction(0)),), Fraction(1), Fraction(1))

    @classmethod
    def affine(cls, a, b):
        """The map x -> a*x + b, anchored at the origin."""
        a, b = as_fraction(a), as_fraction(b)
        return cls(((Fraction(0), b),), a, a)

    # -- evaluation ---------------------------------------------------

    @property
    def xs(self):
        return [x for x, _ in self.breakpoints]

    @property
    def ys(self):
        return [y for _, y in self.breakpoints]

    def segment_slopes(self):
        """Slopes of the bounded segments, left to right."""
        return [
            (y1 - y0) / (x1 - x0)
            for (x0, y0), (x1, y1) in zip(self.breakpoints, self.breakpoints[1:])
        ]

    def slopes(self):
        """All slopes including both unbounded ends."""
        return [self.left_slope] + self.segment_slopes() + [self.right_slope]

    def slope_at(self, x) -> Fraction:
        """Right derivative at x."""
        x = as_fraction(x)
        index = bisect_right(self.xs, x)
        return self.slopes()[index]

    def evaluate(self, x) -> Fraction:
        x = as_fraction(x)
        xs = self.xs
        first_x, first_y = self.breakpoints[0]
        last_x, last_y = self.breakpoints[-1]
        if x <= first_x:
            return first_y + self.left_slope * (x - first_x)
        if x >= last_x:
            return last_y + self.right_slope * (x - last_x)
        index = bisect_right(xs, x) - 1
        (x0, y0), (x1, y1) = self.breakpoints[index], self.breakpoints[index + 1]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def evaluate_inverse(self, y) -> Fraction:
        y = as_fraction(y)
        first_x, first_y = self.breakpoints[0]
        last_x, last_y = self.breakpoints[-1]
        if y <= first_y:
            return first_x + (y - first_y) / self.left_slope
        if y >= last_y:
            return last_x + (y - last_y) / self.right_slope
        index = bisect_right(self.ys, y) - 1
        (x0, y0), (x1, y1) = self.breakpoints[index], self.breakpoints[index + 1]
        return x0 + (x1 - x0) * (y - y0) / (y1 - y0)

    # -- group operations ----------------------------------------------

    def canonical(self):
        """
        Drop breakpoints where the slope does not change.

        A map without any genuine break keeps the single anchor (0, f(0)), so
        equal maps have equal canonical representations.
        """
        slopes = self.slopes()
        kept = [
            point for k, point in enumerate(self.breakpoints)
            if slopes[k] != slopes[k + 1]
        ]
        if not kept:
            kept = [(Fraction(0), self.evaluate(0))]
        return RationalPL(tuple(kept), self.left_slope, self.right_slope)

    def compose(self, inner):
        """Exact composite self ∘ inner, in canonical form."""
        candidates = set(inner.xs)
        candidates.update(inner.evaluate_inverse(u) for u in self.xs)
        points = tuple((x, self.evaluate(inner.evaluate(x))) for x in sorted(candidates))
        result = RationalPL(
            points,
            self.left_slope * inner.left_slope,
            self.right_slope * inner.right_slope,
        )
        return result.canonical()

    def inverse(self):
        points = tuple((y, x) for x, y in self.breakpoints)
        return RationalPL(points, 1 / self.left_slope, 1 / self.right_slope).canonical()

    def shifted(self, dy):
        """x -> f(x) + dy."""
        dy = as_fraction(dy)
        points = tuple((x, y + dy) for x, y in self.breakpoints)
        return RationalPL(points, self.left_slope, self.right_slope)

    def reflected(self):
        """x -> -f(-x); the germs at +inf and -inf trade places."""
        points = tuple((-x, -y) for x, y in reversed(self.breakpoints))
        return RationalPL(points, self.right_slope, self.left_slope)

    # -- periodic lifts ---------------------------------------------------

    def is_unit_lift_body(self):
        """True when the breakpoints run from x=0 to x=1 and rise by exactly 1."""
        first_x, first_y = self.breakpoints[0]
        last_x, last_y = self.breakpoints[-1]
        return first_x == 0 and last_x == 1 and last_y - first_y == 1

    # -- serialization ----------------------------------------------------

    def body_text(self):
        points = "".join(f"{format_rational(x)}:{format_rational(y)};" for x, y in self.breakpoints)
        return (
            f"{points}slopes({format_rational(self.left_slope)},"
            f"{format_rational(self.right_slope)})"
        )

    def to_dict(self):
        return {
            "breakpoints": [[format_rational(x), format_rational(y)] for x, y in self.breakpoints],
            "leftSlope": format_rational(self.left_slope),
            "rightSlope": format_rational(self.right_slope),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            tuple((Fraction(x), Fraction(y)) for x, y in data["breakpoints"]),
            Fraction(data["leftSlope"]),
            Fraction(data["rightSlope"]),
        )

    def __repr__(self):
        return f"RationalPL({self.body_text()})"
