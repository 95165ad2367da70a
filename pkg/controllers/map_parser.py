"""
Recursive-descent parser for the map expression language.

    map  := term ("*" term)*
    term := "id" | "A(" num ")" | "B(" num "," num ")" | "a(" num ")"
          | "b(" num "," num ")" | "logshift(" num ")" | "affine(" num "," num ")"
          | "h" | "refl" | "pl[" plbody "]" | "lift[" plbody "]" | "inv(" map ")"
          | "ext(" num "," map ")" | "diag[" (num ":" num ";")+ "](" map ")"
          | "(" map ")"
    plbody := (num ":" num ";")+ "slopes(" num "," num ")"

Numbers are integers, decimals (with an optional exponent) or rationals "p/q".
Integers and rationals stay exact; decimals become floats.
"""

import logging
import math
import re
from fractions import Fraction

from models.map_expr import (
    Identity, Affine, PowerShift, LogShift, LogPowerShift, ExpGlue, Reflect,
    RationalPLRef, PeriodicLift, Extend, DiagonalConjugate, Inverse, compose_all,
)
from models.rational_pl import RationalPL
from utils.errors import MapSyntaxError, InvariantViolation

logger = logging.getLogger(__name__)

NUMBER_PATTERN = re.compile(
    r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:/\d+)?"
)
NAME_PATTERN = re.compile(r"[A-Za-z_]+")


class MapParser:
    """Single-use parser over one source string."""

    def __init__(self, src):
        self.src = src
        self.pos = 0

    # -- low level ------------------------------------------------------

    def _skip_ws(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def _peek(self):
        self._skip_ws()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def _expect(self, literal):
        self._skip_ws()
        if not self.src.startswith(literal, self.pos):
            found = self.src[self.pos:self.pos + len(literal)] or "end of input"
            raise MapSyntaxError(f"expected {literal!r}, found {found!r}", self.pos)
        self.pos += len(literal)

    def _accept(self, literal):
        self._skip_ws()
        if self.src.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def _number(self):
        self._skip_ws()
        match = NUMBER_PATTERN.match(self.src, self.pos)
        if not match:
            raise MapSyntaxError("expected a number", self.pos)
        start = self.pos
        text = match.group(0)
        self.pos = match.end()
        if "/" in text:
            numerator, denominator = text.split("/")
            if not re.fullmatch(r"[+-]?\d+", numerator):
                raise MapSyntaxError("rational numerators must be integers", start)
            if int(denominator) == 0:
                raise MapSyntaxError("zero denominator", start)
            return Fraction(int(numerator), int(denominator))
        if any(ch in text for ch in ".eE"):
            return float(text)
        return Fraction(int(text))

    def _name(self):
        self._skip_ws()
        match = NAME_PATTERN.match(self.src, self.pos)
        if not match:
            return None
        self.pos = match.end()
        return match.group(0)

    # -- grammar ----------------------------------------------------------

    def parse(self):
        expr = self._map()
        self._skip_ws()
        if self.pos != len(self.src):
            raise MapSyntaxError(f"unexpected {self.src[self.pos]!r}", self.pos)
        return expr

    def _map(self):
        factors = [self._term()]
        while self._accept("*"):
            factors.append(self._term())
        return compose_all(factors)

    def _term(self):
        self._skip_ws()
        start = self.pos
        if self._accept("("):
            inner = self._map()
            self._expect(")")
            return inner

        name = self._name()
        if name is None:
            found = self.src[start] if start < len(self.src) else "end of input"
            raise MapSyntaxError(f"expected a map term, found {found!r}", start)

        if name == "id":
            return Identity()
        if name == "h":
            return ExpGlue()
        if name == "refl":
            return Reflect()
        if name == "A":
            (t,) = self._args(1)
            return Affine(t, Fraction(0))
        if name == "a":
            (t,) = self._args(1)
            if not t > 0:
                raise InvariantViolation("t must be > 0")
            return Affine(1, math.log(t))
        if name == "affine":
            a, b = self._args(2)
            return Affine(a, b)
        if name == "B":
            i, s = self._args(2)
            return PowerShift(i, s)
        if name == "b":
            i, s = self._args(2)
            return LogPowerShift(i, s)
        if name == "logshift":
            (s,) = self._args(1)
            return LogShift(s)
        if name == "pl":
            return RationalPLRef(self._pl_block())
        if name == "lift":
            return PeriodicLift(self._pl_block())
        if name == "inv":
            self._expect("(")
            inner = self._map()
            self._expect(")")
            return Inverse(inner)
        if name == "ext":
            self._expect("(")
            c = self._number()
            self._expect(",")
            inner = self._map()
            self._expect(")")
            return Extend(c, inner)
        if name == "diag":
            intervals = self._pairs("[", "]")
            self._expect("(")
            inner = self._map()
            self._expect(")")
            return DiagonalConjugate(inner, tuple(intervals))

        raise MapSyntaxError(f"unknown map term {name!r}", start)

    def _args(self, count):
        self._expect("(")
        values = [self._number()]
        for _ in range(count - 1):
            self._expect(",")
            values.append(self._number())
        self._expect(")")
        return values

    def _pairs(self, opening, closing):
        """One or more ``x:y;`` pairs after ``opening``; consumes ``closing``."""
        self._expect(opening)
        pairs = []
        while True:
            self._skip_ws()
            if self.src.startswith("slopes", self.pos) or self._peek() == closing:
                break
            x = self._number()
            self._expect(":")
            y = self._number()
            self._expect(";")
            pairs.append((x, y))
        if not pairs:
            raise MapSyntaxError("expected at least one x:y; pair", self.pos)
        if closing == "]" and self._peek() == "]":
            self._expect("]")
        return pairs

    def _pl_block(self):
        start = self.pos
        pairs = self._pairs("[", "slopes")
        self._expect("slopes")
        left, right = self._args(2)
        self._expect("]")
        for x, y in pairs:
            if isinstance(x, float) or isinstance(y, float):
                raise MapSyntaxError("PL breakpoints must be integers or rationals p/q", start)
        if isinstance(left, float) or isinstance(right, float):
            raise MapSyntaxError("PL slopes must be integers or rationals p/q", start)
        return RationalPL(tuple(pairs), left, right)


def parse_map(src):
    """
    Parse map DSL text into a MapExpr.

    Args:
        src (str): expression text, e.g. ``"A(2) * inv(B(1,1))"``

    Returns:
        MapExpr: the canonical (right-nested) expression tree

    Raises:
        MapSyntaxError: malformed text, with the 0-based column
        InvariantViolation: well-formed text naming an invalid map
    """
    if not isinstance(src, str):
        raise MapSyntaxError("map source must be text", 0)
    expr = MapParser(src).parse()
    logger.debug("Parsed %r as %s", src, expr)
    return expr
