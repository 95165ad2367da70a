import math
from fractions import Fraction

import pytest

from controllers.map_parser import parse_map
from models.map_expr import (
    Identity, Affine, PowerShift, LogShift, LogPowerShift, ExpGlue, Reflect, RationalPLRef,
    PeriodicLift, Extend, DiagonalConjugate, Compose, Inverse, canonical,
)
from models.rational_pl import RationalPL
from utils.errors import MapSyntaxError, InvariantViolation


def test_single_terms():
    assert parse_map("A(2)") == Affine(2, 0)
    assert parse_map("id") == Identity()
    assert parse_map("h") == ExpGlue()
    assert parse_map("refl") == Reflect()
    assert parse_map("B(1, 1)") == PowerShift(1, 1)
    assert parse_map("logshift(-1)") == LogShift(-1)
    assert parse_map("b(2,-1/2)") == LogPowerShift(2, Fraction(-1, 2))
    assert parse_map("affine(1/2, 7)") == Affine(Fraction(1, 2), 7)


def test_lowercase_a_is_a_translation_by_log_t():
    f = parse_map("a(2)")
    assert f.a == 1
    assert f.b == pytest.approx(math.log(2))


def test_composition_applies_right_factor_first():
    assert parse_map("A(2) * inv(B(1,1))") == Compose(Affine(2, 0), Inverse(PowerShift(1, 1)))


def test_grouping_is_flattened():
    assert parse_map("A(2) * (B(1,1) * A(3))") == parse_map("A(2) * B(1,1) * A(3)")


def test_numbers_keep_their_exactness():
    assert isinstance(parse_map("A(3/4)").a, Fraction)
    assert isinstance(parse_map("A(0.75)").a, float)
    assert parse_map("A(1e3)").a == 1000.0


def test_piecewise_linear_terms():
    f = parse_map("pl[0:0;1:2;slopes(1,1/2)]")
    assert f == RationalPLRef(RationalPL(((0, 0), (1, 2)), 1, Fraction(1, 2)))
    lift = parse_map("lift[0:0;1/2:3/4;1:1;slopes(1,1)]")
    assert isinstance(lift, PeriodicLift)
    assert lift.pl01.evaluate(Fraction(1, 2)) == Fraction(3, 4)


def test_extension_and_diagonal_terms():
    assert parse_map("ext(0, B(1,1))") == Extend(0, PowerShift(1, 1))
    f = parse_map("diag[2:3;0:1;](A(2))")
    assert f == DiagonalConjugate(Affine(2, 0), ((0, 1), (2, 3)))


@pytest.mark.parametrize("src", [
    "A(2) * inv(B(1,1))",
    "pl[0:0;1:2;slopes(1,1)]",
    "lift[0:1/4;1:5/4;slopes(1,1)]",
    "h * a(2) * inv(h)",
    "ext(0,B(1,1)) * affine(1,1) * inv(ext(0,B(1,1)))",
    "diag[0:1;](affine(1,1))",
    "logshift(0.5) * b(1,1)",
])
def test_printing_round_trips_through_the_parser(src):
    f = parse_map(src)
    assert parse_map(f.to_text()) == f
    assert canonical(f) == f


@pytest.mark.parametrize("src,position", [
    ("A(2", 3),
    ("A(2) +", 5),
    ("foo(1)", 0),
    ("", 0),
    ("B(1 1)", 4),
    ("A(1/0)", 2),
])
def test_syntax_errors_carry_the_position(src, position):
    with pytest.raises(MapSyntaxError) as info:
        parse_map(src)
    assert info.value.position == position


def test_pl_bodies_reject_decimals():
    with pytest.raises(MapSyntaxError):
        parse_map("pl[0:0.5;slopes(1,1)]")


@pytest.mark.parametrize("src,constraint", [
    ("B(0.5, 1)", "i must be ≥ 1"),
    ("A(0)", "a must be > 0"),
    ("a(-1)", "t must be > 0"),
    ("pl[0:0;1:0;slopes(1,1)]", "PL induced slopes must be positive"),
])
def test_invariant_violations_name_the_constraint(src, constraint):
    with pytest.raises(InvariantViolation) as info:
        parse_map(src)
    assert info.value.constraint == constraint


def test_lift_body_must_rise_by_one():
    with pytest.raises(InvariantViolation):
        parse_map("lift[0:0;1:2;slopes(1,1)]")


def test_reflection_only_composes_with_full_line_maps():
    with pytest.raises(InvariantViolation):
        parse_map("refl * B(1,1)")
