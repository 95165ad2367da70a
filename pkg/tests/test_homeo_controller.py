import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from controllers.homeo_controller import EvalSession, germ_domain, exact_eval, as_rational_pl
from models.map_expr import (
    Identity, Affine, PowerShift, LogShift, ExpGlue, RationalPLRef, PeriodicLift, Extend,
    Compose, Inverse,
)
from models.rational_pl import RationalPL
from utils.config_manager import EvalConfig
from utils.errors import DomainViolation, NotFullLineError, InexactExpression
from utils.precision import is_mp

LIFT = PeriodicLift(RationalPL(((0, 0), (Fraction(1, 2), Fraction(3, 4)), (1, 1)), 1, 1))

MONOTONE_SAMPLE = [
    Affine(3, 1),
    PowerShift(1, 1),
    PowerShift(2, -3),
    LogShift(-1),
    Inverse(PowerShift(1, 1)),
    Compose(PowerShift(1, 2), Inverse(LogShift(1))),
    Compose(ExpGlue(), Compose(LIFT, Inverse(ExpGlue()))),
]


def test_evaluation_examples(homeo):
    assert homeo.eval(Affine(2, 0), 3) == 6
    assert homeo.eval(PowerShift(1, 1), 4) == 6
    assert homeo.eval(Inverse(Affine(2, 0)), 6) == 3
    assert homeo.eval(ExpGlue(), 0.5) == pytest.approx(1.35914091422952, rel=1e-12)
    assert homeo.eval(ExpGlue(), -2.0) == pytest.approx(-math.exp(2.0))


def test_germ_domain_examples():
    assert germ_domain(Identity()).full_line
    assert germ_domain(Identity()).x0 == 0
    assert germ_domain(PowerShift(1, 1)).x0 == 0
    assert not germ_domain(PowerShift(1, 1)).full_line
    assert germ_domain(PowerShift(1, -4)).x0 == pytest.approx(8.0)


def test_germ_domain_of_composite_is_pulled_back():
    f = Compose(PowerShift(1, -4), Affine(2, 0))
    assert germ_domain(f).x0 == pytest.approx(4.0)
    assert not germ_domain(f).full_line


def test_evaluation_below_the_germ_domain_is_rejected(homeo):
    with pytest.raises(DomainViolation):
        homeo.eval(PowerShift(1, -4), 2.0)
    # the formula itself is still defined there
    assert homeo.eval(PowerShift(1, -4), 4.0, strict=False) == pytest.approx(-4.0)


def test_derivative_estimates(homeo):
    assert homeo.derivative_est(Affine(3, 1), 10, 1e-4) == pytest.approx(3, abs=1e-9)
    assert homeo.derivative_est(PowerShift(1, 1), 4, 1e-4) == pytest.approx(1.25, abs=1e-6)
    assert homeo.derivative_est(Identity(), 123.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        homeo.derivative_est(Identity(), 1.0, 0.0)


@seed(11)
@settings(max_examples=200, deadline=None)
@given(
    index=st.integers(0, len(MONOTONE_SAMPLE) - 1),
    x=st.floats(min_value=10.0, max_value=1e6),
    gap=st.floats(min_value=1e-3, max_value=1e3),
)
def test_evaluation_is_strictly_increasing(index, x, gap):
    f = MONOTONE_SAMPLE[index]
    session = EvalSession()
    assert session.evaluate(f, x) < session.evaluate(f, x + gap)


@seed(12)
@settings(max_examples=100, deadline=None)
@given(index=st.integers(0, len(MONOTONE_SAMPLE) - 1), y=st.floats(min_value=100.0, max_value=1e6))
def test_inverse_round_trip(index, y):
    f = MONOTONE_SAMPLE[index]
    session = EvalSession()
    x = session.evaluate(Inverse(f), y, strict=False)
    assert abs(session.evaluate(f, x, strict=False) - y) <= 10 * session.cfg.abs_tol * max(1.0, abs(y))


def test_association_does_not_change_values():
    f, g, h = PowerShift(1, 1), LogShift(2), Affine(Fraction(1, 2), 3)
    session = EvalSession()
    for x in (10.0, 1e3, 1e6):
        left = session.evaluate(Compose(Compose(f, g), h), x)
        right = session.evaluate(Compose(f, Compose(g, h)), x)
        assert left == pytest.approx(right, abs=10 * session.cfg.abs_tol * max(1.0, abs(left)))


def test_pl_evaluation_agrees_with_exact_arithmetic():
    pl = RationalPL(((0, 1), (Fraction(3, 2), 4), (5, 5)), Fraction(1, 3), 2)
    f = RationalPLRef(pl)
    session = EvalSession()
    for q in (Fraction(-7, 3), Fraction(1, 2), Fraction(9, 4), Fraction(11)):
        assert session.evaluate(f, float(q)) == pytest.approx(float(pl.evaluate(q)), abs=1e-12)
        assert exact_eval(f, q) == pl.evaluate(q)


def test_exact_path_covers_lifts_and_inverses():
    assert exact_eval(LIFT, Fraction(5, 2)) == Fraction(11, 4)
    assert exact_eval(Inverse(LIFT), Fraction(11, 4)) == Fraction(5, 2)
    assert as_rational_pl(Compose(Affine(2, 1), Inverse(Affine(2, 1)))) == RationalPL.identity()
    with pytest.raises(InexactExpression):
        exact_eval(PowerShift(1, 1), 4)


def test_large_arguments_switch_to_extended_precision():
    session = EvalSession()
    # f(x) - x = sqrt(x) must survive the cancellation at x = 10^12
    assert session.displacement(PowerShift(1, 1), 1e12) == pytest.approx(1e6, abs=1e-6)
    gap = session.difference(Compose(PowerShift(1, 1), PowerShift(1, 2)), PowerShift(1, 3), 1e12)
    assert abs(gap) <= 2


def test_float_overflow_falls_back_to_mpmath():
    value = EvalSession().evaluate(ExpGlue(), 800.0)
    assert is_mp(value)
    assert float(mpmath.log(value)) == pytest.approx(800.0)


def test_precision_bits_force_extended_arithmetic():
    cfg = EvalConfig(precision_bits=128)
    value = EvalSession(cfg).displacement(LogShift(1), math.e - 1)
    assert float(value) == pytest.approx(1.0, abs=1e-15)


def test_concurrent_evaluation_is_consistent():
    f = Compose(PowerShift(1, 1), Inverse(LogShift(2)))
    xs = [10.0 * k for k in range(1, 65)]
    expected = [EvalSession().evaluate(f, x) for x in xs]
    with ThreadPoolExecutor(max_workers=8) as executor:
        values = list(executor.map(lambda x: EvalSession().evaluate(f, x), xs))
    assert values == expected


def test_normalize_origin(homeo, metrics, float_grid):
    assert homeo.normalize_origin(Affine(2, 5)) == Affine(2, 0)
    assert homeo.normalize_origin(Identity()) == Identity()
    pl = RationalPLRef(RationalPL(((0, 3), (1, 5)), 1, 1))
    assert homeo.normalize_origin(pl) == RationalPLRef(RationalPL(((0, 0), (1, 2)), 1, 1))

    f = Extend(0, PowerShift(1, 1))
    g = Compose(Affine(1, 2), f)
    normalized = homeo.normalize_origin(g)
    assert homeo.eval(normalized, 0.0) == 0
    verdict = metrics.numeric_distance(g, normalized, float_grid)
    assert verdict.bounded and verdict.M <= 2 + 1e-6


def test_normalize_origin_needs_a_full_line_map(homeo):
    with pytest.raises(NotFullLineError):
        homeo.normalize_origin(PowerShift(1, 1))


def test_reflect_conjugate_examples(homeo):
    assert homeo.reflect_conjugate(Identity()) == Identity()
    assert homeo.reflect_conjugate(Affine(2, 0)) == Affine(2, 0)
    assert homeo.reflect_conjugate(Affine(1, 5)) == Affine(1, -5)
    assert homeo.reflect_conjugate(homeo.reflect_conjugate(LIFT)) == LIFT


def test_reflect_conjugate_is_pointwise_t_f_t(homeo):
    f = Compose(ExpGlue(), Extend(0, PowerShift(1, 1)))
    g = homeo.reflect_conjugate(f)
    twice = homeo.reflect_conjugate(g)
    for x in (-3.0, -0.5, 0.0, 0.7, 2.0):
        assert homeo.eval(g, x) == pytest.approx(-homeo.eval(f, -x))
        assert homeo.eval(twice, x) == pytest.approx(homeo.eval(f, x))
    with pytest.raises(NotFullLineError):
        homeo.reflect_conjugate(LogShift(1))


def test_pl_group_operations_are_exact(homeo):
    f = RationalPL(((0, 0), (1, 2)), Fraction(1, 2), 3)
    g = RationalPL(((Fraction(-1, 3), 1),), 2, Fraction(1, 5))
    identity = RationalPL.identity()
    assert homeo.pl_compose(f, homeo.pl_invert(f)).canonical() == identity
    assert homeo.pl_compose(homeo.pl_invert(g), g).canonical() == identity
    fg = homeo.pl_compose(f, g)
    for q in (Fraction(-7), Fraction(-1, 3), Fraction(0), Fraction(5, 2)):
        assert fg.evaluate(q) == f.evaluate(g.evaluate(q))
