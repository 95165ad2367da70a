import math
from fractions import Fraction

import pytest

from controllers.action_controller import (
    chart_pullback, conjugation_parts, reduce_factors, injectivity_obstruction, linearity_test,
)
from models.action import (
    ActionSpec, DiagonalEmbedding, LogisticChart, TranslationFamily, ScalingFamily,
)
from models.map_expr import (
    Identity, Affine, PowerShift, LogShift, RationalPLRef, PeriodicLift, Extend,
    DiagonalConjugate, Compose, Inverse,
)
from models.rational_pl import RationalPL
from utils.errors import (
    PreconditionError, NotFullLineError, FixedPointEncountered, NonCommutingError,
    OrbitCollision, InvariantViolation, OverlappingIntervals,
)

STEP = Affine(1, 1)
ROOT_TWO_STEP = Affine(1, math.sqrt(2))
B_EXT = Extend(0, PowerShift(1, 1))
LOG_EXT = Extend(0, LogShift(2))
BENT = PeriodicLift(RationalPL(((0, 0), (Fraction(1, 2), Fraction(3, 4)), (1, 1)), 1, 1))
UNIT = DiagonalEmbedding(((0.0, 1.0),))


def conjugate(k, f):
    return Compose(k, Compose(f, Inverse(k)))


def test_translation_number_of_a_unit_step(actions):
    tau = actions.translation_number(STEP, 0.0, 10 ** 4)
    assert tau.value == pytest.approx(1.0, abs=1e-9)
    assert tau.error_estimate <= 1e-9
    assert tau.iterations == 10 ** 4


def test_translation_number_of_a_logarithmic_translation(actions):
    tau = actions.translation_number(Affine(1, math.log(2)), 0.0, 1000)
    assert tau.value == pytest.approx(0.6931471805599453, abs=1e-9)


def test_translation_number_is_conjugation_invariant(actions):
    tau = actions.translation_number(conjugate(LOG_EXT, STEP), 0.0, 10 ** 5)
    assert abs(tau.value - 1.0) <= 1e-3
    # the square-root distortion decays like 1/(2 sqrt(x)), so start far out
    tau = actions.translation_number(conjugate(B_EXT, STEP), 1e7, 10 ** 5)
    assert abs(tau.value - 1.0) <= 1e-3


def test_conjugates_are_recognized():
    f = Compose(conjugate(B_EXT, STEP), conjugate(B_EXT, ROOT_TWO_STEP))
    assert reduce_factors(f) == [B_EXT, STEP, ROOT_TWO_STEP, Inverse(B_EXT)]
    k, g = conjugation_parts(f)
    assert k == B_EXT
    assert g == Compose(STEP, ROOT_TWO_STEP)
    assert conjugation_parts(STEP) is None


def test_translation_number_reports_fixed_points(actions):
    with pytest.raises(FixedPointEncountered) as info:
        actions.translation_number(Identity(), 3.0, 10)
    assert info.value.location == 3.0
    with pytest.raises(FixedPointEncountered) as info:
        actions.translation_number(Affine(Fraction(1, 2), 0), 1.0, 100)
    assert info.value.location == pytest.approx(0.0, abs=1e-9)


def test_translation_number_preconditions(actions):
    with pytest.raises(NotFullLineError):
        actions.translation_number(PowerShift(1, 1), 1.0, 10)
    with pytest.raises(PreconditionError):
        actions.translation_number(STEP, 0.0, 0)


def test_orbit_rows(actions):
    assert actions.orbit(STEP, 0.0, 3) == [(0, 0.0), (1, 1.0), (2, 2.0), (3, 3.0)]


def test_translations_are_additive(actions):
    check = actions.holder_homomorphism_check(STEP, ROOT_TWO_STEP, 0.0, 10 ** 4)
    assert check.additive
    assert check.residual <= 1e-9
    twice = actions.holder_homomorphism_check(STEP, STEP, 0.0, 10 ** 4)
    assert dict(twice.taus)["gh"].value == pytest.approx(2.0)


def test_conjugated_translations_are_additive(actions):
    g, h = conjugate(B_EXT, STEP), conjugate(B_EXT, ROOT_TWO_STEP)
    check = actions.holder_homomorphism_check(g, h, 1e7, 10 ** 4)
    assert check.additive
    assert check.residual <= 1e-3


def test_non_commuting_maps_are_rejected(actions):
    with pytest.raises(NonCommutingError):
        actions.check_commute(Affine(2, 0), STEP, 0.0)
    with pytest.raises(NonCommutingError):
        actions.holder_homomorphism_check(Affine(2, 0), STEP, 0.0, 100)


def test_semi_conjugacy_of_the_integers(actions):
    act = ActionSpec((("g", STEP),))
    semi = actions.build_semi_conjugacy(act, 0.0, 5, n=1000)
    assert semi.grid_points == tuple((float(k), float(k)) for k in range(-5, 6))
    assert semi.residual <= 1e-9
    assert semi(2.5) == pytest.approx(2.5)


def test_semi_conjugacy_of_two_translations(actions):
    act = ActionSpec((("g", STEP), ("h", ROOT_TWO_STEP)))
    semi = actions.build_semi_conjugacy(act, 0.0, 4, n=1000)
    assert semi.residual <= 1e-3
    for x, phi in semi.grid_points:
        assert phi == pytest.approx(x, abs=1e-6)
    values = [phi for _, phi in semi.grid_points]
    assert values == sorted(values)


def test_semi_conjugacy_undoes_a_conjugation(actions, homeo):
    x0 = 1e7
    act = ActionSpec((("g", conjugate(B_EXT, STEP)),))
    semi = actions.build_semi_conjugacy(act, x0, 5, n=10 ** 4)
    assert semi.residual <= 1e-2
    base = homeo.eval(Inverse(B_EXT), x0)
    assert len(semi.grid_points) == 11
    for x, phi in semi.grid_points:
        assert phi == pytest.approx(homeo.eval(Inverse(B_EXT), x) - base, abs=1e-3)


def test_semi_conjugacy_of_two_conjugated_translations(actions):
    act = ActionSpec((("g", conjugate(B_EXT, STEP)), ("h", conjugate(B_EXT, ROOT_TWO_STEP))))
    semi = actions.build_semi_conjugacy(act, 1e7, 8, n=10 ** 4)
    assert semi.residual <= 1e-2
    assert len(semi.grid_points) == 145
    xs = [x for x, _ in semi.grid_points]
    values = [phi for _, phi in semi.grid_points]
    assert xs == sorted(xs)
    # a + b sqrt(2) never repeats on the orbit, so φ increases strictly
    assert all(a < b for a, b in zip(values, values[1:]))
    assert dict(semi.taus)["h"] == pytest.approx(math.sqrt(2), abs=1e-3)


def test_colliding_orbits_are_reported(actions):
    act = ActionSpec((("g", STEP), ("h", Affine(1, 2))))
    with pytest.raises(OrbitCollision):
        actions.build_semi_conjugacy(act, 0.0, 2, n=100)


def test_linearity_examples(actions):
    qs = [Fraction(k, 4) for k in range(-8, 9) if k]
    linear = actions.linearity_test([(q, 3 * q) for q in qs], 1e-9)
    assert linear.linear
    assert linear.slope == 3
    jump = [(q, float(q) + 0.5 * (1 if q > 2 else -1)) for q in qs]
    assert not linearity_test(jump, 1e-3).linear


def test_linearity_of_translation_numbers(actions):
    samples = []
    for m in range(1, 11):
        f = STEP
        for _ in range(m - 1):
            f = Compose(STEP, f)
        samples.append((m, actions.translation_number(f, 0.0, 100).value))
    result = linearity_test(samples, 1e-9)
    assert result.linear
    assert result.slope == pytest.approx(1.0)


def test_linearity_preconditions():
    with pytest.raises(PreconditionError):
        linearity_test([(Fraction(k), k) for k in range(1, 5)], 1e-9)
    with pytest.raises(PreconditionError):
        linearity_test([(Fraction(k), k) for k in range(2, 20)], 1e-9)


@pytest.mark.parametrize("slopes,expected", [
    ((1, 1), (math.sqrt(2) / 2, -math.sqrt(2) / 2)),
    ((2, 3), (3 / math.sqrt(13), -2 / math.sqrt(13))),
    ((math.log(2), math.log(3)), (math.log(3) / math.hypot(math.log(2), math.log(3)),
                                  -math.log(2) / math.hypot(math.log(2), math.log(3)))),
])
def test_injectivity_obstruction_is_a_unit_kernel_vector(slopes, expected):
    s, t = injectivity_obstruction(*slopes)
    assert (s, t) == pytest.approx(expected)
    assert abs(slopes[0] * s + slopes[1] * t) <= 1e-12
    assert math.hypot(s, t) == pytest.approx(1.0)


def test_injectivity_obstruction_needs_nonzero_slopes(actions):
    with pytest.raises(PreconditionError):
        actions.injectivity_obstruction(0, 1)


def test_functional_equation_residuals(actions, grid):
    assert actions.affine_functional_equation_residual(Affine(1, -3), grid) == 1
    assert actions.affine_functional_equation_residual(Affine(Fraction(1, 2), 0), grid) == 0
    assert actions.affine_functional_equation_residual(Affine(Fraction(1, 2), 7), grid) == 0
    with pytest.raises(NotFullLineError):
        actions.affine_functional_equation_residual(PowerShift(1, 1), grid)


@pytest.mark.parametrize("b", [Fraction(-3), Fraction(5, 7), Fraction(-11, 2)])
def test_translations_fail_the_functional_equation_exactly(actions, grid, b):
    residual = actions.affine_functional_equation_residual(Affine(1, b), grid)
    assert isinstance(residual, Fraction)
    assert residual == 1


def test_contraction_fixed_points(actions):
    assert actions.contraction_fixed_point(Affine(Fraction(1, 2), 0), 1.0) == pytest.approx(0.0, abs=1e-8)
    assert actions.contraction_fixed_point(Affine(Fraction(1, 2), 1), 0.0) == pytest.approx(2.0, abs=1e-8)
    with pytest.raises(PreconditionError):
        actions.contraction_fixed_point(Affine(1, -3), 0.0)


def test_piecewise_contraction_has_an_exact_fixed_point(actions, grid):
    # x -> bent(x + 1/2)/2 satisfies g(x+2) = g(x) + 1
    g = Compose(Affine(Fraction(1, 2), 0), Compose(BENT, Affine(1, Fraction(1, 2))))
    x_star = actions.contraction_fixed_point(g, 0.0)
    assert x_star == pytest.approx(0.5, abs=1e-8)
    assert actions.exact_fixed_point(g, x_star) == Fraction(1, 2)

    report = actions.affine_obstruction(g, grid)
    assert report.residual("functionalEquation") == 0
    assert report.fixed_point_witness == pytest.approx(0.5, abs=1e-8)
    assert report.details["exactFixedPoint"] == "1/2"


def test_exact_fixed_point_of_a_pl_map(actions):
    g = RationalPLRef(RationalPL(((0, Fraction(1, 3)),), Fraction(1, 2), Fraction(1, 2)))
    assert actions.exact_fixed_point(g, 0.6666) == Fraction(2, 3)


def test_translation_obstruction_report(actions, grid):
    report = actions.affine_obstruction(Affine(1, -3), grid)
    assert report.conclusion == "functional equation fails"
    assert report.fixed_point_witness is None
    assert report.max_violation == 1


def test_fixed_point_branch_is_contradicted(actions):
    b1 = RationalPLRef(RationalPL(((0, 0), (Fraction(1, 2), Fraction(3, 4)), (1, 1)), 1, 1))
    report = actions.fixed_point_branch_residuals(b1, 1.0, (2, 3, 4), (-2.0, 3.0, 501))
    assert report.conclusion == "fixed-point branch contradicted"
    assert report.fixed_point_witness == pytest.approx(1.0)
    assert dict(report.residuals) == pytest.approx({"n=2": 0.25, "n=3": 1 / 6, "n=4": 0.125})


def test_fixed_point_branch_preconditions(actions):
    with pytest.raises(PreconditionError):
        actions.fixed_point_branch_residuals(Identity(), 1.0, (2,), (-2.0, 3.0, 101))
    with pytest.raises(NotFullLineError):
        actions.fixed_point_branch_residuals(PowerShift(1, 1), 1.0, (2,), (0.0, 3.0, 101))


def test_logistic_chart_round_trip():
    chart = LogisticChart(2.0, 3.0)
    for u in (-5.0, -1.0, 0.0, 0.5, 5.0):
        assert chart.inverse(chart(u)) == pytest.approx(u, abs=1e-9)
    assert chart(0.0) == 2.5
    with pytest.raises(PreconditionError):
        chart.inverse(3.0)


def test_embedding_fixes_the_complement(actions, homeo):
    act = actions.diagonal_embed(ActionSpec((("g", STEP),)), UNIT)
    g = act.generator("g")
    assert g == DiagonalConjugate(STEP, ((0.0, 1.0),))
    for x in (-1.0, 0.0, 1.0, 2.5):
        assert homeo.eval(g, x) == x
    assert homeo.eval(g, 0.5) == pytest.approx(1 / (1 + math.exp(-1)))


def test_maps_on_disjoint_intervals_commute(actions):
    left = DiagonalEmbedding(((0.0, 1.0),)).embed(STEP)
    right = DiagonalEmbedding(((2.0, 3.0),)).embed(Affine(2, 0))
    actions.check_commute(left, right, 0.5)
    both = DiagonalEmbedding(((0.0, 1.0), (2.0, 3.0)))
    assert both.intervals == ((0.0, 1.0), (2.0, 3.0))
    with pytest.raises(OverlappingIntervals):
        DiagonalEmbedding(((0.0, 1.0), (0.5, 2.0)))


def test_translation_number_in_chart_coordinates(actions):
    g = UNIT.embed(STEP)
    tau = actions.translation_number(g, 0.0, 1000, chart=(UNIT, 0))
    assert tau.value == pytest.approx(1.0, abs=1e-3)
    assert tau.chart == 0
    assert chart_pullback(Compose(g, Inverse(g)), (0.0, 1.0)) == Compose(STEP, Inverse(STEP))
    with pytest.raises(PreconditionError):
        chart_pullback(PowerShift(1, 1), (0.0, 1.0))


def test_embedding_preserves_relations(actions, app):
    act = ActionSpec((("g", STEP), ("h", Affine(1, 2))), ((("g", 2),), (("h", 1),)))
    points = [-1.0, 0.1, 0.25, 0.5, 0.75, 0.9, 2.0]
    assert actions.relation_residuals(act, points) == [0.0]
    embedded = actions.diagonal_embed(act, UNIT)
    assert embedded.relations == act.relations
    assert actions.relation_residuals(embedded, points)[0] <= 10 * app.eval_config.abs_tol


def test_action_spec_invariants():
    with pytest.raises(InvariantViolation):
        ActionSpec((("g", PowerShift(1, 1)),))
    with pytest.raises(InvariantViolation):
        ActionSpec((("g", STEP), ("g", STEP)))
    with pytest.raises(InvariantViolation):
        ActionSpec((("g", STEP),), ((("k", 1),), ()))


def test_translation_candidates_violate_injectivity(actions):
    reports = actions.relation_violation_scan("translation", [(1.0, 2.0, 1.0)])
    assert len(reports) == 1
    report = reports[0]
    assert report.conclusion == "violation"
    assert report.residual("injectivity") == pytest.approx(1.0)
    assert report.details["kernel"]["wordDisplacement"] <= 1e-3
    assert report.details["kernel"]["slopes"] == pytest.approx([1.0, 2.0], abs=1e-3)


def test_scaling_candidates_violate_the_conjugation_relation(actions):
    reports = actions.relation_violation_scan(ScalingFamily, [(1.0, 2.0, 1.0), (-1.0, 0.5, 2.0)])
    assert [r.conclusion for r in reports] == ["violation", "violation"]
    assert all(r.residual("conj") >= 0.1 for r in reports)
    assert reports[0].fixed_point_witness == 0.5
    assert actions.scan_conclusion(reports) == "no candidate satisfies all constraints below 0.01"


def test_violation_scan_edge_cases(actions):
    assert actions.relation_violation_scan(TranslationFamily, []) == []
    with pytest.raises(PreconditionError):
        actions.relation_violation_scan("rotation", [(1.0, 1.0, 1.0)])
    with pytest.raises(PreconditionError):
        TranslationFamily(0.0, 1.0, 1.0)
    assert actions.scan_conclusion([]) == "some candidate satisfies all constraints"
