import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import product

import numpy as np

from controllers.homeo_controller import EvalSession, exact_eval
from models.action import (
    ActionSpec, TranslationNumber, SemiConjugacy, ObstructionReport, HolderCheck,
    LinearityResult, CANDIDATE_FAMILIES,
)
from models.map_expr import (
    Identity, Affine, DiagonalConjugate, Compose, Inverse, compose_all,
)
from utils.constants import KERNEL_TOLERANCE, LINEARITY_MIN_SAMPLES
from utils.errors import (
    PreconditionError, NotFullLineError, FixedPointEncountered, NonCommutingError,
    OrbitCollision, ConvergenceFailure, InexactExpression,
)

logger = logging.getLogger(__name__)

# A kernel word moving chart points by less than this acts trivially
KERNEL_WORD_TOLERANCE = 1e-3
# Offsets from x0 at which commutation is tested
COMMUTE_OFFSETS = tuple(range(-5, 6))
# Step used to read off the local affine piece of a PL map
EXACT_PIECE_STEP = Fraction(1, 2 ** 40)

# Parameter samples of the relation checks in candidate actions
CONJ_T_SAMPLES = (2, 4)
B_S_SAMPLES = (1, -1)
B_S_PAIRS = ((1, 2), (-1, 3))
A_T_PAIRS = ((2, 3), (0.5, 4))


def factor_list(f):
    """Flattened factors of f with inverses pushed down to the atoms."""
    if isinstance(f, Compose):
        return factor_list(f.left) + factor_list(f.right)
    if isinstance(f, Inverse):
        inner = f.inner
        if isinstance(inner, Inverse):
            return factor_list(inner.inner)
        if isinstance(inner, Compose):
            return [_invert_atom(g) for g in reversed(factor_list(inner))]
        return [f]
    if isinstance(f, Identity):
        return []
    return [f]


def _invert_atom(f):
    return f.inner if isinstance(f, Inverse) else Inverse(f)


def reduce_factors(f):
    """f with every adjacent g, g⁻¹ pair cancelled; composites of conjugates collapse."""
    stack = []
    for g in factor_list(f):
        if stack and (stack[-1] == _invert_atom(g)):
            stack.pop()
        else:
            stack.append(g)
    return stack


def conjugation_parts(f):
    """(k, g) when f reduces to k∘g∘k⁻¹, else None."""
    factors = reduce_factors(f)
    if len(factors) >= 3 and factors[-1] == _invert_atom(factors[0]):
        return factors[0], compose_all(factors[1:-1])
    return None


def chart_pullback(f, interval):
    """
    The map that f induces in the chart coordinates of ``interval``.

    Raises:
        PreconditionError: f is not built from diagonal conjugates compatible with the interval
    """
    interval = tuple(interval)
    if isinstance(f, DiagonalConjugate):
        if interval in f.intervals:
            return f.inner
        a, b = interval
        if any(lo < b and a < hi for lo, hi in f.intervals):
            raise PreconditionError(f"{f} acts on an interval overlapping {interval}")
        return Identity()
    if isinstance(f, Identity):
        return f
    if isinstance(f, Compose):
        return Compose(chart_pullback(f.left, interval), chart_pullback(f.right, interval))
    if isinstance(f, Inverse):
        return Inverse(chart_pullback(f.inner, interval))
    raise PreconditionError(f"{f} has no chart form on {interval}")


def injectivity_obstruction(slope1, slope2):
    """
    Unit kernel vector (s, t) of (s, t) -> slope1*s + slope2*t.

    Args:
        slope1 (float): translation slope of the first summand
        slope2 (float): translation slope of the second summand

    Returns:
        tuple: (s, t) with |slope1*s + slope2*t| ≤ 1e-12
    """
    if slope1 == 0 or slope2 == 0:
        raise PreconditionError("injectivity obstruction needs nonzero slopes")
    norm = math.hypot(slope1, slope2)
    s, t = slope2 / norm, -slope1 / norm
    residual = abs(slope1 * s + slope2 * t)
    if residual > KERNEL_TOLERANCE:
        logger.warning("Kernel residual %r exceeds %r", residual, KERNEL_TOLERANCE)
    return s, t


def linearity_test(samples, tol):
    """Compare phi(q) with q*phi(1) on rational samples."""
    samples = [(Fraction(q), float(phi)) for q, phi in samples]
    if len(samples) < LINEARITY_MIN_SAMPLES:
        raise PreconditionError(f"linearity test needs at least {LINEARITY_MIN_SAMPLES} samples")
    slopes = [phi for q, phi in samples if q == 1]
    if not slopes:
        raise PreconditionError("linearity test needs the sample q = 1")
    slope = slopes[0]
    deviation = max(abs(phi - float(q) * slope) for q, phi in samples)
    return LinearityResult(bool(deviation <= tol), slope, deviation)


class ActionController:
    """
    Controller for group actions on the line.
    """
    def __init__(self, app):
        self.app = app

    @property
    def config(self):
        return self.app.config

    def _cfg(self, cfg):
        return cfg or self.app.eval_config

    # -- translation numbers ----------------------------------------------------

    def translation_number(self, f, x0, n, cfg=None, chart=None):
        """
        (f^n(x0) - x0)/n with the error estimate from the doubled orbit.

        Args:
            f (MapExpr): a full-line increasing map
            x0 (float): orbit start; a chart coordinate when ``chart`` is given
            n (int): number of iterations
            chart: optional (DiagonalEmbedding, index) selecting chart coordinates

        Raises:
            FixedPointEncountered: the orbit stalls within absTol
        """
        if int(n) != n or n < 1:
            raise PreconditionError("iteration count must be a positive integer")
        n = int(n)
        chart_index = None
        if chart is not None:
            embedding, chart_index = chart
            f = chart_pullback(f, embedding.intervals[chart_index])
        if not f.full_line:
            raise NotFullLineError(f.to_text())
        cfg = self._cfg(cfg)
        session = EvalSession(cfg)

        # Orbits of k∘g∘k⁻¹ are k-images of g-orbits
        parts = conjugation_parts(f)
        if parts is not None:
            k, step = parts
            u = session.evaluate(Inverse(k), x0, strict=False)
            leave = lambda v: session.evaluate(k, v, strict=False)
        else:
            step, u = compose_all(reduce_factors(f)), x0
            leave = lambda v: v

        direction = 0
        x_n = None
        for m in range(1, 2 * n + 1):
            nxt = session.evaluate(step, u, strict=False)
            moved = nxt - u
            if abs(moved) <= cfg.abs_tol or (direction and moved * direction < 0):
                location = leave(u)
                logger.info("Orbit of %s stalls after %d steps at %r", f, m, location)
                raise FixedPointEncountered(location)
            direction = 1 if moved > 0 else -1
            u = nxt
            if m == n:
                x_n = leave(u)
        x_2n = leave(u)

        value = (x_n - x0) / n
        doubled = (x_2n - x0) / (2 * n)
        return TranslationNumber(float(value), n, float(abs(doubled - value)), x0, chart_index)

    def orbit(self, f, x0, steps, cfg=None):
        """(step, f^step(x0)) for step = 0 .. steps."""
        session = EvalSession(self._cfg(cfg))
        rows, x = [(0, x0)], x0
        for step in range(1, steps + 1):
            x = session.evaluate(f, x, strict=False)
            rows.append((step, x))
        return rows

    def check_commute(self, g, h, x0, cfg=None):
        session = EvalSession(self._cfg(cfg))
        for offset in COMMUTE_OFFSETS:
            x = x0 + offset
            gap = abs(session.difference(Compose(g, h), Compose(h, g), x, strict=False))
            if gap > self.config.commute_tolerance * max(1.0, abs(x)):
                raise NonCommutingError(f"{g} and {h} differ by {gap!r} at x={x!r}")

    def _taus(self, named_maps, x0, n, cfg):
        with ThreadPoolExecutor(max_workers=self.config.max_workers) as executor:
            results = list(executor.map(
                lambda item: self.translation_number(item[1], x0, n, cfg), named_maps
            ))
        return [(name, tau) for (name, _), tau in zip(named_maps, results)]

    def holder_homomorphism_check(self, g, h, x0, n, cfg=None):
        """τ(g∘h) against τ(g) + τ(h) for a commuting pair."""
        cfg = self._cfg(cfg)
        self.check_commute(g, h, x0, cfg)
        taus = self._taus([("g", g), ("h", h), ("gh", Compose(g, h))], x0, n, cfg)
        tau = {name: t.value for name, t in taus}
        residual = abs(tau["gh"] - tau["g"] - tau["h"])
        return HolderCheck(residual <= self.config.additivity_tolerance, residual, tuple(taus))

    # -- semi-conjugacy -----------------------------------------------------------

    def build_semi_conjugacy(self, act, x0, orbit_depth, cfg=None, n=None):
        """
        φ on the orbit of x0 with φ(w(x0)) = τ(w), interpolated monotonically.

        The residual samples φ(h(x)) - φ(x) - τ(h) at the inner orbit points and
        at the midpoints between neighbouring orbit points.
        """
        cfg = self._cfg(cfg)
        n = n or self.config.tau_iterations
        names = act.names
        for a, b in product(names, names):
            if a < b:
                self.check_commute(act.generator(a), act.generator(b), x0, cfg)
        taus = dict((name, t.value) for name, t in self._taus(list(act.generators), x0, n, cfg))

        session = EvalSession(cfg)
        orbit = []
        for vector in product(range(-orbit_depth, orbit_depth + 1), repeat=len(names)):
            if sum(abs(e) for e in vector) > orbit_depth:
                continue
            word = tuple((name, e) for name, e in zip(names, vector) if e)
            f = compose_all(reduce_factors(act.word_map(word)))
            x = float(session.evaluate(f, x0, strict=False))
            phi = sum(e * taus[name] for name, e in zip(names, vector))
            orbit.append((x, phi, word))
        orbit.sort(key=lambda item: item[0])

        for (xa, _, wa), (xb, _, wb) in zip(orbit, orbit[1:]):
            if xb - xa <= cfg.abs_tol:
                raise OrbitCollision(wa, wb, xa)

        xs = np.array([x for x, _, _ in orbit])
        phis = np.array([phi for _, phi, _ in orbit])
        monotone = np.maximum.accumulate(phis)
        if np.any(monotone != phis):
            logger.warning("Semi-conjugacy values reordered by up to %r",
                           float(np.max(monotone - phis)))
        semi = SemiConjugacy(tuple(zip(xs.tolist(), monotone.tolist())), 0.0)

        inner = [x for x, _, word in orbit if sum(abs(e) for _, e in word) < orbit_depth]
        samples = inner + ((xs[1:] + xs[:-1]) / 2).tolist()
        residual = 0.0
        for name, h in act.generators:
            for x in samples:
                y = float(session.evaluate(h, x, strict=False))
                if not xs[0] <= y <= xs[-1]:
                    continue
                residual = max(residual, abs(semi(y) - semi(x) - taus[name]))
        if residual > self.config.semiconjugacy_tolerance:
            logger.warning("Semi-conjugacy residual %r exceeds %r", residual,
                           self.config.semiconjugacy_tolerance)
        logger.debug("Semi-conjugacy residual %r over %d samples", residual, len(samples))
        return SemiConjugacy(semi.grid_points, residual, tuple(taus.items()))

    # -- linear algebra of the harness ----------------------------------------------------

    def linearity_test(self, samples, tol):
        return linearity_test(samples, tol)

    def injectivity_obstruction(self, slope1, slope2):
        return injectivity_obstruction(slope1, slope2)

    # -- affine obstruction ------------------------------------------------------------------

    def _functional_equation_values(self, ainv, points, cfg):
        """|Ainv(x+2) - Ainv(x) - 1| per point; exact when the map allows it."""
        try:
            return [abs(exact_eval(ainv, Fraction(x) + 2) - exact_eval(ainv, Fraction(x)) - 1)
                    for x in points]
        except InexactExpression:
            pass
        session = EvalSession(cfg)
        shifted = Compose(ainv, Affine(1, 2))
        return [abs(session.difference(shifted, ainv, x, strict=False) - 1) for x in points]

    def affine_functional_equation_residual(self, ainv, grid, cfg=None):
        """
        sup over the grid (and its mirror image) of |Ainv(x+2) - Ainv(x) - 1|.

        Returns:
            Fraction for maps with an exact evaluation, float otherwise
        """
        if not ainv.full_line:
            raise NotFullLineError(ainv.to_text())
        points = [x for x in grid.points() if isinstance(x, float)]
        points = points + [-x for x in points]
        return max(self._functional_equation_values(ainv, points, self._cfg(cfg)))

    def contraction_fixed_point(self, g, x0, cfg=None):
        """
        Iterate x <- g(x) from x0 until |g(x) - x| ≤ the fixed-point tolerance.

        Raises:
            PreconditionError: g(x+2) = g(x) + 1 fails near x0
            ConvergenceFailure: no convergence within the iteration budget
        """
        cfg = self._cfg(cfg)
        near = [x0 + k for k in COMMUTE_OFFSETS]
        residual = max(self._functional_equation_values(g, near, cfg))
        if residual > self.config.functional_equation_tolerance:
            raise PreconditionError(f"{g} does not satisfy g(x+2) = g(x) + 1 (residual {float(residual)!r})")
        session = EvalSession(cfg)
        x = x0
        for step in range(1, self.config.fixed_point_max_iter + 1):
            y = session.evaluate(g, x, strict=False)
            if abs(y - x) <= self.config.fixed_point_tolerance:
                logger.debug("Fixed point of %s after %d iterations", g, step)
                return float(y)
            x = y
        raise ConvergenceFailure(
            f"no fixed point of {g} within {self.config.fixed_point_max_iter} iterations"
        )

    def exact_fixed_point(self, g, x_approx):
        """Exact rational fixed point of a PL map on the affine piece around x_approx."""
        q = Fraction(x_approx)
        gq = exact_eval(g, q)
        step = EXACT_PIECE_STEP
        for _ in range(8):
            for side in (step, -step):
                m = (exact_eval(g, q + side) - gq) / side
                if m == 1:
                    continue
                candidate = (gq - m * q) / (1 - m)
                if exact_eval(g, candidate) == candidate:
                    return candidate
            step /= 2 ** 8
        raise ConvergenceFailure(f"no exact fixed point of {g} near {x_approx!r}")

    def affine_obstruction(self, ainv, grid, cfg=None):
        """Translations fail the functional equation; residual-0 maps contract to a fixed point."""
        cfg = self._cfg(cfg)
        residual = self.affine_functional_equation_residual(ainv, grid, cfg)
        parameters = (("map", ainv.to_text()),)
        residuals = (("functionalEquation", residual),)
        if residual > self.config.functional_equation_tolerance:
            return ObstructionReport(parameters, residuals, None, "functional equation fails")
        x_star = self.contraction_fixed_point(ainv, 0.0, cfg)
        details = {}
        try:
            details["exactFixedPoint"] = str(self.exact_fixed_point(ainv, x_star))
        except (InexactExpression, ConvergenceFailure):
            pass
        return ObstructionReport(parameters, residuals, x_star, "contracting with a fixed point", details)

    def fixed_point_branch_residuals(self, b1, a, n_values, scan, cfg=None):
        """
        Move the right end y of a component of the moved set of b1 by the
        conjugated maps F_n(x) = b1(x - a/n) + a/n; |F_n(y) - y| > 0 contradicts F_n(I) = I.

        Args:
            b1 (MapExpr): full-line map with fixed points
            a (float): translation length of A_2
            n_values: the roots n to test
            scan: (lo, hi, count) of the sampling used to locate the fixed set
        """
        cfg = self._cfg(cfg)
        if not b1.full_line:
            raise NotFullLineError(b1.to_text())
        lo, hi, count = scan
        session = EvalSession(cfg)
        xs = np.linspace(lo, hi, int(count)).tolist()
        fixed = [abs(session.displacement(b1, x, strict=False)) <= cfg.abs_tol for x in xs]

        component = None
        for k in range(len(xs)):
            if fixed[k]:
                continue
            right = next((j for j in range(k + 1, len(xs)) if fixed[j]), None)
            if right is None:
                break
            left = xs[k - 1] if k > 0 else -math.inf
            component = (left, xs[right])
            break
        if component is None:
            raise PreconditionError(f"no component of the moved set of {b1} ends inside the scan")

        x, y = component
        residuals, skipped = [], []
        for n in n_values:
            shift = a / n
            if not x < y - shift < y:
                skipped.append(n)
                continue
            moved = session.evaluate(b1, y - shift, strict=False) + shift
            residuals.append((f"n={n}", float(abs(moved - y))))
        contradiction = bool(residuals) and all(r > cfg.abs_tol for _, r in residuals)
        return ObstructionReport(
            (("a", a),),
            tuple(residuals),
            y,
            "fixed-point branch contradicted" if contradiction else "inconclusive",
            {"component": [x if math.isfinite(x) else None, y], "skipped": list(skipped)},
        )

    # -- diagonal embeddings -----------------------------------------------------------------

    def diagonal_embed(self, act, emb):
        """Every generator conjugated into the embedding's intervals."""
        return ActionSpec(
            tuple((name, emb.embed(f)) for name, f in act.generators),
            act.relations,
        )

    def relation_residuals(self, act, points, cfg=None):
        """sup over ``points`` of |lhs(x) - rhs(x)| for every relation of the action."""
        session = EvalSession(self._cfg(cfg))
        results = []
        for lhs, rhs in act.relations:
            f, g = act.word_map(lhs), act.word_map(rhs)
            results.append(max(abs(session.difference(f, g, x, strict=False)) for x in points))
        return results

    # -- violation harness -----------------------------------------------------------

    def _chart_samples(self, grid):
        points = [grid.point(k) for k in grid.first_decade()]
        return [-x for x in reversed(points)] + [0.0] + points

    def _chart_sup(self, family, lhs, rhs, samples, session):
        interval = family.embedding.intervals[0]
        f, g = chart_pullback(lhs, interval), chart_pullback(rhs, interval)
        return max(float(abs(session.difference(f, g, u, strict=False))) for u in samples)

    def _candidate_report(self, family, samples, cfg):
        session = EvalSession(cfg)
        A, B = family.A, family.B
        sup = lambda lhs, rhs: self._chart_sup(family, lhs, rhs, samples, session)
        residuals = {
            "conj": max(
                sup(Compose(A(t), Compose(B(i, s), Inverse(A(t)))), B(i, s * t ** (i / (i + 1))))
                for t, i, s in product(CONJ_T_SAMPLES, family.summands, B_S_SAMPLES)
            ),
            "addB": max(
                sup(Compose(B(i, s1), B(i, s2)), B(i, s1 + s2))
                for i, (s1, s2) in product(family.summands, B_S_PAIRS)
            ),
            "commB": max(
                sup(Compose(B(1, s1), B(2, s2)), Compose(B(2, s2), B(1, s1)))
                for s1, s2 in B_S_PAIRS
            ),
            "multA": max(sup(Compose(A(t1), A(t2)), A(t1 * t2)) for t1, t2 in A_T_PAIRS),
        }
        details = {"family": family.kind}
        if family.translating:
            chart = (family.embedding, 0)
            slopes = [self.translation_number(B(i, 1), 0.0, self.config.tau_iterations, cfg, chart).value
                      for i in family.summands]
            s, t = injectivity_obstruction(*slopes)
            kernel_sup = sup(Compose(B(1, s), B(2, t)), Identity())
            # (s, t) is a unit vector, so the kernel word is a nontrivial element
            residuals["injectivity"] = math.hypot(s, t) if kernel_sup <= KERNEL_WORD_TOLERANCE else 0.0
            details["kernel"] = {
                "s": s, "t": t, "slopes": slopes,
                "kernelResidual": abs(slopes[0] * s + slopes[1] * t),
                "wordDisplacement": kernel_sup,
            }
        report = ObstructionReport(family.parameters(), tuple(residuals.items()),
                                   family.fixed_point, "", details)
        violated = report.max_violation >= self.config.obstruction_tolerance
        conclusion = "violation" if violated else "consistent"
        return ObstructionReport(report.parameters, report.residuals, report.fixed_point_witness,
                                 conclusion, details)

    def relation_violation_scan(self, family, param_grid, grid=None, cfg=None):
        """
        Relation and injectivity residuals of a candidate family at each parameter point.

        Args:
            family: a CandidateFamily subclass or its name ("translation", "scaling")
            param_grid: iterable of (c1, c2, kappa)
            grid (SampleGrid): its first decade, mirrored, gives the chart sample points
        """
        cfg = self._cfg(cfg)
        if isinstance(family, str):
            if family not in CANDIDATE_FAMILIES:
                raise PreconditionError(f"unknown candidate family {family!r}")
            family = CANDIDATE_FAMILIES[family]
        if not hasattr(family, "summands") or len(set(family.summands)) < 2:
            raise PreconditionError("candidate family needs two distinct summands")
        params = [tuple(p) for p in param_grid]
        if not params:
            return []
        grid = grid or self.app.metrics_controller.default_grid()
        samples = self._chart_samples(grid)
        logger.info("Scanning %d parameter points of the %s family", len(params), family.kind)
        with ThreadPoolExecutor(max_workers=self.config.max_workers) as executor:
            return list(executor.map(
                lambda p: self._candidate_report(family(*p), samples, cfg), params
            ))

    def scan_conclusion(self, reports):
        tolerance = self.config.obstruction_tolerance
        if reports and all(r.max_violation >= tolerance for r in reports):
            return f"no candidate satisfies all constraints below {tolerance:g}"
        return "some candidate satisfies all constraints"
