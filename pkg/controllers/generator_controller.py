import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import product

import numpy as np

from controllers.homeo_controller import EvalSession, germ_domain
from controllers.metrics_controller import loglog_slope
from models.generator import (
    GeneratorSpec, WordSpec, RelationReport, IndependenceResult, DiffzEscape,
)
from models.map_expr import (
    Affine, PowerShift, LogPowerShift, ExpGlue, PeriodicLift, Extend, Compose, Inverse,
    compose_all,
)
from models.verdicts import Sublinear
from utils.constants import (
    RELATION_IDS, CERTIFY_T_VALUES, CERTIFY_I_VALUES, CERTIFY_S_VALUES,
)
from utils.errors import PreconditionError, InvariantViolation
from utils.precision import log_abs

logger = logging.getLogger(__name__)

# Collected coefficients below this are zero
COEFFICIENT_EPSILON = 1e-12


def realize(g):
    """MapExpr of a generator spec."""
    if g.kind == "A":
        return Affine(g.t, Fraction(0))
    if g.kind == "B":
        return PowerShift(g.i, g.s)
    if g.kind == "a":
        return Affine(1, math.log(g.t))
    if g.kind == "b":
        return LogPowerShift(g.i, g.s)
    return h_conjugate(realize(g.inner))


def h_conjugate(f):
    """h∘f∘h⁻¹ with h the exponential glue map."""
    return Compose(ExpGlue(), Compose(f, Inverse(ExpGlue())))


def realize_full_line(g):
    """
    Full-line version of a logarithmic model: the model on [c, +inf) glued to
    a translation on the left, c = max(0, germ threshold).
    """
    f = realize(g)
    domain = germ_domain(f)
    c = 0 if domain.full_line else max(0.0, domain.x0)
    return Extend(c, f)


def _power(t, n):
    return Fraction(t) ** n if isinstance(t, (int, Fraction)) else float(t) ** n


def word_realize(word):
    """Compose the letters in order; integer powers, negative ones through Inverse."""
    factors = []
    for gen, n in word.letters:
        if gen.kind == "A":
            scaled = Affine(_power(gen.t, abs(n)), Fraction(0))
            factors.append(Inverse(scaled) if n < 0 else scaled)
            continue
        m = realize(gen)
        factor = Inverse(m) if n < 0 else m
        factors.extend([factor] * abs(n))
    return compose_all(factors)


class _RelationParams(dict):
    """Relation parameters; a missing name is a usage error."""
    def __init__(self, relation_id, params):
        super().__init__(params)
        self.relation_id = relation_id

    def __missing__(self, name):
        raise InvariantViolation(f"relation {self.relation_id} needs the parameter {name!r}")


def relation_maps(relation_id, params):
    """(lhs, rhs, bound) of one relation; bound is "exact" for identities."""
    p = _RelationParams(relation_id, params)
    if relation_id == "conj":
        t, i, s = p["t"], p["i"], p["s"]
        a = Affine(t, Fraction(0))
        lhs = Compose(a, Compose(PowerShift(i, s), Inverse(a)))
        rhs = PowerShift(i, float(s) * float(t) ** (float(i) / (float(i) + 1)))
        return lhs, rhs, "exact"
    if relation_id == "addB":
        i, s1, s2 = p["i"], p["s1"], p["s2"]
        lhs = Compose(PowerShift(i, s1), PowerShift(i, s2))
        return lhs, PowerShift(i, s1 + s2), abs(s1 * s2)
    if relation_id == "commB":
        i, j, s1, s2 = p["i"], p["j"], p["s1"], p["s2"]
        lhs = Compose(PowerShift(i, s1), PowerShift(j, s2))
        rhs = Compose(PowerShift(j, s2), PowerShift(i, s1))
        return lhs, rhs, 2 * abs(s1 * s2)
    if relation_id == "multA":
        t1, t2 = p["t1"], p["t2"]
        return Compose(Affine(t1, Fraction(0)), Affine(t2, Fraction(0))), Affine(t1 * t2, Fraction(0)), "exact"
    raise InvariantViolation(f"unknown relation {relation_id!r}; expected one of {', '.join(RELATION_IDS)}")


def certification_parameters():
    """The full certification grid, in report order."""
    ts = [Fraction(t) for t in CERTIFY_T_VALUES]
    jobs = []
    for t, i, s in product(ts, CERTIFY_I_VALUES, CERTIFY_S_VALUES):
        jobs.append(("conj", (("t", t), ("i", i), ("s", s))))
    for i, s1, s2 in product(CERTIFY_I_VALUES, CERTIFY_S_VALUES, CERTIFY_S_VALUES):
        jobs.append(("addB", (("i", i), ("s1", s1), ("s2", s2))))
    for i, j in product(CERTIFY_I_VALUES, CERTIFY_I_VALUES):
        if i == j:
            continue
        for s1, s2 in product(CERTIFY_S_VALUES, CERTIFY_S_VALUES):
            jobs.append(("commB", (("i", i), ("j", j), ("s1", s1), ("s2", s2))))
    for t1, t2 in product(ts, ts):
        jobs.append(("multA", (("t1", t1), ("t2", t2))))
    return jobs


class GeneratorController:
    """
    Controller for the generator families and their relations.
    """
    def __init__(self, app):
        self.app = app

    @property
    def config(self):
        return self.app.config

    def _cfg(self, cfg):
        return cfg or self.app.eval_config

    def realize(self, g):
        return realize(g)

    def word_realize(self, word):
        return word_realize(word)

    def verify_relation(self, relation_id, params, grid, cfg=None):
        """
        Measure sup |lhs(x) - rhs(x)| over the grid and compare with the relation's bound.

        Args:
            relation_id (str): one of conj, addB, commB, multA
            params: mapping or (name, value) pairs of the relation parameters
            grid (SampleGrid): grid with x0 ≥ 1

        Returns:
            RelationReport
        """
        params = tuple(params.items()) if isinstance(params, dict) else tuple(params)
        lhs, rhs, bound = relation_maps(relation_id, params)
        session = EvalSession(self._cfg(cfg))
        # The bounds hold for x ≥ 1, below the germ thresholds of negative shifts
        measured = max(abs(session.difference(lhs, rhs, x, strict=False)) for x in grid.points())
        tolerance = self.config.relation_tolerance
        limit = tolerance if bound == "exact" else float(bound) + tolerance
        report = RelationReport(relation_id, params, measured, bound, bool(measured <= limit))
        if not report.passed:
            logger.warning("Relation %s %s failed: sup %r > %r", relation_id, dict(params), measured, limit)
        return report

    def certify_relations(self, grid, cfg=None, relation_ids=None):
        """Run every relation over the certification grid; reports keep parameter order."""
        cfg = self._cfg(cfg)
        jobs = [job for job in certification_parameters()
                if relation_ids is None or job[0] in relation_ids]
        logger.info("Certifying %d relation instances", len(jobs))
        with ThreadPoolExecutor(max_workers=self.config.max_workers) as executor:
            return list(executor.map(
                lambda job: self.verify_relation(job[0], job[1], grid, cfg), jobs
            ))

    def _collect(self, word):
        """Sum n*s per i; also the expanded (i, signed s) letters."""
        collected = {}
        expanded = []
        for gen, n in word.letters:
            if gen.kind != "B":
                raise PreconditionError(f"independence needs B letters only, got {gen}")
            collected[gen.i] = collected.get(gen.i, 0) + n * gen.s
            sign = 1 if n > 0 else -1
            expanded.extend([(gen.i, sign * gen.s)] * abs(n))
        return collected, expanded

    def independence_test(self, word, grid, cfg=None):
        """
        Fit the displacement exponent of a word in the B generators.

        Trivial when the sup displacement stays within ``trivial_bound_factor``
        times the summed addB/commB bounds along the word.
        """
        cfg = self._cfg(cfg)
        collected, expanded = self._collect(word)
        bound = 0.0
        for a in range(len(expanded)):
            for b in range(a + 1, len(expanded)):
                (ia, sa), (ib, sb) = expanded[a], expanded[b]
                factor = 1 if ia == ib else 2
                bound += factor * abs(float(sa) * float(sb))

        nonzero = sorted(i for i, c in collected.items() if abs(float(c)) > COEFFICIENT_EPSILON)
        expected = 1.0 / (float(nonzero[0]) + 1) if nonzero else None

        f = word_realize(word)
        grid = self.app.metrics_controller.fit_grid(grid, f, cfg=cfg)
        session = EvalSession(cfg)
        points = grid.points()
        displacements = [session.displacement(f, x) for x in points]
        sup = max(abs(d) for d in displacements)

        top = grid.top_half()
        fit = {
            "logX": [log_abs(points[k]) for k in top],
            "logDisplacement": [log_abs(displacements[k]) for k in top],
        }
        items = tuple(sorted(collected.items()))
        if sup <= self.config.trivial_bound_factor * bound + cfg.abs_tol:
            return IndependenceResult("Trivial", None, bound, sup, expected, items, fit)
        exponent = loglog_slope([points[k] for k in top], [displacements[k] for k in top])
        return IndependenceResult("NontrivialExponent", exponent, bound, sup, expected, items, fit)

    def _lift_search_points(self, lift):
        us = set(np.linspace(0.0, 1.0, self.config.diffz_search_points).tolist())
        us.update(float(x) for x in lift.pl01.xs if 0 <= x <= 1)
        return sorted(us)

    def diffz_escape_check(self, lift, cfg=None):
        """
        Growth of |h f h⁻¹(y_n) - y_n| along y_n = e^(x*+n) against |e^f(x*) - e^x*| e^n.
        """
        if not isinstance(lift, PeriodicLift):
            raise PreconditionError("diffz checks need a periodic lift")
        cfg = self._cfg(cfg)
        session = EvalSession(cfg)
        us = self._lift_search_points(lift)
        gaps = [abs(session.displacement(lift, u)) for u in us]
        best = int(np.argmax(gaps))
        if gaps[best] <= cfg.abs_tol:
            logger.info("Identity lift: escape check is vacuous")
            return DiffzEscape(escaped=False, vacuous=True)

        x_star = us[best]
        fx = session.evaluate(lift, x_star)
        constant = abs(math.exp(fx) - math.exp(x_star))
        conj = h_conjugate(lift)
        growth, worst = [], 0.0
        for n in range(1, self.config.diffz_levels + 1):
            y = math.exp(x_star + n)
            ratio = float(abs(session.displacement(conj, y))) / math.exp(n)
            growth.append(ratio)
            worst = max(worst, abs(ratio - constant) / constant)
        escaped = worst <= self.config.diffz_tolerance
        return DiffzEscape(escaped, False, x_star, constant, tuple(growth), worst)

    def diffz_h_triviality_check(self, lift, grid, cfg=None):
        """True when the lift is the identity or its h-conjugate is not of sublinear drift."""
        if not isinstance(lift, PeriodicLift):
            raise PreconditionError("diffz checks need a periodic lift")
        if all(x == y for x, y in lift.pl01.breakpoints):
            return True
        drift = self.app.metrics_controller.drift_classify(h_conjugate(lift), grid, cfg)
        logger.debug("Drift of the h-conjugate lift: %s", drift.to_dict())
        return not isinstance(drift, Sublinear)

    def parse_generator(self, text):
        """GeneratorSpec from text such as ``B(1,-1)`` or ``hConj(a(2))``."""
        text = text.strip()
        if text.startswith("hConj(") and text.endswith(")"):
            return GeneratorSpec.h_conj(self.parse_generator(text[len("hConj("):-1]))
        name, _, rest = text.partition("(")
        if not rest.endswith(")") or name not in ("A", "B", "a", "b"):
            raise InvariantViolation(f"cannot read generator {text!r}")
        args = [Fraction(arg.strip()) if "." not in arg and "e" not in arg.lower() else float(arg)
                for arg in rest[:-1].split(",")]
        if name in ("A", "a"):
            if len(args) != 1:
                raise InvariantViolation(f"{name} takes one parameter")
            return getattr(GeneratorSpec, name)(args[0])
        if len(args) != 2:
            raise InvariantViolation(f"{name} takes two parameters")
        return getattr(GeneratorSpec, name)(*args)

    def parse_word(self, text):
        """WordSpec from text such as ``B(1,1) * B(1,-1)^2``."""
        letters, depth, start = [], 0, 0
        pieces = []
        for k, ch in enumerate(text):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "*" and depth == 0:
                pieces.append(text[start:k])
                start = k + 1
        pieces.append(text[start:])
        for piece in pieces:
            body, _, power = piece.strip().partition("^")
            try:
                n = int(power) if power else 1
            except ValueError:
                raise InvariantViolation(f"cannot read exponent {power!r}") from None
            letters.append((self.parse_generator(body), n))
        return WordSpec(tuple(letters))
