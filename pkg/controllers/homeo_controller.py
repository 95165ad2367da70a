"""
Evaluation, germ domains and the exact rational path for map expressions.
"""

import logging
import math
from bisect import bisect_right
from fractions import Fraction
from functools import lru_cache

from scipy.optimize import brentq

from controllers.map_parser import parse_map
from models.map_expr import (
    Identity, Affine, PowerShift, LogShift, LogPowerShift, ExpGlue, Reflect,
    RationalPLRef, PeriodicLift, Extend, DiagonalConjugate, Compose, Inverse, GermDomain,
)
from models.rational_pl import RationalPL
from utils.config_manager import EvalConfig
from utils.constants import DERIVATIVE_STEP, DOMAIN_SLACK, INITIAL_BRACKET_STEP
from utils.errors import (
    DomainViolation, ConvergenceFailure, NotFullLineError, InexactExpression,
)
from utils.precision import FLOAT, backend_for, extended_backend, as_real

logger = logging.getLogger(__name__)

DEFAULT_EVAL = EvalConfig()

# Atoms inverted by bracketing and root finding; everything else is inverted piecewise
BRACKETED_ATOMS = (PowerShift, LogShift, LogPowerShift)
PREIMAGE_NUDGES = 64


@lru_cache(maxsize=512)
def _pl_table(pl, backend):
    return (
        [backend.num(x) for x in pl.xs],
        [backend.num(y) for y in pl.ys],
        backend.num(pl.left_slope),
        backend.num(pl.right_slope),
    )


def _interpolate(xs, ys, left, right, x):
    if x <= xs[0]:
        return ys[0] + left * (x - xs[0])
    if x >= xs[-1]:
        return ys[-1] + right * (x - xs[-1])
    k = bisect_right(xs, x) - 1
    return ys[k] + (ys[k + 1] - ys[k]) * (x - xs[k]) / (xs[k + 1] - xs[k])


def _pl_forward(pl, backend, x):
    xs, ys, left, right = _pl_table(pl, backend)
    return _interpolate(xs, ys, left, right, x)


def _pl_backward(pl, backend, y):
    xs, ys, left, right = _pl_table(pl, backend)
    return _interpolate(ys, xs, 1 / left, 1 / right, y)


class _Evaluator:
    """Evaluates expression trees in one numeric backend."""

    def __init__(self, backend, session):
        self.backend = backend
        self.session = session

    def value(self, f, x):
        B = self.backend
        if isinstance(f, Identity):
            return x
        if isinstance(f, Affine):
            return B.num(f.a) * x + B.num(f.b)
        if isinstance(f, PowerShift):
            if x < 0:
                raise DomainViolation(as_real(x), 0.0, "formula domain")
            return x + B.num(f.s) * B.power(x, 1 / B.num(f.i + 1))
        if isinstance(f, LogShift):
            if 1 + x <= 0:
                raise DomainViolation(as_real(x), -1.0, "formula domain")
            return x + B.num(f.s) * B.log1p(x)
        if isinstance(f, LogPowerShift):
            return self._log_power_shift(f, x)
        if isinstance(f, ExpGlue):
            if x >= 1:
                return B.exp(x)
            if x <= -1:
                return -B.exp(-x)
            return B.exp(B.num(1)) * x
        if isinstance(f, Reflect):
            return -x
        if isinstance(f, RationalPLRef):
            return _pl_forward(f.pl, B, x)
        if isinstance(f, PeriodicLift):
            n = B.floor(x)
            return _pl_forward(f.pl01, B, x - n) + n
        if isinstance(f, Extend):
            c = B.num(f.c)
            if x >= c:
                return self.value(f.inner, x)
            return x + (self.value(f.inner, c) - c)
        if isinstance(f, DiagonalConjugate):
            for a, b in f.intervals:
                a, b = B.num(a), B.num(b)
                if a < x < b:
                    u = B.log(x - a) - B.log(b - x)
                    return a + (b - a) * self._logistic(self.value(f.inner, u))
            return x
        if isinstance(f, Compose):
            return self.value(f.left, self.value(f.right, x))
        if isinstance(f, Inverse):
            return self.invert(f.inner, x)
        raise TypeError(f"unsupported map expression {f!r}")

    def _log_power_shift(self, f, x):
        B = self.backend
        s = B.num(f.s)
        i1 = B.num(f.i + 1)
        if x >= 0:
            # ln(e^x + s e^(x/(i+1))) = x + ln(1 + s e^(-x i/(i+1)))
            z = s * B.exp(-x * B.num(f.i) / i1)
            if z <= -1:
                raise DomainViolation(as_real(x), None, "formula domain")
            return x + B.log1p(z)
        v = B.exp(x) + s * B.exp(x / i1)
        if v <= 0:
            raise DomainViolation(as_real(x), None, "formula domain")
        return B.log(v)

    def _logistic(self, v):
        B = self.backend
        if v >= 0:
            return 1 / (1 + B.exp(-v))
        e = B.exp(v)
        return e / (1 + e)

    def invert(self, f, y):
        B = self.backend
        if isinstance(f, Identity):
            return y
        if isinstance(f, Affine):
            return (y - B.num(f.b)) / B.num(f.a)
        if isinstance(f, Reflect):
            return -y
        if isinstance(f, RationalPLRef):
            return _pl_backward(f.pl, B, y)
        if isinstance(f, PeriodicLift):
            y0 = B.num(f.pl01.ys[0])
            n = B.floor(y - y0)
            return _pl_backward(f.pl01, B, y - n) + n
        if isinstance(f, ExpGlue):
            e = B.exp(B.num(1))
            if y >= e:
                return B.log(y)
            if y <= -e:
                return -B.log(-y)
            return y / e
        if isinstance(f, Inverse):
            return self.value(f.inner, y)
        if isinstance(f, Compose):
            return self.invert(f.right, self.invert(f.left, y))
        if isinstance(f, Extend):
            c = B.num(f.c)
            yc = self.value(f.inner, c)
            if y >= yc:
                return self.invert(f.inner, y)
            return y - (yc - c)
        if isinstance(f, DiagonalConjugate):
            for a, b in f.intervals:
                a, b = B.num(a), B.num(b)
                if a < y < b:
                    v = B.log(y - a) - B.log(b - y)
                    return a + (b - a) * self._logistic(self.invert(f.inner, v))
            return y
        if isinstance(f, BRACKETED_ATOMS):
            return self._bracketed_root(f, y)
        raise TypeError(f"unsupported map expression {f!r}")

    def _bracketed_root(self, f, y):
        """Solve f(z) = y for an increasing atom by bracketing from the seed z = y."""
        B = self.backend
        cfg = self.session.cfg
        domain = germ_domain(f, cfg)
        lower = None if domain.full_line else B.num(domain.x0)

        def h(z):
            return self.value(f, z) - y

        seed = y if lower is None or y > lower else lower
        h_seed = h(seed)
        if h_seed == 0:
            return seed

        step = self.session.steps.get(id(f))
        if step is None:
            step = B.num(INITIAL_BRACKET_STEP) * max(1, abs(y))
        else:
            step = B.num(step)

        if h_seed > 0:
            hi = seed
            if lower is not None and h(lower) > 0:
                raise DomainViolation(as_real(y), as_real(self.value(f, lower)), "image")
            for _ in range(cfg.max_bisect_iters):
                lo = seed - step
                if lower is not None and lo <= lower:
                    lo = lower
                    break
                if h(lo) <= 0:
                    break
                step *= cfg.bracket_growth
            else:
                raise ConvergenceFailure(f"no lower bracket for inv({f}) at y={as_real(y)!r}")
        else:
            lo = seed
            for _ in range(cfg.max_bisect_iters):
                hi = seed + step
                if h(hi) >= 0:
                    break
                step *= cfg.bracket_growth
            else:
                raise ConvergenceFailure(f"no upper bracket for inv({f}) at y={as_real(y)!r}")

        root = self._solve(h, lo, hi)
        gap = abs(root - y)
        self.session.steps[id(f)] = 2 * as_real(gap) if gap > 0 else None
        return root

    def _solve(self, h, lo, hi):
        B = self.backend
        cfg = self.session.cfg
        if h(lo) == 0:
            return lo
        if h(hi) == 0:
            return hi
        if B is FLOAT:
            try:
                return brentq(h, lo, hi, xtol=cfg.abs_tol * 1e-3, rtol=4 * B.eps,
                              maxiter=cfg.max_bisect_iters)
            except (RuntimeError, ValueError) as e:
                raise ConvergenceFailure(f"root finding failed on [{lo!r}, {hi!r}]: {e}") from e
        ctx = B.ctx
        tol = B.eps * 16
        try:
            root = ctx.findroot(h, (lo, hi), solver="anderson", tol=tol,
                                maxsteps=cfg.max_bisect_iters, verify=False)
            if lo <= root <= hi:
                return root
        except (ZeroDivisionError, ValueError):
            pass
        logger.debug("Falling back to bisection on [%s, %s]", lo, hi)
        return ctx.findroot(h, (lo, hi), solver="bisect", tol=tol,
                            maxsteps=cfg.max_bisect_iters, verify=False)


class EvalSession:
    """
    Evaluation context of one operation call.

    Holds the bracket-step cache for inverse nodes, so repeated evaluations
    (orbits, grids) start their brackets near the previous answer. Sessions
    are not shared between threads.
    """

    def __init__(self, cfg=None):
        self.cfg = cfg or DEFAULT_EVAL
        self.steps = {}

    def _run(self, body, x):
        backend = backend_for(x, self.cfg)
        try:
            result = body(_Evaluator(backend, self), backend.num(x))
            if backend is FLOAT and not math.isfinite(result):
                raise OverflowError(result)
            return result
        except OverflowError:
            if backend is not FLOAT:
                raise
        mp = extended_backend(self.cfg, backend_for(x, self.cfg).bits)
        logger.debug("Float overflow at x=%r; retrying with %r", x, mp)
        return body(_Evaluator(mp, self), mp.num(x))

    def check_domain(self, f, x):
        domain = germ_domain(f, self.cfg)
        slack = DOMAIN_SLACK * max(1.0, abs(domain.x0))
        if not domain.contains(x, slack):
            raise DomainViolation(as_real(x), domain.x0)

    def evaluate(self, f, x, strict=True):
        if strict:
            self.check_domain(f, x)
        return as_real(self._run(lambda ev, xb: ev.value(f, xb), x))

    def difference(self, f, g, x, strict=True):
        """f(x) - g(x), subtracted before rounding to float."""
        if strict:
            self.check_domain(f, x)
            self.check_domain(g, x)
        return as_real(self._run(lambda ev, xb: ev.value(f, xb) - ev.value(g, xb), x))

    def displacement(self, f, x, strict=True):
        return self.difference(f, Identity(), x, strict)

    def derivative(self, f, x, h=DERIVATIVE_STEP, strict=True):
        if strict:
            self.check_domain(f, x - h)

        def central(ev, xb):
            hb = ev.backend.num(h)
            return (ev.value(f, xb + hb) - ev.value(f, xb - hb)) / (2 * hb)

        return as_real(self._run(central, x))


@lru_cache(maxsize=2048)
def germ_domain(f, cfg=DEFAULT_EVAL):
    """
    Threshold x0 such that f is defined and strictly monotone on [x0, +inf).

    Negative shifts keep a safety factor 2 beyond the critical point where the
    derivative vanishes.
    """
    if isinstance(f, PowerShift):
        if f.s >= 0:
            return GermDomain(0.0, False)
        i, s = float(f.i), float(f.s)
        return GermDomain(2.0 * (-s / (i + 1)) ** ((i + 1) / i), False)
    if isinstance(f, LogShift):
        if f.s >= 0:
            return GermDomain(0.0, False)
        return GermDomain(max(0.0, 2.0 * -float(f.s) - 1.0), False)
    if isinstance(f, LogPowerShift):
        if f.s >= 0:
            return GermDomain(0.0, True)
        i = float(f.i)
        return GermDomain(((i + 1) / i) * math.log(2.0 * -float(f.s)), False)
    if isinstance(f, Inverse):
        inner = germ_domain(f.inner, cfg)
        if inner.full_line:
            return GermDomain(0.0, True)
        image = EvalSession(cfg).evaluate(f.inner, inner.x0, strict=False)
        return GermDomain(float(image), False)
    if isinstance(f, Compose):
        outer = germ_domain(f.left, cfg)
        inner = germ_domain(f.right, cfg)
        if outer.full_line:
            return inner
        session = EvalSession(cfg)
        start = None if inner.full_line else inner.x0
        if start is not None and session.evaluate(f.right, start, strict=False) >= outer.x0:
            return inner
        try:
            pulled = float(session.evaluate(Inverse(f.right), outer.x0, strict=False))
            # the root may land a few ulps below the preimage
            for _ in range(PREIMAGE_NUDGES):
                if session.evaluate(f.right, pulled, strict=False) >= outer.x0:
                    break
                pulled = math.nextafter(pulled, math.inf)
        except DomainViolation:
            pulled = start
        x0 = pulled if start is None else max(start, pulled)
        logger.debug("Germ domain of %s pulled back to %r", f, x0)
        return GermDomain(x0, False)
    return GermDomain(0.0, True)


def evaluate(f, x, cfg=None, strict=True):
    """f(x) as a float (or an mpf beyond the float range)."""
    return EvalSession(cfg).evaluate(f, x, strict)


# -- exact rational path ---------------------------------------------------------


def exact_eval(f, q):
    """
    Evaluate f at the rational q in Fraction arithmetic.

    Raises:
        InexactExpression: f contains an analytic atom
    """
    q = Fraction(q)
    if isinstance(f, Identity):
        return q
    if isinstance(f, Affine):
        return Fraction(f.a) * q + Fraction(f.b)
    if isinstance(f, Reflect):
        return -q
    if isinstance(f, RationalPLRef):
        return f.pl.evaluate(q)
    if isinstance(f, PeriodicLift):
        n = math.floor(q)
        return f.pl01.evaluate(q - n) + n
    if isinstance(f, Compose):
        return exact_eval(f.left, exact_eval(f.right, q))
    if isinstance(f, Inverse):
        return exact_invert(f.inner, q)
    raise InexactExpression(f.to_text())


def exact_invert(f, q):
    q = Fraction(q)
    if isinstance(f, Identity):
        return q
    if isinstance(f, Affine):
        return (q - Fraction(f.b)) / Fraction(f.a)
    if isinstance(f, Reflect):
        return -q
    if isinstance(f, RationalPLRef):
        return f.pl.evaluate_inverse(q)
    if isinstance(f, PeriodicLift):
        n = math.floor(q - f.pl01.ys[0])
        return f.pl01.evaluate_inverse(q - n) + n
    if isinstance(f, Compose):
        return exact_invert(f.right, exact_invert(f.left, q))
    if isinstance(f, Inverse):
        return exact_eval(f.inner, q)
    raise InexactExpression(f.to_text())


def as_rational_pl(f):
    """Collapse a PL-only expression to one canonical RationalPL."""
    if isinstance(f, Identity):
        return RationalPL.identity()
    if isinstance(f, Affine):
        return RationalPL.affine(f.a, f.b)
    if isinstance(f, RationalPLRef):
        return f.pl.canonical()
    if isinstance(f, Compose):
        return as_rational_pl(f.left).compose(as_rational_pl(f.right))
    if isinstance(f, Inverse):
        return as_rational_pl(f.inner).inverse()
    raise InexactExpression(f.to_text())


def is_rational_pl(f):
    try:
        as_rational_pl(f)
    except InexactExpression:
        return False
    return True


def _reflected_lift_body(pl01):
    """Body of x -> -F(-x) on [0, 1] for the lift F of pl01."""
    points = tuple((1 - x, 1 - y) for x, y in reversed(pl01.breakpoints))
    return RationalPL(points, pl01.right_slope, pl01.left_slope)


class HomeoController:
    """
    Controller for representing and evaluating homeomorphism germs.
    """
    def __init__(self, app):
        """
        Initialize the homeomorphism controller.

        Args:
            app: The main application instance
        """
        self.app = app

    def _cfg(self, cfg):
        return cfg or self.app.eval_config

    def parse(self, src):
        return parse_map(src)

    def session(self, cfg=None):
        return EvalSession(self._cfg(cfg))

    def germ_domain(self, f, cfg=None):
        return germ_domain(f, self._cfg(cfg))

    def eval(self, f, x, cfg=None, strict=True):
        """
        Evaluate f at x.

        Args:
            f (MapExpr): the map
            x (float): the point, inside the germ domain when ``strict``
            cfg (EvalConfig): numerical settings, defaults to the app's
            strict (bool): reject points below the germ threshold

        Returns:
            float: f(x); an mpf when the value exceeds the float range
        """
        return EvalSession(self._cfg(cfg)).evaluate(f, x, strict)

    def displacement(self, f, x, cfg=None, strict=True):
        return EvalSession(self._cfg(cfg)).displacement(f, x, strict)

    def derivative_est(self, f, x, h=DERIVATIVE_STEP, cfg=None, strict=True):
        """Central difference (f(x+h) - f(x-h)) / 2h."""
        if not h > 0:
            raise ValueError("derivative step must be positive")
        return EvalSession(self._cfg(cfg)).derivative(f, x, h, strict)

    def normalize_origin(self, f):
        """x -> f(x) - f(0) for a full-line map."""
        if not f.full_line:
            raise NotFullLineError(f.to_text())
        if isinstance(f, Identity):
            return f
        if isinstance(f, Affine):
            return Affine(f.a, Fraction(0))
        if isinstance(f, RationalPLRef):
            return RationalPLRef(f.pl.shifted(-f.pl.evaluate(0)))
        try:
            f0 = exact_eval(f, 0)
        except InexactExpression:
            f0 = self.eval(f, 0.0, strict=False)
        if f0 == 0:
            return f
        return Compose(Affine(1, -f0), f)

    def pl_compose(self, f, g):
        return f.compose(g)

    def pl_invert(self, f):
        return f.inverse()

    def reflect_conjugate(self, f):
        """t∘f∘t with t(x) = -x."""
        if not f.full_line:
            raise NotFullLineError(f.to_text())
        if isinstance(f, (Identity, Reflect, ExpGlue)):
            return f
        if isinstance(f, Affine):
            return Affine(f.a, -f.b)
        if isinstance(f, RationalPLRef):
            return RationalPLRef(f.pl.reflected())
        if isinstance(f, PeriodicLift):
            return PeriodicLift(_reflected_lift_body(f.pl01))
        if isinstance(f, Compose):
            return Compose(self.reflect_conjugate(f.left), self.reflect_conjugate(f.right))
        if isinstance(f, Inverse):
            return Inverse(self.reflect_conjugate(f.inner))
        return Compose(Reflect(), Compose(f, Reflect()))

    def exact_eval(self, f, q):
        return exact_eval(f, q)

    def as_rational_pl(self, f):
        return as_rational_pl(f)
