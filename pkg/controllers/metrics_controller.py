import logging
import statistics

import numpy as np
from sklearn.linear_model import LinearRegression

from controllers.homeo_controller import EvalSession, germ_domain, as_rational_pl, is_rational_pl
from models.map_expr import RationalPLRef
from models.verdicts import (
    SampleGrid, QIEstimate, Sublinear, LinearDrift, Unresolved,
    BoundedEvidence, Divergent, ExactEqual, ExactDifferent, WMembership,
)
from utils.constants import MIN_QI_GRID_POINTS, MIN_DRIFT_GRID_POINTS, DERIVATIVE_STEP
from utils.errors import DegenerateGrid, NotFullLineError
from utils.precision import log_abs, is_mp

logger = logging.getLogger(__name__)

# Slack below this fraction of |f(x2) - f(x1)| is rounding noise
QI_SLACK_NOISE = 1e-9
# Relative tolerance when comparing tail maxima for W(R) membership
W_TAIL_TOLERANCE = 1e-6


def _has_pl_ref(f):
    return isinstance(f, RationalPLRef) or any(_has_pl_ref(c) for c in f.children())


def _exact_pair(f, g):
    """Both maps are PL and at least one carries explicit breakpoints."""
    return (is_rational_pl(f) and is_rational_pl(g)
            and (_has_pl_ref(f) or _has_pl_ref(g)))


def fit_slope(xs, ys):
    """Least-squares slope of ys against xs."""
    X = np.asarray(xs, dtype=float).reshape(-1, 1)
    y = np.asarray(ys, dtype=float)
    if len(y) < 2 or np.ptp(X) == 0:
        return 0.0
    model = LinearRegression().fit(X, y)
    return float(model.coef_[0])


def loglog_slope(xs, values):
    """Exponent e of |values| ~ x**e."""
    return fit_slope([log_abs(x) for x in xs], [log_abs(v) for v in values])


def semilog_slope(xs, values):
    """Slope of |values| against ln x; infinite beyond the float range."""
    magnitudes = []
    for v in values:
        magnitude = abs(v)
        if is_mp(magnitude):
            return float("inf")
        magnitudes.append(float(magnitude))
    return fit_slope([log_abs(x) for x in xs], magnitudes)


class MetricsController:
    """
    Controller for quasi-isometry constants, drift classes and distance verdicts.
    """
    def __init__(self, app):
        self.app = app

    @property
    def config(self):
        return self.app.config

    def _cfg(self, cfg):
        return cfg or self.app.eval_config

    def default_grid(self):
        x0, ratio, count = self.config.grid
        return SampleGrid(x0, ratio, count)

    def fit_grid(self, grid, *maps, cfg=None):
        """
        Raise the grid start above every germ threshold.

        Args:
            grid (SampleGrid): requested grid
            *maps: map expressions that will be evaluated on the grid

        Returns:
            SampleGrid: the requested grid or a copy starting at the largest threshold
        """
        cfg = self._cfg(cfg)
        x0 = grid.x0
        for f in maps:
            domain = germ_domain(f, cfg)
            if not domain.full_line and domain.x0 > x0:
                x0 = domain.x0
        if x0 == grid.x0:
            return grid
        logger.info("Grid start raised from %r to %r to fit germ domains", grid.x0, x0)
        return grid.with_x0(x0)

    def displacement_profile(self, f, grid, cfg=None):
        session = EvalSession(self._cfg(cfg))
        return [(x, session.displacement(f, x)) for x in grid.points()]

    def estimate_qi_constants(self, f, grid, cfg=None):
        """
        Smallest K from adjacent difference quotients, then the smallest C for that K.
        """
        if grid.count < MIN_QI_GRID_POINTS:
            raise DegenerateGrid(f"QI estimation needs at least {MIN_QI_GRID_POINTS} grid points")
        session = EvalSession(self._cfg(cfg))
        xs = np.array([float(x) for x in grid.points()])
        ys = np.array([float(session.evaluate(f, x)) for x in xs])

        quotients = np.diff(ys) / np.diff(xs)
        K = float(max(np.max(quotients), np.max(1.0 / quotients)))

        i, j = np.triu_indices(len(xs), k=1)
        d = xs[j] - xs[i]
        df = np.abs(ys[j] - ys[i])
        slack = np.maximum.reduce([df - K * d, d / K - df, np.zeros_like(d)])
        slack[slack <= QI_SLACK_NOISE * np.maximum(1.0, df)] = 0.0
        C = float(np.max(slack)) if len(slack) else 0.0
        return QIEstimate(K, C, grid)

    def drift_ratios(self, f, grid, cfg=None):
        session = EvalSession(self._cfg(cfg))
        return [float(session.displacement(f, x) / x) for x in grid.points()]

    def drift_classify(self, f, grid, cfg=None):
        """Classify the tail of r_k = (f(x_k) - x_k)/x_k."""
        if grid.count < MIN_DRIFT_GRID_POINTS:
            raise DegenerateGrid(f"drift classification needs at least {MIN_DRIFT_GRID_POINTS} grid points")
        cfg = self._cfg(cfg)
        tail = self.drift_ratios(f, grid, cfg)[-self.config.drift_tail_length:]
        magnitudes = [abs(r) for r in tail]

        # Displacement below the evaluation tolerance everywhere on the tail
        if max(magnitudes) <= cfg.abs_tol:
            return Sublinear()
        if (max(magnitudes) < self.config.drift_tail_bound
                and all(b <= a for a, b in zip(magnitudes, magnitudes[1:]))):
            return Sublinear()

        lam = float(np.mean(tail))
        if (all(abs(r - lam) <= self.config.linear_drift_band for r in tail)
                and abs(lam) >= self.config.linear_drift_min):
            return LinearDrift(lam)
        logger.debug("Drift of %s unresolved, tail %s", f, tail)
        return Unresolved(tuple(tail))

    def divergence_verdict(self, points, differences):
        """
        Apply the divergence rule to differences sampled at increasing ``points``.

        Divergent needs the last value to be at least ``divergence_growth_factor``
        times the median over the first decade and at least ``divergence_floor``,
        and growth on the top half: log-log slope or semi-log slope at least
        ``divergence_slope``.
        """
        magnitudes = [abs(v) for v in differences]
        sup = max(magnitudes)
        limit = 10 * points[0]
        first = statistics.median([m for x, m in zip(points, magnitudes) if x <= limit])
        last = magnitudes[-1]

        top = range(len(points) // 2, len(points))
        top_x = [points[k] for k in top]
        top_v = [differences[k] for k in top]
        slope = loglog_slope(top_x, top_v)

        growing = (
            last >= self.config.divergence_growth_factor * first
            and last >= self.config.divergence_floor
        )
        if growing and (slope >= self.config.divergence_slope
                        or semilog_slope(top_x, top_v) >= self.config.divergence_slope):
            sign = 1 if differences[-1] > 0 else -1
            return Divergent(slope, sign, sup)
        return BoundedEvidence(sup)

    def bounded_distance(self, f, g, grid, cfg=None, full_line=False):
        """
        Bounded-distance verdict for f and g.

        PL pairs are decided exactly by their eventual slopes; everything else
        gets sampled evidence.
        """
        if _exact_pair(f, g):
            pf, pg = as_rational_pl(f), as_rational_pl(g)
            same = pf.right_slope == pg.right_slope
            if full_line:
                same = same and pf.left_slope == pg.left_slope
            return ExactEqual() if same else ExactDifferent()
        return self.numeric_distance(f, g, grid, cfg, full_line)

    def numeric_distance(self, f, g, grid, cfg=None, full_line=False):
        """The sampled verdict, even for PL pairs; ``full_line`` also scans the mirrored grid."""
        session = EvalSession(self._cfg(cfg))
        differences = [session.difference(f, g, x) for x in grid.points()]
        verdict = self.divergence_verdict(grid.points(), differences)
        if not full_line or isinstance(verdict, Divergent):
            return verdict
        mirrored = [session.difference(f, g, -x, strict=False) for x in grid.points()]
        other = self.divergence_verdict(grid.points(), mirrored)
        if isinstance(other, Divergent):
            return other
        return BoundedEvidence(max(verdict.M, other.M))

    def w_membership(self, f, grid, cfg=None):
        """Bounded displacement and derivative on the grid and its mirror image."""
        if not f.full_line:
            raise NotFullLineError(f.to_text())
        session = EvalSession(self._cfg(cfg))
        last = set(grid.last_decade())
        sides = {}
        for side, sign in (("positive", 1), ("negative", -1)):
            disp, deriv = [], []
            for x in grid.points():
                x = sign * x
                disp.append(abs(session.displacement(f, x, strict=False)))
                step = DERIVATIVE_STEP * max(1.0, abs(x))
                deriv.append(abs(session.derivative(f, x, step, strict=False)))
            sides[side] = (disp, deriv)

        in_w = True
        tol = self._cfg(cfg).abs_tol
        for disp, deriv in sides.values():
            for values in (disp, deriv):
                earlier = [v for k, v in enumerate(values) if k not in last] or values[:1]
                tail = [v for k, v in enumerate(values) if k in last]
                if max(tail) > max(earlier) * (1 + W_TAIL_TOLERANCE) + tol:
                    in_w = False

        sup_disp = max(max(d) for d, _ in sides.values())
        sup_deriv = max(max(v) for _, v in sides.values())
        return WMembership(in_w, sup_disp, sup_deriv, details={"grid": grid.to_dict()})
