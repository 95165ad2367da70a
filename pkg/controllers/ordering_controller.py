import logging
from concurrent.futures import ThreadPoolExecutor
from itertools import product

from controllers.homeo_controller import EvalSession, as_rational_pl
from controllers.metrics_controller import _exact_pair
from models.map_expr import Inverse, compose_all
from models.ordering import (
    Order, OrderVerdict, WitnessSequence, Stage, SignAssignment, WordCheck,
)
from models.verdicts import Divergent
from utils.errors import (
    NoWitnessError, ClassificationAbort, BudgetExceeded, PreconditionError,
)

logger = logging.getLogger(__name__)

# Slack allowed in the inverse displacement inequality
INVERSE_BOUND_SLACK = 1e-6


class OrderingController:
    """
    Controller for eventual-displacement comparison and the sign-assignment procedure.
    """
    def __init__(self, app):
        self.app = app

    @property
    def config(self):
        return self.app.config

    def _cfg(self, cfg):
        return cfg or self.app.eval_config

    @property
    def metrics(self):
        return self.app.metrics_controller

    # -- comparison ----------------------------------------------------------

    def compare(self, f, g, grid, cfg=None):
        """
        Order f and g by the growth of g(x) - f(x).

        Returns:
            OrderVerdict: Less when g - f diverges to +inf, Greater when it
            diverges to -inf, Equivalent for bounded evidence
        """
        cfg = self._cfg(cfg)
        if _exact_pair(f, g):
            pf, pg = as_rational_pl(f), as_rational_pl(g)
            if pf.right_slope == pg.right_slope:
                return OrderVerdict(Order.EQUIVALENT)
            kind = Order.LESS if pg.right_slope > pf.right_slope else Order.GREATER
            return OrderVerdict(kind)

        grid = self.metrics.fit_grid(grid, f, g, cfg=cfg)
        session = EvalSession(cfg)
        points = grid.points()
        differences = [session.difference(g, f, x) for x in points]
        verdict = self.metrics.divergence_verdict(points, differences)
        if not isinstance(verdict, Divergent):
            return OrderVerdict(Order.EQUIVALENT, verdict.M)

        top = differences[len(differences) // 2:]
        signs = {1 if d > 0 else -1 for d in top if d != 0}
        if len(signs) > 1:
            return OrderVerdict(Order.UNRESOLVED, verdict.sup, verdict.fit_slope, tuple(top))
        kind = Order.LESS if verdict.sign > 0 else Order.GREATER
        return OrderVerdict(kind, verdict.sup, verdict.fit_slope)

    # -- witnesses -------------------------------------------------------------

    def find_witness(self, f, grid, cfg=None):
        """
        Grid subsequence with strictly increasing |f(x) - x| ending above the witness threshold.

        Raises:
            NoWitnessError: the largest displacement on the grid is too small
        """
        session = EvalSession(self._cfg(cfg))
        points, displacements = [], []
        best = None
        for x in grid.points():
            d = session.displacement(f, x)
            if best is None or abs(d) > best:
                best = abs(d)
                points.append(x)
                displacements.append(d)
        threshold = self.config.witness_threshold
        if best is None or not best > threshold:
            raise NoWitnessError(f.to_text(), float(best or 0.0), threshold)
        return WitnessSequence(tuple(points), tuple(displacements))

    # -- sign assignment ------------------------------------------------------------

    def _classify_along(self, f, witness, session):
        """+1 / -1 for divergence along the witness, 0 for bounded; also the sup."""
        values = [session.displacement(f, x) for x in witness.points]
        sup = max(abs(v) for v in values)
        verdict = self.metrics.divergence_verdict(list(witness.points), values)
        if not isinstance(verdict, Divergent):
            return 0, sup, values
        top = values[len(values) // 2:]
        if len({1 if v > 0 else -1 for v in top if v != 0}) > 1:
            return None, sup, values
        return verdict.sign, sup, values

    def assign_signs(self, fs, grid, cfg=None):
        """
        Staged sign assignment.

        Each stage takes the unsigned map with the largest grid displacement,
        builds its witness sequence and signs every unsigned map that diverges
        along it; maps bounded along the witness wait for the next stage.
        """
        cfg = self._cfg(cfg)
        fs = list(fs)
        if not fs:
            raise PreconditionError("sign assignment needs at least one map")
        grid = self.metrics.fit_grid(grid, *fs, cfg=cfg)
        session = EvalSession(cfg)
        epsilons = [0] * len(fs)
        survivors = list(range(len(fs)))
        stages = []
        while survivors:
            sups = {
                k: max(abs(session.displacement(fs[k], x)) for x in grid.points())
                for k in survivors
            }
            chosen = max(survivors, key=lambda k: (sups[k], -k))
            witness = self.find_witness(fs[chosen], grid, cfg)
            t = len(stages) + 1
            logger.info("Stage %d: %d unsigned maps, witness from %s", t, len(survivors), fs[chosen])

            assigned, remaining, bound = [], [], 0.0
            for k in survivors:
                sign, sup, values = self._classify_along(fs[k], witness, session)
                if sign is None:
                    raise ClassificationAbort(fs[k].to_text(), t, tuple(values))
                if sign == 0:
                    remaining.append(k)
                    bound = max(bound, sup)
                else:
                    epsilons[k] = sign
                    assigned.append((k, sign))
            if chosen in remaining:
                raise ClassificationAbort(fs[chosen].to_text(), t, witness.displacements)
            stages.append(Stage(tuple(survivors), chosen, witness, bound, tuple(assigned)))
            survivors = remaining
        return SignAssignment(tuple(epsilons), tuple(stages))

    # -- semigroup words ------------------------------------------------------------------

    def _word_value(self, word, letters, point, cfg):
        f = compose_all(letters[k] for k in word)
        return EvalSession(cfg).displacement(f, point, strict=False)

    def semigroup_word_check(self, assignment, fs, max_len, grid=None, cfg=None):
        """
        Check that every positive word of length ≤ max_len moves the tail point
        of its stage's witness by more than the witness threshold.

        Raises:
            BudgetExceeded: more words than ``word_budget``
        """
        cfg = self._cfg(cfg)
        n = len(fs)
        count = sum(n ** length for length in range(1, max_len + 1))
        if count > self.config.word_budget:
            logger.warning("Word budget exceeded: %d words requested", count)
            raise BudgetExceeded(
                f"{count} words of length ≤ {max_len} exceed the budget {self.config.word_budget}"
            )
        letters = [f if eps > 0 else Inverse(f) for f, eps in zip(fs, assignment.epsilons)]
        words = [word for length in range(1, max_len + 1)
                 for word in product(range(n), repeat=length)]

        def check(word):
            stage = assignment.stages[assignment.stage_of(word)]
            return self._word_value(word, letters, stage.witness.last_point, cfg)

        with ThreadPoolExecutor(max_workers=self.config.max_workers) as executor:
            values = list(executor.map(check, words))

        threshold = self.config.witness_threshold
        worst = min(range(len(words)), key=lambda k: (values[k], k))
        all_positive = all(v > threshold for v in values)
        return WordCheck(all_positive, words[worst], values[worst], len(words))

    def inverse_displacement_check(self, f, witness, K, C, cfg=None):
        """
        f⁻¹(x) - x ≤ -((1/K)(f(x) - x) - C) at every witness point.
        """
        if not witness.points or any(d <= 0 for d in witness.displacements):
            raise PreconditionError("inverse displacement check needs a positive witness")
        session = EvalSession(self._cfg(cfg))
        inverse = Inverse(f)
        for x, d in zip(witness.points, witness.displacements):
            moved = session.displacement(inverse, x, strict=False)
            if moved > -(d / K - C) + INVERSE_BOUND_SLACK:
                logger.debug("Inverse bound fails at x=%r: %r", x, moved)
                return False
        return True
