# Numeric backends: float64 for ordinary magnitudes, mpmath beyond the threshold

import logging
import math
from fractions import Fraction
import threading

import mpmath
from mpmath.ctx_mp import MPContext

from utils.constants import EXTENDED_GUARD_BITS

logger = logging.getLogger(__name__)

_thread_state = threading.local()


class FloatBackend:
    """Plain IEEE double arithmetic."""
    name = "float"
    bits = 53
    eps = 2.0 ** -52

    def num(self, value):
        if isinstance(value, Fraction):
            return value.numerator / value.denominator
        return float(value)

    def exp(self, x):
        return math.exp(x)

    def log(self, x):
        return math.log(x)

    def log1p(self, x):
        return math.log1p(x)

    def power(self, x, p):
        return math.pow(x, p)

    def floor(self, x):
        return float(math.floor(x))

    def to_float(self, x):
        return float(x)

    def __repr__(self):
        return "FloatBackend()"


class MpBackend:
    """mpmath arithmetic at a fixed working precision; never mutates the context."""
    name = "mpmath"

    def __init__(self, bits):
        self.bits = bits
        self.ctx = mp_context(bits)
        self.eps = self.ctx.eps

    def num(self, value):
        if isinstance(value, Fraction):
            return self.ctx.mpf(value.numerator) / value.denominator
        return self.ctx.mpf(value)

    def exp(self, x):
        return self.ctx.exp(x)

    def log(self, x):
        return self.ctx.log(x)

    def log1p(self, x):
        return self.ctx.log1p(x)

    def power(self, x, p):
        return self.ctx.power(x, p)

    def floor(self, x):
        return self.ctx.floor(x)

    def to_float(self, x):
        return float(x)

    def __repr__(self):
        return f"MpBackend(bits={self.bits})"


def mp_context(bits):
    """A private mpmath context for the calling thread; root finders adjust its precision while they run."""
    contexts = _thread_state.__dict__.setdefault("contexts", {})
    ctx = contexts.get(bits)
    if ctx is None:
        ctx = MPContext()
        ctx.prec = bits
        contexts[bits] = ctx
    return ctx


FLOAT = FloatBackend()


def _mp_backend(bits):
    backends = _thread_state.__dict__.setdefault("backends", {})
    backend = backends.get(bits)
    if backend is None:
        backend = backends[bits] = MpBackend(bits)
    return backend


def extended_backend(cfg, bits=None):
    """The mpmath backend used when float evaluation overflows."""
    bits = max(bits or 0, cfg.precision_bits, cfg.extended_bits)
    return _mp_backend(32 * ((bits + 31) // 32))


def backend_for(x, cfg):
    """
    Pick the arithmetic for evaluating at x.

    Standard precision up to ``cfg.extended_threshold``; beyond it the working
    precision grows with log2|x| so that order-one differences stay resolved.
    """
    magnitude = mpmath.mpf(abs(x)) if is_mp(x) else abs(float(x))
    if cfg.precision_bits <= 53 and magnitude <= cfg.extended_threshold:
        return FLOAT
    bits = max(cfg.precision_bits, cfg.extended_bits)
    if magnitude > 1:
        bits = max(bits, int(mpmath.log(magnitude, 2)) + EXTENDED_GUARD_BITS)
    # Round up to limit the number of cached contexts
    bits = 32 * ((bits + 31) // 32)
    return _mp_backend(bits)


def is_mp(value):
    """True for mpmath numbers of any context."""
    return hasattr(value, "_mpf_")


# Largest magnitude that is reported as a plain float
FLOAT_SAFE_LIMIT = 1e300


def as_real(value):
    """Collapse a backend number to a float, or to a global mpf when a float would overflow."""
    if not is_mp(value):
        return float(value)
    as_float = float(value)
    if math.isfinite(as_float) and abs(as_float) < FLOAT_SAFE_LIMIT:
        return as_float
    return mpmath.mpf(value)


def log_abs(value, floor=1e-300):
    """ln|value| as a float, clamped below at ln(floor)."""
    if is_mp(value):
        magnitude = abs(mpmath.mpf(value))
        if magnitude < floor:
            return math.log(floor)
        return float(mpmath.log(magnitude))
    return math.log(max(abs(float(value)), floor))


def format_real(value, digits=17):
    """Decimal text with ``digits`` significant digits."""
    if is_mp(value):
        return mpmath.nstr(mpmath.mpf(value), digits, strip_zeros=True)
    return format(float(value), f".{digits}g")


def json_real(value):
    """JSON-ready number; values beyond the float range become decimal strings."""
    if is_mp(value):
        return format_real(value)
    if isinstance(value, Fraction):
        return float(value)
    return value
