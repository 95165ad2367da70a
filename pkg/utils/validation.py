import math
import re
from fractions import Fraction

RATIONAL_PATTERN = re.compile(r'^[+-]?\d+(?:/\d+)?$')


def validate_number(text):
    """
    Validate a real number argument.

    Args:
        text (str): The argument text

    Returns:
        tuple: (is_valid, value, error_message)
    """
    if text is None or not str(text).strip():
        return False, None, "Number cannot be empty"
    try:
        value = float(text)
    except ValueError:
        return False, None, f"Invalid number {text!r}"
    if not math.isfinite(value):
        return False, None, f"Number {text!r} must be finite"
    return True, value, None


def validate_rational(text):
    """
    Validate an exact rational argument such as ``3`` or ``-2/7``.

    Returns:
        tuple: (is_valid, Fraction, error_message)
    """
    if text is None or not RATIONAL_PATTERN.match(str(text).strip()):
        return False, None, f"Invalid rational {text!r}"
    try:
        return True, Fraction(str(text).strip()), None
    except ZeroDivisionError:
        return False, None, "Rational denominator must be nonzero"


def validate_grid(text):
    """
    Validate a grid spec ``x0,ratio,count``.

    Returns:
        tuple: (is_valid, (x0, ratio, count), error_message)
    """
    if not text:
        return False, None, "Grid cannot be empty"
    parts = [part.strip() for part in str(text).split(",")]
    if len(parts) != 3:
        return False, None, "Grid must be given as x0,ratio,count"

    ok, x0, error = validate_number(parts[0])
    if not ok:
        return False, None, error
    ok, ratio, error = validate_number(parts[1])
    if not ok:
        return False, None, error
    try:
        count = int(parts[2])
    except ValueError:
        return False, None, f"Grid count {parts[2]!r} must be an integer"

    if x0 < 1:
        return False, None, "Grid x0 must be ≥ 1"
    if ratio <= 1:
        return False, None, "Grid ratio must be > 1"
    if count < 1:
        return False, None, "Grid count must be positive"
    return True, (x0, ratio, count), None


def validate_params(pairs):
    """
    Validate ``name=value`` relation parameters; values are rationals or decimals.

    Returns:
        tuple: (is_valid, tuple of (name, value), error_message)
    """
    params = []
    for pair in pairs or ():
        name, sep, raw = pair.partition("=")
        if not sep or not name.strip():
            return False, None, f"Parameter {pair!r} must look like name=value"
        ok, value, _ = validate_rational(raw)
        if not ok:
            ok, value, error = validate_number(raw)
            if not ok:
                return False, None, error
        params.append((name.strip(), value))
    return True, tuple(params), None
