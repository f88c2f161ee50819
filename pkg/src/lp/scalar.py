"""
Numeric field shared by the Simplex engine, the tightener and the checker.

Exact mode works over ``fractions.Fraction``; float mode works over binary64
and compares with a tolerance. Infinite bounds are represented by the float
infinities ``INF`` and ``NEG_INF`` in both modes.
"""

import logging
import math
import threading
from fractions import Fraction
from typing import Union

logger = logging.getLogger(__name__)

Scalar = Union[Fraction, float]
ExtendedScalar = Union[Fraction, float]

INF = math.inf
NEG_INF = -math.inf

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)

DEFAULT_EPSILON = 1e-9


class DivisionCounter:
    """
    Process-wide count of scalar divisions.

    The checker reads it before and after a run to show that checking
    never divides.
    """

    def __init__(self):
        self._count = 0
        self._lock = threading.Lock()

    def record(self):
        with self._lock:
            self._count += 1

    @property
    def count(self) -> int:
        return self._count


DIVISIONS = DivisionCounter()


def is_infinite(value) -> bool:
    return isinstance(value, float) and math.isinf(value)


class NumberField:
    """
    Arithmetic and comparisons in the active mode

    Args:
        mode: 'exact' (rationals) or 'float' (binary64)
        epsilon: tolerance used by float-mode comparisons
    """

    def __init__(self, mode: str = EXACT, epsilon: float = DEFAULT_EPSILON):
        if mode not in MODES:
            raise ValueError(f"Unknown arithmetic mode: {mode}")
        self.mode = mode
        self.epsilon = epsilon if mode == FLOAT else 0
        logger.debug("number field: %s, epsilon %s", mode, self.epsilon)

    @property
    def exact(self) -> bool:
        return self.mode == EXACT

    def convert(self, value) -> ExtendedScalar:
        """Bring an int, Fraction, float or text value into this field"""
        if isinstance(value, str):
            value = parse_scalar(value)
        if is_infinite(value):
            return value
        if self.exact:
            return Fraction(value)
        return float(value)

    def zero(self) -> Scalar:
        return Fraction(0) if self.exact else 0.0

    def add(self, a: Scalar, b: Scalar) -> Scalar:
        return a + b

    def sub(self, a: Scalar, b: Scalar) -> Scalar:
        return a - b

    def mul(self, a: Scalar, b: Scalar) -> Scalar:
        return a * b

    def div(self, a: Scalar, b: Scalar) -> Scalar:
        DIVISIONS.record()
        return a / b

    def cmp(self, a: ExtendedScalar, b: ExtendedScalar) -> int:
        """
        Compare two values

        Returns:
            -1, 0 or 1; float mode treats |a - b| <= epsilon as equal
        """
        if is_infinite(a) or is_infinite(b) or self.exact:
            return (a > b) - (a < b)
        if abs(a - b) <= self.epsilon:
            return 0
        return 1 if a > b else -1

    def lt(self, a, b) -> bool:
        return self.cmp(a, b) < 0

    def gt(self, a, b) -> bool:
        return self.cmp(a, b) > 0

    def le(self, a, b) -> bool:
        return self.cmp(a, b) <= 0

    def ge(self, a, b) -> bool:
        return self.cmp(a, b) >= 0

    def eq(self, a, b) -> bool:
        return self.cmp(a, b) == 0

    def is_zero(self, a) -> bool:
        return self.cmp(a, 0) == 0

    def sign(self, a) -> int:
        return self.cmp(a, 0)

    def is_tighter(self, new: ExtendedScalar, old: ExtendedScalar, upper: bool) -> bool:
        """
        Strict-improvement test for bound tightening

        Exact mode needs any strict improvement, float mode an improvement
        larger than epsilon.
        """
        if is_infinite(new):
            return False
        if upper:
            return self.lt(new, old)
        return self.gt(new, old)


def parse_scalar(text: str) -> ExtendedScalar:
    """
    Parse the text encoding of a scalar

    Accepts "p/q", integers, decimals ("0.25", "1e-3") and "+inf"/"-inf"/"inf".
    Decimal text is read exactly, so "0.1" becomes 1/10.

    Raises:
        ValueError: if the text is not a scalar
    """
    if not isinstance(text, str):
        raise ValueError(f"Expected scalar text, got {type(text).__name__}")
    token = text.strip()
    lowered = token.lower()
    if lowered in ("inf", "+inf", "infinity", "+infinity"):
        return INF
    if lowered in ("-inf", "-infinity"):
        return NEG_INF
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"Invalid scalar: {text!r}") from exc


def format_scalar(value: ExtendedScalar) -> str:
    """Text encoding: "p/q" (q omitted when 1), shortest float repr, or +/-inf"""
    if is_infinite(value):
        return "+inf" if value > 0 else "-inf"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
