"""
Core ergoprobe - Numbers
Exact integer roots, parsed high-precision constants and interval endpoint helpers
"""
import math
import re
from contextlib import contextmanager
from fractions import Fraction
from typing import Tuple, Union

import numpy as np
import sympy
from mpmath import iv, libmp
from sympy import integer_nthroot

from .exceptions import GrammarError

Rational = Union[int, Fraction]

_SQRT_ALIAS = re.compile(r"sqrt(\d+)")
_WORD_ALIASES = {
    r"\bphi\b": "GoldenRatio",
    r"\be\b": "E",
}


def integer_root(x: int, q: int) -> int:
    """
    Floor of the q-th root of a nonnegative integer

    Returns r with r**q <= x < (r+1)**q
    """
    if q < 1:
        raise ValueError(f"root degree must be >= 1, got {q}")
    if x < 0:
        raise ValueError(f"integer_root needs x >= 0, got {x}")
    if q == 1:
        return x
    if q == 2:
        return math.isqrt(x)
    root, _ = integer_nthroot(x, q)
    return int(root)


def to_fraction(value) -> Fraction:
    """Convert int / Fraction / decimal or p/q string to an exact Fraction"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as e:
            raise GrammarError(f"not a rational number: {value!r}") from e
    if isinstance(value, float):
        return Fraction(value)
    raise TypeError(f"cannot convert {type(value).__name__} to Fraction")


def fraction_floor(x: Fraction) -> int:
    return x.numerator // x.denominator


@contextmanager
def interval_precision(bits: int):
    """Run a block with iv.prec set to bits; the interval context has no workprec of its own"""
    saved = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = saved


def iv_from_fraction(x: Fraction):
    """Interval enclosing a rational exactly (outward rounded at current iv precision)"""
    text = f"{x.numerator}/{x.denominator}"
    return iv.mpf([text, text])


def iv_from_bounds(lo: Fraction, hi: Fraction):
    return iv.mpf([f"{lo.numerator}/{lo.denominator}", f"{hi.numerator}/{hi.denominator}"])


def iv_endpoints(x) -> Tuple[Fraction, Fraction]:
    """Exact rational endpoints of an mpmath interval"""
    a, b = x._mpi_
    try:
        lo = Fraction(*map(int, libmp.to_rational(a)))
        hi = Fraction(*map(int, libmp.to_rational(b)))
    except ValueError as e:
        raise ArithmeticError(f"unbounded interval {x}") from e
    return lo, hi


class HighPrecisionReal:
    """
    Real constant given as text ('sqrt2-1', '(sqrt5-1)/2', 'pi-3', '1.4142', '3/2')

    Rational inputs stay exact; irrational ones are evaluated with sympy to the
    requested precision and carry an explicit enclosure radius.
    """

    def __init__(self, text: str):
        self.text = text.strip()
        self.expr = self._parse(self.text)

    @staticmethod
    def _parse(text: str):
        if not text:
            raise GrammarError("empty constant")
        source = _SQRT_ALIAS.sub(r"sqrt(\1)", text)
        for pattern, repl in _WORD_ALIASES.items():
            source = re.sub(pattern, repl, source)
        source = source.replace("^", "**")
        try:
            expr = sympy.sympify(source, rational=True)
        except (sympy.SympifyError, SyntaxError, TypeError) as e:
            raise GrammarError(f"cannot parse constant {text!r}") from e
        if expr.free_symbols or expr.is_real is not True:
            raise GrammarError(f"constant {text!r} is not a real number")
        return expr

    @classmethod
    def of(cls, value) -> "HighPrecisionReal":
        if isinstance(value, HighPrecisionReal):
            return value
        if isinstance(value, Fraction):
            return cls(f"{value.numerator}/{value.denominator}")
        return cls(str(value))

    @property
    def is_rational(self) -> bool:
        return bool(self.expr.is_Rational)

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self.text} is not rational")
        return Fraction(int(self.expr.p), int(self.expr.q))

    def sign(self) -> int:
        if self.expr.is_zero:
            return 0
        return 1 if self.expr.is_positive else -1

    def enclosure(self, bits: int) -> Tuple[Fraction, Fraction]:
        """Rational bounds lo <= value <= hi with hi - lo about 2**-bits * max(1, |value|)"""
        if self.is_rational:
            f = self.as_fraction()
            return f, f
        digits = int(bits * 0.30103) + 12
        approx = sympy.Rational(sympy.N(self.expr, digits))
        mid = Fraction(int(approx.p), int(approx.q))
        radius = Fraction(1, 10 ** (digits - 6)) * max(1, abs(mid))
        return mid - radius, mid + radius

    def scaled_bounds(self, bits: int) -> Tuple[int, int]:
        """Integers lo <= value * 2**bits <= hi"""
        lo, hi = self.enclosure(bits + 8)
        scale = 1 << bits
        return fraction_floor(lo * scale), -fraction_floor(-hi * scale)

    def interval(self, bits: int):
        """mpmath interval enclosure (call inside interval_precision)"""
        lo, hi = self.enclosure(bits)
        return iv_from_bounds(lo, hi)

    def to_float(self) -> float:
        return float(sympy.N(self.expr, 30))

    def __repr__(self):
        return f"HighPrecisionReal({self.text!r})"

    def __str__(self):
        return self.text

    def __eq__(self, other):
        return isinstance(other, HighPrecisionReal) and self.expr == other.expr

    def __hash__(self):
        return hash(self.expr)


# float64 sqrt is within one unit of the true root below this bound
_FLOAT_ISQRT_LIMIT = 1 << 52


def integer_sqrt_array(x: np.ndarray) -> np.ndarray:
    """Elementwise exact floor(sqrt(x)) for a nonnegative int64 array"""
    x = np.asarray(x, dtype=np.int64)
    if x.size and (x.min() < 0 or x.max() >= _FLOAT_ISQRT_LIMIT):
        return np.array([math.isqrt(int(v)) for v in x], dtype=np.int64)
    r = np.floor(np.sqrt(x.astype(np.float64))).astype(np.int64)
    for _ in range(2):
        r -= (r * r > x)
        r += ((r + 1) * (r + 1) <= x)
    return r
