"""
Core ergoprobe - Exact Sequence Specs
Variants whose floors and fractional parts come from integer arithmetic only
"""
import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import mpmath
import sympy

from ..config import PrecisionPolicy
from ..exceptions import InvalidSequenceSpec
from ..numbers import fraction_floor, integer_root
from .base import FloorResult, SequenceSpec, as_fraction_scale


def root_frac(exact_part: Fraction, y: int, q: int, denom: int, negate: bool,
              tolerance_bits: int) -> Tuple[Fraction, Fraction]:
    """
    Fractional part of +-(exact_part + y**(1/q) / denom)

    Brackets the root with integer_root at 2**-bits resolution, refining until
    the bracket does not straddle an integer. A non-integral root is irrational,
    so the loop terminates.
    """
    bits = tolerance_bits + denom.bit_length()
    while True:
        scaled = y << (bits * q)
        r = integer_root(scaled, q)
        lo = exact_part + Fraction(r, denom << bits)
        if r ** q == scaled:
            value = -lo if negate else lo
            f = value - fraction_floor(value)
            return f, f
        hi = lo + Fraction(1, denom << bits)
        if negate:
            lo, hi = -hi, -lo
        base = fraction_floor(lo)
        if fraction_floor(hi) == base:
            return lo - base, hi - base
        bits *= 2


class RationalPower(SequenceSpec):
    """g(n) = n**(p/q), floors via integer_root(n**p, q)"""

    exact = True

    def __init__(self, p: int, q: int = 1):
        if q < 1:
            raise InvalidSequenceSpec(f"pow: denominator must be >= 1, got {q}")
        if p < 0:
            raise InvalidSequenceSpec(f"pow:{p}/{q} has g(n) < 1 for n >= 2")
        d = math.gcd(p, q) or 1
        self.p = p // d
        self.q = q // d

    def canonical(self) -> str:
        return f"pow:{self.p}/{self.q}" if self.q != 1 else f"pow:{self.p}"

    def floor(self, n: int, policy: PrecisionPolicy) -> FloorResult:
        self.check_index(n)
        value = integer_root(n ** self.p, self.q)
        return FloorResult(value, True, self.frac(n, Fraction(1), policy))

    def frac(self, n: int, scale, policy: PrecisionPolicy) -> Tuple[Fraction, Fraction]:
        self.check_index(n)
        scale = as_fraction_scale(scale)
        if scale == 0:
            return Fraction(0), Fraction(0)
        u = abs(scale.numerator)
        return root_frac(Fraction(0), u ** self.q * n ** self.p, self.q, scale.denominator,
                         scale < 0, policy.tolerance_bits)

    def real_value(self, x):
        return mpmath.power(x, mpmath.mpf(self.p) / self.q)

    def batch_floor(self, n_max: int, policy: PrecisionPolicy, progress=None) -> List[int]:
        p, q = self.p, self.q
        if q == 1:
            values = [n ** p for n in range(1, n_max + 1)]
        elif q == 2:
            isqrt = math.isqrt
            values = [isqrt(n ** p) for n in range(1, n_max + 1)]
        else:
            values = [integer_root(n ** p, q) for n in range(1, n_max + 1)]
        if progress is not None:
            progress.update(n_max)
        return values


class AffineSqrt(SequenceSpec):
    """g(n) = a*n + b*sqrt(n), floors as a*n + integer_root(b*b*n, 2)"""

    exact = True

    def __init__(self, a: int, b: int):
        if a < 0 or b < 0:
            raise InvalidSequenceSpec(f"affsqrt needs a, b >= 0, got {a}, {b}")
        if a + b < 1:
            raise InvalidSequenceSpec("affsqrt:0,0 has g(1) = 0 < 1")
        self.a = a
        self.b = b

    def canonical(self) -> str:
        return f"affsqrt:{self.a},{self.b}"

    def floor(self, n: int, policy: PrecisionPolicy) -> FloorResult:
        self.check_index(n)
        value = self.a * n + math.isqrt(self.b * self.b * n)
        return FloorResult(value, True, self.frac(n, Fraction(1), policy))

    def frac(self, n: int, scale, policy: PrecisionPolicy) -> Tuple[Fraction, Fraction]:
        self.check_index(n)
        scale = as_fraction_scale(scale)
        if scale == 0:
            return Fraction(0), Fraction(0)
        u, v = abs(scale.numerator), scale.denominator
        return root_frac(Fraction(u * self.a * n, v), u * u * self.b * self.b * n, 2, v,
                         scale < 0, policy.tolerance_bits)

    def real_value(self, x):
        return self.a * x + self.b * mpmath.sqrt(x)

    def batch_floor(self, n_max: int, policy: PrecisionPolicy, progress=None) -> List[int]:
        a, bb = self.a, self.b * self.b
        isqrt = math.isqrt
        values = [a * n + isqrt(bb * n) for n in range(1, n_max + 1)]
        if progress is not None:
            progress.update(n_max)
        return values


def first_index_below_one(coeffs: Sequence[Fraction]) -> Optional[int]:
    """
    Smallest integer n >= 1 with p(n) < 1, or None when p >= 1 on all of them

    p - 1 keeps one sign between consecutive real roots, so it is enough to test
    n = 1 and the first integers past each root. Roots come from exact isolating
    intervals of width below 1/2.
    """
    x = sympy.Symbol("x")
    shifted = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in coeffs], x) - 1
    candidates = {1}
    if shifted.degree() > 0:
        for (a, b), _ in shifted.intervals(eps=sympy.Rational(1, 2)):
            lo = math.floor(Fraction(int(a.p), int(a.q)))
            hi = math.ceil(Fraction(int(b.p), int(b.q)))
            candidates.update(range(max(1, lo), max(1, hi + 2)))
    for n in sorted(candidates):
        acc = Fraction(0)
        for c in coeffs:
            acc = acc * n + c
        if acc < 1:
            return n
    return None


class RationalPolynomial(SequenceSpec):
    """Polynomial with rational coefficients (highest degree first), evaluated exactly"""

    exact = True
    monotone = False

    def __init__(self, coeffs: Sequence[Fraction]):
        coeffs = [Fraction(c) for c in coeffs]
        while len(coeffs) > 1 and coeffs[0] == 0:
            coeffs.pop(0)
        if not coeffs:
            raise InvalidSequenceSpec("poly: needs at least one coefficient")
        if len(coeffs) > 1 and coeffs[0] < 0:
            raise InvalidSequenceSpec("poly: negative leading coefficient, g(n) < 1 eventually")
        self.coeffs = tuple(coeffs)
        bad = first_index_below_one(self.coeffs)
        if bad is not None:
            raise InvalidSequenceSpec(f"{self.canonical()} has g({bad}) = {self.value(bad)} < 1")

    def canonical(self) -> str:
        return "poly:" + ",".join(str(c) for c in self.coeffs)

    def value(self, n: int) -> Fraction:
        acc = Fraction(0)
        for c in self.coeffs:
            acc = acc * n + c
        return acc

    def floor(self, n: int, policy: PrecisionPolicy) -> FloorResult:
        self.check_index(n)
        v = self.value(n)
        base = fraction_floor(v)
        f = v - base
        return FloorResult(base, True, (f, f))

    def frac(self, n: int, scale, policy: PrecisionPolicy) -> Tuple[Fraction, Fraction]:
        self.check_index(n)
        v = as_fraction_scale(scale) * self.value(n)
        f = v - fraction_floor(v)
        return f, f

    def real_value(self, x):
        return mpmath.polyval([mpmath.mpf(c.numerator) / c.denominator for c in self.coeffs], x)

    def batch_floor(self, n_max: int, policy: PrecisionPolicy, progress=None) -> List[int]:
        values = [fraction_floor(self.value(n)) for n in range(1, n_max + 1)]
        if progress is not None:
            progress.update(n_max)
        return values
