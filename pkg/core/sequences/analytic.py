"""
Core ergoprobe - Analytic Sequence Specs
Transcendental variants evaluated with mpmath interval arithmetic at increasing precision
"""
import logging
import math
from abc import abstractmethod
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import mpmath
from mpmath import iv

from ..config import PrecisionPolicy
from ..exceptions import InvalidSequenceSpec, PrecisionExhausted
from ..numbers import HighPrecisionReal, fraction_floor, interval_precision, iv_endpoints
from .base import FloorResult, SequenceSpec, as_fraction_scale

logger = logging.getLogger(__name__)

# extra working bits on top of the policy precision for the interval kernels
GUARD_BITS = 16
# coefficient precision and index range of the g(n) >= 1 check for real polynomials
POSITIVITY_BITS = 128
POSITIVITY_SCAN_LIMIT = 10 ** 5


class AnalyticSpec(SequenceSpec):
    """Base for variants without an integer path"""

    # g(n) := max(1, expression) so that g maps into [1, inf)
    clamped: bool = False

    @abstractmethod
    def _enclose(self, n: int, bits: int):
        """Interval enclosure of the raw expression at n (inside interval_precision)"""
        pass

    def _bounds(self, n: int, scale: Fraction, bits: int) -> Tuple[Fraction, Fraction]:
        with interval_precision(bits + GUARD_BITS):
            x = self._enclose(n, bits)
            lo, hi = iv_endpoints(x)
            if self.clamped:
                if hi < 1:
                    lo = hi = Fraction(1)
                elif lo < 1:
                    # straddles the clamp; widen so the caller escalates
                    lo = min(lo, Fraction(0))
            if scale != 1:
                lo, hi = sorted((lo * scale, hi * scale))
        return lo, hi

    def _certify(self, n: int, scale: Fraction, policy: PrecisionPolicy) -> Tuple[int, Fraction, Fraction]:
        tolerance = Fraction(1, 1 << policy.tolerance_bits)
        lo = hi = None
        for bits in policy.schedule():
            lo, hi = self._bounds(n, scale, bits)
            base = fraction_floor(lo)
            if fraction_floor(hi) == base and hi - lo <= tolerance:
                return base, lo - base, hi - base
            logger.debug("%s at n=%d: [%s, %s] ambiguous at %d bits", self.canonical(), n,
                         float(lo), float(hi), bits)
        base = fraction_floor(lo)
        result = FloorResult(base, False, (max(Fraction(0), lo - base), min(Fraction(1), hi - base)))
        logger.warning("%s: floor at n=%d not certified within %d bits", self.canonical(), n,
                       policy.cap_bits)
        raise PrecisionExhausted(
            f"{self.canonical()} at n={n}: value in [{float(lo)}, {float(hi)}] straddles an "
            f"integer at the {policy.cap_bits}-bit cap", result)

    def floor(self, n: int, policy: PrecisionPolicy) -> FloorResult:
        self.check_index(n)
        value, flo, fhi = self._certify(n, Fraction(1), policy)
        return FloorResult(value, True, (flo, fhi))

    def frac(self, n: int, scale, policy: PrecisionPolicy) -> Tuple[Fraction, Fraction]:
        self.check_index(n)
        _, flo, fhi = self._certify(n, as_fraction_scale(scale), policy)
        return flo, fhi

    def real_value(self, x):
        return max(mpmath.mpf(1), self._real(x)) if self.clamped else self._real(x)

    @abstractmethod
    def _real(self, x):
        pass


class RealPower(AnalyticSpec):
    """g(n) = n**c for a real constant c > 0"""

    def __init__(self, c):
        self.c = HighPrecisionReal.of(c)
        if self.c.sign() <= 0:
            raise InvalidSequenceSpec(f"pow:{self.c} needs c > 0 (g(n) < 1 otherwise)")

    def canonical(self) -> str:
        return f"pow:{self.c}"

    def _enclose(self, n: int, bits: int):
        if n == 1:
            return iv.mpf(1)
        return iv.exp(self.c.interval(bits + GUARD_BITS) * iv.log(n))

    def _real(self, x):
        return mpmath.power(x, mpmath.mpf(str(self.c.expr.evalf(mpmath.mp.dps + 5))))


class NLogN(AnalyticSpec):
    """g(n) = max(1, n log n)"""

    clamped = True

    def canonical(self) -> str:
        return "nlogn"

    def _enclose(self, n: int, bits: int):
        return n * iv.log(n)

    def _real(self, x):
        return x * mpmath.log(x)


class NSqOverLog(AnalyticSpec):
    """g(n) = max(1, n**2 / log n), with g(1) = 1"""

    clamped = True

    def canonical(self) -> str:
        return "nsqlog"

    def _enclose(self, n: int, bits: int):
        if n == 1:
            return iv.mpf(1)
        return iv.mpf(n * n) / iv.log(n)

    def _real(self, x):
        return x * x / mpmath.log(x)


class LogPower(AnalyticSpec):
    """g(n) = max(1, (log n)**t) for real t > 1"""

    clamped = True

    def __init__(self, t):
        self.t = HighPrecisionReal.of(t)
        if self.t.enclosure(64)[0] <= 1:
            raise InvalidSequenceSpec(f"logpow:{self.t} needs t > 1")

    def canonical(self) -> str:
        return f"logpow:{self.t}"

    def _enclose(self, n: int, bits: int):
        if n == 1:
            return iv.mpf(0)
        return iv.exp(self.t.interval(bits + GUARD_BITS) * iv.log(iv.log(n)))

    def _real(self, x):
        return mpmath.power(mpmath.log(x), mpmath.mpf(str(self.t.expr.evalf(mpmath.mp.dps + 5))))


class RealPolynomial(AnalyticSpec):
    """Polynomial with real coefficients, highest degree first"""

    monotone = False

    def __init__(self, coeffs: Sequence):
        coeffs = [HighPrecisionReal.of(c) for c in coeffs]
        while len(coeffs) > 1 and coeffs[0].sign() == 0:
            coeffs.pop(0)
        if not coeffs:
            raise InvalidSequenceSpec("poly: needs at least one coefficient")
        if len(coeffs) > 1 and coeffs[0].sign() < 0:
            raise InvalidSequenceSpec("poly: negative leading coefficient, g(n) < 1 eventually")
        self.coeffs = tuple(coeffs)
        bad = self._first_index_below_one()
        if bad is not None:
            raise InvalidSequenceSpec(f"{self.canonical()} has g({bad}) < 1")

    def _first_index_below_one(self) -> Optional[int]:
        """
        Scan n = 1..R for a certified value below 1, R the Cauchy root bound of p - 1

        Values whose enclosure straddles 1 are accepted.
        """
        bounds = [c.enclosure(POSITIVITY_BITS) for c in self.coeffs]
        lo, hi = bounds[-1]
        bounds[-1] = (lo - 1, hi - 1)
        if len(bounds) > 1:
            lead = bounds[0][0]
            height = max(max(abs(lo), abs(hi)) for lo, hi in bounds[1:])
            limit = math.ceil(1 + height / lead)
        else:
            limit = 1
        if limit > POSITIVITY_SCAN_LIMIT:
            raise InvalidSequenceSpec(
                f"{self.canonical()}: cannot certify g(n) >= 1 below the root bound {limit}")
        for n in range(1, limit + 1):
            acc_lo = acc_hi = Fraction(0)
            for c_lo, c_hi in bounds:
                acc_lo, acc_hi = acc_lo * n + c_lo, acc_hi * n + c_hi
            if acc_hi < 0:
                return n
        return None

    def canonical(self) -> str:
        return "poly:" + ",".join(str(c) for c in self.coeffs)

    def _enclose(self, n: int, bits: int):
        acc = iv.mpf(0)
        for c in self.coeffs:
            acc = acc * n + c.interval(bits + GUARD_BITS + 2 * n.bit_length() * len(self.coeffs))
        return acc

    def _real(self, x):
        dps = mpmath.mp.dps + 5
        return mpmath.polyval([mpmath.mpf(str(c.expr.evalf(dps))) for c in self.coeffs], x)


