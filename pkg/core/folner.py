"""
Core ergoprobe - Folner Families
Interval, multiplicative box, Heisenberg box and subgroup-chain families with
Folner defects and temperedness ratios, by closed form and by enumeration
"""
import itertools
import logging
import math
import sys
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np
import sympy
from tqdm import tqdm

from .config import DEFAULT_ENUMERATION_CAP, default_prime_universe
from .exceptions import (EnumerationTooLarge, GrammarError, NotDivergent, NotNondecreasing,
                         PrimeUniverseOverflow, TagMismatch)
from .numbers import integer_root
from .semigroups import (FinPerm, Heisenberg, IntAdd, NatMul, PolyHeis, QPos, SemigroupElement,
                         inv, left_quotient_set, mul)

logger = logging.getLogger(__name__)

GROUP = "group"
SEMIGROUP = "semigroup"
CLOSED_FORM = "closed-form"
ENUMERATION = "enumeration"

_N = sympy.Symbol("n", integer=True, positive=True)


# --- integer-valued expressions in n ---

def parse_expression(text: str) -> sympy.Expr:
    """Expression in n such as 'n^2+n', '2^(2^n)', 'n^n'"""
    try:
        expr = sympy.sympify(str(text).replace("^", "**"), locals={"n": _N})
    except (sympy.SympifyError, SyntaxError, TypeError) as e:
        raise GrammarError(f"cannot parse expression {text!r}") from e
    if not expr.free_symbols <= {_N}:
        raise GrammarError(f"expression {text!r} may only use the variable n")
    return expr


def integer_sequence(expr: sympy.Expr) -> Callable[[int], int]:
    """k -> floor(expr(k)), exact; polynomials with rational coefficients use Horner on Fractions"""
    if expr.is_polynomial(_N):
        coeffs = sympy.Poly(expr, _N).all_coeffs()
        if all(c.is_Rational for c in coeffs):
            exact = [Fraction(int(c.p), int(c.q)) for c in coeffs]

            def horner(k: int) -> int:
                acc = Fraction(0)
                for c in exact:
                    acc = acc * k + c
                return math.floor(acc)

            return horner
    return lambda k: int(sympy.floor(expr.subs(_N, k)))


def _render(expr: sympy.Expr) -> str:
    return str(expr).replace("**", "^").replace(" ", "")


# --- reports ---

@dataclass
class TemperedRatio:
    n: int
    mode: str
    value: Fraction
    method: str
    nested: bool
    bound: Optional[Fraction] = None
    note: str = ""

    @property
    def approx(self) -> float:
        return float(self.value)


@dataclass
class TemperednessReport:
    family: str
    mode: str
    n_range: Tuple[int, int]
    ratios: List[float]
    sup: float
    C_candidate: float
    first_violation: Optional[int]
    verdict: str
    method: str
    closed_form_bound: Optional[float] = None
    note: str = "finite scan; boundedness beyond the range is not certified"


@dataclass
class CriterionReport:
    f: str
    n_max: int
    values: List[float]
    C: float
    C_exact: Fraction
    argmax: int
    trend: str
    implied_bound: float


@dataclass
class HeisenbergCount:
    n: int
    count: int
    cardinality: int
    bound_count: int
    bound_ratio: Fraction
    ratio: Fraction
    method: str
    closed_form_count: Optional[int] = None


# --- families ---

class FolnerFamily(ABC):
    """
    Base class for all Folner families

    members(n) is lazy and memoized; the cache is guarded by a lock so that
    scans over disjoint indices can share one family instance.
    """

    def __init__(self):
        self._members: Dict[int, FrozenSet[SemigroupElement]] = {}
        self._lock = threading.Lock()

    @abstractmethod
    def canonical(self) -> str:
        pass

    @abstractmethod
    def identity(self) -> SemigroupElement:
        pass

    @abstractmethod
    def cardinality(self, n: int) -> int:
        pass

    @abstractmethod
    def contains(self, x: SemigroupElement, n: int) -> bool:
        pass

    @abstractmethod
    def _generate(self, n: int) -> Iterable[SemigroupElement]:
        pass

    def is_nested(self, n: int) -> bool:
        """F_1 <= ... <= F_n for this instance"""
        return True

    def accepts(self, g: SemigroupElement) -> bool:
        return self.identity().same_structure(g)

    def check_index(self, n: int) -> None:
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"family index must be an integer >= 1, got {n!r}")

    def members(self, n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> FrozenSet[SemigroupElement]:
        self.check_index(n)
        size = self.cardinality(n)
        if size > cap:
            raise EnumerationTooLarge(f"|F_{n}| = {size} exceeds the enumeration cap {cap}")
        with self._lock:
            cached = self._members.get(n)
        if cached is None:
            cached = frozenset(self._generate(n))
            with self._lock:
                cached = self._members.setdefault(n, cached)
        return cached

    def defect_closed_form(self, g: SemigroupElement, n: int) -> Optional[Fraction]:
        return None

    def quotient_closed_form(self, n: int, mode: str, g: Optional[SemigroupElement]) -> Optional[Fraction]:
        return None

    def quotient_bound(self, n: int) -> Optional[Fraction]:
        return None

    def quotient_enumerated(self, n: int, mode: str, g: Optional[SemigroupElement],
                            cap: int) -> Tuple[Fraction, str]:
        """|union_{k<n} F_k^{-1}(F_n g)| / |F_n| from the element sets"""
        previous = [n - 1] if self.is_nested(n) else list(range(1, n))
        target = list(self.members(n, cap))
        if g is not None:
            target = [mul(x, g) for x in target]
        union = set()
        for k in previous:
            A = self.members(k, cap)
            if len(A) * len(target) > cap:
                raise EnumerationTooLarge(
                    f"{len(A)} x {len(target)} products exceed the enumeration cap {cap}")
            union |= left_quotient_set(A, target)
        return Fraction(len(union), len(target)), ""

    def __str__(self):
        return self.canonical()

    def __repr__(self):
        return f"{type(self).__name__}({self.canonical()!r})"


class IntervalFamily(FolnerFamily):
    """F_n = [a_n, b_n] in (Z,+), with a_n, b_n integer expressions in n"""

    def __init__(self, a="1", b="n"):
        super().__init__()
        self.a_expr = a if isinstance(a, sympy.Expr) else parse_expression(a)
        self.b_expr = b if isinstance(b, sympy.Expr) else parse_expression(b)
        self._a = integer_sequence(self.a_expr)
        self._b = integer_sequence(self.b_expr)
        self._bounds: Dict[int, Tuple[int, int]] = {}

    @classmethod
    def initial(cls) -> "IntervalFamily":
        return cls("1", "n")

    def canonical(self) -> str:
        return f"interval:a={_render(self.a_expr)},b={_render(self.b_expr)}"

    def identity(self):
        return IntAdd(0)

    def bounds(self, n: int) -> Tuple[int, int]:
        cached = self._bounds.get(n)
        if cached is None:
            self.check_index(n)
            cached = (self._a(n), self._b(n))
            if cached[0] > cached[1]:
                raise ValueError(f"{self.canonical()}: empty interval at n={n}: {cached}")
            self._bounds[n] = cached
        return cached

    def cardinality(self, n: int) -> int:
        a, b = self.bounds(n)
        return b - a + 1

    def contains(self, x, n: int) -> bool:
        a, b = self.bounds(n)
        return a <= x.k <= b

    def _generate(self, n: int):
        a, b = self.bounds(n)
        return (IntAdd(k) for k in range(a, b + 1))

    def is_nested(self, n: int) -> bool:
        return all(self.bounds(k + 1)[0] <= self.bounds(k)[0] and self.bounds(k)[1] <= self.bounds(k + 1)[1]
                   for k in range(1, n))

    def defect_closed_form(self, g, n: int) -> Fraction:
        size = self.cardinality(n)
        return Fraction(max(0, size - abs(g.k)), size)

    def _difference_intervals(self, n: int, mode: str, shift: int) -> List[Tuple[int, int]]:
        a_n, b_n = self.bounds(n)
        ks = [n - 1] if self.is_nested(n) else range(1, n)
        pieces = []
        for k in ks:
            a_k, b_k = self.bounds(k)
            lo, hi = a_n + shift - b_k, b_n + shift - a_k
            if mode == SEMIGROUP:
                lo = max(lo, 0)
            if lo <= hi:
                pieces.append((lo, hi))
        return pieces

    def quotient_closed_form(self, n, mode, g):
        shift = g.k if g is not None else 0
        if mode == SEMIGROUP and shift < 0:
            raise ValueError("semigroup translates in (N,+) must be >= 0")
        merged: List[List[int]] = []
        for lo, hi in sorted(self._difference_intervals(n, mode, shift)):
            if merged and lo <= merged[-1][1] + 1:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return Fraction(sum(hi - lo + 1 for lo, hi in merged), self.cardinality(n))

    def quotient_bound(self, n):
        return Fraction(2) if self.is_nested(n) else None

    def quotient_enumerated(self, n, mode, g, cap):
        a_n, b_n = self.bounds(n)
        shift = g.k if g is not None else 0
        ks = [n - 1] if self.is_nested(n) else range(1, n)
        diffs = set()
        for k in ks:
            a_k, b_k = self.bounds(k)
            if (b_k - a_k + 1) * (b_n - a_n + 1) > cap:
                raise EnumerationTooLarge(f"interval products at n={n} exceed the cap {cap}")
            for y in range(a_n + shift, b_n + shift + 1):
                diffs.update(y - x for x in range(a_k, b_k + 1))
        if mode == SEMIGROUP:
            diffs = {d for d in diffs if d >= 0}
        return Fraction(len(diffs), self.cardinality(n)), ""


class BoxFamily(FolnerFamily):
    """
    F_n = {p_1^c_1 ... p_n^c_n : 0 <= c_i <= B_i(n)} in (N,*)

    Group-mode quotients are taken in the positive rationals; every quotient of
    two boxes is again a box, which gives the closed forms.
    """

    @abstractmethod
    def exponent_bound(self, i: int, n: int) -> int:
        """B_i(n), coordinate i >= 1"""
        pass

    def bounds(self, n: int) -> List[int]:
        return [self.exponent_bound(i, n) for i in range(1, n + 1)]

    def identity(self):
        return NatMul()

    def accepts(self, g) -> bool:
        return isinstance(g, (NatMul, QPos))

    def cardinality(self, n: int) -> int:
        return math.prod(B + 1 for B in self.bounds(n))

    def contains(self, x, n: int) -> bool:
        e = x.exponents
        return len(e) <= n and all(0 <= c <= self.exponent_bound(i, n) for i, c in enumerate(e, 1))

    def _generate(self, n: int):
        if n > default_prime_universe():
            raise PrimeUniverseOverflow(f"F_{n} needs {n} primes, the universe has "
                                        f"{default_prime_universe()}")
        ranges = [range(B + 1) for B in self.bounds(n)]
        return (NatMul(c) for c in itertools.product(*ranges))

    def is_nested(self, n: int) -> bool:
        return all(self.exponent_bound(i, k) <= self.exponent_bound(i, k + 1)
                   for k in range(1, n) for i in range(1, k + 1))

    def defect_closed_form(self, g, n: int) -> Fraction:
        bounds = self.bounds(n)
        if len(g.exponents) > n and any(g.exponents[n:]):
            return Fraction(0)
        num = den = 1
        for B, r in itertools.zip_longest(bounds, g.exponents[:n], fillvalue=0):
            num *= max(0, B + 1 - abs(r))
            den *= B + 1
        return Fraction(num, den)

    def _coordinate_ranges(self, n: int, mode: str, g) -> List[Tuple[List[int], List[int], int]]:
        """Per coordinate: (exponents of F_{n-1}, exponents of F_n, translate exponent)"""
        exps = g.exponents if g is not None else ()
        width = max(n, len(exps))
        rows = []
        for i in range(1, width + 1):
            prev_hi = self.exponent_bound(i, n - 1) if i <= n - 1 else 0
            hi = self.exponent_bound(i, n) if i <= n else 0
            shift = exps[i - 1] if i <= len(exps) else 0
            rows.append((prev_hi, hi, shift))
        return rows

    def quotient_closed_form(self, n, mode, g):
        if not self.is_nested(n):
            return None
        if mode == SEMIGROUP and g is not None and not isinstance(g, NatMul):
            raise TagMismatch("semigroup translates of (N,*) families must be natmul")
        size = 1
        for prev_hi, hi, shift in self._coordinate_ranges(n, mode, g):
            lo, top = shift - prev_hi, hi + shift
            if mode == SEMIGROUP:
                lo = max(lo, 0)
            size *= max(0, top - lo + 1)
        return Fraction(size, self.cardinality(n))

    def quotient_enumerated(self, n, mode, g, cap):
        if n > 1 and self.is_nested(n) and self.cardinality(n - 1) * self.cardinality(n) > cap:
            return self._coordinatewise(n, mode, g), "coordinatewise brute force (Cartesian box)"
        if mode == GROUP:
            lift = QPos
            translate = QPos(g.exponents) if g is not None else None
        else:
            lift = NatMul
            translate = g
        previous = [n - 1] if self.is_nested(n) else list(range(1, n))
        target = [lift(x.exponents) for x in self.members(n, cap)]
        if translate is not None:
            target = [mul(x, translate) for x in target]
        union = set()
        for k in previous:
            A = [lift(x.exponents) for x in self.members(k, cap)]
            if len(A) * len(target) > cap:
                raise EnumerationTooLarge(f"{len(A)} x {len(target)} products exceed the cap {cap}")
            union |= left_quotient_set(A, target)
        return Fraction(len(union), len(target)), ""

    def _coordinatewise(self, n, mode, g) -> Fraction:
        size = 1
        for prev_hi, hi, shift in self._coordinate_ranges(n, mode, g):
            values = {y + shift - x for x in range(prev_hi + 1) for y in range(hi + 1)}
            if mode == SEMIGROUP:
                values = {v for v in values if v >= 0}
            size *= len(values)
        return Fraction(size, self.cardinality(n))


class MultBoxSquaredPower(BoxFamily):
    """B_i(n) = (i+1)^(2n)"""

    def canonical(self):
        return "multbox:paper"

    def exponent_bound(self, i, n):
        return (i + 1) ** (2 * n)

    def quotient_bound(self, n):
        return math.prod((1 + Fraction(1, (i + 1) ** 2) for i in range(1, n)), start=Fraction(1))


class MultBoxF(BoxFamily):
    """B_i(n) = f(n) for every coordinate, f nondecreasing"""

    def __init__(self, f="n^n"):
        super().__init__()
        self.f_expr = f if isinstance(f, sympy.Expr) else parse_expression(f)
        self._f = integer_sequence(self.f_expr)
        self._values: Dict[int, int] = {}

    def canonical(self):
        return f"multbox:f={_render(self.f_expr)}"

    def f(self, n: int) -> int:
        value = self._values.get(n)
        if value is None:
            value = self._f(n)
            if value < 0:
                raise ValueError(f"f({n}) = {value} < 0")
            self._values[n] = value
        return value

    def exponent_bound(self, i, n):
        return self.f(n)


class MultBoxEps(BoxFamily):
    """B_i(n) = floor((i+1)^((1+eps) n)), eps > 0 rational"""

    def __init__(self, eps="1/2"):
        super().__init__()
        self.eps = Fraction(str(eps))
        if self.eps <= 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")

    def canonical(self):
        return f"multbox:eps={self.eps}"

    def exponent_bound(self, i, n):
        power = (1 + self.eps) * n
        return integer_root((i + 1) ** power.numerator, power.denominator)


class MultBoxLinear(BoxFamily):
    """B_i(n) = (i+1)^n, the non-tempered companion of the eps family"""

    def canonical(self):
        return "multbox:linear"

    def exponent_bound(self, i, n):
        return (i + 1) ** n


def _heis_occupancy(previous: List[Tuple[int, int]], p: int, q: int) -> int:
    """|union_k F_k^{-1} F_n| for Heisenberg boxes by enumerating every product into a dense grid"""
    R = p + max(pk for pk, _ in previous)
    Zmax = q + max(qk + pk * pk + p * pk for pk, qk in previous)
    side, depth = 2 * R + 1, 2 * Zmax + 1
    occupied = np.zeros(side * side * depth, dtype=bool)
    A, B, C = (m.ravel() for m in np.meshgrid(np.arange(-p, p + 1), np.arange(-p, p + 1),
                                              np.arange(-q, q + 1), indexing="ij"))
    for pk, qk in previous:
        zs = np.arange(-qk, qk + 1, dtype=np.int64)
        for xk in range(-pk, pk + 1):
            for yk in range(-pk, pk + 1):
                # inverses of (xk, yk, z) for all z
                x, y = -xk, -yk
                z_inv = xk * yk - zs
                column = ((x + A + R) * side + (y + B + R)) * depth + (x * B + C + Zmax)
                occupied[(column[None, :] + z_inv[:, None]).ravel()] = True
    return int(np.count_nonzero(occupied))


def heis_quotient_closed(p_prev: int, q_prev: int, p: int, q: int) -> int:
    """
    |F_{n-1}^{-1} F_n| for nested Heisenberg boxes

    For fixed (X, Y) the third coordinates form the union of the intervals
    [xY - W, xY + W] over the admissible x, W = q_prev + q.
    """
    R = p + p_prev
    L = 2 * (q_prev + q) + 1
    spans = [min(p_prev, x + p) - max(-p_prev, x - p) for x in range(-R, R + 1)]
    column_growth = sum(min(abs(y), L) for y in range(-R, R + 1))
    return int((2 * R + 1) ** 2 * L + column_growth * sum(spans))


class HeisBoxPoly(FolnerFamily):
    """F_n = {(a, b, c) : |a|, |b| <= p(n), |c| <= q(n)} in the integer Heisenberg group"""

    def __init__(self, p="n", q="n^2"):
        super().__init__()
        self.p_expr = p if isinstance(p, sympy.Expr) else parse_expression(p)
        self.q_expr = q if isinstance(q, sympy.Expr) else parse_expression(q)
        self._p = integer_sequence(self.p_expr)
        self._q = integer_sequence(self.q_expr)

    def canonical(self):
        return f"heisbox:p={_render(self.p_expr)},q={_render(self.q_expr)}"

    def sizes(self, n: int) -> Tuple[int, int]:
        self.check_index(n)
        p, q = self._p(n), self._q(n)
        if p < 0 or q < 0:
            raise ValueError(f"{self.canonical()}: negative box size at n={n}")
        return p, q

    def identity(self):
        return Heisenberg(0, 0, 0)

    def cardinality(self, n):
        p, q = self.sizes(n)
        return (2 * p + 1) ** 2 * (2 * q + 1)

    def contains(self, x, n):
        p, q = self.sizes(n)
        return abs(x.a) <= p and abs(x.b) <= p and abs(x.c) <= q

    def _generate(self, n):
        p, q = self.sizes(n)
        return (Heisenberg(a, b, c) for a in range(-p, p + 1) for b in range(-p, p + 1)
                for c in range(-q, q + 1))

    def is_nested(self, n):
        return all(self.sizes(k)[0] <= self.sizes(k + 1)[0] and self.sizes(k)[1] <= self.sizes(k + 1)[1]
                   for k in range(1, n))

    def quotient_count_closed(self, n: int) -> Optional[int]:
        if not self.is_nested(n):
            return None
        return heis_quotient_closed(*self.sizes(n - 1), *self.sizes(n))

    def quotient_closed_form(self, n, mode, g):
        count = self.quotient_count_closed(n)
        return None if count is None else Fraction(count, self.cardinality(n))

    def bound_count(self, n: int) -> int:
        """Product of the coordinate ranges of F_{n-1}^{-1} F_n"""
        p_prev, q_prev = self.sizes(n - 1)
        p, q = self.sizes(n)
        return (2 * (p + p_prev) + 1) ** 2 * (2 * (q_prev + p_prev * p_prev) + 2 * p * p_prev + 2 * q + 1)

    def quotient_bound(self, n):
        return Fraction(self.bound_count(n), self.cardinality(n))

    def enumerated_count(self, n: int, cap: int) -> int:
        previous = [n - 1] if self.is_nested(n) else list(range(1, n))
        products = sum(self.cardinality(k) for k in previous) * self.cardinality(n)
        if products > cap:
            raise EnumerationTooLarge(f"{products} Heisenberg products exceed the cap {cap}")
        return _heis_occupancy([self.sizes(k) for k in previous], *self.sizes(n))

    def quotient_enumerated(self, n, mode, g, cap):
        # |A^{-1} B g| = |A^{-1} B| in a group
        return Fraction(self.enumerated_count(n, cap), self.cardinality(n)), ""


class HeisBox(HeisBoxPoly):
    """p(n) = n, q(n) = n^2"""

    def __init__(self):
        super().__init__("n", "n^2")

    def canonical(self):
        return "heisbox"


class SymChain(FolnerFamily):
    """F_n = S_n, the permutations of {1..n} inside the finitary permutations"""

    def canonical(self):
        return "chain:sym"

    def identity(self):
        return FinPerm()

    def cardinality(self, n):
        self.check_index(n)
        return math.factorial(n)

    def contains(self, x, n):
        return all(1 <= i <= n for i in x.support)

    def _generate(self, n):
        base = list(range(1, n + 1))
        return (FinPerm.from_map(dict(zip(base, perm))) for perm in itertools.permutations(base))

    def defect_closed_form(self, g, n):
        # g S_n is S_n or a disjoint coset
        return Fraction(1) if self.contains(g, n) else Fraction(0)

    def quotient_closed_form(self, n, mode, g):
        return Fraction(1)


class PolyHeisChain(FolnerFamily):
    """F_n = {(f, g, h) : deg f, deg g <= n, deg h <= 2n} over F_q[x], an increasing chain of subgroups"""

    def __init__(self, q: int = 2):
        super().__init__()
        if not sympy.isprime(q):
            raise ValueError(f"field size must be prime, got {q}")
        self.q = q

    def canonical(self):
        return f"chain:polyheis:q={self.q}"

    def identity(self):
        return PolyHeis(self.q)

    def cardinality(self, n):
        self.check_index(n)
        return self.q ** (4 * n + 3)

    def contains(self, x, n):
        df, dg, dh = x.degrees()
        return x.q == self.q and df <= n and dg <= n and dh <= 2 * n

    def _generate(self, n):
        field_elems = range(self.q)
        for f in itertools.product(field_elems, repeat=n + 1):
            for g in itertools.product(field_elems, repeat=n + 1):
                for h in itertools.product(field_elems, repeat=2 * n + 1):
                    yield PolyHeis(self.q, f, g, h)

    def defect_closed_form(self, g, n):
        return Fraction(1) if self.contains(g, n) else Fraction(0)

    def quotient_closed_form(self, n, mode, g):
        return Fraction(1)


def parse_family(text: str) -> FolnerFamily:
    """
    Family grammar

    interval, interval:a=n^2,b=n^2+n, multbox:paper, multbox:f=n^n, multbox:eps=1/2,
    multbox:linear, heisbox, heisbox:p=n,q=n^2, chain:sym, chain:polyheis:q=2
    """
    kind, _, body = text.strip().partition(":")
    fields = {}
    if kind in ("interval", "heisbox") and body:
        try:
            fields = dict(part.split("=", 1) for part in body.split(","))
        except ValueError as e:
            raise GrammarError(f"bad family arguments {body!r}") from e
    if kind == "interval":
        return IntervalFamily(fields.get("a", "1"), fields.get("b", "n"))
    if kind == "heisbox":
        return HeisBox() if not fields else HeisBoxPoly(fields.get("p", "n"), fields.get("q", "n^2"))
    if kind == "multbox":
        name, _, value = body.partition("=")
        if name == "paper":
            return MultBoxSquaredPower()
        if name == "linear":
            return MultBoxLinear()
        if name == "f" and value:
            return MultBoxF(value)
        if name == "eps" and value:
            return MultBoxEps(value)
    if kind == "chain":
        if body == "sym":
            return SymChain()
        if body.startswith("polyheis"):
            _, _, q = body.partition(":q=")
            return PolyHeisChain(int(q or 2))
    raise GrammarError(f"unknown family {text!r}")


# --- operations ---

def _resolve(family) -> FolnerFamily:
    return family if isinstance(family, FolnerFamily) else parse_family(family)


def folner_defect(family, g: SemigroupElement, n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> Fraction:
    """|F_n cap g F_n| / |F_n| (closed form when available, else enumeration)"""
    family = _resolve(family)
    family.check_index(n)
    if not family.accepts(g):
        raise TagMismatch(f"{g} does not act on {family.canonical()}")
    closed = family.defect_closed_form(g, n)
    if closed is not None:
        return closed
    g_inv = inv(g)
    members = family.members(n, cap)
    # x in g F_n iff g^{-1} x in F_n
    hits = sum(1 for x in members if family.contains(mul(g_inv, x), n))
    return Fraction(hits, len(members))


def tempered_ratio(family, n: int, mode: str = GROUP, g: Optional[SemigroupElement] = None,
                   method: Optional[str] = None, cap: int = DEFAULT_ENUMERATION_CAP) -> TemperedRatio:
    """
    |union_{k<n} F_k^{-1} F_n| / |F_n| (group) or with F_n g (semigroup)

    For families verified nested up to n the union is F_{n-1}^{-1} F_n.
    method None prefers the closed form and falls back to enumeration.
    """
    family = _resolve(family)
    family.check_index(n)
    if n < 2:
        raise ValueError(f"tempered_ratio needs n >= 2, got {n}")
    if mode not in (GROUP, SEMIGROUP):
        raise ValueError(f"mode must be 'group' or 'semigroup', got {mode!r}")
    if g is not None and not family.accepts(g):
        raise TagMismatch(f"{g} does not act on {family.canonical()}")
    nested = family.is_nested(n)
    bound = family.quotient_bound(n)
    if method in (None, CLOSED_FORM):
        closed = family.quotient_closed_form(n, mode, g)
        if closed is not None:
            return TemperedRatio(n, mode, closed, CLOSED_FORM, nested, bound)
        if method == CLOSED_FORM:
            raise ValueError(f"{family.canonical()} has no closed form at n={n}")
    elif method != ENUMERATION:
        raise ValueError(f"unknown method {method!r}")
    value, note = family.quotient_enumerated(n, mode, g, cap)
    return TemperedRatio(n, mode, value, ENUMERATION, nested, bound, note)


def temperedness_scan(family, n_max: int, C_candidate: float, mode: str = GROUP,
                      g: Optional[SemigroupElement] = None, cap: int = DEFAULT_ENUMERATION_CAP,
                      progress: bool = False) -> TemperednessReport:
    """Ratios for n = 2..n_max against C_candidate; reports the first violation if any"""
    family = _resolve(family)
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    C = Fraction(str(C_candidate))
    ratios = []
    methods = set()
    first_violation = None
    bound = None
    for n in tqdm(range(2, n_max + 1), file=sys.stderr, disable=not progress,
                  desc=family.canonical(), leave=False):
        result = tempered_ratio(family, n, mode, g, cap=cap)
        ratios.append(float(result.value))
        methods.add(result.method)
        if result.bound is not None:
            bound = result.bound if bound is None else max(bound, result.bound)
        if first_violation is None and result.value > C:
            first_violation = n
            logger.info("%s: ratio %.6g exceeds %s at n=%d", family.canonical(),
                        float(result.value), C_candidate, n)
    verdict = (f"bounded by {C_candidate} so far" if first_violation is None
               else f"violated at n={first_violation}")
    return TemperednessReport(family.canonical(), mode, (2, n_max), ratios, max(ratios),
                              float(C), first_violation, verdict, "+".join(sorted(methods)),
                              None if bound is None else float(bound))


def criterion_5_3(f, n_max: int) -> CriterionReport:
    """
    n f(n) / f(n+1) for n = 1..n_max, the boundedness test for the f-box family

    f must be nondecreasing and not constant on the second half of the range.
    The trend is 'growing' when the last value is at least 1.5 times the value
    at n_max/2, otherwise 'bounded'.
    """
    expr = f if isinstance(f, sympy.Expr) else parse_expression(f)
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    evaluate = integer_sequence(expr)
    values_f = [evaluate(n) for n in range(1, n_max + 2)]
    for n, (x, y) in enumerate(zip(values_f, values_f[1:]), 1):
        if y < x:
            raise NotNondecreasing(f"f({n + 1}) = {y} < f({n}) = {x}")
    if values_f[0] <= 0:
        raise ValueError(f"f(1) = {values_f[0]} must be positive")
    if values_f[-1] == values_f[(n_max + 1) // 2]:
        raise NotDivergent(f"f is constant from n={(n_max + 1) // 2 + 1} to {n_max + 1}")

    exact = [Fraction(n * values_f[n - 1], values_f[n]) for n in range(1, n_max + 1)]
    C_exact = max(exact)
    argmax = exact.index(C_exact) + 1
    mid = exact[n_max // 2 - 1]
    trend = "growing" if exact[-1] >= Fraction(3, 2) * mid else "bounded"
    return CriterionReport(_render(expr), n_max, [float(v) for v in exact], float(C_exact), C_exact,
                           argmax, trend, math.exp(float(C_exact) + 1))


def heisenberg_quotient_count(n: int, cap: int = DEFAULT_ENUMERATION_CAP,
                              family: Optional[HeisBoxPoly] = None) -> HeisenbergCount:
    """
    Exact |F_{n-1}^{-1} F_n| by enumerating all pairwise products, with |F_n| and
    the coordinate-range bound; the structural closed form is attached as a cross-check
    """
    family = family or HeisBox()
    if n < 2:
        raise ValueError(f"heisenberg_quotient_count needs n >= 2, got {n}")
    count = family.enumerated_count(n, cap)
    size = family.cardinality(n)
    bound = family.bound_count(n)
    closed = family.quotient_count_closed(n)
    if closed is not None and closed != count:
        logger.error("Heisenberg count mismatch at n=%d: enumeration %d, closed form %d", n, count, closed)
    return HeisenbergCount(n, count, size, bound, Fraction(bound, size), Fraction(count, size),
                           ENUMERATION, closed)
