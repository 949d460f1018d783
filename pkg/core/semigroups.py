"""
Core ergoprobe - Semigroups
Exact arithmetic for (Z,+), (N,*), its group of quotients, the integer and
polynomial Heisenberg groups and finitary permutations
"""
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import zip_longest
from typing import ClassVar, Dict, FrozenSet, Iterable, List, Optional, Tuple

import sympy
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_add, gf_from_int_poly, gf_mul, gf_neg, gf_sub

from .config import default_prime_universe
from .exceptions import GrammarError, InvalidElement, NotAGroup, PrimeUniverseOverflow, TagMismatch


@lru_cache(maxsize=None)
def prime_universe(K: int) -> Tuple[int, ...]:
    """The first K primes"""
    if K < 1:
        raise ValueError(f"prime universe size must be >= 1, got {K}")
    return tuple(int(p) for p in sympy.primerange(2, sympy.prime(K) + 1))


def _trim(exponents: Iterable[int]) -> Tuple[int, ...]:
    exponents = [int(e) for e in exponents]
    while exponents and exponents[-1] == 0:
        exponents.pop()
    return tuple(exponents)


def _add_vectors(x: Tuple[int, ...], y: Tuple[int, ...]) -> Tuple[int, ...]:
    return _trim(a + b for a, b in zip_longest(x, y, fillvalue=0))


def _exponents_of(n: int, K: int) -> Tuple[int, ...]:
    primes = prime_universe(K)
    index = {p: i for i, p in enumerate(primes)}
    vector = [0] * K
    for p, e in sympy.factorint(n).items():
        if p not in index:
            raise PrimeUniverseOverflow(f"{n} has prime factor {p} outside the first {K} primes")
        vector[index[p]] = e
    return _trim(vector)


def _render_exponents(exponents: Tuple[int, ...]) -> str:
    primes = prime_universe(max(1, len(exponents)))
    parts = []
    for p, e in zip(primes, exponents):
        if e == 1:
            parts.append(str(p))
        elif e:
            parts.append(f"{p}^{e}")
    return "*".join(parts) or "1"


class SemigroupElement:
    """Common protocol of all element types"""

    tag: ClassVar[str] = ""
    is_group: ClassVar[bool] = True

    def same_structure(self, other: "SemigroupElement") -> bool:
        return type(self) is type(other)

    def mul(self, other):
        raise NotImplementedError

    def inverse(self):
        raise NotAGroup(f"{self.tag} has no inverses")

    def identity(self):
        raise NotImplementedError

    def key(self) -> tuple:
        raise NotImplementedError

    def text(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return f"{self.tag}:{self.text()}"


@dataclass(frozen=True)
class IntAdd(SemigroupElement):
    k: int

    tag: ClassVar[str] = "int"

    def mul(self, other):
        return IntAdd(self.k + other.k)

    def inverse(self):
        return IntAdd(-self.k)

    def identity(self):
        return IntAdd(0)

    def key(self):
        return (self.k,)

    def text(self):
        return str(self.k)


@dataclass(frozen=True)
class NatMul(SemigroupElement):
    """Positive integer as its exponent vector over the prime universe (trailing zeros trimmed)"""
    exponents: Tuple[int, ...] = ()

    tag: ClassVar[str] = "natmul"
    is_group: ClassVar[bool] = False

    def __post_init__(self):
        object.__setattr__(self, "exponents", _trim(self.exponents))
        if any(e < 0 for e in self.exponents):
            raise InvalidElement(f"natmul exponents must be >= 0, got {self.exponents}")

    @classmethod
    def from_int(cls, n: int, K: Optional[int] = None) -> "NatMul":
        if n < 1:
            raise InvalidElement(f"natmul needs a positive integer, got {n}")
        return cls(_exponents_of(n, K or default_prime_universe()))

    @property
    def value(self) -> int:
        result = 1
        for p, e in zip(prime_universe(max(1, len(self.exponents))), self.exponents):
            result *= p ** e
        return result

    def mul(self, other):
        return NatMul(_add_vectors(self.exponents, other.exponents))

    def identity(self):
        return NatMul()

    def to_qpos(self) -> "QPos":
        return QPos(self.exponents)

    def key(self):
        return (self.value,)

    def text(self):
        return _render_exponents(self.exponents)


@dataclass(frozen=True)
class QPos(SemigroupElement):
    """Positive rational as an integer exponent vector (group of quotients of (N,*))"""
    exponents: Tuple[int, ...] = ()

    tag: ClassVar[str] = "qpos"

    def __post_init__(self):
        object.__setattr__(self, "exponents", _trim(self.exponents))

    @classmethod
    def from_fraction(cls, x, K: Optional[int] = None) -> "QPos":
        x = Fraction(x)
        if x <= 0:
            raise InvalidElement(f"qpos needs a positive rational, got {x}")
        K = K or default_prime_universe()
        num = _exponents_of(x.numerator, K)
        den = _exponents_of(x.denominator, K)
        return cls(a - b for a, b in zip_longest(num, den, fillvalue=0))

    @property
    def value(self) -> Fraction:
        result = Fraction(1)
        for p, e in zip(prime_universe(max(1, len(self.exponents))), self.exponents):
            result *= Fraction(p) ** e
        return result

    def is_natural(self) -> bool:
        return all(e >= 0 for e in self.exponents)

    def to_natmul(self) -> NatMul:
        return NatMul(self.exponents)

    def mul(self, other):
        return QPos(_add_vectors(self.exponents, other.exponents))

    def inverse(self):
        return QPos(-e for e in self.exponents)

    def identity(self):
        return QPos()

    def key(self):
        return (self.value,)

    def text(self):
        return _render_exponents(self.exponents)


@dataclass(frozen=True)
class Heisenberg(SemigroupElement):
    """Upper unitriangular integer matrix [[1,a,c],[0,1,b],[0,0,1]] as (a, b, c)"""
    a: int
    b: int
    c: int

    tag: ClassVar[str] = "heis"

    def mul(self, other):
        return Heisenberg(self.a + other.a, self.b + other.b, self.c + self.a * other.b + other.c)

    def inverse(self):
        return Heisenberg(-self.a, -self.b, self.a * self.b - self.c)

    def identity(self):
        return Heisenberg(0, 0, 0)

    def key(self):
        return (self.a, self.b, self.c)

    def text(self):
        return f"({self.a},{self.b},{self.c})"


@dataclass(frozen=True)
class FinPerm(SemigroupElement):
    """Finitary permutation of N stored as its sorted non-fixed points (i, sigma(i))"""
    pairs: Tuple[Tuple[int, int], ...] = ()

    tag: ClassVar[str] = "perm"

    def __post_init__(self):
        mapping = {int(i): int(j) for i, j in self.pairs if i != j}
        if set(mapping) != set(mapping.values()) or any(i < 1 for i in mapping):
            raise InvalidElement(f"not a permutation of a finite subset of N: {self.pairs}")
        object.__setattr__(self, "pairs", tuple(sorted(mapping.items())))

    @classmethod
    def from_map(cls, mapping: Dict[int, int]) -> "FinPerm":
        return cls(tuple(mapping.items()))

    @classmethod
    def from_cycles(cls, cycles: Iterable[Iterable[int]]) -> "FinPerm":
        """Product of disjoint cycles, (1 2 3) sends 1 -> 2 -> 3 -> 1"""
        mapping: Dict[int, int] = {}
        for cycle in cycles:
            cycle = list(cycle)
            if len(set(cycle)) != len(cycle) or any(i in mapping for i in cycle):
                raise InvalidElement(f"cycles must be disjoint and repetition free: {cycle}")
            for i, j in zip(cycle, cycle[1:] + cycle[:1]):
                mapping[i] = j
        return cls.from_map(mapping)

    def __call__(self, i: int) -> int:
        return dict(self.pairs).get(i, i)

    @property
    def support(self) -> FrozenSet[int]:
        return frozenset(i for i, _ in self.pairs)

    def mul(self, other):
        # composition self o other
        points = self.support | other.support
        return FinPerm.from_map({i: self(other(i)) for i in points})

    def inverse(self):
        return FinPerm(tuple((j, i) for i, j in self.pairs))

    def identity(self):
        return FinPerm()

    def cycles(self) -> List[Tuple[int, ...]]:
        mapping = dict(self.pairs)
        seen = set()
        result = []
        for start in sorted(mapping):
            if start in seen:
                continue
            cycle = [start]
            seen.add(start)
            i = mapping[start]
            while i != start:
                cycle.append(i)
                seen.add(i)
                i = mapping[i]
            result.append(tuple(cycle))
        return result

    def key(self):
        return self.pairs

    def text(self):
        return "".join("(" + " ".join(str(i) for i in c) + ")" for c in self.cycles()) or "()"


def _gf(coeffs: Iterable[int], q: int) -> Tuple[int, ...]:
    return tuple(int(c) for c in gf_from_int_poly([int(c) for c in coeffs], q))


# galoistools works on lists and concatenates them, so operands are passed as lists
def _gf_add(a, b, q: int) -> List[int]:
    return gf_add(list(a), list(b), q, ZZ)


def _gf_sub(a, b, q: int) -> List[int]:
    return gf_sub(list(a), list(b), q, ZZ)


def _gf_mul(a, b, q: int) -> List[int]:
    return gf_mul(list(a), list(b), q, ZZ)


@dataclass(frozen=True)
class PolyHeis(SemigroupElement):
    """
    Heisenberg group over F_q[x]: (f, g, h) with coefficient tuples highest degree first

    Multiplication follows the integer law with polynomial products mod q.
    """
    q: int
    f: Tuple[int, ...] = ()
    g: Tuple[int, ...] = ()
    h: Tuple[int, ...] = ()

    tag: ClassVar[str] = "polyheis"

    def __post_init__(self):
        if not sympy.isprime(self.q):
            raise InvalidElement(f"polyheis needs a prime field size, got q={self.q}")
        for name in ("f", "g", "h"):
            object.__setattr__(self, name, _gf(getattr(self, name), self.q))

    def same_structure(self, other) -> bool:
        return type(other) is PolyHeis and other.q == self.q

    def mul(self, other):
        q = self.q
        h = _gf_add(_gf_add(self.h, _gf_mul(self.f, other.g, q), q), other.h, q)
        return PolyHeis(q, _gf_add(self.f, other.f, q), _gf_add(self.g, other.g, q), h)

    def inverse(self):
        q = self.q
        return PolyHeis(q, gf_neg(list(self.f), q, ZZ), gf_neg(list(self.g), q, ZZ),
                        _gf_sub(_gf_mul(self.f, self.g, q), self.h, q))

    def identity(self):
        return PolyHeis(self.q)

    def degrees(self) -> Tuple[int, int, int]:
        return tuple(len(p) - 1 for p in (self.f, self.g, self.h))

    def key(self):
        return (self.q, self.f, self.g, self.h)

    def text(self):
        x = sympy.Symbol("x")

        def render(coeffs):
            if not coeffs:
                return "0"
            return str(sympy.Poly(list(coeffs), x).as_expr()).replace("**", "^").replace(" ", "")

        return f"q={self.q};f={render(self.f)};g={render(self.g)};h={render(self.h)}"


# --- operations ---

def _check_same(x: SemigroupElement, y: SemigroupElement) -> None:
    if not x.same_structure(y):
        raise TagMismatch(f"cannot combine {x} with {y}")


def mul(x: SemigroupElement, y: SemigroupElement) -> SemigroupElement:
    _check_same(x, y)
    return x.mul(y)


def inv(x: SemigroupElement) -> SemigroupElement:
    if not x.is_group:
        raise NotAGroup(f"{x.tag} is a semigroup without inverses")
    return x.inverse()


def identity_of(x: SemigroupElement) -> SemigroupElement:
    return x.identity()


def _common_reference(*sets: Iterable[SemigroupElement]) -> List[List[SemigroupElement]]:
    lists = [list(s) for s in sets]
    everything = [e for lst in lists for e in lst]
    for e in everything[1:]:
        _check_same(everything[0], e)
    return lists


def left_quotient_set(A: Iterable[SemigroupElement],
                      B: Iterable[SemigroupElement]) -> FrozenSet[SemigroupElement]:
    """
    A^{-1}B

    Groups: {a^{-1} b}. (N,*): {h : a h in B for some a in A}, h natural.
    """
    A, B = _common_reference(A, B)
    if not A or not B:
        return frozenset()
    if A[0].is_group:
        return frozenset(mul(inv(a), b) for a in A for b in B)
    result = set()
    for a in A:
        for b in B:
            diff = [y - x for x, y in zip_longest(a.exponents, b.exponents, fillvalue=0)]
            if all(d >= 0 for d in diff):
                result.add(NatMul(diff))
    return frozenset(result)


def right_translate_quotient(A: Iterable[SemigroupElement], B: Iterable[SemigroupElement],
                             g: SemigroupElement) -> FrozenSet[SemigroupElement]:
    """A^{-1}(B g)"""
    A, B = _common_reference(A, B, [g])[:2]
    return left_quotient_set(A, [mul(b, g) for b in B])


def clear_denominators(F: Iterable[QPos]) -> NatMul:
    """Least natural g with F g inside N: per prime, max(0, -min exponent)"""
    F = list(F)
    for x in F:
        if not isinstance(x, QPos):
            raise TagMismatch(f"clear_denominators expects qpos elements, got {x}")
    width = max((len(x.exponents) for x in F), default=0)
    return NatMul(max([0] + [-x.exponents[i] for x in F if i < len(x.exponents)])
                  for i in range(width))


def sorted_elements(elements: Iterable[SemigroupElement]) -> List[SemigroupElement]:
    return sorted(elements, key=lambda e: e.key())


# --- text forms ---

_HEIS = re.compile(r"^\(\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\)$")
_CYCLE = re.compile(r"\(([^()]*)\)")


def _parse_product(body: str, allow_negative: bool, K: int) -> Tuple[int, ...]:
    if "/" in body:
        num, _, den = body.partition("/")
        return QPos.from_fraction(Fraction(int(num), int(den)), K).exponents
    primes = prime_universe(K)
    index = {p: i for i, p in enumerate(primes)}
    vector = [0] * K
    for factor in body.replace(" ", "").split("*"):
        base, _, exp = factor.partition("^")
        base, exp = int(base), int(exp or 1)
        if exp < 0 and not allow_negative:
            raise InvalidElement(f"negative exponent in natmul {body!r}")
        if base == 1:
            continue
        if base in index:
            vector[index[base]] += exp
        else:
            for p, e in _exponents_of_pairs(base, K, index):
                vector[p] += e * exp
    return _trim(vector)


def _exponents_of_pairs(n: int, K: int, index: Dict[int, int]):
    for p, e in sympy.factorint(n).items():
        if p not in index:
            raise PrimeUniverseOverflow(f"{n} has prime factor {p} outside the first {K} primes")
        yield index[p], e


def _parse_poly(text: str, q: int) -> Tuple[int, ...]:
    x = sympy.Symbol("x")
    try:
        expr = sympy.sympify(text.replace("^", "**"), locals={"x": x})
        coeffs = sympy.Poly(expr, x).all_coeffs()
    except (sympy.SympifyError, sympy.PolynomialError, SyntaxError, TypeError) as e:
        raise GrammarError(f"bad polynomial {text!r}") from e
    if any(not c.is_Integer for c in coeffs):
        raise GrammarError(f"polynomial {text!r} needs integer coefficients")
    return _gf([int(c) for c in coeffs], q)


def parse_element(text: str, K: Optional[int] = None) -> SemigroupElement:
    """
    Parse the textual element forms

    int:5, natmul:2^3*3*5, natmul:120, qpos:3/4, qpos:2^-2*3,
    heis:(1,0,2), perm:(1 2 3)(4 5), polyheis:q=2;f=x+1;g=x;h=x^2
    """
    tag, sep, body = text.strip().partition(":")
    if not sep:
        raise GrammarError(f"element {text!r} lacks a tag prefix")
    K = K or default_prime_universe()
    try:
        if tag == "int":
            return IntAdd(int(body))
        if tag == "natmul":
            return NatMul(_parse_product(body, False, K))
        if tag == "qpos":
            return QPos(_parse_product(body, True, K))
        if tag == "heis":
            match = _HEIS.match(body.strip())
            if not match:
                raise GrammarError(f"heis element must look like (a,b,c), got {body!r}")
            return Heisenberg(*(int(g) for g in match.groups()))
        if tag == "perm":
            cycles = [[int(i) for i in c.split()] for c in _CYCLE.findall(body)]
            return FinPerm.from_cycles(c for c in cycles if c)
        if tag == "polyheis":
            fields = dict(part.split("=", 1) for part in body.split(";") if part.strip())
            q = int(fields.pop("q", 2))
            if not sympy.isprime(q):
                raise InvalidElement(f"polyheis needs a prime q, got {q}")
            return PolyHeis(q, *(_parse_poly(fields.get(k, "0"), q) for k in ("f", "g", "h")))
    except ValueError as e:
        if isinstance(e, (GrammarError, InvalidElement, PrimeUniverseOverflow)):
            raise
        raise GrammarError(f"bad element {text!r}: {e}") from e
    raise GrammarError(f"unknown element tag {tag!r}")


def format_element(x: SemigroupElement) -> str:
    return str(x)
