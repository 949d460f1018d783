"""
Core ergoprobe - Dynamics
Circle and cyclic rotations, their finite products, certified orbit averages
and exact-formula recurrence averages along [g(n)]
"""
import bisect
import logging
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from .config import PrecisionPolicy
from .equidistribution import PHASE_BITS
from .exceptions import BoundaryAmbiguous, GrammarError
from .numbers import HighPrecisionReal, fraction_floor, to_fraction

logger = logging.getLogger(__name__)

# extra fractional bits beyond the bit length of a_n
GUARD_BITS = 8


@dataclass(frozen=True)
class Arc:
    """Half-open arc [start, start + length) of R/Z"""
    start: Fraction
    length: Fraction

    def pieces(self) -> List[Tuple[Fraction, Fraction]]:
        """Non-wrapping half-open pieces [lo, hi) inside [0, 1)"""
        if self.length >= 1:
            return [(Fraction(0), Fraction(1))]
        end = self.start + self.length
        if end <= 1:
            return [(self.start, end)]
        return [(self.start, Fraction(1)), (Fraction(0), end - 1)]


class IndicatorObservable:
    """
    Indicator of a finite union of half-open arcs (circle) or of a residue set (cyclic)

    Arcs are normalized to disjoint sorted pieces of [0, 1).
    """

    def __init__(self, arcs: Iterable[Arc] = (), residues: Optional[Iterable[int]] = None):
        self.arcs = tuple(arcs)
        self.residues: Optional[FrozenSet[int]] = None if residues is None else frozenset(residues)
        if self.residues is not None and self.arcs:
            raise ValueError("an observable is either arcs or residues, not both")
        pieces = sorted(p for arc in self.arcs for p in arc.pieces())
        for (_, hi), (lo, _) in zip(pieces, pieces[1:]):
            if lo < hi:
                raise ValueError(f"arcs overlap: {self.arcs}")
        for arc in self.arcs:
            if not (0 <= arc.start < 1 and 0 < arc.length <= 1):
                raise ValueError(f"arc needs start in [0,1) and length in (0,1], got {arc}")
        self.pieces = pieces
        self._starts = [lo for lo, _ in pieces]
        self._edges = sorted({e for piece in pieces for e in piece})

    @classmethod
    def arc(cls, start, length) -> "IndicatorObservable":
        return cls([Arc(to_fraction(start), to_fraction(length))])

    @classmethod
    def residue_set(cls, residues: Iterable[int]) -> "IndicatorObservable":
        return cls(residues=residues)

    @property
    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.pieces), Fraction(0))

    def contains_point(self, x: Fraction) -> bool:
        """Exact membership of x in [0, 1)"""
        i = bisect.bisect_right(self._starts, x) - 1
        return i >= 0 and x < self.pieces[i][1]

    def edges(self) -> List[Fraction]:
        return self._edges

    def single_arc_length(self) -> Fraction:
        if len(self.arcs) != 1:
            raise ValueError("recurrence measures need a single arc")
        return self.arcs[0].length

    def __repr__(self):
        if self.residues is not None:
            return f"IndicatorObservable(residues={sorted(self.residues)})"
        return f"IndicatorObservable({[(str(a.start), str(a.length)) for a in self.arcs]})"


class RotationSystem:
    """Base class of the measure-preserving rotations"""

    def prepare(self, x0):
        """Normalize a start point once before an orbit is walked"""
        return x0

    def membership(self, x0, a: int, obs, bits: int) -> Optional[bool]:
        """1_obs(T^a x0) or None when the precision is not enough to decide"""
        raise NotImplementedError

    def overlap(self, obs, values: Sequence[int]) -> np.ndarray:
        """mu(A cap T^{a_n} A) for each a_n"""
        raise NotImplementedError


class Circle(RotationSystem):
    """x -> x + alpha on R/Z"""

    def __init__(self, alpha):
        self.alpha = HighPrecisionReal.of(alpha)
        self._scaled: Dict[int, Tuple[int, int]] = {}
        self._points: Dict[Tuple[HighPrecisionReal, int], Tuple[int, int]] = {}
        self._edges: Dict[tuple, List[Fraction]] = {}

    def __repr__(self):
        return f"Circle(alpha={self.alpha})"

    def _alpha_bounds(self, P: int) -> Tuple[int, int]:
        bounds = self._scaled.get(P)
        if bounds is None:
            bounds = self.alpha.scaled_bounds(P)
            self._scaled[P] = bounds
        return bounds

    def prepare(self, x0):
        return HighPrecisionReal.of(x0)

    def _point_bounds(self, x0: HighPrecisionReal, P: int) -> Tuple[int, int]:
        bounds = self._points.get((x0, P))
        if bounds is None:
            bounds = x0.scaled_bounds(P)
            self._points[(x0, P)] = bounds
        return bounds

    def _scaled_edges(self, obs, P: int) -> List[Fraction]:
        key = (tuple(obs.edges()), P)
        edges = self._edges.get(key)
        if edges is None:
            scale = 1 << P
            edges = [e * scale for edge in obs.edges() for e in (edge, edge + 1)]
            self._edges[key] = edges
        return edges

    def membership(self, x0, a, obs, bits):
        x0 = self.prepare(x0)
        if self.alpha.is_rational and x0.is_rational:
            point = x0.as_fraction() + a * self.alpha.as_fraction()
            return obs.contains_point(point - fraction_floor(point))
        P = bits + abs(a).bit_length() + GUARD_BITS
        scale = 1 << P
        lo_a, hi_a = self._alpha_bounds(P)
        lo_x, hi_x = self._point_bounds(x0, P)
        if a >= 0:
            lo, hi = a * lo_a + lo_x, a * hi_a + hi_x
        else:
            lo, hi = a * hi_a + lo_x, a * lo_a + hi_x
        base = lo // scale
        lo, hi = lo - base * scale, hi - base * scale
        # hi may reach past 1 when the enclosure straddles 0
        if any(lo <= e <= hi for e in self._scaled_edges(obs, P)):
            return None
        return obs.contains_point(Fraction(lo, scale))

    def overlap(self, obs, values):
        terms, denominator, _ = exact_recurrence_terms(self.alpha, obs.single_arc_length(), values)
        return np.array([t / denominator for t in terms], dtype=np.float64)


class Cyclic(RotationSystem):
    """x -> x + 1 on Z/mZ"""

    def __init__(self, m: int):
        if m < 1:
            raise ValueError(f"cyclic rotation needs m >= 1, got {m}")
        self.m = m

    def __repr__(self):
        return f"Cyclic(m={self.m})"

    def check(self, obs) -> None:
        if obs.residues is None or any(not 0 <= r < self.m for r in obs.residues):
            raise ValueError(f"cyclic observables need residues in [0, {self.m}), got {obs}")

    def prepare(self, x0):
        return int(x0)

    def membership(self, x0, a, obs, bits):
        self.check(obs)
        return (int(x0) + a) % self.m in obs.residues

    def overlap(self, obs, values):
        self.check(obs)
        A = np.zeros(self.m, dtype=bool)
        A[sorted(obs.residues)] = True
        table = np.array([np.count_nonzero(A & np.roll(A, -r)) for r in range(self.m)]) / self.m
        return table[np.asarray(values, dtype=np.int64) % self.m]


class Product(RotationSystem):
    """Finite product of rotations acting coordinatewise"""

    def __init__(self, factors: Sequence[RotationSystem]):
        if not factors:
            raise ValueError("a product system needs at least one factor")
        self.factors = tuple(factors)

    def __repr__(self):
        return f"Product({list(self.factors)})"

    def prepare(self, x0):
        if len(x0) != len(self.factors):
            raise ValueError(f"start point needs {len(self.factors)} coordinates, got {x0}")
        return tuple(f.prepare(x) for f, x in zip(self.factors, x0))

    def membership(self, x0, a, obs, bits):
        states = [f.membership(x, a, o, bits) for f, x, o in zip(self.factors, x0, obs)]
        if any(s is False for s in states):
            return False
        return None if any(s is None for s in states) else True

    def overlap(self, obs, values):
        terms = np.ones(len(values))
        for f, o in zip(self.factors, obs):
            terms = terms * f.overlap(o, values)
        return terms


@dataclass
class OrbitAverage:
    average: float
    average_exact: Fraction
    N: int
    boundary_failures: int
    strict: bool


@dataclass
class RecurrenceAverage:
    average: float
    N: int
    beta_squared: float
    min_term: float
    max_term: float
    average_exact: Optional[Fraction] = None
    # every term lies within this radius of its value at the true rotation number
    error_bound: Optional[Fraction] = None


def orbit_average(system: RotationSystem, x0, obs, values: Sequence[int],
                  policy: Optional[PrecisionPolicy] = None, strict: bool = True,
                  progress: bool = False) -> OrbitAverage:
    """
    (1/N) sum_n 1_obs(T^{a_n} x0) with certified membership

    Each orbit point is enclosed at increasing precision until it is clear of
    every arc endpoint. strict raises BoundaryAmbiguous for a point that stays
    ambiguous at the cap; otherwise the term is left out and counted.
    """
    policy = policy or PrecisionPolicy()
    N = len(values)
    if N < 1:
        raise ValueError("orbit_average needs at least one value")
    x0 = system.prepare(x0)
    hits = 0
    failures = 0
    schedule = list(policy.schedule())
    for n, a in enumerate(tqdm(values, file=sys.stderr, disable=not progress, desc="orbit",
                               leave=False), 1):
        state = None
        for bits in schedule:
            state = system.membership(x0, int(a), obs, bits)
            if state is not None:
                break
            logger.debug("orbit point n=%d ambiguous at %d bits", n, bits)
        if state is None:
            if strict:
                raise BoundaryAmbiguous(f"T^{a} x0 (n={n}) is within 2^-{policy.cap_bits} "
                                        "of an arc endpoint")
            failures += 1
            continue
        hits += state
    decided = N - failures
    if failures:
        logger.warning("%d of %d orbit terms left out as boundary-ambiguous", failures, N)
    exact = Fraction(hits, decided) if decided else Fraction(0)
    return OrbitAverage(float(exact), exact, N, failures, strict)


def recurrence_term(theta, beta, one=1):
    """
    mu([0, beta) cap ([0, beta) + theta)) = max(0, beta - theta) + max(0, theta + beta - 1)

    theta in [0, 1); one rescales the unit so integer numerators work too.
    """
    return max(0, beta - theta) + max(0, theta + beta - one)


def _arc_length(beta) -> Fraction:
    # floats are read through their shortest repr so 0.3 means 3/10
    return Fraction(repr(beta)) if isinstance(beta, float) else to_fraction(beta)


def exact_recurrence_terms(alpha, beta, values: Sequence[int],
                           bits: int = PHASE_BITS) -> Tuple[List[int], int, Fraction]:
    """
    Overlap terms mu(A cap T^{a_n} A) as integer numerators over a common denominator

    theta_n = t_n / 2**P comes from the lower P-bit fixed-point image of alpha, so
    each term is exact at that phase. The overlap formula is 1-Lipschitz in theta,
    hence every term is within the returned radius of its value at the true alpha.

    Returns:
        (numerators, denominator, radius)
    """
    alpha = HighPrecisionReal.of(alpha)
    beta = _arc_length(beta)
    largest = max((abs(int(v)) for v in values), default=1)
    P = bits + largest.bit_length() + GUARD_BITS
    lo, hi = alpha.scaled_bounds(P)
    mask = (1 << P) - 1
    p, q = beta.numerator, beta.denominator
    one = q << P
    b = p << P
    terms = [recurrence_term(q * ((lo * int(a)) & mask), b, one) for a in values]
    return terms, one, Fraction(largest * (hi - lo), 1 << P)


def recurrence_average(system: Circle, beta, values: Sequence[int]) -> RecurrenceAverage:
    """(1/N) sum_n mu(A cap T^{a_n} A) for A an arc of length beta"""
    beta = _arc_length(beta)
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    if not isinstance(system, Circle):
        raise TypeError("recurrence_average is defined for circle rotations")
    if len(values) < 1:
        raise ValueError("recurrence_average needs at least one value")
    terms, denominator, radius = exact_recurrence_terms(system.alpha, beta, values)
    exact = Fraction(sum(terms), denominator * len(values))
    return RecurrenceAverage(float(exact), len(values), float(beta * beta),
                             min(terms) / denominator, max(terms) / denominator, exact, radius)


def product_recurrence(factors: Sequence[Tuple[RotationSystem, IndicatorObservable]],
                       values: Sequence[int]) -> RecurrenceAverage:
    """(1/N) sum_n prod_j mu_j(A_j cap T_j^{a_n} A_j) for the product set A_1 x ... x A_k"""
    if not factors:
        raise ValueError("product_recurrence needs at least one factor")
    if len(values) < 1:
        raise ValueError("product_recurrence needs at least one value")
    system = Product([f for f, _ in factors])
    terms = system.overlap([o for _, o in factors], values)
    mu = math.prod(float(o.measure) if o.residues is None else len(o.residues) / f.m
                   for f, o in factors)
    return RecurrenceAverage(float(terms.mean()), len(values), mu * mu,
                             float(terms.min()), float(terms.max()))


# --- text forms ---

def parse_system(text: str) -> RotationSystem:
    """'circle:alpha=sqrt2-1', 'cyclic:m=4', or factors joined by '|'"""
    parts = [p.strip() for p in text.split("|")]
    if len(parts) > 1:
        return Product([parse_system(p) for p in parts])
    kind, _, body = text.strip().partition(":")
    key, _, value = body.partition("=")
    if kind == "circle" and key == "alpha" and value:
        return Circle(value)
    if kind == "cyclic" and key == "m" and value:
        try:
            return Cyclic(int(value))
        except ValueError as e:
            raise GrammarError(f"bad cyclic modulus {value!r}") from e
    raise GrammarError(f"unknown system {text!r} (expected circle:alpha=..., cyclic:m=...)")


def parse_observable(text: str) -> Union[IndicatorObservable, List[IndicatorObservable]]:
    """
    'arc:0,1/2' (start, length), 'arc:0,1/4;1/2,1/4', 'residues:0,2',
    or one observable per product factor joined by '|'
    """
    parts = [p.strip() for p in text.split("|")]
    if len(parts) > 1:
        return [parse_observable(p) for p in parts]
    kind, _, body = text.strip().partition(":")
    try:
        if kind == "arc":
            arcs = []
            for piece in body.split(";"):
                start, length = piece.split(",")
                arcs.append(Arc(to_fraction(start), to_fraction(length)))
            return IndicatorObservable(arcs)
        if kind == "residues":
            return IndicatorObservable.residue_set(int(r) for r in body.split(",") if r.strip())
    except ValueError as e:
        raise GrammarError(f"bad observable {text!r}: {e}") from e
    raise GrammarError(f"unknown observable {text!r} (expected arc:s,len or residues:...)")


def check_observable(system: RotationSystem, obs) -> None:
    """Match the observable shape to the system: arcs on circles, residues on cyclic
    rotations, one observable per factor on products"""
    if isinstance(system, Product):
        if not isinstance(obs, list) or len(obs) != len(system.factors):
            raise GrammarError(f"{system} needs {len(system.factors)} observables joined by '|'")
        for factor, o in zip(system.factors, obs):
            check_observable(factor, o)
        return
    if isinstance(obs, list):
        raise GrammarError(f"{system} takes a single observable, got {len(obs)}")
    if isinstance(system, Circle) and obs.residues is not None:
        raise GrammarError(f"{system} needs an arc observable, got {obs}")
    if isinstance(system, Cyclic):
        system.check(obs)
