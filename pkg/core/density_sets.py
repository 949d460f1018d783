"""
Core ergoprobe - Density Sets
Windowed densities along Folner families, the Delta-sets, gap/run statistics,
the two worked examples on [g(n)] and translate-cover search
"""
import logging
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from .config import PrecisionPolicy, Thresholds
from .exceptions import CoverNotFound, DensityError, FamilyExceedsWindow, GapNotFound
from .numbers import integer_sqrt_array
from .sequences import RationalPower, SequenceSpec, floor_eval, floor_values, parse_sequence_spec
from .windowed import DOMAIN_N, DOMAIN_Z, WindowedSet

logger = logging.getLogger(__name__)

# np.correlate is quadratic; above this length the FFT path is used
CORRELATE_LIMIT = 4096
# chunk size of the vectorized example scans
SCAN_CHUNK = 1 << 20


@dataclass
class DensityEstimate:
    family: str
    ratios: List[Fraction]
    tail_start: int
    running_max_tail: Fraction
    running_min_tail: Fraction
    note: str = "finite-horizon ratios; tail extrema stand in for limsup/liminf"

    @property
    def n_max(self) -> int:
        return len(self.ratios)

    @property
    def final(self) -> Fraction:
        return self.ratios[-1]


@dataclass
class GapRunStats:
    horizon: int
    members: int
    max_gap: int
    max_run: int
    gap_histogram: Dict[int, int]
    first_gap_of_length: Dict[int, int]


@dataclass
class ExampleScan:
    horizon: int
    members: int
    violations: int
    first_violations: List[int] = field(default_factory=list)


@dataclass
class GapWitness:
    run_length: int
    M: int
    search_bound: int
    floors: List[int]
    verified: bool


@dataclass
class CoverCertificate:
    translates: List[int]
    covered_interval: Tuple[int, int]
    ell: int
    greedy_ell: int
    lower_bound: int


# --- densities ---

def _initial_intervals():
    from .folner import IntervalFamily
    return IntervalFamily.initial()


def _largest_fitting_index(S: WindowedSet, family) -> int:
    """Last index whose interval fits the window, at most the window size (bounded families never leave it)"""
    limit = S.bits.size
    for n in range(1, limit + 1):
        lo, hi = family.bounds(n)
        if not (S.in_window(lo) and S.in_window(hi)):
            return n - 1
    logger.info("%s stays inside the window; stopping at index %d", family, limit)
    return limit


def windowed_density(S: WindowedSet, family=None, n_max: Optional[int] = None,
                     thresholds: Optional[Thresholds] = None) -> DensityEstimate:
    """
    Exact ratios |S cap F_n| / |F_n| for n = 1..n_max

    Args:
        S: windowed set
        family: Folner family of integers (default: initial intervals {1..n})
        n_max: last family index (default: largest index whose set fits the window)
        thresholds: supplies the tail fraction
    """
    family = family if family is not None else _initial_intervals()
    thresholds = thresholds or Thresholds()
    if n_max is None:
        n_max = _largest_fitting_index(S, family) if hasattr(family, "bounds") else S.horizon
    if n_max < 1:
        raise FamilyExceedsWindow(f"{family} has no set inside the window of horizon {S.horizon}")

    prefix = np.concatenate(([0], np.cumsum(S.bits, dtype=np.int64)))
    ratios = []
    for n in range(1, n_max + 1):
        if hasattr(family, "bounds"):
            lo, hi = family.bounds(n)
            if not (S.in_window(lo) and S.in_window(hi)):
                raise FamilyExceedsWindow(
                    f"F_{n} = [{lo}, {hi}] leaves the window [{S.lo}, {S.hi}]")
            count = int(prefix[S.index(hi) + 1] - prefix[S.index(lo)])
            size = hi - lo + 1
        else:
            members = list(family.members(n))
            if any(not S.in_window(m) for m in members):
                raise FamilyExceedsWindow(f"F_{n} leaves the window [{S.lo}, {S.hi}]")
            count = sum(1 for m in members if m in S)
            size = len(members)
        ratios.append(Fraction(count, size))

    tail_start = n_max - math.ceil(thresholds.tail_fraction * n_max) + 1
    tail = ratios[tail_start - 1:]
    return DensityEstimate(str(family), ratios, tail_start, max(tail), min(tail))


def intersection_density(S: WindowedSet, shifts: Iterable[int], family=None,
                         n_max: Optional[int] = None,
                         thresholds: Optional[Thresholds] = None) -> DensityEstimate:
    """Density estimate of S cap (S - s_1) cap ... cap (S - s_k) on the common window"""
    shifts = sorted(set(int(s) for s in shifts))
    if S.domain != DOMAIN_N:
        raise ValueError("intersection_density is defined for N windows")
    if any(s < 0 for s in shifts):
        raise ValueError(f"shifts must be >= 0, got {shifts}")
    top = max(shifts, default=0)
    if top >= S.horizon:
        raise FamilyExceedsWindow(f"shift {top} does not fit the window of horizon {S.horizon}")
    width = S.horizon - top
    bits = S.bits[:width].copy()
    for s in shifts:
        bits &= S.bits[s:s + width]
    return windowed_density(WindowedSet(DOMAIN_N, width, bits), family, n_max, thresholds)


# --- Delta sets ---

def _autocorrelation(x: np.ndarray) -> np.ndarray:
    """c[k] = sum_i x[i] x[i + k] for lags -(L-1)..(L-1)"""
    L = x.size
    if L <= CORRELATE_LIMIT:
        return np.correlate(x, x, mode="full")
    size = 1 << (2 * L - 1).bit_length()
    spectrum = np.fft.rfft(x.astype(np.float64), size)
    c = np.rint(np.fft.irfft(spectrum * np.conj(spectrum), size)).astype(np.int64)
    return np.concatenate((c[size - (L - 1):], c[:L]))


def delta1(S: WindowedSet) -> WindowedSet:
    """
    {a - b : a, b in S} by bitset autocorrelation

    An N window of horizon N yields a Z window of horizon N; a Z window of
    horizon N yields a Z window of horizon 2N. The result is symmetric.
    """
    L = S.bits.size
    H = S.horizon if S.domain == DOMAIN_N else 2 * S.horizon
    out = np.zeros(2 * H + 1, dtype=bool)
    if L:
        c = _autocorrelation(S.bits.astype(np.int64))
        out[H - (L - 1):H + L] = c > 0
    return WindowedSet(DOMAIN_Z, H, out)


def delta3_count(S: WindowedSet, n: int) -> int:
    """|S cap (S - n)| inside the window"""
    n = abs(int(n))
    if n == 0:
        return len(S)
    if n >= S.bits.size:
        return 0
    return int(np.count_nonzero(S.bits[:-n] & S.bits[n:]))


def delta2_g(S: WindowedSet, spec, horizon: int, family=None, n_max: Optional[int] = None,
             thresholds: Optional[Thresholds] = None,
             policy: Optional[PrecisionPolicy] = None, progress: bool = False) -> WindowedSet:
    """
    {n <= horizon : tail max of the density of S cap (S - [g(n)]) is >= theta}

    theta comes from thresholds; it is an explicit approximation parameter since
    positive upper density cannot be decided from a window. All intersections are
    measured on the family indices that fit the window of the largest shift.
    """
    spec = spec if isinstance(spec, SequenceSpec) else parse_sequence_spec(spec)
    thresholds = thresholds or Thresholds()
    family = family if family is not None else _initial_intervals()
    if S.domain != DOMAIN_N:
        raise ValueError("delta2_g is defined for N windows")
    shifts = floor_values(spec, horizon, policy)
    top = max(shifts, default=0)
    if top >= S.horizon:
        raise FamilyExceedsWindow(
            f"[g({horizon})] = {top} does not fit the window of horizon {S.horizon}")
    common = WindowedSet(DOMAIN_N, S.horizon - top, np.zeros(S.horizon - top, dtype=bool))
    if n_max is None:
        n_max = _largest_fitting_index(common, family) if hasattr(family, "bounds") else common.horizon
    if n_max < 1:
        raise FamilyExceedsWindow(f"{family} has no set inside the common window")

    positive: Dict[int, bool] = {}
    bits = np.zeros(horizon, dtype=bool)
    for i, k in enumerate(tqdm(shifts, file=sys.stderr, disable=not progress, desc="delta2",
                               leave=False)):
        if k not in positive:
            estimate = windowed_density(S.shifted_intersection(k), family, n_max, thresholds)
            positive[k] = estimate.running_max_tail >= Fraction(thresholds.theta)
        bits[i] = positive[k]
    logger.info("delta2 of %s: %d of %d indices at theta=%g (%d distinct shifts)",
                spec.canonical(), int(bits.sum()), horizon, thresholds.theta, len(positive))
    return WindowedSet(DOMAIN_N, horizon, bits)


# --- syndeticity / thickness statistics ---

def gap_run_stats(S: WindowedSet) -> GapRunStats:
    """
    Gaps between consecutive members and runs of consecutive members

    A gap of length d is a pair of consecutive members a < a + d; its first
    position is the smaller member. Empty and singleton sets report gap 0.
    """
    members = np.flatnonzero(S.bits).astype(np.int64) + S.lo
    if members.size == 0:
        return GapRunStats(S.horizon, 0, 0, 0, {}, {})
    gaps = np.diff(members)
    histogram: Dict[int, int] = {}
    first: Dict[int, int] = {}
    if gaps.size:
        values, counts = np.unique(gaps, return_counts=True)
        histogram = {int(v): int(c) for v, c in zip(values, counts)}
        firsts = np.unique(gaps, return_index=True)[1]
        first = {int(gaps[i]): int(members[i]) for i in firsts}
    run_lengths = [b - a + 1 for a, b in S.runs()]
    return GapRunStats(S.horizon, int(members.size), int(gaps.max()) if gaps.size else 0,
                       max(run_lengths), histogram, first)


# --- worked examples ---

def example_3_13_members(n: np.ndarray) -> np.ndarray:
    """n in D_g for g(n) = 2n + 2 sqrt(n): (2n + isqrt(4n)) = 0 mod 4"""
    n = np.asarray(n, dtype=np.int64)
    return (2 * n + integer_sqrt_array(4 * n)) % 4 == 0


def verify_example_3_13(horizon: int, progress: bool = False, keep: int = 10) -> ExampleScan:
    """Count n <= horizon with both n and n + 1 in D_g (expected: none)"""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    members = 0
    violations = 0
    first: List[int] = []
    with tqdm(total=horizon, file=sys.stderr, disable=not progress, desc="example 3.13",
              leave=False) as bar:
        for start in range(1, horizon + 1, SCAN_CHUNK):
            stop = min(start + SCAN_CHUNK, horizon + 1)
            inside = example_3_13_members(np.arange(start, stop + 1))
            members += int(inside[:-1].sum())
            both = inside[:-1] & inside[1:]
            hits = np.flatnonzero(both)
            violations += int(hits.size)
            first.extend(int(start + h) for h in hits[:max(0, keep - len(first))])
            bar.update(stop - start)
    if violations:
        logger.warning("example 3.13: %d consecutive members below %d", violations, horizon)
    return ExampleScan(horizon, members, violations, first)


def find_gap_3_14(run_length: int, search_bound: int, progress: bool = False) -> GapWitness:
    """
    Least M <= search_bound with [(M+k)^(3/2)] odd for k = 0..run_length

    The run is re-verified through floor_eval on pow:3/2. run_length = 0 returns
    the first non-member.
    """
    if run_length < 0:
        raise ValueError(f"run length must be >= 0, got {run_length}")
    if search_bound < 1:
        raise ValueError(f"search bound must be >= 1, got {search_bound}")
    isqrt = math.isqrt
    need = run_length + 1
    start = 0
    length = 0
    M = None
    with tqdm(total=search_bound + run_length, file=sys.stderr, disable=not progress,
              desc=f"gap {run_length}", leave=False) as bar:
        for n in range(1, search_bound + run_length + 1):
            if isqrt(n * n * n) & 1:
                if length == 0:
                    start = n
                length += 1
                if length >= need:
                    M = start
                    break
            else:
                length = 0
            if n % 65536 == 0:
                bar.update(65536)
    if M is None or M > search_bound:
        raise GapNotFound(f"no run of {need} consecutive non-members starting at or below "
                          f"{search_bound}")

    spec = RationalPower(3, 2)
    floors = [floor_eval(spec, M + k).value for k in range(need)]
    verified = all(v % 2 == 1 for v in floors)
    if not verified:
        raise DensityError(f"gap at M={M} failed re-verification: {floors}")
    logger.info("gap of length %d at M=%d", need, M)
    return GapWitness(run_length, M, search_bound, floors, verified)


# --- translate covers ---

def _mask(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def translate_masks(E: WindowedSet, M: int) -> Dict[int, int]:
    """translate m -> bitmask over the target [-M, M] of the points in E + m"""
    slack = E.horizon - M
    masks = {}
    for m in range(-slack, slack + 1):
        lo = E.index(-M - m)
        masks[m] = _mask(E.bits[lo:lo + 2 * M + 1])
    return masks


def verify_cover(E: WindowedSet, translates: Iterable[int], M: int) -> bool:
    """Every x in [-M, M] lies in some E + m"""
    translates = list(translates)
    return all(any((x - m) in E for m in translates) for x in range(-M, M + 1))


def _prune(masks: Dict[int, int]) -> List[Tuple[int, int]]:
    """One translate per distinct mask (nonnegative and small first), dominated masks removed"""
    by_mask: Dict[int, int] = {}
    for m in sorted(masks, key=lambda m: (m < 0, abs(m))):
        by_mask.setdefault(masks[m], m)
    ordered = sorted(by_mask.items(), key=lambda item: (-bin(item[0]).count("1"),
                                                        item[1] < 0, abs(item[1])))
    kept: List[Tuple[int, int]] = []
    for mask, m in ordered:
        if mask and not any(mask & ~other == 0 for other, _ in kept):
            kept.append((mask, m))
    return kept


def _greedy(candidates: List[Tuple[int, int]], full: int) -> Optional[List[int]]:
    uncovered = full
    chosen = []
    while uncovered:
        mask, m = max(candidates, key=lambda c: bin(c[0] & uncovered).count("1"))
        if not mask & uncovered:
            return None
        chosen.append(m)
        uncovered &= ~mask
    return chosen


def _exact(candidates: List[Tuple[int, int]], full: int, depth: int,
           max_pop: int) -> Optional[List[int]]:
    def search(uncovered: int, remaining: int, chosen: List[int]) -> Optional[List[int]]:
        if not uncovered:
            return list(chosen)
        if remaining == 0 or bin(uncovered).count("1") > remaining * max_pop:
            return None
        lowest = uncovered & -uncovered
        for mask, m in candidates:
            if mask & lowest:
                chosen.append(m)
                found = search(uncovered & ~mask, remaining - 1, chosen)
                chosen.pop()
                if found is not None:
                    return found
        return None

    return search(full, depth, [])


def cover_search(E: WindowedSet, M: int, l_max: int) -> CoverCertificate:
    """
    Fewest translates m_1..m_l (l <= l_max) with the union of E + m_i covering [-M, M]

    Greedy gives an upper bound; depth-first search over the pruned candidate
    masks then looks for smaller covers starting from the counting lower bound.
    """
    if E.domain != DOMAIN_Z:
        raise ValueError("cover_search needs a Z window")
    if M < 0 or l_max < 1:
        raise ValueError("target radius M >= 0 and l_max >= 1 required")
    if E.horizon < M:
        raise FamilyExceedsWindow(f"target [-{M}, {M}] exceeds the window of horizon {E.horizon}")
    full = (1 << (2 * M + 1)) - 1
    candidates = _prune(translate_masks(E, M))
    union = 0
    for mask, _ in candidates:
        union |= mask
    if union != full:
        raise CoverNotFound(f"no translate of E inside the window covers some point of [-{M}, {M}]")

    max_pop = bin(candidates[0][0]).count("1")
    lower = -(-(2 * M + 1) // max_pop)
    greedy = _greedy(candidates, full)
    best = greedy if greedy is not None and len(greedy) <= l_max else None
    ceiling = min(l_max, len(greedy) - 1 if greedy else l_max)
    for depth in range(lower, ceiling + 1):
        found = _exact(candidates, full, depth, max_pop)
        if found is not None:
            best = found
            break
    if best is None:
        raise CoverNotFound(f"no cover of [-{M}, {M}] with at most {l_max} translates")

    translates = sorted(best)
    if not verify_cover(E, translates, M):
        raise DensityError(f"cover certificate {translates} failed re-verification")
    logger.info("cover of [-%d, %d] with %d translates (greedy %d, lower bound %d)",
                M, M, len(translates), len(greedy or []), lower)
    return CoverCertificate(translates, (-M, M), len(translates), len(greedy or []), lower)
