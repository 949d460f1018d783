"""
Core ergoprobe - Equidistribution
Weyl sums, residue histograms, star discrepancy and the norm-ergodicity probes
"""
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from .config import DEFAULT_LAMBDAS, DEFAULT_MODULI, PrecisionPolicy, Thresholds
from .exceptions import PrecisionExhausted
from .numbers import HighPrecisionReal
from .sequences import SequenceSpec, floor_values, parse_sequence_spec

logger = logging.getLogger(__name__)

# fractional bits of the fixed-point phase lambda * a_n mod 1
PHASE_BITS = 64

CONSISTENT = "consistent"
VIOLATED = "violated"
INDETERMINATE = "indeterminate"


@dataclass
class WeylSumReport:
    lambda_: str
    N: int
    magnitude: float
    trajectory: List[Tuple[int, float]]


@dataclass
class ResidueHistogram:
    m: int
    counts: List[int]
    N: int
    max_deviation: float


@dataclass
class NormErgodicVerdict:
    spec: str
    N: int
    irrational_probes: List[WeylSumReport]
    residue_probes: List[ResidueHistogram]
    verdict: str
    reasons: List[str] = field(default_factory=list)
    note: str = "finite-horizon check against configured thresholds; no limit is claimed"


@dataclass
class PolynomialRatio:
    polynomial: List[str]
    ratios: List[float]
    flag: str


@dataclass
class BoshernitzanReport:
    spec: str
    degree_bound: int
    height_bound: int
    grid: List[float]
    polynomials: List[PolynomialRatio]
    all_diverge: bool
    heuristic: bool = True


def checkpoints(N: int) -> List[int]:
    """Geometric checkpoints 1, 2, 4, ... below N, then N"""
    points = []
    m = 1
    while m < N:
        points.append(m)
        m *= 2
    points.append(N)
    return points


def fixed_point_phases(values: Sequence[int], lam, bits: int = PHASE_BITS) -> np.ndarray:
    """
    {lambda * a_n} as float64, computed from an integer fixed-point image of lambda

    The product lambda * a_n is formed exactly in big-integer arithmetic, so the
    only errors are lambda's enclosure radius (scaled below 2**-bits) and the
    final rounding to 53 bits.
    """
    lam = HighPrecisionReal.of(lam)
    largest = max((abs(int(v)) for v in values), default=1)
    P = bits + largest.bit_length() + 8
    scaled, _ = lam.scaled_bounds(P)
    mask = (1 << P) - 1
    shift = P - 53
    raw = np.fromiter((((scaled * int(a)) & mask) >> shift for a in values),
                      dtype=np.float64, count=len(values))
    return raw / float(1 << 53)


def weyl_sum(values: Sequence[int], lam) -> WeylSumReport:
    """
    |(1/N) sum_n exp(2 pi i lambda a_n)| with its trajectory at geometric checkpoints

    Args:
        values: a_1, ..., a_N (N >= 1)
        lam: lambda as HighPrecisionReal, Fraction or text ('sqrt2-1')
    """
    N = len(values)
    if N < 1:
        raise ValueError("weyl_sum needs at least one value")
    lam = HighPrecisionReal.of(lam)
    phases = fixed_point_phases(values, lam)
    partial = np.cumsum(np.exp(2j * np.pi * phases))
    trajectory = []
    for M in checkpoints(N):
        trajectory.append((M, min(1.0, float(abs(partial[M - 1])) / M)))
    return WeylSumReport(str(lam), N, trajectory[-1][1], trajectory)


def residue_distribution(values: Sequence[int], m: int) -> ResidueHistogram:
    """counts[j] = #{n <= N : a_n = j (mod m)}"""
    if m < 1:
        raise ValueError(f"modulus must be >= 1, got {m}")
    N = len(values)
    residues = np.fromiter((int(v) % m for v in values), dtype=np.int64, count=N)
    counts = np.bincount(residues, minlength=m)
    deviation = float(np.max(np.abs(counts / N - 1.0 / m))) if N else 0.0
    return ResidueHistogram(m, [int(c) for c in counts], N, deviation)


def weyl_from_histogram(histogram: ResidueHistogram, j: int) -> float:
    """|(1/N) sum_n exp(2 pi i (j/m) a_n)| from the residue counts alone"""
    r = np.arange(histogram.m)
    terms = np.asarray(histogram.counts) * np.exp(2j * np.pi * j * r / histogram.m)
    return float(abs(terms.sum())) / histogram.N


def star_discrepancy(points: Iterable) -> float:
    """Exact star discrepancy D*_N of points in [0, 1) by the sorted-points formula"""
    x = np.sort(np.asarray(list(points), dtype=np.float64))
    N = x.size
    if N < 1:
        raise ValueError("star_discrepancy needs at least one point")
    if x[0] < 0 or x[-1] >= 1:
        raise ValueError("points must lie in [0, 1)")
    i = np.arange(1, N + 1, dtype=np.float64)
    return float(max(np.max(i / N - x), np.max(x - (i - 1) / N)))


def norm_ergodic_probe(spec, N: int, lambdas: Optional[Sequence] = None,
                       moduli: Optional[Sequence[int]] = None,
                       policy: Optional[PrecisionPolicy] = None,
                       thresholds: Optional[Thresholds] = None,
                       progress: bool = False) -> NormErgodicVerdict:
    """
    Weyl sums along each lambda plus residue histograms along each modulus for [g(n)], n <= N

    The verdict only reports horizon-consistent behaviour:
    violated      some probe is over its threshold (Weyl: over the last checkpoints)
    indeterminate floors not certified, or a Weyl probe over threshold only at the end
    consistent    otherwise
    """
    spec = spec if isinstance(spec, SequenceSpec) else parse_sequence_spec(spec)
    lambdas = [HighPrecisionReal.of(l) for l in (lambdas if lambdas is not None else DEFAULT_LAMBDAS)]
    moduli = list(moduli if moduli is not None else DEFAULT_MODULI)
    thresholds = thresholds or Thresholds()
    try:
        values = floor_values(spec, N, policy, progress=progress)
    except PrecisionExhausted as e:
        logger.warning("Probe of %s indeterminate: %s", spec.canonical(), e)
        return NormErgodicVerdict(spec.canonical(), N, [], [], INDETERMINATE, [str(e)])

    weyl_reports = [weyl_sum(values, lam) for lam in lambdas]
    residue_reports = [residue_distribution(values, m) for m in moduli]

    verdict = CONSISTENT
    reasons = []
    for report in weyl_reports:
        tail = [value for _, value in report.trajectory[-thresholds.weyl_sustain:]]
        if len(tail) == thresholds.weyl_sustain and min(tail) > thresholds.weyl_violation:
            verdict = VIOLATED
            reasons.append(f"|S_N| > {thresholds.weyl_violation} over the last "
                           f"{thresholds.weyl_sustain} checkpoints for lambda={report.lambda_}")
        elif report.magnitude > thresholds.weyl_violation and verdict != VIOLATED:
            verdict = INDETERMINATE
            reasons.append(f"|S_N| = {report.magnitude:.4g} for lambda={report.lambda_} "
                           "exceeds the threshold without being sustained")
    for hist in residue_reports:
        if hist.max_deviation > thresholds.residue_violation:
            verdict = VIOLATED
            reasons.append(f"residues mod {hist.m} deviate by {hist.max_deviation:.4g} "
                           f"> {thresholds.residue_violation}")
    return NormErgodicVerdict(spec.canonical(), N, weyl_reports, residue_reports, verdict, reasons)


def geometric_grid(lo: float, hi: float, points: int) -> List[float]:
    if not 1 < lo < hi or points < 2:
        raise ValueError("grid needs 1 < lo < hi and at least two points")
    ratio = (hi / lo) ** (1.0 / (points - 1))
    return [lo * ratio ** k for k in range(points)]


def rational_polynomials(degree_bound: int, height_bound: int) -> List[Tuple[Fraction, ...]]:
    """All p in Q[x] with deg <= d and coefficient heights <= H (highest degree first, deduplicated)"""
    if degree_bound < 0 or height_bound < 1:
        raise ValueError("degree_bound >= 0 and height_bound >= 1 required")
    values = sorted({Fraction(a, b) for a in range(-height_bound, height_bound + 1)
                     for b in range(1, height_bound + 1)})
    return list(itertools.product(values, repeat=degree_bound + 1))


def _divergence_flag(ratios: List[mpmath.mpf]) -> str:
    if all(abs(r) < mpmath.mpf(10) ** -20 for r in ratios):
        return "fails"
    tail = ratios[len(ratios) // 2:]
    signs = {int(mpmath.sign(r)) for r in tail}
    if len(signs) == 1 and 0 not in signs and all(abs(b) > abs(a) for a, b in zip(tail, tail[1:])):
        return "diverges"
    return "inconclusive"


def boshernitzan_probe(spec, degree_bound: int, height_bound: int,
                       grid: Sequence[float]) -> BoshernitzanReport:
    """
    Heuristic check of (g(x) - p(x)) / log x -> +-inf for every enumerated p in Q[x]

    Finite enumeration of an infinite condition: 'diverges' means the ratio keeps
    one sign and grows in absolute value over the second half of the grid.
    """
    spec = spec if isinstance(spec, SequenceSpec) else parse_sequence_spec(spec)
    grid = list(grid)
    rows = []
    with mpmath.workdps(40):
        xs = [mpmath.mpf(x) for x in grid]
        gs = [spec.real_value(x) for x in xs]
        logs = [mpmath.log(x) for x in xs]
        for poly in rational_polynomials(degree_bound, height_bound):
            coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in poly]
            ratios = [(g - mpmath.polyval(coeffs, x)) / lg for g, x, lg in zip(gs, xs, logs)]
            rows.append(PolynomialRatio([str(c) for c in poly], [float(r) for r in ratios],
                                        _divergence_flag(ratios)))
    return BoshernitzanReport(spec.canonical(), degree_bound, height_bound, [float(x) for x in grid],
                              rows, all(r.flag == "diverges" for r in rows))
