"""
Core ergoprobe - Sequence Evaluation
Entry points for [g(n)] and {lambda g(n)}
"""
import sys
from fractions import Fraction
from typing import List, Optional, Tuple

from tqdm import tqdm

from ..config import PrecisionPolicy
from ..numbers import integer_root
from .base import FloorResult, SequenceSpec
from .grammar import parse_sequence_spec


def _resolve(spec) -> SequenceSpec:
    return spec if isinstance(spec, SequenceSpec) else parse_sequence_spec(spec)


def floor_eval(spec, n: int, policy: Optional[PrecisionPolicy] = None) -> FloorResult:
    """[g(n)], certified or PrecisionExhausted"""
    return _resolve(spec).floor(n, policy or PrecisionPolicy())


def frac_eval(spec, n: int, scale=Fraction(1),
              policy: Optional[PrecisionPolicy] = None) -> Tuple[Fraction, Fraction]:
    """Certified rational interval containing {scale * g(n)}"""
    return _resolve(spec).frac(n, scale, policy or PrecisionPolicy())


def floor_values(spec, n_max: int, policy: Optional[PrecisionPolicy] = None,
                 progress: bool = False) -> List[int]:
    """
    [g(1)], ..., [g(n_max)] (all certified)

    Args:
        spec: SequenceSpec or its text form
        n_max: horizon
        policy: precision schedule
        progress: show a progress bar on stderr
    """
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    spec = _resolve(spec)
    with tqdm(total=n_max, file=sys.stderr, disable=not progress, desc=spec.canonical(),
              leave=False) as bar:
        return spec.batch_floor(n_max, policy or PrecisionPolicy(), bar)


__all__ = ["integer_root", "floor_eval", "frac_eval", "floor_values"]
