"""
Core ergoprobe - Sequence Specs
Abstract base class for the functions g: N -> [1, inf) behind [g(n)]
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from ..config import PrecisionPolicy
from ..exceptions import PrecisionExhausted


@dataclass(frozen=True)
class FloorResult:
    """
    [g(n)] with its certification status

    frac_interval is a closed rational subinterval of [0, 1) containing {g(n)}
    """
    value: int
    certified: bool
    frac_interval: Tuple[Fraction, Fraction]

    @property
    def width(self) -> Fraction:
        return self.frac_interval[1] - self.frac_interval[0]


class SequenceSpec(ABC):
    """Abstract base class for all sequence specs"""

    # nondecreasing in n (enables the g(n) >= 1 "forever" check at n = 1)
    monotone: bool = True
    # floors come from integer arithmetic only
    exact: bool = False

    @abstractmethod
    def canonical(self) -> str:
        """Canonical text form, e.g. 'pow:3/2'"""
        pass

    @abstractmethod
    def floor(self, n: int, policy: PrecisionPolicy) -> FloorResult:
        """
        Evaluate [g(n)]

        Args:
            n: index, n >= 1
            policy: precision schedule for non-exact variants

        Returns:
            FloorResult (raises PrecisionExhausted when not certifiable)
        """
        pass

    @abstractmethod
    def frac(self, n: int, scale: Fraction, policy: PrecisionPolicy) -> Tuple[Fraction, Fraction]:
        """Certified interval containing {scale * g(n)}"""
        pass

    @abstractmethod
    def real_value(self, x):
        """g at a real point x (mpmath mpf, current mp precision); used by the heuristic probes"""
        pass

    def batch_floor(self, n_max: int, policy: PrecisionPolicy, progress=None) -> List[int]:
        """
        [g(1)], ..., [g(n_max)]
        Default implementation calls floor() for each n
        Subclasses with an integer path override this with a tight loop
        """
        values = []
        for n in range(1, n_max + 1):
            result = self.floor(n, policy)
            if not result.certified:
                raise PrecisionExhausted(f"{self.canonical()}: floor at n={n} not certified", result)
            values.append(result.value)
            if progress is not None:
                progress.update(1)
        return values

    def check_index(self, n: int) -> None:
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"sequence index must be an integer >= 1, got {n!r}")

    def __repr__(self):
        return f"{type(self).__name__}({self.canonical()!r})"

    def __eq__(self, other):
        return isinstance(other, SequenceSpec) and self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())


def as_fraction_scale(scale: Optional[object]) -> Fraction:
    if scale is None:
        return Fraction(1)
    if isinstance(scale, Fraction):
        return scale
    if isinstance(scale, int):
        return Fraction(scale)
    return Fraction(str(scale))
