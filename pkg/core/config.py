"""
Core ergoprobe - Configuration
Defaults, environment overrides and logging setup
"""
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

ENV_PRECISION_CAP = "ERGOPROBE_PRECISION_CAP"
ENV_LOG_LEVEL = "ERGOPROBE_LOG_LEVEL"
ENV_PRIME_UNIVERSE = "ERGOPROBE_PRIME_UNIVERSE"

DEFAULT_START_BITS = 64
DEFAULT_CAP_BITS = 4096
DEFAULT_TOLERANCE_BITS = 32
DEFAULT_PRIME_UNIVERSE = 64
DEFAULT_ENUMERATION_CAP = 10 ** 8

# Irrational Weyl probes: sqrt2-1, golden ratio conjugate, pi-3
DEFAULT_LAMBDAS = ("sqrt2-1", "(sqrt5-1)/2", "pi-3")
DEFAULT_MODULI = (2, 3, 4, 5)


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        logging.getLogger(__name__).warning("Ignoring non-integer %s=%r", name, raw)
        return default
    if value <= 0:
        logging.getLogger(__name__).warning("Ignoring non-positive %s=%r", name, raw)
        return default
    return value


def default_cap_bits() -> int:
    return _env_int(ENV_PRECISION_CAP, DEFAULT_CAP_BITS)


def default_prime_universe() -> int:
    return _env_int(ENV_PRIME_UNIVERSE, DEFAULT_PRIME_UNIVERSE)


@dataclass(frozen=True)
class PrecisionPolicy:
    """
    Precision schedule for certified evaluation

    Args:
        start_bits: first working precision (fractional bits)
        cap_bits: precision at which escalation stops and certification fails
        tolerance_bits: certified fractional intervals are at most 2**-tolerance_bits wide
    """
    start_bits: int = DEFAULT_START_BITS
    cap_bits: int = field(default_factory=default_cap_bits)
    tolerance_bits: int = DEFAULT_TOLERANCE_BITS

    def __post_init__(self):
        if self.start_bits <= 0 or self.cap_bits <= 0 or self.tolerance_bits <= 0:
            raise ValueError("precision policy values must be positive")
        if self.start_bits > self.cap_bits:
            raise ValueError(f"start_bits {self.start_bits} exceeds cap_bits {self.cap_bits}")

    def schedule(self):
        """Yield working precisions: start, doubling, ending exactly at the cap"""
        bits = self.start_bits
        while bits < self.cap_bits:
            yield bits
            bits *= 2
        yield self.cap_bits


@dataclass(frozen=True)
class Thresholds:
    """Approximation parameters for finite-horizon verdicts"""
    theta: float = 1e-3
    tail_fraction: float = 0.2
    weyl_violation: float = 0.5
    weyl_sustain: int = 3
    residue_violation: float = 0.05
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP

    def __post_init__(self):
        if not 0 < self.tail_fraction <= 1:
            raise ValueError("tail_fraction must lie in (0, 1]")
        if self.theta <= 0 or self.weyl_violation <= 0 or self.residue_violation <= 0:
            raise ValueError("thresholds must be positive")
        if self.weyl_sustain < 1 or self.enumeration_cap < 1:
            raise ValueError("weyl_sustain and enumeration_cap must be positive")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration of one CLI run (echoed into every report)"""
    command: str
    horizon: Optional[int] = None
    N: Optional[int] = None
    precision_bits: int = field(default_factory=default_cap_bits)
    theta: float = 1e-3
    falsification: float = 0.5
    output: str = "json"
    seed: int = 0
    cap: int = DEFAULT_ENUMERATION_CAP
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("horizon", "N"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"--{name.lower()} must be positive, got {value}")
        if self.precision_bits <= 0 or self.cap <= 0 or self.theta <= 0 or self.falsification <= 0:
            raise ValueError("numeric parameters must be positive")
        if self.output not in ("json", "csv"):
            raise ValueError(f"unknown output format: {self.output}")

    @property
    def policy(self) -> PrecisionPolicy:
        return PrecisionPolicy(start_bits=min(DEFAULT_START_BITS, self.precision_bits),
                               cap_bits=self.precision_bits)

    @property
    def thresholds(self) -> Thresholds:
        return Thresholds(theta=self.theta, weyl_violation=self.falsification,
                          enumeration_cap=self.cap)

    def to_dict(self) -> dict:
        return asdict(self)


class _TagFormatter(logging.Formatter):
    """Renders records as '[INFO] message' / '[WARN] message'"""

    TAGS = {"WARNING": "WARN", "CRITICAL": "ERROR"}

    def format(self, record: logging.LogRecord) -> str:
        tag = self.TAGS.get(record.levelname, record.levelname)
        return f"[{tag}] {record.getMessage()}"


def setup_logging(level: Optional[str] = None) -> None:
    """Install the stderr handler on the package root logger (idempotent)"""
    level = (level or os.environ.get(ENV_LOG_LEVEL) or "WARNING").upper()
    for name in ("core", "adapters", "standalone"):
        root = logging.getLogger(name)
        root.setLevel(level)
        installed = [h for h in root.handlers if getattr(h, "_ergoprobe", False)]
        if installed:
            # sys.stderr may have been swapped since the handler was created
            installed[0].stream = sys.stderr
            continue
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(_TagFormatter())
        handler._ergoprobe = True
        root.addHandler(handler)
