"""
Core ergoprobe - Windowed Sets
Finite truncations of subsets of N or Z stored as immutable numpy bitsets
"""
import json
from typing import Callable, Dict, Iterable, Iterator, List, Optional

import numpy as np

from .exceptions import GrammarError
from .numbers import integer_sqrt_array

DOMAIN_N = "N"
DOMAIN_Z = "Z"


class WindowedSet:
    """
    Membership bitset over [1, horizon] (domain N) or [-horizon, horizon] (domain Z)

    The underlying array is read-only after construction.
    """

    __slots__ = ("domain", "horizon", "bits")

    def __init__(self, domain: str, horizon: int, bits: np.ndarray):
        if domain not in (DOMAIN_N, DOMAIN_Z):
            raise ValueError(f"domain must be 'N' or 'Z', got {domain!r}")
        if horizon < 0:
            raise ValueError(f"horizon must be >= 0, got {horizon}")
        bits = np.array(bits, dtype=bool)
        expected = horizon if domain == DOMAIN_N else 2 * horizon + 1
        if bits.shape != (expected,):
            raise ValueError(f"bitset length {bits.shape} does not match horizon {horizon}")
        bits.flags.writeable = False
        self.domain = domain
        self.horizon = horizon
        self.bits = bits

    # --- builders ---

    @classmethod
    def empty(cls, horizon: int, domain: str = DOMAIN_N) -> "WindowedSet":
        size = horizon if domain == DOMAIN_N else 2 * horizon + 1
        return cls(domain, horizon, np.zeros(size, dtype=bool))

    @classmethod
    def full(cls, horizon: int, domain: str = DOMAIN_N) -> "WindowedSet":
        size = horizon if domain == DOMAIN_N else 2 * horizon + 1
        return cls(domain, horizon, np.ones(size, dtype=bool))

    @classmethod
    def from_members(cls, members: Iterable[int], horizon: Optional[int] = None,
                     domain: str = DOMAIN_N) -> "WindowedSet":
        members = sorted(set(int(m) for m in members))
        if horizon is None:
            horizon = max((abs(m) for m in members), default=0)
        window = cls.empty(horizon, domain)
        bits = np.zeros_like(window.bits)
        for m in members:
            if not window.in_window(m):
                raise ValueError(f"member {m} outside the {domain} window of horizon {horizon}")
            bits[window.index(m)] = True
        return cls(domain, horizon, bits)

    @classmethod
    def from_predicate(cls, predicate: Callable[[np.ndarray], np.ndarray], horizon: int,
                       domain: str = DOMAIN_N) -> "WindowedSet":
        """predicate receives the int64 array of window elements and returns a bool mask"""
        window = cls.empty(horizon, domain)
        return cls(domain, horizon, np.asarray(predicate(window.elements()), dtype=bool))

    @classmethod
    def multiples(cls, k: int, horizon: int, domain: str = DOMAIN_N) -> "WindowedSet":
        if k < 1:
            raise ValueError(f"multiples need k >= 1, got {k}")
        return cls.from_predicate(lambda e: e % k == 0, horizon, domain)

    @classmethod
    def squares(cls, horizon: int) -> "WindowedSet":
        def is_square(e):
            r = integer_sqrt_array(e)
            return r * r == e
        return cls.from_predicate(is_square, horizon)

    # --- geometry ---

    @property
    def lo(self) -> int:
        return 1 if self.domain == DOMAIN_N else -self.horizon

    @property
    def hi(self) -> int:
        return self.horizon

    def index(self, element: int) -> int:
        return element - self.lo

    def in_window(self, element: int) -> bool:
        return self.lo <= element <= self.hi

    def elements(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1, dtype=np.int64)

    # --- set protocol ---

    def members(self) -> List[int]:
        return [int(i) + self.lo for i in np.flatnonzero(self.bits)]

    def __contains__(self, element) -> bool:
        return self.in_window(element) and bool(self.bits[self.index(element)])

    def __iter__(self) -> Iterator[int]:
        return iter(self.members())

    def __len__(self) -> int:
        return int(np.count_nonzero(self.bits))

    def __eq__(self, other):
        return (isinstance(other, WindowedSet) and self.domain == other.domain
                and self.horizon == other.horizon and np.array_equal(self.bits, other.bits))

    def __hash__(self):
        return hash((self.domain, self.horizon, self.bits.tobytes()))

    def __repr__(self):
        preview = self.members()[:8]
        more = ", ..." if len(self) > 8 else ""
        return f"WindowedSet({self.domain}, horizon={self.horizon}, {preview}{more})"

    def complement(self) -> "WindowedSet":
        return WindowedSet(self.domain, self.horizon, ~self.bits)

    def is_symmetric(self) -> bool:
        return self.domain == DOMAIN_Z and bool(np.array_equal(self.bits, self.bits[::-1]))

    def truncate(self, horizon: int) -> "WindowedSet":
        """Same set on the smaller window [1, horizon] (domain N)"""
        if self.domain != DOMAIN_N or not 0 <= horizon <= self.horizon:
            raise ValueError(f"cannot truncate {self!r} to horizon {horizon}")
        return WindowedSet(DOMAIN_N, horizon, self.bits[:horizon])

    def shifted_intersection(self, k: int) -> "WindowedSet":
        """S intersect (S - k) on the window [1, horizon - k] where membership of a + k is known"""
        if self.domain != DOMAIN_N:
            raise ValueError("shifted_intersection is defined for N windows")
        if not 0 <= k < self.horizon:
            raise ValueError(f"shift {k} does not fit the window of horizon {self.horizon}")
        if k == 0:
            return self
        return WindowedSet(DOMAIN_N, self.horizon - k, self.bits[:-k] & self.bits[k:])

    # --- interchange ---

    def runs(self) -> List[List[int]]:
        """Maximal runs [a, b] of consecutive members"""
        padded = np.concatenate(([False], self.bits, [False])).astype(np.int8)
        edges = np.flatnonzero(np.diff(padded))
        starts, stops = edges[0::2], edges[1::2]
        return [[int(a) + self.lo, int(b) - 1 + self.lo] for a, b in zip(starts, stops)]

    def to_json_dict(self) -> Dict:
        return {"domain": self.domain, "horizon": self.horizon, "runs": self.runs()}

    @classmethod
    def from_json_dict(cls, data: Dict) -> "WindowedSet":
        try:
            window = cls.empty(int(data["horizon"]), data["domain"])
            bits = np.zeros_like(window.bits)
            for a, b in data["runs"]:
                if not (window.in_window(a) and window.in_window(b) and a <= b):
                    raise ValueError(f"run [{a}, {b}] outside window")
                bits[window.index(a):window.index(b) + 1] = True
        except (KeyError, TypeError, ValueError) as e:
            raise GrammarError(f"malformed windowed set JSON: {e}") from e
        return cls(window.domain, window.horizon, bits)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "WindowedSet":
        try:
            return cls.from_json_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise GrammarError(f"windowed set is not valid JSON: {e}") from e

    def to_text(self) -> str:
        return "".join(f"{m}\n" for m in self.members())

    @classmethod
    def from_text(cls, text: str, horizon: Optional[int] = None,
                  domain: str = DOMAIN_N) -> "WindowedSet":
        members = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                members.append(int(line))
            except ValueError as e:
                raise GrammarError(f"line {lineno}: not an integer: {line!r}") from e
        return cls.from_members(members, horizon, domain)


def parse_set(text: str, horizon: int) -> WindowedSet:
    """
    Set grammar used on the command line

    'mult:4' (4N), 'squares', 'all', 'members:1,2,4'
    ('file:PATH' is resolved by the file adapter)
    """
    kind, _, body = text.strip().partition(":")
    kind = kind.lower()
    try:
        if kind == "mult":
            return WindowedSet.multiples(int(body), horizon)
        if kind == "squares" and not body:
            return WindowedSet.squares(horizon)
        if kind == "all" and not body:
            return WindowedSet.full(horizon)
        if kind == "members":
            return WindowedSet.from_members([int(p) for p in body.split(",") if p.strip()], horizon)
    except ValueError as e:
        raise GrammarError(f"bad set {text!r}: {e}") from e
    raise GrammarError(f"unknown set {text!r} (expected mult:k, squares, all, members:..., file:PATH)")
