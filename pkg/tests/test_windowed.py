import numpy as np
import pytest

from core.exceptions import GrammarError
from core.windowed import DOMAIN_N, DOMAIN_Z, WindowedSet, parse_set


def test_builders():
    assert WindowedSet.multiples(4, 12).members() == [4, 8, 12]
    assert WindowedSet.multiples(3, 4, DOMAIN_Z).members() == [-3, 0, 3]
    assert WindowedSet.squares(20).members() == [1, 4, 9, 16]
    assert len(WindowedSet.full(7)) == 7
    assert len(WindowedSet.empty(7, DOMAIN_Z)) == 0
    odd = WindowedSet.from_predicate(lambda e: e % 2 == 1, 6)
    assert odd.members() == [1, 3, 5]


def test_window_geometry():
    S = WindowedSet.from_members([1, 5], 5)
    assert (S.lo, S.hi) == (1, 5)
    assert 5 in S and 0 not in S and 6 not in S
    Z = WindowedSet.from_members([-2, 2], 3, DOMAIN_Z)
    assert (Z.lo, Z.hi) == (-3, 3)
    assert Z.bits.size == 7
    assert Z.is_symmetric()


def test_bits_are_read_only():
    S = WindowedSet.multiples(2, 10)
    with pytest.raises(ValueError):
        S.bits[0] = True


def test_member_outside_window_rejected():
    with pytest.raises(ValueError):
        WindowedSet.from_members([0, 3], 5)
    with pytest.raises(ValueError):
        WindowedSet(DOMAIN_N, 5, np.zeros(4, dtype=bool))


def test_complement_and_truncate():
    S = WindowedSet.multiples(3, 9)
    assert S.complement().members() == [1, 2, 4, 5, 7, 8]
    assert S.truncate(5).members() == [3]


def test_shifted_intersection():
    assert len(WindowedSet.multiples(2, 10).shifted_intersection(1)) == 0
    full = WindowedSet.full(10).shifted_intersection(3)
    assert full.horizon == 7 and len(full) == 7
    with pytest.raises(ValueError):
        full.shifted_intersection(7)


def test_runs_and_json_form():
    S = WindowedSet.from_members([1, 2, 3, 7], 8)
    assert S.runs() == [[1, 3], [7, 7]]
    assert S.to_json_dict() == {"domain": "N", "horizon": 8, "runs": [[1, 3], [7, 7]]}
    assert WindowedSet.from_json(S.to_json()) == S


@pytest.mark.parametrize("text", [
    "not json",
    '{"domain": "N", "horizon": 5}',
    '{"domain": "N", "horizon": 5, "runs": [[4, 9]]}',
    '{"domain": "Q", "horizon": 5, "runs": []}',
])
def test_malformed_json_rejected(text):
    with pytest.raises(GrammarError):
        WindowedSet.from_json(text)


def test_text_form():
    S = WindowedSet.from_text("# members\n2\n\n5\n", horizon=6)
    assert S.members() == [2, 5]
    assert S.to_text() == "2\n5\n"
    with pytest.raises(GrammarError):
        WindowedSet.from_text("2\nfive\n")


def test_parse_set():
    assert parse_set("mult:4", 10).members() == [4, 8]
    assert parse_set("members:1,2,4", 5).members() == [1, 2, 4]
    assert len(parse_set("all", 9)) == 9
    assert parse_set("squares", 10).members() == [1, 4, 9]
    for bad in ("mult:x", "primes", "members:0"):
        with pytest.raises(GrammarError):
            parse_set(bad, 10)
