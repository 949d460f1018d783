"""End-to-end checks at the documented horizons; the heavy ones carry the slow marker"""
import json
import math

import pytest

from core.density_sets import cover_search, delta1, find_gap_3_14, verify_example_3_13
from core.dynamics import Circle, IndicatorObservable, orbit_average, recurrence_average
from core.equidistribution import residue_distribution, weyl_sum
from core.folner import (MultBoxF, MultBoxSquaredPower, heisenberg_quotient_count, tempered_ratio,
                         temperedness_scan)
from core.semigroups import Heisenberg, left_quotient_set, mul
from core.sequences import floor_values
from core.windowed import WindowedSet
from standalone.cli import main


@pytest.fixture(scope="module")
def three_halves_1e5():
    return floor_values("pow:3/2", 10 ** 5)


@pytest.mark.slow
def test_no_two_consecutive_members_up_to_a_million():
    scan = verify_example_3_13(10 ** 6)
    assert scan.violations == 0


@pytest.mark.slow
@pytest.mark.parametrize("run_length", range(1, 13))
def test_gap_runs_below_ten_million(run_length):
    witness = find_gap_3_14(run_length, 10 ** 7)
    assert witness.M <= 10 ** 7
    assert all(math.isqrt((witness.M + k) ** 3) % 2 == 1 for k in range(run_length + 1))


def test_square_power_box_ratio_below_product_limit():
    report = temperedness_scan(MultBoxSquaredPower(), 40, 1.8380)
    assert report.first_violation is None
    assert report.sup <= 1.8380


@pytest.mark.parametrize("n", [2, 3])
def test_square_power_box_closed_form_matches_enumeration(n):
    closed = tempered_ratio(MultBoxSquaredPower(), n)
    enumerated = tempered_ratio(MultBoxSquaredPower(), n, method="enumeration")
    assert closed.value == enumerated.value


def test_box_dichotomy():
    assert tempered_ratio(MultBoxF("n^2"), 50).value > 100
    report = temperedness_scan(MultBoxF("n^n"), 50, 4)
    assert report.first_violation is None


@pytest.mark.slow
@pytest.mark.parametrize("n", range(2, 7))
def test_heisenberg_counts_below_bound(n):
    result = heisenberg_quotient_count(n)
    assert result.cardinality == (2 * n + 1) ** 2 * (2 * n * n + 1)
    assert result.count <= result.bound_count
    assert result.count == result.closed_form_count


@pytest.mark.parametrize("lam", ["sqrt2-1", "(sqrt5-1)/2"])
def test_weyl_sums_of_three_halves_power(three_halves_1e5, lam):
    assert weyl_sum(three_halves_1e5, lam).magnitude <= 0.05


@pytest.mark.slow
def test_residues_of_three_halves_power():
    values = floor_values("pow:3/2", 10 ** 6)
    for m in (2, 3, 4, 5):
        assert residue_distribution(values, m).max_deviation <= 0.01


@pytest.mark.parametrize("beta", [0.3, 0.5])
def test_recurrence_lower_bound(three_halves_1e5, beta):
    report = recurrence_average(Circle("sqrt2-1"), beta, three_halves_1e5)
    assert report.average >= beta * beta - 0.01


@pytest.mark.slow
def test_pointwise_orbit_average(three_halves_1e5):
    obs = IndicatorObservable.arc(0, "1/2")
    result = orbit_average(Circle("sqrt2-1"), "0", obs, three_halves_1e5)
    assert result.average == pytest.approx(0.5, abs=0.01)


def test_delta1_matches_brute_force(rng):
    for _ in range(100):
        horizon = rng.randint(1, 2000)
        members = rng.sample(range(1, horizon + 1), rng.randint(0, min(horizon, 40)))
        D = delta1(WindowedSet.from_members(members, horizon))
        assert D.members() == sorted({a - b for a in members for b in members})


def test_heisenberg_quotient_commutes_with_right_translation(rng):
    def element():
        return Heisenberg(rng.randint(-3, 3), rng.randint(-3, 3), rng.randint(-3, 3))

    for _ in range(50):
        A = [element() for _ in range(rng.randint(1, 5))]
        B = [element() for _ in range(rng.randint(1, 5))]
        g = element()
        assert (left_quotient_set(A, [mul(b, g) for b in B])
                == {mul(x, g) for x in left_quotient_set(A, B)})


def test_cover_of_difference_set_of_multiples_of_four():
    cert = cover_search(delta1(WindowedSet.multiples(4, 200)), 100, 8)
    assert cert.ell == 4


@pytest.mark.parametrize("argv", [
    ["example-3-13", "--horizon", "10000"],
    ["example-3-14", "--run-length", "3"],
    ["tempered", "--family", "multbox:paper", "--n-max", "10", "--C", "1.838"],
    ["criterion-5-3", "--f", "n^n"],
    ["heis-count", "--n", "3"],
    ["weyl", "--seq", "pow:3/2", "--N", "2000"],
    ["residues", "--seq", "pow:3/2", "--N", "2000", "--m", "5"],
    ["recurrence", "--system", "circle:alpha=sqrt2-1", "--obs", "arc:0,1/2", "--seq", "pow:3/2",
     "--N", "2000"],
    ["cover", "--set", "mult:4", "--horizon", "200", "--radius", "100"],
])
def test_cli_runs_are_byte_identical(capsys, argv):
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    second = capsys.readouterr().out
    assert first == second
    json.loads(first)
