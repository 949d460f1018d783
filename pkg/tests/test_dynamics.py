from fractions import Fraction

import numpy as np
import pytest

from core.dynamics import (Arc, Circle, Cyclic, IndicatorObservable, Product, check_observable,
                           exact_recurrence_terms, orbit_average, parse_observable, parse_system,
                           product_recurrence, recurrence_average, recurrence_term)
from core.exceptions import BoundaryAmbiguous, GrammarError
from core.sequences import floor_values


def test_cyclic_orbit_average():
    result = orbit_average(Cyclic(4), 0, IndicatorObservable.residue_set([0]), list(range(1, 101)))
    assert result.average_exact == Fraction(1, 4)
    assert result.boundary_failures == 0


def test_rational_circle_is_exact():
    obs = IndicatorObservable.arc(0, "1/2")
    result = orbit_average(Circle("1/4"), "0", obs, list(range(1, 101)))
    assert result.average_exact == Fraction(1, 2)


def test_irrational_circle_equidistributes():
    obs = parse_observable("arc:0,1/2")
    result = orbit_average(Circle("sqrt2-1"), "0", obs, list(range(1, 2001)))
    assert result.average == pytest.approx(0.5, abs=0.01)


def test_boundary_point_strict_and_lenient(small_policy):
    # (2 - sqrt2) + (sqrt2 - 1) = 1 lands on the arc endpoint 0
    system = Circle("sqrt2-1")
    obs = IndicatorObservable.arc(0, "1/2")
    with pytest.raises(BoundaryAmbiguous):
        orbit_average(system, "2-sqrt2", obs, [1, 2], policy=small_policy)
    lenient = orbit_average(system, "2-sqrt2", obs, [1, 2], policy=small_policy, strict=False)
    assert lenient.boundary_failures == 1
    assert lenient.average == 1.0
    assert not lenient.strict


def test_orbit_average_needs_values():
    with pytest.raises(ValueError):
        orbit_average(Cyclic(2), 0, IndicatorObservable.residue_set([0]), [])


def test_recurrence_term():
    assert recurrence_term(0.0, 0.5) == 0.5
    assert recurrence_term(0.5, 0.5) == 0
    assert recurrence_term(0.9, 0.25) == pytest.approx(0.15)
    assert recurrence_term(Fraction(1, 4), Fraction(1, 2)) == Fraction(1, 4)


def test_recurrence_average_along_three_halves_power():
    values = floor_values("pow:3/2", 5000)
    report = recurrence_average(Circle("sqrt2-1"), 0.25, values)
    assert report.beta_squared == 0.0625
    assert report.average >= report.beta_squared - 0.02
    assert 0 <= report.min_term <= report.max_term <= 0.25


def test_recurrence_average_rejects_bad_input():
    with pytest.raises(ValueError):
        recurrence_average(Circle("sqrt2-1"), 1.5, [1])
    with pytest.raises(TypeError):
        recurrence_average(Cyclic(3), 0.5, [1])


def test_recurrence_terms_stay_between_bounds(rng):
    for _ in range(20):
        beta = Fraction(rng.randint(1, 99), 100)
        values = [rng.randint(1, 10 ** 6) for _ in range(200)]
        terms, denominator, _ = exact_recurrence_terms("sqrt2-1", beta, values)
        low = max(Fraction(0), 2 * beta - 1)
        assert all(low <= Fraction(t, denominator) <= beta for t in terms)


def test_recurrence_term_is_symmetric_in_theta(rng):
    for _ in range(1000):
        theta = Fraction(rng.randint(1, 999), 1000)
        beta = Fraction(rng.randint(1, 1000), 1000)
        assert recurrence_term(theta, beta) == recurrence_term(1 - theta, beta)


def test_recurrence_average_is_exact_for_rational_rotations():
    # theta = 1/4, 1/2, 3/4, 0
    report = recurrence_average(Circle("1/4"), Fraction(1, 2), [1, 2, 3, 4])
    assert report.average_exact == Fraction(1, 4)
    assert report.error_bound == 0
    assert report.average == 0.25


def test_recurrence_error_bound_is_tiny_for_irrational_rotations():
    values = floor_values("pow:3/2", 1000)
    report = recurrence_average(Circle("sqrt2-1"), 0.3, values)
    assert 0 <= report.error_bound < Fraction(1, 2 ** 60)
    assert report.average == float(report.average_exact)


def test_cyclic_product_recurrence():
    report = product_recurrence([(Cyclic(4), IndicatorObservable.residue_set([0]))],
                                list(range(4, 404, 4)))
    assert report.average == pytest.approx(0.25)
    assert report.beta_squared == pytest.approx(0.0625)


def grid_overlap(length, shift, G):
    grid = np.arange(G)
    inside = grid < length
    return np.count_nonzero(inside & inside[(grid + shift) % G]) / G


def test_product_recurrence_matches_grid_count(rng):
    G, m = 360, 6
    for _ in range(10):
        arcs = [(rng.randint(1, G - 1), rng.randrange(G), rng.randint(1, G - 1)) for _ in range(2)]
        residues = sorted(rng.sample(range(m), 3))
        values = [rng.randint(1, 10 ** 4) for _ in range(300)]
        factors = [(Circle(Fraction(k, G)), IndicatorObservable.arc(Fraction(s, G), Fraction(L, G)))
                   for k, s, L in arcs]
        factors.append((Cyclic(m), IndicatorObservable.residue_set(residues)))
        A = np.isin(np.arange(m), residues)
        expected = np.mean([
            np.prod([grid_overlap(L, (a * k) % G, G) for k, _, L in arcs])
            * np.count_nonzero(A & A[(np.arange(m) + a) % m]) / m
            for a in values])
        assert product_recurrence(factors, values).average == pytest.approx(expected, abs=1e-9)


def test_cyclic_orbit_average_counts_residues_exactly(rng):
    for _ in range(20):
        m = rng.randint(1, 12)
        residues = rng.sample(range(m), rng.randint(1, m))
        values = [rng.randint(0, 10 ** 6) for _ in range(200)]
        x0 = rng.randrange(m)
        result = orbit_average(Cyclic(m), x0, IndicatorObservable.residue_set(residues), values)
        hits = sum((x0 + a) % m in residues for a in values)
        assert result.average_exact == Fraction(hits, len(values))


def test_observable_shape_must_match_the_system():
    with pytest.raises(GrammarError):
        check_observable(Circle("sqrt2-1"), parse_observable("arc:0,1/2|arc:0,1/4"))
    with pytest.raises(GrammarError):
        check_observable(Circle("sqrt2-1"), parse_observable("residues:0"))
    with pytest.raises(GrammarError):
        check_observable(parse_system("cyclic:m=2|cyclic:m=4"), parse_observable("residues:0"))
    with pytest.raises(ValueError):
        check_observable(Cyclic(3), parse_observable("arc:0,1/2"))
    check_observable(parse_system("circle:alpha=sqrt2-1|cyclic:m=4"),
                     parse_observable("arc:0,1/2|residues:0,1"))


def test_product_orbit_average():
    system = parse_system("cyclic:m=2|cyclic:m=4")
    assert isinstance(system, Product)
    obs = parse_observable("residues:0|residues:0")
    result = orbit_average(system, ("0", "0"), obs, list(range(1, 101)))
    assert result.average_exact == Fraction(1, 4)


def test_product_start_point_dimension():
    system = Product([Cyclic(2), Cyclic(3)])
    with pytest.raises(ValueError):
        orbit_average(system, ("0",), [IndicatorObservable.residue_set([0])] * 2, [1])


def test_wrapping_arc():
    obs = IndicatorObservable.arc("3/4", "1/2")
    assert obs.pieces == [(Fraction(0), Fraction(1, 4)), (Fraction(3, 4), Fraction(1))]
    assert obs.contains_point(Fraction(1, 8))
    assert not obs.contains_point(Fraction(1, 2))
    assert obs.contains_point(Fraction(7, 8))
    assert obs.measure == Fraction(1, 2)


def test_invalid_observables():
    with pytest.raises(ValueError):
        IndicatorObservable([Arc(Fraction(0), Fraction(1, 2)), Arc(Fraction(1, 4), Fraction(1, 2))])
    with pytest.raises(ValueError):
        IndicatorObservable.arc(1, "1/2")
    with pytest.raises(ValueError):
        orbit_average(Cyclic(4), 0, IndicatorObservable.residue_set([5]), [1])


@pytest.mark.parametrize("text", ["torus", "cyclic:m=x", "circle:beta=1"])
def test_parse_system_errors(text):
    with pytest.raises(GrammarError):
        parse_system(text)


@pytest.mark.parametrize("text", ["arc:0", "ball:1", "residues:a"])
def test_parse_observable_errors(text):
    with pytest.raises(GrammarError):
        parse_observable(text)
