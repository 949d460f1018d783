import math
from fractions import Fraction

import numpy as np
import pytest
from mpmath import iv

from core.config import PrecisionPolicy
from core.exceptions import GrammarError, InvalidSequenceSpec, PrecisionExhausted
from core.numbers import (HighPrecisionReal, fraction_floor, integer_sqrt_array, interval_precision,
                          iv_endpoints)
from core.sequences import (AffineSqrt, LogPower, NLogN, NSqOverLog, RationalPolynomial,
                            RationalPower, RealPolynomial, RealPower, floor_eval, floor_values,
                            frac_eval, integer_root, parse_sequence_spec)
from core.sequences.exact import first_index_below_one


# --- integer roots ---

@pytest.mark.parametrize("x,q,expected", [
    (27, 3, 3),
    (26, 3, 2),
    (10 ** 40, 2, 10 ** 20),
    (10 ** 40 - 1, 2, 10 ** 20 - 1),
    (2 ** 100, 5, 2 ** 20),
    (7, 1, 7),
])
def test_integer_root(x, q, expected):
    assert integer_root(x, q) == expected


def test_integer_root_rejects_negative():
    with pytest.raises(ValueError):
        integer_root(-1, 2)


def test_integer_sqrt_array_matches_isqrt(rng):
    small = [rng.randrange(0, 10 ** 6) for _ in range(500)]
    large = [rng.randrange(2 ** 50, 2 ** 53) for _ in range(200)]
    squares = [k * k for k in range(1000)] + [k * k - 1 for k in range(1, 1000)]
    x = np.array(small + large + squares, dtype=np.int64)
    assert integer_sqrt_array(x).tolist() == [math.isqrt(int(v)) for v in x]


# --- constants ---

def test_high_precision_real_enclosure():
    lam = HighPrecisionReal("sqrt2-1")
    assert not lam.is_rational
    lo, hi = lam.enclosure(200)
    assert lo < hi
    assert hi - lo < Fraction(1, 2 ** 200)
    # (lam + 1)^2 = 2
    assert (lo + 1) ** 2 < 2 < (hi + 1) ** 2


def test_high_precision_real_rational_is_exact():
    x = HighPrecisionReal("6/4")
    assert x.is_rational
    assert x.as_fraction() == Fraction(3, 2)
    assert x.enclosure(64) == (Fraction(3, 2), Fraction(3, 2))


def test_high_precision_real_rejects_symbols():
    with pytest.raises(GrammarError):
        HighPrecisionReal("x+1")


# --- exact variants ---

def test_rational_power_floors():
    assert floor_values("pow:3/2", 10) == [math.isqrt(n ** 3) for n in range(1, 11)]
    assert floor_values("pow:3/2", 5) == [1, 2, 5, 8, 11]


def test_rational_power_canonical_form_is_reduced():
    spec = parse_sequence_spec("pow:6/4")
    assert isinstance(spec, RationalPower)
    assert spec.canonical() == "pow:3/2"


def test_affine_sqrt_floors():
    spec = AffineSqrt(2, 2)
    assert [floor_eval(spec, n).value for n in (1, 2, 4)] == [4, 6, 12]
    assert floor_values("affsqrt:2,2", 50) == [2 * n + math.isqrt(4 * n) for n in range(1, 51)]


def test_fractional_part_is_certified(policy):
    lo, hi = frac_eval("pow:3/2", 2, policy=policy)
    assert 0 <= lo < hi < 1
    # {2 sqrt 2} = 2 sqrt 2 - 2 lies inside
    assert (lo + 2) ** 2 <= 8 <= (hi + 2) ** 2
    assert hi - lo <= Fraction(1, 2 ** policy.tolerance_bits)
    assert abs(float(lo) - (2 * math.sqrt(2) - 2)) < 1e-9


def test_perfect_power_has_zero_fractional_part():
    result = floor_eval("pow:3/2", 4)
    assert result.value == 8
    assert result.certified
    assert result.frac_interval == (Fraction(0), Fraction(0))


def test_scaled_fractional_part():
    assert frac_eval("pow:1", 3, Fraction(1, 2)) == (Fraction(1, 2), Fraction(1, 2))


def test_rational_polynomial():
    spec = parse_sequence_spec("poly:1/2,0,1")
    assert isinstance(spec, RationalPolynomial)
    assert spec.canonical() == "poly:1/2,0,1"
    assert floor_values(spec, 3) == [1, 3, 5]


@pytest.mark.parametrize("text,error", [
    ("pow:-1", InvalidSequenceSpec),
    ("affsqrt:0,0", InvalidSequenceSpec),
    ("affsqrt:1", GrammarError),
    ("poly:-1,5", InvalidSequenceSpec),
    ("fib", GrammarError),
])
def test_invalid_specs(text, error):
    with pytest.raises(error):
        parse_sequence_spec(text)


@pytest.mark.parametrize("text", ["poly:1,-5,5", "poly:1,-20,201/2", "poly:sqrt2,-5,5"])
def test_polynomial_dipping_below_one_is_rejected(text):
    with pytest.raises(InvalidSequenceSpec):
        parse_sequence_spec(text)


def test_polynomial_dipping_only_between_integers_is_accepted():
    # n^2 - 3n + 3 has its minimum 3/4 at n = 3/2
    spec = parse_sequence_spec("poly:1,-3,3")
    assert floor_values(spec, 3) == [1, 1, 3]
    real = parse_sequence_spec("poly:sqrt2,-20,101")
    assert isinstance(real, RealPolynomial)
    assert all(v >= 1 for v in floor_values(real, 20))


def test_first_index_below_one():
    assert first_index_below_one([Fraction(1), Fraction(-5), Fraction(5)]) == 2
    # (n - 10)^2 + 1/2
    assert first_index_below_one([Fraction(1), Fraction(-20), Fraction(201, 2)]) == 10
    assert first_index_below_one([Fraction(1), Fraction(-3), Fraction(3)]) is None
    assert first_index_below_one([Fraction(1, 2)]) == 1


# --- analytic variants ---

def test_nlogn_floors_and_clamp():
    assert [floor_eval(NLogN(), n).value for n in (1, 3, 10)] == [1, 3, 23]


def test_nsqlog_floors():
    assert [floor_eval(NSqOverLog(), n).value for n in (1, 2, 10)] == [1, 5, 43]


def test_logpower_floors():
    spec = LogPower("2")
    assert [floor_eval(spec, n).value for n in (1, 2, 100)] == [1, 1, 21]


def test_real_power_and_real_polynomial():
    assert isinstance(parse_sequence_spec("pow:sqrt2"), RealPower)
    assert [floor_eval("pow:sqrt2", n).value for n in (2, 10)] == [2, 25]
    spec = parse_sequence_spec("poly:sqrt2,sqrt3,0")
    assert isinstance(spec, RealPolynomial)
    assert floor_values(spec, 2) == [3, 9]


def test_analytic_path_agrees_with_integer_path():
    analytic = RealPower("3/2")
    exact = RationalPower(3, 2)
    policy = PrecisionPolicy()
    for n in range(2, 80):
        if math.isqrt(n) ** 2 == n:
            continue
        assert analytic.floor(n, policy).value == exact.floor(n, policy).value


def test_integer_value_exhausts_interval_precision(small_policy):
    # 4^(3/2) = 8 exactly; an enclosure always straddles 8
    with pytest.raises(PrecisionExhausted) as info:
        RealPower("3/2").floor(4, small_policy)
    assert info.value.result is not None
    assert not info.value.result.certified


def test_batch_matches_pointwise():
    assert floor_values("nlogn", 30) == [floor_eval("nlogn", n).value for n in range(1, 31)]


def test_monotone_values():
    values = floor_values("pow:3/2", 500)
    assert all(a <= b for a, b in zip(values, values[1:]))
    assert values[0] >= 1


def test_interval_precision_restores_the_context():
    saved = iv.prec
    with interval_precision(300):
        assert iv.prec == 300
    assert iv.prec == saved
    with pytest.raises(RuntimeError):
        with interval_precision(200):
            raise RuntimeError("boom")
    assert iv.prec == saved


def test_nlogn_at_three_is_certified():
    result = floor_eval("nlogn", 3)
    assert result.value == 3
    assert result.certified
    lo, hi = result.frac_interval
    assert abs(float(lo) - (3 * math.log(3) - 3)) < 1e-9


def interval_floors_of_power(n, p):
    with interval_precision(256):
        lo, hi = iv_endpoints(iv.sqrt(iv.mpf(n ** p)))
    return fraction_floor(lo), fraction_floor(hi)


@pytest.mark.parametrize("p,N", [
    (3, 3000),
    (5, 3000),
    pytest.param(3, 10 ** 5, marks=pytest.mark.slow),
    pytest.param(5, 10 ** 5, marks=pytest.mark.slow),
])
def test_half_integer_powers_agree_with_wide_intervals(p, N):
    values = floor_values(f"pow:{p}/2", N)
    for n, value in enumerate(values, 1):
        assert interval_floors_of_power(n, p) == (value, value)
