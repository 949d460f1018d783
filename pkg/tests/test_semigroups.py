from fractions import Fraction

import numpy as np
import pytest

from core.exceptions import (GrammarError, InvalidElement, NotAGroup, PrimeUniverseOverflow,
                             TagMismatch)
from core.semigroups import (FinPerm, Heisenberg, IntAdd, NatMul, PolyHeis, QPos,
                             clear_denominators, identity_of, inv, left_quotient_set, mul,
                             parse_element, prime_universe, right_translate_quotient,
                             sorted_elements)


def heis_matrix(x):
    return np.array([[1, x.a, x.c], [0, 1, x.b], [0, 0, 1]], dtype=np.int64)


def random_heis(rng, r=5):
    return Heisenberg(rng.randint(-r, r), rng.randint(-r, r), rng.randint(-r, r))


def test_prime_universe():
    assert prime_universe(5) == (2, 3, 5, 7, 11)


def test_natmul_exponent_vectors():
    x = NatMul.from_int(360)
    assert x.exponents == (3, 2, 1)
    assert x.value == 360
    assert str(x) == "natmul:2^3*3^2*5"
    assert str(NatMul.from_int(1)) == "natmul:1"
    assert mul(x, NatMul.from_int(7)).value == 2520


def test_qpos_quotients():
    x = QPos.from_fraction(Fraction(3, 4))
    assert x.exponents == (-2, 1)
    assert x.value == Fraction(3, 4)
    assert inv(x).value == Fraction(4, 3)
    assert mul(x, inv(x)) == identity_of(x)
    assert not x.is_natural()
    assert NatMul.from_int(12).to_qpos().is_natural()


def test_structure_checks():
    with pytest.raises(TagMismatch):
        mul(IntAdd(1), NatMul())
    with pytest.raises(NotAGroup):
        inv(NatMul.from_int(2))
    with pytest.raises(InvalidElement):
        NatMul.from_int(0)
    with pytest.raises(TagMismatch):
        mul(PolyHeis(2), PolyHeis(3))


def test_heisenberg_matches_matrix_product(rng):
    for _ in range(50):
        x, y = random_heis(rng), random_heis(rng)
        assert np.array_equal(heis_matrix(mul(x, y)), heis_matrix(x) @ heis_matrix(y))
        assert mul(x, inv(x)) == Heisenberg(0, 0, 0)


def test_heisenberg_associative(rng):
    for _ in range(50):
        x, y, z = random_heis(rng), random_heis(rng), random_heis(rng)
        assert mul(mul(x, y), z) == mul(x, mul(y, z))


def test_finitary_permutations():
    p = FinPerm.from_cycles([[1, 2, 3]])
    assert p(1) == 2 and p(3) == 1 and p(9) == 9
    assert str(p) == "perm:(1 2 3)"
    assert mul(p, p)(1) == 3
    assert mul(p, inv(p)) == FinPerm()
    assert str(FinPerm()) == "perm:()"
    swap = FinPerm.from_cycles([[1, 2]])
    # composition applies the right factor first
    assert mul(swap, p)(1) == 1
    assert mul(p, swap)(1) == 3
    with pytest.raises(InvalidElement):
        FinPerm.from_cycles([[1, 2], [2, 3]])


def test_polynomial_heisenberg(rng):
    x = parse_element("polyheis:q=2;f=x+1;g=x;h=x^2")
    assert x.degrees() == (1, 1, 2)
    assert mul(x, inv(x)) == x.identity()
    assert parse_element(str(x)) == x
    y = PolyHeis(3, (1, 2), (2,), (1, 0, 1))
    z = PolyHeis(3, (2,), (1, 1), (0,))
    assert mul(mul(y.identity(), y), z) == mul(y, z)
    assert mul(mul(y, z), inv(z)) == y


def test_left_quotient_in_groups_and_semigroups():
    A = [IntAdd(0), IntAdd(1)]
    assert left_quotient_set(A, [IntAdd(5)]) == {IntAdd(5), IntAdd(4)}
    nat = left_quotient_set([NatMul.from_int(1), NatMul.from_int(2)], [NatMul.from_int(6)])
    assert {x.value for x in nat} == {6, 3}
    # 4 does not divide 6
    assert left_quotient_set([NatMul.from_int(4)], [NatMul.from_int(6)]) == frozenset()
    assert left_quotient_set([], [IntAdd(1)]) == frozenset()


def test_right_translate_quotient_in_heisenberg(rng):
    for _ in range(20):
        A = [random_heis(rng, 2) for _ in range(4)]
        B = [random_heis(rng, 2) for _ in range(4)]
        g = random_heis(rng, 2)
        expected = {mul(x, g) for x in left_quotient_set(A, B)}
        assert right_translate_quotient(A, B, g) == expected


def test_clear_denominators():
    g = clear_denominators([QPos.from_fraction(Fraction(3, 4)), QPos.from_fraction(Fraction(5, 6))])
    assert g.value == 12
    assert clear_denominators([]) == NatMul()


def test_sorted_elements():
    elements = [IntAdd(3), IntAdd(-1), IntAdd(0)]
    assert [x.k for x in sorted_elements(elements)] == [-1, 0, 3]


@pytest.mark.parametrize("text,expected", [
    ("int:5", IntAdd(5)),
    ("natmul:2^3*3*5", NatMul((3, 1, 1))),
    ("natmul:120", NatMul((3, 1, 1))),
    ("qpos:3/4", QPos((-2, 1))),
    ("qpos:2^-2*3", QPos((-2, 1))),
    ("heis:(1,0,2)", Heisenberg(1, 0, 2)),
    ("perm:(1 2 3)(4 5)", FinPerm(((1, 2), (2, 3), (3, 1), (4, 5), (5, 4)))),
])
def test_parse_element(text, expected):
    assert parse_element(text) == expected


@pytest.mark.parametrize("text,error", [
    ("5", GrammarError),
    ("float:1.5", GrammarError),
    ("natmul:2^-1", InvalidElement),
    ("heis:(1,2)", GrammarError),
    ("polyheis:q=4;f=x", InvalidElement),
])
def test_parse_element_errors(text, error):
    with pytest.raises(error):
        parse_element(text)


def test_prime_universe_overflow():
    with pytest.raises(PrimeUniverseOverflow):
        parse_element("natmul:13", K=5)
    with pytest.raises(PrimeUniverseOverflow):
        NatMul.from_int(13, K=5)


def test_polynomial_heisenberg_with_mixed_degrees():
    y = PolyHeis(3, (1, 2), (2,), (1, 0, 1))
    z = PolyHeis(3, (2,), (1, 1), ())
    # h = (x^2 + 1) + (x + 2)(x + 1) = 2x^2 + 3x + 3
    assert mul(y, z) == PolyHeis(3, (1, 1), (1, 0), (2, 0, 0))
    assert inv(y) == PolyHeis(3, (2, 1), (1,), (2, 2, 0))
    assert mul(y, inv(y)) == PolyHeis(3)


# --- algebraic laws on random elements ---

def random_poly(rng, q=3):
    return tuple(rng.randrange(q) for _ in range(rng.randint(0, 4)))


def random_element(tag, rng):
    if tag == "int":
        return IntAdd(rng.randint(-10 ** 6, 10 ** 6))
    if tag == "natmul":
        return NatMul(tuple(rng.randint(0, 4) for _ in range(rng.randint(0, 5))))
    if tag == "qpos":
        return QPos(tuple(rng.randint(-4, 4) for _ in range(rng.randint(0, 5))))
    if tag == "heis":
        return random_heis(rng, 50)
    if tag == "perm":
        support = rng.sample(range(1, 10), rng.randint(0, 6))
        return FinPerm.from_cycles([support] if len(support) > 1 else [])
    return PolyHeis(3, random_poly(rng), random_poly(rng), random_poly(rng))


GROUP_TAGS = ["int", "qpos", "heis", "perm", "polyheis"]


@pytest.mark.parametrize("tag", ["natmul"] + GROUP_TAGS)
def test_multiplication_is_associative(rng, tag):
    for _ in range(10 ** 4):
        x, y, z = (random_element(tag, rng) for _ in range(3))
        assert mul(mul(x, y), z) == mul(x, mul(y, z))


@pytest.mark.parametrize("tag", GROUP_TAGS)
def test_inverses_and_identity(rng, tag):
    for _ in range(2000):
        x = random_element(tag, rng)
        e = identity_of(x)
        assert mul(x, inv(x)) == e
        assert mul(inv(x), x) == e
        assert inv(inv(x)) == x
        assert mul(e, x) == x == mul(x, e)


def test_natural_quotients_are_rational_quotients_in_the_cone(rng):
    for _ in range(200):
        A = [NatMul.from_int(rng.randint(1, 60)) for _ in range(rng.randint(1, 5))]
        B = [NatMul.from_int(rng.randint(1, 60)) for _ in range(rng.randint(1, 5))]
        natural = {x.to_qpos() for x in left_quotient_set(A, B)}
        rational = left_quotient_set([a.to_qpos() for a in A], [b.to_qpos() for b in B])
        assert natural == {y for y in rational if y.is_natural()}
        assert len(rational) <= len(A) * len(B)
