import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from multrec.errors import InvalidInputError, RangeError, UnsupportedError
from multrec.multfunc import (
    ONE,
    ZERO,
    ConstantOne,
    Liouville,
    RandomFiniteValued,
    UnitValue,
    angle_gap,
    archimedean_twist,
    characters_mod,
    chord,
    cyclic_character,
    dirichlet_character,
    evaluate,
    is_finitely_generated,
    modify,
    nearest_root,
    nearest_root_bound,
    power,
    primitive_characters,
    root_projection,
    unit_algebra,
    value_order,
)


@pytest.fixture
def chi4():
    return dirichlet_character(4, 1)


@pytest.fixture
def exact_battery(chi4):
    return [
        Liouville(),
        ConstantOne(),
        chi4,
        dirichlet_character(5, 1),
        dirichlet_character(8, (1, 1)),
        dirichlet_character(45, (1, 2)),
        modify(chi4, {2: Fraction(1, 3)}),
        RandomFiniteValued(5, 7),
        unit_algebra("product", chi4, Liouville()),
        unit_algebra("conjugate", dirichlet_character(7, 1)),
        power(dirichlet_character(7, 1), -2),
    ]


@pytest.fixture
def random_pairs():
    rng = np.random.default_rng(3)
    return [
        (int(m), int(n)) for m, n in rng.integers(1, 3000, size=(500, 2))
    ]


def e(angle):
    return UnitValue.exact(Fraction(angle))


def test_unit_value_exact_arithmetic():
    assert e(Fraction(1, 3)) * e(Fraction(5, 6)) == e(Fraction(1, 6))
    assert e(Fraction(1, 3)) ** 3 == ONE
    assert e(Fraction(1, 3)).conjugate() == e(Fraction(2, 3))
    assert ZERO * e(Fraction(1, 3)) == ZERO
    assert str(e(Fraction(5, 6))) == "e(5/6)"


def test_unit_value_exact_quarters():
    assert e(Fraction(1, 2)).to_complex() == -1
    assert e(Fraction(1, 4)).to_complex() == 1j


def test_unit_value_off_circle():
    with pytest.raises(InvalidInputError):
        UnitValue.from_complex(0.5 + 0j)


def test_angle_gap_and_chord():
    assert angle_gap(e(Fraction(1, 10)), e(Fraction(9, 10))) == Fraction(1, 5)
    assert chord(ONE, e(Fraction(1, 2))) == pytest.approx(2.0)


def test_eval_liouville():
    assert evaluate(Liouville(), 60) == ONE
    assert evaluate(Liouville(), 30) == e(Fraction(1, 2))


def test_eval_character_zero(chi4):
    assert chi4.eval(6).is_zero
    assert not chi4.in_m


def test_eval_modified_character(chi4):
    f = modify(chi4, {2: Fraction(1, 3)})
    assert f.eval(6) == e(Fraction(5, 6))
    assert f.in_m


def test_eval_out_of_range():
    with pytest.raises(RangeError):
        Liouville().eval(2**63 + 1)
    with pytest.raises(InvalidInputError):
        Liouville().eval(0)


def test_character_mod_4(chi4):
    assert chi4.eval(1) == ONE
    assert chi4.eval(3) == e(Fraction(1, 2))
    assert chi4.conductor == 4
    assert chi4.is_primitive


def test_character_mod_1():
    chi = dirichlet_character(1, 0)
    assert all(chi.eval(n) == ONE for n in range(1, 50))
    assert chi.in_m
    assert chi.describe() == "char(1,0)"


def test_character_mod_5():
    chi = dirichlet_character(5, 1)
    assert chi.eval(2) == e(Fraction(1, 4))
    assert chi.order() == 4


def test_character_invalid_index():
    with pytest.raises(InvalidInputError):
        dirichlet_character(5, 4)
    with pytest.raises(InvalidInputError):
        dirichlet_character(8, 1)
    with pytest.raises(InvalidInputError):
        dirichlet_character(0, 0)


def test_character_periodicity():
    for chi in characters_mod(45) + characters_mod(16):
        q = chi.modulus
        for n in range(q + 1, 3 * q):
            if math.gcd(n, q) == 1:
                assert chi.eval(n) == chi.eval(n % q)


def test_characters_mod_count():
    characters = characters_mod(8)
    assert len(characters) == 4
    assert characters[0].is_principal
    assert len(characters_mod(45)) == 24


def test_character_conductors():
    assert dirichlet_character(8, (1, 0)).conductor == 4
    assert dirichlet_character(8, (0, 1)).conductor == 8
    assert dirichlet_character(9, 3).conductor == 3
    assert dirichlet_character(15, (0, 2)).conductor == 5


def test_primitive_characters():
    found = primitive_characters(4)
    assert [chi.modulus for chi in found] == [1, 3, 4]


def test_character_conjugate():
    chi = dirichlet_character(5, 1)
    assert chi.conjugate() == dirichlet_character(5, 3)
    for n in range(1, 20):
        assert chi.conjugate().eval(n) == chi.eval(n).conjugate()


def test_cyclic_character():
    assert cyclic_character(3, 1).eval(2) == e(Fraction(1, 2))
    assert cyclic_character(5, 1).eval(2) == e(Fraction(1, 4))


def test_cyclic_character_two():
    with pytest.raises(UnsupportedError):
        cyclic_character(2, 3)


def test_cyclic_character_distinct_values():
    for p, u in ((3, 2), (5, 1), (7, 1), (5, 2)):
        chi = cyclic_character(p, u)
        q = p**u
        values = [chi.eval(n) for n in range(1, q) if n % p]
        phi = len(values)
        assert len(set(values)) == phi
        gaps = [
            angle_gap(x, y)
            for i, x in enumerate(values)
            for y in values[i + 1 :]
        ]
        assert min(gaps) == Fraction(1, phi)


def test_modify_examples(chi4):
    f = modify(chi4, {2: Fraction(0)})
    assert f.eval(2) == ONE
    assert f.eval(3) == e(Fraction(1, 2))
    g = modify(dirichlet_character(1, 0), {})
    assert all(g.eval(n) == ONE for n in range(1, 30))


def test_modify_missing_override():
    with pytest.raises(InvalidInputError):
        modify(dirichlet_character(15, (1, 1)), {3: Fraction(1, 2)})


def test_modify_not_prime(chi4):
    with pytest.raises(InvalidInputError):
        modify(chi4, {4: Fraction(1, 2)})


def test_unit_algebra_power():
    f = unit_algebra("power", Liouville(), 2)
    assert all(f.eval(n) == ONE for n in range(1, 100))


def test_unit_algebra_conjugate_twist():
    f = unit_algebra("conjugate", archimedean_twist(1.5))
    value = f.eval(7).to_complex()
    assert value == pytest.approx(cmath.exp(-1.5j * math.log(7)))
    assert not f.is_exact


def test_unit_algebra_product(chi4):
    f = unit_algebra("product", chi4, Liouville())
    assert f.eval(15) == e(Fraction(1, 2))


def test_unit_algebra_invalid():
    with pytest.raises(InvalidInputError):
        unit_algebra("quotient", Liouville())
    with pytest.raises(InvalidInputError):
        power(Liouville(), 0)


def test_complete_multiplicativity(exact_battery, random_pairs):
    for f in exact_battery:
        for m, n in random_pairs:
            assert f.eval(m * n) == f.eval(m) * f.eval(n)


def test_complete_multiplicativity_float(random_pairs):
    f = unit_algebra(
        "product", archimedean_twist(0.7), dirichlet_character(7, 2)
    )
    for m, n in random_pairs:
        left = f.eval(m * n).to_complex()
        right = (f.eval(m) * f.eval(n)).to_complex()
        assert abs(left - right) < 1e-10


def test_prime_values_match_eval(exact_battery):
    primes = np.array([2, 3, 5, 7, 11, 13, 101])
    for f in exact_battery:
        expected = [f.eval(int(p)).to_complex() for p in primes]
        assert np.allclose(f.prime_values(primes), expected)


def test_random_finite_valued():
    f = RandomFiniteValued(3, 1)
    assert f.eval(101) == RandomFiniteValued(3, 1).eval(101)
    assert all(f.eval(p) ** 3 == ONE for p in (2, 3, 5, 7, 11))
    assert value_order(f) == 3
    with pytest.raises(InvalidInputError):
        RandomFiniteValued(0, 1)


def test_value_order():
    assert value_order(Liouville()) == 2
    modified = modify(dirichlet_character(4, 1), {2: Fraction(1, 3)})
    assert value_order(modified) == 6
    assert value_order(archimedean_twist(1.0)) is None
    assert is_finitely_generated(Liouville())
    assert not is_finitely_generated(archimedean_twist(1.0))


def test_order_is_lcm_of_parts():
    assert value_order(dirichlet_character(35, (1, 1))) == 12
    product = unit_algebra(
        "product", dirichlet_character(5, 1), dirichlet_character(7, 1)
    )
    assert value_order(product) == 12
    modified = modify(dirichlet_character(5, 1), {5: Fraction(1, 3)})
    assert value_order(modified) == 12
    assert sorted(chi.order() for chi in characters_mod(8)) == [1, 2, 2, 2]


def test_twist_is_never_exact():
    f = archimedean_twist(0.0)
    assert not f.is_exact
    assert f.eval(6).to_complex() == pytest.approx(1.0)
    assert value_order(f) is None


def test_nearest_root_examples():
    assert nearest_root(e(Fraction(1, 3)), 3) == 1
    lhs, _ = nearest_root_bound(e(Fraction(1, 3)), 3)
    assert lhs == pytest.approx(0.0)
    a = UnitValue.from_complex(cmath.exp(2j * math.pi * 0.3))
    assert nearest_root(a, 2) == 1
    lhs, rhs = nearest_root_bound(a, 2)
    assert lhs <= rhs
    b = UnitValue.from_complex(cmath.exp(2j * math.pi * 0.49))
    assert nearest_root(b, 1) == 0
    lhs, rhs = nearest_root_bound(b, 1)
    assert lhs <= rhs


def test_nearest_root_bound_random():
    rng = np.random.default_rng(5)
    for x in rng.random(2000):
        a = UnitValue.from_complex(cmath.exp(2j * math.pi * x))
        for ell in range(1, 13):
            lhs, rhs = nearest_root_bound(a, ell)
            assert lhs <= rhs + 1e-12


def test_nearest_root_invalid():
    with pytest.raises(InvalidInputError):
        nearest_root(ONE, 0)
    with pytest.raises(InvalidInputError):
        nearest_root(ZERO, 2)


def test_root_projection():
    g = root_projection(Liouville(), 2, 0.0)
    assert all(g.eval(p) == e(Fraction(1, 2)) for p in (2, 3, 5, 7))
    h = root_projection(archimedean_twist(1.0), 3, 3.0)
    assert all(h.eval(p) == ONE for p in (2, 3, 5, 7, 11))
    assert h.order() == 3
