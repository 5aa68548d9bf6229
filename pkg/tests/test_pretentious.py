import math
from fractions import Fraction

import pytest
import sympy

from multrec.errors import InvalidInputError, RangeError
from multrec.models import DistanceWindow
from multrec.multfunc import (
    ConstantOne,
    Liouville,
    archimedean_twist,
    dirichlet_character,
    modify,
    unit_algebra,
)
from multrec.pretentious import (
    aperiodicity_profile,
    concentration_residual,
    correlation,
    distance,
    halasz_gap,
    log_average,
    prime_character_sum,
)


@pytest.fixture
def chi3():
    return dirichlet_character(3, 1)


@pytest.fixture
def unit_battery(chi3):
    return [
        ConstantOne(),
        Liouville(),
        modify(chi3, {3: 0}),
        modify(dirichlet_character(5, 1), {5: Fraction(1, 3)}),
        archimedean_twist(1.0),
    ]


def harmonic(X):
    return math.fsum(1 / n for n in range(1, X + 1))


def test_distance_to_itself():
    window = DistanceWindow(1, 1000)
    assert distance(Liouville(), Liouville(), window) == 0.0


def test_distance_liouville_to_one():
    window = DistanceWindow(1, 100)
    expected = math.sqrt(math.fsum(2 / p for p in sympy.primerange(2, 101)))
    assert distance(Liouville(), ConstantOne(), window) == pytest.approx(
        expected
    )


def test_distance_symmetric(chi3):
    window = DistanceWindow(10, 500)
    f = modify(chi3, {3: 0})
    assert distance(f, Liouville(), window) == pytest.approx(
        distance(Liouville(), f, window)
    )


def test_distance_window_excludes_lower_end():
    # Only p = 3 lies in (2, 3]
    window = DistanceWindow(2, 3)
    assert distance(Liouville(), ConstantOne(), window) == pytest.approx(
        math.sqrt(2 / 3)
    )


def test_distance_triangle_inequality(unit_battery):
    window = DistanceWindow(1, 2000)
    for f in unit_battery:
        for g in unit_battery:
            for h in unit_battery:
                assert distance(f, h, window) <= (
                    distance(f, g, window) + distance(g, h, window) + 1e-12
                )


@pytest.mark.parametrize("y, z, x", [(1, 50, 1000), (10, 11, 400), (2, 3, 5)])
def test_distance_adds_over_adjacent_windows(unit_battery, y, z, x):
    for f in unit_battery:
        whole = distance(f, Liouville(), DistanceWindow(y, x)) ** 2
        parts = (
            distance(f, Liouville(), DistanceWindow(y, z)) ** 2
            + distance(f, Liouville(), DistanceWindow(z, x)) ** 2
        )
        assert whole == pytest.approx(parts)


def test_distance_invalid_window():
    with pytest.raises(InvalidInputError):
        distance(Liouville(), ConstantOne(), DistanceWindow(10, 10))
    with pytest.raises(InvalidInputError):
        distance(Liouville(), ConstantOne(), DistanceWindow(0, 10))


def test_log_average_constant():
    result = log_average(ConstantOne(), 100)
    assert result.value == pytest.approx(harmonic(100) / math.log(100))
    assert result.X == 100


def test_log_average_progression():
    # f(2n) = -f(n) for the Liouville function
    plain = log_average(Liouville(), 500).value
    even = log_average(Liouville(), 500, progression=(2, 0)).value
    assert even == pytest.approx(-plain)


def test_log_average_invalid():
    with pytest.raises(InvalidInputError):
        log_average(ConstantOne(), 1)
    with pytest.raises(InvalidInputError):
        log_average(ConstantOne(), 10, progression=(3, 3))


def test_log_average_out_of_range():
    with pytest.raises(RangeError):
        log_average(ConstantOne(), 10, progression=(2**62, 1))


def test_log_average_worker_count_independent():
    f = modify(dirichlet_character(5, 1), {5: 0})
    serial = log_average(f, 3000, workers=1).value
    parallel = log_average(f, 3000, workers=2).value
    assert serial == parallel


def test_correlation_constant():
    value = correlation(ConstantOne(), ConstantOne(), 1, 0, 1, 1, 200)
    assert value == pytest.approx(harmonic(200) / math.log(200))


def test_correlation_liouville_square():
    # lambda(n) lambda(4n) = 1
    value = correlation(Liouville(), Liouville(), 1, 0, 4, 0, 200)
    assert value == pytest.approx(harmonic(200) / math.log(200))


@pytest.mark.parametrize(
    "forms", [(1, 0, 1, 1), (3, 1, 2, 1), (6, 3, 6, 2), (1, 4, 5, 0)]
)
def test_correlation_bounded_by_harmonic_sum(unit_battery, forms):
    X = 300
    bound = harmonic(X) / math.log(X)
    for f in unit_battery:
        for g in unit_battery:
            assert abs(correlation(f, g, *forms, X)) <= bound + 1e-12


def test_correlation_nonpositive_argument():
    with pytest.raises(RangeError):
        correlation(Liouville(), Liouville(), 1, 0, 1, -5, 100)


def test_halasz_gap_constant():
    report = halasz_gap(ConstantOne(), 100)
    assert report.rhs == pytest.approx(1.0)
    assert report.lhs == pytest.approx(harmonic(100) / math.log(100))
    assert report.ratio == pytest.approx(report.lhs)


def test_aperiodicity_profile_finds_character(chi3):
    profile = aperiodicity_profile(chi3, 3, 200, [-1.0, 0.0, 1.0])
    assert profile.argmin_character == chi3.describe()
    assert profile.argmin_t == pytest.approx(0.0, abs=1e-4)
    # chi3(3) = 0 leaves the single term 1/3
    assert profile.infimum == pytest.approx(math.sqrt(1 / 3), abs=1e-6)
    assert len(profile.distances) == 2 * 3
    assert profile.resolution == 1.0


def test_aperiodicity_profile_without_refinement():
    profile = aperiodicity_profile(
        Liouville(), 3, 100, [0.0, 0.5], refine=False
    )
    assert not profile.refined
    assert min(d for _, _, d in profile.distances) == profile.infimum


def test_aperiodicity_profile_infimum_does_not_rise():
    f = modify(dirichlet_character(5, 1), {5: Fraction(1, 3)})
    coarse = aperiodicity_profile(f, 3, 100, [0.0, 0.5], refine=False)
    finer = aperiodicity_profile(
        f, 3, 100, [-1.0, 0.0, 0.25, 0.5, 2.0], refine=False
    )
    wider = aperiodicity_profile(f, 6, 100, [0.0, 0.5], refine=False)
    assert finer.infimum <= coarse.infimum
    assert wider.infimum <= coarse.infimum


def test_aperiodicity_profile_imprimitive():
    profile = aperiodicity_profile(
        ConstantOne(), 4, 50, [0.0], include_imprimitive=True
    )
    labels = {label for label, _, _ in profile.distances}
    assert "char(2,0)" in labels
    assert profile.infimum == 0.0


def test_aperiodicity_profile_grid_outside_range():
    with pytest.raises(InvalidInputError):
        aperiodicity_profile(Liouville(), 1, 10, [0.0, 11.0])
    with pytest.raises(InvalidInputError):
        aperiodicity_profile(Liouville(), 1, 10, [])


def test_prime_character_sum_empty():
    assert prime_character_sum(ConstantOne(), 0.0, 20, 10) == 0j


def test_prime_character_sum_constant():
    value = prime_character_sum(ConstantOne(), 0.0, 2, 10)
    assert value == pytest.approx(1 / 2 + 1 / 3 + 1 / 5 + 1 / 7)


def test_prime_character_sum_includes_lower_end():
    value = prime_character_sum(Liouville(), 0.0, 3, 5)
    assert value == pytest.approx(-(1 / 3 + 1 / 5))


@pytest.mark.parametrize("a", [0.0, 0.7, -2.5])
def test_prime_character_sum_conjugate_symmetry(a):
    for f in (dirichlet_character(5, 1), archimedean_twist(1.3)):
        conj_f = unit_algebra("conjugate", f)
        value = prime_character_sum(f, a, 3, 2000)
        mirrored = prime_character_sum(conj_f, -a, 3, 2000)
        assert mirrored == pytest.approx(value.conjugate())


def test_concentration_residual_constant():
    report = concentration_residual(
        ConstantOne(), dirichlet_character(1, 0), 0.0, 6, 1, 50
    )
    assert report.lhs == pytest.approx(0.0)
    assert report.p_k == 3
    assert report.tail_distance == pytest.approx(0.0)
    assert report.rhs_core == pytest.approx(math.log(50) / math.sqrt(3))
    assert report.in_regime


def test_concentration_residual_out_of_regime():
    report = concentration_residual(
        Liouville(), dirichlet_character(1, 0), 0.0, 6, 1, 1000
    )
    assert report.tail_distance > 1.0
    assert not report.in_regime


def test_concentration_residual_preconditions():
    chi = dirichlet_character(1, 0)
    with pytest.raises(InvalidInputError):
        concentration_residual(ConstantOne(), chi, 0.0, 9, 1, 50)
    with pytest.raises(InvalidInputError):
        concentration_residual(ConstantOne(), chi, 0.0, 6, 3, 50)
    with pytest.raises(InvalidInputError):
        concentration_residual(
            ConstantOne(), dirichlet_character(5, 1), 0.0, 6, 1, 50
        )
