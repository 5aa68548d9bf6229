import dataclasses
import math
from fractions import Fraction

import numpy as np
import pytest

from multrec.errors import InvalidInputError, RangeError
from multrec.models import CaseTag, Quadruple
from multrec.multfunc import (
    ConstantOne,
    Liouville,
    dirichlet_character,
)
from multrec.recurrence import (
    build_counterexample,
    build_pair_counterexample,
    criterion,
    density_estimate,
    fejer,
    fejer_coefficients,
    fejer_lower_bound,
    liminf_scan,
    normalize,
    pair_gap,
    pair_scan,
    verify_certificate,
)


@pytest.fixture
def consecutive():
    return Quadruple(1, 1, 1, 0)


@pytest.fixture(scope="module")
def tent_approx():
    return fejer(0.2, grid_size=2000)


@pytest.mark.parametrize(
    "quad, holds",
    [
        ((6, 3, 6, 2), True),
        ((1, 1, 1, 0), True),
        ((3, 5, 3, 5), True),
        ((2, 0, 1, 1), False),
        ((2, 2, 4, 4), False),
        ((4, 2, 4, 6), False),
        ((3, 1, 3, 2), False),
    ],
)
def test_criterion(quad, holds):
    assert criterion(Quadruple(*quad)).holds is holds


@pytest.mark.parametrize("k", [2, 3, 7, 12])
def test_criterion_unchanged_by_common_factor(k):
    for a in range(1, 7):
        for c in range(1, 7):
            for b in range(-2, 5):
                for d in range(-2, 5):
                    q = Quadruple(a, b, c, d)
                    scaled = Quadruple(k * a, k * b, k * c, k * d)
                    first, second = criterion(q), criterion(scaled)
                    assert first.holds is second.holds
                    assert first.quadruple == second.quadruple


def test_normalize():
    q = normalize(Quadruple(4, 2, 4, 6))
    assert (q.a, q.b, q.c, q.d) == (2, 1, 2, 3)
    assert q.normalized


def test_normalize_invalid():
    with pytest.raises(InvalidInputError):
        normalize(Quadruple(0, 1, 1, 1))


def test_liminf_scan_stops_at_zero(consecutive):
    trace = liminf_scan(Liouville(), consecutive, 100)
    assert trace.minimum == 0.0
    assert trace.argmin == 2
    assert trace.scanned == 2
    assert trace.improvements == [(1, 2.0), (2, 0.0)]
    assert trace.minimum_gap == 0


def test_liminf_scan_counts_zero_values():
    trace = liminf_scan(dirichlet_character(4, 1), Quadruple(1, 1, 1, 0), 10)
    assert trace.flagged == 10
    assert trace.argmin is None


def test_liminf_scan_out_of_range():
    with pytest.raises(RangeError):
        liminf_scan(Liouville(), Quadruple(1, -3, 1, 0), 10)
    with pytest.raises(RangeError):
        liminf_scan(Liouville(), Quadruple(2**62, 0, 1, 0), 10)


def test_counterexample_rejects_good_quadruple():
    with pytest.raises(InvalidInputError):
        build_counterexample(Quadruple(6, 3, 6, 2))


def test_counterexample_archimedean():
    cert = build_counterexample(Quadruple(2, 0, 1, 1))
    assert cert.case is CaseTag.ARCHIMEDEAN
    assert cert.eta == 2.0
    assert cert.n0 == 1000
    assert cert.details["t"] == pytest.approx(math.pi / math.log(2))
    check = verify_certificate(cert, 3000)
    assert check.passed
    assert check.scanned == 2001
    assert check.minimum >= 2.0 - cert.slack


def test_counterexample_archimedean_slack_moves_threshold():
    tight = build_counterexample(Quadruple(2, 0, 1, 1), slack=1e-4)
    assert tight.n0 > 1000
    assert verify_certificate(tight, tight.n0 + 500).passed


@pytest.mark.parametrize(
    "quad, u, gap",
    [
        ((3, 1, 3, 2), 1, Fraction(1, 2)),
        ((5, 1, 5, 6), 2, Fraction(1, 20)),
        ((9, 1, 9, 4), 2, Fraction(1, 6)),
    ],
)
def test_counterexample_odd_prime(quad, u, gap):
    cert = build_counterexample(Quadruple(*quad))
    assert cert.case is CaseTag.ODD_PRIME
    assert cert.details["u"] == u
    assert cert.eta_gap == gap
    check = verify_certificate(cert, 2000)
    assert check.passed
    assert check.minimum_gap >= gap


def test_counterexample_two():
    cert = build_counterexample(Quadruple(4, 1, 4, 3))
    assert cert.case is CaseTag.TWO
    assert cert.eta_gap == Fraction(1, 2)
    assert cert.details["character"] == "char(4,1)"
    assert verify_certificate(cert, 2000).passed


@pytest.mark.parametrize("quad", [(4, 2, 4, 1), (9, 3, 9, 1)])
def test_counterexample_positive_valuation(quad):
    cert = build_counterexample(Quadruple(*quad))
    assert cert.case is CaseTag.POSITIVE_VALUATION
    assert cert.details["l"] == 1
    assert cert.eta_gap == Fraction(1, 2)
    assert verify_certificate(cert, 2000).passed


def test_counterexample_normalizes():
    cert = build_counterexample(Quadruple(6, 2, 6, 4))
    assert (cert.quadruple.a, cert.quadruple.b) == (3, 1)
    assert verify_certificate(cert, 500).passed


def test_tampered_certificate_fails():
    cert = build_counterexample(Quadruple(3, 1, 3, 2))
    tampered = dataclasses.replace(cert, f=ConstantOne())
    check = verify_certificate(tampered, 100)
    assert not check.passed
    assert check.witness == 1
    assert check.minimum_gap == 0


def test_overclaimed_gap_fails():
    cert = build_pair_counterexample()
    tampered = dataclasses.replace(cert, eta_gap=Fraction(1, 4))
    check = verify_certificate(tampered, 2000)
    assert not check.passed
    assert check.witness is not None


def test_verify_below_threshold():
    cert = build_counterexample(Quadruple(2, 0, 1, 1))
    check = verify_certificate(cert, 10)
    assert check.passed
    assert check.scanned == 0


def test_pair_gap():
    assert pair_gap(Fraction(1, 3), Fraction(1, 5)) == Fraction(1, 30)


def test_pair_counterexample():
    cert = build_pair_counterexample()
    assert cert.case is CaseTag.PAIR_SHIFT_2
    assert cert.eta_gap == Fraction(1, 30)
    assert cert.g is not None
    check = verify_certificate(cert, 5000)
    assert check.passed
    assert check.minimum_gap >= Fraction(1, 30)


def test_pair_counterexample_without_gap():
    with pytest.raises(InvalidInputError):
        build_pair_counterexample(Fraction(0), Fraction(0))


def test_pair_scan():
    cert = build_pair_counterexample()
    trace = pair_scan(cert.f, cert.g, 1, 1000, shift=2)
    assert trace.minimum_gap >= Fraction(1, 30)
    assert trace.flagged == 0


def test_certificate_record():
    cert = build_pair_counterexample()
    record = cert.to_record()
    assert record["case"] == "pair-shift-2"
    assert record["quad"] == [1, 2, 1, 0]
    assert record["eta_gap"] == "1/30"
    assert record["f"] == "modify(char(4,1),{2:1/3})"


def test_density_estimate():
    X = 1000
    f = Liouville()
    estimate = density_estimate(f, 0.5, 1, 1, 0, X)
    weights = [1 / n for n in range(1, X + 1)]
    hits = [f.eval(n + 1) == f.eval(n) for n in range(1, X + 1)]
    expected = math.fsum(w for w, hit in zip(weights, hits) if hit)
    assert estimate.final == pytest.approx(expected / math.fsum(weights))
    assert estimate.hits == sum(hits)
    assert estimate.lower <= estimate.final <= estimate.upper
    assert estimate.samples[0] == (1, 0.0)


@pytest.mark.parametrize(
    "f, forms",
    [
        (Liouville(), (1, 1, 0)),
        (dirichlet_character(5, 1), (2, 1, 3)),
        (dirichlet_character(7, 1), (3, 2, 5)),
    ],
)
def test_density_estimate_monotone_in_epsilon(f, forms):
    finals = [
        density_estimate(f, eps, *forms, 400).final
        for eps in (0.1, 0.5, 1.0, 1.5, 2.0, 2.5)
    ]
    assert finals == sorted(finals)


def test_density_estimate_invalid():
    with pytest.raises(InvalidInputError):
        density_estimate(Liouville(), 0.0, 1, 1, 0, 100)
    with pytest.raises(InvalidInputError):
        density_estimate(Liouville(), 0.5, 1, 1, 0, 1)


def test_fejer_coefficients():
    c = fejer_coefficients(0.25, 3)
    assert c[0] == 0.25
    expected = (2 / 3) * math.sin(math.pi / 4) ** 2 / (math.pi**2 * 0.25)
    assert c[1] == pytest.approx(expected)


def test_fejer_meets_bound(tent_approx):
    assert tent_approx.coefficients[0] == 0.2
    assert tent_approx.meets_bound
    assert tent_approx.sup_error < 0.2**2
    assert tent_approx.R == tent_approx.minimal_R


def test_fejer_polynomial_is_close_to_tent(tent_approx):
    x = np.linspace(0.0, 1.0, 997)
    error = np.abs(tent_approx.tent(x) - tent_approx.polynomial(x))
    assert error.max() < 0.2**2 + 0.01


def test_fejer_low_order():
    approx = fejer(0.2, R=2, grid_size=2000)
    assert not approx.meets_bound
    assert approx.minimal_R > 2


def test_fejer_invalid():
    with pytest.raises(InvalidInputError):
        fejer(0.3)
    with pytest.raises(InvalidInputError):
        fejer(0.0)


def test_fejer_lower_bound_chain(consecutive, tent_approx):
    bound = fejer_lower_bound(Liouville(), consecutive, tent_approx, 500)
    assert bound.chain_holds
    assert 0.0 < bound.indicator_average < 1.0


def test_fejer_lower_bound_all_zero(tent_approx):
    with pytest.raises(InvalidInputError):
        fejer_lower_bound(
            dirichlet_character(4, 1), Quadruple(2, 0, 2, 0), tent_approx, 50
        )
