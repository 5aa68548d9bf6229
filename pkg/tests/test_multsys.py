import math
from fractions import Fraction

import pytest

from multrec.errors import InvalidInputError, RangeError
from multrec.models import Quadruple
from multrec.multfunc import (
    Liouville,
    UnitValue,
    angle_gap,
    archimedean_twist,
    chord,
    dirichlet_character,
    modify,
)
from multrec.multsys import (
    Arc,
    ArcSet,
    RotationSystem,
    ValueTable,
    action_axioms_check,
    preimage,
    rational_arc_family,
    recurrence_measure,
    sample_arc_family,
    scan_recurrence,
)


@pytest.fixture
def quarter():
    return ArcSet.of(Arc(Fraction(0), Fraction(1, 4)))


@pytest.fixture
def liouville_system():
    return RotationSystem((Liouville(),))


@pytest.fixture
def consecutive():
    return Quadruple(1, 1, 1, 0)


def test_arc_invalid_length():
    with pytest.raises(InvalidInputError):
        Arc(Fraction(0), Fraction(0))
    with pytest.raises(InvalidInputError):
        Arc(Fraction(0), Fraction(3, 2))


def test_arc_normalizes_start():
    assert Arc(Fraction(5, 4), Fraction(1, 4)).start == Fraction(1, 4)


def test_arc_wraps():
    arc = Arc(Fraction(3, 4), Fraction(1, 2))
    assert arc.intervals() == [
        (Fraction(3, 4), Fraction(1)),
        (Fraction(0), Fraction(1, 4)),
    ]
    assert str(arc) == "[3/4,5/4)"


def test_arc_set_merges():
    arcs = ArcSet.of(
        Arc(Fraction(0), Fraction(1, 4)), Arc(Fraction(1, 8), Fraction(1, 4))
    )
    assert arcs.measure() == Fraction(3, 8)
    assert len(arcs.arcs) == 1


def test_arc_set_wrapped_arc():
    arcs = ArcSet.of(Arc(Fraction(3, 4), Fraction(1, 2)))
    assert arcs.measure() == Fraction(1, 2)
    assert str(arcs) == "[0/1,1/4)u[3/4,1/1)"


def test_arc_set_rotate_and_intersect(quarter):
    rotated = quarter.rotate(Fraction(1, 8))
    assert quarter.intersect(rotated).measure() == Fraction(1, 8)
    assert quarter.intersect(quarter.rotate(Fraction(1, 2))).measure() == 0
    assert str(ArcSet()) == "{}"


def test_preimage_liouville(liouville_system, quarter):
    (found,) = preimage(liouville_system, 8, [quarter])
    assert found == ArcSet.of(Arc(Fraction(1, 2), Fraction(1, 4)))


def test_preimage_invalid(liouville_system, quarter):
    with pytest.raises(InvalidInputError):
        preimage(liouville_system, 0, [quarter])
    with pytest.raises(InvalidInputError):
        preimage(liouville_system, 2, [quarter, quarter])


def test_recurrence_measure(liouville_system, quarter):
    assert recurrence_measure(liouville_system, 2, 3, [quarter]) == Fraction(
        1, 4
    )
    assert recurrence_measure(liouville_system, 2, 4, [quarter]) == 0


def test_recurrence_measure_product(quarter):
    chi = modify(dirichlet_character(5, 1), {5: Fraction(0)})
    system = RotationSystem((Liouville(), chi))
    # lambda agrees at 2 and 3, chi(2) = e(1/4) and chi(3) = e(3/4)
    assert recurrence_measure(system, 2, 3, [quarter, quarter]) == 0
    # chi(4) = e(1/2) and chi(9) = e(1/2)
    assert recurrence_measure(system, 4, 9, [quarter, quarter]) == Fraction(
        1, 16
    )


def test_rotation_system_requires_unimodular():
    with pytest.raises(InvalidInputError):
        RotationSystem((dirichlet_character(4, 1),))
    with pytest.raises(InvalidInputError):
        RotationSystem(())


def test_rotation_system_describe():
    system = RotationSystem((Liouville(), archimedean_twist(1.0)))
    assert system.dimension == 2
    assert system.describe() == "liouvillextwist(1.0)"


def test_scan_recurrence_first_event(liouville_system, quarter, consecutive):
    scan = scan_recurrence(liouville_system, consecutive, [quarter], 3)
    assert [e.n for e in scan.events] == [2]
    assert scan.first == 2
    assert scan.events[0].measure == Fraction(1, 4)
    assert scan.scanned == 3
    assert scan.largest_gap == 2
    assert not scan.infinitude_proxy
    assert scan.arc_family == "[0/1,1/4)"


def test_scan_recurrence_infinitude_proxy(
    liouville_system, quarter, consecutive
):
    scan = scan_recurrence(
        liouville_system, consecutive, [quarter], 2000, threshold=100
    )
    assert scan.count >= 100
    assert scan.infinitude_proxy
    assert scan.bridge_violations == []


def test_scan_recurrence_bridge_holds():
    chi = modify(dirichlet_character(7, 1), {7: Fraction(1, 5)})
    system = RotationSystem((chi,))
    arcs = [ArcSet.of(Arc(Fraction(1, 3), Fraction(1, 6)))]
    scan = scan_recurrence(system, Quadruple(2, 1, 3, 1), arcs, 1000)
    assert scan.count > 0
    assert scan.bridge_violations == []


def test_scan_recurrence_events_respect_arc_length():
    chi = modify(dirichlet_character(11, 1), {11: Fraction(1, 4)})
    system = RotationSystem((chi,))
    eps = Fraction(1, 4)
    arcs = [ArcSet.of(Arc(Fraction(1, 10), eps / 2))]
    scan = scan_recurrence(system, Quadruple(3, 1, 2, 1), arcs, 600)
    assert scan.count > 0
    assert scan.bridge_violations == []
    for event in scan.events:
        fp, fq = chi.eval(event.p), chi.eval(event.q)
        assert angle_gap(fp, fq) < eps / 2
        assert chord(fp, fq) < 2.0 * math.sin(math.pi * eps / 2)


def test_recurrence_measure_is_symmetric(quarter):
    chi = modify(dirichlet_character(9, 1), {3: Fraction(1, 7)})
    system = RotationSystem((Liouville(), chi))
    A = [quarter, ArcSet.of(Arc(Fraction(2, 3), Fraction(1, 2)))]
    for p in range(1, 40):
        for q in range(1, 40):
            assert recurrence_measure(system, p, q, A) == recurrence_measure(
                system, q, p, A
            )


def test_scan_recurrence_start(liouville_system, quarter, consecutive):
    scan = scan_recurrence(
        liouville_system, consecutive, [quarter], 10, start=3
    )
    assert scan.scanned == 8
    assert all(e.n >= 3 for e in scan.events)


def test_scan_recurrence_explicit_pairs(liouville_system, quarter):
    scan = scan_recurrence(liouville_system, [(2, 3), (2, 4)], [quarter], 5)
    assert scan.scanned == 2
    assert [e.n for e in scan.events] == [1]


def test_scan_recurrence_out_of_range(liouville_system, quarter):
    with pytest.raises(RangeError):
        scan_recurrence(liouville_system, [(0, 1)], [quarter], 1)


def test_rational_arc_family():
    arcs = list(rational_arc_family(2))
    assert arcs == [
        Arc(Fraction(0), Fraction(1, 2)),
        Arc(Fraction(0), Fraction(1)),
        Arc(Fraction(1, 2), Fraction(1)),
    ]


def test_sample_arc_family_seeded():
    first = sample_arc_family(20, seed=3)
    assert first == sample_arc_family(20, seed=3)
    assert all(arc.length.denominator <= 64 for arc in first)


def test_action_axioms_multiplicative():
    chi = modify(dirichlet_character(9, 1), {3: Fraction(1, 7)})
    system = RotationSystem((Liouville(), chi))
    report = action_axioms_check(system, trials=500)
    assert report.passed
    assert report.witness is None


def test_action_axioms_twist():
    system = RotationSystem((archimedean_twist(0.5),))
    assert action_axioms_check(system, trials=200).passed


def test_action_axioms_value_table_fails():
    table = ValueTable.of({2: UnitValue.exact(Fraction(1, 3))})
    assert table.describe() == "table({2:e(1/3)})"
    report = action_axioms_check(RotationSystem((table,)), 200, max_n=3)
    assert not report.passed
    assert report.composition_failures > 0
    assert report.measure_failures == 0
    assert report.witness is not None
