"""Multiplicative rotation systems on products of circles

A system T_n (z_1, ..., z_l) = (f_1(n) z_1, ..., f_l(n) z_l) is simulated on
unions of arcs. Angles of exact values stay rational, so measures of
preimages and intersections are computed without rounding.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import (
    Dict,
    Iterator,
    List,
    Mapping,
    Optional,
    Protocol,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from multrec.errors import InvalidInputError, RangeError
from multrec.models import (
    Angle,
    AxiomsReport,
    Quadruple,
    RecurrenceEvent,
    RecurrenceScan,
)
from multrec.multfunc import ONE, UnitValue, chord
from multrec.numkernel import FACTOR_BUDGET
from multrec.parallel import progress

ARC_DENOMINATOR = 64
EVENT_THRESHOLD = 100
_TOLERANCE = 1e-12


def _format_angle(x: Angle) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return repr(x)


def _is_zero(x: Angle) -> bool:
    return x == 0 if isinstance(x, Fraction) else abs(x) <= _TOLERANCE


@dataclass(frozen=True)
class Arc:
    """The half-open arc [start, start + length) on R/Z"""

    start: Angle
    length: Angle

    def __post_init__(self) -> None:
        if not 0 < self.length <= 1:
            raise InvalidInputError(
                f"Arc length must lie in (0, 1], got {self.length}"
            )
        object.__setattr__(self, "start", self.start % 1)

    def intervals(self) -> List[Tuple[Angle, Angle]]:
        """Split the arc into intervals inside [0, 1]"""
        end = self.start + self.length
        if end <= 1:
            return [(self.start, end)]
        return [(self.start, 1), (0 * self.start, end - 1)]

    def __str__(self) -> str:
        end = self.start + self.length
        return f"[{_format_angle(self.start)},{_format_angle(end)})"


def _merge(intervals: List[Tuple[Angle, Angle]]) -> List[Tuple[Angle, Angle]]:
    merged: List[Tuple[Angle, Angle]] = []
    for lo, hi in sorted(intervals):
        if hi <= lo:
            continue
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


@dataclass(frozen=True)
class ArcSet:
    """A finite union of pairwise disjoint arcs, sorted by start"""

    arcs: Tuple[Arc, ...] = ()

    @classmethod
    def of(cls, *arcs: Arc) -> ArcSet:
        intervals = [i for arc in arcs for i in arc.intervals()]
        return cls._from_intervals(intervals)

    @classmethod
    def _from_intervals(cls, intervals: List[Tuple[Angle, Angle]]) -> ArcSet:
        return cls(
            tuple(Arc(lo, hi - lo) for lo, hi in _merge(intervals))
        )

    def intervals(self) -> List[Tuple[Angle, Angle]]:
        return [i for arc in self.arcs for i in arc.intervals()]

    def measure(self) -> Angle:
        return sum((arc.length for arc in self.arcs), Fraction(0))

    def rotate(self, angle: Angle) -> ArcSet:
        """Get the image of the set under x -> x + angle"""
        return ArcSet.of(
            *(Arc(arc.start + angle, arc.length) for arc in self.arcs)
        )

    def intersect(self, other: ArcSet) -> ArcSet:
        mine, theirs = self.intervals(), other.intervals()
        found = []
        for lo, hi in mine:
            for other_lo, other_hi in theirs:
                start, end = max(lo, other_lo), min(hi, other_hi)
                if start < end:
                    found.append((start, end))
        return ArcSet._from_intervals(found)

    def __str__(self) -> str:
        return "u".join(str(arc) for arc in self.arcs) or "{}"


class Evaluable(Protocol):
    def eval(self, n: int) -> UnitValue:
        ...

    def describe(self) -> str:
        ...


@dataclass(frozen=True)
class ValueTable:
    """A function given by a finite table of values, 1 elsewhere

    Nothing forces such a table to be multiplicative, which makes it a
    negative control for the action axioms.
    """

    values: Tuple[Tuple[int, UnitValue], ...]
    default: UnitValue = ONE

    @classmethod
    def of(cls, values: Mapping[int, UnitValue]) -> ValueTable:
        return cls(tuple(sorted(values.items())))

    def eval(self, n: int) -> UnitValue:
        return dict(self.values).get(n, self.default)

    def describe(self) -> str:
        inner = ",".join(f"{n}:{v}" for n, v in self.values)
        return f"table({{{inner}}})"


@dataclass(frozen=True)
class RotationSystem:
    """The action T_n z = (f_1(n) z_1, ..., f_l(n) z_l) on the l-torus"""

    functions: Tuple[Evaluable, ...]
    _cache: Dict[Tuple[int, int], Angle] = field(
        default_factory=dict, compare=False, hash=False, repr=False
    )

    def __post_init__(self) -> None:
        if not self.functions:
            raise InvalidInputError("A rotation system needs a function")
        for f in self.functions:
            if not getattr(f, "in_m", True):
                raise InvalidInputError(
                    f"{f.describe()} takes the value zero; systems need "
                    "unimodular functions"
                )

    @property
    def dimension(self) -> int:
        return len(self.functions)

    def angle(self, i: int, n: int) -> Angle:
        """Get the rotation angle of coordinate i under T_n"""
        key = (i, n)
        if key not in self._cache:
            value = self.functions[i].eval(n)
            if value.is_zero:
                raise InvalidInputError(
                    f"{self.functions[i].describe()} vanishes at {n}"
                )
            if len(self._cache) > 100_000:
                self._cache.clear()
            self._cache[key] = value.angle if value.is_exact else value.turns()
        return self._cache[key]

    def describe(self) -> str:
        return "x".join(f.describe() for f in self.functions)


def _check_sets(system: RotationSystem, A: Sequence[ArcSet]) -> None:
    if len(A) != system.dimension:
        raise InvalidInputError(
            f"Need {system.dimension} arc sets, got {len(A)}"
        )


def preimage(
    system: RotationSystem, n: int, A: Sequence[ArcSet]
) -> Tuple[ArcSet, ...]:
    """Get T_n^{-1} A, rotating each coordinate by -angle(f_i(n))

    Raises:
        InvalidInputError: if n < 1 or A has the wrong dimension
    """
    if n < 1:
        raise InvalidInputError(f"n must be positive, got {n}")
    _check_sets(system, A)
    return tuple(
        arcs.rotate(-system.angle(i, n)) for i, arcs in enumerate(A)
    )


def recurrence_measure(
    system: RotationSystem, p: int, q: int, A: Sequence[ArcSet]
) -> Angle:
    """Get mu(T_p^{-1} A n T_q^{-1} A), exact when all angles are rational"""
    measure: Angle = Fraction(1)
    for first, second in zip(preimage(system, p, A), preimage(system, q, A)):
        measure *= first.intersect(second).measure()
        if _is_zero(measure):
            return measure
    return measure


def _pairs(
    S: Union[Quadruple, Sequence[Tuple[int, int]]], start: int, N: int
) -> Iterator[Tuple[int, int, int]]:
    if isinstance(S, Quadruple):
        for n in range(start, N + 1):
            yield n, S.numerator(n), S.denominator(n)
        return
    for n in range(start, min(N, len(S)) + 1):
        p, q = S[n - 1]
        yield n, p, q


def scan_recurrence(
    system: RotationSystem,
    S: Union[Quadruple, Sequence[Tuple[int, int]]],
    A: Sequence[ArcSet],
    N: int,
    start: int = 1,
    threshold: int = EVENT_THRESHOLD,
) -> RecurrenceScan:
    """Find every n in [start, N] with mu(T_p^-1 A n T_q^-1 A) > 0

    For one-dimensional systems scanned with a single arc of length L, each
    event is also checked to satisfy |f(p) - f(q)| < 2 sin(pi min(L, 1/2)),
    and failures are recorded as bridge violations. A positive event puts
    the angles of f(p) and f(q) in one arc, so their circular distance is
    below L. With L = eps/2 the angles are within eps of each other and the
    chord bound is 2 sin(pi eps/2), the image of that distance on the
    unit circle.

    Args:
        system: The rotation system
        S: A quadruple (p_n, q_n) = (an + b, cn + d), or explicit pairs
            indexed from n = 1
        A: One arc set per coordinate
        N: End of the range
        start: Start of the range
        threshold: Event count from which the infinitude proxy is met

    Raises:
        InvalidInputError: if A has the wrong dimension
        RangeError: if some p_n or q_n is not positive or exceeds 2**63
    """
    _check_sets(system, A)
    bridge: Optional[float] = None
    if system.dimension == 1 and len(A[0].arcs) == 1:
        length = float(A[0].arcs[0].length)
        bridge = 2.0 * math.sin(math.pi * min(length, 0.5))
    events: List[RecurrenceEvent] = []
    violations: List[int] = []
    largest_gap, previous, scanned = 0, start - 1, 0
    total = max(0, N - start + 1)
    for n, p, q in progress(_pairs(S, start, N), desc="Events", total=total):
        scanned += 1
        if min(p, q) < 1 or max(p, q) > FACTOR_BUDGET:
            raise RangeError(f"Pair ({p}, {q}) at n = {n} is out of range")
        measure = recurrence_measure(system, p, q, A)
        if _is_zero(measure):
            continue
        events.append(RecurrenceEvent(n, p, q, measure))
        largest_gap = max(largest_gap, n - previous)
        previous = n
        if bridge is not None:
            f = system.functions[0]
            if chord(f.eval(p), f.eval(q)) >= bridge + _TOLERANCE:
                violations.append(n)
    largest_gap = max(largest_gap, start + scanned - 1 - previous)
    if violations:
        logging.warning(f"{len(violations)} events violate the arc bridge")
    return RecurrenceScan(
        events=events,
        scanned=scanned,
        largest_gap=largest_gap,
        threshold=threshold,
        bridge_violations=violations,
        arc_family=" x ".join(str(arcs) for arcs in A),
    )


def rational_arc_family(
    max_denominator: int = ARC_DENOMINATOR,
) -> Iterator[Arc]:
    """Enumerate arcs whose endpoints are rationals of bounded denominator"""
    points = sorted(
        {
            Fraction(j, k)
            for k in range(1, max_denominator + 1)
            for j in range(k)
        }
    )
    for start in points:
        for end in points:
            if end > start:
                yield Arc(start, end - start)
        yield Arc(start, Fraction(1))


def random_rational_arc(
    rng: np.random.Generator, max_denominator: int = ARC_DENOMINATOR
) -> Arc:
    """Draw an arc from the rational family of bounded denominator"""
    k = int(rng.integers(1, max_denominator + 1))
    start = Fraction(int(rng.integers(0, k)), k)
    length = Fraction(int(rng.integers(1, k + 1)), k)
    return Arc(start, length)


def sample_arc_family(
    count: int, seed: int = 0, max_denominator: int = ARC_DENOMINATOR
) -> List[Arc]:
    """Draw a seeded sub-family of the rational arc family"""
    rng = np.random.default_rng(seed)
    return [random_rational_arc(rng, max_denominator) for _ in range(count)]


def _same_angle(x: Angle, y: Angle) -> bool:
    if isinstance(x, Fraction) and isinstance(y, Fraction):
        return (x - y) % 1 == 0
    delta = float(x - y) % 1.0
    return min(delta, 1.0 - delta) <= 1e-9


def action_axioms_check(
    system: RotationSystem,
    trials: int = 10_000,
    seed: int = 0,
    max_n: int = 10_000,
    max_denominator: int = ARC_DENOMINATOR,
) -> AxiomsReport:
    """Check T_n T_m = T_nm and measure preservation on random samples

    Returns:
        The report, with the first failing (n, m) as witness
    """
    if trials < 1 or max_n < 1:
        raise InvalidInputError("trials and max_n must be positive")
    rng = np.random.default_rng(seed)
    composition = measure = 0
    witness: Optional[Tuple[int, int]] = None
    for _ in progress(range(trials), desc="Axioms", total=trials):
        n, m = (int(x) for x in rng.integers(1, max_n + 1, size=2))
        composed = all(
            _same_angle(
                system.angle(i, n * m),
                system.angle(i, n) + system.angle(i, m),
            )
            for i in range(system.dimension)
        )
        arcs = [
            ArcSet.of(random_rational_arc(rng, max_denominator))
            for _ in range(system.dimension)
        ]
        preserved = all(
            abs(after.measure() - before.measure()) <= _TOLERANCE
            for after, before in zip(preimage(system, n, arcs), arcs)
        )
        composition += not composed
        measure += not preserved
        if witness is None and not (composed and preserved):
            witness = (n, m)
    if witness is not None:
        logging.info(f"Action axioms fail, first at {witness}")
    return AxiomsReport(
        passed=witness is None,
        trials=trials,
        composition_failures=composition,
        measure_failures=measure,
        witness=witness,
    )
