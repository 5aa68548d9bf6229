"""Recurrence of {(an + b) / (cn + d)} along multiplicative functions

The quadruple (a, b, c, d) is good when, after dividing by its gcd, a = c
and either b = d or a divides bd. For good quadruples every function
returns close to itself along the two linear forms; for the others a
certificate exhibits a function keeping the values apart.
"""
import logging
import math
from fractions import Fraction
from functools import reduce
from typing import List, Optional, Tuple

import numpy as np

from multrec.errors import InvalidInputError, RangeError
from multrec.models import (
    CaseTag,
    CertificateCheck,
    CounterexampleCertificate,
    CriterionResult,
    DensityEstimate,
    FejerApprox,
    FejerLowerBound,
    Quadruple,
    ScanTrace,
)
from multrec.multfunc import (
    MultFunction,
    UnitValue,
    angle_gap,
    archimedean_twist,
    characters_mod,
    chord,
    chord_from_gap,
    cyclic_character,
    dirichlet_character,
    modify,
)
from multrec.numkernel import FACTOR_BUDGET, factorize, totient, valuation
from multrec.parallel import chunk_ranges, ordered_map, progress

DEFAULT_SLACK = 0.05
MIN_ASYMPTOTIC_N0 = 1000
FEJER_R_BUDGET = 2**15
FEJER_GRID = 10_000


def normalize(q: Quadruple) -> Quadruple:
    """Divide a quadruple by gcd(a, b, c, d)

    Raises:
        InvalidInputError: if a or c is not positive
    """
    if q.a < 1 or q.c < 1:
        raise InvalidInputError(
            f"a = {q.a} and c = {q.c} must be positive integers"
        )
    g = reduce(math.gcd, (q.a, q.b, q.c, q.d))
    return Quadruple(q.a // g, q.b // g, q.c // g, q.d // g, normalized=True)


def criterion(q: Quadruple) -> CriterionResult:
    """Decide whether a = c and (b = d or a | bd) after normalization"""
    n = normalize(q)
    holds = n.a == n.c and (n.b == n.d or (n.b * n.d) % n.a == 0)
    return CriterionResult(holds, n)


def _check_forms(q: Quadruple, first: int, last: int) -> None:
    if q.numerator(first) < 1 or q.denominator(first) < 1:
        raise RangeError(
            f"Arguments {q.a}n + {q.b} and {q.c}n + {q.d} must be positive "
            f"from n = {first}"
        )
    if max(q.numerator(last), q.denominator(last)) > FACTOR_BUDGET:
        raise RangeError(f"Arguments exceed the 2**63 budget at n = {last}")


def _first_positive(q: Quadruple) -> int:
    """Get the least n >= 1 with both linear forms positive"""
    n = 1
    for coefficient, offset in ((q.a, q.b), (q.c, q.d)):
        if coefficient * n + offset < 1:
            n = max(n, -(-(1 - offset) // coefficient))
    return n


def _scan(
    f: MultFunction, g: MultFunction, q: Quadruple, N: int
) -> ScanTrace:
    _check_forms(q, 1, N)
    best, best_gap, argmin = math.inf, None, None
    improvements: List[Tuple[int, float]] = []
    flagged = scanned = 0
    for n in progress(range(1, N + 1), desc="Scanning", total=N):
        scanned += 1
        u, v = f.eval(q.numerator(n)), g.eval(q.denominator(n))
        if u.is_zero or v.is_zero:
            flagged += 1
            continue
        if u.is_exact and v.is_exact:
            gap = angle_gap(u, v)
            value = chord_from_gap(gap)
            improved = gap < best_gap if best_gap is not None else value < best
        else:
            gap, value = None, chord(u, v)
            improved = value < best
        if not improved:
            continue
        best, best_gap, argmin = value, gap, n
        improvements.append((n, value))
        if value == 0.0:
            break
    if flagged:
        logging.warning(f"{flagged} samples skipped on zero values")
    return ScanTrace(
        quadruple=q,
        scanned=scanned,
        minimum=best,
        argmin=argmin,
        minimum_gap=best_gap,
        improvements=improvements,
        flagged=flagged,
    )


def liminf_scan(f: MultFunction, q: Quadruple, N: int) -> ScanTrace:
    """Trace the running minimum of |f(an + b) - f(cn + d)| for n <= N

    Exact values are compared through their angular gaps, so the trace is
    free of rounding. The scan stops early once the minimum reaches zero.

    Raises:
        RangeError: if an argument is not positive or exceeds 2**63
    """
    return _scan(f, f, q, N)


def pair_scan(
    f: MultFunction, g: MultFunction, a: int, N: int, shift: int = 1
) -> ScanTrace:
    """Trace the running minimum of |f(an + shift) - g(an)| for n <= N"""
    return _scan(f, g, Quadruple(a, shift, a, 0), N)


def _hit_chunk(
    task: Tuple[MultFunction, Quadruple, float, int, int]
) -> List[int]:
    """Mark each n of a chunk: 1 for a hit, 0 for a miss, -1 for a zero"""
    f, q, epsilon, lo, hi = task
    marks = []
    for n in range(lo, hi):
        u, v = f.eval(q.numerator(n)), f.eval(q.denominator(n))
        if u.is_zero or v.is_zero:
            marks.append(-1)
        else:
            marks.append(1 if chord(u, v) < epsilon else 0)
    return marks


def density_estimate(
    f: MultFunction,
    epsilon: float,
    a: int,
    b: int,
    d: int,
    X: int,
    workers: int = 1,
) -> DensityEstimate:
    """Estimate the logarithmic density of {n : |f(an+b) - f(an+d)| < eps}

    Args:
        f: The function
        epsilon: The closeness threshold, positive
        a, b, d: The linear forms an + b and an + d
        X: End of the range, at least 2
        workers: Number of worker processes

    Raises:
        InvalidInputError: if epsilon <= 0 or X < 2
        RangeError: if an argument is not positive or exceeds 2**63
    """
    if epsilon <= 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    if X < 2:
        raise InvalidInputError(f"Range end must be at least 2, got {X}")
    q = Quadruple(a, b, a, d)
    _check_forms(q, 1, X)
    tasks = [(f, q, epsilon, lo, hi) for lo, hi in chunk_ranges(1, X + 1)]
    marks = np.array(
        [m for chunk in ordered_map(_hit_chunk, tasks, workers) for m in chunk]
    )
    weights = 1.0 / np.arange(1, X + 1, dtype=float)
    running = np.cumsum(np.where(marks == 1, weights, 0.0)) / np.cumsum(
        weights
    )
    tail = running[max(1, X // 10) - 1 :]
    checkpoints = np.unique(
        np.logspace(0, math.log10(X), num=50).astype(int).clip(1, X)
    )
    return DensityEstimate(
        epsilon=epsilon,
        quadruple=q,
        X=X,
        upper=float(tail.max()),
        lower=float(tail.min()),
        final=float(running[-1]),
        hits=int((marks == 1).sum()),
        flagged=int((marks == -1).sum()),
        samples=[(int(x), float(running[x - 1])) for x in checkpoints],
    )


def _asymptotic_threshold(q: Quadruple, t: float, slack: float) -> int:
    """Get the least n past which the twist's error terms stay below slack"""

    def error(n: int) -> float:
        total = 0.0
        for coefficient, offset in ((q.a, q.b), (q.c, q.d)):
            x = abs(offset) / (coefficient * n)
            if x >= 1:
                return math.inf
            total += x / (1 - x)
        return abs(t) * total

    hi = max(MIN_ASYMPTOTIC_N0, _first_positive(q))
    if error(hi) <= slack:
        return hi
    lo = hi
    while error(hi) > slack:
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        lo, hi = (lo, mid) if error(mid) <= slack else (mid, hi)
    return hi


def _archimedean(q: Quadruple, slack: float) -> CounterexampleCertificate:
    t = math.pi / math.log(q.a / q.c)
    return CounterexampleCertificate(
        f=archimedean_twist(t),
        quadruple=q,
        case=CaseTag.ARCHIMEDEAN,
        eta=2.0,
        n0=_asymptotic_threshold(q, t, slack),
        slack=slack,
        details={"t": t},
    )


def _odd_prime(q: Quadruple, p: int) -> CounterexampleCertificate:
    u = valuation(q.b - q.d, p) + 1
    chi = cyclic_character(p, u)
    gap = Fraction(1, totient(p**u))
    return CounterexampleCertificate(
        f=modify(chi, {p: Fraction(0)}),
        quadruple=q,
        case=CaseTag.ODD_PRIME,
        eta=chord_from_gap(gap),
        eta_gap=gap,
        n0=_first_positive(q),
        details={"p": p, "u": u},
    )


def _two(q: Quadruple) -> CounterexampleCertificate:
    u = valuation(q.b - q.d, 2) + 1
    best, best_gap = None, Fraction(-1)
    for chi in characters_mod(2**u):
        gap = angle_gap(chi.value_at(q.b), chi.value_at(q.d))
        if gap > best_gap:
            best, best_gap = chi, gap
    return CounterexampleCertificate(
        f=modify(best, {2: Fraction(0)}),
        quadruple=q,
        case=CaseTag.TWO,
        eta=chord_from_gap(best_gap),
        eta_gap=best_gap,
        n0=_first_positive(q),
        details={"p": 2, "u": u, "character": best.describe()},
    )


def _positive_valuation(
    q: Quadruple, p: int, ell: int
) -> CounterexampleCertificate:
    chi = dirichlet_character(p, 0 if p > 2 else (0,))
    values = {chi.value_at(r) for r in range(1, p) if r % p}
    steps = 2 * ell * totient(p)
    best_theta, best_gap = Fraction(0), Fraction(0)
    for j in range(1, steps):
        theta = Fraction(j, steps)
        shifted = UnitValue.exact(theta)
        gap = min(angle_gap(shifted * v, w) for v in values for w in values)
        if gap > best_gap:
            best_theta, best_gap = theta, gap
    return CounterexampleCertificate(
        f=modify(chi, {p: best_theta / ell}),
        quadruple=q,
        case=CaseTag.POSITIVE_VALUATION,
        eta=chord_from_gap(best_gap),
        eta_gap=best_gap,
        n0=_first_positive(q),
        details={"p": p, "l": ell, "theta": best_theta},
    )


def build_counterexample(
    q: Quadruple, slack: float = DEFAULT_SLACK
) -> CounterexampleCertificate:
    """Build a function keeping f(an + b) away from f(cn + d)

    The construction depends on the normalized quadruple:

    * a != c: the twist n^{it} with t = pi / log(a/c), valid from a stated
      n0 with the given slack
    * some p^k || a with p not dividing bd, p odd: a cyclic character
      modulo p^u, u the least exponent with p^u not dividing b - d
    * the same with p = 2: the character modulo 2^u separating b from d
      the most
    * p^k || a and p^l || bd with 0 < l < k: the principal character
      modulo p sending p to e(theta / l)

    Raises:
        InvalidInputError: if the quadruple satisfies the criterion
    """
    result = criterion(q)
    if result.holds:
        raise InvalidInputError(
            f"({q}) satisfies the recurrence criterion; no counterexample "
            "exists"
        )
    n = result.quadruple
    if n.a != n.c:
        return _archimedean(n, slack)
    bd = n.b * n.d
    for p, k in factorize(n.a).entries:
        ell = valuation(bd, p)
        if k <= ell:
            continue
        logging.info(f"Building counterexample at p={p}, k={k}, l={ell}")
        if ell > 0:
            return _positive_valuation(n, p, ell)
        if p == 2:
            return _two(n)
        return _odd_prime(n, p)
    raise InvalidInputError(f"No prime separates ({q})")


def pair_gap(theta1: Fraction, theta2: Fraction) -> Fraction:
    """Get the least angular gap between f(n + 2) and g(n) for n = 0 mod 2"""
    gaps = []
    for first, second in ((theta1, theta2), (theta2, theta1)):
        period = 2 * first.denominator
        for ell in range(2, 2 + period):
            for s in (Fraction(0), Fraction(1, 2)):
                delta = (ell * first - second + s) % 1
                gaps.append(min(delta, 1 - delta))
    return min(gaps)


def build_pair_counterexample(
    theta1: Fraction = Fraction(1, 3), theta2: Fraction = Fraction(1, 5)
) -> CounterexampleCertificate:
    """Build f, g with |f(n + 2) - g(n)| bounded away from zero

    Both functions modify the nonprincipal character modulo 4 at 2, to
    e(theta1) and e(theta2) respectively. Odd n give a gap of 2; even n
    give the least gap between e(l theta1) +-1 and e(theta2) +-1 for l >= 2
    and the symmetric family.

    Raises:
        InvalidInputError: if the angles leave no gap
    """
    theta1, theta2 = Fraction(theta1) % 1, Fraction(theta2) % 1
    gap = min(pair_gap(theta1, theta2), Fraction(1, 2))
    if gap == 0:
        raise InvalidInputError(
            f"Angles {theta1} and {theta2} leave no gap at even n"
        )
    chi = dirichlet_character(4, 1)
    return CounterexampleCertificate(
        f=modify(chi, {2: theta1}),
        g=modify(chi, {2: theta2}),
        quadruple=Quadruple(1, 2, 1, 0),
        case=CaseTag.PAIR_SHIFT_2,
        eta=chord_from_gap(gap),
        eta_gap=gap,
        n0=1,
        details={"theta1": theta1, "theta2": theta2},
    )


def verify_certificate(
    cert: CounterexampleCertificate, N: int
) -> CertificateCheck:
    """Scan n0 <= n <= N for a violation of the certified gap

    Exact certificates compare angular gaps as rationals; asymptotic ones
    compare chords against eta - slack.

    Returns:
        The outcome, with the first violating n as witness on failure
    """
    q, f, g = cert.quadruple, cert.f, cert.second
    if N < cert.n0:
        return CertificateCheck(True, 0, math.inf)
    _check_forms(q, cert.n0, N)
    minimum, minimum_gap, scanned = math.inf, None, 0
    span = range(cert.n0, N + 1)
    for n in progress(span, desc="Verifying", total=len(span)):
        scanned += 1
        u, v = f.eval(q.numerator(n)), g.eval(q.denominator(n))
        if cert.eta_gap is not None:
            if u.is_zero or v.is_zero:
                return CertificateCheck(False, scanned, 0.0, witness=n)
            gap = angle_gap(u, v)
            if minimum_gap is None or gap < minimum_gap:
                minimum_gap = gap
                minimum = chord_from_gap(gap)
            if gap < cert.eta_gap:
                logging.info(f"Certificate fails at n={n}")
                return CertificateCheck(
                    False, scanned, minimum, witness=n, minimum_gap=gap
                )
        else:
            value = chord(u, v)
            minimum = min(minimum, value)
            if value < cert.eta - cert.slack:
                logging.info(f"Certificate fails at n={n}")
                return CertificateCheck(False, scanned, minimum, witness=n)
    return CertificateCheck(
        True, scanned, minimum, minimum_gap=minimum_gap
    )


def fejer_coefficients(epsilon: float, R: int) -> np.ndarray:
    """Get c_l = (1 - l/R) sin^2(pi l eps) / (pi^2 l^2 eps), l < R"""
    ells = np.arange(1, R, dtype=float)
    coefficients = np.empty(R)
    coefficients[0] = epsilon
    coefficients[1:] = (
        (1.0 - ells / R)
        * np.sin(np.pi * ells * epsilon) ** 2
        / (np.pi**2 * ells**2 * epsilon)
    )
    return coefficients


def fejer_grid(epsilon: float, size: int = FEJER_GRID) -> np.ndarray:
    """Get a uniform grid on [0, 1) refined with the tent's corners"""
    return np.union1d(np.arange(size) / size, [0.0, epsilon, 1.0 - epsilon])


def _sup_error(epsilon: float, R: int, grid: np.ndarray) -> float:
    approx = FejerApprox(
        epsilon, R, fejer_coefficients(epsilon, R), R, 0.0, False
    )
    return float(np.max(np.abs(approx.tent(grid) - approx.polynomial(grid))))


def minimal_fejer_order(epsilon: float, grid: np.ndarray) -> int:
    """Find the least R whose sup error on the grid is below eps**2

    Raises:
        RangeError: if no R up to the Fejer budget is accurate enough
    """
    target = epsilon**2
    hi = 1
    while _sup_error(epsilon, hi, grid) >= target:
        if hi >= FEJER_R_BUDGET:
            raise RangeError(
                f"No Fejer order up to {FEJER_R_BUDGET} reaches error "
                f"{target}"
            )
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _sup_error(epsilon, mid, grid) < target:
            hi = mid
        else:
            lo = mid
    return hi


def fejer(
    epsilon: float, R: Optional[int] = None, grid_size: int = FEJER_GRID
) -> FejerApprox:
    """Approximate the tent of half-width epsilon by its Fejer mean

    Args:
        epsilon: Half-width of the tent, in (0, 1/4)
        R: Order of the mean; the least accurate order when omitted
        grid_size: Points of the uniform grid the sup norm is taken over

    Raises:
        InvalidInputError: if epsilon or R is out of range
    """
    if not 0 < epsilon < 0.25:
        raise InvalidInputError(f"epsilon must lie in (0, 1/4), got {epsilon}")
    grid = fejer_grid(epsilon, grid_size)
    minimal_R = minimal_fejer_order(epsilon, grid)
    if R is None:
        R = minimal_R
    if R < 1:
        raise InvalidInputError(f"R must be positive, got {R}")
    sup_error = _sup_error(epsilon, R, grid)
    meets_bound = sup_error < epsilon**2
    if not meets_bound:
        logging.warning(
            f"R={R} leaves sup error {sup_error:.3g} >= eps^2; "
            f"the least accurate order is {minimal_R}"
        )
    return FejerApprox(
        epsilon=epsilon,
        R=R,
        coefficients=fejer_coefficients(epsilon, R),
        minimal_R=minimal_R,
        sup_error=sup_error,
        meets_bound=meets_bound,
    )


def fejer_lower_bound(
    f: MultFunction,
    q: Quadruple,
    approx: FejerApprox,
    X: int,
    g: Optional[MultFunction] = None,
) -> FejerLowerBound:
    """Average the indicator, the tent and its Fourier lower bound

    With theta_n the angle of f(an + b) conj(g(cn + d)) in [0, 1), the
    averages of 1[theta_n in [0,eps) u (1-eps,1)], of the tent at theta_n
    and of eps^2 + Re sum_{1 <= |l| < R} c_l e(l theta_n) are returned.
    n with a zero value are skipped.
    """
    g = f if g is None else g
    _check_forms(q, 1, X)
    ns, thetas = [], []
    for n in progress(range(1, X + 1), desc="Angles", total=X):
        u, v = f.eval(q.numerator(n)), g.eval(q.denominator(n))
        if u.is_zero or v.is_zero:
            continue
        ns.append(n)
        thetas.append((u * v.conjugate()).turns())
    if not ns:
        raise InvalidInputError("Every sample has a zero value")
    weights = 1.0 / np.asarray(ns, dtype=float)
    theta = np.asarray(thetas)
    eps = approx.epsilon
    indicator = ((theta < eps) | (theta > 1.0 - eps)).astype(float)
    bound = eps**2 + approx.oscillating_part(theta)
    total = math.fsum(weights.tolist())

    def average(values: np.ndarray) -> float:
        return math.fsum((weights * values).tolist()) / total

    return FejerLowerBound(
        indicator_average=average(indicator),
        tent_average=average(approx.tent(theta)),
        fourier_bound=average(bound),
    )
