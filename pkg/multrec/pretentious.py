"""Pretentious distances, logarithmic averages and related diagnostics

Every sum over primes or over n is accumulated with math.fsum, which is
correctly rounded and therefore independent of the order and grouping of
the terms. Parallel chunks are merged in range order before summation, so
results do not depend on the worker count.
"""
import cmath
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
import sympy
from scipy import optimize

from multrec.errors import InvalidInputError, RangeError
from multrec.models import (
    AperiodicityProfile,
    ConcentrationReport,
    DistanceWindow,
    HalaszReport,
    LogAverage,
)
from multrec.multfunc import (
    ConstantOne,
    DirichletCharacter,
    MultFunction,
    Product,
    archimedean_twist,
    characters_mod,
    primitive_characters,
)
from multrec.numkernel import FACTOR_BUDGET, factorize, primes_up_to
from multrec.parallel import chunk_ranges, ordered_map, progress

_Task = Tuple[
    MultFunction, Optional[MultFunction], int, int, int, int, int, int
]


def _window_primes(window: DistanceWindow) -> np.ndarray:
    if window.lower < 1 or window.upper <= window.lower:
        raise InvalidInputError(
            f"Invalid prime window ({window.lower}, {window.upper}]; "
            "need 1 <= A < B"
        )
    primes = primes_up_to(window.upper)
    return primes[primes > window.lower]


def _distance_squared(
    fv: np.ndarray, gv: np.ndarray, primes: np.ndarray
) -> float:
    terms = (1.0 - (fv * np.conj(gv)).real) / primes
    return max(0.0, math.fsum(terms.tolist()))


def distance_squared(
    f: MultFunction, g: MultFunction, window: DistanceWindow
) -> float:
    """Get sum_{A < p <= B} (1 - Re f(p) conj(g(p))) / p"""
    primes = _window_primes(window)
    return _distance_squared(
        f.prime_values(primes), g.prime_values(primes), primes
    )


def distance(
    f: MultFunction, g: MultFunction, window: DistanceWindow
) -> float:
    """Get the pretentious distance D(f, g; A, B)

    Args:
        f: First function
        g: Second function
        window: The primes A < p <= B summed over

    Returns:
        The square root of sum_{A < p <= B} (1 - Re f(p) conj(g(p))) / p

    Raises:
        InvalidInputError: if the window is empty or starts below 1
        RangeError: if B exceeds the prime enumeration budget
    """
    return math.sqrt(distance_squared(f, g, window))


def _check_progression(
    progression: Optional[Tuple[int, int]]
) -> Tuple[int, int]:
    if progression is None:
        return 1, 0
    L, r = progression
    if L < 1 or not 0 <= r < L:
        raise InvalidInputError(
            f"Invalid progression ({L}, {r}); need L >= 1 and 0 <= r < L"
        )
    return L, r


def _check_linear_form(a: int, b: int, X: int) -> None:
    """Check that a*n + b stays in [1, 2**63] for 1 <= n <= X"""
    ends = (a + b, a * X + b)
    if min(ends) < 1:
        raise RangeError(
            f"Argument {a}n + {b} is not positive on 1 <= n <= {X}"
        )
    if max(ends) > FACTOR_BUDGET:
        raise RangeError(
            f"Argument {a}n + {b} exceeds the 2**63 budget for n <= {X}"
        )


def _weighted_chunk(task: _Task) -> Tuple[List[float], List[float]]:
    """Get the terms f(a1 n + b1) g(a2 n + b2) / n over one chunk"""
    f, g, a1, b1, a2, b2, lo, hi = task
    re, im = [], []
    for n in range(lo, hi):
        z = f.eval(a1 * n + b1).to_complex()
        if g is not None:
            z *= g.eval(a2 * n + b2).to_complex()
        re.append(z.real / n)
        im.append(z.imag / n)
    return re, im


def _weighted_sum(
    f: MultFunction,
    g: Optional[MultFunction],
    coefficients: Tuple[int, int, int, int],
    X: int,
    workers: int,
) -> complex:
    tasks = [
        (f, g, *coefficients, lo, hi) for lo, hi in chunk_ranges(1, X + 1)
    ]
    re: List[float] = []
    im: List[float] = []
    for chunk_re, chunk_im in ordered_map(_weighted_chunk, tasks, workers):
        re.extend(chunk_re)
        im.extend(chunk_im)
    return complex(math.fsum(re), math.fsum(im))


def log_average(
    f: MultFunction,
    X: int,
    progression: Optional[Tuple[int, int]] = None,
    workers: int = 1,
) -> LogAverage:
    """Get (1/log X) sum_{n <= X} f(Ln + r) / n

    Args:
        f: The function to average
        X: End of the range, at least 2
        progression: Optional (L, r) with 0 <= r < L; defaults to (1, 0)
        workers: Number of worker processes

    Raises:
        InvalidInputError: if X < 2 or the progression is malformed
        RangeError: if an argument exceeds the 2**63 budget
    """
    if X < 2:
        raise InvalidInputError(f"Range end must be at least 2, got {X}")
    L, r = _check_progression(progression)
    _check_linear_form(L, r, X)
    total = _weighted_sum(f, None, (L, r, 0, 0), X, workers)
    return LogAverage(total / math.log(X), X, progression)


def correlation(
    f: MultFunction,
    g: MultFunction,
    a1: int,
    b1: int,
    a2: int,
    b2: int,
    X: int,
    progression: Optional[Tuple[int, int]] = None,
    workers: int = 1,
) -> complex:
    """Get the logarithmic average of f(a1 m + b1) g(a2 m + b2), m = Ln + r

    g is not conjugated; pass the conjugate function when it is needed.

    Raises:
        InvalidInputError: if X < 2 or the progression is malformed
        RangeError: if some argument is not positive or exceeds 2**63
    """
    if X < 2:
        raise InvalidInputError(f"Range end must be at least 2, got {X}")
    L, r = _check_progression(progression)
    coefficients = (a1 * L, a1 * r + b1, a2 * L, a2 * r + b2)
    _check_linear_form(coefficients[0], coefficients[1], X)
    _check_linear_form(coefficients[2], coefficients[3], X)
    return _weighted_sum(f, g, coefficients, X, workers) / math.log(X)


def halasz_gap(f: MultFunction, X: int, workers: int = 1) -> HalaszReport:
    """Compare |avg f| with exp(-1/2 sum_{p <= X} (1 - Re f(p)) / p)"""
    lhs = abs(log_average(f, X, workers=workers).value)
    exponent = distance_squared(f, ConstantOne(), DistanceWindow(1, X))
    rhs = math.exp(-0.5 * exponent)
    return HalaszReport(lhs, rhs, lhs / rhs)


def _profile_characters(
    B: float, include_imprimitive: bool
) -> List[DirichletCharacter]:
    if not include_imprimitive:
        return primitive_characters(B)
    found = []
    for q in range(1, int(math.floor(B)) + 1):
        found.extend(characters_mod(q))
    return found


def aperiodicity_profile(
    f: MultFunction,
    B: float,
    X: int,
    t_grid: Sequence[float],
    include_imprimitive: bool = False,
    refine: bool = True,
) -> AperiodicityProfile:
    """Search the twisted characters chi(n) n^{it} closest to f

    Every character of conductor at most B is paired with every grid value
    of t, and D(f, chi n^{it}; 1, X) is computed for each pair. The best
    grid point is then refined by a bounded scalar minimization between its
    grid neighbours, and the smaller of the two minima is kept.

    Args:
        f: The function to profile
        B: Conductor bound; t ranges over [-BX, BX]
        X: End of the prime range
        t_grid: The grid of t values
        include_imprimitive: Whether to also search imprimitive characters
            of modulus at most B
        refine: Whether to refine the best grid point

    Raises:
        InvalidInputError: if the grid is empty or leaves [-BX, BX]
    """
    grid = sorted(float(t) for t in t_grid)
    if not grid:
        raise InvalidInputError("The t grid is empty")
    bound = B * X
    if grid[0] < -bound or grid[-1] > bound:
        raise InvalidInputError(f"The t grid must lie in [-{bound}, {bound}]")
    int_primes = primes_up_to(X)
    primes = int_primes.astype(float)
    log_primes = np.log(primes)
    fv = f.prime_values(int_primes)

    def twisted_distance(weights: np.ndarray, t: float) -> float:
        z = weights * np.exp(-1j * t * log_primes)
        terms = (1.0 - z.real) / primes
        return math.sqrt(max(0.0, math.fsum(terms.tolist())))

    rows = []
    best = (math.inf, "", 0.0)
    best_weights = fv
    for chi in progress(
        _profile_characters(B, include_imprimitive), desc="Characters"
    ):
        weights = fv * np.conj(chi.prime_values(int_primes))
        label = chi.describe()
        for t in grid:
            d = twisted_distance(weights, t)
            rows.append((label, t, d))
            if d < best[0]:
                best = (d, label, t)
                best_weights = weights
    infimum, argmin_character, argmin_t = best
    refined = False
    if refine and len(grid) > 1:
        i = grid.index(argmin_t)
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        result = optimize.minimize_scalar(
            lambda t: twisted_distance(best_weights, t),
            bounds=(lo, hi),
            method="bounded",
        )
        if result.success and result.fun < infimum:
            infimum, argmin_t = float(result.fun), float(result.x)
            refined = True
    resolution = max(
        (b - a for a, b in zip(grid, grid[1:])), default=0.0
    )
    logging.info(
        f"Profile of {f.describe()}: infimum {infimum} at "
        f"{argmin_character}, t={argmin_t}"
    )
    return AperiodicityProfile(
        function=f.describe(),
        B=B,
        X=X,
        t_grid=tuple(grid),
        distances=rows,
        infimum=infimum,
        argmin_character=argmin_character,
        argmin_t=argmin_t,
        resolution=resolution,
        refined=refined,
    )


def prime_character_sum(
    chi: MultFunction, a: float, Y: int, X: int
) -> complex:
    """Get sum_{Y <= p <= X} chi(p) p^{-1-ia}; zero when Y > X"""
    if Y > X:
        return 0j
    primes = primes_up_to(X)
    primes = primes[primes >= Y]
    p = primes.astype(float)
    terms = chi.prime_values(primes) * np.exp(-1j * a * np.log(p)) / p
    return complex(
        math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist())
    )


def _smooth_prefix(Q: int) -> int:
    """Get the largest prime p_K such that every prime up to p_K divides Q"""
    p_k, p = 0, 2
    while Q % p == 0:
        p_k, p = p, sympy.nextprime(p)
    return p_k


def _concentration_chunk(
    task: Tuple[MultFunction, int, int, complex, float, int, int]
) -> List[float]:
    f, Q, a, target, t, lo, hi = task
    terms = []
    for n in range(lo, hi):
        approx = target * cmath.exp(1j * t * math.log(Q * n))
        terms.append(abs(f.eval(Q * n + a).to_complex() - approx) / n)
    return terms


def concentration_residual(
    f: MultFunction,
    chi: DirichletCharacter,
    t: float,
    Q: int,
    a: int,
    X: int,
    regime_threshold: float = 1.0,
    workers: int = 1,
) -> ConcentrationReport:
    """Measure how far f(Qn + a) is from chi(a) (Qn)^{it} exp(F(Q, X))

    Args:
        f: The function, expected to pretend to be chi(n) n^{it}
        chi: The character
        t: The twist
        Q: The modulus; every prime up to some p_K must divide it, and so
            must the conductor of chi
        a: The residue, coprime to Q
        X: End of the range
        regime_threshold: Tail distances above this are flagged as out of
            the regime where the estimate carries information
        workers: Number of worker processes

    Raises:
        InvalidInputError: if a precondition on Q, a or chi fails
        RangeError: if Qn + a exceeds 2**63
    """
    if X < 2:
        raise InvalidInputError(f"Range end must be at least 2, got {X}")
    if Q < 2 or Q % 2:
        raise InvalidInputError(f"Q must be a positive even integer, got {Q}")
    if math.gcd(a, Q) != 1:
        raise InvalidInputError(f"gcd({a}, {Q}) must be 1")
    if Q % chi.conductor:
        raise InvalidInputError(
            f"Conductor {chi.conductor} of {chi.describe()} must divide {Q}"
        )
    _check_linear_form(Q, a, X)
    p_k = _smooth_prefix(Q)
    primes = primes_up_to(X)
    primes = primes[~np.isin(primes, factorize(Q).primes)]
    p = primes.astype(float)
    z = (
        f.prime_values(primes)
        * np.conj(chi.prime_values(primes))
        * np.exp(-1j * t * np.log(p))
    )
    terms = (z - 1.0) / p
    F = complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist()))
    target = chi.value_at(a).to_complex() * cmath.exp(F)
    tasks = [
        (f, Q, a, target, t, lo, hi) for lo, hi in chunk_ranges(1, X + 1)
    ]
    lhs = math.fsum(
        term
        for chunk in ordered_map(_concentration_chunk, tasks, workers)
        for term in chunk
    )
    if p_k >= X:
        tail = 0.0
    else:
        tail = distance(
            f,
            Product(chi, archimedean_twist(t)),
            DistanceWindow(p_k, X),
        )
    rhs_core = math.log(X) * (tail + p_k**-0.5)
    in_regime = tail <= regime_threshold
    if not in_regime:
        logging.warning(
            f"Tail distance {tail:.4f} exceeds {regime_threshold}; "
            "the concentration estimate is out of its regime"
        )
    return ConcentrationReport(
        lhs=lhs,
        rhs_core=rhs_core,
        ratio=lhs / rhs_core,
        p_k=p_k,
        tail_distance=tail,
        oscillatory_term=F,
        in_regime=in_regime,
    )
