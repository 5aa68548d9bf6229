"""Exact integer arithmetic shared by every other module"""
import logging
import math
import threading
from typing import Iterable, List, Optional

import numpy as np
import sympy
from sympy.ntheory import discrete_log as _sympy_discrete_log
from sympy.ntheory import n_order
from sympy.ntheory.modular import solve_congruence

from multrec.errors import InvalidInputError, NoSolutionError, RangeError
from multrec.models import Congruence, Factorization

FACTOR_BUDGET = 2**63
SIEVE_LIMIT = 2 * 10**7
PRIME_BUDGET = 10**8
_MIN_SIEVE = 2**16

_sieve_lock = threading.Lock()
_smallest_factor: Optional[np.ndarray] = None
_prime_lock = threading.Lock()
_primes: Optional[np.ndarray] = None
_primes_limit = 0


def _check_integer(n: int, name: str = "n") -> int:
    if isinstance(n, (bool, float)) or not isinstance(n, (int, np.integer)):
        raise InvalidInputError(f"{name} must be an integer, got {n!r}")
    return int(n)


def _build_smallest_factor(limit: int) -> np.ndarray:
    spf = np.zeros(limit + 1, dtype=np.int32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    return spf


def _smallest_factor_table(n: int) -> np.ndarray:
    """Get a smallest-prime-factor table covering n, growing it if needed"""
    global _smallest_factor
    with _sieve_lock:
        if _smallest_factor is None or len(_smallest_factor) <= n:
            current = 0 if _smallest_factor is None else len(_smallest_factor)
            limit = min(SIEVE_LIMIT, max(n, 2 * current, _MIN_SIEVE))
            logging.debug(f"Building smallest factor sieve up to {limit}")
            _smallest_factor = _build_smallest_factor(limit)
        return _smallest_factor


def factorize(n: int) -> Factorization:
    """Factor a positive integer into primes

    Arguments up to the sieve cap are factored with a cached smallest prime
    factor table; larger ones are handed to sympy.

    Args:
        n: The integer to factor, 1 <= n <= 2**63

    Returns:
        The factorization of n, with increasing primes

    Raises:
        InvalidInputError: if n is not a positive integer
        RangeError: if n exceeds 2**63
    """
    n = _check_integer(n)
    if n < 1:
        raise InvalidInputError(f"Cannot factor {n}; n must be positive")
    if n > FACTOR_BUDGET:
        raise RangeError(f"Cannot factor {n}; factoring budget is 2**63")
    if n <= SIEVE_LIMIT:
        spf = _smallest_factor_table(n)
        entries = []
        while n > 1:
            p = int(spf[n]) or n
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            entries.append((p, e))
        return Factorization(tuple(entries))
    return Factorization(tuple(sorted(sympy.factorint(n).items())))


def factorize_many(start: int, stop: int) -> List[Factorization]:
    """Factor every integer in [start, stop)

    Values below the sieve limit share one slice of the smallest prime
    factor table; larger values go through factorize one at a time.

    Raises:
        InvalidInputError: if start < 1 or stop < start
        RangeError: if a value exceeds 2**63
    """
    start = _check_integer(start, "start")
    stop = _check_integer(stop, "stop")
    if start < 1 or stop < start:
        raise InvalidInputError(
            f"Cannot factor the range [{start}, {stop}); "
            "need 1 <= start <= stop"
        )
    sieved_stop = min(stop, SIEVE_LIMIT + 1)
    result = []
    if start < sieved_stop:
        spf = _smallest_factor_table(sieved_stop - 1)[:sieved_stop].tolist()
        for n in range(start, sieved_stop):
            entries = []
            while n > 1:
                p = spf[n] or n
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                entries.append((p, e))
            result.append(Factorization(tuple(entries)))
    result.extend(factorize(n) for n in range(max(start, sieved_stop), stop))
    return result


def primes_up_to(x: float) -> np.ndarray:
    """Get all primes p <= x as an int64 array

    Args:
        x: Upper end of the range

    Raises:
        RangeError: if x exceeds the prime enumeration budget
    """
    global _primes, _primes_limit
    limit = int(math.floor(x))
    if limit > PRIME_BUDGET:
        raise RangeError(
            f"Cannot enumerate primes up to {limit}; "
            f"prime budget is {PRIME_BUDGET}"
        )
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    with _prime_lock:
        if _primes is None or _primes_limit < limit:
            size = max(limit, 2 * _primes_limit, _MIN_SIEVE)
            size = min(size, PRIME_BUDGET)
            is_prime = np.ones(size + 1, dtype=bool)
            is_prime[:2] = False
            for p in range(2, math.isqrt(size) + 1):
                if is_prime[p]:
                    is_prime[p * p :: p] = False
            _primes = np.flatnonzero(is_prime).astype(np.int64)
            _primes_limit = size
        primes = _primes
    return primes[: np.searchsorted(primes, limit, side="right")]


def valuation(n: int, p: int) -> int:
    """Get the exponent of the prime p in the nonzero integer n

    Raises:
        InvalidInputError: if n is 0 or p < 2
    """
    n = abs(_check_integer(n))
    p = _check_integer(p, "p")
    if p < 2:
        raise InvalidInputError(f"Valuation needs a prime p >= 2, got {p}")
    if n == 0:
        raise InvalidInputError("The valuation of 0 is undefined")
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def crt_solve(congruences: Iterable[Congruence]) -> Congruence:
    """Combine congruences into a single class

    Moduli need not be coprime; compatible congruences combine into one
    class modulo the lcm of the moduli.

    Args:
        congruences: The congruences to combine; none yields 0 mod 1

    Returns:
        The combined class with 0 <= residue < modulus

    Raises:
        InvalidInputError: if some modulus is not positive
        NoSolutionError: if the congruences are inconsistent
    """
    pairs = []
    for c in congruences:
        if c.modulus < 1:
            raise InvalidInputError(
                f"Congruence modulus must be positive, got {c.modulus}"
            )
        pairs.append((c.residue % c.modulus, c.modulus))
    if not pairs:
        return Congruence(0, 1)
    solution = solve_congruence(*pairs)
    if solution is None:
        raise NoSolutionError(
            "Inconsistent congruences: "
            + ", ".join(f"{r} mod {m}" for r, m in pairs)
        )
    residue, modulus = solution
    return Congruence(int(residue), int(modulus))


def totient(m: int) -> int:
    return int(sympy.totient(m))


def multiplicative_order(x: int, m: int) -> int:
    return int(n_order(x, m))


def _odd_prime_power(modulus: int) -> int:
    """Get the prime of an odd prime power, raising if it is not one"""
    if modulus < 3:
        raise InvalidInputError(
            f"Expected an odd prime power, got {modulus}"
        )
    entries = factorize(modulus).entries
    if len(entries) != 1 or entries[0][0] == 2:
        raise InvalidInputError(
            f"Expected an odd prime power, got {modulus}"
        )
    return entries[0][0]


def smallest_generator(modulus: int) -> int:
    """Get the smallest generator of (Z / modulus)^* for an odd prime power

    Raises:
        InvalidInputError: if modulus is not an odd prime power
    """
    p = _odd_prime_power(modulus)
    phi = totient(modulus)
    # A generator mod p**2 also generates mod every higher power of p
    base = p * p if modulus > p * p else modulus
    for g in range(2, base):
        if g % p and n_order(g, base) == totient(base):
            if base == modulus or n_order(g, modulus) == phi:
                return g
    raise InvalidInputError(f"No generator found modulo {modulus}")


def discrete_log(g: int, x: int, modulus: int) -> int:
    """Solve g**k = x modulo an odd prime power

    Args:
        g: A generator of the unit group modulo modulus
        x: A unit modulo modulus
        modulus: An odd prime power p**u

    Returns:
        The exponent 0 <= k < phi(modulus)

    Raises:
        InvalidInputError: if modulus is not an odd prime power, x is not a
            unit or g is not a generator
    """
    p = _odd_prime_power(modulus)
    if x % p == 0:
        raise InvalidInputError(f"{x} is not a unit modulo {modulus}")
    if g % p == 0 or n_order(g, modulus) != totient(modulus):
        raise InvalidInputError(f"{g} does not generate modulo {modulus}")
    return int(_sympy_discrete_log(modulus, x % modulus, g % modulus))
