"""Completely multiplicative functions with values in the closed unit disc

Exact values are kept as rational angles so that equality and angular gaps
are decided without floating point error. Functions whose values are not
roots of unity, such as archimedean twists, produce floating values.
"""
from __future__ import annotations

import cmath
import hashlib
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache, reduce
from itertools import product as cartesian
from typing import (
    Dict,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
import sympy

from multrec.errors import (
    InvalidInputError,
    RangeError,
    UnsupportedError,
)
from multrec.numkernel import (
    FACTOR_BUDGET,
    factorize,
    multiplicative_order,
    smallest_generator,
    totient,
    valuation,
)

_TWO_PI = 2.0 * math.pi
_MODULUS_TOLERANCE = 1e-12


class UnitKind(Enum):
    """Enumerate the representations of a unit disc value"""

    EXACT = "exact"
    FLOAT = "float"
    ZERO = "zero"


@dataclass(frozen=True)
class UnitValue:
    """A value that is zero or lies on the unit circle

    Exact values store a rational angle theta in [0, 1) standing for
    e(theta) = exp(2 pi i theta). Floating values store a complex number of
    modulus one.
    """

    kind: UnitKind
    angle: Optional[Fraction] = None
    z: complex = 0j

    @classmethod
    def exact(cls, angle: Union[Fraction, int]) -> UnitValue:
        return cls(UnitKind.EXACT, Fraction(angle) % 1)

    @classmethod
    def from_complex(cls, z: complex) -> UnitValue:
        modulus = abs(z)
        if abs(modulus - 1.0) > 1e-9:
            raise InvalidInputError(f"{z} does not lie on the unit circle")
        return cls(UnitKind.FLOAT, z=complex(z) / modulus)

    @classmethod
    def zero(cls) -> UnitValue:
        return cls(UnitKind.ZERO)

    @property
    def is_zero(self) -> bool:
        return self.kind is UnitKind.ZERO

    @property
    def is_exact(self) -> bool:
        return self.kind is UnitKind.EXACT

    def __mul__(self, other: UnitValue) -> UnitValue:
        if self.is_zero or other.is_zero:
            return ZERO
        if self.is_exact and other.is_exact:
            return UnitValue.exact(self.angle + other.angle)
        return UnitValue(
            UnitKind.FLOAT, z=self.to_complex() * other.to_complex()
        )

    def __pow__(self, k: int) -> UnitValue:
        if self.is_zero:
            return ONE if k == 0 else ZERO
        if self.is_exact:
            return UnitValue.exact(self.angle * k)
        return UnitValue(UnitKind.FLOAT, z=self.z**k)

    def conjugate(self) -> UnitValue:
        if self.is_zero:
            return ZERO
        if self.is_exact:
            return UnitValue.exact(-self.angle)
        return UnitValue(UnitKind.FLOAT, z=self.z.conjugate())

    def turns(self) -> float:
        """Get the angle in [0, 1) as a float"""
        if self.is_zero:
            raise InvalidInputError("Zero has no angle")
        if self.is_exact:
            return float(self.angle)
        return (cmath.phase(self.z) / _TWO_PI) % 1.0

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        if self.is_exact:
            quarter = self.angle * 4
            if quarter.denominator == 1:
                return (1 + 0j, 1j, -1 + 0j, -1j)[int(quarter)]
            return cmath.exp(_TWO_PI * 1j * float(self.angle))
        return self.z

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        if self.is_exact:
            return f"e({self.angle.numerator}/{self.angle.denominator})"
        return repr(self.z)


ONE = UnitValue.exact(0)
ZERO = UnitValue.zero()


def angle_gap(u: UnitValue, v: UnitValue) -> Fraction:
    """Get the circular distance in [0, 1/2] between two exact values"""
    if not (u.is_exact and v.is_exact):
        raise InvalidInputError("Angular gaps need two exact values")
    delta = (u.angle - v.angle) % 1
    return min(delta, 1 - delta)


def chord_from_gap(gap: Fraction) -> float:
    """Get |e(x) - e(y)| from the circular distance of x and y"""
    return 2.0 * math.sin(math.pi * float(gap))


def chord(u: UnitValue, v: UnitValue) -> float:
    """Get |u - v|, computed from the exact gap when both values are exact"""
    if u.is_exact and v.is_exact:
        return chord_from_gap(angle_gap(u, v))
    return abs(u.to_complex() - v.to_complex())


def _check_argument(n: int) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise InvalidInputError(f"Argument must be an integer, got {n!r}")
    n = int(n)
    if n < 1:
        raise InvalidInputError(f"Argument must be positive, got {n}")
    if n > FACTOR_BUDGET:
        raise RangeError(f"Argument {n} exceeds the 2**63 budget")
    return n


class MultFunction(ABC):
    """Base class for completely multiplicative functions

    A function is determined by its values at primes; eval extends them to
    every positive integer through the factorization.
    """

    @abstractmethod
    def prime_value(self, p: int) -> UnitValue:
        """Get the value at a prime"""

    @abstractmethod
    def describe(self) -> str:
        """Get the description of the function in the function grammar"""

    @property
    def in_m(self) -> bool:
        """Whether no prime is sent to zero"""
        return True

    @property
    def is_exact(self) -> bool:
        """Whether every value is zero or a root of unity"""
        return True

    def order(self) -> Optional[int]:
        """Get the least k with f**k = 1 on units, None if there is none"""
        return None

    def eval(self, n: int) -> UnitValue:
        """Evaluate the function at a positive integer

        Args:
            n: The argument, 1 <= n <= 2**63

        Raises:
            InvalidInputError: if n is not a positive integer
            RangeError: if n exceeds 2**63
        """
        n = _check_argument(n)
        result = ONE
        for p, e in factorize(n).entries:
            result = result * self.prime_value(p) ** e
            if result.is_zero:
                break
        return result

    def prime_values(self, primes: np.ndarray) -> np.ndarray:
        """Get the values at an array of primes as complex numbers"""
        return np.array(
            [self.prime_value(int(p)).to_complex() for p in primes],
            dtype=complex,
        )

    def __call__(self, n: int) -> UnitValue:
        return self.eval(n)

    def __str__(self) -> str:
        return self.describe()


@dataclass(frozen=True)
class ConstantOne(MultFunction):
    """The function equal to 1 everywhere"""

    def prime_value(self, p: int) -> UnitValue:
        return ONE

    def eval(self, n: int) -> UnitValue:
        _check_argument(n)
        return ONE

    def order(self) -> Optional[int]:
        return 1

    def describe(self) -> str:
        return "one"


@dataclass(frozen=True)
class Liouville(MultFunction):
    """The Liouville function, -1 at every prime"""

    def prime_value(self, p: int) -> UnitValue:
        return UnitValue.exact(Fraction(1, 2))

    def order(self) -> Optional[int]:
        return 2

    def describe(self) -> str:
        return "liouville"


@dataclass(frozen=True)
class _Component:
    """The part of a Dirichlet character living modulo one prime power"""

    prime: int
    exponent: int
    indices: Tuple[int, ...]
    table: Dict[int, Tuple[int, ...]] = field(
        compare=False, hash=False, repr=False
    )
    ranges: Tuple[int, ...] = ()

    @property
    def modulus(self) -> int:
        return self.prime**self.exponent

    def angle(self, n: int) -> Fraction:
        logs = self.table[n % self.modulus]
        terms = zip(self.indices, logs, self.ranges)
        return sum((Fraction(i * k, r) for i, k, r in terms), Fraction(0))

    def order(self) -> int:
        return reduce(
            sympy.ilcm,
            (r // math.gcd(r, i) for i, r in zip(self.indices, self.ranges)),
            1,
        )

    def conductor(self) -> int:
        p, k = self.prime, self.exponent
        if p != 2:
            order = self.order()
            if order == 1:
                return 1
            return p ** (valuation(order, p) + 1)
        if k >= 3:
            span, j = self.ranges[1], self.indices[1]
            b_order = span // math.gcd(span, j)
            if b_order > 1:
                return 2 ** (valuation(b_order, 2) + 2)
        if k >= 2 and self.indices[0] % 2:
            return 4
        return 1


def _component_shape(p: int, k: int) -> Tuple[int, ...]:
    """Get the ranges of the index entries of the component modulo p**k"""
    if p != 2:
        return (totient(p**k),)
    if k == 1:
        return (1,)
    if k == 2:
        return (2,)
    return (2, 2 ** (k - 2))


@lru_cache(maxsize=None)
def _component_table(p: int, k: int) -> Dict[int, Tuple[int, ...]]:
    """Map each unit modulo p**k to its discrete logarithm coordinates"""
    modulus = p**k
    if p != 2:
        g = smallest_generator(modulus)
        table, x = {}, 1
        for r in range(totient(modulus)):
            table[x] = (r,)
            x = x * g % modulus
        return table
    if k == 1:
        return {1: (0,)}
    if k == 2:
        return {1: (0,), 3: (1,)}
    table, x = {}, 1
    for b in range(2 ** (k - 2)):
        table[x] = (0, b)
        table[modulus - x] = (1, b)
        x = x * 5 % modulus
    return table


@dataclass(frozen=True)
class DirichletCharacter(MultFunction):
    """A Dirichlet character modulo q

    The index lists one entry per cyclic factor of (Z/q)^*, taken over the
    prime powers of q in increasing order. An odd prime power p**k takes one
    entry in [0, phi(p**k)) paired with its smallest generator. Modulo 2 the
    single entry must be 0, modulo 4 it lies in {0, 1}, and modulo 2**k with
    k >= 3 two entries (i, j) act on n = (-1)**a * 5**b through
    e(i*a/2 + j*b/2**(k-2)).
    """

    modulus: int
    index: Tuple[int, ...]
    components: Tuple[_Component, ...] = field(
        default=(), compare=False, hash=False, repr=False
    )

    def __post_init__(self) -> None:
        prime_powers = factorize(self.modulus).entries
        expected = sum(len(_component_shape(p, k)) for p, k in prime_powers)
        if len(self.index) != expected:
            raise InvalidInputError(
                f"Character modulo {self.modulus} takes {expected} index "
                f"entries, got {len(self.index)}"
            )
        components = []
        position = 0
        for p, k in prime_powers:
            ranges = _component_shape(p, k)
            entries = tuple(
                int(i) for i in self.index[position : position + len(ranges)]
            )
            position += len(ranges)
            for i, r in zip(entries, ranges):
                if not 0 <= i < r:
                    raise InvalidInputError(
                        f"Index entry {i} for modulus {p**k} of character "
                        f"modulo {self.modulus} must lie in [0, {r})"
                    )
            components.append(
                _Component(p, k, entries, _component_table(p, k), ranges)
            )
        object.__setattr__(self, "components", tuple(components))

    def value_at(self, n: int) -> UnitValue:
        """Evaluate at any integer, including negative and large ones"""
        if math.gcd(n, self.modulus) != 1:
            return ZERO
        return UnitValue.exact(sum(c.angle(n) for c in self.components))

    def eval(self, n: int) -> UnitValue:
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise InvalidInputError(f"Argument must be an integer, got {n!r}")
        if n < 1:
            raise InvalidInputError(f"Argument must be positive, got {n}")
        return self.value_at(int(n))

    def prime_value(self, p: int) -> UnitValue:
        return self.value_at(p)

    def prime_values(self, primes: np.ndarray) -> np.ndarray:
        residues = primes % self.modulus
        cache = {
            int(r): self.value_at(int(r)).to_complex()
            for r in np.unique(residues)
        }
        return np.array([cache[int(r)] for r in residues], dtype=complex)

    @property
    def in_m(self) -> bool:
        return self.modulus == 1

    @property
    def conductor(self) -> int:
        return math.prod(c.conductor() for c in self.components)

    @property
    def is_principal(self) -> bool:
        return all(i == 0 for i in self.index)

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    def order(self) -> Optional[int]:
        return reduce(sympy.ilcm, (c.order() for c in self.components), 1)

    def conjugate(self) -> DirichletCharacter:
        """Get the complex conjugate character"""
        index = tuple(
            (-i) % r
            for c in self.components
            for i, r in zip(c.indices, c.ranges)
        )
        return DirichletCharacter(self.modulus, index)

    def describe(self) -> str:
        if len(self.index) == 0:
            return f"char({self.modulus},0)"
        if len(self.index) == 1:
            return f"char({self.modulus},{self.index[0]})"
        return f"char({self.modulus},({','.join(map(str, self.index))}))"


@dataclass(frozen=True)
class ModifiedCharacter(MultFunction):
    """A function agreeing with base except at finitely many primes

    Args:
        base: The function being modified, usually a Dirichlet character
        overrides: Pairs of (prime, angle) sending the prime to e(angle)
    """

    base: MultFunction
    overrides: Tuple[Tuple[int, Fraction], ...]

    @property
    def override_map(self) -> Dict[int, Fraction]:
        return dict(self.overrides)

    def prime_value(self, p: int) -> UnitValue:
        for prime, angle in self.overrides:
            if prime == p:
                return UnitValue.exact(angle)
        return self.base.prime_value(p)

    def eval(self, n: int) -> UnitValue:
        if not isinstance(self.base, DirichletCharacter):
            return super().eval(n)
        n = _check_argument(n)
        angle = Fraction(0)
        for prime, theta in self.overrides:
            e = valuation(n, prime)
            if e:
                n //= prime**e
                angle += e * theta
        return UnitValue.exact(angle) * self.base.value_at(n)

    @property
    def in_m(self) -> bool:
        if isinstance(self.base, DirichletCharacter):
            overridden = set(self.override_map)
            return all(
                p in overridden for p in factorize(self.base.modulus).primes
            )
        return self.base.in_m

    @property
    def is_exact(self) -> bool:
        return self.base.is_exact

    def order(self) -> Optional[int]:
        base_order = self.base.order()
        if base_order is None:
            return None
        return reduce(
            sympy.ilcm, (a.denominator for _, a in self.overrides), base_order
        )

    def describe(self) -> str:
        inner = ",".join(
            f"{p}:{a.numerator}/{a.denominator}" for p, a in self.overrides
        )
        return f"modify({self.base.describe()},{{{inner}}})"


@dataclass(frozen=True)
class ArchimedeanTwist(MultFunction):
    """The function n -> n**(it)"""

    t: float

    def prime_value(self, p: int) -> UnitValue:
        return UnitValue(
            UnitKind.FLOAT, z=cmath.exp(1j * self.t * math.log(p))
        )

    def eval(self, n: int) -> UnitValue:
        n = _check_argument(n)
        return UnitValue(
            UnitKind.FLOAT, z=cmath.exp(1j * self.t * math.log(n))
        )

    def prime_values(self, primes: np.ndarray) -> np.ndarray:
        return np.exp(1j * self.t * np.log(primes.astype(float)))

    @property
    def is_exact(self) -> bool:
        return False

    def describe(self) -> str:
        return f"twist({self.t!r})"


@dataclass(frozen=True)
class Product(MultFunction):
    left: MultFunction
    right: MultFunction

    def prime_value(self, p: int) -> UnitValue:
        return self.left.prime_value(p) * self.right.prime_value(p)

    def eval(self, n: int) -> UnitValue:
        return self.left.eval(n) * self.right.eval(n)

    def prime_values(self, primes: np.ndarray) -> np.ndarray:
        return self.left.prime_values(primes) * self.right.prime_values(primes)

    @property
    def in_m(self) -> bool:
        return self.left.in_m and self.right.in_m

    @property
    def is_exact(self) -> bool:
        return self.left.is_exact and self.right.is_exact

    def order(self) -> Optional[int]:
        left, right = self.left.order(), self.right.order()
        if left is None or right is None:
            return None
        return int(sympy.ilcm(left, right))

    def describe(self) -> str:
        return f"mul({self.left.describe()},{self.right.describe()})"


@dataclass(frozen=True)
class Power(MultFunction):
    base: MultFunction
    exponent: int

    def prime_value(self, p: int) -> UnitValue:
        return self.base.prime_value(p) ** self.exponent

    def eval(self, n: int) -> UnitValue:
        return self.base.eval(n) ** self.exponent

    def prime_values(self, primes: np.ndarray) -> np.ndarray:
        values = self.base.prime_values(primes)
        if self.exponent > 0:
            return values**self.exponent
        # Zero stays zero under negative powers of a unit disc value
        return np.conj(values) ** (-self.exponent)

    @property
    def in_m(self) -> bool:
        return self.base.in_m

    @property
    def is_exact(self) -> bool:
        return self.base.is_exact

    def order(self) -> Optional[int]:
        base_order = self.base.order()
        if base_order is None:
            return None
        return base_order // math.gcd(base_order, abs(self.exponent))

    def describe(self) -> str:
        return f"pow({self.base.describe()},{self.exponent})"


@dataclass(frozen=True)
class Conjugate(MultFunction):
    base: MultFunction

    def prime_value(self, p: int) -> UnitValue:
        return self.base.prime_value(p).conjugate()

    def eval(self, n: int) -> UnitValue:
        return self.base.eval(n).conjugate()

    def prime_values(self, primes: np.ndarray) -> np.ndarray:
        return np.conj(self.base.prime_values(primes))

    @property
    def in_m(self) -> bool:
        return self.base.in_m

    @property
    def is_exact(self) -> bool:
        return self.base.is_exact

    def order(self) -> Optional[int]:
        return self.base.order()

    def describe(self) -> str:
        return f"conj({self.base.describe()})"


@dataclass(frozen=True)
class RandomFiniteValued(MultFunction):
    """A pseudo-random function sending each prime to an m-th root of unity

    The value at p is determined by hashing (seed, p), so it does not
    depend on evaluation order or on the process doing the evaluation.
    """

    m: int
    seed: int

    def __post_init__(self) -> None:
        if self.m < 1:
            raise InvalidInputError(f"Order must be positive, got {self.m}")

    def prime_value(self, p: int) -> UnitValue:
        digest = hashlib.blake2b(
            f"{self.seed}:{p}".encode(), digest_size=8
        ).digest()
        return UnitValue.exact(
            Fraction(int.from_bytes(digest, "big") % self.m, self.m)
        )

    def order(self) -> Optional[int]:
        return self.m

    def describe(self) -> str:
        return f"rand({self.m},{self.seed})"


@dataclass(frozen=True)
class RootProjection(MultFunction):
    """Round each f(p) * p**(-it/l) to the nearest l-th root of unity"""

    base: MultFunction
    ell: int
    t: float

    def prime_value(self, p: int) -> UnitValue:
        value = self.base.prime_value(p) * UnitValue(
            UnitKind.FLOAT, z=cmath.exp(-1j * self.t * math.log(p) / self.ell)
        )
        if value.is_zero:
            return ZERO
        j = nearest_root(value, self.ell)
        return UnitValue.exact(Fraction(j, self.ell))

    @property
    def in_m(self) -> bool:
        return self.base.in_m

    def order(self) -> Optional[int]:
        return self.ell

    def describe(self) -> str:
        return f"proj({self.base.describe()},{self.ell},{self.t!r})"


def evaluate(f: MultFunction, n: int) -> UnitValue:
    """Evaluate f at n"""
    return f.eval(n)


def describe(f: MultFunction) -> str:
    """Get the canonical function grammar text of f"""
    return f.describe()


def value_order(f: MultFunction) -> Optional[int]:
    """Get the least k with f**k = 1 at every prime not sent to zero

    Returns:
        The order, or None when f takes infinitely many values at primes
    """
    return f.order()


def is_finitely_generated(f: MultFunction) -> bool:
    return value_order(f) is not None


def dirichlet_character(
    q: int, index: Union[int, Sequence[int]]
) -> DirichletCharacter:
    """Build the Dirichlet character modulo q with the given index

    Args:
        q: The modulus, at least 1
        index: One entry per cyclic factor of (Z/q)^*; a bare integer is
            accepted when a single entry is expected, and 0 stands for the
            empty index modulo 1

    Raises:
        InvalidInputError: if q < 1 or the index is malformed
    """
    if isinstance(q, bool) or not isinstance(q, int) or q < 1:
        raise InvalidInputError(f"Character modulus must be positive, got {q}")
    entries = (index,) if isinstance(index, int) else tuple(index)
    if q == 1 and entries in ((), (0,)):
        entries = ()
    return DirichletCharacter(q, entries)


def characters_mod(q: int) -> List[DirichletCharacter]:
    """Get every Dirichlet character modulo q, principal character first"""
    shapes = [
        range(r)
        for p, k in factorize(q).entries
        for r in _component_shape(p, k)
    ]
    return [DirichletCharacter(q, idx) for idx in cartesian(*shapes)]


def primitive_characters(bound: float) -> List[DirichletCharacter]:
    """Get every primitive character with conductor at most bound"""
    found = []
    for q in range(1, int(math.floor(bound)) + 1):
        found.extend(chi for chi in characters_mod(q) if chi.is_primitive)
    return found


def cyclic_character(p: int, u: int) -> DirichletCharacter:
    """Get the character modulo p**u sending the smallest generator to e(1/phi)

    Raises:
        UnsupportedError: if p = 2, as (Z/2**u)^* is not cyclic in general
        InvalidInputError: if p is not prime or u < 1
    """
    if p == 2:
        raise UnsupportedError(
            "Cyclic characters modulo powers of 2 are not supported"
        )
    if not sympy.isprime(p) or u < 1:
        raise InvalidInputError(
            f"Cyclic characters need an odd prime and u >= 1, got {p}, {u}"
        )
    return DirichletCharacter(p**u, (1,))


def modify(
    base: MultFunction,
    overrides: Mapping[int, Union[Fraction, UnitValue]],
    require_in_m: bool = True,
) -> ModifiedCharacter:
    """Override the values of base at finitely many primes

    Args:
        base: The function to modify
        overrides: Prime to new value, given as an angle or an exact value
        require_in_m: Whether every prime dividing the modulus of a
            character base must be overridden, so that no value is zero

    Raises:
        InvalidInputError: if a key is not prime, a value is not an exact
            unit, or a prime of the modulus is left at zero
    """
    entries = []
    for p, value in sorted(overrides.items()):
        if not sympy.isprime(p):
            raise InvalidInputError(f"Override key {p} is not a prime")
        if isinstance(value, UnitValue):
            if not value.is_exact:
                raise InvalidInputError(
                    f"Override value at {p} must be an exact root of unity"
                )
            value = value.angle
        entries.append((int(p), Fraction(value) % 1))
    modified = ModifiedCharacter(base, tuple(entries))
    if require_in_m and not modified.in_m:
        raise InvalidInputError(
            f"Modification of {base.describe()} leaves zero values; "
            "every prime of the modulus needs an override"
        )
    return modified


def archimedean_twist(t: float) -> ArchimedeanTwist:
    return ArchimedeanTwist(float(t))


def power(f: MultFunction, ell: int) -> Power:
    if ell == 0:
        raise InvalidInputError("Power exponent must be nonzero")
    return Power(f, ell)


def unit_algebra(op: str, *operands: object) -> MultFunction:
    """Combine functions by product, power, conjugation or twist

    Args:
        op: One of "product", "power", "conjugate" and "twist"
        operands: Two functions for product, a function and a nonzero
            integer for power, a function for conjugate and a real t for
            twist

    Raises:
        InvalidInputError: if op is unknown or the operands do not fit it
    """
    try:
        if op == "product":
            left, right = operands
            return Product(left, right)
        if op == "power":
            base, ell = operands
            return power(base, int(ell))
        if op == "conjugate":
            (base,) = operands
            return Conjugate(base)
        if op == "twist":
            (t,) = operands
            return archimedean_twist(t)
    except (TypeError, ValueError) as e:
        raise InvalidInputError(f"Bad operands for {op}: {e}") from e
    raise InvalidInputError(f"Unknown operation: {op}")


def nearest_root(a: UnitValue, ell: int) -> int:
    """Get j in [0, ell) such that e(j/ell) is nearest to a

    Raises:
        InvalidInputError: if ell < 1 or a is zero
    """
    if ell < 1:
        raise InvalidInputError(f"Root order must be positive, got {ell}")
    if a.is_zero:
        raise InvalidInputError("Zero has no nearest root of unity")
    if a.is_exact:
        return round(a.angle * ell) % ell
    return round(a.turns() * ell) % ell


def nearest_root_bound(a: UnitValue, ell: int) -> Tuple[float, float]:
    """Get both sides of |a - e(j/l)| <= (2 pi / 4l) |a**l - 1|

    Returns:
        The pair (lhs, rhs) for the root j chosen by nearest_root
    """
    j = nearest_root(a, ell)
    root = UnitValue.exact(Fraction(j, ell))
    lhs = chord(a, root)
    rhs = _TWO_PI / (4 * ell) * chord(a**ell, ONE)
    return lhs, rhs


def root_projection(f: MultFunction, ell: int, t: float) -> RootProjection:
    if ell < 1:
        raise InvalidInputError(f"Root order must be positive, got {ell}")
    logging.debug(f"Projecting {f.describe()} onto {ell}-th roots")
    return RootProjection(f, ell, float(t))
