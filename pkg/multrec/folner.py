"""Multiplicative Folner sets and the progressions built on their elements

For Q in a Folner set and linear forms a1 n + b1, a2 n + b2, the residue
r_Q is chosen by CRT so that

    a1 Q^2 n + a1 r_Q + b1 = W (a1 A^2 W n + l_Q)
    a2 Q^2 n + a2 r_Q + b2 = A (a2 A W^2 n + m_Q)

with gcd(l_Q, a1 A^2 W) = 1 and gcd(a2 A W^2, m_Q) = u = a1 b2 - a2 b1.
"""
import dataclasses
import itertools
import logging
import math
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import sympy

from multrec.errors import (
    CertificateError,
    InvalidInputError,
    PreconditionError,
    RangeError,
)
from multrec.models import (
    AveragedCorrelation,
    CharacterShiftReport,
    Congruence,
    FolnerElement,
    FolnerParams,
    MultiplicativeAverageReport,
    PrimeShiftBound,
    QDecomposition,
)
from multrec.multfunc import ONE, DirichletCharacter, MultFunction, UnitValue
from multrec.numkernel import crt_solve, factorize
from multrec.pretentious import correlation

FOLNER_SIZE_BUDGET = 10**6
FOLNER_BITS_BUDGET = 4096
BRUTE_FORCE_BUDGET = 10**7
_TOLERANCE = 1e-12


def first_primes(K: int) -> Tuple[int, ...]:
    """Get the first K primes"""
    if K < 1:
        raise InvalidInputError(f"Need at least one prime, got K={K}")
    return tuple(int(sympy.prime(i)) for i in range(1, K + 1))


def folner_params(K: int, lo: int, hi: int) -> FolnerParams:
    """Get the set over the first K primes with exponents in (lo, hi]"""
    params = FolnerParams(first_primes(K), lo, hi)
    _check_params(params)
    return params


def _check_params(params: FolnerParams) -> None:
    if not params.primes:
        raise InvalidInputError("The Folner prime set is empty")
    if len(set(params.primes)) != len(params.primes):
        raise InvalidInputError(f"Repeated primes in {params.primes}")
    for p in params.primes:
        if not sympy.isprime(p):
            raise InvalidInputError(f"{p} is not a prime")
    if params.lo < 0 or params.hi <= params.lo:
        raise InvalidInputError(
            f"Empty exponent window ({params.lo}, {params.hi}]"
        )
    size = params.width ** len(params.primes)
    if size > FOLNER_SIZE_BUDGET:
        raise RangeError(
            f"Folner set of {size} elements exceeds the size budget "
            f"{FOLNER_SIZE_BUDGET}"
        )
    bits = sum(params.hi * math.log2(p) for p in params.primes)
    if bits > FOLNER_BITS_BUDGET:
        raise RangeError(
            f"Folner elements of about {bits:.0f} bits exceed the "
            f"{FOLNER_BITS_BUDGET}-bit budget"
        )


def folner_set(params: FolnerParams) -> List[FolnerElement]:
    """Enumerate all elements in lexicographic exponent order

    Raises:
        InvalidInputError: if the window is empty or the primes are invalid
        RangeError: if the set or its elements exceed their budgets
    """
    _check_params(params)
    window = range(params.lo + 1, params.hi + 1)
    return [
        FolnerElement(params.primes, exponents)
        for exponents in itertools.product(window, repeat=len(params.primes))
    ]


def contains(params: FolnerParams, element: FolnerElement) -> bool:
    return element.primes == params.primes and all(
        params.lo < e <= params.hi for e in element.exponents
    )


def folner_ratio(params: FolnerParams, p: int) -> Fraction:
    """Get |{Q in the set : pQ in the set}| / |set| exactly

    Raises:
        InvalidInputError: if p is not one of the set's primes
    """
    if p not in params.primes:
        raise InvalidInputError(f"{p} is not in the prime set {params.primes}")
    elements = folner_set(params)
    surviving = sum(contains(params, Q.times(p)) for Q in elements)
    return Fraction(surviving, len(elements))


def _restrict(Q: FolnerElement, part: int) -> FolnerElement:
    """Get the divisor of Q supported on the primes dividing part"""
    return FolnerElement(
        Q.primes,
        tuple(
            e if part % p == 0 else 0 for p, e in zip(Q.primes, Q.exponents)
        ),
    )


def _forms(dec: QDecomposition) -> Tuple[int, ...]:
    return (dec.a1, dec.b1, dec.a2, dec.b2, dec.mu, dec.nu)


def _factored_value(f: MultFunction, Q: FolnerElement) -> UnitValue:
    value = ONE
    for p, e in zip(Q.primes, Q.exponents):
        value = value * f.prime_value(p) ** e
    return value


def multiplicative_average(
    f: MultFunction, params: FolnerParams
) -> MultiplicativeAverageReport:
    """Average f over the set, with the shift bound at every prime

    Each element is evaluated from its exponents, so no large integer is
    ever factored. The bound checked is
    |(1 - f(p)) avg| <= 2 (1 - folner_ratio(p)).
    """
    elements = folner_set(params)
    values = [_factored_value(f, Q).to_complex() for Q in elements]
    average = complex(
        math.fsum(z.real for z in values), math.fsum(z.imag for z in values)
    ) / len(values)
    bounds = []
    for p in params.primes:
        lhs = abs((1 - f.prime_value(p).to_complex()) * average)
        rhs = 2 * float(1 - folner_ratio(params, p))
        bounds.append(PrimeShiftBound(p, lhs, rhs, lhs <= rhs + _TOLERANCE))
    return MultiplicativeAverageReport(average, tuple(bounds))


def _congruences(
    Q: FolnerElement,
    a1: int,
    b1: int,
    a2: int,
    b2: int,
    A: int,
    W: int,
    mu: int,
    nu: int,
) -> List[Congruence]:
    congruences = []
    for p, theta in zip(Q.primes, Q.exponents):
        if a1 % p:
            modulus = p ** (theta + 1 + nu)
            residue = (W - b1) * pow(a1, -1, modulus)
        else:
            modulus = p ** (theta + 1 + mu)
            residue = (A * b1 - b2 * W) * pow(a2 * W, -1, modulus)
        congruences.append(Congruence(residue % modulus, modulus))
    return congruences


def _check_hypotheses(
    Q: FolnerElement,
    a1: int,
    b1: int,
    a2: int,
    b2: int,
    mu: int,
    nu: int,
    strict: bool,
) -> None:
    if a1 < 1 or a2 < 1:
        raise PreconditionError(f"a1 = {a1} and a2 = {a2} must be positive")
    if mu < 0 or nu < 0:
        raise PreconditionError(f"mu = {mu} and nu = {nu} must be >= 0")
    pairs = (("a1, a2", a1, a2), ("a1, b1", a1, b1), ("a2, b2", a2, b2))
    for name, x, y in pairs:
        if math.gcd(x, y) != 1:
            raise PreconditionError(f"gcd({name}) = {math.gcd(x, y)} != 1")
    u = a1 * b2 - a2 * b1
    if u == 0:
        raise PreconditionError("a1 b2 - a2 b1 = 0")
    for p in factorize(a1).primes:
        if p not in Q.primes:
            raise PreconditionError(
                f"Prime {p} of a1 = {a1} is not in the Folner prime set"
            )
    extra = max(mu, nu)
    for p, theta in zip(Q.primes, Q.exponents):
        if theta < 1 + (mu if a1 % p == 0 else nu):
            raise PreconditionError(
                f"Exponent {theta} of {p} in Q is below 1 + mu/nu; "
                "the residue would leave [0, Q^2)"
            )
    for p, e in factorize(abs(u)).entries:
        if p not in Q.primes:
            raise PreconditionError(
                f"Prime {p} of u = {abs(u)} is not in the Folner prime set"
            )
        theta = Q.exponent(p)
        needed = 2 * e + extra + 1 if strict else e
        if theta <= needed:
            raise PreconditionError(
                f"Exponent {theta} of {p} in Q must exceed {needed} "
                f"(nu_p(u) = {e})"
            )


def q_decompose(
    Q: FolnerElement,
    a1: int,
    b1: int,
    a2: int,
    b2: int,
    mu: int = 1,
    nu: int = 1,
    strict: bool = False,
) -> QDecomposition:
    """Split Q = AW and choose r_Q so both linear forms factor

    When a1 b2 < a2 b1 the two forms are exchanged first and the
    decomposition records swapped = True.

    Args:
        Q: A Folner element
        a1, b1, a2, b2: The linear forms a1 n + b1 and a2 n + b2
        mu: Extra precision at the primes of A
        nu: Extra precision at the primes of W
        strict: Whether to demand exponents above 2 nu_p(u) + max(mu, nu)
            + 1 at primes of u, instead of merely above nu_p(u)

    Returns:
        The decomposition, with every identity already checked

    Raises:
        PreconditionError: naming the violated gcd or window condition
    """
    swapped = a1 * b2 - a2 * b1 < 0
    if swapped:
        a1, b1, a2, b2 = a2, b2, a1, b1
    _check_hypotheses(Q, a1, b1, a2, b2, mu, nu, strict)
    u = a1 * b2 - a2 * b1
    A = math.prod(
        p**e for p, e in zip(Q.primes, Q.exponents) if a1 % p == 0
    )
    W = Q.value // A
    combined = crt_solve(_congruences(Q, a1, b1, a2, b2, A, W, mu, nu))
    r_q = combined.residue
    decomposition = QDecomposition(
        Q=Q,
        a1=a1,
        b1=b1,
        a2=a2,
        b2=b2,
        swapped=swapped,
        A=A,
        W=W,
        u=u,
        mu=mu,
        nu=nu,
        r_q=r_q,
        crt_modulus=combined.modulus,
        l_q=(a1 * r_q + b1) // W,
        m_q=(a2 * r_q + b2) // A,
    )
    checks = verify_qtrick(decomposition)
    logging.debug(
        f"Decomposed Q={Q.value}: A={A}, W={W}, r_Q={r_q}, "
        f"l_Q={decomposition.l_q}, m_Q={decomposition.m_q}"
    )
    return dataclasses.replace(decomposition, checks=checks)


def verify_qtrick(dec: QDecomposition) -> Dict[str, bool]:
    """Check every exact identity of a decomposition

    Returns:
        Identity names mapped to True, in the order they were checked

    Raises:
        CertificateError: naming the first identity which fails
    """
    Q = dec.Q.value
    checks = {
        "integrality of l_Q": dec.l_q * dec.W == dec.a1 * dec.r_q + dec.b1,
        "integrality of m_Q": dec.m_q * dec.A == dec.a2 * dec.r_q + dec.b2,
        "Q = A W": dec.A * dec.W == Q,
        "gcd(A, W) = 1": math.gcd(dec.A, dec.W) == 1,
        "0 <= r_Q < Q^2": 0 <= dec.r_q < Q * Q,
        "gcd(l_Q, a1 A^2 W) = 1": math.gcd(
            dec.l_q, dec.a1 * dec.A**2 * dec.W
        )
        == 1,
        "gcd(a2 A W^2, m_Q) = u": math.gcd(dec.a2 * dec.A * dec.W**2, dec.m_q)
        == dec.u,
        "l_Q = m_Q mod p for p | a1": all(
            (dec.l_q - dec.m_q) % p == 0 for p in factorize(dec.a1).primes
        ),
    }
    for identity, holds in checks.items():
        if not holds:
            raise CertificateError(
                f"Identity {identity} fails for Q = {Q}", identity=identity
            )
    return checks


def brute_force_residue(dec: QDecomposition) -> int:
    """Find the least residue satisfying the congruences by exhaustion

    Raises:
        RangeError: if the combined modulus exceeds the brute-force budget
    """
    if dec.crt_modulus > BRUTE_FORCE_BUDGET:
        raise RangeError(
            f"Modulus {dec.crt_modulus} exceeds the brute-force budget "
            f"{BRUTE_FORCE_BUDGET}"
        )
    congruences = _congruences(
        dec.Q, dec.a1, dec.b1, dec.a2, dec.b2, dec.A, dec.W, dec.mu, dec.nu
    )
    for r in range(dec.crt_modulus):
        if all(r % c.modulus == c.residue for c in congruences):
            return r
    raise CertificateError("No residue satisfies the congruences")


def _primes_within(modulus: int, allowed: Sequence[int]) -> bool:
    return all(p in allowed for p in factorize(modulus).primes)


def _shift_hypotheses(
    dec: QDecomposition,
    chi_f1: DirichletCharacter,
    chi_f2: DirichletCharacter,
    chi_g1: DirichletCharacter,
    chi_g2: DirichletCharacter,
) -> bool:
    """Whether the moduli are deep enough inside Q for the shift identities"""
    Q = dec.Q
    gamma = max((e for _, e in factorize(dec.u).entries), default=0)
    for chi in (chi_f1, chi_g1):
        for q, e in factorize(chi.modulus).entries:
            if e > dec.mu or Q.exponent(q) < dec.mu:
                return False
    for q, e in factorize(chi_f2.modulus).entries:
        if q not in Q.primes or e > dec.nu:
            return False
    for q, e in factorize(chi_g2.modulus).entries:
        if q not in Q.primes or Q.exponent(q) <= gamma + e:
            return False
    return True


def verify_character_shift(
    dec_q: QDecomposition,
    dec_qp: QDecomposition,
    p: int,
    chi_f1: DirichletCharacter,
    chi_f2: DirichletCharacter,
    chi_g1: DirichletCharacter,
    chi_g2: DirichletCharacter,
) -> CharacterShiftReport:
    """Check how the characters move from l_Q, m_Q to l_Qp, m_Qp

    The characters with index 1 live on the primes of a1 and those with
    index 2 are coprime to a1. Four identities are checked exactly:

        chi_f1(l_Qp) = conj(chi_f1(p)) chi_f1(l_Q)
        chi_f2(l_Qp) = chi_f2(l_Q)
        chi_g1(m_Qp / u) = conj(chi_g1(p)) chi_g1(m_Q / u)
        chi_g2(m_Qp / u) = chi_g2(m_Q / u)

    Raises:
        PreconditionError: if p divides a1, the decompositions do not
            belong to Q and pQ, or the moduli do not split along a1
    """
    if not sympy.isprime(p):
        raise PreconditionError(f"{p} is not a prime")
    if dec_q.a1 % p == 0:
        raise PreconditionError(f"p = {p} divides a1 = {dec_q.a1}")
    if dec_qp.Q != dec_q.Q.times(p) or _forms(dec_qp) != _forms(dec_q):
        raise PreconditionError(
            "The second decomposition must be of pQ with the same forms"
        )
    a1_primes = factorize(dec_q.a1).primes
    for name, chi in (("chi_f1", chi_f1), ("chi_g1", chi_g1)):
        if not _primes_within(chi.modulus, a1_primes):
            raise PreconditionError(
                f"{name} modulus {chi.modulus} must be supported on the "
                f"primes of a1 = {dec_q.a1}"
            )
    for name, chi in (("chi_f2", chi_f2), ("chi_g2", chi_g2)):
        if math.gcd(chi.modulus, dec_q.a1) != 1:
            raise PreconditionError(
                f"{name} modulus {chi.modulus} must be coprime to "
                f"a1 = {dec_q.a1}"
            )
    u = dec_q.u
    m_q, m_qp = dec_q.m_q // u, dec_qp.m_q // u
    identities = {
        "chi_f1(l_Qp) = conj(chi_f1(p)) chi_f1(l_Q)": chi_f1.value_at(
            dec_qp.l_q
        )
        == chi_f1.value_at(p).conjugate() * chi_f1.value_at(dec_q.l_q),
        "chi_f2(l_Qp) = chi_f2(l_Q)": chi_f2.value_at(dec_qp.l_q)
        == chi_f2.value_at(dec_q.l_q),
        "chi_g1(m_Qp/u) = conj(chi_g1(p)) chi_g1(m_Q/u)": chi_g1.value_at(
            m_qp
        )
        == chi_g1.value_at(p).conjugate() * chi_g1.value_at(m_q),
        "chi_g2(m_Qp/u) = chi_g2(m_Q/u)": chi_g2.value_at(m_qp)
        == chi_g2.value_at(m_q),
    }
    return CharacterShiftReport(
        Q=dec_q.Q.value,
        p=p,
        identities=identities,
        hypotheses_met=_shift_hypotheses(
            dec_q, chi_f1, chi_f2, chi_g1, chi_g2
        ),
    )


def claims_sweep(
    params: FolnerParams,
    a1: int,
    b1: int,
    a2: int,
    b2: int,
    p: int,
    characters: Tuple[
        DirichletCharacter,
        DirichletCharacter,
        DirichletCharacter,
        DirichletCharacter,
    ],
    mu: int = 1,
    nu: int = 1,
    strict: bool = False,
) -> List[CharacterShiftReport]:
    """Check the character shift identities for every Q in the set

    Elements whose shift pQ leaves the set are reported as exceptional,
    with no identity checked.
    """
    reports = []
    cache: Dict[FolnerElement, QDecomposition] = {}

    def decompose(Q: FolnerElement) -> QDecomposition:
        if Q not in cache:
            cache[Q] = q_decompose(Q, a1, b1, a2, b2, mu, nu, strict)
        return cache[Q]

    for Q in folner_set(params):
        shifted = Q.times(p)
        if not contains(params, shifted):
            logging.info(f"Q={Q.value}: pQ leaves the Folner set")
            reports.append(
                CharacterShiftReport(
                    Q=Q.value,
                    p=p,
                    identities={},
                    hypotheses_met=False,
                    exceptional=True,
                )
            )
            continue
        reports.append(
            verify_character_shift(
                decompose(Q), decompose(shifted), p, *characters
            )
        )
    return reports


def averaged_correlation(
    f: MultFunction,
    g: MultFunction,
    a1: int,
    b1: int,
    a2: int,
    b2: int,
    params: FolnerParams,
    X: int,
    mu: int = 1,
    nu: int = 1,
    strict: bool = False,
    workers: int = 1,
) -> AveragedCorrelation:
    """Average over Q the log-correlation along the progression Q^2 n + r_Q

    For each Q the correlation of f(a1 Q^2 n + a1 r_Q + b1) with
    g(a2 Q^2 n + a2 r_Q + b2) is evaluated through the factored form
    f(W) g(A) f(a1 A^2 W n + l_Q) g(a2 A W^2 n + m_Q). g is not conjugated.

    Raises:
        PreconditionError: if some Q fails the decomposition hypotheses
        RangeError: if the arguments exceed 2**63, in which case the
            Folner window or X should be shrunk
    """
    rows = []
    for Q in folner_set(params):
        dec = q_decompose(Q, a1, b1, a2, b2, mu, nu, strict)
        first, second = (g, f) if dec.swapped else (f, g)
        scale = _factored_value(first, _restrict(Q, dec.W)) * _factored_value(
            second, _restrict(Q, dec.A)
        )
        try:
            inner = correlation(
                first,
                second,
                dec.a1 * dec.A**2 * dec.W,
                dec.l_q,
                dec.a2 * dec.A * dec.W**2,
                dec.m_q,
                X,
                workers=workers,
            )
        except RangeError as e:
            raise RangeError(
                f"{e}; shrink the Folner window or X"
            ) from e
        rows.append((Q.value, dec.r_q, scale.to_complex() * inner))
    value = complex(
        math.fsum(z.real for _, _, z in rows),
        math.fsum(z.imag for _, _, z in rows),
    ) / len(rows)
    return AveragedCorrelation(value, tuple(rows))


