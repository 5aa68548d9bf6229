from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import (
    TYPE_CHECKING,
    Any,
    Dict,
    List,
    Optional,
    Tuple,
    Union,
)

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from multrec.multfunc import MultFunction

# An angle on the torus R/Z: exact when rational, floating otherwise
Angle = Union[Fraction, float]


@dataclass(frozen=True)
class Factorization:
    """A prime factorization

    Args:
        entries: Pairs of (prime, exponent) with strictly increasing primes
            and positive exponents. The empty sequence factors 1.
    """

    entries: Tuple[Tuple[int, int], ...] = ()

    @property
    def primes(self) -> Tuple[int, ...]:
        return tuple(p for p, _ in self.entries)

    @property
    def value(self) -> int:
        return math.prod(p**e for p, e in self.entries)

    def exponent(self, p: int) -> int:
        """Get the exponent of a prime, zero when the prime is absent"""
        for prime, e in self.entries:
            if prime == p:
                return e
        return 0

    def merge(self, other: Factorization) -> Factorization:
        """Merge two factorizations into the factorization of the product

        Args:
            other: The factorization to merge with this one

        Returns:
            The factorization of the product of both values
        """
        exponents: Dict[int, int] = dict(self.entries)
        for p, e in other.entries:
            exponents[p] = exponents.get(p, 0) + e
        return Factorization(tuple(sorted(exponents.items())))


@dataclass(frozen=True)
class Congruence:
    """The congruence class of residue modulo modulus"""

    residue: int
    modulus: int


@dataclass(frozen=True)
class DistanceWindow:
    """A window (lower, upper] of primes used in a pretentious distance"""

    lower: float
    upper: float


@dataclass(frozen=True)
class LogAverage:
    """A logarithmic average of a function over n <= X

    Args:
        value: The average (1/log X) * sum_{n <= X} f(Ln + r) / n
        X: End of the summation range
        progression: Optional (L, r) restricting the argument to Ln + r
    """

    value: complex
    X: int
    progression: Optional[Tuple[int, int]] = None


@dataclass(frozen=True)
class HalaszReport:
    """Both sides of the Halasz-type bound for logarithmic averages

    The bound carries an unspecified absolute constant, so both sides and
    their ratio are reported instead of a verdict.
    """

    lhs: float
    rhs: float
    ratio: float


@dataclass
class AperiodicityProfile:
    """Search for the twisted character a function most resembles

    Args:
        function: Description of the profiled function
        B: Conductor bound, and scale factor of the admissible t range
        X: End of the prime range
        t_grid: The grid of t values searched
        distances: Rows of (character label, t, distance)
        infimum: Smallest distance found, refinement included
        argmin_character: Label of the character attaining the infimum
        argmin_t: Value of t attaining the infimum
        resolution: Largest spacing of the sorted grid
        refined: Whether local refinement improved the grid minimum
    """

    function: str
    B: float
    X: int
    t_grid: Tuple[float, ...]
    distances: List[Tuple[str, float, float]]
    infimum: float
    argmin_character: str
    argmin_t: float
    resolution: float
    refined: bool


@dataclass(frozen=True)
class ConcentrationReport:
    """Residual of the concentration estimate for a pretentious function

    Args:
        lhs: sum_{n <= X} |f(Qn + a) - chi(a) (Qn)^{it} exp(F(Q, X))| / n
        rhs_core: log X * (D(f, chi n^{it}; p_K, X) + p_K^{-1/2})
        ratio: lhs / rhs_core
        p_k: Largest prime such that every prime up to it divides Q
        tail_distance: D(f, chi n^{it}; p_K, X)
        oscillatory_term: F(Q, X)
        in_regime: Whether the tail distance is small enough for the
            estimate to carry information
    """

    lhs: float
    rhs_core: float
    ratio: float
    p_k: int
    tail_distance: float
    oscillatory_term: complex
    in_regime: bool


@dataclass(frozen=True)
class FolnerParams:
    """Parameters of a multiplicative Folner set

    The set consists of all products of primes[i] ** theta_i with
    lo < theta_i <= hi.
    """

    primes: Tuple[int, ...]
    lo: int
    hi: int

    @property
    def width(self) -> int:
        return self.hi - self.lo


@dataclass(frozen=True)
class FolnerElement:
    """An element Q of a multiplicative Folner set, kept in factored form"""

    primes: Tuple[int, ...]
    exponents: Tuple[int, ...]

    @property
    def value(self) -> int:
        return math.prod(p**e for p, e in zip(self.primes, self.exponents))

    def exponent(self, p: int) -> int:
        for prime, e in zip(self.primes, self.exponents):
            if prime == p:
                return e
        return 0

    def times(self, p: int) -> FolnerElement:
        """Get the element p * Q, which may leave the Folner set"""
        return FolnerElement(
            self.primes,
            tuple(
                e + 1 if prime == p else e
                for prime, e in zip(self.primes, self.exponents)
            ),
        )


@dataclass(frozen=True)
class PrimeShiftBound:
    """One prime's check of |(1 - f(p)) * avg| <= 2 * (1 - ratio(p))"""

    prime: int
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class MultiplicativeAverageReport:
    """Average of a function over a Folner set with per-prime bounds"""

    average: complex
    bounds: Tuple[PrimeShiftBound, ...]


@dataclass(frozen=True)
class QDecomposition:
    """The decomposition Q = AW with the progression data built on it

    Args:
        Q: The Folner element being decomposed
        a1, b1, a2, b2: The linear forms, normalized so that a1*b2 > a2*b1
        swapped: Whether the caller's two linear forms were exchanged to
            reach the normalization
        A: Part of Q supported on primes dividing a1
        W: Part of Q supported on the remaining primes
        u: a1*b2 - a2*b1
        mu, nu: Extra precision of the congruences at primes of A and W
        r_q: The chosen residue, 0 <= r_q < Q**2
        crt_modulus: Modulus of the combined congruence fixing r_q
        l_q: (a1*r_q + b1) / W
        m_q: (a2*r_q + b2) / A
        checks: Results of the exact identity checks, by name
    """

    Q: FolnerElement
    a1: int
    b1: int
    a2: int
    b2: int
    swapped: bool
    A: int
    W: int
    u: int
    mu: int
    nu: int
    r_q: int
    crt_modulus: int
    l_q: int
    m_q: int
    checks: Dict[str, bool] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class CharacterShiftReport:
    """Exact checks of how the characters move between Q and Qp

    Args:
        Q: Value of the Folner element Q
        p: The prime shifting Q to Qp
        identities: Identity text mapped to whether it holds exactly
        hypotheses_met: Whether the conductor and exponent conditions under
            which the identities are provable hold for this tuple
        exceptional: Whether Qp left the Folner set, in which case no
            identity was checked
    """

    Q: int
    p: int
    identities: Dict[str, bool]
    hypotheses_met: bool
    exceptional: bool = False

    @property
    def holds(self) -> bool:
        return all(self.identities.values())


@dataclass(frozen=True)
class AveragedCorrelation:
    """A correlation averaged over a Folner set along the Q progressions

    Args:
        value: Average over Q of the per-Q logarithmic correlations
        per_q: Rows of (Q, r_Q, per-Q correlation) in lexicographic order
    """

    value: complex
    per_q: Tuple[Tuple[int, int, complex], ...]


@dataclass(frozen=True)
class Quadruple:
    """The parameters of the set {(an + b) / (cn + d)}"""

    a: int
    b: int
    c: int
    d: int
    normalized: bool = False

    def numerator(self, n: int) -> int:
        return self.a * n + self.b

    def denominator(self, n: int) -> int:
        return self.c * n + self.d

    def __str__(self) -> str:
        return f"{self.a},{self.b},{self.c},{self.d}"


@dataclass(frozen=True)
class CriterionResult:
    """Whether the recurrence criterion holds for a normalized quadruple"""

    holds: bool
    quadruple: Quadruple


@dataclass
class ScanTrace:
    """Running minima of |f(an + b) - g(cn + d)| over a scanned range

    Args:
        quadruple: The scanned linear forms
        scanned: Number of n values evaluated
        minimum: Smallest chord seen
        argmin: First n attaining the minimum
        minimum_gap: Exact angular gap of the minimum, when exact
        improvements: Rows of (n, running minimum) at each improvement
        flagged: Number of n skipped because a value was zero
    """

    quadruple: Quadruple
    scanned: int
    minimum: float
    argmin: Optional[int]
    minimum_gap: Optional[Fraction]
    improvements: List[Tuple[int, float]]
    flagged: int


@dataclass
class DensityEstimate:
    """Logarithmic density estimate of {n : |f(an + b) - f(an + d)| < eps}

    Running averages are normalized by the harmonic sum, so they stay in
    [0, 1]. The upper and lower values are the maximum and minimum of the
    running average over the final decade of the range; they are proxies
    for the upper and lower logarithmic densities, never limits.
    """

    epsilon: float
    quadruple: Quadruple
    X: int
    upper: float
    lower: float
    final: float
    hits: int
    flagged: int
    samples: List[Tuple[int, float]]


class CaseTag(Enum):
    """Enumerate the constructions a counterexample certificate can use"""

    ARCHIMEDEAN = "archimedean a!=c"
    ODD_PRIME = "odd-p l=0"
    TWO = "p=2 l=0"
    POSITIVE_VALUATION = "l>0"
    PAIR_SHIFT_2 = "pair-shift-2"


@dataclass(frozen=True)
class CounterexampleCertificate:
    """A function together with a gap keeping f(an+b) away from g(cn+d)

    Args:
        f: The function evaluated at an + b
        quadruple: The linear forms
        case: The construction used
        eta: The certified lower bound on the chord, as a float
        eta_gap: Exact angular gap with eta = 2 sin(pi * eta_gap), for the
            exact constructions
        n0: Threshold from which the bound is claimed
        slack: Allowance subtracted from eta for asymptotic constructions
        g: The function evaluated at cn + d; f itself when absent
        details: Construction parameters such as p, u and t
    """

    f: MultFunction
    quadruple: Quadruple
    case: CaseTag
    eta: float
    eta_gap: Optional[Fraction] = None
    n0: int = 1
    slack: float = 0.0
    g: Optional[MultFunction] = None
    details: Dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def second(self) -> MultFunction:
        return self.g if self.g is not None else self.f

    def to_record(self) -> Dict[str, Any]:
        """Serialize the certificate into a self-contained record

        Returns:
            A JSON-ready dictionary; functions are written in the function
            grammar and the gap as an exact rational
        """
        return {
            "case": self.case.value,
            "f": self.f.describe(),
            "g": self.g.describe() if self.g is not None else None,
            "quad": [
                self.quadruple.a,
                self.quadruple.b,
                self.quadruple.c,
                self.quadruple.d,
            ],
            "eta": self.eta,
            "eta_gap": (
                f"{self.eta_gap.numerator}/{self.eta_gap.denominator}"
                if self.eta_gap is not None
                else None
            ),
            "n0": self.n0,
            "slack": self.slack,
            "details": {k: str(v) for k, v in sorted(self.details.items())},
        }


@dataclass(frozen=True)
class CertificateCheck:
    """Outcome of scanning a certificate over n0 <= n <= N"""

    passed: bool
    scanned: int
    minimum: float
    witness: Optional[int] = None
    minimum_gap: Optional[Fraction] = None


@dataclass
class FejerApprox:
    """Fejer means of a tent approximating the indicator of [0,eps)u(1-eps,1)

    Args:
        epsilon: Half-width of the tent
        R: Order of the Fejer mean
        coefficients: c_0, ..., c_{R-1}; c_{-l} = c_l
        minimal_R: Least order found whose sup-norm error is below eps**2
        sup_error: Sup-norm distance between the tent and the mean
        meets_bound: Whether sup_error < eps**2 for this R
    """

    epsilon: float
    R: int
    coefficients: np.ndarray
    minimal_R: int
    sup_error: float
    meets_bound: bool

    def tent(self, x: np.ndarray) -> np.ndarray:
        """Evaluate the tent of height 1 and half-width epsilon"""
        x = np.asarray(x, dtype=float) % 1.0
        distance = np.minimum(x, 1.0 - x)
        return np.maximum(0.0, 1.0 - distance / self.epsilon)

    def oscillating_part(self, x: np.ndarray) -> np.ndarray:
        """Evaluate Re sum_{1 <= |l| < R} c_l e(lx)"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        total = np.zeros_like(x)
        ells = np.arange(1, self.R)
        # Blocks keep the (ell, x) matrix small
        for start in range(0, len(ells), 256):
            block = ells[start : start + 256]
            total += 2.0 * (
                self.coefficients[block]
                @ np.cos(2.0 * np.pi * np.outer(block, x))
            )
        return total

    def polynomial(self, x: np.ndarray) -> np.ndarray:
        """Evaluate sum_{|l| < R} c_l e(lx), which is real"""
        return self.coefficients[0] + self.oscillating_part(x)


@dataclass(frozen=True)
class FejerLowerBound:
    """The chain indicator >= tent >= Fourier bound along n <= X

    All three are averages with weights 1/n normalized by the harmonic sum.
    """

    indicator_average: float
    tent_average: float
    fourier_bound: float

    @property
    def chain_holds(self) -> bool:
        tolerance = 1e-9
        return (
            self.indicator_average + tolerance >= self.tent_average
            and self.tent_average + tolerance >= self.fourier_bound
        )


@dataclass(frozen=True)
class RecurrenceEvent:
    """An n with mu(T_p^-1 A n T_q^-1 A) > 0"""

    n: int
    p: int
    q: int
    measure: Angle


@dataclass
class RecurrenceScan:
    """Events of a recurrence scan with the infinitude proxy

    Args:
        events: Every n in the range with positive measure
        scanned: Number of n values examined
        largest_gap: Largest distance between consecutive events, or
            between the range start and the first event
        threshold: Event count from which the proxy is reported as met
        bridge_violations: Positive events whose values were not close,
            for one-dimensional systems scanned with a single arc
        arc_family: Description of the arc family the scan used
    """

    events: List[RecurrenceEvent]
    scanned: int
    largest_gap: int
    threshold: int
    bridge_violations: List[int]
    arc_family: str

    @property
    def count(self) -> int:
        return len(self.events)

    @property
    def first(self) -> Optional[int]:
        return self.events[0].n if self.events else None

    @property
    def infinitude_proxy(self) -> bool:
        return self.count >= self.threshold


@dataclass(frozen=True)
class AxiomsReport:
    """Outcome of randomized checks of the multiplicative action axioms"""

    passed: bool
    trials: int
    composition_failures: int
    measure_failures: int
    witness: Optional[Tuple[int, int]] = None


@dataclass(frozen=True)
class PiOverLog:
    """The real number pi / log(base), written pi/log(base) in the grammar"""

    base: Fraction

    @property
    def value(self) -> float:
        return math.pi / math.log(self.base)


@dataclass(frozen=True)
class AngleMap:
    """A prime -> angle mapping written {p: a/b, ...} in the grammar"""

    entries: Tuple[Tuple[int, Fraction], ...]


ExprArg = Union[
    "FunctionExpr", int, float, PiOverLog, Tuple[int, ...], AngleMap
]


@dataclass(frozen=True)
class FunctionExpr:
    """Abstract syntax tree of a function description

    Args:
        name: Name of the function or combinator
        args: Arguments, which are nested expressions or literals
        offset: Byte offset of the name in the parsed text
    """

    name: str
    args: Tuple[ExprArg, ...] = ()
    offset: int = field(default=0, compare=False)

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({','.join(_format_arg(a) for a in self.args)})"


def _format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _format_arg(arg: ExprArg) -> str:
    if isinstance(arg, FunctionExpr):
        return str(arg)
    if isinstance(arg, bool):
        raise TypeError(f"Unsupported argument: {arg!r}")
    if isinstance(arg, int):
        return str(arg)
    if isinstance(arg, float):
        return repr(arg)
    if isinstance(arg, PiOverLog):
        base = arg.base
        text = (
            str(base.numerator)
            if base.denominator == 1
            else _format_rational(base)
        )
        return f"pi/log({text})"
    if isinstance(arg, AngleMap):
        inner = ",".join(
            f"{p}:{_format_rational(a)}" for p, a in arg.entries
        )
        return "{" + inner + "}"
    if isinstance(arg, tuple):
        return "(" + ",".join(str(i) for i in arg) + ")"
    raise TypeError(f"Unsupported argument: {arg!r}")


@dataclass
class ExperimentConfig:
    """Settings of one CLI run, assembled from flags and a config file

    Every field defaults to None; the runner checks that the fields a
    subcommand needs are present.
    """

    functions: List[str] = field(default_factory=list)
    g: Optional[str] = None
    ns: Optional[str] = None
    quad: Optional[Tuple[int, int, int, int]] = None
    abcd: Optional[Tuple[int, int, int, int]] = None
    epsilon: Optional[float] = None
    N: Optional[int] = None
    X: Optional[int] = None
    Y: Optional[int] = None
    B: Optional[float] = None
    window: Optional[Tuple[float, float]] = None
    progression: Optional[Tuple[int, int]] = None
    t_grid: Optional[Tuple[float, float, int]] = None
    t: Optional[float] = None
    a: Optional[float] = None
    Q: Optional[int] = None
    primes: Optional[Tuple[int, ...]] = None
    mu: Optional[int] = None
    nu: Optional[int] = None
    p: Optional[int] = None
    characters: Optional[Tuple[str, str, str, str]] = None
    R: Optional[int] = None
    thetas: Optional[Tuple[Fraction, Fraction]] = None
    arcs: List[Tuple[Fraction, Fraction]] = field(default_factory=list)
    pq: Optional[Tuple[int, int]] = None
    trials: Optional[int] = None
    seed: Optional[int] = None
    threshold: Optional[int] = None
    start: Optional[int] = None
    slack: Optional[float] = None
    shift: Optional[int] = None
    certificate: Optional[str] = None
    imprimitive: bool = False
    strict: bool = False
    output: Optional[str] = None
    format: Optional[str] = None
    workers: int = 1
