"""Execution of CLI subcommands and the writers for their output rows"""
import csv
import json
import logging
import math
from abc import ABC, abstractmethod
from enum import Enum
from fractions import Fraction
from typing import (
    Any,
    Callable,
    Dict,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    TextIO,
    Tuple,
)

import numpy as np

from multrec import folner, multsys, pretentious, recurrence
from multrec.errors import InvalidInputError, RangeError
from multrec.models import (
    DistanceWindow,
    ExperimentConfig,
    FolnerElement,
    FolnerParams,
    Quadruple,
)
from multrec.multfunc import (
    DirichletCharacter,
    MultFunction,
    UnitValue,
    is_finitely_generated,
    value_order,
)
from multrec.parsers import FunctionParser, certificate_from_record

SCAN_BUDGET = 10**8
PROFILE_GRID = 401
PRIME_SUM_POINTS = 50

Row = Dict[str, Any]


class OutputFormat(Enum):
    """Enumerate the supported output formats"""

    CSV = "csv"
    JSONL = "jsonl"


_CSV_COMMANDS = {
    "eval",
    "distance",
    "logavg",
    "halasz",
    "correlate",
    "primesum",
    "concentration",
    "folner gen",
    "folner ratio",
    "folner avg",
    "folner decompose",
    "folner verify",
    "recur scan",
    "recur verify",
    "sys build",
    "sys measure",
    "sys scan",
}

SCHEMAS: Dict[str, Tuple[str, ...]] = {
    "eval": ("function", "n", "value", "re", "im"),
    "distance": ("f", "g", "lower", "upper", "distance"),
    "logavg": ("function", "X", "L", "r", "re", "im", "abs"),
    "halasz": ("function", "X", "lhs", "rhs", "ratio"),
    "correlate": (
        "f", "g", "a1", "b1", "a2", "b2", "X", "L", "r", "re", "im", "abs"
    ),
    "profile": (
        "function",
        "B",
        "X",
        "infimum",
        "argmin_character",
        "argmin_t",
        "resolution",
        "refined",
        "grid_size",
        "distances",
    ),
    "primesum": ("character", "a", "Y", "X", "re", "im", "abs"),
    "concentration": (
        "f",
        "character",
        "t",
        "Q",
        "a",
        "X",
        "lhs",
        "rhs_core",
        "ratio",
        "p_k",
        "tail_distance",
        "oscillatory_re",
        "oscillatory_im",
        "in_regime",
    ),
    "folner gen": ("Q", "exponents"),
    "folner ratio": ("p", "ratio", "expected", "exact"),
    "folner avg": ("function", "p", "re", "im", "lhs", "rhs", "holds"),
    "folner decompose": (
        "Q",
        "A",
        "W",
        "u",
        "r_Q",
        "l_Q",
        "m_Q",
        "crt_modulus",
        "swapped",
        "checks_passed",
    ),
    "folner verify": ("Q", "r_Q", "brute_force_r", "identities", "agrees"),
    "folner claims": (
        "Q",
        "p",
        "exceptional",
        "hypotheses_met",
        "holds",
        "identities",
    ),
    "folner corr": ("f", "g", "X", "value", "per_q"),
    "recur criterion": ("criterion", "quad", "a", "b", "c", "d"),
    "recur scan": ("function", "g", "n", "minimum"),
    "recur density": (
        "function",
        "epsilon",
        "quad",
        "X",
        "upper",
        "lower",
        "final",
        "hits",
        "flagged",
        "samples",
    ),
    "recur counterexample": (
        "case",
        "f",
        "g",
        "quad",
        "eta",
        "eta_gap",
        "n0",
        "slack",
        "details",
    ),
    "recur verify": (
        "case",
        "f",
        "quad",
        "n0",
        "N",
        "passed",
        "scanned",
        "minimum",
        "minimum_gap",
        "witness",
    ),
    "recur fejer": (
        "epsilon",
        "R",
        "minimal_R",
        "sup_error",
        "meets_bound",
        "c0",
        "tent_dominated",
        "nonnegative",
        "lower_bound_holds",
        "indicator_average",
        "tent_average",
        "fourier_bound",
    ),
    "recur pair": (
        "case",
        "f",
        "g",
        "quad",
        "eta",
        "eta_gap",
        "N",
        "passed",
        "minimum",
        "shift1_minimum",
        "shift1_argmin",
    ),
    "sys build": ("coordinate", "function", "finitely_generated", "exact"),
    "sys measure": ("p", "q", "arcs", "measure"),
    "sys scan": ("n", "p", "q", "measure"),
    "sys axioms": (
        "system",
        "passed",
        "trials",
        "composition_failures",
        "measure_failures",
        "witness",
    ),
}


def default_format(command: str) -> OutputFormat:
    """Get CSV for scans and flat tables, JSON lines for nested records"""
    if command in _CSV_COMMANDS:
        return OutputFormat.CSV
    return OutputFormat.JSONL


def _format_fraction(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def encode(value: Any) -> Any:
    """Convert a value into plain JSON data

    Fractions become "a/b", complex numbers [re, im], and non-finite
    floats their text.
    """
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Fraction):
        return _format_fraction(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [encode(value.real), encode(value.imag)]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, MultFunction):
        return value.describe()
    if isinstance(value, (UnitValue, Quadruple)):
        return str(value)
    if isinstance(value, Mapping):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [encode(v) for v in value]
    raise InvalidInputError(f"Cannot encode {value!r}")


class RecordWriter(ABC):
    """Base class for writers of output rows with fixed columns"""

    def __init__(self, stream: TextIO, columns: Sequence[str]):
        self._stream = stream
        self.columns = tuple(columns)

    def _values(self, row: Mapping[str, Any]) -> List[Any]:
        unknown = set(row) - set(self.columns)
        if unknown:
            raise InvalidInputError(
                f"Row has columns outside the schema: {sorted(unknown)}"
            )
        return [encode(row.get(column)) for column in self.columns]

    @abstractmethod
    def write(self, row: Mapping[str, Any]) -> None:
        """Write one row"""


class CsvWriter(RecordWriter):
    def __init__(self, stream: TextIO, columns: Sequence[str]):
        super().__init__(stream, columns)
        self._writer = csv.writer(stream, lineterminator="\n")
        self._writer.writerow(self.columns)

    @staticmethod
    def _cell(value: Any) -> str:
        if value is None:
            return ""
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            return repr(value)
        if isinstance(value, (list, dict)):
            return json.dumps(value)
        return str(value)

    def write(self, row: Mapping[str, Any]) -> None:
        self._writer.writerow([self._cell(v) for v in self._values(row)])


class JsonLinesWriter(RecordWriter):
    def write(self, row: Mapping[str, Any]) -> None:
        record = dict(zip(self.columns, self._values(row)))
        self._stream.write(json.dumps(record) + "\n")


class RecordWriterFactory:
    """Factory for writers of the supported output formats"""

    @staticmethod
    def get_writer(
        output_format: OutputFormat, stream: TextIO, columns: Sequence[str]
    ) -> RecordWriter:
        """Get a writer for the given format

        Args:
            output_format: Format to write
            stream: Open text stream to write to
            columns: Columns of the rows, in output order

        Raises:
            InvalidInputError: If the format is not supported
        """
        if output_format == OutputFormat.CSV:
            return CsvWriter(stream, columns)
        elif output_format == OutputFormat.JSONL:
            return JsonLinesWriter(stream, columns)
        raise InvalidInputError(f"Unsupported output format: {output_format}")


def parse_ns(text: str) -> List[int]:
    """Parse "1,2,10" or the inclusive range "1..100" into integers"""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(n) for n in text.split(",")]
    except ValueError as ve:
        raise InvalidInputError(f"Invalid list of arguments {text!r}") from ve


def _check_budget(name: str, value: int) -> int:
    if value > SCAN_BUDGET:
        raise RangeError(
            f"{name} = {value} exceeds the scan budget {SCAN_BUDGET:.0e}"
        )
    return value


class ExperimentRunner:
    """Runs subcommands against an experiment config

    Each subcommand is a generator of rows; run sends them to a writer in
    the order they are produced.
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self._parser = FunctionParser()
        self._fn_map: Dict[str, Callable[[], Iterator[Row]]] = {
            "eval": self._eval,
            "distance": self._distance,
            "logavg": self._logavg,
            "halasz": self._halasz,
            "correlate": self._correlate,
            "profile": self._profile,
            "primesum": self._primesum,
            "concentration": self._concentration,
            "folner gen": self._folner_gen,
            "folner ratio": self._folner_ratio,
            "folner avg": self._folner_avg,
            "folner decompose": self._folner_decompose,
            "folner verify": self._folner_verify,
            "folner claims": self._folner_claims,
            "folner corr": self._folner_corr,
            "recur criterion": self._recur_criterion,
            "recur scan": self._recur_scan,
            "recur density": self._recur_density,
            "recur counterexample": self._recur_counterexample,
            "recur verify": self._recur_verify,
            "recur fejer": self._recur_fejer,
            "recur pair": self._recur_pair,
            "sys build": self._sys_build,
            "sys measure": self._sys_measure,
            "sys scan": self._sys_scan,
            "sys axioms": self._sys_axioms,
        }

    @property
    def commands(self) -> List[str]:
        return list(self._fn_map)

    def run(self, command: str, writer: RecordWriter) -> int:
        """Run a subcommand, writing its rows

        Args:
            command: Subcommand name such as "recur scan"
            writer: Destination of the rows

        Raises:
            InvalidInputError: If the command is unknown or the config
                lacks a field the command needs
            RangeError: If a range exceeds its budget

        Returns:
            Number of rows written
        """
        if command not in self._fn_map:
            raise InvalidInputError(f"Unknown subcommand: {command}")
        logging.info(f"Running {command}")
        count = 0
        for row in self._fn_map[command]():
            writer.write(row)
            count += 1
        logging.info(f"{command} wrote {count} rows")
        return count

    def _require(self, name: str) -> Any:
        value = getattr(self.config, name)
        if value is None or value == []:
            raise InvalidInputError(f"This subcommand needs --{name}")
        return value

    def _range(self, name: str) -> int:
        return _check_budget(name, int(self._require(name)))

    def _workers(self) -> int:
        return max(1, self.config.workers)

    def _functions(self) -> List[Tuple[str, MultFunction]]:
        texts = self._require("functions")
        return [(text, self._parser.get_function(text)) for text in texts]

    def _first_function(self) -> Tuple[str, MultFunction]:
        return self._functions()[0]

    def _second_function(self, default: str) -> Tuple[str, MultFunction]:
        text = self.config.g if self.config.g is not None else default
        return text, self._parser.get_function(text)

    def _character(self, text: str) -> DirichletCharacter:
        chi = self._parser.get_function(text)
        if not isinstance(chi, DirichletCharacter):
            raise InvalidInputError(f"{text} is not a Dirichlet character")
        return chi

    def _quadruple(self) -> Quadruple:
        return Quadruple(*self._require("quad"))

    def _forms(self) -> Tuple[int, int, int, int]:
        return tuple(self._require("abcd"))

    def _folner_params(self) -> FolnerParams:
        lo, hi = self._require("window")
        return FolnerParams(tuple(self._require("primes")), int(lo), int(hi))

    def _eval(self) -> Iterator[Row]:
        ns = parse_ns(self._require("ns"))
        for text, f in self._functions():
            for n in ns:
                value = f.eval(n)
                z = value.to_complex()
                yield {
                    "function": text,
                    "n": n,
                    "value": str(value),
                    "re": z.real,
                    "im": z.imag,
                }

    def _distance(self) -> Iterator[Row]:
        lower, upper = self._require("window")
        window = DistanceWindow(lower, upper)
        g_text, g = self._second_function("one")
        for text, f in self._functions():
            yield {
                "f": text,
                "g": g_text,
                "lower": lower,
                "upper": upper,
                "distance": pretentious.distance(f, g, window),
            }

    def _progression_columns(self) -> Row:
        L, r = self.config.progression or (1, 0)
        return {"L": L, "r": r}

    def _logavg(self) -> Iterator[Row]:
        X = self._range("X")
        for text, f in self._functions():
            average = pretentious.log_average(
                f, X, self.config.progression, workers=self._workers()
            )
            yield {
                "function": text,
                "X": X,
                **self._progression_columns(),
                "re": average.value.real,
                "im": average.value.imag,
                "abs": abs(average.value),
            }

    def _halasz(self) -> Iterator[Row]:
        X = self._range("X")
        for text, f in self._functions():
            report = pretentious.halasz_gap(f, X, workers=self._workers())
            yield {
                "function": text,
                "X": X,
                "lhs": report.lhs,
                "rhs": report.rhs,
                "ratio": report.ratio,
            }

    def _correlate(self) -> Iterator[Row]:
        X = self._range("X")
        a1, b1, a2, b2 = self._forms()
        f_text, f = self._first_function()
        g_text, g = self._second_function(f_text)
        value = pretentious.correlation(
            f,
            g,
            a1,
            b1,
            a2,
            b2,
            X,
            self.config.progression,
            workers=self._workers(),
        )
        yield {
            "f": f_text,
            "g": g_text,
            "a1": a1,
            "b1": b1,
            "a2": a2,
            "b2": b2,
            "X": X,
            **self._progression_columns(),
            "re": value.real,
            "im": value.imag,
            "abs": abs(value),
        }

    def _profile(self) -> Iterator[Row]:
        X = self._range("X")
        B = self._require("B")
        lo, hi, count = self.config.t_grid or (-B, B, PROFILE_GRID)
        grid = np.linspace(lo, hi, int(count)).tolist()
        for text, f in self._functions():
            profile = pretentious.aperiodicity_profile(
                f, B, X, grid, include_imprimitive=self.config.imprimitive
            )
            yield {
                "function": text,
                "B": B,
                "X": X,
                "infimum": profile.infimum,
                "argmin_character": profile.argmin_character,
                "argmin_t": profile.argmin_t,
                "resolution": profile.resolution,
                "refined": profile.refined,
                "grid_size": len(grid),
                "distances": profile.distances,
            }

    def _primesum(self) -> Iterator[Row]:
        X = self._range("X")
        Y = self.config.Y if self.config.Y is not None else 2
        if self.config.a is not None:
            points = [self.config.a]
        else:
            points = np.geomspace(
                1.0 / math.log(X), X, PRIME_SUM_POINTS
            ).tolist()
        for text, chi in self._functions():
            for a in points:
                value = pretentious.prime_character_sum(chi, a, Y, X)
                yield {
                    "character": text,
                    "a": a,
                    "Y": Y,
                    "X": X,
                    "re": value.real,
                    "im": value.imag,
                    "abs": abs(value),
                }

    def _concentration(self) -> Iterator[Row]:
        X = self._range("X")
        f_text, f = self._first_function()
        chi_text = self._require("g")
        chi = self._character(chi_text)
        t = self.config.t if self.config.t is not None else 0.0
        Q = int(self._require("Q"))
        a = self._require("a")
        if float(a) != int(a):
            raise InvalidInputError(
                f"Concentration needs an integral residue --a, got {a}"
            )
        a = int(a)
        report = pretentious.concentration_residual(
            f, chi, t, Q, a, X, workers=self._workers()
        )
        yield {
            "f": f_text,
            "character": chi_text,
            "t": t,
            "Q": Q,
            "a": a,
            "X": X,
            "lhs": report.lhs,
            "rhs_core": report.rhs_core,
            "ratio": report.ratio,
            "p_k": report.p_k,
            "tail_distance": report.tail_distance,
            "oscillatory_re": report.oscillatory_term.real,
            "oscillatory_im": report.oscillatory_term.imag,
            "in_regime": report.in_regime,
        }

    def _folner_gen(self) -> Iterator[Row]:
        for Q in folner.folner_set(self._folner_params()):
            yield {
                "Q": Q.value,
                "exponents": " ".join(str(e) for e in Q.exponents),
            }

    def _folner_ratio(self) -> Iterator[Row]:
        params = self._folner_params()
        expected = Fraction(params.width - 1, params.width)
        for p in params.primes:
            ratio = folner.folner_ratio(params, p)
            yield {
                "p": p,
                "ratio": ratio,
                "expected": expected,
                "exact": ratio == expected,
            }

    def _folner_avg(self) -> Iterator[Row]:
        params = self._folner_params()
        for text, f in self._functions():
            report = folner.multiplicative_average(f, params)
            for bound in report.bounds:
                yield {
                    "function": text,
                    "p": bound.prime,
                    "re": report.average.real,
                    "im": report.average.imag,
                    "lhs": bound.lhs,
                    "rhs": bound.rhs,
                    "holds": bound.holds,
                }

    def _elements(self, params: FolnerParams) -> List[FolnerElement]:
        elements = folner.folner_set(params)
        if self.config.Q is None:
            return elements
        chosen = [Q for Q in elements if Q.value == self.config.Q]
        if not chosen:
            raise InvalidInputError(
                f"Q = {self.config.Q} is not in the Folner set"
            )
        return chosen

    def _decompositions(self) -> Iterator[Any]:
        params = self._folner_params()
        a1, b1, a2, b2 = self._forms()
        mu = self.config.mu if self.config.mu is not None else 1
        nu = self.config.nu if self.config.nu is not None else 1
        for Q in self._elements(params):
            yield folner.q_decompose(
                Q, a1, b1, a2, b2, mu, nu, strict=self.config.strict
            )

    def _folner_decompose(self) -> Iterator[Row]:
        for dec in self._decompositions():
            yield {
                "Q": dec.Q.value,
                "A": dec.A,
                "W": dec.W,
                "u": dec.u,
                "r_Q": dec.r_q,
                "l_Q": dec.l_q,
                "m_Q": dec.m_q,
                "crt_modulus": dec.crt_modulus,
                "swapped": dec.swapped,
                "checks_passed": all(dec.checks.values()),
            }

    def _folner_verify(self) -> Iterator[Row]:
        for dec in self._decompositions():
            checks = folner.verify_qtrick(dec)
            try:
                brute: Optional[int] = folner.brute_force_residue(dec)
            except RangeError as re:
                logging.warning(f"Q={dec.Q.value}: {re}")
                brute = None
            yield {
                "Q": dec.Q.value,
                "r_Q": dec.r_q,
                "brute_force_r": brute,
                "identities": len(checks),
                "agrees": brute is None or brute == dec.r_q,
            }

    def _folner_claims(self) -> Iterator[Row]:
        params = self._folner_params()
        a1, b1, a2, b2 = self._forms()
        characters = tuple(
            self._character(text) for text in self._require("characters")
        )
        if len(characters) != 4:
            raise InvalidInputError("Character shifts need four characters")
        reports = folner.claims_sweep(
            params,
            a1,
            b1,
            a2,
            b2,
            int(self._require("p")),
            characters,
            self.config.mu if self.config.mu is not None else 1,
            self.config.nu if self.config.nu is not None else 1,
            strict=self.config.strict,
        )
        for report in reports:
            yield {
                "Q": report.Q,
                "p": report.p,
                "exceptional": report.exceptional,
                "hypotheses_met": report.hypotheses_met,
                "holds": report.holds,
                "identities": report.identities,
            }

    def _folner_corr(self) -> Iterator[Row]:
        X = self._range("X")
        a1, b1, a2, b2 = self._forms()
        f_text, f = self._first_function()
        g_text, g = self._second_function(f_text)
        result = folner.averaged_correlation(
            f,
            g,
            a1,
            b1,
            a2,
            b2,
            self._folner_params(),
            X,
            self.config.mu if self.config.mu is not None else 1,
            self.config.nu if self.config.nu is not None else 1,
            strict=self.config.strict,
            workers=self._workers(),
        )
        yield {
            "f": f_text,
            "g": g_text,
            "X": X,
            "value": result.value,
            "per_q": result.per_q,
        }

    def _recur_criterion(self) -> Iterator[Row]:
        result = recurrence.criterion(self._quadruple())
        q = result.quadruple
        yield {
            "criterion": result.holds,
            "quad": str(q),
            "a": q.a,
            "b": q.b,
            "c": q.c,
            "d": q.d,
        }

    def _recur_scan(self) -> Iterator[Row]:
        N = self._range("N")
        for text, f in self._functions():
            if self.config.g is None:
                trace = recurrence.liminf_scan(f, self._quadruple(), N)
            else:
                _, g = self._second_function(text)
                a = self.config.quad[0] if self.config.quad else 1
                trace = recurrence.pair_scan(
                    f, g, a, N, self.config.shift or 1
                )
            logging.info(
                f"{text}: minimum {trace.minimum!r} at n={trace.argmin}"
            )
            for n, minimum in trace.improvements:
                yield {
                    "function": text,
                    "g": self.config.g,
                    "n": n,
                    "minimum": minimum,
                }

    def _recur_density(self) -> Iterator[Row]:
        X = self._range("X")
        q = self._quadruple()
        if q.a != q.c:
            raise InvalidInputError(
                f"Densities need a = c, got the quadruple {q}"
            )
        epsilon = self._require("epsilon")
        for text, f in self._functions():
            estimate = recurrence.density_estimate(
                f, epsilon, q.a, q.b, q.d, X, workers=self._workers()
            )
            yield {
                "function": text,
                "epsilon": epsilon,
                "quad": str(q),
                "X": X,
                "upper": estimate.upper,
                "lower": estimate.lower,
                "final": estimate.final,
                "hits": estimate.hits,
                "flagged": estimate.flagged,
                "samples": estimate.samples,
            }

    def _recur_counterexample(self) -> Iterator[Row]:
        slack = self.config.slack
        cert = recurrence.build_counterexample(
            self._quadruple(),
            recurrence.DEFAULT_SLACK if slack is None else slack,
        )
        logging.info(f"Built a {cert.case.value} certificate")
        yield cert.to_record()

    def _recur_verify(self) -> Iterator[Row]:
        N = self._range("N")
        with open(self._require("certificate"), "r") as f:
            lines = [line for line in f if line.strip()]
        for line in lines:
            try:
                record = json.loads(line)
            except json.JSONDecodeError as jde:
                raise InvalidInputError(
                    f"Certificate file holds invalid JSON: {jde}"
                ) from jde
            cert = certificate_from_record(record)
            check = recurrence.verify_certificate(cert, N)
            yield {
                "case": cert.case.value,
                "f": cert.f.describe(),
                "quad": str(cert.quadruple),
                "n0": cert.n0,
                "N": N,
                "passed": check.passed,
                "scanned": check.scanned,
                "minimum": check.minimum,
                "minimum_gap": check.minimum_gap,
                "witness": check.witness,
            }

    def _recur_fejer(self) -> Iterator[Row]:
        approx = recurrence.fejer(self._require("epsilon"), self.config.R)
        grid = recurrence.fejer_grid(approx.epsilon)
        eps = approx.epsilon
        tent = approx.tent(grid)
        indicator = ((grid < eps) | (grid > 1.0 - eps)).astype(float)
        oscillating = approx.oscillating_part(grid)
        row: Row = {
            "epsilon": eps,
            "R": approx.R,
            "minimal_R": approx.minimal_R,
            "sup_error": approx.sup_error,
            "meets_bound": approx.meets_bound,
            "c0": float(approx.coefficients[0]),
            "tent_dominated": bool(np.all(tent <= indicator)),
            "nonnegative": bool(
                np.all(approx.coefficients[0] + oscillating >= -1e-12)
            ),
            "lower_bound_holds": bool(
                np.all(tent >= eps**2 + oscillating - 1e-12)
            ),
        }
        if self.config.functions and self.config.quad and self.config.X:
            _, f = self._first_function()
            bound = recurrence.fejer_lower_bound(
                f, self._quadruple(), approx, self._range("X")
            )
            row.update(
                indicator_average=bound.indicator_average,
                tent_average=bound.tent_average,
                fourier_bound=bound.fourier_bound,
            )
        yield row

    def _recur_pair(self) -> Iterator[Row]:
        thetas = self.config.thetas or (Fraction(1, 3), Fraction(1, 5))
        cert = recurrence.build_pair_counterexample(*thetas)
        record = cert.to_record()
        row: Row = {k: record[k] for k in ("case", "f", "g", "quad", "eta")}
        row["eta_gap"] = cert.eta_gap
        if self.config.N is not None:
            N = self._range("N")
            check = recurrence.verify_certificate(cert, N)
            trace = recurrence.pair_scan(cert.f, cert.second, 1, N, shift=1)
            row.update(
                N=N,
                passed=check.passed,
                minimum=check.minimum,
                shift1_minimum=trace.minimum,
                shift1_argmin=trace.argmin,
            )
        yield row

    def _system(self) -> multsys.RotationSystem:
        return multsys.RotationSystem(
            tuple(f for _, f in self._functions())
        )

    def _arc_sets(
        self, system: multsys.RotationSystem
    ) -> Tuple[multsys.ArcSet, ...]:
        arcs = self.config.arcs or [(Fraction(0), Fraction(1, 4))]
        if len(arcs) == 1:
            arcs = arcs * system.dimension
        if len(arcs) != system.dimension:
            raise InvalidInputError(
                f"Need one arc per coordinate, got {len(arcs)} for "
                f"{system.dimension} coordinates"
            )
        return tuple(
            multsys.ArcSet.of(multsys.Arc(start, length))
            for start, length in arcs
        )

    def _sys_build(self) -> Iterator[Row]:
        for i, f in enumerate(self._system().functions):
            logging.debug(f"Coordinate {i} has order {value_order(f)}")
            yield {
                "coordinate": i,
                "function": f.describe(),
                "finitely_generated": is_finitely_generated(f),
                "exact": f.is_exact,
            }

    def _sys_measure(self) -> Iterator[Row]:
        system = self._system()
        A = self._arc_sets(system)
        p, q = self._require("pq")
        yield {
            "p": p,
            "q": q,
            "arcs": " x ".join(str(arcs) for arcs in A),
            "measure": multsys.recurrence_measure(system, p, q, A),
        }

    def _sys_scan(self) -> Iterator[Row]:
        system = self._system()
        A = self._arc_sets(system)
        N = self._range("N")
        scan = multsys.scan_recurrence(
            system,
            self._quadruple(),
            A,
            N,
            start=self.config.start or 1,
            threshold=self.config.threshold or multsys.EVENT_THRESHOLD,
        )
        logging.info(
            f"{scan.count} events over {scan.scanned} values, first at "
            f"{scan.first}, largest gap {scan.largest_gap}, infinitude "
            f"proxy {'met' if scan.infinitude_proxy else 'not met'}"
        )
        for event in scan.events:
            yield {
                "n": event.n,
                "p": event.p,
                "q": event.q,
                "measure": event.measure,
            }

    def _sys_axioms(self) -> Iterator[Row]:
        system = self._system()
        report = multsys.action_axioms_check(
            system,
            trials=self.config.trials or 10_000,
            seed=self.config.seed or 0,
        )
        yield {
            "system": system.describe(),
            "passed": report.passed,
            "trials": report.trials,
            "composition_failures": report.composition_failures,
            "measure_failures": report.measure_failures,
            "witness": report.witness,
        }
