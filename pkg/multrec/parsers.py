"""Grammars for function descriptions and experiment config files"""
import math
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import pyparsing as pp

from multrec.errors import (
    GrammarError,
    InvalidInputError,
    UnexpectedTokenTypeError,
    UnknownNameError,
)
from multrec.models import (
    AngleMap,
    CaseTag,
    CounterexampleCertificate,
    ExprArg,
    FunctionExpr,
    PiOverLog,
    Quadruple,
)
from multrec.multfunc import (
    ConstantOne,
    Liouville,
    MultFunction,
    RandomFiniteValued,
    cyclic_character,
    dirichlet_character,
    modify,
    root_projection,
    unit_algebra,
)

# Argument kinds of the grammar names
_EXPR = "function"
_INT = "integer"
_INDEX = "index"
_REAL = "real"
_MAP = "angle map"


def _byte_offset(text: str, loc: int) -> int:
    return len(text[:loc].encode("utf-8"))


def _to_fraction(s: str, loc: int, toks: pp.ParseResults) -> Fraction:
    numerator, denominator = int(toks[0]), int(toks[1])
    if denominator == 0:
        raise pp.ParseFatalException(
            s, loc, f"Malformed angle {numerator}/0"
        )
    return Fraction(numerator, denominator)


def _to_angle_map(s: str, loc: int, toks: pp.ParseResults) -> AngleMap:
    entries = [(int(p), Fraction(a)) for p, a in toks]
    primes = [p for p, _ in entries]
    if len(set(primes)) != len(primes):
        raise pp.ParseFatalException(s, loc, "Repeated prime in angle map")
    return AngleMap(tuple(entries))


def _to_pi_over_log(s: str, loc: int, toks: pp.ParseResults) -> PiOverLog:
    base = Fraction(toks[0])
    if base <= 0 or base == 1:
        raise pp.ParseFatalException(
            s, loc, f"log({base}) must be a nonzero real"
        )
    return PiOverLog(base)


def _to_call(s: str, loc: int, toks: pp.ParseResults) -> FunctionExpr:
    return FunctionExpr(
        name=toks[0], args=tuple(toks[1:]), offset=_byte_offset(s, loc)
    )


class FunctionParser:
    """FunctionParser defines and parses the function description grammar

    A description is a name, optionally applied to a parenthesized list of
    arguments; arguments are descriptions, integers, reals, index tuples
    such as (1,2), angle maps such as {2:1/3} and pi/log(r). Angles are
    written as rationals a/b standing for e(a/b). Parsing yields a
    FunctionExpr, which build turns into a MultFunction.
    """

    def __init__(self):
        lpar, rpar = pp.Suppress("("), pp.Suppress(")")
        self._integer = pp.Regex(r"[+-]?\d+").setParseAction(
            lambda toks: int(toks[0])
        )
        self._real = pp.Regex(
            r"[+-]?(?:(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)"
        ).setParseAction(lambda toks: float(toks[0]))
        self._rational = (
            self._integer + pp.Suppress("/") + pp.Regex(r"\d+")
        ).setParseAction(_to_fraction)
        self._angle = self._rational | self._integer
        self._angle_map = (
            pp.Suppress("{")
            + pp.Optional(
                pp.delimitedList(
                    pp.Group(self._integer + pp.Suppress(":") + self._angle)
                )
            )
            + pp.Suppress("}")
        ).setParseAction(_to_angle_map)
        self._pi_over_log = (
            pp.Suppress(pp.Keyword("pi"))
            + pp.Suppress("/")
            + pp.Suppress(pp.Keyword("log"))
            + lpar
            + self._angle
            + rpar
        ).setParseAction(_to_pi_over_log)
        self._index = (lpar + pp.delimitedList(self._integer) + rpar)
        self._index.setParseAction(lambda toks: tuple(toks))
        self._name = pp.Word(pp.alphas, pp.alphanums + "_")
        self._expression = pp.Forward()
        self._argument = (
            self._pi_over_log
            | self._expression
            | self._angle_map
            | self._index
            | self._real
            | self._integer
        )
        self._expression <<= (
            self._name
            + pp.Optional(lpar + pp.delimitedList(self._argument) + rpar)
        ).setParseAction(_to_call)
        self._expression.parseWithTabs()

        self._signatures: Dict[str, Tuple[str, ...]] = {
            "char": (_INT, _INDEX),
            "conj": (_EXPR,),
            "cyclic": (_INT, _INT),
            "liouville": (),
            "modify": (_EXPR, _MAP),
            "mul": (_EXPR, _EXPR),
            "one": (),
            "pow": (_EXPR, _INT),
            "proj": (_EXPR, _INT, _REAL),
            "rand": (_INT, _INT),
            "twist": (_REAL,),
        }
        self._fn_map: Dict[str, Callable[..., MultFunction]] = {
            "char": dirichlet_character,
            "conj": lambda f: unit_algebra("conjugate", f),
            "cyclic": cyclic_character,
            "liouville": Liouville,
            "modify": lambda f, m: modify(f, dict(m.entries)),
            "mul": lambda f, g: unit_algebra("product", f, g),
            "one": ConstantOne,
            "pow": lambda f, ell: unit_algebra("power", f, ell),
            "proj": root_projection,
            "rand": RandomFiniteValued,
            "twist": lambda t: unit_algebra("twist", t),
        }

    @property
    def names(self) -> List[str]:
        return sorted(self._signatures)

    def parse(self, text: str) -> FunctionExpr:
        """Parse a function description into its syntax tree

        Args:
            text: The description, such as modify(char(4,1),{2:1/3})

        Raises:
            GrammarError: If the text is not in the grammar, with the byte
                offset of the problem
            UnknownNameError: If a name is not one of the grammar's names
        """
        try:
            parsed = self._expression.parseString(text, parseAll=True)
        except pp.ParseBaseException as pe:
            raise GrammarError(
                f"Invalid function description {text!r}: {pe.msg}",
                _byte_offset(text, pe.loc),
            ) from pe
        expr = parsed[0]
        if not isinstance(expr, FunctionExpr):
            raise UnexpectedTokenTypeError(
                f"Expected a function expression, got {type(expr)}"
            )
        self._check(expr)
        return expr

    @staticmethod
    def _kind(arg: ExprArg) -> str:
        if isinstance(arg, FunctionExpr):
            return _EXPR
        if isinstance(arg, AngleMap):
            return _MAP
        if isinstance(arg, tuple):
            return _INDEX
        if isinstance(arg, int):
            return _INT
        if isinstance(arg, (float, PiOverLog)):
            return _REAL
        raise UnexpectedTokenTypeError(f"Unexpected argument {arg!r}")

    @staticmethod
    def _accepts(expected: str, kind: str) -> bool:
        if expected == kind:
            return True
        # Integers stand in for index tuples of length one and for reals
        return kind == _INT and expected in (_INDEX, _REAL)

    def _check(self, expr: FunctionExpr) -> None:
        if expr.name not in self._signatures:
            raise UnknownNameError(
                f"Unknown function name {expr.name!r}; expected one of "
                f"{', '.join(self.names)}",
                expr.offset,
            )
        expected = self._signatures[expr.name]
        kinds = [self._kind(arg) for arg in expr.args]
        if len(kinds) != len(expected) or not all(
            self._accepts(e, k) for e, k in zip(expected, kinds)
        ):
            signature = ", ".join(expected)
            raise GrammarError(
                f"{expr.name} takes ({signature}), got ({', '.join(kinds)})",
                expr.offset,
            )
        for arg in expr.args:
            if isinstance(arg, FunctionExpr):
                self._check(arg)

    def build(self, expr: FunctionExpr) -> MultFunction:
        """Build the function a syntax tree describes

        Raises:
            GrammarError: If the arguments are out of range for the name,
                such as a character index that does not exist
        """
        args: List[Any] = []
        for arg in expr.args:
            if isinstance(arg, FunctionExpr):
                args.append(self.build(arg))
            elif isinstance(arg, PiOverLog):
                args.append(arg.value)
            else:
                args.append(arg)
        for arg in args:
            if isinstance(arg, float) and not math.isfinite(arg):
                raise GrammarError(
                    f"{expr.name} needs a finite real, got {arg}", expr.offset
                )
        try:
            return self._fn_map[expr.name](*args)
        except InvalidInputError as iie:
            if isinstance(iie, GrammarError):
                raise
            raise GrammarError(str(iie), expr.offset) from iie

    def get_function(self, text: str) -> MultFunction:
        """Parse a function description and build the function"""
        return self.build(self.parse(text))


_function_parser: Optional[FunctionParser] = None


def _get_function_parser() -> FunctionParser:
    global _function_parser
    if _function_parser is None:
        _function_parser = FunctionParser()
    return _function_parser


def parse_function_expr(text: str) -> FunctionExpr:
    return _get_function_parser().parse(text)


def parse_function(text: str) -> MultFunction:
    return _get_function_parser().get_function(text)


def pretty_print(expr: FunctionExpr) -> str:
    """Get the text of a syntax tree; parsing it gives the tree back"""
    return str(expr)


def certificate_from_record(
    record: Mapping[str, Any]
) -> CounterexampleCertificate:
    """Rebuild a certificate from the record written by to_record

    Raises:
        InvalidInputError: If a field is missing or malformed
    """
    try:
        case = CaseTag(record["case"])
        a, b, c, d = (int(x) for x in record["quad"])
        eta_gap = record.get("eta_gap")
        g = record.get("g")
        return CounterexampleCertificate(
            f=parse_function(record["f"]),
            quadruple=Quadruple(
                a, b, c, d, normalized=case is not CaseTag.PAIR_SHIFT_2
            ),
            case=case,
            eta=float(record["eta"]),
            eta_gap=Fraction(eta_gap) if eta_gap is not None else None,
            n0=int(record["n0"]),
            slack=float(record.get("slack", 0.0)),
            g=parse_function(g) if g is not None else None,
            details=dict(record.get("details", {})),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidInputError(f"Malformed certificate record: {e}") from e


class ConfigParser:
    """ConfigParser parses flat key = value experiment files

    Lines hold either a [section] header or a key = value entry; # starts
    a comment. Entries before the first header belong to the section "".
    """

    def __init__(self):
        self._comment = pp.Regex(r"#[^\n]*")
        self._section = (
            pp.Suppress("[")
            + pp.Word(pp.alphanums + "_-")
            + pp.Suppress("]")
        ).setParseAction(lambda toks: ("section", toks[0]))
        self._key = pp.Word(pp.alphas + "_", pp.alphanums + "_-")
        self._value = pp.Regex(r"[^\n#]+").setWhitespaceChars(" \t")
        self._entry = (
            self._key
            + pp.Suppress("=")
            + pp.Optional(self._value, default="")
        ).setParseAction(
            lambda toks: ("entry", toks[0], toks[1].strip())
        )
        self._document = pp.ZeroOrMore(self._section | self._entry)
        self._document.ignore(self._comment)

    def parse(self, text: str) -> Dict[str, Dict[str, str]]:
        """Get the entries of a config file grouped by section

        Raises:
            InvalidInputError: If the text is malformed or a key repeats
                within a section
        """
        try:
            items = self._document.parseString(text, parseAll=True)
        except pp.ParseBaseException as pe:
            raise InvalidInputError(
                f"Invalid config: See line {pe.lineno} column {pe.col}\n"
                f"Details: {pe}"
            ) from pe

        sections: Dict[str, Dict[str, str]] = {"": {}}
        current = ""
        for item in items:
            if item[0] == "section":
                current = item[1]
                sections.setdefault(current, {})
                continue
            _, key, value = item
            if key in sections[current]:
                raise InvalidInputError(
                    f"Key {key} repeats in section [{current}]"
                )
            sections[current][key] = value
        return sections
