import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from multrec.errors import InvalidInputError, MultrecError
from multrec.models import ExperimentConfig
from multrec.parsers import ConfigParser
from multrec.runners import (
    SCHEMAS,
    ExperimentRunner,
    OutputFormat,
    RecordWriterFactory,
    default_format,
)

_LOG_LEVELS = {"debug", "info", "warning", "error", "critical"}
_DEFAULT_LOG_LEVEL = "warning"
_WORKERS_ENV = "MULTREC_WORKERS"

_GROUPS = {
    "folner": ["gen", "ratio", "avg", "decompose", "verify", "claims", "corr"],
    "recur": [
        "criterion",
        "scan",
        "density",
        "counterexample",
        "verify",
        "fejer",
        "pair",
    ],
    "sys": ["build", "measure", "scan", "axioms"],
}
_SINGLE_COMMANDS = [
    "eval",
    "distance",
    "logavg",
    "halasz",
    "correlate",
    "profile",
    "primesum",
    "concentration",
]


def _integers(count: Optional[int] = None) -> Callable[[str], Tuple[int, ...]]:
    def convert(text: str) -> Tuple[int, ...]:
        try:
            values = tuple(int(v) for v in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"Expected integers: {text}")
        if count is not None and len(values) != count:
            raise argparse.ArgumentTypeError(
                f"Expected {count} integers, got {text}"
            )
        return values

    return convert


def _reals(count: int) -> Callable[[str], Tuple[float, ...]]:
    def convert(text: str) -> Tuple[float, ...]:
        try:
            values = tuple(float(v) for v in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"Expected reals: {text}")
        if len(values) != count:
            raise argparse.ArgumentTypeError(
                f"Expected {count} reals, got {text}"
            )
        return values

    return convert


def _fractions(text: str) -> Tuple[Fraction, Fraction]:
    try:
        first, second = (Fraction(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"Expected two rationals such as 1/3,1/5: {text}"
        )
    return first, second


def _t_grid(text: str) -> Tuple[float, float, int]:
    lo, hi, count = _reals(3)(text)
    return lo, hi, int(count)


def _characters(text: str) -> Tuple[str, ...]:
    values = tuple(v.strip() for v in text.split(";"))
    if len(values) != 4:
        raise argparse.ArgumentTypeError(
            f"Expected four characters separated by ';': {text}"
        )
    return values


def _boolean(text: str) -> bool:
    if text.lower() in ("1", "true", "yes"):
        return True
    if text.lower() in ("0", "false", "no"):
        return False
    raise argparse.ArgumentTypeError(f"Expected a boolean: {text}")


# Flag name, config field, converter and help text of experiment settings.
# Config files use the flag name as key.
_SETTINGS: List[Tuple[str, str, Callable[[str], Any], str]] = [
    ("g", "g", str, "Second function description"),
    ("ns", "ns", str, "Arguments, as 1,2,10 or the range 1..100"),
    ("quad", "quad", _integers(4), "Quadruple a,b,c,d of (an+b)/(cn+d)"),
    ("abcd", "abcd", _integers(4), "Linear forms a1,b1,a2,b2"),
    ("epsilon", "epsilon", float, "Closeness threshold"),
    ("N", "N", int, "End of the scanned range of n"),
    ("X", "X", int, "End of the summation range"),
    ("Y", "Y", int, "Start of the prime range of prime sums"),
    ("B", "B", float, "Conductor bound of aperiodicity profiles"),
    ("window", "window", _reals(2), "Window lo,hi of primes or exponents"),
    ("progression", "progression", _integers(2), "Progression L,r"),
    ("t-grid", "t_grid", _t_grid, "Grid lo,hi,count of t values"),
    ("t", "t", float, "Archimedean twist parameter"),
    ("a", "a", float, "Shift of prime sums or residue of concentration"),
    ("Q", "Q", int, "Modulus, or a single Folner element"),
    ("primes", "primes", _integers(), "Folner primes, such as 2,3,5"),
    ("mu", "mu", int, "Extra precision at primes of A"),
    ("nu", "nu", int, "Extra precision at primes of W"),
    ("p", "p", int, "Prime shifting Q to pQ"),
    ("characters", "characters", _characters, "Four characters f1;f2;g1;g2"),
    ("R", "R", int, "Order of the Fejer mean"),
    ("thetas", "thetas", _fractions, "Angles theta1,theta2"),
    ("pq", "pq", _integers(2), "Pair p,q of arguments"),
    ("trials", "trials", int, "Number of random trials"),
    ("seed", "seed", int, "Seed of random trials"),
    ("threshold", "threshold", int, "Event count for the infinitude proxy"),
    ("start", "start", int, "Start of the scanned range of n"),
    ("slack", "slack", float, "Slack of asymptotic certificates"),
    ("shift", "shift", int, "Shift of pair scans"),
    ("certificate", "certificate", str, "Certificate record file"),
]
_CONVERTERS: Dict[str, Callable[[str], Any]] = {
    flag: convert for flag, _, convert, _ in _SETTINGS
}
_FIELDS: Dict[str, str] = {flag: name for flag, name, _, _ in _SETTINGS}


def _common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument(
        "--log",
        default=_DEFAULT_LOG_LEVEL,
        choices=_LOG_LEVELS,
        help="Log level to use for output",
    )
    parser.add_argument(
        "--workers",
        type=int,
        help=f"Worker processes [Default: ${_WORKERS_ENV} or 1]",
    )
    parser.add_argument("--config", help="Path to a key = value config file")
    parser.add_argument("--output", help="Output path [Default: stdout]")
    parser.add_argument(
        "--format",
        choices=[f.value for f in OutputFormat],
        help="Output format [Default: per subcommand]",
    )
    parser.add_argument(
        "--schema",
        action="store_true",
        help="Print the output columns of the subcommand and exit",
    )
    parser.add_argument(
        "--f",
        action="append",
        dest="functions",
        help="Function description; repeat for several functions",
    )
    for flag, name, convert, help_text in _SETTINGS:
        parser.add_argument(
            f"--{flag}", dest=name, type=convert, help=help_text
        )
    parser.add_argument(
        "--arc",
        action="append",
        dest="arcs",
        type=_fractions,
        help="Arc start,length; repeat once per coordinate",
    )
    parser.add_argument(
        "--imprimitive",
        action="store_true",
        default=None,
        help="Include imprimitive characters in profiles",
    )
    parser.add_argument(
        "--strict",
        action="store_true",
        default=None,
        help="Enforce the strict Folner window bound",
    )
    return parser


def get_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        description="Experiments on multiplicative recurrence of ratio sets"
    )
    commands = parser.add_subparsers(dest="group", required=True)
    for name in _SINGLE_COMMANDS:
        commands.add_parser(name, parents=[common])
    for group, subcommands in _GROUPS.items():
        group_parser = commands.add_parser(group)
        children = group_parser.add_subparsers(dest="command", required=True)
        for name in subcommands:
            children.add_parser(name, parents=[common])
    return parser.parse_args(argv)


def _get_log_level(log_level: str) -> int:
    numeric_log_level = getattr(logging, log_level, None)
    if not isinstance(numeric_log_level, int):
        raise InvalidInputError(f"Invalid log level: {log_level}")
    return numeric_log_level


def _get_command(args: argparse.Namespace) -> str:
    command = getattr(args, "command", None)
    return f"{args.group} {command}" if command else args.group


def _get_workers(args: argparse.Namespace) -> int:
    if args.workers is not None:
        return args.workers
    value = os.environ.get(_WORKERS_ENV)
    if not value:
        return 1
    try:
        return int(value)
    except ValueError:
        raise InvalidInputError(f"Invalid {_WORKERS_ENV}: {value}")


def _file_settings(path: str, group: str) -> Dict[str, Any]:
    try:
        with open(path, "r") as f:
            sections = ConfigParser().parse(f.read())
    except OSError as ose:
        raise InvalidInputError(f"Cannot read config {path}: {ose}")

    raw = {**sections.get("", {}), **sections.get(group, {})}
    settings: Dict[str, Any] = {}
    for key, value in raw.items():
        try:
            if key == "f":
                settings["functions"] = [
                    v.strip() for v in value.split(";") if v.strip()
                ]
            elif key == "arc":
                settings["arcs"] = [
                    _fractions(v) for v in value.split(";") if v.strip()
                ]
            elif key in ("imprimitive", "strict"):
                settings[key] = _boolean(value)
            elif key in _CONVERTERS:
                settings[_FIELDS[key]] = _CONVERTERS[key](value)
            else:
                raise InvalidInputError(f"Unknown config key: {key}")
        except argparse.ArgumentTypeError as ate:
            raise InvalidInputError(f"Config key {key}: {ate}")
    return settings


def get_config(args: argparse.Namespace) -> ExperimentConfig:
    """Assemble the experiment config, flags overriding the config file"""
    settings: Dict[str, Any] = {}
    if args.config:
        settings.update(_file_settings(args.config, args.group))
    names = ["functions", "arcs", "imprimitive", "strict", *_FIELDS.values()]
    for name in names:
        value = getattr(args, name)
        if value is not None:
            settings[name] = value
    settings["output"] = args.output
    settings["format"] = args.format
    settings["workers"] = _get_workers(args)
    return ExperimentConfig(**settings)


def _print_schema(command: str, output_format: OutputFormat) -> None:
    schema = {
        "command": command,
        "format": output_format.value,
        "columns": list(SCHEMAS[command]),
    }
    print(json.dumps(schema))


def _report(error: Exception) -> None:
    diagnostic = {"error": type(error).__name__, "message": str(error)}
    sys.stderr.write(json.dumps(diagnostic) + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = get_args(argv)
    log_level = args.log.upper()

    # Put logging setup in its own block so if it fails, we can fail loudly
    try:
        log_level = _get_log_level(log_level)
        logging.basicConfig(level=log_level)
    except InvalidInputError as iie:
        logging.error(iie)
        _report(iie)
        return 1

    command = _get_command(args)
    try:
        config = get_config(args)
        output_format = (
            OutputFormat(config.format)
            if config.format
            else default_format(command)
        )
        if args.schema:
            _print_schema(command, output_format)
            return 0

        runner = ExperimentRunner(config)
        if config.output:
            with open(config.output, "w", newline="") as stream:
                writer = RecordWriterFactory.get_writer(
                    output_format, stream, SCHEMAS[command]
                )
                runner.run(command, writer)
        else:
            writer = RecordWriterFactory.get_writer(
                output_format, sys.stdout, SCHEMAS[command]
            )
            runner.run(command, writer)
        return 0

    except (MultrecError, OSError) as me:
        # All errors should log their message at the error level and log a
        # stack trace at the debug level
        logging.error(me)
        logging.debug(me, exc_info=True)
        _report(me)
        return 1
