import math
from fractions import Fraction

import pytest

from multrec.errors import GrammarError, InvalidInputError, UnknownNameError
from multrec.models import AngleMap, FunctionExpr, PiOverLog, Quadruple
from multrec.multfunc import UnitValue, dirichlet_character, modify
from multrec.parsers import (
    ConfigParser,
    FunctionParser,
    certificate_from_record,
    parse_function,
    parse_function_expr,
    pretty_print,
)
from multrec.recurrence import build_counterexample, build_pair_counterexample


@pytest.fixture
def parser():
    return FunctionParser()


@pytest.fixture
def descriptions():
    return [
        "liouville",
        "one",
        "char(4,1)",
        "char(8,(1,1))",
        "cyclic(7,2)",
        "modify(char(4,1),{2:1/3})",
        "modify(char(15,(1,2)),{3:1/2,5:0/1})",
        "mul(liouville,conj(char(5,1)))",
        "pow(char(7,1),-2)",
        "proj(twist(2.5),3,2.5)",
        "rand(5,7)",
        "twist(pi/log(3/2))",
    ]


@pytest.fixture
def config_text():
    return """
    # shared settings
    f = liouville; char(4,1)
    N = 100

    [recur]
    quad = 6,3,6,2  # trailing comment
    epsilon =
    """


def test_parse_bare_name(parser):
    assert parser.parse("liouville") == FunctionExpr("liouville")


def test_parse_nested(parser):
    expr = parser.parse("modify(char(4,1),{2:1/3})")
    assert expr.name == "modify"
    inner, angles = expr.args
    assert inner == FunctionExpr("char", (4, 1))
    assert angles == AngleMap(((2, Fraction(1, 3)),))


def test_parse_pi_over_log(parser):
    expr = parser.parse("twist(pi/log(2))")
    assert expr.args == (PiOverLog(Fraction(2)),)


def test_parse_whitespace(parser):
    expr = parser.parse("mul( liouville ,\tchar(4, 1) )")
    assert pretty_print(expr) == "mul(liouville,char(4,1))"


def test_pretty_print_round_trip(parser, descriptions):
    for text in descriptions:
        expr = parser.parse(text)
        assert pretty_print(expr) == text
        assert parser.parse(pretty_print(expr)) == expr


def test_describe_round_trip(descriptions):
    for text in descriptions:
        f = parse_function(text)
        again = parse_function(f.describe())
        for n in (2, 3, 5, 12, 97, 360):
            assert again.eval(n) == f.eval(n)


def test_build_modified_character():
    f = parse_function("modify(char(4,1),{2:1/3})")
    assert f == modify(dirichlet_character(4, 1), {2: Fraction(1, 3)})
    assert f.eval(6) == UnitValue.exact(Fraction(5, 6))


def test_build_twist():
    f = parse_function("twist(pi/log(2))")
    assert f.eval(2).to_complex() == pytest.approx(-1.0)
    assert f.describe() == f"twist({math.pi / math.log(2)!r})"


def test_build_integer_for_real():
    f = parse_function("twist(1)")
    assert not f.is_exact


def test_unknown_name_offset(parser):
    with pytest.raises(UnknownNameError) as excinfo:
        parser.parse("mul(liouville,foo)")
    assert excinfo.value.offset == 14


def test_trailing_text_offset(parser):
    with pytest.raises(GrammarError) as excinfo:
        parser.parse("liouville)")
    assert excinfo.value.offset == 9


def test_wrong_arity(parser):
    with pytest.raises(GrammarError) as excinfo:
        parser.parse("char(4)")
    assert excinfo.type is GrammarError
    assert "char takes" in str(excinfo.value)


def test_wrong_kind(parser):
    with pytest.raises(GrammarError):
        parser.parse("conj(4)")
    with pytest.raises(GrammarError):
        parser.parse("pow(liouville,1.5)")


def test_malformed_angle(parser):
    with pytest.raises(GrammarError) as excinfo:
        parser.parse("modify(char(4,1),{2:1/0})")
    assert "Malformed angle" in str(excinfo.value)


def test_repeated_prime(parser):
    with pytest.raises(GrammarError):
        parser.parse("modify(char(4,1),{2:1/3,2:1/5})")


def test_log_of_one(parser):
    with pytest.raises(GrammarError):
        parser.parse("twist(pi/log(1))")


def test_build_out_of_range_index(parser):
    with pytest.raises(GrammarError) as excinfo:
        parser.get_function("mul(liouville,char(5,4))")
    assert excinfo.value.offset == 14


def test_build_missing_override():
    with pytest.raises(InvalidInputError):
        parse_function("modify(char(4,1),{3:1/2})")


def test_parse_function_expr_module_level():
    assert parse_function_expr("one") == FunctionExpr("one")


def test_names(parser):
    assert "liouville" in parser.names
    assert parser.names == sorted(parser.names)


@pytest.mark.parametrize(
    "cert",
    [
        build_pair_counterexample(),
        build_counterexample(Quadruple(3, 1, 3, 2)),
        build_counterexample(Quadruple(4, 2, 4, 1)),
        build_counterexample(Quadruple(2, 0, 1, 1)),
    ],
)
def test_certificate_from_record(cert):
    assert certificate_from_record(cert.to_record()) == cert


def test_certificate_from_malformed_record():
    with pytest.raises(InvalidInputError):
        certificate_from_record({})
    record = build_pair_counterexample().to_record()
    record["case"] = "unknown"
    with pytest.raises(InvalidInputError):
        certificate_from_record(record)


def test_config_parser(config_text):
    sections = ConfigParser().parse(config_text)
    assert sections == {
        "": {"f": "liouville; char(4,1)", "N": "100"},
        "recur": {"quad": "6,3,6,2", "epsilon": ""},
    }


def test_config_parser_empty():
    assert ConfigParser().parse("# nothing\n") == {"": {}}


def test_config_parser_repeated_key():
    with pytest.raises(InvalidInputError):
        ConfigParser().parse("N = 1\nN = 2\n")


def test_config_parser_malformed():
    with pytest.raises(InvalidInputError) as excinfo:
        ConfigParser().parse("N = 1\n= 2\n")
    assert "line 2" in str(excinfo.value)
