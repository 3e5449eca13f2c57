import pytest

from einfty.errors import ValidationError
from einfty.free_operad import FormalSum, compose, parse_term


def test_parse_round_trip():
    for text in ["[1|2]", "[[1|||3]|[2||4]]", "[1||[2||3]]"]:
        assert str(parse_term(text)) == text


def test_degree_is_additive():
    t = parse_term("[[1||3]|[2|||4]]")
    assert t.degree == 0 + 1 + 2  # root has one gap, so degree 0


def test_formal_sum_f2_cancels():
    s = FormalSum.parse("[1|2] + [1|2]", "F2")
    assert not s


def test_formal_sum_arithmetic():
    a = FormalSum.parse("[1|2] - [2|1]")
    b = FormalSum.parse("[2|1]")
    assert a + b == FormalSum.parse("[1|2]")


def test_compose_arity():
    a = parse_term("[1|2]")
    b = parse_term("[1||2]")
    assert compose(a, 1, b).arity == 3


def test_parse_error():
    with pytest.raises(ValidationError):
        parse_term("[1|[2|")
