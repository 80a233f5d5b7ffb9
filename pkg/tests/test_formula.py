import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from nntsreg.formula import FormulaError, parse_formula

DATA = {"d": np.array([10.0, 27.0, 30.0]), "t": np.array([1.0, 2.0, 3.0])}


@pytest.mark.parametrize(
    "text, expected",
    [
        ("d", [[10.0], [27.0], [30.0]]),
        ("I(d<=27)*(d-27)", [[-17.0], [0.0], [0.0]]),
        ("I(d≤27)*(d-27)", [[-17.0], [0.0], [0.0]]),
        ("I(d > 27)", [[0.0], [0.0], [1.0]]),
        ("d + t*t", [[10.0, 1.0], [27.0, 4.0], [30.0, 9.0]]),
        ("-t + (d - 10) * 2", [[-1.0, 0.0], [-2.0, 34.0], [-3.0, 40.0]]),
        ("I(1 < t <= 2)", [[0.0], [1.0], [0.0]]),
        ("I(t >= 2) * 3", [[0.0], [3.0], [3.0]]),
    ],
)
def test_design(text, expected):
    assert_allclose(parse_formula(text).design(DATA), expected)


def test_names_and_variables():
    f = parse_formula("t + I(d<=27)*(d-27)")
    assert f.names == ("t", "I(d <= 27) * (d - 27)")
    assert f.variables == ("t", "d")


def test_no_intercept_column():
    x = parse_formula("d + t").design(DATA)
    assert x.shape == (3, 2)
    assert not np.any(np.all(x == 1.0, axis=0))


@pytest.mark.parametrize(
    "text, match",
    [
        ("", "empty"),
        ("d +", "cannot parse"),
        ("log(d)", "only I"),
        ("I(d)", "comparison"),
        ("d / t", "unsupported"),
        ("d ** 2", "unsupported"),
        ("d + d", "duplicate"),
        ("'d'", "unsupported"),
        ("True", "unsupported"),
        ("__import__('os')", "only I"),
    ],
)
def test_rejects(text, match):
    with pytest.raises(FormulaError, match=match):
        parse_formula(text)


def test_unknown_column_at_parse():
    with pytest.raises(FormulaError, match="unknown column 'x'"):
        parse_formula("x + d", ["d", "t"])


def test_missing_column_at_design():
    with pytest.raises(FormulaError, match="lacks column"):
        parse_formula("x").design(DATA)


def test_constant_term_broadcasts():
    assert_array_equal(parse_formula("d + 2").design(DATA)[:, 1], [2.0, 2.0, 2.0])


def test_constant_only():
    with pytest.raises(FormulaError, match="no column"):
        parse_formula("2").design(DATA)
