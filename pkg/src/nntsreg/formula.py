"""A small formula language for regression terms.

Terms are separated by top-level ``+``. Inside a term only column names,
numbers, ``+ - *`` within parentheses, unary minus and the indicator
``I(<comparison>)`` are allowed, e.g.::

    I(distance<=27)*(distance-27)
    x1 + x2 + I(x3 > 0)

No intercept is added. ``≤`` and ``≥`` are accepted as ``<=`` and ``>=``.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply}
_CMPOPS = {
    ast.LtE: np.less_equal,
    ast.Lt: np.less,
    ast.GtE: np.greater_equal,
    ast.Gt: np.greater,
    ast.Eq: np.equal,
    ast.NotEq: np.not_equal,
}


class FormulaError(ValueError):
    """Malformed formula or reference to an unknown column."""


def _split_terms(node: ast.expr) -> list[ast.expr]:
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Add):
        return _split_terms(node.left) + _split_terms(node.right)
    return [node]


def _check(node: ast.AST, columns: set[str] | None, text: str) -> set[str]:
    """Validate a term and return the column names it uses."""
    if isinstance(node, ast.Name):
        if columns is not None and node.id not in columns:
            raise FormulaError(f"unknown column {node.id!r}; available: {', '.join(sorted(columns))}")
        return {node.id}
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return set()
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        return _check(node.operand, columns, text)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _check(node.left, columns, text) | _check(node.right, columns, text)
    if isinstance(node, ast.Call):
        if not (isinstance(node.func, ast.Name) and node.func.id == "I") or node.keywords or len(node.args) != 1:
            raise FormulaError(f"only I(<comparison>) calls are supported in {text!r}")
        cond = node.args[0]
        if not isinstance(cond, ast.Compare) or not all(type(op) in _CMPOPS for op in cond.ops):
            raise FormulaError(f"I() needs a comparison in {text!r}")
        used = _check(cond.left, columns, text)
        for c in cond.comparators:
            used |= _check(c, columns, text)
        return used
    raise FormulaError(f"unsupported syntax {ast.dump(node)[:40]}... in {text!r}")


def _eval(node: ast.AST, data: Mapping[str, np.ndarray]):
    if isinstance(node, ast.Name):
        return np.asarray(data[node.id], dtype=float)
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, data)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, data), _eval(node.right, data))
    # I(a op b op c ...) as a chained comparison
    cond = node.args[0]
    left = _eval(cond.left, data)
    out = True
    for op, comp in zip(cond.ops, cond.comparators):
        right = _eval(comp, data)
        out = np.logical_and(out, _CMPOPS[type(op)](left, right))
        left = right
    return np.asarray(out, dtype=float)


@dataclass(frozen=True)
class Formula:
    """Parsed formula; ``names`` are the normalized term strings."""

    text: str
    names: tuple[str, ...]
    variables: tuple[str, ...]

    def design(self, data: Mapping[str, Sequence[float]]) -> np.ndarray:
        """Evaluate each term over ``data`` (column name to values)."""
        missing = [v for v in self.variables if v not in data]
        if missing:
            raise FormulaError(f"data lacks column(s) {', '.join(missing)}")
        n = len(np.asarray(data[self.variables[0]])) if self.variables else None
        cols = []
        for name in self.names:
            val = _eval(ast.parse(name, mode="eval").body, data)
            if np.ndim(val) == 0:
                if n is None:
                    raise FormulaError("formula has no column references")
                val = np.full(n, float(val))
            cols.append(np.asarray(val, dtype=float))
        return np.column_stack(cols)


def parse_formula(text: str, columns: Sequence[str] | None = None) -> Formula:
    """Parse ``text``; with ``columns`` given, unknown names are rejected here.

    Examples
    --------
    >>> f = parse_formula("I(d<=27)*(d-27)", ["d"])
    >>> f.design({"d": np.array([20.0, 30.0])}).ravel()
    array([-7.,  0.])
    """
    src = text.replace("≤", "<=").replace("≥", ">=").strip()
    if not src:
        raise FormulaError("empty formula")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise FormulaError(f"cannot parse formula {text!r}: {exc.msg}") from None
    cols = set(columns) if columns is not None else None
    names, used = [], []
    for term in _split_terms(tree.body):
        for v in sorted(_check(term, cols, text)):
            if v not in used:
                used.append(v)
        name = ast.unparse(term)
        if name in names:
            raise FormulaError(f"duplicate term {name!r}")
        names.append(name)
    return Formula(text=text, names=tuple(names), variables=tuple(used))
