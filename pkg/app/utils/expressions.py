"""Compile small arithmetic expressions into :class:`RealOracle` trees.

Grammar: dyadic literals (``3``, ``0.75``, ``3/2^4``, ``5*2^-3``), the
constants ``pi``, ``e``, ``sqrt2`` and ``one_third``, the functions ``exp``,
``cbrt`` and ``sqrt``, binary ``+ - * /``, unary minus and integer powers
written ``x^k`` or ``x**k``. A literal ``1/3`` is a division of two oracles.
"""
from __future__ import annotations

import ast
import re
from typing import Callable

from ..dyadic import parse_dyadic
from ..exceptions import BitCanvasError, ExpressionError
from ..oracles import (
    CONSTANTS,
    DEFAULT_MAX_PROBE,
    RealOracle,
    const_oracle,
    exp_oracle,
    oracle_arith,
    oracle_div,
    oracle_from_dyadic,
    oracle_neg,
    oracle_power,
    root_oracle,
)

MAX_POWER = 64

_SYMBOLS = str.maketrans({"×": "*", "÷": "/", "−": "-"})
# "3/2^4" is one dyadic literal, not 3 / 2^4
_POWER_OF_TWO_LITERAL = re.compile(r"(?<![\w.)])(\d+)\s*/\s*2\s*\^\s*(\d+)")
_SCALED_LITERAL = re.compile(r"(?<![\w.)])(\d+)\s*\*\s*2\s*\^\s*(-?\d+)")

FUNCTIONS: dict[str, Callable[[RealOracle], RealOracle]] = {
    "exp": exp_oracle,
    "cbrt": lambda x: root_oracle(x, 3),
    "sqrt": lambda x: root_oracle(x, 2),
}


def _protect_literals(text: str) -> tuple[str, dict[str, str]]:
    literals: dict[str, str] = {}

    def stash(match: re.Match) -> str:
        name = f"__lit{len(literals)}"
        literals[name] = match.group(0)
        return name

    text = _POWER_OF_TWO_LITERAL.sub(stash, text)
    text = _SCALED_LITERAL.sub(stash, text)
    return text, literals


class _Compiler:
    def __init__(self, source: str, literals: dict[str, str], max_probe: int):
        self.source = source
        self.literals = literals
        self.max_probe = max_probe

    def build(self, node: ast.AST) -> RealOracle:
        if isinstance(node, ast.Expression):
            return self.build(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return oracle_from_dyadic(parse_dyadic(ast.get_source_segment(self.source, node)))
        if isinstance(node, ast.Name):
            return self._name(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            operand = self.build(node.operand)
            return oracle_neg(operand) if isinstance(node.op, ast.USub) else operand
        if isinstance(node, ast.BinOp):
            return self._binary(node)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            if node.func.id not in FUNCTIONS or len(node.args) != 1 or node.keywords:
                raise ExpressionError(f"unknown function or bad arguments: {node.func.id}")
            return FUNCTIONS[node.func.id](self.build(node.args[0]))
        raise ExpressionError(f"unsupported syntax: {ast.dump(node)[:60]}")

    def _name(self, name: str) -> RealOracle:
        if name in self.literals:
            return oracle_from_dyadic(parse_dyadic(self.literals[name]))
        if name in CONSTANTS:
            return const_oracle(name)
        raise ExpressionError(f"unknown name {name!r}")

    def _binary(self, node: ast.BinOp) -> RealOracle:
        if isinstance(node.op, ast.Pow):
            exponent = node.right
            if not (isinstance(exponent, ast.Constant) and type(exponent.value) is int):
                raise ExpressionError("powers take a non-negative integer literal")
            if not 0 <= exponent.value <= MAX_POWER:
                raise ExpressionError(f"power must lie in [0, {MAX_POWER}]")
            return oracle_power(self.build(node.left), exponent.value)
        left, right = self.build(node.left), self.build(node.right)
        if isinstance(node.op, ast.Add):
            return oracle_arith(left, right, "add")
        if isinstance(node.op, ast.Sub):
            return oracle_arith(left, right, "sub")
        if isinstance(node.op, ast.Mult):
            return oracle_arith(left, right, "mul")
        if isinstance(node.op, ast.Div):
            return oracle_div(left, right, self.max_probe)
        raise ExpressionError(f"unsupported operator {type(node.op).__name__}")


def compile_expression(text: str, max_probe: int = DEFAULT_MAX_PROBE) -> RealOracle:
    source, literals = _protect_literals(text.translate(_SYMBOLS).strip())
    source = source.replace("^", "**")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from exc
    try:
        oracle = _Compiler(source, literals, max_probe).build(tree)
    except BitCanvasError:
        raise
    except (ValueError, KeyError) as exc:
        raise ExpressionError(str(exc)) from exc
    oracle.description = text.strip()
    return oracle
