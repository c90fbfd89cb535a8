"""A small arithmetic language for symbols given in config files.

Expressions are ordinary Python syntax restricted to numbers, the variable
``alpha``, named parameters, ``i`` (or ``j``) for the imaginary unit, the
operators ``+ - * / **`` and the functions ``exp``, ``log`` and ``sqrt``.
``log`` and ``sqrt`` use the principal branch, cut along the negative real
axis of their argument.
"""
from __future__ import annotations

import ast
from collections.abc import Callable, Mapping

import numpy as np

from .errors import ExpressionError

FUNCTIONS: dict[str, Callable] = {"exp": np.exp, "log": np.log, "sqrt": np.sqrt}
CONSTANTS = {"i": 1j, "j": 1j, "pi": np.pi}

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


class _Compiler:
    def __init__(self, source: str, params: Mapping[str, complex]):
        self.source = source
        self.params = dict(params)

    def fail(self, msg: str, node: ast.AST | None = None):
        pos = getattr(node, "col_offset", None)
        raise ExpressionError(msg, self.source, pos)

    def compile(self, node) -> Callable[[np.ndarray], np.ndarray]:
        if isinstance(node, ast.Expression):
            return self.compile(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float, complex)):
                self.fail(f"unsupported literal {node.value!r}", node)
            v = complex(node.value)
            return lambda z: v
        if isinstance(node, ast.Name):
            name = node.id
            if name in ("alpha", "z"):
                return lambda z: z
            if name in self.params:
                v = complex(self.params[name])
                return lambda z: v
            if name in CONSTANTS:
                v = CONSTANTS[name]
                return lambda z: v
            self.fail(f"unknown name {name!r}", node)
        if isinstance(node, ast.BinOp):
            op = _BINOPS.get(type(node.op))
            if op is None:
                self.fail(f"operator {type(node.op).__name__} is not allowed", node)
            lhs, rhs = self.compile(node.left), self.compile(node.right)
            return lambda z: op(lhs(z), rhs(z))
        if isinstance(node, ast.UnaryOp):
            inner = self.compile(node.operand)
            if isinstance(node.op, ast.USub):
                return lambda z: -inner(z)
            if isinstance(node.op, ast.UAdd):
                return inner
            self.fail(f"operator {type(node.op).__name__} is not allowed", node)
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
                self.fail("only exp, log and sqrt may be called", node)
            if len(node.args) != 1 or node.keywords:
                self.fail(f"{node.func.id} takes exactly one argument", node)
            fn = FUNCTIONS[node.func.id]
            arg = self.compile(node.args[0])
            return lambda z: fn(np.asarray(arg(z), dtype=complex))
        self.fail(f"unsupported syntax {type(node).__name__}", node)


def parse_expression(source: str, params: Mapping[str, complex] | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """Compile ``source`` into a vectorised function of ``alpha``.

    >>> f = parse_expression("1/(alpha - 2*i)")
    >>> complex(f(np.array([0j]))[0])
    0.5j
    """
    if not isinstance(source, str):
        raise ExpressionError("expression must be a string", str(source), None)
    text = source.strip()
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        # an offset of 0 means the input ended early
        col = exc.offset - 1 if exc.offset else len(text)
        raise ExpressionError(f"syntax error: {exc.msg}", text, col) from None
    fn = _Compiler(text, params or {}).compile(tree)

    def evaluate(z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            return np.broadcast_to(np.asarray(fn(z), dtype=complex), z.shape).copy()

    evaluate.__doc__ = text
    return evaluate
