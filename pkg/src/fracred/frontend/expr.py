"""A small arithmetic language for right-hand sides.

Grammar (``^`` binds tighter than unary minus and is right-associative)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := primary ('^' unary)?
    primary := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Names are ``t``, ``x1, x2, ...`` and ``d1, d2, ...``. There is no implicit
multiplication. Parsing never evaluates; domain errors surface at
evaluation time with the offending node's byte offset.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from ..errors import ExpressionError, EvaluationError, FracredError
from ..powcalc import PowerSum
from ..specfun import gamma, mittag_leffler

FUNCTIONS: dict[str, int] = {"gamma": 1, "mlf": 3, "exp": 1, "sin": 1, "cos": 1, "abs": 1, "pow": 2}
_DEFAULT_NAME = re.compile(r"t|[xd][1-9]\d*")
_TOKEN = re.compile(rb"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)


@dataclass(frozen=True)
class Num:
    value: float
    text: str = field(default="", compare=False)
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Node", ...]
    pos: int = field(default=0, compare=False)


Node = Num | Var | Neg | BinOp | Call


def _tokenize(data: bytes) -> list[tuple[str, str, int]]:
    out, i = [], 0
    while i < len(data):
        m = _TOKEN.match(data, i)
        if not m:
            raise ExpressionError(f"unexpected character {data[i:i + 1]!r}", i)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group().decode("ascii"), i))
        i = m.end()
    out.append(("end", "", len(data)))
    return out


class _Parser:
    def __init__(self, src: str, names: Callable[[str], bool]):
        self.toks = _tokenize(src.encode("utf-8"))
        self.i = 0
        self.names = names

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, val, pos = self.take()
        if val != text or kind != "op":
            raise ExpressionError(f"expected {text!r}, found {val or 'end of input'!r}", pos)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected {val!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, pos = self.take()
            node = BinOp(op, node, self.term(), pos)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, pos = self.take()
            node = BinOp(op, node, self.unary(), pos)
        return node

    def unary(self) -> Node:
        kind, val, pos = self.peek()
        if kind == "op" and val in ("-", "+"):
            self.take()
            operand = self.unary()
            return Neg(operand, pos) if val == "-" else operand
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.take()
            return BinOp("^", base, self.unary(), pos)
        return base

    def primary(self) -> Node:
        kind, val, pos = self.take()
        if kind == "num":
            v = float(val)
            if not math.isfinite(v):
                raise ExpressionError(f"numeric literal {val} overflows", pos)
            return Num(v, val, pos)
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if val not in FUNCTIONS:
                    raise ExpressionError(f"unknown function {val!r}", pos)
                self.take()
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != FUNCTIONS[val]:
                    raise ExpressionError(f"{val} takes {FUNCTIONS[val]} argument(s), got {len(args)}", pos)
                return Call(val, tuple(args), pos)
            if val in FUNCTIONS:
                raise ExpressionError(f"function {val!r} used without arguments", pos)
            if not self.names(val):
                raise ExpressionError(f"unknown identifier {val!r}", pos)
            return Var(val, pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionError(f"unexpected {val or 'end of input'!r}", pos)


def parse_expression(src: str, variables=None) -> Node:
    """Parse ``src``; ``variables`` restricts the allowed names (default: t, x<k>, d<k>)."""
    if variables is None:
        allowed = lambda name: _DEFAULT_NAME.fullmatch(name) is not None  # noqa: E731
    else:
        names = frozenset(variables)
        allowed = names.__contains__
    return _Parser(src, allowed).parse()


def render(node: Node) -> str:
    """Fully parenthesised source that parses back to an equal tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{render(node.operand)})"
    if isinstance(node, BinOp):
        return f"({render(node.left)} {node.op} {render(node.right)})"
    return f"{node.name}(" + ", ".join(render(a) for a in node.args) + ")"


def free_variables(node: Node) -> frozenset[str]:
    if isinstance(node, Var):
        return frozenset([node.name])
    if isinstance(node, Neg):
        return free_variables(node.operand)
    if isinstance(node, BinOp):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Call):
        return frozenset().union(*(free_variables(a) for a in node.args))
    return frozenset()


def _pow(x: float, y: float) -> float:
    return math.pow(x, y)


_UNARY = {"exp": math.exp, "sin": math.sin, "cos": math.cos, "abs": abs, "gamma": gamma}
_BINARY = {"+": lambda x, y: x + y, "-": lambda x, y: x - y, "*": lambda x, y: x * y,
           "/": lambda x, y: x / y, "^": _pow}


def _guard(fn, pos: int, what: str):
    def run(*args):
        try:
            v = fn(*args)
        except (ArithmeticError, ValueError, FracredError) as exc:
            if isinstance(exc, EvaluationError):
                raise
            raise EvaluationError(f"{what}: {exc}", pos) from None
        if isinstance(v, complex) or not math.isfinite(v):
            raise EvaluationError(f"{what} is not a finite real", pos)
        return float(v)
    return run


def compile_expression(node: Node) -> Callable[[Mapping[str, float]], float]:
    """Closure evaluating ``node`` against a name -> value mapping."""
    if isinstance(node, Num):
        v = node.value
        return lambda env: v
    if isinstance(node, Var):
        name, pos = node.name, node.pos

        def var(env):
            try:
                return float(env[name])
            except KeyError:
                raise EvaluationError(f"unbound variable {name!r}", pos) from None
        return var
    if isinstance(node, Neg):
        inner = compile_expression(node.operand)
        return lambda env: -inner(env)
    if isinstance(node, BinOp):
        lhs, rhs = compile_expression(node.left), compile_expression(node.right)
        op = _guard(_BINARY[node.op], node.pos, f"'{node.op}'")
        return lambda env: op(lhs(env), rhs(env))
    args = [compile_expression(a) for a in node.args]
    if node.name == "mlf":
        fn = mittag_leffler
    elif node.name == "pow":
        fn = _pow
    else:
        fn = _UNARY[node.name]
    call = _guard(fn, node.pos, f"{node.name}()")
    return lambda env: call(*(a(env) for a in args))


def eval_expression(node: Node, env: Mapping[str, float]) -> float:
    return compile_expression(node)(env)


def affine_form(node: Node, state: frozenset[str] | set[str]) -> tuple[dict[str, float], Node | None] | None:
    """Split ``node`` as ``sum c_v * v + rest(t)`` over the ``state`` names.

    Returns ``(coefficients, rest)`` with ``rest`` free of state names (or
    None when it is zero), or None if ``node`` is not affine in the state
    with constant coefficients.
    """
    def has_state(n):
        return bool(free_variables(n) & set(state))

    def const(n):
        return not free_variables(n)

    def add(x, y, sign):
        cx, rx = x
        cy, ry = y
        c = dict(cx)
        for k, v in cy.items():
            c[k] = c.get(k, 0.0) + sign * v
        if ry is None:
            r = rx
        elif rx is None:
            r = ry if sign > 0 else Neg(ry)
        else:
            r = BinOp("+" if sign > 0 else "-", rx, ry)
        return c, r

    def scale(x, s):
        c, r = x
        return {k: s * v for k, v in c.items()}, (None if r is None else BinOp("*", Num(s), r))

    def go(n):
        if not has_state(n):
            return {}, n
        if isinstance(n, Var):
            return {n.name: 1.0}, None
        if isinstance(n, Neg):
            inner = go(n.operand)
            return None if inner is None else scale(inner, -1.0)
        if isinstance(n, BinOp):
            if n.op in "+-":
                lx, rx = go(n.left), go(n.right)
                if lx is None or rx is None:
                    return None
                return add(lx, rx, 1 if n.op == "+" else -1)
            if n.op == "*":
                for k, other in ((n.left, n.right), (n.right, n.left)):
                    if const(k):
                        inner = go(other)
                        return None if inner is None else scale(inner, eval_expression(k, {}))
                return None
            if n.op == "/" and const(n.right):
                inner = go(n.left)
                return None if inner is None else scale(inner, 1.0 / eval_expression(n.right, {}))
        return None

    return go(node)


def _exponent(node: Node) -> Fraction | float:
    if isinstance(node, Num):
        return Fraction(node.text) if node.text else node.value
    if isinstance(node, Neg):
        return -_exponent(node.operand)
    if isinstance(node, BinOp) and node.op == "/" and isinstance(node.left, Num) and isinstance(node.right, Num):
        return _exponent(node.left) / _exponent(node.right)
    raise ExpressionError("exponent must be a numeric literal or a ratio of literals", node.pos)


def parse_power_sum(src: str, a: float = 0.0) -> PowerSum:
    """Read ``c1*(t-a)^p1 + c2*t^p2 + ...`` into a :class:`PowerSum` based at ``a``.

    Exponents keep their exact decimal or ratio value, so ``t^0.5`` has
    exponent ``1/2``.
    """
    node = parse_expression(src, {"t"})

    def is_base(n):
        if isinstance(n, Var):
            return a == 0
        return (isinstance(n, BinOp) and n.op == "-" and isinstance(n.left, Var)
                and isinstance(n.right, Num) and n.right.value == a)

    def go(n) -> dict:
        if isinstance(n, Num):
            return {Fraction(0): n.value}
        if is_base(n):
            return {Fraction(1): 1.0}
        if isinstance(n, BinOp) and n.op == "^" and is_base(n.left):
            return {_exponent(n.right): 1.0}
        if isinstance(n, Neg):
            return {p: -c for p, c in go(n.operand).items()}
        if isinstance(n, BinOp) and n.op in "+-":
            out = dict(go(n.left))
            for p, c in go(n.right).items():
                out[p] = out.get(p, 0.0) + (c if n.op == "+" else -c)
            return out
        if isinstance(n, BinOp) and n.op == "*":
            if not free_variables(n.left):
                s, body = eval_expression(n.left, {}), n.right
            elif not free_variables(n.right):
                s, body = eval_expression(n.right, {}), n.left
            else:
                raise ExpressionError("products of powers are not supported; expand first", n.pos)
            return {p: s * c for p, c in go(body).items()}
        if isinstance(n, BinOp) and n.op == "/" and not free_variables(n.right):
            s = eval_expression(n.right, {})
            return {p: c / s for p, c in go(n.left).items()}
        raise ExpressionError(f"not a power-sum term (base must be {'t' if a == 0 else f't-{a:g}'})", n.pos)

    try:
        return PowerSum.build(go(node), a)
    except EvaluationError:
        raise
    except FracredError as exc:
        raise ExpressionError(str(exc)) from exc
