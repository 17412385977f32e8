"""JSON problem files.

A file describes one of three problem kinds:

``multi_term``
    one scalar equation ``C D^{orders[-1]} x = rhs``; the rhs may use ``t``,
    ``x1`` (the unknown) and ``d1 .. d{k-1}`` (its lower-order Caputo
    derivatives). ``matrix`` is then a single row of coefficients over
    ``(x1, d1, ..., d{k-1})``.
``multi_order``
    a system ``C D^{orders[i]} x_i = rhs_i(t, x1, ..., xn)``.
``single_term``
    as ``multi_order`` with one common order (given once or repeated).

Right-hand sides come either as ``equations`` (expressions) or as
``matrix`` plus optional ``forcing`` expressions in ``t``. Expression
equations that are affine in the state are recognised as linear.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from ..errors import ExpressionError, FracredError, ProblemFileError
from ..orders import parse_order
from ..reduce import MultiOrderSystem, MultiTermProblem, SingleTermSystem
from .expr import Num, affine_form, compile_expression, parse_expression

_SCHEMA = json.loads(resources.files("fracred").joinpath("schema/problem-v1.json").read_text())


@dataclass(frozen=True)
class ProblemFile:
    kind: str
    a: float
    b: float
    orders: tuple[Fraction, ...]
    model: MultiTermProblem | MultiOrderSystem
    h: float | None
    t_end: float | None
    corrector_iterations: int
    source: dict

    @property
    def is_linear(self) -> bool:
        return self.model.is_linear


def _orders(raw) -> tuple[Fraction, ...]:
    try:
        return tuple(parse_order(q) for q in raw)
    except FracredError as exc:
        raise ProblemFileError(f"orders: {exc}") from exc


def _expression(src, names, where):
    if isinstance(src, (int, float)):
        return Num(float(src))
    try:
        return parse_expression(src, names)
    except ExpressionError as exc:
        raise ProblemFileError(f"{where}: {exc}") from exc


def _forcing_fn(nodes):
    if nodes is None or all(isinstance(n, Num) and n.value == 0 for n in nodes):
        return None
    fns = [compile_expression(n) for n in nodes]
    return lambda t: np.array([f({"t": t}) for f in fns])


def _check_equation_orders(eqs, expected, where="equations"):
    for i, (eq, q) in enumerate(zip(eqs, expected)):
        if "order" in eq:
            try:
                got = parse_order(eq["order"])
            except FracredError as exc:
                raise ProblemFileError(f"{where}[{i}].order: {exc}") from exc
            if got != q:
                raise ProblemFileError(f"{where}[{i}].order is {eq['order']!r} but the order list says {q}")


def _build_multi_term(doc, orders, a, b):
    k = len(orders)
    names = ["t", "x1"] + [f"d{j}" for j in range(1, k)]
    state = names[1:]
    initial = doc["initial"]
    if "matrix" in doc:
        rows = doc["matrix"]
        if len(rows) != 1 or len(rows[0]) != k:
            raise ProblemFileError(f"multi_term matrix must be one row of {k} coefficients over {', '.join(state)}")
        forcing = doc.get("forcing")
        if forcing is not None and len(forcing) != 1:
            raise ProblemFileError("multi_term forcing must hold exactly one expression")
        f = _forcing_fn(None if forcing is None else [_expression(forcing[0], {"t"}, "forcing[0]")])
        scalar = None if f is None else (lambda t: float(f(t)[0]))
        return MultiTermProblem.linear(orders, rows[0], initial, scalar, a, b)
    eqs = doc["equations"]
    if len(eqs) != 1:
        raise ProblemFileError("a multi_term problem has exactly one equation")
    _check_equation_orders(eqs, orders[-1:])
    node = _expression(eqs[0]["rhs"], names, "equations[0].rhs")
    aff = affine_form(node, set(state))
    if aff is not None:
        coeffs, rest = aff
        f = _forcing_fn(None if rest is None else [rest])
        scalar = None if f is None else (lambda t: float(f(t)[0]))
        return MultiTermProblem.linear(orders, [coeffs.get(v, 0.0) for v in state], initial, scalar, a, b)
    fn = compile_expression(node)

    def rhs(t, args):
        env = dict(zip(state, args))
        env["t"] = t
        return fn(env)

    return MultiTermProblem(orders, rhs, initial, a, b)


def _build_system(doc, orders, a, b, kind):
    n = len(doc["initial"])
    if kind == "single_term":
        if len(set(orders)) != 1:
            raise ProblemFileError("a single_term problem needs one common order")
        orders = orders * n if len(orders) == 1 else orders
    if len(orders) != n:
        raise ProblemFileError(f"{len(orders)} orders for {n} initial values")
    state = [f"x{i + 1}" for i in range(n)]
    names = ["t"] + state
    if "matrix" in doc:
        A = np.array(doc["matrix"], dtype=np.float64)
        if A.shape != (n, n):
            raise ProblemFileError(f"matrix must be {n}x{n}")
        forcing = doc.get("forcing")
        if forcing is not None and len(forcing) != n:
            raise ProblemFileError(f"forcing must hold {n} expressions")
        f = _forcing_fn(None if forcing is None else
                        [_expression(s, {"t"}, f"forcing[{i}]") for i, s in enumerate(forcing)])
        model = MultiOrderSystem.linear(orders, A, doc["initial"], f, a, b)
    else:
        eqs = doc["equations"]
        if len(eqs) != n:
            raise ProblemFileError(f"{len(eqs)} equations for {n} components")
        _check_equation_orders(eqs, orders)
        nodes = [_expression(e["rhs"], names, f"equations[{i}].rhs") for i, e in enumerate(eqs)]
        forms = [affine_form(nd, set(state)) for nd in nodes]
        if all(fm is not None for fm in forms):
            A = np.array([[fm[0].get(v, 0.0) for v in state] for fm in forms])
            rest = [fm[1] if fm[1] is not None else Num(0.0) for fm in forms]
            model = MultiOrderSystem.linear(orders, A, doc["initial"], _forcing_fn(rest), a, b)
        else:
            fns = [compile_expression(nd) for nd in nodes]

            def rhs(t, x):
                env = dict(zip(state, x))
                env["t"] = t
                return np.array([f(env) for f in fns])

            model = MultiOrderSystem(orders, rhs, doc["initial"], a, b)
    if kind == "single_term":
        model = SingleTermSystem(model.orders, model.rhs, model.initial, a, b, model.matrix, model.forcing,
                                 "given directly", model.labels, orders[0], tuple(range(n)))
    return model


def load_problem(doc: dict) -> ProblemFile:
    """Validate a parsed JSON document and build the problem it describes."""
    try:
        jsonschema.validate(doc, _SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ProblemFileError(f"schema violation at {path}: {exc.message}") from None
    a, b = float(doc["interval"]["a"]), float(doc["interval"]["b"])
    orders = _orders(doc["orders"])
    kind = doc["kind"]
    try:
        if kind == "multi_term":
            model = _build_multi_term(doc, orders, a, b)
        else:
            model = _build_system(doc, orders, a, b, kind)
    except ProblemFileError:
        raise
    except FracredError as exc:
        raise ProblemFileError(str(exc)) from exc
    solver = doc.get("solver", {})
    return ProblemFile(kind, a, b, orders, model, solver.get("h"), solver.get("t_end"),
                       solver.get("corrector_iterations", 1), doc)


def read_problem(path: str | Path) -> ProblemFile:
    try:
        text = Path(path).read_bytes().decode("utf-8")
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError as exc:
        raise ProblemFileError(f"{path} is not UTF-8: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return load_problem(doc)
