"""Reduction of multi-term Caputo equations to first-order-type systems.

A multi-term problem

    C D^{alpha_k} x = f(t, x, C D^{alpha_1} x, ..., C D^{alpha_{k-1}} x),
    (D^j x)(a) = x_a^{(j)},  j = 0 .. ceil(alpha_k) - 1,

is rewritten either as a chain of ``N`` equations of one common order
``gamma = 1/M`` (``M`` the lcm of the order denominators), or as a
``k``-dimensional system whose component orders are the consecutive gaps
``alpha_j - alpha_{j-1}``. A commensurate multi-order system can in turn be
expanded into a single-order system.

Right-hand sides are callables ``f(t, args)`` with ``args`` the vector
``(x, d_1, ..., d_{k-1})``. Linear problems additionally carry their
coefficients so the reduced systems keep an explicit matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Sequence

import numpy as np

from .errors import ReductionError
from .orders import MAX_DENOMINATOR, is_commensurate, lcm_denominators, render_order

MAX_DIMENSION = 10_000
_MULTIPLE_TOL = 1e-12

Order = Fraction | float

SINGLE_TERM_RULE = "x_j(a) = x_a^(j/M) if j/M is an integer, else 0"
MULTI_ORDER_RULE = ("x_1(a) = x_a^(0); x_j(a) = x_a^(alpha_{j-1}) if alpha_{j-1} is an integer, else 0 "
                    "(non-integer Caputo derivatives of a solution vanish at a)")
EXPANSION_RULE = "head slots keep x_i(a); chained sub-variables of non-integer cumulative order start at 0"


def _as_order(q) -> Order:
    if isinstance(q, bool):
        raise ReductionError(f"not an order: {q!r}")
    if isinstance(q, Rational):
        return Fraction(q)
    return float(q)


def _fmt(q: Order) -> str:
    return render_order(q) if isinstance(q, Fraction) else repr(q)


def _is_int(q: Order) -> bool:
    return isinstance(q, Fraction) and q.denominator == 1 or isinstance(q, float) and q.is_integer()


def _linear_rhs(coefficients: np.ndarray, forcing):
    def rhs(t, args):
        y = float(np.dot(coefficients, args))
        return y + forcing(t) if forcing is not None else y
    return rhs


@dataclass(frozen=True)
class MultiTermProblem:
    """``C D^{orders[-1]} x = rhs(t, (x, d_1, ..., d_{k-1}))`` with ``d_j = C D^{orders[j-1]} x``.

    Gaps between consecutive orders may exceed 1 here; :func:`normalize_orders`
    closes them and :func:`reduce_to_multi_order` insists on it.
    """

    orders: tuple[Order, ...]
    rhs: Callable[[float, np.ndarray], float]
    initial: tuple[float, ...]
    a: float = 0.0
    b: float = 1.0
    coefficients: tuple[float, ...] | None = None
    forcing: Callable[[float], float] | None = None

    def __post_init__(self):
        orders = tuple(_as_order(q) for q in self.orders)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "initial", tuple(float(v) for v in self.initial))
        if not orders:
            raise ReductionError("a multi-term problem needs at least one order")
        if not 0 < orders[0] <= 1:
            raise ReductionError(f"the lowest order must lie in (0, 1], got {_fmt(orders[0])}")
        for lo, hi in zip(orders, orders[1:]):
            if not hi > lo:
                raise ReductionError("orders must be strictly increasing")
        need = math.ceil(orders[-1])
        if len(self.initial) != need:
            raise ReductionError(f"expected {need} initial values for order {_fmt(orders[-1])}, got {len(self.initial)}")
        if self.coefficients is not None and len(self.coefficients) != len(orders):
            raise ReductionError(f"linear form needs {len(orders)} coefficients (x, d_1..d_{len(orders) - 1})")
        if not self.b > self.a:
            raise ReductionError("interval must satisfy a < b")

    @classmethod
    def linear(cls, orders, coefficients, initial, forcing=None, a=0.0, b=1.0) -> "MultiTermProblem":
        """Problem with ``rhs = coefficients . (x, d_1, ..., d_{k-1}) + forcing(t)``."""
        c = tuple(float(v) for v in coefficients)
        return cls(tuple(orders), _linear_rhs(np.array(c), forcing), tuple(initial), a, b, c, forcing)

    @property
    def is_linear(self) -> bool:
        return self.coefficients is not None


@dataclass(frozen=True)
class MultiOrderSystem:
    """``C D^{orders[i]} x_i = rhs(t, x)[i]`` with every order in (0, 1]."""

    orders: tuple[Order, ...]
    rhs: Callable[[float, np.ndarray], np.ndarray]
    initial: np.ndarray
    a: float = 0.0
    b: float = 1.0
    matrix: np.ndarray | None = None
    forcing: Callable[[float], np.ndarray] | None = None
    initial_rule: str = ""
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        orders = tuple(_as_order(q) for q in self.orders)
        object.__setattr__(self, "orders", orders)
        x0 = np.array(self.initial, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "initial", x0)
        if len(orders) != x0.shape[0]:
            raise ReductionError(f"{len(orders)} orders but {x0.shape[0]} initial values")
        for q in orders:
            if not 0 < q <= 1:
                raise ReductionError(f"multi-order components need orders in (0, 1], got {_fmt(q)}")
        if not self.a < self.b:
            raise ReductionError("interval must satisfy a < b")
        if self.matrix is not None:
            A = np.array(self.matrix, dtype=np.float64)
            if A.shape != (len(orders), len(orders)):
                raise ReductionError(f"matrix shape {A.shape} does not match dimension {len(orders)}")
            object.__setattr__(self, "matrix", A)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"x{i + 1}" for i in range(len(orders))))

    @classmethod
    def linear(cls, orders, matrix, initial, forcing=None, a=0.0, b=1.0, **kw) -> "MultiOrderSystem":
        A = np.array(matrix, dtype=np.float64)

        def rhs(t, x):
            y = A @ x
            return y + forcing(t) if forcing is not None else y

        return cls(tuple(orders), rhs, initial, a, b, A, forcing, **kw)

    @property
    def dimension(self) -> int:
        return len(self.orders)

    @property
    def is_linear(self) -> bool:
        return self.matrix is not None


@dataclass(frozen=True)
class SingleTermSystem(MultiOrderSystem):
    """All components share the order ``gamma``; ``index_map[j]`` is the order of
    the Caputo derivative of the original unknown that component ``j`` represents."""

    gamma: Order = Fraction(1)
    index_map: tuple = field(default=())

    @property
    def N(self) -> int:
        return self.dimension


@dataclass(frozen=True)
class ReductionReport:
    kind: str
    orders: tuple[Order, ...]
    system: MultiOrderSystem
    gamma: Order | None = None
    M: int | None = None

    def to_dict(self) -> dict:
        s = self.system
        d = {
            "kind": self.kind,
            "source_orders": [_fmt(q) for q in self.orders],
            "dimension": s.dimension,
            "component_orders": [_fmt(q) for q in s.orders],
            "labels": list(s.labels),
            "initial": [float(v) for v in s.initial],
            "initial_rule": s.initial_rule,
        }
        if self.gamma is not None:
            d["gamma"] = _fmt(self.gamma)
        if self.M is not None:
            d["M"] = self.M
        if isinstance(s, SingleTermSystem):
            d["N"] = s.N
            d["index_map"] = [_fmt(q) for q in s.index_map]
        if s.matrix is not None:
            d["matrix"] = s.matrix.tolist()
        return d

    def render(self) -> str:
        d = self.to_dict()
        lines = [f"reduction: {self.kind}", f"source orders: {', '.join(d['source_orders'])}"]
        if "gamma" in d:
            lines.append(f"gamma = {d['gamma']}" + (f"  (M = {d['M']})" if "M" in d else ""))
        if "N" in d:
            lines.append(f"N = {d['N']}")
        lines.append(f"component orders: {', '.join(d['component_orders'])}")
        lines.append("components: " + ", ".join(f"x_{j} = {lab}" for j, lab in enumerate(d["labels"])))
        lines.append("initial vector: (" + ", ".join(f"{v:.17g}" for v in d["initial"]) + ")")
        lines.append(f"initial rule: {d['initial_rule']}")
        if "matrix" in d:
            lines.append("matrix:")
            lines.extend("  [" + ", ".join(f"{v:.17g}" for v in row) + "]" for row in d["matrix"])
        return "\n".join(lines)


def normalize_orders(p: MultiTermProblem) -> MultiTermProblem:
    """Insert every integer strictly between the lowest and highest order.

    The right-hand side ignores the new derivative arguments, so solutions
    are unchanged while no integer is left inside a gap between orders.
    """
    orders = list(p.orders)
    missing = [Fraction(l) for l in range(math.floor(orders[0]) + 1, math.ceil(orders[-1]))
               if not any(q == l for q in orders)]
    if not missing:
        return p
    new_orders = sorted(orders + missing, key=float)
    # argument slot of each old order in the new (x, d_1, ...) vector
    keep = np.array([0] + [1 + new_orders.index(q) for q in orders[:-1]])
    old_rhs = p.rhs

    def rhs(t, args):
        return old_rhs(t, np.asarray(args)[keep])

    coefficients = None
    if p.coefficients is not None:
        c = np.zeros(len(new_orders))
        c[keep] = p.coefficients
        coefficients = tuple(float(v) for v in c)
    return MultiTermProblem(tuple(new_orders), rhs, p.initial, p.a, p.b, coefficients, p.forcing)


def _multiples(orders: Sequence[Order], base: Order) -> list[int]:
    out = []
    for q in orders:
        r = q / base
        m = round(r)
        if m < 1 or abs(r - m) > _MULTIPLE_TOL * max(1.0, abs(float(r))):
            raise ReductionError(f"order {_fmt(q)} is not an integer multiple of the base order {_fmt(base)}")
        out.append(int(m))
    return out


def _base_order(orders: Sequence[Order], base, *, rational_required: bool) -> tuple[Order, int | None]:
    if all(isinstance(q, Fraction) for q in orders) and base is None:
        if rational_required:
            M = lcm_denominators(orders)
            if M > MAX_DENOMINATOR:
                raise ReductionError(f"lcm of denominators {M} exceeds the cap {MAX_DENOMINATOR}")
            return Fraction(1, M), M
        g = is_commensurate(orders)
        return g, None
    if base is None:
        raise ReductionError("orders are not exact rationals; pass the common base order explicitly")
    base = _as_order(base)
    if not base > 0:
        raise ReductionError("base order must be positive")
    return base, (base.denominator if isinstance(base, Fraction) and base.numerator == 1 else None)


def reduce_to_single_term(p: MultiTermProblem, *, base=None, max_dimension: int = MAX_DIMENSION) -> SingleTermSystem:
    """Chain of ``N = M alpha_k`` equations of order ``gamma = 1/M``.

    For rational orders ``M`` is the lcm of the denominators. Orders that are
    only commensurate (opaque reals) are accepted when ``alpha_k <= 1`` and
    the common ``base`` order is supplied.
    """
    orders = p.orders
    exact = all(isinstance(q, Fraction) for q in orders)
    if not exact and orders[-1] > 1:
        raise ReductionError("non-rational orders are only reducible when the highest order is <= 1")
    if exact and base is not None:
        base = _as_order(base)
        if not (isinstance(base, Fraction) and base.numerator == 1):
            raise ReductionError("for rational orders the base must be 1/M")
        gamma, M = base, base.denominator
    else:
        gamma, M = _base_order(orders, base, rational_required=True)
    idx = _multiples(orders, gamma)
    N = idx[-1]
    if N > max_dimension:
        raise ReductionError(f"reduced dimension N = {N} exceeds the cap {max_dimension}")
    slots = np.array([0] + idx[:-1])
    f = p.rhs

    def rhs(t, X):
        X = np.asarray(X)
        dX = np.empty(N)
        dX[:-1] = X[1:]
        dX[-1] = f(t, X[slots])
        return dX

    initial = np.zeros(N)
    for j in range(N):
        q = j * gamma
        if _is_int(q):
            initial[j] = p.initial[int(q)]

    matrix = forcing = None
    if p.is_linear:
        matrix = np.zeros((N, N))
        matrix[np.arange(N - 1), np.arange(1, N)] = 1.0
        matrix[N - 1, slots] += p.coefficients
        if p.forcing is not None:
            pf = p.forcing

            def forcing(t):
                v = np.zeros(N)
                v[-1] = pf(t)
                return v

    return SingleTermSystem(
        (gamma,) * N, rhs, initial, p.a, p.b, matrix, forcing, SINGLE_TERM_RULE,
        tuple("x" if j == 0 else f"C D^{_fmt(j * gamma)} x" for j in range(N)), gamma,
        tuple(j * gamma for j in range(N)),
    )


def reduce_to_multi_order(p: MultiTermProblem) -> MultiOrderSystem:
    """``k``-dimensional system with orders ``alpha_1, alpha_2 - alpha_1, ...``.

    Requires a normalised problem (see :func:`normalize_orders`).
    """
    orders = p.orders
    for lo, hi in zip(orders, orders[1:]):
        if hi - lo > 1:
            raise ReductionError(f"gap between orders {_fmt(lo)} and {_fmt(hi)} exceeds 1; normalize first")
        if any(lo < l < hi for l in range(math.floor(lo) + 1, math.ceil(hi))):
            raise ReductionError(f"an integer lies strictly between orders {_fmt(lo)} and {_fmt(hi)}; normalize first")
    k = len(orders)
    betas = [orders[0]] + [hi - lo for lo, hi in zip(orders, orders[1:])]
    initial = np.zeros(k)
    initial[0] = p.initial[0]
    for j in range(1, k):
        if _is_int(orders[j - 1]):
            initial[j] = p.initial[int(orders[j - 1])]
    f = p.rhs

    def rhs(t, x):
        x = np.asarray(x)
        dx = np.empty(k)
        dx[:-1] = x[1:]
        dx[-1] = f(t, x)
        return dx

    matrix = forcing = None
    if p.is_linear:
        matrix = np.zeros((k, k))
        matrix[np.arange(k - 1), np.arange(1, k)] = 1.0
        matrix[k - 1, :] += p.coefficients
        if p.forcing is not None:
            pf = p.forcing

            def forcing(t):
                v = np.zeros(k)
                v[-1] = pf(t)
                return v

    labels = ("x",) + tuple(f"C D^{_fmt(q)} x" for q in orders[:-1])
    return MultiOrderSystem(tuple(betas), rhs, initial, p.a, p.b, matrix, forcing, MULTI_ORDER_RULE, labels)


def reduce_multiorder_to_single(s: MultiOrderSystem, *, base=None,
                                max_dimension: int = MAX_DIMENSION) -> SingleTermSystem:
    """Expand each component of order ``m_i * gamma`` into ``m_i`` chained slots of order ``gamma``."""
    gamma, _ = _base_order(s.orders, base, rational_required=False)
    if gamma is None:
        raise ReductionError("orders are not commensurate")
    mult = _multiples(s.orders, gamma)
    n = sum(mult)
    if n > max_dimension:
        raise ReductionError(f"expanded dimension {n} exceeds the cap {max_dimension}")
    heads = np.cumsum([0] + mult[:-1])
    lasts = heads + np.array(mult) - 1
    chain = np.array([j for h, m in zip(heads, mult) for j in range(h, h + m - 1)], dtype=int)
    g = s.rhs

    def rhs(t, Z):
        Z = np.asarray(Z)
        dZ = np.empty(n)
        dZ[chain] = Z[chain + 1]
        dZ[lasts] = g(t, Z[heads])
        return dZ

    initial = np.zeros(n)
    initial[heads] = s.initial
    matrix = forcing = None
    if s.is_linear:
        matrix = np.zeros((n, n))
        matrix[chain, chain + 1] = 1.0
        matrix[np.ix_(lasts, heads)] = s.matrix
        if s.forcing is not None:
            sf = s.forcing

            def forcing(t):
                v = np.zeros(n)
                v[lasts] = sf(t)
                return v

    labels, index_map = [], []
    for i, (h, m) in enumerate(zip(heads, mult)):
        for r in range(m):
            labels.append(s.labels[i] if r == 0 else f"C D^{_fmt(r * gamma)} {s.labels[i]}")
            index_map.append(r * gamma)
    return SingleTermSystem(
        (gamma,) * n, rhs, initial, s.a, s.b, matrix, forcing, EXPANSION_RULE,
        tuple(labels), gamma, tuple(index_map),
    )
