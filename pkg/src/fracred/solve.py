"""Numerical and closed-form solution of Caputo systems with orders in (0, 1]."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import FracredError, SolverError
from .reduce import (MultiOrderSystem, MultiTermProblem, ReductionReport, SingleTermSystem, _fmt,
                     normalize_orders, reduce_to_multi_order, reduce_to_single_term)
from .specfun import mittag_leffler_complex

SCHEME = "fractional Adams-Bashforth-Moulton (PECE)"
MAX_CONDITION = 1e8
_GRID_TOL = 1e-9
_CLUSTER_TOL = 1e-6


@dataclass(frozen=True)
class Trajectory:
    a: float
    h: float
    orders: tuple
    values: np.ndarray
    labels: tuple[str, ...] = ()
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise SolverError("trajectory values must be a (nodes, components) array")
        object.__setattr__(self, "values", v)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"x{i + 1}" for i in range(v.shape[1])))

    @property
    def t(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.values.shape[0])

    def component(self, i: int) -> np.ndarray:
        return self.values[:, i]

    def to_csv(self, path: str | Path | None = None) -> str:
        """Header ``t,x1,...,xn`` with ``#`` metadata lines above it; 17 significant digits."""
        buf = io.StringIO()
        meta = {"scheme": self.metadata.get("scheme", SCHEME), "h": f"{self.h:.17g}",
                "orders": " ".join(_fmt(q) for q in self.orders), "components": " | ".join(self.labels)}
        meta.update({k: v for k, v in self.metadata.items() if k != "scheme"})
        for k, v in meta.items():
            buf.write(f"# {k}: {v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"x{i + 1}" for i in range(self.values.shape[1])])
        for t, row in zip(self.t, self.values):
            w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @staticmethod
    def read_csv(text: str) -> tuple[dict, np.ndarray, np.ndarray]:
        """Parse exported CSV text into ``(metadata, t, values)``."""
        meta, body = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                k, _, v = line[1:].partition(":")
                meta[k.strip()] = v.strip()
            elif line.strip():
                body.append(line)
        rows = list(csv.reader(body))
        if not rows or rows[0][0] != "t":
            raise FracredError("trajectory CSV must have a 't,x1,...' header")
        data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=np.float64).reshape(-1, len(rows[0]))
        return meta, data[:, 0], data[:, 1:]


def _step_count(a: float, t_end: float, h: float) -> int:
    if not h > 0:
        raise SolverError(f"step size must be positive, got {h}")
    span = t_end - a
    if not span > 0:
        raise SolverError(f"t_end = {t_end} must exceed the start point {a}")
    n = round(span / h)
    if n < 1 or abs(n * h - span) > _GRID_TOL * span:
        raise SolverError(f"step {h} does not divide the interval [{a}, {t_end}]")
    return n


def solve_multi_order(s: MultiOrderSystem, h: float, t_end: float | None = None, *,
                      corrector_iterations: int = 1, provenance: str | None = None) -> Trajectory:
    """Integrate ``C D^{b_i} x_i = g_i(t, x)`` on a uniform grid.

    Each component is convolved with its own order's kernel. The result is
    deterministic; a non-finite state raises :class:`SolverError` naming
    the first offending node.
    """
    t_end = s.b if t_end is None else float(t_end)
    n = _step_count(s.a, t_end, h)
    if corrector_iterations < 1:
        raise SolverError("at least one corrector iteration is required")
    forcing_grid = None
    if s.is_linear and s.forcing is not None:
        tt = s.a + h * np.arange(n + 1)
        forcing_grid = np.array([np.asarray(s.forcing(t), dtype=np.float64) for t in tt]).reshape(n + 1, s.dimension)

    def rhs(t, x):
        try:
            y = np.asarray(s.rhs(t, x), dtype=np.float64).reshape(s.dimension)
        except FracredError:
            raise
        except Exception as exc:
            raise SolverError(f"right-hand side failed at t = {t:.17g}: {exc}") from exc
        return y

    X, bad = kernels.abm_solve(rhs, [float(q) for q in s.orders], s.initial, s.a, h, n,
                               corrector_iterations, forcing_grid, s.matrix)
    if bad >= 0:
        raise SolverError(f"non-finite state at node {bad} (t = {s.a + bad * h:.17g})")
    X[0] = s.initial
    meta = {"scheme": SCHEME, "corrector_iterations": corrector_iterations, "backend": kernels.BACKEND}
    if provenance:
        meta["reduction"] = provenance
    return Trajectory(s.a, h, s.orders, X, s.labels, meta)


def solve_single_term(s: SingleTermSystem, h: float, t_end: float | None = None, **kw) -> Trajectory:
    """Same scheme; every component shares the order ``s.gamma``."""
    kw.setdefault("provenance", f"single order gamma = {_fmt(s.gamma)}, N = {s.N}")
    return solve_multi_order(s, h, t_end, **kw)


def solve_multi_term(p: MultiTermProblem, h: float, t_end: float | None = None, *,
                     via: str = "single_term", **kw) -> tuple[Trajectory, ReductionReport]:
    """Reduce ``p`` and integrate; column 0 of the trajectory is the unknown ``x``."""
    if via == "single_term":
        s = reduce_to_single_term(p)
        report = ReductionReport("single_term", p.orders, s, s.gamma,
                                 s.gamma.denominator if hasattr(s.gamma, "denominator") else None)
    elif via == "multi_order":
        q = normalize_orders(p)
        s = reduce_to_multi_order(q)
        report = ReductionReport("multi_order", q.orders, s)
    else:
        raise SolverError(f"unknown reduction route {via!r}")
    kw.setdefault("provenance", f"{via} reduction of orders {', '.join(_fmt(o) for o in p.orders)}")
    return solve_multi_order(s, h, t_end, **kw), report


def _eigen_basis(A: np.ndarray, x0: np.ndarray):
    """Eigenpairs whose eigenvectors span ``x0`` with a well-conditioned basis."""
    lam, V = np.linalg.eig(A)
    if np.linalg.cond(V) <= MAX_CONDITION:
        return lam, V, np.linalg.solve(V, x0.astype(complex))
    # defective matrix: keep one eigenvector per eigenvalue cluster and see if x0 lies in their span
    keep = []
    for i, l in enumerate(lam):
        if all(abs(l - lam[j]) > _CLUSTER_TOL for j in keep):
            keep.append(i)
    lam, V = lam[keep], V[:, keep]
    if np.linalg.cond(V) > MAX_CONDITION:
        raise SolverError("matrix is numerically defective; use the numeric solver")
    c, *_ = np.linalg.lstsq(V, x0.astype(complex), rcond=None)
    if np.linalg.norm(V @ c - x0) > 1e-10 * max(1.0, np.linalg.norm(x0)):
        raise SolverError("matrix is defective and the initial vector leaves its eigenspaces; "
                          "use the numeric solver")
    return lam, V, c


def solve_linear_closed_form(gamma: float, A, x0, t: float) -> np.ndarray:
    """``x(t) = V diag(E_gamma(lambda_i t^gamma)) V^{-1} x0`` for ``C D^gamma x = A x``."""
    gamma = float(gamma)
    if not 0 < gamma <= 1:
        raise SolverError(f"closed form needs gamma in (0, 1], got {gamma}")
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    x0 = np.asarray(x0, dtype=np.float64).reshape(-1)
    if A.shape != (x0.shape[0], x0.shape[0]):
        raise SolverError(f"matrix shape {A.shape} does not match initial vector of length {x0.shape[0]}")
    if t < 0:
        raise SolverError(f"t must be non-negative, got {t}")
    if t == 0:
        return x0.copy()
    lam, V, c = _eigen_basis(A, x0)
    tg = t**gamma
    e = np.array([mittag_leffler_complex(gamma, 1.0, l * tg) for l in lam])
    x = V @ (e * c)
    if np.max(np.abs(x.imag), initial=0.0) > 1e-8 * max(1.0, np.max(np.abs(x.real))):
        raise SolverError("closed form produced a complex state; the matrix is not real-diagonalizable to tolerance")
    return x.real


def closed_form_trajectory(gamma: float, A, x0, times) -> np.ndarray:
    return np.array([solve_linear_closed_form(gamma, A, x0, float(t)) for t in times])


def max_error(traj: Trajectory, exact, component: int = 0) -> float:
    """Max-norm error of one component against ``exact(t)`` over all nodes."""
    ref = np.array([exact(float(t)) for t in traj.t])
    return float(np.max(np.abs(traj.component(component) - ref)))


def observed_order(err_coarse: float, err_fine: float) -> float:
    return math.log2(err_coarse / err_fine)
