"""Fractional integral and Caputo derivative on uniform grids."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import kernels
from .errors import FracredError


@dataclass(frozen=True)
class GridFunction:
    """Samples ``values[i] = f(a + i*h)`` on a uniform grid.

    ``extrapolated_first`` flags that ``values[0]`` was not computed by the
    scheme but extrapolated from the next two nodes.
    """

    a: float
    h: float
    values: np.ndarray
    extrapolated_first: bool = field(default=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] < 2:
            raise FracredError("a grid function needs at least 2 samples")
        if not self.h > 0:
            raise FracredError(f"grid step must be positive, got {self.h}")
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, f: Callable, a: float, b: float, n: int) -> "GridFunction":
        """Sample ``f`` at ``n + 1`` equispaced nodes on ``[a, b]``."""
        h = (b - a) / n
        t = a + h * np.arange(n + 1)
        return cls(a, h, np.broadcast_to(np.asarray(f(t), dtype=np.float64), t.shape).copy())

    @property
    def t(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.values.shape[0])

    def __len__(self) -> int:
        return self.values.shape[0]

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "value"])
        for t, v in zip(self.t, self.values):
            w.writerow([f"{t:.17g}", f"{v:.17g}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path: str | Path) -> "GridFunction":
        return cls.parse_csv(Path(path).read_text())

    @classmethod
    def parse_csv(cls, text: str) -> "GridFunction":
        """Parse ``t,value`` CSV text; nodes must be uniformly spaced."""
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["t", "value"]:
            raise FracredError("grid CSV must start with the header 't,value'")
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=np.float64)
        if data.shape[0] < 2:
            raise FracredError("grid CSV needs at least 2 rows")
        t, v = data[:, 0], data[:, 1]
        h = (t[-1] - t[0]) / (len(t) - 1)
        if not np.allclose(np.diff(t), h, rtol=1e-9, atol=0):
            raise FracredError("grid CSV nodes are not uniformly spaced")
        return cls(float(t[0]), float(h), v)


def rl_integral_grid(f: GridFunction, alpha: float) -> GridFunction:
    """Product-trapezoidal Riemann-Liouville integral of order ``alpha > 0``.

    Second order for smooth integrands; exact when ``f`` is piecewise linear
    on the grid and ``alpha = 1``.
    """
    alpha = float(alpha)
    if not alpha > 0:
        raise FracredError(f"integral order must be positive, got {alpha}")
    return GridFunction(f.a, f.h, kernels.product_trapezoid(f.values, alpha, f.h))


def caputo_derivative_grid(f: GridFunction, alpha: float) -> GridFunction:
    """L1-scheme Caputo derivative of order ``0 < alpha < 1``.

    The value at the first node is linearly extrapolated from nodes 1 and 2
    and flagged via ``extrapolated_first``; it needs at least 3 nodes.
    """
    alpha = float(alpha)
    if not 0 < alpha < 1:
        raise FracredError(f"grid Caputo derivative needs 0 < alpha < 1, got {alpha}")
    if len(f) < 3:
        raise FracredError("grid Caputo derivative needs at least 3 nodes")
    d = kernels.l1_caputo(f.values, alpha, f.h)
    d[0] = 2.0 * d[1] - d[2]
    return GridFunction(f.a, f.h, d, extrapolated_first=True)

