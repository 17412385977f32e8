"""Sector stability test for linear commensurate fractional systems."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ReductionError, StabilityError
from .reduce import MultiOrderSystem, _fmt, reduce_multiorder_to_single

MAX_DIMENSION = 50
ARG_BAND = 1e-6
CLUSTER_TOL = 1e-6
_NEWTON_STEPS = 50


class Verdict(enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal/Inconclusive"


def _square(A) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise StabilityError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] > MAX_DIMENSION:
        raise StabilityError(f"dimension {A.shape[0]} exceeds the cap {MAX_DIMENSION}")
    if not np.all(np.isfinite(A)):
        raise StabilityError("matrix has non-finite entries")
    return A


def characteristic_polynomial(A) -> np.ndarray:
    """Monic coefficients of ``det(lambda I - A)``, highest power first (Faddeev-LeVerrier)."""
    A = _square(A)
    n = A.shape[0]
    c = np.zeros(n + 1)
    c[0] = 1.0
    M = np.zeros_like(A)
    I = np.eye(n)
    for k in range(1, n + 1):
        M = A @ M + c[k - 1] * I
        c[k] = -np.trace(A @ M) / k + 0.0  # no signed zeros
    return c


def _polish(coeffs: np.ndarray, root: complex, deriv: int) -> complex:
    """Newton on the ``deriv``-th derivative, which has a simple root at a cluster of that multiplicity."""
    p = np.polyder(coeffs, deriv) if deriv else coeffs
    dp = np.polyder(p)
    z = complex(root)
    for _ in range(_NEWTON_STEPS):
        d = np.polyval(dp, z)
        if d == 0:
            break
        step = np.polyval(p, z) / d
        z -= step
        if abs(step) <= 1e-16 * max(1.0, abs(z)):
            break
    # keep the companion root if polishing wandered off
    return z if abs(z - root) < max(CLUSTER_TOL, 1e-3 * abs(root)) else complex(root)


def _spread_ok(cl: list[complex]) -> bool:
    # an m-fold root is only resolved to about eps**(1/m) in double precision
    c = np.mean(cl)
    tol = max(CLUSTER_TOL, 10 * np.finfo(float).eps ** (1 / len(cl))) * max(1.0, abs(c))
    return max(abs(z - c) for z in cl) <= tol


def eigenvalue_clusters(A) -> list[tuple[complex, int]]:
    """Distinct eigenvalues with multiplicities.

    Largest groups first: ``m`` roots form one cluster when their spread fits
    the attainable accuracy of an ``m``-fold root, never tighter than ``CLUSTER_TOL``.
    """
    coeffs = characteristic_polynomial(A)
    raw = np.roots(coeffs) if len(coeffs) > 1 else np.array([])
    if not np.all(np.isfinite(raw)):
        raise StabilityError("root finder did not converge")
    remaining = sorted(raw, key=lambda z: (z.real, z.imag))
    clusters: list[list[complex]] = []
    while remaining:
        group = [remaining[0]]
        for size in range(len(remaining), 1, -1):
            found = next((g for z in remaining
                          if _spread_ok(g := sorted(remaining, key=lambda w: abs(w - z))[:size])), None)
            if found is not None:
                group = found
                break
        for z in group:
            remaining.remove(z)
        clusters.append(group)
    out = []
    for cl in clusters:
        m = len(cl)
        z = _polish(coeffs, complex(np.mean(cl)), m - 1)
        if abs(z.imag) <= 1e-14 * max(1.0, abs(z)):
            z = complex(z.real, 0.0)
        out.append((z, m))
    return out


def eigenvalues(A) -> list[complex]:
    """All eigenvalues, repeated by multiplicity."""
    return [z for z, m in eigenvalue_clusters(A) for _ in range(m)]


@dataclass(frozen=True)
class EigenMargin:
    value: complex
    multiplicity: int
    arg: float
    margin: float


@dataclass(frozen=True)
class StabilityReport:
    gamma: object
    matrix: np.ndarray
    coefficients: np.ndarray
    eigen: tuple[EigenMargin, ...]
    threshold: float
    verdict: Verdict
    band: float = ARG_BAND

    @property
    def eigenvalues(self) -> list[complex]:
        return [e.value for e in self.eigen for _ in range(e.multiplicity)]

    def key_values(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "gamma": _fmt(self.gamma),
            "threshold": self.threshold,
            "band": self.band,
            "coefficients": [float(c) for c in self.coefficients],
            "eigenvalues": [{"re": e.value.real, "im": e.value.imag, "multiplicity": e.multiplicity,
                             "arg": e.arg, "margin": e.margin} for e in self.eigen],
        }

    def render(self) -> str:
        lines = [f"{self.verdict.name} gamma={_fmt(self.gamma)}",
                 f"threshold: gamma*pi/2 = {self.threshold:.17g}",
                 "characteristic polynomial: " + _render_poly(self.coefficients),
                 "matrix:"]
        lines += ["  [" + ", ".join(f"{v:.17g}" for v in row) + "]" for row in self.matrix]
        lines.append("eigenvalues:")
        for e in self.eigen:
            lines.append(f"  {_render_complex(e.value)}  multiplicity={e.multiplicity}  "
                         f"|arg|={e.arg:.17g}  margin={e.margin:.17g}")
        lines.append("")
        lines.append(f"verdict={self.verdict.value}")
        lines.append(f"gamma={_fmt(self.gamma)}")
        lines.append(f"threshold={self.threshold:.17g}")
        for i, e in enumerate(self.eigen):
            lines.append(f"eigenvalue.{i}={_render_complex(e.value)}")
            lines.append(f"multiplicity.{i}={e.multiplicity}")
            lines.append(f"margin.{i}={e.margin:.17g}")
        return "\n".join(lines)


def _render_complex(z: complex) -> str:
    if z.imag == 0:
        return f"{z.real:.17g}"
    return f"{z.real:.17g}{'+' if z.imag >= 0 else '-'}{abs(z.imag):.17g}i"


def _render_poly(c: np.ndarray) -> str:
    n = len(c) - 1
    parts = []
    for k, v in enumerate(c):
        p = n - k
        if v == 0 and k:
            continue
        mono = "" if p == 0 else ("lambda" if p == 1 else f"lambda^{p}")
        coef = f"{abs(v):.17g}"
        body = mono if coef == "1" and mono else (f"{coef}*{mono}" if mono else coef)
        parts.append(("- " if v < 0 else "+ ") + body)
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else "-" + s[2:]


def sector_verdict(clusters, gamma: float, band: float = ARG_BAND) -> tuple[tuple[EigenMargin, ...], Verdict]:
    """Compare ``|arg lambda|`` with ``gamma*pi/2``; a zero eigenvalue or a margin within ``band`` is marginal."""
    threshold = float(gamma) * math.pi / 2
    eig = tuple(EigenMargin(z, m, abs(math.atan2(z.imag, z.real)), abs(math.atan2(z.imag, z.real)) - threshold)
                for z, m in clusters)
    # arg is undefined at zero, so a zero eigenvalue alone never decides instability
    nonzero = [e for e in eig if abs(e.value) > CLUSTER_TOL]
    if any(e.margin < -band for e in nonzero):
        return eig, Verdict.UNSTABLE
    if len(nonzero) < len(eig) or any(abs(e.margin) <= band for e in eig):
        return eig, Verdict.MARGINAL
    return eig, Verdict.STABLE


def assess_matrix(gamma, A) -> StabilityReport:
    """Sector test for ``C D^gamma x = A x``."""
    A = _square(A)
    if not 0 < float(gamma) <= 1:
        raise StabilityError(f"base order must lie in (0, 1], got {gamma}")
    clusters = eigenvalue_clusters(A)
    eig, verdict = sector_verdict(clusters, float(gamma))
    return StabilityReport(gamma, A, characteristic_polynomial(A), eig, float(gamma) * math.pi / 2, verdict)


def assess_stability(s: MultiOrderSystem, *, base=None) -> StabilityReport:
    """Rewrite ``s`` at its common base order and apply the sector test."""
    if not s.is_linear:
        raise StabilityError("stability assessment needs a linear system")
    if s.forcing is not None:
        raise StabilityError("stability assessment needs a homogeneous system (no forcing)")
    try:
        single = reduce_multiorder_to_single(s, base=base, max_dimension=MAX_DIMENSION)
    except ReductionError as exc:
        raise StabilityError(str(exc)) from exc
    return assess_matrix(single.gamma, single.matrix)
