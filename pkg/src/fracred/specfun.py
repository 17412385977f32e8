"""Gamma and two-parameter Mittag-Leffler functions.

The Mittag-Leffler series is evaluated on the real line, with a complex
variant for the eigenvalue-based closed-form solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from .errors import ConvergenceError, GammaPoleError, SpecialFunctionError

ML_TOL = 1e-12
ML_BUDGET = 50.0
ML_MAX_TERMS = 3_000
# truncation target, well below the tolerance so the result is not tail-limited
_TRUNC_FACTOR = 1e-3

_EPS = 2.0**-52


def _is_pole(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def gamma(x: float) -> float:
    """Gamma function; raises :class:`GammaPoleError` at 0, -1, -2, ..."""
    x = float(x)
    if _is_pole(x):
        raise GammaPoleError(f"gamma has a pole at {x:g}")
    try:
        return math.gamma(x)
    except OverflowError:
        raise SpecialFunctionError(f"gamma({x:g}) overflows double precision") from None


def rgamma(x: float) -> float:
    """Reciprocal gamma, an entire function (zero at the poles of gamma)."""
    x = float(x)
    if _is_pole(x):
        return 0.0
    if x > 171.0:
        return math.exp(-math.lgamma(x))
    return 1.0 / math.gamma(x)


def _gamma_sign(x: float) -> int:
    if x > 0:
        return 1
    return -1 if math.floor(x) % 2 else 1


def gamma_ratio(num: float, den: float) -> float:
    """Gamma(num) / Gamma(den), zero when ``den`` is a pole of gamma."""
    num, den = float(num), float(den)
    if _is_pole(num):
        raise GammaPoleError(f"gamma has a pole at {num:g}")
    if _is_pole(den):
        return 0.0
    if abs(num) < 170 and abs(den) < 170:
        return math.gamma(num) / math.gamma(den)
    sign = _gamma_sign(num) * _gamma_sign(den)
    return sign * math.exp(math.lgamma(num) - math.lgamma(den))


@dataclass(frozen=True)
class MLParams:
    alpha: float
    beta: float
    z: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise SpecialFunctionError(f"Mittag-Leffler needs alpha > 0, got {self.alpha}")


def _log_term(k: int, alpha: float, beta: float, logz: float) -> tuple[float, int] | None:
    """log|z^k / Gamma(alpha k + beta)| and the sign of 1/Gamma, or None if 1/Gamma = 0."""
    x = alpha * k + beta
    if _is_pole(x):
        return None
    return k * logz - math.lgamma(x), _gamma_sign(x)


def _tail_ratio(k: int, alpha: float, beta: float, absz: float) -> float:
    # |t_{k+1}| / |t_k|; nonincreasing in k once alpha k + beta > 0
    x = alpha * k + beta
    return absz * math.exp(math.lgamma(x) - math.lgamma(x + alpha))


def _plan(alpha, beta, z, tol, max_terms):
    """Log-domain pass: number of terms needed, max log-magnitude, and the tail bound."""
    absz = abs(z)
    logz = math.log(absz)
    maxlog = -math.inf
    k = 0
    while True:
        if k >= max_terms:
            raise ConvergenceError(
                f"Mittag-Leffler series for alpha={alpha:g}, |z|={absz:g} needs more than {max_terms} terms"
            )
        lt = _log_term(k, alpha, beta, logz)
        if lt is not None:
            maxlog = max(maxlog, lt[0])
        nxt = alpha * (k + 1) + beta
        if nxt > 0:
            r = _tail_ratio(k + 1, alpha, beta, absz)
            lt1 = _log_term(k + 1, alpha, beta, logz)
            if r < 1 and lt1 is not None and lt1[0] - math.log1p(-r) <= math.log(tol):
                return k + 1, maxlog, math.exp(lt1[0]) / (1 - r)
        k += 1


def _sum_double(alpha, beta, z, nterms):
    logz = math.log(abs(z))
    zsign = -1 if z < 0 else 1
    terms = []
    err = 0.0
    for k in range(nterms):
        lt = _log_term(k, alpha, beta, logz)
        if lt is None:
            continue
        mag = math.exp(lt[0])
        terms.append(lt[1] * (zsign**k) * mag)
        # exp(lgamma) carries relative error proportional to the log-magnitude
        err += mag * (abs(lt[0]) + 4.0) * _EPS
    return math.fsum(terms), err


def _sum_mp(alpha, beta, z, nterms, maxlog):
    dps = int(max(maxlog, 0.0) / math.log(10)) + 30
    with mpmath.workdps(dps):
        a, b, zz = mpmath.mpf(alpha), mpmath.mpf(beta), mpmath.mpf(z)
        s = mpmath.fsum(zz**k * mpmath.rgamma(a * k + b) for k in range(nterms))
        try:
            return float(s)
        except OverflowError:
            raise ConvergenceError(f"E_{{{alpha:g},{beta:g}}}({z:g}) overflows double precision") from None


def mittag_leffler(alpha: float, beta: float, z: float, *, tol: float = ML_TOL,
                   budget: float = ML_BUDGET, max_terms: int = ML_MAX_TERMS) -> float:
    """Two-parameter Mittag-Leffler function ``E_{alpha,beta}(z)`` by its power series.

    Summation stops once a rigorous bound on the remaining tail is below
    ``tol / 1000`` in absolute value; the bound uses the monotone decay of
    successive term ratios when ``alpha*k + beta > 0``. Terms are added with
    ``math.fsum``. When the estimated cancellation error of the double
    precision sum exceeds the tolerance, the same series is re-summed in
    extended precision.

    Raises :class:`ConvergenceError` when ``|z| > budget``, the series needs
    more than ``max_terms`` terms, or the value does not fit in a double.
    """
    alpha, beta, z = float(alpha), float(beta), float(z)
    MLParams(alpha, beta, z)
    if not math.isfinite(z):
        raise ConvergenceError(f"non-finite argument {z!r}")
    if abs(z) > budget:
        raise ConvergenceError(f"|z| = {abs(z):g} exceeds the convergence budget {budget:g}")
    if z == 0.0:
        return rgamma(beta)
    # plan with an absolute target; the sum's magnitude is not known yet
    nterms, maxlog, _ = _plan(alpha, beta, z, tol * _TRUNC_FACTOR, max_terms)
    if maxlog < 700.0:
        s, err = _sum_double(alpha, beta, z, nterms)
        if math.isfinite(s) and err <= tol * max(1.0, abs(s)):
            return s
    return _sum_mp(alpha, beta, z, nterms, maxlog)


def _sum_double_complex(alpha, beta, z, nterms):
    re_terms, im_terms = [], []
    err = 0.0
    zk = complex(1.0)
    for k in range(nterms):
        x = alpha * k + beta
        if k:
            zk *= z
        if _is_pole(x):
            continue
        rg = rgamma(x)
        term = zk * rg
        re_terms.append(term.real)
        im_terms.append(term.imag)
        err += abs(term) * (k + 4.0) * _EPS
    return complex(math.fsum(re_terms), math.fsum(im_terms)), err


def mittag_leffler_complex(alpha: float, beta: float, z: complex, *, tol: float = ML_TOL,
                           budget: float = ML_BUDGET, max_terms: int = ML_MAX_TERMS) -> complex:
    """``E_{alpha,beta}(z)`` for complex ``z``; same truncation rule and limits as :func:`mittag_leffler`."""
    alpha, beta, z = float(alpha), float(beta), complex(z)
    MLParams(alpha, beta, abs(z))
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ConvergenceError(f"non-finite argument {z!r}")
    if abs(z) > budget:
        raise ConvergenceError(f"|z| = {abs(z):g} exceeds the convergence budget {budget:g}")
    if z == 0:
        return complex(rgamma(beta))
    nterms, maxlog, _ = _plan(alpha, beta, abs(z), tol * _TRUNC_FACTOR, max_terms)
    if maxlog < 700.0:
        s, err = _sum_double_complex(alpha, beta, z, nterms)
        if math.isfinite(abs(s)) and err <= tol * max(1.0, abs(s)):
            return s
    dps = int(max(maxlog, 0.0) / math.log(10)) + 30
    with mpmath.workdps(dps):
        a, b, zz = mpmath.mpf(alpha), mpmath.mpf(beta), mpmath.mpc(z)
        total = mpmath.fsum(zz**k * mpmath.rgamma(a * k + b) for k in range(nterms))
        out = complex(total)
    if not math.isfinite(abs(out)):
        raise ConvergenceError(f"E_{{{alpha:g},{beta:g}}}({z}) overflows double precision")
    return out


def ml_solution(alpha: float, lam: float, x0: float, t: float) -> float:
    """``x0 * E_alpha(lam * t**alpha)``, the solution of D^alpha x = lam x, x(0) = x0."""
    if not 0 < alpha <= 2:
        raise SpecialFunctionError(f"alpha must lie in (0, 2], got {alpha}")
    if t < 0:
        raise SpecialFunctionError(f"t must be non-negative, got {t}")
    if t == 0:
        return float(x0)
    return x0 * mittag_leffler(alpha, 1.0, lam * t**alpha)
