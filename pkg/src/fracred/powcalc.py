"""Exact fractional calculus on power sums ``sum c_i (t - a)^p_i``.

Power sums are closed under Riemann-Liouville integration and under the
Riemann-Liouville and Caputo derivatives, so they serve as the ground-truth
class for the numerical operators and for the composition (semigroup) checks.

Exponents are kept as :class:`~fractions.Fraction` whenever they are
rational so that "same exponent" is an exact test; opaque real exponents
fall back to floats compared to 1e-12. Coefficients are floats, because
ratios of gamma values are irrational in general.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import PowerSumError
from .specfun import gamma_ratio

EXPONENT_TOL = 1e-12
COEFF_RTOL = 1e-12

Exponent = Fraction | float


def as_exponent(p) -> Exponent:
    """Normalise an exponent or order: rationals to Fraction, near-integers snapped."""
    if isinstance(p, bool):
        raise PowerSumError(f"not a number: {p!r}")
    if isinstance(p, Rational):
        return Fraction(p)
    p = float(p)
    if not math.isfinite(p):
        raise PowerSumError(f"non-finite exponent {p!r}")
    r = round(p)
    if abs(p - r) <= EXPONENT_TOL:
        return Fraction(r)
    return p


def is_integer(p: Exponent) -> bool:
    p = as_exponent(p)
    return isinstance(p, Fraction) and p.denominator == 1


def same_exponent(p: Exponent, q: Exponent) -> bool:
    if isinstance(p, Fraction) and isinstance(q, Fraction):
        return p == q
    return abs(float(p) - float(q)) <= EXPONENT_TOL * max(1.0, abs(float(p)))


def _fmt_exponent(p: Exponent) -> str:
    if isinstance(p, Fraction):
        if p.denominator == 1:
            return str(p.numerator) if p >= 0 else f"({p.numerator})"
        return f"({p.numerator}/{p.denominator})"
    return f"({p!r})"


@dataclass(frozen=True)
class PowerSum:
    """Finite sum of ``c * (t - a)^p`` terms with ``p > -1``.

    ``terms`` is a sorted tuple of ``(exponent, coefficient)`` pairs with
    distinct exponents and non-zero coefficients. ``formal`` marks results
    of differentiation that left the integrable class (some ``p <= -1``);
    such sums can be printed and compared but not operated on further.
    """

    terms: tuple[tuple[Exponent, float], ...] = ()
    a: float = 0.0
    formal: bool = field(default=False, compare=False)

    @classmethod
    def build(cls, terms: Mapping | Iterable[tuple], a: float = 0.0, *, formal: bool = False) -> "PowerSum":
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: list[list] = []
        for p, c in items:
            p = as_exponent(p)
            c = float(c)
            if not math.isfinite(c):
                raise PowerSumError(f"non-finite coefficient {c!r}")
            for slot in merged:
                if same_exponent(slot[0], p):
                    slot[1] += c
                    break
            else:
                merged.append([p, c])
        kept = tuple(sorted(((p, c) for p, c in merged if c != 0.0), key=lambda pc: float(pc[0])))
        if not formal:
            for p, _ in kept:
                if not float(p) > -1:
                    raise PowerSumError(f"exponent {p} is not > -1; the function is not in L1")
        return cls(kept, float(a), formal)

    @classmethod
    def monomial(cls, p, c: float = 1.0, a: float = 0.0) -> "PowerSum":
        return cls.build([(p, c)], a)

    @classmethod
    def zero(cls, a: float = 0.0) -> "PowerSum":
        return cls((), float(a))

    @property
    def exponents(self) -> tuple[Exponent, ...]:
        return tuple(p for p, _ in self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def min_exponent(self) -> Exponent | None:
        return self.terms[0][0] if self.terms else None

    def coefficient(self, p) -> float:
        p = as_exponent(p)
        for q, c in self.terms:
            if same_exponent(p, q):
                return c
        return 0.0

    def _check_base(self, other: "PowerSum"):
        if self.a != other.a:
            raise PowerSumError(f"power sums centred at {self.a} and {other.a} cannot be combined")

    def __add__(self, other: "PowerSum") -> "PowerSum":
        self._check_base(other)
        return PowerSum.build(self.terms + other.terms, self.a, formal=self.formal or other.formal)

    def __neg__(self) -> "PowerSum":
        return PowerSum(tuple((p, -c) for p, c in self.terms), self.a, self.formal)

    def __sub__(self, other: "PowerSum") -> "PowerSum":
        return self + (-other)

    def scale(self, s: float) -> "PowerSum":
        return PowerSum.build([(p, s * c) for p, c in self.terms], self.a, formal=self.formal)

    def __call__(self, t):
        """Evaluate at ``t >= a`` (scalar or array)."""
        x = np.asarray(t, dtype=float) - self.a
        out = np.zeros_like(x)
        with np.errstate(divide="ignore"):
            for p, c in self.terms:
                out = out + c * np.power(x, float(p))
        return out if out.ndim else float(out)

    def isclose(self, other: "PowerSum", rtol: float = COEFF_RTOL, atol: float = 0.0) -> bool:
        """Termwise comparison: exponents must match, coefficients to ``rtol``."""
        if self.a != other.a or len(self.terms) != len(other.terms):
            return False
        for (p, c), (q, d) in zip(self.terms, other.terms):
            if not same_exponent(p, q):
                return False
            if abs(c - d) > atol + rtol * max(abs(c), abs(d)):
                return False
        return True

    def render(self) -> str:
        if not self.terms:
            return "0"
        base = "t" if self.a == 0 else f"(t-{self.a!r})"
        parts = []
        for p, c in self.terms:
            coeff = f"{c:.17g}"
            if p == 0:
                parts.append(coeff)
            else:
                parts.append(f"{coeff}*{base}^{_fmt_exponent(p)}")
        return " + ".join(parts).replace("+ -", "- ")

    def __str__(self) -> str:
        return self.render()


class Regularity(enum.Enum):
    CONTINUOUS = "Continuous"
    L1_ONLY = "L1Only"
    NOT_L1 = "NotL1"
    UNDEFINED = "Undefined"


@dataclass(frozen=True)
class RegularityClass:
    tag: Regularity
    value_at_a: float | None = None

    @property
    def continuous(self) -> bool:
        return self.tag is Regularity.CONTINUOUS

    def __str__(self) -> str:
        if self.value_at_a is None:
            return self.tag.value
        return f"{self.tag.value}(value_at_a={self.value_at_a:.17g})"


UNDEFINED = RegularityClass(Regularity.UNDEFINED)


def classify(f: PowerSum) -> RegularityClass:
    pmin = f.min_exponent()
    if pmin is None or pmin >= 0:
        return RegularityClass(Regularity.CONTINUOUS, f.coefficient(0))
    if pmin > -1:
        return RegularityClass(Regularity.L1_ONLY)
    return RegularityClass(Regularity.NOT_L1)


class Derivative(NamedTuple):
    """A derivative together with its regularity; ``value`` is None when undefined."""

    value: PowerSum | None
    regularity: RegularityClass


def _require_operand(f: PowerSum, what: str):
    if f.formal:
        raise PowerSumError(f"{what} of a non-integrable formal power sum is undefined")


def _order(alpha) -> Exponent:
    alpha = as_exponent(alpha)
    if alpha < 0:
        raise PowerSumError(f"negative order {alpha}")
    return alpha


def rl_integral(f: PowerSum, alpha) -> PowerSum:
    """Riemann-Liouville integral: ``c (t-a)^p -> c G(p+1)/G(p+1+alpha) (t-a)^(p+alpha)``."""
    _require_operand(f, "integral")
    alpha = _order(alpha)
    if alpha == 0:
        return f
    return PowerSum.build(
        [(as_exponent(p + alpha), c * gamma_ratio(float(p) + 1, float(p + alpha) + 1)) for p, c in f.terms],
        f.a,
    )


def _power_derivative(f: PowerSum, alpha: Exponent) -> PowerSum:
    out = []
    for p, c in f.terms:
        q = as_exponent(p - alpha)
        # 1/Gamma(q+1) vanishes when q is a negative integer: the term is annihilated
        coeff = c * gamma_ratio(float(p) + 1, float(q) + 1)
        if coeff != 0.0:
            out.append((q, coeff))
    return PowerSum.build(out, f.a, formal=True)


def _finish(result: PowerSum) -> Derivative:
    reg = classify(result)
    if reg.tag is not Regularity.NOT_L1:
        result = PowerSum(result.terms, result.a, False)
    return Derivative(result, reg)


def rl_derivative(f: PowerSum, alpha) -> Derivative:
    """Riemann-Liouville derivative of order ``alpha >= 0`` with its regularity class."""
    _require_operand(f, "derivative")
    alpha = _order(alpha)
    if alpha == 0:
        return Derivative(f, classify(f))
    return _finish(_power_derivative(f, alpha))


def classical_derivative(f: PowerSum, n: int) -> Derivative:
    if n < 0 or int(n) != n:
        raise PowerSumError(f"integer derivative order expected, got {n}")
    return rl_derivative(f, Fraction(int(n)))


def taylor_polynomial(f: PowerSum, degree: int, a: float | None = None) -> PowerSum:
    """Taylor polynomial of ``f`` at its base point, of the given degree.

    For a power sum this is the integer-exponent part up to ``degree``; it
    exists only when every non-integer exponent exceeds ``degree``.
    """
    if a is not None and a != f.a:
        raise PowerSumError("Taylor polynomial must be centred at the power sum's base point")
    _require_operand(f, "Taylor polynomial")
    keep = []
    for p, c in f.terms:
        if is_integer(p):
            if p <= degree:
                keep.append((p, c))
        elif p < degree:
            raise PowerSumError(
                f"derivative of order {math.ceil(p)} of (t-a)^{p} does not exist at a; "
                f"Taylor polynomial of degree {degree} undefined"
            )
    return PowerSum.build(keep, f.a)


def caputo_derivative(f: PowerSum, alpha) -> Derivative:
    """Caputo derivative: the RL derivative of ``f`` minus its Taylor polynomial."""
    _require_operand(f, "Caputo derivative")
    alpha = _order(alpha)
    if alpha == 0:
        return Derivative(f, classify(f))
    m = math.ceil(alpha)
    try:
        poly = taylor_polynomial(f, m - 1)
    except PowerSumError:
        return Derivative(None, UNDEFINED)
    return _finish(_power_derivative(f - poly, alpha))


class Mode(enum.Enum):
    RL = "rl"
    CAPUTO = "caputo"
    INTEGER_SPLIT = "split"


class Verdict(enum.Enum):
    HOLDS = "HOLDS"
    VIOLATED = "VIOLATED"
    OUTER_UNDEFINED = "OUTER_UNDEFINED"


@dataclass(frozen=True)
class SemigroupReport:
    mode: Mode
    f: PowerSum
    beta: Exponent
    gamma: Exponent
    alpha: Exponent
    alpha_class: RegularityClass
    inner: Derivative
    outer: Derivative
    direct: Derivative
    verdict: Verdict
    hypothesis_satisfied: bool
    theorem_citation: str

    def render(self) -> str:
        def side(d: Derivative) -> str:
            body = "undefined" if d.value is None else d.value.render()
            return f"{body}  [{d.regularity}]"

        op = {Mode.RL: "RL", Mode.CAPUTO: "C", Mode.INTEGER_SPLIT: "C"}[self.mode]
        inner_op = "D" if self.mode is Mode.INTEGER_SPLIT else f"{op}D"
        rows = [("f", self.f.render()), (f"inner  {inner_op}^beta f", side(self.inner)),
                (f"outer  {op}D^gamma(inner)", side(self.outer)), (f"direct {op}D^(beta+gamma) f", side(self.direct))]
        width = max(len(k) for k, _ in rows)
        lines = [
            f"{self.verdict.value} mode={self.mode.value} beta={self.beta} gamma={self.gamma}",
            *(f"{k.ljust(width)} = {v}" for k, v in rows),
            f"f is {'' if self.alpha_class.continuous else 'not '}continuously {op}-differentiable of order alpha={self.alpha}",
            f"hypothesis {'satisfied' if self.hypothesis_satisfied else 'not satisfied'}: {self.theorem_citation}",
        ]
        return "\n".join(lines)


def _continuous_in_c(f: PowerSum) -> bool:
    return classify(f).continuous


def _rl_hypothesis(f, beta, gamma, alpha, alpha_class, inner, outer):
    total = beta + gamma
    if not (_continuous_in_c(f) and alpha_class.continuous):
        return False, "no RL partial-semigroup result applies: f is not continuously RL alpha-differentiable"
    if alpha < 1 and total <= alpha:
        return True, "RL partial semigroup, 0 <= beta < beta+gamma <= alpha < 1"
    frac = alpha - math.floor(alpha)
    if alpha > 1 and 0 < frac and total <= frac:
        return True, "RL partial semigroup for alpha > 1: beta+gamma <= alpha - floor(alpha)"
    if is_integer(gamma) and total <= alpha:
        return True, "RL composition with integer outer order: alpha-beta in N"
    if 0 < beta < 1 and inner.regularity.continuous and outer.regularity.continuous:
        return True, "RL converse: 0 < beta < 1, D^beta h and D^gamma(D^beta h) continuous"
    if alpha > 1 and frac > 0 and beta > frac and not is_integer(alpha - beta):
        return False, ("RL counterexample family: alpha > 1, beta > alpha - floor(alpha), "
                       "alpha - beta not in N; f need not be continuously RL beta-differentiable")
    return False, "no RL partial-semigroup result applies"


def _caputo_hypothesis(f, beta, gamma, alpha, alpha_class):
    total = beta + gamma
    ok_orders = gamma <= 1 and total <= alpha and math.ceil(total) - math.floor(beta) == 1
    if ok_orders and alpha_class.continuous:
        return True, "Caputo partial semigroup: gamma <= 1, beta+gamma <= alpha, ceil(beta+gamma) - floor(beta) = 1"
    if not is_integer(beta) and not is_integer(gamma) and len(f.terms) == 1 and same_exponent(f.terms[0][0], beta):
        return False, "Caputo counterexample family h = (t-a)^beta with beta, gamma not in N"
    if not ok_orders:
        return False, "Caputo orders violate gamma <= 1 or ceil(beta+gamma) - floor(beta) = 1"
    return False, "f is not continuously Caputo alpha-differentiable"


def check_semigroup(f: PowerSum, beta, gamma, mode: Mode | str = Mode.CAPUTO, alpha=None) -> SemigroupReport:
    """Compare ``D^gamma(D^beta f)`` with ``D^(beta+gamma) f`` in the chosen setting.

    ``alpha`` is the order to which ``f`` is assumed continuously
    differentiable when deciding which theorem covers the instance; it
    defaults to ``beta + gamma``. In :attr:`Mode.INTEGER_SPLIT` the inner
    operator is the classical derivative of integer order ``beta``.
    The outer operator works in the continuous setting: a discontinuous inner
    result gives :attr:`Verdict.OUTER_UNDEFINED`.
    """
    mode = Mode(mode)
    beta, gamma = _order(beta), _order(gamma)
    if not (beta > 0 or (mode is Mode.INTEGER_SPLIT and beta == 0)) or not gamma > 0:
        raise PowerSumError("check_semigroup needs beta > 0 and gamma > 0")
    total = as_exponent(beta + gamma)
    alpha = total if alpha is None else _order(alpha)

    if mode is Mode.RL:
        op = rl_derivative
        inner = rl_derivative(f, beta)
    elif mode is Mode.CAPUTO:
        op = caputo_derivative
        inner = caputo_derivative(f, beta)
    else:
        if not is_integer(beta):
            raise PowerSumError(f"integer-split mode needs an integer inner order, got {beta}")
        op = caputo_derivative
        inner = classical_derivative(f, int(beta))

    alpha_class = op(f, alpha).regularity
    direct = op(f, total)
    if inner.value is None or not inner.regularity.continuous:
        outer = Derivative(None, UNDEFINED)
        verdict = Verdict.OUTER_UNDEFINED
    else:
        outer = op(inner.value, gamma)
        if outer.value is None:
            verdict = Verdict.OUTER_UNDEFINED
        elif direct.value is not None and outer.value.isclose(direct.value):
            verdict = Verdict.HOLDS
        else:
            verdict = Verdict.VIOLATED

    if mode is Mode.RL:
        hyp, cite = _rl_hypothesis(f, beta, gamma, alpha, alpha_class, inner, outer)
    elif mode is Mode.CAPUTO:
        hyp, cite = _caputo_hypothesis(f, beta, gamma, alpha, alpha_class)
    else:
        hyp = alpha_class.continuous and beta <= math.ceil(alpha) - 1 and total <= alpha
        cite = ("integer split: C D^(alpha-l) D^l f = C D^alpha f for integer l <= ceil(alpha)-1"
                if hyp else "integer split needs l <= ceil(alpha)-1 and f continuously Caputo alpha-differentiable")
    return SemigroupReport(mode, f, beta, gamma, alpha, alpha_class, inner, outer, direct, verdict, hyp, cite)
