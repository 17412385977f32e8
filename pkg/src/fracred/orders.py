"""Exact rational differentiation orders.

Orders are plain :class:`fractions.Fraction` values; ``RationalOrder`` is an
alias kept for readability in signatures. Anything that is not a Fraction
or an int (floats, numpy scalars) is treated as an opaque real.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

from .errors import OrderError

RationalOrder = Fraction

MAX_DENOMINATOR = 1_000_000

_FRACTION_RE = re.compile(r"^\s*([+-]?\d+)\s*/\s*([+-]?\d+)\s*$")
_DECIMAL_RE = re.compile(r"^\s*[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?\s*$")


def _check(value: Fraction, text: str, max_denominator: int) -> Fraction:
    if value < 0:
        raise OrderError(f"negative order {text!r}")
    if value.denominator > max_denominator:
        raise OrderError(
            f"order {text!r} has denominator {value.denominator}, "
            f"above the cap {max_denominator}"
        )
    return value


def parse_order(s: str | int | float | Fraction, *, max_denominator: int = MAX_DENOMINATOR) -> Fraction:
    """Parse ``"p/q"`` or a finite decimal into a reduced, non-negative Fraction.

    Floats are converted through their shortest decimal repr, so ``1.5``
    becomes ``3/2`` and ``0.1`` becomes ``1/10`` rather than a dyadic monster.
    """
    if isinstance(s, bool):
        raise OrderError(f"not an order: {s!r}")
    if isinstance(s, Rational):
        return _check(Fraction(s), str(s), max_denominator)
    if isinstance(s, float):
        if not math.isfinite(s):
            raise OrderError(f"non-finite order {s!r}")
        return _check(Fraction(repr(s)), repr(s), max_denominator)
    if not isinstance(s, str):
        raise OrderError(f"not an order: {s!r}")
    m = _FRACTION_RE.match(s)
    if m:
        p, q = int(m.group(1)), int(m.group(2))
        if q == 0:
            raise OrderError(f"zero denominator in {s!r}")
        return _check(Fraction(p, q), s, max_denominator)
    if _DECIMAL_RE.match(s):
        return _check(Fraction(s.strip()), s, max_denominator)
    raise OrderError(f"malformed order literal {s!r}")


def render_order(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def ceil_floor(alpha) -> tuple[int, int]:
    """Return ``(ceil(alpha), floor(alpha))``."""
    if alpha < 0:
        raise OrderError(f"negative order {alpha!r}")
    return math.ceil(alpha), math.floor(alpha)


def is_integer_order(alpha) -> bool:
    if isinstance(alpha, Rational):
        return Fraction(alpha).denominator == 1
    return float(alpha).is_integer()


def lcm_denominators(orders: Iterable[Fraction]) -> int:
    orders = list(orders)
    if not orders:
        raise OrderError("lcm of an empty order list")
    return math.lcm(*(Fraction(q).denominator for q in orders))


def is_commensurate(orders: Sequence) -> Fraction | None:
    """Largest base order dividing every order, or None.

    Only exact rationals can be certified; opaque reals give None.
    """
    if not orders:
        raise OrderError("empty order list")
    if not all(isinstance(q, Rational) for q in orders):
        return None
    fr = [Fraction(q) for q in orders]
    if any(q <= 0 for q in fr):
        raise OrderError("commensurability needs positive orders")
    m = lcm_denominators(fr)
    g = math.gcd(*(q.numerator * (m // q.denominator) for q in fr))
    return Fraction(g, m)
