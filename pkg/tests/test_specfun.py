import math

import mpmath
import pytest
from hypothesis import assume, given, strategies as st
from scipy.special import erfc

from fracred.errors import ConvergenceError, GammaPoleError, SpecialFunctionError
from fracred.specfun import (gamma, gamma_ratio, mittag_leffler, mittag_leffler_complex, ml_solution,
                             rgamma)


def erfc_oracle(z):
    """E_{1/2}(z) = exp(z^2) erfc(-z)."""
    return math.exp(z * z) * erfc(-z)


class TestGamma:
    def test_integers(self):
        assert gamma(5) == 24
        assert gamma(1) == 1

    def test_half(self):
        assert gamma(1.5) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)
        assert gamma(1.5) == pytest.approx(0.886226925453, abs=1e-12)

    @pytest.mark.parametrize("x", [0, -1, -7])
    def test_poles(self, x):
        with pytest.raises(GammaPoleError):
            gamma(x)
        assert rgamma(x) == 0.0

    def test_overflow(self):
        with pytest.raises(SpecialFunctionError):
            gamma(200)

    @given(st.floats(-10, 170).filter(lambda x: abs(x - round(x)) > 1e-6 or x > 0.5))
    def test_twelve_digits(self, x):
        ref = float(mpmath.gamma(x))
        assert gamma(x) == pytest.approx(ref, rel=1e-12)

    def test_ratio(self):
        assert gamma_ratio(1.5, 0.8) == pytest.approx(0.761213113705033580603916286462508853009, rel=1e-14)
        assert gamma_ratio(1.5, 0.0) == 0.0
        assert gamma_ratio(300.5, 300.0) == pytest.approx(float(mpmath.gamma(300.5) / mpmath.gamma(300)), rel=1e-12)


class TestMittagLeffler:
    def test_exponential(self):
        assert mittag_leffler(1, 1, 1) == pytest.approx(2.718281828459, abs=1e-12)

    def test_zero_argument(self):
        assert mittag_leffler(0.5, 1, 0) == 1
        assert mittag_leffler(0.5, 2.5, 0) == pytest.approx(1 / math.gamma(2.5))

    @pytest.mark.parametrize("z", [1.0, -1.0, 2.5, -5.0, 0.3])
    def test_half_order_erfc(self, z):
        assert mittag_leffler(0.5, 1, z) == pytest.approx(erfc_oracle(z), rel=1e-12, abs=1e-13)

    def test_frozen_values(self):
        # mpmath, 40 digits
        assert mittag_leffler(0.5, 1, 1) == pytest.approx(5.008980080762283466, abs=1e-12)
        assert mittag_leffler(0.5, 1, -1) == pytest.approx(0.427583576155807004, abs=1e-12)
        assert mittag_leffler(0.5, 2, 1) == pytest.approx(2.880600913666770892, abs=1e-12)
        assert mittag_leffler(0.75, 1.3, 2) == pytest.approx(12.28698271969230033, rel=1e-12)
        assert mittag_leffler(1.5, 1, -3) == pytest.approx(-0.1755653737999782429, abs=1e-12)
        assert mittag_leffler(2, 1, -4) == pytest.approx(math.cos(2), abs=1e-12)

    def test_budget_and_term_cap(self):
        with pytest.raises(ConvergenceError, match="budget"):
            mittag_leffler(1, 1, 51)
        with pytest.raises(ConvergenceError, match="terms"):
            mittag_leffler(0.25, 1, -40)
        with pytest.raises(SpecialFunctionError):
            mittag_leffler(0, 1, 1)

    def test_large_cancelling_argument_uses_extended_precision(self):
        # terms reach ~1e20 and cancel down to ~e^-40
        assert mittag_leffler(1, 1, -40) == pytest.approx(math.exp(-40), rel=1e-10)

    @given(st.floats(-10, 10))
    def test_exp_identity(self, z):
        assert mittag_leffler(1, 1, z) == pytest.approx(math.exp(z), rel=1e-10, abs=1e-10)

    @given(st.floats(0.05, 2), st.floats(0.05, 3), st.floats(-5, 5))
    def test_recurrence(self, a, b, z):
        try:
            lhs = mittag_leffler(a, b, z)
            rhs = rgamma(b) + z * mittag_leffler(a, a + b, z)
        except ConvergenceError:
            assume(False)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)

    @given(st.floats(0.2, 1.0), st.floats(-2, 2), st.floats(0.5, 2))
    def test_derivative_relation(self, a, lam, t):
        h = 1e-5 * t

        def x(s):
            return mittag_leffler(a, 1, lam * s**a)

        numeric = (x(t + h) - x(t - h)) / (2 * h)
        exact = lam * t ** (a - 1) * mittag_leffler(a, a, lam * t**a)
        assert numeric == pytest.approx(exact, rel=1e-6, abs=1e-9)

    def test_complex(self):
        import cmath
        assert mittag_leffler_complex(1, 1, 1 + 2j) == pytest.approx(cmath.exp(1 + 2j), rel=1e-13)
        z = -3 + 4j
        ref = complex(mpmath.exp(z**2) * mpmath.erfc(-z))
        assert mittag_leffler_complex(0.5, 1, z) == pytest.approx(ref, rel=1e-11)


class TestSolutionFormula:
    def test_values(self):
        assert ml_solution(1, 1, 1, 1) == pytest.approx(math.e, rel=1e-14)
        assert ml_solution(0.5, 1, 1, 1) == pytest.approx(5.008980, abs=1e-6)
        assert ml_solution(0.3, -2, 3.5, 0) == 3.5

    def test_domain(self):
        with pytest.raises(SpecialFunctionError):
            ml_solution(2.5, 1, 1, 1)
        with pytest.raises(SpecialFunctionError):
            ml_solution(0.5, 1, 1, -1)
