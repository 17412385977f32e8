import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracred.errors import ReductionError
from fracred.reduce import (MultiOrderSystem, MultiTermProblem, ReductionReport, SingleTermSystem, normalize_orders,
                            reduce_multiorder_to_single, reduce_to_multi_order, reduce_to_single_term)
from fracred.solve import solve_multi_order

MULTI_TERM = MultiTermProblem.linear((F(1), F(3, 2)), (0.0, 1.0), (0.0, 1.0), b=2.0)
TWO_ORDER = MultiOrderSystem.linear((F(1, 2), F(1, 4)), [[1e-5, 1], [-0.0022, 0.1]], [1.0, 0.0], b=2.0)


class TestProblemTypes:
    def test_lowest_order_range(self):
        with pytest.raises(ReductionError):
            MultiTermProblem.linear((F(3, 2),), (1,), (0, 0))
        with pytest.raises(ReductionError):
            MultiTermProblem.linear((F(1, 2), F(1, 2)), (1, 1), (0,))

    def test_initial_count(self):
        with pytest.raises(ReductionError, match="initial"):
            MultiTermProblem.linear((F(1), F(3, 2)), (0, 1), (0,))

    def test_system_orders(self):
        with pytest.raises(ReductionError):
            MultiOrderSystem.linear((F(3, 2),), [[1]], [0])
        with pytest.raises(ReductionError):
            MultiOrderSystem.linear((F(1, 2),), [[1, 2]], [0])


class TestNormalize:
    def test_inserts_integer(self):
        p = MultiTermProblem.linear((0.5, 1.7), (1.0, 2.0), (0.0, 0.0))
        q = normalize_orders(p)
        assert q.orders == (0.5, F(1), 1.7)
        assert q.coefficients == (1.0, 2.0, 0.0)
        assert q.rhs(0.0, np.array([1.0, 10.0, 100.0])) == 21.0

    def test_unchanged(self):
        assert normalize_orders(MULTI_TERM) is MULTI_TERM
        single = MultiTermProblem.linear((F(3, 10),), (1.0,), (2.0,))
        assert normalize_orders(single) is single

    def test_several_integers(self):
        p = MultiTermProblem.linear((F(1, 2), F(7, 2)), (1.0, 0.0), (0, 0, 0, 0))
        assert normalize_orders(p).orders == (F(1, 2), F(1), F(2), F(3), F(7, 2))

    def test_solution_unchanged(self):
        p = MultiTermProblem.linear((F(1, 2), F(17, 10)), (-1.0, -0.5), (1.0, 0.0), b=1.0)
        q = normalize_orders(p)
        h = 2**-8
        a = solve_multi_order(reduce_to_single_term(p), h).component(0)
        b = solve_multi_order(reduce_to_single_term(q), h).component(0)
        c = solve_multi_order(reduce_to_multi_order(q), h).component(0)
        assert np.max(np.abs(a - b)) <= 1e-13
        assert np.max(np.abs(a - c)) <= 2e-2

    def test_multi_order_requires_normalization(self):
        with pytest.raises(ReductionError, match="normalize"):
            reduce_to_multi_order(MultiTermProblem.linear((0.5, 1.7), (1.0, 2.0), (0.0, 0.0)))
        with pytest.raises(ReductionError, match="normalize"):
            reduce_to_multi_order(MultiTermProblem.linear((F(1, 2), F(3, 2)), (1.0, 2.0), (0.0, 0.0)))


class TestSingleTerm:
    def test_multi_term(self):
        s = reduce_to_single_term(MULTI_TERM)
        assert s.gamma == F(1, 2) and s.N == 3
        assert s.matrix.tolist() == [[0, 1, 0], [0, 0, 1], [0, 0, 1]]
        assert s.initial.tolist() == [0.0, 0.0, 1.0]
        assert s.index_map == (F(0), F(1, 2), F(1))

    def test_initial_rule(self):
        p = MultiTermProblem.linear((F(1), F(3, 2)), (0.0, 1.0), (4.0, 7.0))
        assert reduce_to_single_term(p).initial.tolist() == [4.0, 0.0, 7.0]

    def test_classical_passes_through(self):
        s = reduce_to_single_term(MultiTermProblem.linear((F(1),), (-2.0,), (3.0,)))
        assert (s.N, s.gamma) == (1, 1)
        assert s.matrix.tolist() == [[-2.0]]

    def test_nonlinear_chain(self):
        p = MultiTermProblem((F(1, 3), F(2, 3)), lambda t, a: t + a[0] * a[1], (5.0,))
        s = reduce_to_single_term(p)
        assert s.N == 2 and not s.is_linear
        assert s.rhs(2.0, np.array([3.0, 4.0])).tolist() == [4.0, 14.0]

    def test_forcing_goes_to_last_slot(self):
        p = MultiTermProblem.linear((F(1, 2), F(1)), (1.0, 0.0), (0.0,), forcing=lambda t: 3 * t)
        s = reduce_to_single_term(p)
        assert s.forcing(2.0).tolist() == [0.0, 6.0]

    def test_dimension_cap(self):
        # nonlinear, so no dense matrix gets built
        p = MultiTermProblem((F(1, 1000), F(11)), lambda t, a: a[0], (0.0,) * 11)
        with pytest.raises(ReductionError, match="cap"):
            reduce_to_single_term(p)
        assert reduce_to_single_term(p, max_dimension=11_000).N == 11_000
        with pytest.raises(ReductionError, match="cap"):
            reduce_to_single_term(MULTI_TERM, max_dimension=2)

    def test_opaque_real_orders(self):
        r = math.sqrt(2) / 4
        p = MultiTermProblem.linear((r, 2 * r), (1.0, 0.0), (1.0,))
        with pytest.raises(ReductionError, match="base"):
            reduce_to_single_term(p)
        s = reduce_to_single_term(p, base=r)
        assert s.N == 2 and s.gamma == r
        with pytest.raises(ReductionError, match="multiple"):
            reduce_to_single_term(p, base=r * 0.75)
        high = MultiTermProblem.linear((r, 1 + r), (1.0, 0.0), (1.0, 0.0))
        with pytest.raises(ReductionError, match="<= 1"):
            reduce_to_single_term(high, base=r)

    @given(st.lists(st.fractions(F(1, 12), F(4), max_denominator=12), min_size=1, max_size=4, unique=True)
           .map(sorted).filter(lambda o: o[0] <= 1 and all(b - a <= 1 for a, b in zip(o, o[1:]))),
           st.data())
    def test_dimension_law_and_initial_rule(self, orders, data):
        k = math.ceil(orders[-1])
        init = data.draw(st.lists(st.floats(-9, 9), min_size=k, max_size=k))
        p = MultiTermProblem.linear(orders, [1.0] * len(orders), init)
        s = reduce_to_single_term(p)
        M = math.lcm(*(q.denominator for q in orders))
        assert s.gamma == F(1, M) and s.N == M * orders[-1]
        assert sorted(s.index_map) == [F(j, M) for j in range(s.N)]
        for j, q in enumerate(s.index_map):
            assert s.initial[j] == (init[int(q)] if q.denominator == 1 else 0.0)


class TestMultiOrder:
    def test_multi_term(self):
        s = reduce_to_multi_order(MULTI_TERM)
        assert s.orders == (F(1), F(1, 2))
        assert s.matrix.tolist() == [[0, 1], [0, 1]]
        assert s.initial.tolist() == [0.0, 1.0]

    def test_half_steps(self):
        p = MultiTermProblem.linear((F(1, 2), F(1), F(3, 2)), (0, 0, 0), (3.0, 4.0))
        s = reduce_to_multi_order(p)
        assert s.orders == (F(1, 2),) * 3
        assert s.initial.tolist() == [3.0, 0.0, 4.0]

    def test_identity_for_one_term(self):
        s = reduce_to_multi_order(MultiTermProblem.linear((F(2, 5),), (-1.0,), (2.0,)))
        assert s.orders == (F(2, 5),) and s.matrix.tolist() == [[-1.0]]

    def test_formulations_agree(self):
        p = MultiTermProblem.linear((F(1, 2), F(1), F(3, 2)), (-1.0, 0.5, -0.3), (1.0, -0.5), b=1.0)
        h = 2**-9
        a = solve_multi_order(reduce_to_single_term(p), h)
        b = solve_multi_order(reduce_to_multi_order(p), h)
        assert np.max(np.abs(a.values - b.values)) <= 1e-12  # identical systems here


class TestExpansion:
    def test_two_order(self):
        s = reduce_multiorder_to_single(TWO_ORDER)
        assert s.gamma == F(1, 4) and s.N == 3
        assert np.array_equal(s.matrix, [[0, 1, 0], [1e-5, 0, 1], [-0.0022, 0, 0.1]])
        assert s.initial.tolist() == [1.0, 0.0, 0.0]
        assert s.labels == ("x1", "C D^1/4 x1", "x2")

    def test_already_single(self):
        m = MultiOrderSystem.linear((F(1, 3),), [[-2.0]], [1.5])
        s = reduce_multiorder_to_single(m)
        assert s.N == 1 and s.matrix.tolist() == [[-2.0]] and s.initial.tolist() == [1.5]

    def test_diagonal_blocks(self):
        m = MultiOrderSystem.linear((F(1, 2), F(1, 2)), [[-1.0, 0.0], [0.0, -2.0]], [1.0, 2.0], b=1.0)
        s = reduce_multiorder_to_single(m)
        assert s.gamma == F(1, 2) and s.N == 2
        assert s.matrix.tolist() == [[-1.0, 0.0], [0.0, -2.0]]
        a = solve_multi_order(m, 2**-8)
        b = solve_multi_order(s, 2**-8)
        assert np.array_equal(a.values, b.values)

    def test_expansion_solves_like_original(self):
        h = 2**-9
        a = solve_multi_order(TWO_ORDER, h)
        b = solve_multi_order(reduce_multiorder_to_single(TWO_ORDER), h)
        assert np.max(np.abs(a.values[:, 0] - b.values[:, 0])) <= 1e-2
        assert np.max(np.abs(a.values[:, 1] - b.values[:, 2])) <= 1e-2

    def test_nonlinear(self):
        m = MultiOrderSystem((F(1, 2), F(1, 4)), lambda t, x: np.array([x[1] ** 2, -x[0]]), [1.0, 2.0])
        s = reduce_multiorder_to_single(m)
        assert s.rhs(0.0, np.array([1.0, 5.0, 2.0])).tolist() == [5.0, 4.0, -1.0]

    def test_non_commensurate(self):
        m = MultiOrderSystem.linear((0.5, math.sqrt(0.1)), np.eye(2), [1.0, 1.0])
        with pytest.raises(ReductionError):
            reduce_multiorder_to_single(m)
        with pytest.raises(ReductionError):
            reduce_multiorder_to_single(m, base=0.25)


def test_report():
    s = reduce_to_single_term(MULTI_TERM)
    rep = ReductionReport("single_term", MULTI_TERM.orders, s, s.gamma, 2)
    d = rep.to_dict()
    assert d["gamma"] == "1/2" and d["N"] == 3 and d["M"] == 2
    assert d["index_map"] == ["0", "1/2", "1"]
    assert d["initial"] == [0.0, 0.0, 1.0]
    text = rep.render()
    assert "gamma = 1/2" in text and "N = 3" in text and "x_j(a)" in text
    m = reduce_to_multi_order(MULTI_TERM)
    assert "alpha_{j-1} is an integer" in ReductionReport("multi_order", MULTI_TERM.orders, m).render()
    assert isinstance(s, SingleTermSystem)
