import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jain_ops.funcspec import parse_function
from jain_ops.kernel import TruncationPolicy
from jain_ops.statconv import (
    IndexSet,
    StatSequence,
    density,
    square_exception_sequences,
    stat_limit_check,
    theorem7_experiment,
)

from conftest import E


class TestIndexSet:
    def test_sorted_unique(self):
        s = IndexSet((5, 1, 5, 3), 10)
        assert s.members == (1, 3, 5)
        assert 3 in s and 4 not in s

    def test_range_checked(self):
        with pytest.raises(ValueError):
            IndexSet((0, 2), 10)
        with pytest.raises(ValueError):
            IndexSet((11,), 10)

    def test_mask(self):
        m = IndexSet.squares(10).mask(10)
        assert list(np.flatnonzero(m) + 1) == [1, 4, 9]


class TestDensity:
    def test_examples(self):
        assert density(IndexSet.squares(10_000), 10_000) == 0.01
        assert density(IndexSet.from_predicate(lambda k: k % 2 == 0, 1000), 1000) == 0.5
        assert density(IndexSet((), 77), 77) == 0.0

    def test_horizon_positive(self):
        with pytest.raises(ValueError):
            density(IndexSet((), 1), 0)

    @given(
        members=st.sets(st.integers(1, 200), max_size=100),
        extra=st.sets(st.integers(1, 200), max_size=50),
        h=st.integers(1, 200),
    )
    def test_monotone_under_inclusion(self, members, extra, h):
        S = IndexSet(tuple(members), 200)
        T = IndexSet(tuple(members | extra), 200)
        assert density(S, h) <= density(T, h)


class TestStatLimit:
    def test_square_exception(self):
        seq = StatSequence(lambda n: 1.0 / n, IndexSet.squares(10_000), 0.5)
        [(h, d)] = stat_limit_check(seq, 0.0, 0.01, [10_000])
        # n <= 100 (100 indices) plus squares above 100 (90 more)
        assert d == pytest.approx(0.019)

    def test_harmonic(self):
        assert stat_limit_check(StatSequence(lambda n: 1.0 / n), 0.0, 0.1, [1000]) == [(1000, 0.01)]

    @pytest.mark.parametrize("h", [1, 17, 500])
    def test_constant_one(self, h):
        assert stat_limit_check(StatSequence(1.0), 0.0, 0.5, [h]) == [(h, 1.0)]

    @given(eps=st.floats(0.001, 0.9), h=st.integers(1, 3000))
    def test_ordinary_convergence_bound(self, eps, h):
        first_good = math.floor(1 / eps) + 1  # 1/n < eps from here on
        [(_, d)] = stat_limit_check(StatSequence(lambda n: 1.0 / n), 0.0, eps, [h])
        assert d <= first_good / h

    def test_square_exception_not_ordinarily_convergent(self):
        seq = StatSequence(lambda n: 1.0 / n, IndexSet.squares(10**6), 0.5)
        for N in (10, 1000, 10**5):
            m = math.isqrt(N) + 1
            assert m * m > N and abs(seq(m * m)) >= 0.1
        dens = [d for _, d in stat_limit_check(seq, 0.0, 0.1, [100, 10_000, 10**6])]
        assert dens[0] > dens[1] > dens[2] and dens[2] < 0.002

    def test_horizons_must_increase(self):
        with pytest.raises(ValueError):
            stat_limit_check(StatSequence(0.0), 0.0, 0.1, [10, 10])


class TestTheorem7:
    def test_szasz_constants_never_bad(self):
        res = theorem7_experiment(
            StatSequence(0.0), StatSequence(E), parse_function("poly:1"), (0.0, 1.0), 1e-6, [50, 200]
        )
        assert res.bad_densities == [0.0, 0.0]

    def test_fixed_beta_all_bad(self):
        res = theorem7_experiment(
            StatSequence(0.5), StatSequence(E), parse_function("poly:0,1"), (0.0, 1.0), 0.1, [30, 100]
        )
        assert res.bad_densities == [1.0, 1.0]

    def test_square_exception_short_horizon(self):
        b, a = square_exception_sequences(400)
        res = theorem7_experiment(b, a, parse_function("poly:0,0,1"), (0.0, 1.0), 0.05, [100, 200, 400],
                                  keep_trace=True)
        d = res.bad_densities
        assert d[0] >= d[1] >= d[2]
        assert len(res.trace) == 400 and res.truncation_failures == ()
        n, beta, a_n, _ = res.trace[15]
        assert (n, beta, a_n) == (16, 0.5, 2.0)

    def test_square_sequences(self):
        b, a = square_exception_sequences(100)
        assert b(1) == 0.5 and a(1) == 2.0
        assert b(10) == 0.1 and a(10) == pytest.approx(math.exp(0.9))

    def test_truncation_counts_as_bad(self):
        res = theorem7_experiment(
            StatSequence(0.2), StatSequence(2.0), parse_function("poly:0,0,1"), (0.5, 3.0), 0.05, [5],
            policy=TruncationPolicy(k_max=3),
        )
        assert res.truncation_failures == (1, 2, 3, 4, 5)
        assert res.bad_densities == [1.0]

    def test_rejects_nonpositive_eps(self):
        with pytest.raises(ValueError):
            theorem7_experiment(StatSequence(0.0), StatSequence(E), parse_function("poly:1"), (0, 1), 0.0, [5])

