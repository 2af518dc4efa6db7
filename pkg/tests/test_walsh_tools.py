import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import correlation_by_integral
from tonereserve.systems import DyadicStepSignal, IndexSet, walsh_coefficients, walsh_signal
from tonereserve.walsh_tools import (
    NoCorrelatorError,
    cex_lower_bound_walsh,
    correlation,
    correlation_profile,
    dyadic_projection,
    guaranteed_stages,
    m_set,
    main_lemma_witness,
    optimal_subset_size,
    q_shift,
    split_stage,
    split_trace,
)


def subsets(max_n=6):
    return st.integers(1, max_n).flatmap(
        lambda n: st.tuples(st.just(2**n), st.sets(st.integers(1, 2**n)))
    )


class TestMSetAndCorrelation:
    def test_m_set_examples(self):
        assert m_set(4, IndexSet(4, (2, 3)), 4).members == (2, 3)
        assert m_set(2, IndexSet(4, (1, 3)), 4).members == ()
        I = IndexSet(8, (2, 5, 7))
        assert m_set(1, I, 8) == I

    def test_correlation_examples(self):
        full = IndexSet.full(4)
        assert [correlation(r, full, 4) for r in range(1, 5)] == [4, 4, 4, 4]
        single = IndexSet(4, (1,))
        assert [correlation(r, single, 4) for r in range(1, 5)] == [1, 0, 0, 0]
        assert correlation(4, IndexSet(8, (2, 3)), 8) == 2

    def test_correlation_matches_integral_oracle(self):
        rng = np.random.default_rng(1)
        for n in range(1, 6):
            N = 2**n
            for _ in range(5):
                I = IndexSet.from_mask(rng.random(N) < 0.5)
                for r in range(1, N + 1):
                    assert correlation(r, I, N) == correlation_by_integral(r, I.members, n)

    def test_profile_examples(self):
        assert correlation_profile(IndexSet(4, (1, 2)), 4).values.tolist() == [2, 2, 0, 0]
        assert correlation_profile(IndexSet.full(8), 8).values.tolist() == [8] * 8
        assert correlation_profile(IndexSet(8, ()), 8).values.tolist() == [0] * 8

    @settings(max_examples=100, deadline=None)
    @given(subsets(8))
    def test_profile_identities(self, data):
        N, members = data
        I = IndexSet(N, tuple(members))
        prof = correlation_profile(I, N)
        assert int(prof.values.sum()) == len(I) ** 2
        assert prof.at(1) == len(I)
        assert np.all(prof.values >= 0) and np.all(prof.values <= len(I))
        assert np.all(prof.values[1:] % 2 == 0)
        for r in range(1, N + 1):
            assert prof.at(r) == len(m_set(r, I, N))

    @settings(max_examples=50, deadline=None)
    @given(subsets(6), st.data())
    def test_vanishing_correlation_is_inherited(self, data, draw):
        N, members = data
        I = IndexSet(N, tuple(members))
        sub = draw.draw(st.sets(st.sampled_from(sorted(members)))) if members else set()
        J = IndexSet(N, tuple(sub))
        big, small = correlation_profile(I, N), correlation_profile(J, N)
        assert np.all(small.values[big.values == 0] == 0)


class TestSplitting:
    def test_examples(self):
        r, A, B = split_stage(IndexSet.full(4), 4)
        assert (r, A.members, B.members) == (2, (1, 3), (2, 4))
        r, A, B = split_stage(IndexSet(4, (1, 3)), 4)
        assert (r, A.members, B.members) == (3, (1,), (3,))
        r, A, B = split_stage(IndexSet(8, (1, 2)), 8)
        assert (r, A.members, B.members) == (2, (1,), (2,))

    def test_no_correlator(self):
        with pytest.raises(NoCorrelatorError):
            split_stage(IndexSet(4, (3,)), 4)

    @settings(max_examples=80, deadline=None)
    @given(subsets(7))
    def test_stage_properties(self, data):
        N, members = data
        if len(members) < 2:
            return
        trace = split_trace(IndexSet(N, tuple(members)), N)
        for stage in trace.stages:
            A, B = set(stage.half_a.members), set(stage.half_b.members)
            assert {((k - 1) ^ (stage.r - 1)) + 1 for k in A} == B
            assert not A & B
            assert A | B == set(stage.m_set.members)
            assert len(A) == len(B) == len(stage.m_set) // 2
            assert stage.r >= 2
        assert len(trace.stages[-1].half_a) == 1

    def test_trace_json(self):
        trace = split_trace(IndexSet.full(4), 4)
        doc = json.loads(json.dumps(trace.to_json()))
        assert doc["m"] == 2
        assert [s["r"] for s in doc["stages"]] == [2, 3]
        assert doc["stages"][0]["A"] == [1, 3] and doc["stages"][0]["B"] == [2, 4]


class TestWitness:
    def test_full_four(self):
        w = main_lemma_witness(IndexSet.full(4), 4)
        assert w.m == 2
        assert w.f0.values.tolist() == [4, 0, 0, 0]
        assert w.support.members == (1, 2, 3, 4)
        assert w.l1_of_one_plus_f == 2 and w.l2sq_of_one_plus_f == 7
        assert w.l1_of_f == 1 and w.l2sq_of_f == 4
        # the product-minus-sum identity fails here because w_2, w_3 lie in I
        assert not w.product_identity_holds

    def test_pair(self):
        w = main_lemma_witness(IndexSet(4, (1, 2)), 4)
        assert w.m == 1
        assert w.support.members == (1, 2)
        assert w.l1_of_one_plus_f <= 2
        assert w.l2sq_of_one_plus_f >= 1

    @pytest.mark.parametrize("n", range(1, 11))
    def test_full_set_reaches_n_stages(self, n):
        N = 2**n
        w = main_lemma_witness(IndexSet.full(N), N)
        assert w.m == n
        assert w.m >= guaranteed_stages(1, N)

    def test_singleton_rejected(self):
        with pytest.raises(ValueError):
            main_lemma_witness(IndexSet(4, (2,)), 4)

    @settings(max_examples=80, deadline=None)
    @given(subsets(8))
    def test_norm_bounds_exact(self, data):
        N, members = data
        if len(members) < 2:
            return
        I = IndexSet(N, tuple(members))
        w = main_lemma_witness(I, N)
        assert set(w.support.members) <= set(members)
        assert len(w.support) == 2**w.m
        assert isinstance(w.l1_of_one_plus_f, Fraction)
        assert w.l1_of_one_plus_f <= 1 + w.m
        assert w.l2sq_of_one_plus_f >= 2**w.m - w.m**2
        coef = walsh_coefficients(w.f0)
        assert sorted(int(c) for c in coef if c) == [1] * 2**w.m


class TestCexBound:
    def test_examples(self):
        assert cex_lower_bound_walsh(0.5, 2**12) == (5, Fraction(7, 6), True)
        res = cex_lower_bound_walsh(0.5, 16)
        assert (res.m, res.bound, res.informative) == (1, Fraction(1, 2), False)

    @pytest.mark.parametrize("n", range(2, 13))
    def test_full_density(self, n):
        res = cex_lower_bound_walsh(1, 2**n)
        m = n - 1
        assert res.m == m
        assert res.bound == Fraction(2**m - m * m, n)

    def test_too_small(self):
        with pytest.raises(ValueError):
            cex_lower_bound_walsh(0.5, 8)

    def test_decimal_reading(self):
        # 2/0.3 = 20/3 and (20/3)^2 = 44.4..., so N = 64 gives m = 1
        assert guaranteed_stages(0.3, 64) == 1


class TestProjection:
    def test_examples(self):
        assert dyadic_projection(walsh_signal(3, 3), 1) == DyadicStepSignal(1, np.array([0, 0]))
        f = DyadicStepSignal(2, np.array([5, 1, 1, 1]))
        assert dyadic_projection(f, 1).values.tolist() == [3, 1]
        one = DyadicStepSignal.constant(1.0, 4)
        assert dyadic_projection(one, 2) == one

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 7).flatmap(lambda n: st.tuples(
        st.just(n),
        st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=2**n, max_size=2**n),
        st.integers(0, n),
    )))
    def test_contraction_and_idempotence(self, data):
        n, values, target = data
        f = DyadicStepSignal(n, np.array(values))
        p = dyadic_projection(f, target)
        assert np.max(np.abs(p.values)) <= np.max(np.abs(f.values))
        assert dyadic_projection(p.refine(n), target) == p

    def test_fixes_low_span_exactly(self):
        rng = np.random.default_rng(0)
        for n in range(1, 7):
            for target in range(n + 1):
                c = np.zeros(2**n, dtype=np.int64)
                c[: 2**target] = rng.integers(-9, 10, size=2**target)
                from tonereserve.systems import signal_from_coefficients

                f = signal_from_coefficients(c, n)
                assert dyadic_projection(f, target) == f

    def test_q_shift_examples(self):
        for m in range(0, 4):
            for j in range(1, 2**m + 1):
                q = q_shift(walsh_signal(2**m + j, m + 1), m)
                assert q == walsh_signal(j, m)
        low = walsh_signal(2, 3)
        assert q_shift(low, 2) == DyadicStepSignal.constant(0, 2)

    def test_q_shift_exact_support_and_sup(self):
        rng = np.random.default_rng(5)
        n, m = 4, 2
        for _ in range(50):
            f = DyadicStepSignal(n, rng.integers(-20, 21, size=2**n))
            q = q_shift(f, m)
            assert q.level == m
            coef = walsh_coefficients(q.refine(n))
            assert all(c == 0 for c in coef[2**m:])
            band = dyadic_projection(f, m + 1) - dyadic_projection(f, m)
            assert max(abs(v) for v in q.values) == max(abs(v) for v in band.values)

    def test_q_shift_too_coarse(self):
        from tonereserve.systems import ResolutionError

        with pytest.raises(ResolutionError):
            q_shift(walsh_signal(1, 2), 2)


class TestOptimalSubset:
    def test_large_constant_takes_everything(self):
        for N in (2, 4, 8):
            assert optimal_subset_size(N, N**0.5).size == N

    def test_constant_one(self):
        res = optimal_subset_size(4, 1.0)
        assert res.size >= 1
        assert res.cex == pytest.approx(1.0)

    def test_doubling_small(self):
        assert 2 * optimal_subset_size(4, 2.0).size >= optimal_subset_size(8, 2.0).size

    def test_rejects_large(self):
        with pytest.raises(ValueError):
            optimal_subset_size(32, 2.0)

    def test_custom_oracle_is_used(self):
        calls = []

        def oracle(N, K, a):
            calls.append(K)
            return 0.0

        res = optimal_subset_size(4, 1.0, solver_handle=oracle)
        assert res.size == 4 and len(calls) == 1
