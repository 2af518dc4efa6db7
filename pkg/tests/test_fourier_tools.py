import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dirichlet_l1_quad, longest_ap_exhaustive
from tonereserve.extension_solver import sample_ratio
from tonereserve.fourier_tools import (
    ApDescriptor,
    KernelSpec,
    ap_witness,
    ap_witness_search,
    cex_lower_bound_ap,
    difference_kernel_bound,
    kernel_l1,
    lacunary_ratio,
    lacunary_set,
    longest_ap,
)
from tonereserve.systems import IndexSet


def dft_l1_direct(values: np.ndarray) -> float:
    """``||F D||_1`` by an explicit double loop over the unitary DFT."""
    N = len(values)
    total = 0.0
    for j in range(N):
        s = sum(values[k] * np.exp(-2j * np.pi * j * k / N) for k in range(N))
        total += abs(s) / math.sqrt(N)
    return total


class TestLongestAp:
    def test_examples(self):
        assert longest_ap(IndexSet(16, (1, 3, 5, 9))) == ApDescriptor(1, 2, 3)
        assert longest_ap(IndexSet.full(32)) == ApDescriptor(1, 1, 32)
        assert longest_ap(IndexSet(8, (7,))) == ApDescriptor(7, 1, 1)

    def test_empty(self):
        with pytest.raises(ValueError):
            longest_ap(IndexSet(8, ()))

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 64).flatmap(lambda N: st.tuples(st.just(N), st.sets(st.integers(1, N), min_size=1))))
    def test_matches_exhaustive_search(self, data):
        N, members = data
        ap = longest_ap(IndexSet(N, tuple(members)))
        assert set(ap.members()) <= members
        assert (ap.a, ap.d, ap.m) == longest_ap_exhaustive(members)


class TestApWitness:
    def test_full_interval_sixteen(self):
        w = ap_witness_search(16, ApDescriptor(1, 1, 16))
        assert w.bound == pytest.approx(math.log(16))
        assert w.l1_of_FD <= math.log(16)

    def test_frozen_n64_step2(self):
        w = ap_witness_search(64, ApDescriptor(3, 2, 8))
        # frozen from the direct DFT oracle at the searched shift
        assert dft_l1_direct(w.D.values) == pytest.approx(w.l1_of_FD, abs=1e-10)
        assert w.l1_of_FD == pytest.approx(5.052049288294517, abs=1e-9)
        ratio = math.sqrt(64) / w.l1_of_FD
        assert ratio == pytest.approx(1.5835158256543176, abs=1e-9)
        assert ratio >= math.sqrt(8) / math.log(8)

    def test_entries(self):
        D = ap_witness(64, ApDescriptor(3, 2, 8)).values
        assert np.count_nonzero(D) == 8
        assert np.allclose(np.abs(D[2:17:2]), 1 / math.sqrt(8))

    def test_preconditions(self):
        with pytest.raises(ValueError):
            ap_witness(16, ApDescriptor(10, 2, 5))
        with pytest.raises(ValueError):
            ap_witness(16, ApDescriptor(3, 1, 1))
        with pytest.raises(ValueError):
            ap_witness(16, ApDescriptor(1, 1, 4), t_grid=100)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(4, 12), st.integers(6, 64), st.data())
    def test_log_bound_for_m_at_least_six(self, n, m, data):
        N = 2**n
        d = data.draw(st.integers(1, max(1, (N - 1) // (m - 1))))
        if 1 + (m - 1) * d > N:
            return
        a = data.draw(st.integers(1, N - (m - 1) * d))
        w = ap_witness_search(N, ApDescriptor(a, d, m))
        assert np.linalg.norm(w.D.values) == pytest.approx(1.0, abs=1e-12)
        assert w.l1_of_FD <= w.bound

    @pytest.mark.parametrize("m,ratio", [(2, 1.837), (3, 1.307), (4, 1.12), (5, 1.02)])
    def test_short_progressions_exceed_natural_log_bound(self, m, ratio):
        # for m <= 5 the best shift stays above (ln m / sqrt m) sqrt N, since
        # the Dirichlet kernel mean modulus exceeds ln m at these lengths
        w = ap_witness_search(4096, ApDescriptor(1, 1, m))
        assert w.l1_of_FD / w.bound == pytest.approx(ratio, abs=2e-3)


class TestCexBoundAp:
    def test_full_256(self):
        res = cex_lower_bound_ap(IndexSet.full(256))
        assert res.formula == pytest.approx(16 / math.log(256))
        assert res.value >= res.formula
        assert res.certified and res.informative

    def test_m_four(self):
        res = cex_lower_bound_ap(IndexSet(64, (5, 9, 13, 17, 40)))
        assert res.ap == ApDescriptor(5, 4, 4)
        assert res.formula == pytest.approx(2 / math.log(4))
        assert res.value == max(res.formula, res.measured)

    def test_lacunary_uninformative(self):
        res = cex_lower_bound_ap(IndexSet(64, (1, 2, 4, 8, 16, 32)))
        # {1, 2} and the like are the only progressions
        assert res.ap.m <= 3
        sparse = cex_lower_bound_ap(IndexSet(64, (1, 3, 9, 27)))
        assert sparse.ap.m == 2

    def test_singleton_flagged(self):
        res = cex_lower_bound_ap(IndexSet(8, (3,)))
        assert res.value == 1.0 and not res.informative


class TestKernels:
    def test_fejer_unit_mass(self):
        assert kernel_l1(KernelSpec.fejer(32)) == pytest.approx(1.0, abs=1e-6)

    def test_difference_kernel_lambda_two(self):
        assert kernel_l1(KernelSpec.difference(16, 32)) <= 4 + 1e-3

    def test_dirichlet_against_quadrature(self):
        oracle = 2.38118634291807  # frozen from dirichlet_l1_quad(16)
        assert dirichlet_l1_quad(16) == pytest.approx(oracle, abs=1e-9)
        value = kernel_l1(KernelSpec.dirichlet(16))
        assert value == pytest.approx(oracle, abs=1e-3)
        assert value > 2.0

    def test_difference_coefficients(self):
        c = KernelSpec.difference(4, 8).coefficients()
        k = np.arange(-8, 9)
        assert np.all(c[np.abs(k) <= 4] == 1)
        np.testing.assert_allclose(c[k == 6], [0.5])
        assert np.array_equal(c, c[::-1])

    def test_under_resolved(self):
        with pytest.raises(ValueError):
            kernel_l1(KernelSpec.fejer(32), quad_points=100)

    @pytest.mark.parametrize("lam", [1.5, 2, 4])
    @pytest.mark.parametrize("r_L", [4, 16, 64, 256])
    def test_difference_bound(self, lam, r_L):
        N = int(lam * r_L)
        assert kernel_l1(KernelSpec.difference(r_L, N)) <= difference_kernel_bound(lam) + 1e-3


class TestLacunary:
    def test_set(self):
        K, N = lacunary_set(2, 4)
        assert K.members == (1, 2, 4, 8) and N == 16
        K, N = lacunary_set(1.5, 4)
        assert K.members == (1, 2, 3, 5) and N == 8

    def test_spike_ratio_is_one(self):
        K, N = lacunary_set(2, 3)
        spike = np.zeros(N, dtype=complex)
        spike[K.members[-1] - 1] = 1
        assert sample_ratio("fourier", N, spike)[0] == pytest.approx(1.0, abs=1e-12)

    def test_sanity_cap(self):
        value = lacunary_ratio(2, 6, 1000, 0)
        assert 1.0 <= value <= 10

    def test_sparser_is_easier(self):
        assert lacunary_ratio(4, 6, 1000, 0) <= lacunary_ratio(2, 6, 1000, 0) + 0.05

    def test_reproducible(self):
        assert lacunary_ratio(2, 5, 50, 9) == lacunary_ratio(2, 5, 50, 9)

    def test_rejects(self):
        with pytest.raises(ValueError):
            lacunary_set(1.0, 3)
