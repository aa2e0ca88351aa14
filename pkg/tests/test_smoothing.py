import numpy as np
import pytest
from scipy.integrate import quad

from rdream.errors import DegenerateBandwidth
from rdream.smoothing import (
    QUARTIC_ROUGHNESS,
    BandwidthRule,
    bandwidth,
    kernel_pair_sums,
    pairwise_weights,
    product_kernel,
    quartic_kernel,
)


class TestKernel:
    @pytest.mark.parametrize("u,expected", [(0.0, 0.9375), (1.0, 0.0), (-1.0, 0.0), (0.5, 0.52734375), (1.5, 0.0)])
    def test_values(self, u, expected):
        assert quartic_kernel(u) == expected

    def test_integrates_to_one(self):
        val, _ = quad(quartic_kernel, -1, 1, epsabs=1e-14)
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_roughness(self):
        val, _ = quad(lambda u: quartic_kernel(u) ** 2, -1, 1, epsabs=1e-14)
        assert val == pytest.approx(5 / 7, abs=1e-10)
        assert QUARTIC_ROUGHNESS == 5 / 7

    def test_symmetric(self):
        u = np.linspace(-1.2, 1.2, 25)
        np.testing.assert_array_equal(quartic_kernel(u), quartic_kernel(-u))

    def test_product(self):
        assert product_kernel([0.0, 0.0]) == 0.87890625
        assert product_kernel([0.2, 1.0]) == 0.0
        assert product_kernel([0.5]) == 0.52734375


class TestBandwidth:
    def test_rules(self):
        assert bandwidth(BandwidthRule.opg(), 100, 1) == pytest.approx(0.716593, abs=1e-6)
        assert bandwidth(BandwidthRule.dee(), 100, 1) == pytest.approx(0.199054, abs=1e-6)
        assert bandwidth(BandwidthRule.opg(), 100, 2) == pytest.approx(0.835486, abs=1e-6)

    def test_fixed(self):
        assert bandwidth(BandwidthRule.of_fixed(0.3), 1000, 3) == 0.3
        with pytest.raises(DegenerateBandwidth):
            BandwidthRule.of_fixed(0.0)

    def test_wq_uses_dee_constant(self):
        assert BandwidthRule.for_method("wq").constant == 0.5
        with pytest.raises(ValueError):
            BandwidthRule.for_method("nope")


class TestWeights:
    def test_identical_rows(self):
        w = pairwise_weights(np.zeros((2, 1)), 1.0)
        assert w[0, 1] == w[1, 0] == 0.9375
        assert w[0, 0] == 0.0

    def test_far_rows(self):
        w = pairwise_weights(np.array([[0.0, 0.0], [0.1, 2.0]]), 1.0)
        assert w[0, 1] == 0.0

    def test_scaling(self):
        z = np.array([[0.0, 0.0], [0.1, 0.2]])
        w = pairwise_weights(z, 0.5)
        assert w[0, 1] == pytest.approx(product_kernel([0.2, 0.4]) / 0.25)

    def test_bad_bandwidth(self):
        with pytest.raises(DegenerateBandwidth):
            pairwise_weights(np.zeros((2, 1)), -1.0)
        with pytest.raises(DegenerateBandwidth):
            kernel_pair_sums(np.zeros((2, 1)), 0.0, np.ones(2))

    def test_pair_sums_match_matrix(self, rng):
        z = rng.standard_normal((30, 2))
        u = rng.standard_normal(30)
        w = pairwise_weights(z, 0.8)
        s1, s2 = kernel_pair_sums(z, 0.8, u)
        assert s1 == pytest.approx(u @ w @ u, rel=1e-12)
        assert s2 == pytest.approx(np.sum(w * w) * 0.8**2, rel=1e-12)
