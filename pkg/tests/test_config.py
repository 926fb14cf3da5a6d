"""Network configuration, derived scales, popularity, demand sampling."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from d2dcachesim.config import (
    ConfigError,
    NetworkConfig,
    derive_scales,
    explicit_pmf,
    reuse_factor,
    round_half_up,
    sample_demands,
    uniform_pmf,
    zipf_pmf,
)


def cfg(**kw):
    base = dict(n=10000, alpha=1.0, beta=0.0, a1=1.0, a2=1.0, seed=1)
    base.update(kw)
    return NetworkConfig(**base)


class TestNetworkConfig:
    def test_rejects_trivial_full_cache_case(self):
        with pytest.raises(ConfigError):
            cfg(alpha=0.5, beta=0.5, a1=1.0, a2=1.0)
        with pytest.raises(ConfigError):
            cfg(alpha=0.5, beta=0.5, a1=1.0, a2=2.0)
        cfg(alpha=0.5, beta=0.5, a1=2.0, a2=1.0)  # a1 > a2 is fine

    @pytest.mark.parametrize(
        "bad",
        [
            dict(n=0),
            dict(n=-5),
            dict(alpha=0.0),
            dict(beta=-0.1),
            dict(beta=1.5),  # beta > alpha
            dict(a1=0.0),
            dict(a2=-1.0),
            dict(W=0.0),
            dict(delta=0.0),
            dict(eta_margin=1.5),
        ],
    )
    def test_rejects_invalid_fields(self, bad):
        with pytest.raises(ConfigError):
            cfg(**bad)


class TestDeriveScales:
    def test_library_and_cache_sizes(self):
        s = derive_scales(cfg(n=10 ** 4, alpha=1.0, beta=0.0, a1=1.0, a2=1.0))
        assert s.m == 10 ** 4
        assert s.M == 1

    def test_reuse_factor_values(self):
        # ceil(2*sqrt(5)) = 5 -> (2*5+1)^2; ceil(1.5*sqrt(5)) = 4 -> 9^2
        assert reuse_factor(1.0) == 121
        assert reuse_factor(0.5) == 81
        s = derive_scales(cfg(delta=1.0))
        assert s.J == 121
        root = math.isqrt(s.J)
        assert root * root == s.J and root % 2 == 1

    def test_baseline_eta(self):
        s = derive_scales(cfg(alpha=0.8, beta=0.2, eta_margin=0.05))
        assert s.eta == pytest.approx(0.35, abs=1e-12)
        assert s.a_c == pytest.approx(10000.0 ** -s.eta, rel=1e-12)

    def test_regime_boundaries(self):
        # alpha - beta == 1 with a1 <= a2: global traffic cell
        s = derive_scales(cfg(alpha=1.0, beta=0.0, a1=1.0, a2=1.0))
        assert s.eta == 0.0
        with pytest.raises(ConfigError):
            derive_scales(cfg(alpha=1.5, beta=0.2))  # gap > 1
        with pytest.raises(ConfigError):
            derive_scales(cfg(alpha=1.0, beta=0.0, a1=2.0, a2=1.0))  # == 1, a1 > a2

    def test_radius_ties_to_hop_area(self):
        s = derive_scales(cfg(alpha=0.8, beta=0.2, n=4096))
        assert s.a_h == 2.0 * math.log(4096) / 4096
        assert s.r == math.sqrt(5.0 * s.a_h)

    def test_truncated_scheme_quantities(self):
        # min(1, 0+1-1/1.5) = 1/3, eta = 1/3 - 0.1, n2 = n^(2/3 + 0.05)
        s = derive_scales(cfg(n=10 ** 4), gamma=2.5, eps_c=0.1)
        assert s.eta == pytest.approx(1.0 / 3.0 - 0.1, abs=1e-12)
        assert s.n2 == pytest.approx(10 ** (4 * (2.0 / 3.0 + 0.05)), rel=1e-12)
        assert s.sub_library_size == 736  # round(735.64...) * M with M=1
        assert s.sub_library_size <= s.m

    def test_truncated_scheme_rejections(self):
        with pytest.raises(ConfigError):
            derive_scales(cfg(), gamma=1.2, eps_c=0.1)  # gamma <= 1 + 1/alpha
        with pytest.raises(ConfigError):
            derive_scales(cfg(), gamma=2.5, eps_c=0.5)  # eats the whole exponent
        with pytest.raises(ConfigError):
            derive_scales(cfg(), gamma=2.5)  # eps_c missing

    def test_eta_override(self):
        s = derive_scales(cfg(alpha=0.8, beta=0.2), eta_override=0.0)
        assert s.eta == 0.0 and s.a_c == 1.0
        with pytest.raises(ConfigError):
            derive_scales(cfg(), eta_override=1.0)

    def test_negative_margin_pushes_past_range(self):
        s = derive_scales(cfg(alpha=0.8, beta=0.2, eta_margin=-0.1))
        assert s.eta == pytest.approx(0.5, abs=1e-12)
        with pytest.raises(ConfigError):
            derive_scales(cfg(alpha=0.8, beta=0.2, eta_margin=-0.7))  # eta >= 1

    def test_pure_function(self):
        a = derive_scales(cfg(n=4096, alpha=0.8, beta=0.2), gamma=None, eps_c=None)
        b = derive_scales(cfg(n=4096, alpha=0.8, beta=0.2))
        assert a == b

    @given(
        gap=st.floats(min_value=0.05, max_value=0.95),
        beta=st.floats(min_value=0.0, max_value=1.0),
    )
    @settings(max_examples=50, deadline=None)
    def test_eta_in_unit_interval_and_occupancy_grows(self, gap, beta):
        margin = 0.02
        sizes = [1024, 4096, 16384, 65536]
        occupancies = []
        for n in sizes:
            s = derive_scales(
                cfg(n=n, alpha=beta + gap, beta=beta, eta_margin=margin)
            )
            assert 0.0 < s.eta < 1.0
            occupancies.append(n * s.a_c)
        assert all(b > a for a, b in zip(occupancies, occupancies[1:]))

    def test_round_half_up(self):
        assert round_half_up(0.5) == 1
        assert round_half_up(1.5) == 2  # bankers' rounding would give 2 for both
        assert round_half_up(2.5) == 3
        assert round_half_up(-0.2) == 0


class TestPopularity:
    def test_zipf_exact_quarters(self):
        pop = zipf_pmf(4, 1.0)
        assert np.allclose(pop.pmf, [0.48, 0.24, 0.16, 0.12], atol=1e-12)
        assert pop.cdf[-1] == 1.0

    def test_zero_exponent_is_uniform(self):
        pop = zipf_pmf(3, 0.0)
        assert np.allclose(pop.pmf, [1 / 3] * 3, atol=1e-15)

    def test_single_file(self):
        pop = zipf_pmf(1, 7.0)
        assert pop.pmf.tolist() == [1.0]

    def test_explicit_validation(self):
        explicit_pmf([0.5, 0.3, 0.2])
        with pytest.raises(ConfigError):
            explicit_pmf([0.5, 0.2, 0.2])  # sums to 0.9
        with pytest.raises(ConfigError):
            explicit_pmf([0.2, 0.5, 0.3])  # not descending

    def test_pmf_immutable(self):
        pop = uniform_pmf(5)
        with pytest.raises(ValueError):
            pop.pmf[0] = 0.9

    @given(
        m=st.integers(min_value=1, max_value=300),
        gamma=st.floats(min_value=0.0, max_value=5.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_property_normalized_descending(self, m, gamma):
        pop = zipf_pmf(m, gamma)
        assert abs(pop.pmf.sum() - 1.0) < 1e-9
        assert np.all(np.diff(pop.pmf) <= 1e-15)


class TestSampleDemands:
    def test_degenerate_support(self):
        assert sample_demands(zipf_pmf(1, 1.0), 5, 3).tolist() == [0] * 5

    def test_deterministic(self):
        pop = zipf_pmf(10, 0.8)
        assert np.array_equal(sample_demands(pop, 1000, 42), sample_demands(pop, 1000, 42))
        assert not np.array_equal(
            sample_demands(pop, 1000, 42), sample_demands(pop, 1000, 43)
        )

    def test_uniform_two_file_frequency(self):
        # Binomial CI: sd = 5e-4 at 1e6 draws, bound is 4 sigma.
        f = sample_demands(uniform_pmf(2), 10 ** 6, 11)
        assert abs(np.mean(f == 0) - 0.5) < 0.002

    def test_zipf_top_file_frequency(self):
        f = sample_demands(zipf_pmf(4, 1.0), 10 ** 6, 12)
        assert abs(np.mean(f == 0) - 0.48) < 0.002

    def test_entries_in_range(self):
        f = sample_demands(zipf_pmf(37, 1.3), 10 ** 4, 13)
        assert f.min() >= 0 and f.max() < 37

    def test_chi_square_uniform(self):
        m, n = 10, 10 ** 5
        f = sample_demands(uniform_pmf(m), n, 14)
        counts = np.bincount(f, minlength=m)
        stat = float(((counts - n / m) ** 2 / (n / m)).sum())
        # df = 9; 35 is far beyond the 1e-4 quantile
        assert stat < 35.0
