import numpy as np
import pytest

from starsim.beamforming import (
    Infeasible,
    golden_section_min,
    multicast_min_power,
    multicast_power_core,
    pair_stats,
    single_user_min_power,
    unicast_min_power,
    unicast_power_core,
)
from starsim.model import multicast_snrs, unicast_sinrs

from oracles import multicast_oracle_dense, random_channel_pair, unicast_oracle_span


def db_gap(p, p_ref):
    return 10.0 * np.log10(p / p_ref)


class TestGoldenSection:
    def test_scalar_quadratic(self):
        x = golden_section_min(lambda x: (x - 1.3) ** 2, -5.0, 5.0, 1e-8)
        assert x == pytest.approx(1.3, abs=1e-7)

    def test_vectorized(self):
        targets = np.array([0.2, -1.0, 2.5])
        x = golden_section_min(lambda x: (x - targets) ** 2, -5.0 * np.ones(3), 5.0 * np.ones(3), 1e-8)
        assert np.allclose(x, targets, atol=1e-7)


class TestSingleUser:
    def test_zero_target(self):
        w, p = single_user_min_power(np.array([1.0, 1.0j]), 0.0, 1.0)
        assert p == 0.0 and np.all(w == 0.0)

    def test_known_value(self):
        _, p = single_user_min_power(np.array([1.0, 1.0]), 1.0, 1.0)
        assert p == pytest.approx(0.5, rel=1e-15)

    def test_plug_back_snr(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            h = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            gamma = float(rng.uniform(0.2, 20.0))
            sigma2 = float(rng.uniform(0.1, 3.0))
            w, p = single_user_min_power(h, gamma, sigma2)
            snr = abs(np.vdot(h, w)) ** 2 / sigma2
            assert snr == pytest.approx(gamma, rel=1e-12)
            assert p == pytest.approx(np.sum(np.abs(w) ** 2), rel=1e-12)

    def test_zero_channel_infeasible(self):
        with pytest.raises(Infeasible):
            single_user_min_power(np.zeros(2, dtype=complex), 1.0, 1.0)


class TestUnicast:
    def test_orthogonal_channels_decouple(self):
        sol = unicast_min_power([1, 0], [0, 1], 1.0, 1.0, 1.0)
        assert sol.power_w == pytest.approx(2.0, rel=1e-10)
        assert np.allclose(np.abs(sol.w_t), [1.0, 0.0], atol=1e-8)
        assert np.allclose(np.abs(sol.w_r), [0.0, 1.0], atol=1e-8)

    def test_zero_target_degenerates_to_single_user(self):
        rng = np.random.default_rng(9)
        h_t, h_r = random_channel_pair(rng)
        sol = unicast_min_power(h_t, h_r, 2.0, 0.0, 0.7)
        _, p_single = single_user_min_power(h_t, 2.0, 0.7)
        assert sol.power_w == pytest.approx(p_single, rel=1e-15)
        assert np.all(sol.w_r == 0.0)

    def test_against_span_oracle_100_instances(self):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(100):
            h_t, h_r = random_channel_pair(rng)
            gamma_t = float(np.exp(rng.uniform(-0.7, 2.3)))
            gamma_r = float(np.exp(rng.uniform(-0.7, 2.3)))
            sigma2 = 1.0
            sol = unicast_min_power(h_t, h_r, gamma_t, gamma_r, sigma2)
            s_t, s_r = unicast_sinrs(h_t, h_r, sol.w_t, sol.w_r, sigma2)
            assert abs(s_t - gamma_t) / gamma_t < 1e-6
            assert abs(s_r - gamma_r) / gamma_r < 1e-6
            ref = unicast_oracle_span(h_t, h_r, gamma_t, gamma_r, sigma2)
            worst = max(worst, abs(db_gap(sol.power_w, ref)))
        assert worst < 0.05, f"worst oracle gap {worst:.4f} dB"

    def test_duality_gap_tiny(self):
        rng = np.random.default_rng(15)
        for _ in range(20):
            h_t, h_r = random_channel_pair(rng)
            a, b, d = pair_stats(h_t, h_r)
            power, q_t, q_r, status, _ = unicast_power_core(
                float(a), float(b), float(abs(d) ** 2), 1.5, 0.8, 0.4
            )
            sol = unicast_min_power(h_t, h_r, 1.5, 0.8, 0.4)
            assert int(status) == 0
            assert sol.power_w == pytest.approx(float(power), rel=1e-8)

    def test_monotone_in_targets(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            h_t, h_r = random_channel_pair(rng)
            g = float(np.exp(rng.uniform(-0.5, 1.5)))
            p1 = unicast_min_power(h_t, h_r, g, g, 1.0).power_w
            p2 = unicast_min_power(h_t, h_r, 1.1 * g, g, 1.0).power_w
            p3 = unicast_min_power(h_t, h_r, g, 1.1 * g, 1.0).power_w
            assert p2 >= p1 and p3 >= p1

    def test_scale_covariance(self):
        rng = np.random.default_rng(27)
        h_t, h_r = random_channel_pair(rng)
        p1 = unicast_min_power(h_t, h_r, 1.3, 0.7, 1.0).power_w
        p2 = unicast_min_power(3.0 * h_t, 3.0 * h_r, 1.3, 0.7, 1.0).power_w
        assert p2 == pytest.approx(p1 / 9.0, rel=1e-8)

    def test_parallel_channels_infeasible(self):
        # parallel channels cannot meet targets with gamma_t*gamma_r > 1
        h = np.array([1.0 + 0.5j, -0.3 + 0.2j])
        with pytest.raises(Infeasible):
            unicast_min_power(h, 2.0 * h, 2.0, 1.5, 1.0)

    def test_batch_matches_scalar_bitwise(self):
        rng = np.random.default_rng(33)
        pairs = [random_channel_pair(rng) for _ in range(64)]
        a = np.array([pair_stats(*p)[0] for p in pairs])
        b = np.array([pair_stats(*p)[1] for p in pairs])
        c = np.array([abs(pair_stats(*p)[2]) ** 2 for p in pairs])
        batch = unicast_power_core(a, b, c, 1.2, 0.9, 0.5)[0]
        for i in range(64):
            single = unicast_power_core(a[i], b[i], c[i], 1.2, 0.9, 0.5)[0]
            assert float(single) == batch[i]


class TestMulticast:
    def test_identical_channels_matched_filter(self):
        sol = multicast_min_power([1, 1], [1, 1], 1.0, 1.0)
        assert sol.power_w == pytest.approx(0.5, rel=1e-12)

    def test_orthogonal_equal_norm(self):
        sol = multicast_min_power([1, 0], [0, 1], 1.0, 1.0)
        assert sol.power_w == pytest.approx(2.0, rel=1e-9)

    def test_zero_target(self):
        sol = multicast_min_power([1, 0], [0, 1], 0.0, 1.0)
        assert sol.power_w == 0.0

    def test_zero_channel_infeasible(self):
        with pytest.raises(Infeasible):
            multicast_min_power(np.zeros(2), np.ones(2), 1.0, 1.0)

    def test_against_dense_grid_oracle_100_instances(self):
        rng = np.random.default_rng(73)
        worst = 0.0
        for _ in range(100):
            h_t, h_r = random_channel_pair(rng)
            gamma = float(np.exp(rng.uniform(-0.7, 2.5)))
            sigma2 = 1.0
            sol = multicast_min_power(h_t, h_r, gamma, sigma2)
            ref = multicast_oracle_dense(h_t, h_r, gamma, sigma2)
            worst = max(worst, abs(db_gap(sol.power_w, ref)))
            # both SNRs clear the target, at least one is tight
            s_t, s_r = multicast_snrs(h_t, h_r, sol.w, sigma2)
            assert min(s_t, s_r) >= gamma * (1.0 - 1e-9)
            assert min(abs(s_t - gamma), abs(s_r - gamma)) / gamma < 1e-6
            # the precoder never leaves span{h_t, h_r}
            basis = np.linalg.qr(np.stack([h_t, h_r], axis=1))[0]
            residual = sol.w - basis @ (basis.conj().T @ sol.w)
            assert np.linalg.norm(residual) <= 1e-9 * np.linalg.norm(sol.w)
        assert worst < 0.02, f"worst oracle gap {worst:.4f} dB"

    def test_parallel_fallback_serves_weaker(self):
        h = np.array([1.0 + 0.2j, 0.4 - 1.0j])
        sol = multicast_min_power(h, 2.0 * np.exp(1j * 0.3) * h, 1.5, 0.8)
        weak = float(np.sum(np.abs(h) ** 2))
        assert sol.power_w == pytest.approx(1.5 * 0.8 / weak, rel=1e-9)

    def test_monotone_and_scale(self):
        rng = np.random.default_rng(81)
        h_t, h_r = random_channel_pair(rng)
        p1 = multicast_min_power(h_t, h_r, 1.0, 1.0).power_w
        p2 = multicast_min_power(h_t, h_r, 1.1, 1.0).power_w
        assert p2 >= p1
        p3 = multicast_min_power(2.0 * h_t, 2.0 * h_r, 1.0, 1.0).power_w
        assert p3 == pytest.approx(p1 / 4.0, rel=1e-9)

    def test_batch_matches_scalar_bitwise(self):
        rng = np.random.default_rng(91)
        pairs = [random_channel_pair(rng) for _ in range(64)]
        stats = [pair_stats(*p) for p in pairs]
        a = np.array([s[0] for s in stats])
        b = np.array([s[1] for s in stats])
        d = np.array([s[2] for s in stats])
        batch = multicast_power_core(a, b, d, 2.0, 0.7)[0]
        for i in range(64):
            single = multicast_power_core(a[i], b[i], d[i], 2.0, 0.7)[0]
            assert float(single) == batch[i]
