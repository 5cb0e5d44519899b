import numpy as np
import pytest

from starsim.channel import (
    ChannelSet,
    FadingParams,
    Geometry,
    dbm_to_watts,
    generate_channel_set,
    path_loss_linear,
    watts_to_dbm,
)


class TestGeometry:
    def test_defaults_valid(self):
        g = Geometry()
        assert g.d_ap_ris() == pytest.approx(50.0)
        assert g.d_ris_user_t() == pytest.approx(3.0)
        assert g.d_ris_user_r() == pytest.approx(np.sqrt(13.0))

    def test_same_side_users_rejected(self):
        with pytest.raises(ValueError):
            Geometry(user_t_pos=(47.0, -2.0))  # both on the AP side

    def test_ap_must_be_reflection_side(self):
        with pytest.raises(ValueError):
            Geometry(ap_pos=(60.0, 0.0))

    def test_user_on_surface_plane_rejected(self):
        with pytest.raises(ValueError):
            Geometry(user_t_pos=(50.0, 1.0))

    def test_coincident_nodes_rejected(self):
        with pytest.raises(ValueError):
            Geometry(user_r_pos=(0.0, 0.0))


class TestPathLoss:
    def test_reference_distance(self):
        assert path_loss_linear(1.0, FadingParams()) == 10.0 ** -3.0

    def test_decade(self):
        got = path_loss_linear(10.0, FadingParams())
        assert got == pytest.approx(10.0 ** -5.2, rel=1e-12)

    def test_db_domain_recomputation(self):
        got = path_loss_linear(50.0, FadingParams())
        want = 10.0 ** ((-30.0 - 22.0 * np.log10(50.0)) / 10.0)
        assert got == pytest.approx(want, rel=1e-12)

    def test_nonpositive_distance(self):
        with pytest.raises(ValueError):
            path_loss_linear(0.0, FadingParams())
        with pytest.raises(ValueError):
            path_loss_linear(-1.0, FadingParams())


class TestDbmConversions:
    def test_round_trip(self):
        for dbm in (-90.0, -30.0, 0.0, 17.3):
            assert watts_to_dbm(dbm_to_watts(dbm)) == pytest.approx(dbm, abs=1e-12)

    def test_noise_power(self):
        assert FadingParams(noise_dbm=-90.0).sigma2_w == pytest.approx(1e-12, rel=1e-12)


class TestGenerateChannelSet:
    def test_shapes_and_noise(self):
        ch = generate_channel_set(Geometry(), FadingParams(), 6, 2, seed=1)
        assert ch.G.shape == (6, 2)
        assert ch.v_t.shape == (6,)
        assert ch.v_r.shape == (6,)
        assert ch.sigma2 == pytest.approx(1e-12, rel=1e-12)
        assert ch.m_elements == 6 and ch.n_antennas == 2

    def test_same_seed_bit_identical(self):
        a = generate_channel_set(Geometry(), FadingParams(), 8, 2, seed=99)
        b = generate_channel_set(Geometry(), FadingParams(), 8, 2, seed=99)
        assert np.array_equal(a.G, b.G)
        assert np.array_equal(a.v_t, b.v_t)
        assert np.array_equal(a.v_r, b.v_r)
        assert a.digest() == b.digest()

    def test_distinct_seeds_differ(self):
        a = generate_channel_set(Geometry(), FadingParams(), 8, 2, seed=1)
        b = generate_channel_set(Geometry(), FadingParams(), 8, 2, seed=2)
        assert not np.array_equal(a.G, b.G)
        assert a.digest() != b.digest()

    def test_los_only_limit_exact(self):
        params = FadingParams(rician_k=1e12)
        geometry = Geometry()
        ch = generate_channel_set(geometry, params, 5, 2, seed=3)
        g_ap = path_loss_linear(geometry.d_ap_ris(), params)
        g_t = path_loss_linear(geometry.d_ris_user_t(), params)
        assert np.all(np.abs(ch.G) == np.sqrt(g_ap))
        assert np.all(np.abs(ch.v_t) == np.sqrt(g_t))

    def test_rayleigh_second_moment(self):
        # 1e5 samples of one link entry: the sample mean of |entry|^2 must
        # land within three standard errors of the path gain
        geometry = Geometry()
        params = FadingParams(rician_k=0.0)
        ch = generate_channel_set(geometry, params, 100_000, 1, seed=7)
        gain = path_loss_linear(geometry.d_ris_user_t(), params)
        samples = np.abs(ch.v_t) ** 2
        se = gain / np.sqrt(samples.size)  # |entry|^2 is exponential: std = mean
        assert abs(np.mean(samples) - gain) < 3.0 * se

    def test_mean_power_matches_gain_for_positive_k(self):
        geometry = Geometry()
        params = FadingParams(rician_k=1.0)
        ch = generate_channel_set(geometry, params, 100_000, 1, seed=11)
        gain = path_loss_linear(geometry.d_ris_user_t(), params)
        samples = np.abs(ch.v_t) ** 2
        # var(|entry|^2) = gain^2 * (1 + 2K) / (1 + K)^2 for Rician fading
        se = gain * np.sqrt(3.0) / 2.0 / np.sqrt(samples.size)
        assert abs(np.mean(samples) - gain) < 3.0 * se

    def test_arrays_read_only(self):
        ch = generate_channel_set(Geometry(), FadingParams(), 4, 2, seed=5)
        with pytest.raises(ValueError):
            ch.G[0, 0] = 0.0

    def test_bad_sizes(self):
        with pytest.raises(ValueError):
            generate_channel_set(Geometry(), FadingParams(), 0, 2, seed=1)
        with pytest.raises(ValueError):
            ChannelSet(np.ones((3, 2)), np.ones(3), np.ones(3), sigma2=0.0)
