"""Normalization algebra, conspicuity accumulation, and master fusion."""

import numpy as np
import pytest

from bias import (ConspicuitySet, FrameRGB, PipelineConfig, conspicuity_color,
                  conspicuity_intensity, conspicuity_orientation,
                  master_saliency, normalize_map, static_saliency,
                  static_feature_set, validate_config)
from bias.pyramid import across_scale_sum, level_shapes, resize_to


def peaky_map(shape=(32, 48), peaks=((10, 8, 10.0), (20, 30, 4.0), (5, 40, 2.0))):
    m = np.zeros(shape, np.float32)
    for y, x, v in peaks:
        m[y, x] = v
    return m


class TestNormalizeMap:
    def test_constant_map_normalizes_to_zero(self):
        out = normalize_map(np.full((16, 16), 5.0, np.float32))
        np.testing.assert_array_equal(out, 0.0)

    def test_zero_map_stays_zero(self):
        out = normalize_map(np.zeros((16, 16), np.float32))
        np.testing.assert_array_equal(out, 0.0)

    def test_peer_maxima_mean_hand_example(self):
        """Peaks {10, 4, 2}: peers average 3, factor (10-3)^2/10 = 4.9."""
        m = peaky_map()
        out = normalize_map(m)
        assert out[10, 8] == pytest.approx(49.0, rel=1e-6)
        assert out[20, 30] == pytest.approx(4.9 * 4.0, rel=1e-6)

    def test_single_isolated_peak_gets_full_boost(self):
        # lone peak: peer mean 0, factor (M-0)^2/M = M, peak maps to M^2
        m = np.zeros((16, 16), np.float32)
        m[8, 8] = 7.0
        out = normalize_map(m)
        assert out[8, 8] == pytest.approx(49.0, rel=1e-6)

    def test_degree_two_homogeneity(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            m = rng.random((24, 32)).astype(np.float32)
            base = normalize_map(m)
            for k in (0.5, 2.0, 10.0):
                scaled = normalize_map((k * m).astype(np.float32))
                np.testing.assert_allclose(scaled, k * k * base, rtol=1e-5)

    def test_argmax_preserved(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            m = rng.random((24, 32)).astype(np.float32)
            out = normalize_map(m)
            assert np.argmax(out) == np.argmax(m)

    def test_pop_out_beats_many_equal_peaks(self):
        lone = np.zeros((32, 32), np.float32)
        lone[16, 16] = 1.0
        lone[4, 4] = lone[4, 28] = lone[28, 4] = 0.1
        crowd = np.zeros((32, 32), np.float32)
        for y in (4, 16, 28):
            for x in (4, 16, 28):
                crowd[y, x] = 1.0
        factor_lone = normalize_map(lone)[16, 16] / lone[16, 16]
        factor_crowd = normalize_map(crowd)[16, 16] / crowd[16, 16]
        assert factor_lone > factor_crowd

    def test_wide_maps_use_downsampled_peer_search(self):
        """Stability clause: peers are found on a ~64-wide resample."""
        m = np.zeros((60, 128), np.float32)
        m[30, 64] = 10.0
        out = normalize_map(m)
        assert np.argmax(out) == np.argmax(m)
        assert out.max() > 0


def features_for(frame_arr, cfg):
    return static_feature_set(FrameRGB.from_array(frame_arr), cfg)


class TestConspicuities:
    def setup_method(self):
        self.cfg = validate_config(PipelineConfig(center_scales=(1, 2),
                                                  deltas=(2,),
                                                  pyramid_levels=4))
        self.hw = (64, 64)
        self.target = level_shapes(self.hw, 4)[1]

    def test_featureless_frame_gives_zero_conspicuities(self):
        cfg = validate_config(PipelineConfig())
        gray = np.full((256, 256, 3), 127.0, np.float32)
        features = features_for(gray, cfg)
        target = level_shapes((256, 256), cfg.pyramid_levels)[2]
        assert conspicuity_intensity(features, target).max() == 0.0
        assert conspicuity_color(features, target).max() <= 1e-4
        assert conspicuity_orientation(features, target).max() <= 1e-4

    def test_single_intensity_term_collapses(self):
        class FakeFeatures:
            intensity = {}
        rng = np.random.default_rng(31)
        x = rng.random((16, 16)).astype(np.float32)
        FakeFeatures.intensity[(1, 3)] = (x, np.zeros_like(x))
        out = conspicuity_intensity(FakeFeatures, (32, 32))
        np.testing.assert_allclose(out, resize_to(normalize_map(x), 32, 32),
                                   rtol=1e-6, atol=1e-7)

    def test_single_color_term_collapses(self):
        class FakeFeatures:
            color = {}
        rng = np.random.default_rng(32)
        x = rng.random((16, 16)).astype(np.float32)
        zeros = np.zeros_like(x)
        FakeFeatures.color[(1, 3)] = (x, zeros, zeros, zeros)
        out = conspicuity_color(FakeFeatures, (16, 16))
        np.testing.assert_allclose(out, normalize_map(x), rtol=1e-6, atol=1e-7)

    def test_intensity_accumulation_matches_naive_oracle(self):
        rng = np.random.default_rng(3)
        frame = (rng.random(self.hw + (3,)) * 255).astype(np.float32)
        features = features_for(frame, self.cfg)
        out = conspicuity_intensity(features, self.target)
        terms = []
        for (c, s) in sorted(features.intensity):
            on, off = features.intensity[(c, s)]
            terms.append(normalize_map(on))
            terms.append(normalize_map(off))
        oracle = np.zeros(self.target, np.float32)
        for t in terms:
            oracle = oracle + resize_to(t, self.target[1], self.target[0])
        np.testing.assert_allclose(out, oracle, rtol=1e-6, atol=1e-6)

    def test_color_accumulation_matches_naive_oracle(self):
        rng = np.random.default_rng(4)
        frame = (rng.random(self.hw + (3,)) * 255).astype(np.float32)
        features = features_for(frame, self.cfg)
        out = conspicuity_color(features, self.target)
        oracle = np.zeros(self.target, np.float32)
        for (c, s) in sorted(features.color):
            for m in features.color[(c, s)]:
                oracle = oracle + resize_to(normalize_map(m),
                                            self.target[1], self.target[0])
        np.testing.assert_allclose(out, oracle, rtol=1e-6, atol=1e-6)

    def test_red_dot_on_green_field_pops_in_color(self):
        cfg = validate_config(PipelineConfig())
        frame = np.zeros((256, 256, 3), np.float32)
        frame[..., 1] = 160.0
        frame[120:132, 176:188, 0] = 230.0
        frame[120:132, 176:188, 1] = 20.0
        features = features_for(frame, cfg)
        target = level_shapes((256, 256), cfg.pyramid_levels)[2]
        cbar = conspicuity_color(features, target)
        peak = np.unravel_index(np.argmax(cbar), cbar.shape)
        assert abs(peak[0] - 126 / 4) <= 2 and abs(peak[1] - 182 / 4) <= 2

    def test_orientation_double_normalization_matches_oracle(self):
        rng = np.random.default_rng(5)
        frame = (rng.random(self.hw + (3,)) * 255).astype(np.float32)
        features = features_for(frame, self.cfg)
        out = conspicuity_orientation(features, self.target)
        oracle = np.zeros(self.target, np.float32)
        for oi in range(4):
            inner = [normalize_map(features.orientation[(c, s, o)])
                     for (c, s, o) in sorted(features.orientation) if o == oi]
            oracle = oracle + normalize_map(across_scale_sum(inner, self.target))
        np.testing.assert_allclose(out, oracle, rtol=1e-6, atol=1e-6)

    def test_single_orientation_term_collapses_to_double_normalization(self):
        class FakeFeatures:
            orientation = {}
        rng = np.random.default_rng(6)
        x = rng.random((16, 16)).astype(np.float32)
        FakeFeatures.orientation[(1, 3, 2)] = x
        out = conspicuity_orientation(FakeFeatures, (16, 16))
        np.testing.assert_allclose(out, normalize_map(normalize_map(x)),
                                   rtol=1e-6)


class TestStaticSaliency:
    def test_all_zero_conspicuities(self):
        z = np.zeros((16, 16), np.float32)
        out = static_saliency(ConspicuitySet(z, z.copy(), z.copy()))
        np.testing.assert_array_equal(out, 0.0)

    def test_single_channel_is_third_of_normalized(self):
        m = peaky_map((16, 16), ((8, 8, 2.0), (3, 12, 1.0)))
        z = np.zeros((16, 16), np.float32)
        out = static_saliency(ConspicuitySet(m, z, z.copy()))
        np.testing.assert_allclose(out, normalize_map(m) / 3.0, rtol=1e-6)

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(7)
        i, c, o = (rng.random((16, 16)).astype(np.float32) for _ in range(3))
        out = static_saliency(ConspicuitySet(i, c, o))
        oracle = (normalize_map(i) + normalize_map(c) + normalize_map(o)) / 3.0
        np.testing.assert_allclose(out, oracle, rtol=1e-6)


class TestMasterSaliency:
    def test_zero_dynamic_leaves_scaled_static_term(self):
        ss = peaky_map((16, 16), ((8, 8, 1.0), (2, 2, 0.4)))
        ds = np.zeros((16, 16), np.float32)
        out = master_saliency(ss, ds, (1.0, 0.3, 0.3))
        expected = 0.3 * normalize_map(ss)
        np.testing.assert_allclose(out, expected / expected.max(), rtol=1e-6)

    def test_static_only_weights(self):
        rng = np.random.default_rng(8)
        ss = rng.random((16, 16)).astype(np.float32)
        ds = rng.random((16, 16)).astype(np.float32)
        out = master_saliency(ss, ds, (0.0, 1.0, 0.0))
        n = normalize_map(ss)
        np.testing.assert_allclose(out, n / n.max(), rtol=1e-6)

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(9)
        ss = rng.random((16, 16)).astype(np.float32)
        ds = rng.random((16, 16)).astype(np.float32)
        out = master_saliency(ss, ds, (1.0, 0.3, 0.3))
        raw = (1.0 * normalize_map(ss * ds) + 0.3 * normalize_map(ss)
               + 0.3 * normalize_map(ds))
        np.testing.assert_allclose(out, raw / raw.max(), rtol=1e-6)

    def test_output_in_unit_range(self):
        rng = np.random.default_rng(10)
        ss = rng.random((16, 16)).astype(np.float32) * 40
        ds = rng.random((16, 16)).astype(np.float32) * 7
        out = master_saliency(ss, ds, (1.0, 0.3, 0.3))
        assert out.min() >= 0.0
        assert out.max() == pytest.approx(1.0)

    def test_zero_iff_both_zero(self):
        z = np.zeros((8, 8), np.float32)
        out = master_saliency(z, z.copy(), (1.0, 0.3, 0.3))
        np.testing.assert_array_equal(out, 0.0)
        ss = peaky_map((8, 8), ((4, 4, 1.0), (1, 6, 0.3)))
        assert master_saliency(ss, z.copy(), (1.0, 0.3, 0.3)).max() > 0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            master_saliency(np.zeros((4, 4), np.float32),
                            np.zeros((8, 8), np.float32), (1, 0.3, 0.3))
