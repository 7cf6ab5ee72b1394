"""End-to-end per-frame pipeline: wiring, ablations, determinism."""

import numpy as np
import pytest

from bias import (ConspicuitySet, FrameHistory, FrameRGB, GaborBank,
                  PipelineConfig, StreamState, apply_prior, center_prior,
                  conspicuity_color, conspicuity_intensity,
                  conspicuity_orientation, dynamic_saliency, gwta,
                  master_saliency, process_frame, process_stream,
                  static_feature_set, static_saliency, validate_config)
from bias.core import MAP_DTYPE
from bias.pyramid import level_shapes, resize_to
from bias.synthetic import make_bench_clip, make_pop_out_clip


def gray_clip(n, value=128.0, shape=(256, 256)):
    for _ in range(n):
        yield FrameRGB.from_array(np.full(shape + (3,), value, np.float32))


def compose_pipeline_frame(history, ewma_prev, frame, cfg, bank):
    """Independent re-derivation of one frame from the stage functions."""
    hw = (frame.height, frame.width)
    acc_hw = level_shapes(hw, cfg.pyramid_levels)[cfg.accumulation_scale]
    features = static_feature_set(frame, cfg, bank)
    cons = ConspicuitySet(conspicuity_intensity(features, acc_hw),
                          conspicuity_color(features, acc_hw),
                          conspicuity_orientation(features, acc_hw))
    ss = static_saliency(cons)
    norm_pyr = [lvl * MAP_DTYPE(1.0 / 255.0)
                for lvl in features.intensity_pos_pyramid]
    history.push(norm_pyr)
    ds, _ = dynamic_saliency(history, cfg)
    master_acc = master_saliency(ss, ds, cfg.fusion_weights)
    if cfg.enable_gwta:
        _foci, base = gwta(master_acc, cfg.gwta)
        peak = float(base.max())
        if peak > 1.0:
            base = base / MAP_DTYPE(peak)
    else:
        base = master_acc
    if cfg.enable_center_prior:
        base = apply_prior(base, center_prior(acc_hw[1], acc_hw[0]))
    if cfg.enable_ewma:
        if ewma_prev is None:
            smoothed = base.copy()
        else:
            smoothed = (MAP_DTYPE(cfg.ewma_alpha) * base
                        + MAP_DTYPE(1.0 - cfg.ewma_alpha) * ewma_prev)
        base = smoothed
    return resize_to(base, hw[1], hw[0]), base


class TestFeaturelessInput:
    def test_uniform_gray_video_is_all_zero(self):
        cfg = validate_config(PipelineConfig())
        results = list(process_stream(gray_clip(4), cfg))
        assert len(results) == 4
        for r in results:
            assert r.master_map.max() == 0.0
            assert r.fixation_map.max() == 0.0
            assert r.foci == []


class TestPopOut:
    def test_red_dot_draws_the_first_focus(self):
        cfg = validate_config(PipelineConfig())
        results = list(process_stream(make_pop_out_clip(10), cfg))
        for r in results[2:]:
            h, w = r.master_map.shape
            flat = int(np.argmax(r.master_map))
            assert abs(flat % w - 400) <= 3 and abs(flat // w - 240) <= 3
            assert r.foci, "pop-out frame must yield a focus"
            assert abs(r.foci[0].mu[0] - 400) <= 3
            assert abs(r.foci[0].mu[1] - 240) <= 3

    def test_frames_before_appearance_are_blank(self):
        cfg = validate_config(PipelineConfig())
        results = list(process_stream(make_pop_out_clip(4), cfg))
        assert results[0].fixation_map.max() == 0.0
        assert results[1].fixation_map.max() == 0.0
        assert results[2].fixation_map.max() > 0.0


class TestCompositionOracle:
    @pytest.mark.parametrize("flags", [
        dict(enable_gwta=True, enable_center_prior=True, enable_ewma=True),
        dict(enable_gwta=False, enable_center_prior=True, enable_ewma=True),
        dict(enable_gwta=True, enable_center_prior=False, enable_ewma=False),
        dict(enable_gwta=False, enable_center_prior=False, enable_ewma=False),
    ])
    def test_pipeline_equals_stagewise_composition(self, flags):
        cfg = validate_config(PipelineConfig(threads=1, **flags))
        frames = list(make_bench_clip(4, width=320, height=256))
        results = list(process_stream(frames, cfg))
        bank = GaborBank(cfg.gabor_wavelength, cfg.pyramid_levels)
        history = FrameHistory(cfg.history_capacity)
        ewma_prev = None
        for frame, result in zip(frames, results):
            expected, ewma_prev = compose_pipeline_frame(
                history, ewma_prev if cfg.enable_ewma else None,
                frame, cfg, bank)
            if not cfg.enable_ewma:
                ewma_prev = None
            np.testing.assert_array_equal(result.fixation_map, expected)

    def test_identity_ablation_passes_master_through(self):
        cfg = validate_config(PipelineConfig(
            enable_gwta=False, enable_center_prior=False, enable_ewma=False))
        results = list(process_stream(make_bench_clip(3, width=320, height=256), cfg))
        for r in results:
            np.testing.assert_array_equal(r.fixation_map, r.master_map)
            assert r.foci == []

    def test_static_only_weights_reproduce_static_path(self):
        cfg = validate_config(PipelineConfig(
            fusion_weights=(0.0, 1.0, 0.0), enable_gwta=False,
            enable_center_prior=False, enable_ewma=False))
        frames = list(make_bench_clip(2, width=320, height=256))
        results = list(process_stream(frames, cfg))
        bank = GaborBank(cfg.gabor_wavelength, cfg.pyramid_levels)
        hw = (256, 320)
        acc_hw = level_shapes(hw, cfg.pyramid_levels)[cfg.accumulation_scale]
        for frame, result in zip(frames, results):
            features = static_feature_set(frame, cfg, bank)
            cons = ConspicuitySet(conspicuity_intensity(features, acc_hw),
                                  conspicuity_color(features, acc_hw),
                                  conspicuity_orientation(features, acc_hw))
            ss = static_saliency(cons)
            expected = master_saliency(ss, np.zeros(acc_hw, np.float32),
                                       cfg.fusion_weights)
            np.testing.assert_array_equal(
                result.master_map, resize_to(expected, hw[1], hw[0]))

    def test_disabling_ewma_removes_history_dependence(self):
        frames = list(make_bench_clip(4, width=320, height=256))
        on = list(process_stream(frames, validate_config(
            PipelineConfig(enable_ewma=True))))
        off = list(process_stream(frames, validate_config(
            PipelineConfig(enable_ewma=False))))
        np.testing.assert_array_equal(on[0].fixation_map, off[0].fixation_map)
        assert not np.array_equal(on[2].fixation_map, off[2].fixation_map)


class TestDeterminism:
    def test_same_clip_twice_is_bit_identical(self):
        cfg = validate_config(PipelineConfig())
        a = list(process_stream(make_bench_clip(6, width=320, height=256), cfg))
        b = list(process_stream(make_bench_clip(6, width=320, height=256), cfg))
        for ra, rb in zip(a, b):
            np.testing.assert_array_equal(ra.fixation_map, rb.fixation_map)
            np.testing.assert_array_equal(ra.master_map, rb.master_map)
            assert [f.mu for f in ra.foci] == [f.mu for f in rb.foci]

    @pytest.mark.parametrize("threads", [2, 4, 8])
    def test_thread_count_invariance(self, threads):
        frames = list(make_bench_clip(5, width=320, height=256))
        base = list(process_stream(frames, validate_config(
            PipelineConfig(threads=1))))
        other = list(process_stream(frames, validate_config(
            PipelineConfig(threads=threads))))
        for ra, rb in zip(base, other):
            np.testing.assert_array_equal(ra.fixation_map, rb.fixation_map)
            np.testing.assert_array_equal(ra.master_map, rb.master_map)
            np.testing.assert_array_equal(ra.static_map, rb.static_map)
            np.testing.assert_array_equal(ra.dynamic_map, rb.dynamic_map)
            assert [f.mu for f in ra.foci] == [f.mu for f in rb.foci]


class TestConfigVariants:
    @pytest.mark.parametrize("overrides", [
        dict(center_scales=(2, 3, 4), deltas=(3, 4)),      # multi-scale grid
        dict(center_scales=(2, 3, 4), deltas=(1, 2, 3, 4)),
        dict(center_scales=(2,), deltas=(1,)),             # sharpest pair
        dict(tau_set=(1, 3, 5, 7)),                        # alternate offsets
        dict(pyramid_levels=6, deltas=(4,)),
    ])
    def test_variant_runs_clean_and_deterministic(self, overrides):
        cfg = validate_config(PipelineConfig(**overrides))
        frames = list(make_bench_clip(4, 320, 256))
        a = list(process_stream(frames, cfg))
        b = list(process_stream(frames, cfg))
        for ra, rb in zip(a, b):
            assert np.isfinite(ra.fixation_map).all()
            assert 0.0 <= float(ra.master_map.min())
            assert float(ra.master_map.max()) <= 1.0 + 1e-6
            np.testing.assert_array_equal(ra.fixation_map, rb.fixation_map)


class TestStreamContract:
    def test_empty_source_yields_nothing(self):
        cfg = validate_config(PipelineConfig())
        assert list(process_stream([], cfg)) == []

    def test_result_count_and_indices(self):
        cfg = validate_config(PipelineConfig())
        results = list(process_stream(make_bench_clip(5, 320, 256), cfg))
        assert [r.frame_index for r in results] == list(range(5))

    def test_warm_up_offsets_grow_with_history(self):
        cfg = validate_config(PipelineConfig(tau_set=(1, 3)))
        results = list(process_stream(make_bench_clip(5, 320, 256), cfg))
        assert [r.taus_used for r in results] == [[], [1], [1], [1, 3], [1, 3]]

    def test_dimension_change_mid_stream_rejected(self):
        cfg = validate_config(PipelineConfig())
        frames = [next(iter(make_bench_clip(1, 320, 256))),
                  next(iter(make_bench_clip(1, 640, 480)))]
        with pytest.raises(ValueError, match="dimensions changed"):
            list(process_stream(frames, cfg))

    def test_source_errors_carry_frame_index(self):
        cfg = validate_config(PipelineConfig())

        def broken():
            yield from make_bench_clip(2, 320, 256)
            raise IOError("disk on fire")

        with pytest.raises(RuntimeError, match="failed to read frame 2"):
            list(process_stream(broken(), cfg))

    def test_frame_too_small_for_pyramid_rejected(self):
        cfg = validate_config(PipelineConfig())
        small = FrameRGB.from_array(np.zeros((100, 100, 3), np.float32))
        with pytest.raises(ValueError, match="too small"):
            list(process_stream([small], cfg))

    def test_result_maps_are_unit_range_at_frame_resolution(self):
        cfg = validate_config(PipelineConfig())
        for r in process_stream(make_bench_clip(4, 320, 256), cfg):
            for m in (r.static_map, r.dynamic_map, r.master_map, r.fixation_map):
                assert m.shape == (256, 320)
                assert float(m.min()) >= 0.0
                assert float(m.max()) <= 1.0 + 1e-6
            assert set(r.timings) == {"static", "motion", "fusion",
                                      "fixation", "total"}
            assert all(v >= 0.0 for v in r.timings.values())

    def test_foci_are_in_frame_coordinates(self):
        cfg = validate_config(PipelineConfig())
        results = list(process_stream(make_pop_out_clip(5), cfg))
        focus = results[-1].foci[0]
        assert 0 <= focus.mu[0] < 640 and 0 <= focus.mu[1] < 480
        assert focus.mu[0] > 160  # beyond the native accumulation grid

    def test_odd_frame_dimensions_are_supported(self):
        cfg = validate_config(PipelineConfig())
        frames = [FrameRGB.from_array(
            np.random.default_rng(t).random((377, 501, 3)).astype(np.float32) * 255)
            for t in range(3)]
        results = list(process_stream(frames, cfg))
        for r in results:
            assert r.master_map.shape == (377, 501)
            assert np.isfinite(r.fixation_map).all()

    def test_independent_streams_do_not_share_state(self):
        """Interleaving two streams gives the same results as running each
        alone: histories and smoothers are fully per-stream."""
        cfg = validate_config(PipelineConfig())
        clip_a = list(make_bench_clip(4, 320, 256, seed=1))
        clip_b = list(make_bench_clip(4, 320, 256, seed=2))
        solo_a = list(process_stream(clip_a, cfg))
        solo_b = list(process_stream(clip_b, cfg))
        with StreamState(cfg) as sa, StreamState(cfg) as sb:
            for fa, fb, ra, rb in zip(clip_a, clip_b, solo_a, solo_b):
                ia = process_frame(sa, fa)
                ib = process_frame(sb, fb)
                np.testing.assert_array_equal(ia.fixation_map, ra.fixation_map)
                np.testing.assert_array_equal(ib.fixation_map, rb.fixation_map)

    def test_stream_state_restores_kernel_thread_setting(self):
        import cv2
        before = cv2.getNumThreads()
        with StreamState(validate_config(PipelineConfig(threads=3))) as state:
            frame = next(iter(make_bench_clip(1, 320, 256)))
            process_frame(state, frame)
            assert cv2.getNumThreads() == 3
        assert cv2.getNumThreads() == before
