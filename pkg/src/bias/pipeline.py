"""Per-frame orchestration of the full saliency pipeline.

For every frame: static channels fan out into feature maps and collapse
into conspicuities and a static map; the intensity pyramid joins the
frame history and drives the motion channel into a dynamic map; the two
fuse into the master map, which the fixation stage turns into Gaussian
foci, applies the center prior to, and smooths over time.

One StreamState per video stream holds all mutable state (frame history,
smoother, frame counter).  cfg.threads is the stream's CPU budget and is
handed to the filtering kernels' internal row-parallelism, which profiles
far ahead of Python-level task pools for sub-millisecond tasks; the stage
fan-outs still accept a caller-supplied executor and reduce in a fixed
order, so results are bit-identical for any thread count either way.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import cv2
import numpy as np

from .core import MAP_DTYPE, FrameRGB, PipelineConfig, pmap, validate_config
from .fixation import EwmaState, GaussianFocus, apply_prior, center_prior, ewma_step, gwta
from .fusion import (ConspicuitySet, conspicuity_color, conspicuity_intensity,
                     conspicuity_orientation, master_saliency, static_saliency)
from .motion import FrameHistory, dynamic_saliency
from .pyramid import level_shapes, resize_to
from .static_channels import GaborBank, static_feature_set


@dataclass
class FrameResult:
    """Everything the pipeline produced for one frame.

    All maps are at frame resolution with values in [0, 1]; static_map and
    dynamic_map are peak-normalized copies for inspection, master_map and
    fixation_map are the actual pipeline products.  ``taus_used`` lists the
    temporal offsets that had history available (empty during warm-up).
    """

    frame_index: int
    static_map: np.ndarray
    dynamic_map: np.ndarray
    master_map: np.ndarray
    fixation_map: np.ndarray
    foci: list[GaussianFocus] = field(default_factory=list)
    taus_used: list[int] = field(default_factory=list)
    timings: dict = field(default_factory=dict)


class StreamState:
    """Mutable per-stream state; single writer, frames strictly in order.

    Opening a stream points the filtering kernels' thread pool at the
    stream's CPU budget (a process-global setting, restored on close;
    concurrent streams share whichever budget was set last).  An executor
    assigned to ``state.executor`` is used for the stage fan-outs instead.
    """

    def __init__(self, cfg: PipelineConfig):
        self.cfg = validate_config(cfg)
        self.bank = GaborBank(cfg.gabor_wavelength, cfg.pyramid_levels)
        self.history = FrameHistory(cfg.history_capacity)
        self.ewma = EwmaState()
        self.frame_index = 0
        self.frame_hw: tuple[int, int] | None = None
        self._prior: np.ndarray | None = None
        self.executor = None
        self._saved_cv_threads = cv2.getNumThreads()
        cv2.setNumThreads(cfg.threads)

    def prior(self, hw: tuple[int, int]) -> np.ndarray:
        if self._prior is None or self._prior.shape != hw:
            self._prior = center_prior(hw[1], hw[0])
        return self._prior

    def close(self) -> None:
        if self._saved_cv_threads is not None:
            cv2.setNumThreads(self._saved_cv_threads)
            self._saved_cv_threads = None

    def __enter__(self) -> "StreamState":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _peak_normalized(m: np.ndarray) -> np.ndarray:
    peak = float(m.max())
    return m / MAP_DTYPE(peak) if peak > 0.0 else m


def process_frame(state: StreamState, frame: FrameRGB) -> FrameResult:
    """Run the full pipeline on the next frame of the stream.

    Frame dimensions must stay constant within a stream; range and
    finiteness are validated on the first frame (8-bit-decoded sources
    cannot violate them later).  The first frame has no motion history, so
    its dynamic map is zero and the master map is driven by the static
    channels alone.
    """
    cfg = state.cfg
    hw = (frame.height, frame.width)
    if state.frame_hw is None:
        frame.validate(min_side=2 ** cfg.pyramid_levels)
        state.frame_hw = hw
    elif hw != state.frame_hw:
        raise ValueError(
            f"frame {state.frame_index}: dimensions changed "
            f"{state.frame_hw} -> {hw}"
        )
    ex = state.executor
    acc_hw = level_shapes(hw, cfg.pyramid_levels)[cfg.accumulation_scale]
    timings: dict[str, float] = {}
    t_start = time.perf_counter()

    # Static channels -> conspicuities -> static saliency.
    features = static_feature_set(frame, cfg, state.bank, ex)
    cons_maps = pmap(ex, lambda fn: fn(features, acc_hw),
                     [conspicuity_intensity, conspicuity_color,
                      conspicuity_orientation])
    cons = ConspicuitySet(*cons_maps)
    ss = static_saliency(cons)
    t_static = time.perf_counter()
    timings["static"] = t_static - t_start

    # Motion channel on the [0, 1] intensity pyramid.
    norm_pyr = [lvl * MAP_DTYPE(1.0 / 255.0)
                for lvl in features.intensity_pos_pyramid]
    state.history.push(norm_pyr)
    ds, taus_used = dynamic_saliency(state.history, cfg, ex)
    t_motion = time.perf_counter()
    timings["motion"] = t_motion - t_static

    # Fusion at the accumulation scale (the master map's native grid).
    master_acc = master_saliency(ss, ds, cfg.fusion_weights)
    t_fusion = time.perf_counter()
    timings["fusion"] = t_fusion - t_motion

    # Fixation prediction, still on the native grid.
    if cfg.enable_gwta:
        foci_acc, fixation_base = gwta(master_acc, cfg.gwta)
        peak = float(fixation_base.max())
        if peak > 1.0:  # overlapping foci can stack past the input ceiling
            fixation_base = fixation_base / MAP_DTYPE(peak)
    else:
        foci_acc, fixation_base = [], master_acc
    if cfg.enable_center_prior:
        fixation = apply_prior(fixation_base, state.prior(acc_hw))
    else:
        fixation = fixation_base
    if cfg.enable_ewma:
        state.ewma, fixation = ewma_step(state.ewma, fixation, cfg.ewma_alpha)
    t_fix = time.perf_counter()
    timings["fixation"] = t_fix - t_fusion

    # Outputs at frame resolution; foci move to frame coordinates.
    scale_x = hw[1] / acc_hw[1]
    scale_y = hw[0] / acc_hw[0]
    result = FrameResult(
        frame_index=state.frame_index,
        static_map=_peak_normalized(resize_to(ss, hw[1], hw[0])),
        dynamic_map=_peak_normalized(resize_to(ds, hw[1], hw[0])),
        master_map=resize_to(master_acc, hw[1], hw[0]),
        fixation_map=resize_to(fixation, hw[1], hw[0]),
        foci=[f.scaled(scale_x, scale_y) for f in foci_acc],
        taus_used=taus_used,
        timings=timings,
    )
    timings["total"] = time.perf_counter() - t_start
    state.frame_index += 1
    return result


def process_stream(source, cfg: PipelineConfig):
    """Process frames strictly in order, yielding one FrameResult each.

    Errors raised while reading the source are re-raised with the frame
    index attached.
    """
    with StreamState(cfg) as state:
        it = iter(source)
        index = 0
        while True:
            try:
                frame = next(it)
            except StopIteration:
                return
            except Exception as exc:
                raise RuntimeError(f"failed to read frame {index}: {exc}") from exc
            yield process_frame(state, frame)
            index += 1
