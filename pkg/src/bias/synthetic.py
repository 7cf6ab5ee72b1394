"""Deterministic synthetic clips for benchmarks, demos, and tests."""

from __future__ import annotations

import numpy as np

from .core import FrameRGB


def _disk(canvas: np.ndarray, cx: float, cy: float, radius: float, color) -> None:
    h, w = canvas.shape[:2]
    y, x = np.ogrid[:h, :w]
    mask = (x - cx) ** 2 + (y - cy) ** 2 <= radius ** 2
    canvas[mask] = color


def make_bench_clip(n_frames: int, width: int = 640, height: int = 480,
                    seed: int = 0):
    """Moving bright disk plus a static red disk on a gray field.

    Exercises the intensity, color, orientation, and motion channels with
    a scene whose focus count stays small.  Deterministic for a seed.
    """
    rng = np.random.default_rng(seed)
    phase = rng.uniform(0.0, 2 * np.pi)
    for t in range(n_frames):
        canvas = np.full((height, width, 3), 96.0, dtype=np.float32)
        _disk(canvas, 0.3 * width, 0.42 * height, 0.035 * width, (200.0, 30.0, 30.0))
        angle = phase + 2 * np.pi * t / 120.0
        cx = width * (0.62 + 0.18 * np.cos(angle))
        cy = height * (0.5 + 0.3 * np.sin(angle))
        _disk(canvas, cx, cy, 0.025 * width, (250.0, 250.0, 250.0))
        yield FrameRGB.from_array(canvas)


def make_pop_out_clip(n_frames: int, width: int = 640, height: int = 480,
                      dot_xy: tuple[int, int] = (400, 240),
                      dot_radius: float = 3.0, appear_at: int = 2):
    """Uniform gray frames; a small red dot appears at ``appear_at``."""
    for t in range(n_frames):
        canvas = np.full((height, width, 3), 128.0, dtype=np.float32)
        if t >= appear_at:
            _disk(canvas, dot_xy[0], dot_xy[1], dot_radius, (255.0, 0.0, 0.0))
        yield FrameRGB.from_array(canvas)


def drifting_grating(n_frames: int, width: int = 128, height: int = 96,
                     period: float = 16.0, px_per_frame: float = 1.0,
                     contrast: float = 100.0, mean: float = 128.0):
    """Vertical sinusoidal grating drifting rightward, as gray maps in [0, 255]."""
    x = np.arange(width, dtype=np.float64)
    for t in range(n_frames):
        row = mean + contrast * np.sin(2 * np.pi * (x - px_per_frame * t) / period)
        yield np.tile(row.astype(np.float32), (height, 1))


def stepping_grating(n_frames: int, width: int = 64, height: int = 48,
                     period: float = 8.0, step_every: int = 7):
    """Vertical grating that jumps one pixel right every ``step_every`` frames.

    Values already in [0, 1]; feed directly to the motion detector.  The
    sinusoidal profile makes the detector's match quality fall off with
    displacement, so the response peaks at the temporal offset closest to
    the step cadence.
    """
    x = np.arange(width, dtype=np.float64)
    for t in range(n_frames):
        shift = t // step_every
        row = 0.5 + 0.4 * np.sin(2 * np.pi * (x - shift) / period)
        yield np.tile(row.astype(np.float32), (height, 1))
