"""Static feature channels: intensity, color opponents, and orientation.

Intensity follows the BT.601 luma weights with an inverted twin so both
bright-on-dark and dark-on-bright structure can pop out.  Color uses four
broadly tuned opponent channels (red, green, blue, yellow).  Orientation
responses come from complex Gabor filters evaluated as two 1D passes per
axis; the factored form is exactly equivalent to convolving with the full
2D kernel because the kernel is an outer product of its axis profiles.

The filter kernels are mean-subtracted so a uniform input produces an
exactly zero response; without that, support truncation (and especially
the long-wavelength variants used at coarse scales) leaks a DC term that
would register featureless regions as oriented structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from .core import MAP_DTYPE, FrameRGB, PipelineConfig, pmap
from .pyramid import across_scale_diff, build_pyramid, reduce_once

#: Pyramid level whose features are reused (with stretched wavelength and
#: extra decimation) for every coarser level.
GABOR_REUSE_LEVEL = 5

ORIENTATIONS = (0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 4)


def intensity_channels(frame: FrameRGB) -> tuple[np.ndarray, np.ndarray]:
    """BT.601 luma and its inversion, both in [0, 255]."""
    pos = 0.299 * frame.r + 0.587 * frame.g + 0.114 * frame.b
    pos = pos.astype(MAP_DTYPE, copy=False)
    return pos, (255.0 - pos).astype(MAP_DTYPE, copy=False)


def color_channels(frame: FrameRGB):
    """Opponent channels (red, green, blue, yellow); values may be negative.

    Each primary opposes the mean of the other two; yellow opposes blue
    with the shared part of red and green, (r+g)/2 - |r-g|/2, which is
    exactly min(r, g).  Rectification happens later in the feature-map
    stage so that polarity survives the center-surround step.
    """
    r, g, b = frame.r, frame.g, frame.b
    half_sum = MAP_DTYPE(0.5) * (r + g + b)
    red = MAP_DTYPE(1.5) * r - half_sum
    green = MAP_DTYPE(1.5) * g - half_sum
    blue = MAP_DTYPE(1.5) * b - half_sum
    yellow = np.minimum(r, g) - b
    return red, green, blue, yellow


# ---------------------------------------------------------------------------
# Separable complex Gabor filtering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _AxisKernels:
    """1D factors of one 2D Gabor kernel plus its DC term.

    h_* runs along image rows (x axis), v_* along columns (y axis); the
    imaginary part is None for an axis whose carrier component vanishes.
    ``dc`` is the mean of the 2D kernel; subtracting dc * boxsum(input)
    from the separable result equals correlating with the mean-subtracted
    2D kernel.
    """

    h_real: np.ndarray
    h_imag: np.ndarray | None
    v_real: np.ndarray
    v_imag: np.ndarray | None
    dc: complex

    def kernel_2d(self) -> np.ndarray:
        """The full mean-subtracted complex 2D kernel (oracle/visualization)."""
        h = self.h_real.astype(np.float64)
        v = self.v_real.astype(np.float64)
        if self.h_imag is not None:
            h = h + 1j * self.h_imag.astype(np.float64)
        if self.v_imag is not None:
            v = v + 1j * self.v_imag.astype(np.float64)
        return np.outer(v, h) - self.dc


class GaborBank:
    """Kernels for four orientations at every wavelength the pyramid needs.

    The base carrier wavelength (in pixels, default 2.7) is the single
    tunable; the Gaussian envelope width is tied to it.  Levels above
    GABOR_REUSE_LEVEL reuse that level's image with the wavelength doubled
    per extra level, so the bank holds one kernel set per doubling factor.
    """

    def __init__(self, wavelength: float = 2.7, pyramid_levels: int = 8):
        if wavelength <= 0:
            raise ValueError("wavelength must be positive")
        self.wavelength = float(wavelength)
        self.omega = 2.0 * np.pi ** 2 / self.wavelength
        self.sigma_env = 2.0 * np.pi ** 2 / self.omega
        self.radius = int(np.ceil(3.0 * self.sigma_env))
        self.pyramid_levels = int(pyramid_levels)
        max_doubling = max(0, self.pyramid_levels - GABOR_REUSE_LEVEL)
        self._kernels = {
            (oi, k): self._make_kernels(theta, self.wavelength * 2.0 ** k)
            for oi, theta in enumerate(ORIENTATIONS)
            for k in range(max_doubling + 1)
        }

    def _make_kernels(self, theta: float, lam: float) -> _AxisKernels:
        t = np.arange(-self.radius, self.radius + 1, dtype=np.float64)
        env = np.exp(-(t ** 2) / (2.0 * self.sigma_env ** 2))
        # snap the axis-aligned cases so a vanished carrier stays exactly real
        cos_t, sin_t = np.cos(theta), np.sin(theta)
        cos_t = 0.0 if abs(cos_t) < 1e-12 else cos_t
        sin_t = 0.0 if abs(sin_t) < 1e-12 else sin_t
        h = env * np.exp(1j * 2.0 * np.pi * t * cos_t / lam)
        v = env * np.exp(1j * 2.0 * np.pi * t * sin_t / lam)
        h_real = h.real.astype(MAP_DTYPE)
        h_imag = h.imag.astype(MAP_DTYPE) if cos_t != 0.0 else None
        v_real = v.real.astype(MAP_DTYPE)
        v_imag = v.imag.astype(MAP_DTYPE) if sin_t != 0.0 else None
        # dc comes from the rounded kernels actually applied, so the mean
        # subtraction cancels exactly
        h_sum = h_real.astype(np.float64).sum() + (
            1j * h_imag.astype(np.float64).sum() if h_imag is not None else 0.0)
        v_sum = v_real.astype(np.float64).sum() + (
            1j * v_imag.astype(np.float64).sum() if v_imag is not None else 0.0)
        n = t.size
        return _AxisKernels(h_real, h_imag, v_real, v_imag,
                            dc=complex(h_sum * v_sum) / (n * n))

    def kernels(self, orientation_index: int, doubling: int = 0) -> _AxisKernels:
        return self._kernels[(orientation_index, doubling)]


def _sep(m: np.ndarray, kx: np.ndarray, ky: np.ndarray) -> np.ndarray:
    return cv2.sepFilter2D(m, -1, kx, ky, borderType=cv2.BORDER_REPLICATE)


def gabor_response(m: np.ndarray, kern: _AxisKernels) -> np.ndarray:
    """Magnitude of the complex Gabor correlation, via the 1D factorization.

    Matches a direct correlation with ``kern.kernel_2d()`` (replicated
    borders) up to float roundoff.  Axes with a vanished carrier skip
    their imaginary passes.
    """
    re = _sep(m, kern.h_real, kern.v_real)
    if kern.h_imag is not None and kern.v_imag is not None:
        re -= _sep(m, kern.h_imag, kern.v_imag)
        im = _sep(m, kern.h_imag, kern.v_real) + _sep(m, kern.h_real, kern.v_imag)
    elif kern.h_imag is not None:
        im = _sep(m, kern.h_imag, kern.v_real)
    elif kern.v_imag is not None:
        im = _sep(m, kern.h_real, kern.v_imag)
    else:
        im = None
    n = kern.h_real.size
    box = cv2.boxFilter(m, -1, (n, n), normalize=False,
                        borderType=cv2.BORDER_REPLICATE)
    re -= MAP_DTYPE(kern.dc.real) * box
    if im is None:
        return np.abs(re)
    if kern.dc.imag != 0.0:
        im -= MAP_DTYPE(kern.dc.imag) * box
    return np.sqrt(re * re + im * im)


def gabor_orient(intensity_pyr: list[np.ndarray], bank: GaborBank,
                 orientation_index: int,
                 levels: set[int] | None = None) -> list:
    """Orientation-response pyramid for one carrier direction.

    Levels up to GABOR_REUSE_LEVEL are filtered directly.  Coarser levels
    filter the reuse level with the wavelength doubled per extra level and
    then decimate the magnitude down to the requested scale.  When
    ``levels`` is given, entries not in it are left as None.
    """
    top = len(intensity_pyr) - 1
    wanted = set(range(top + 1)) if levels is None else set(levels)
    out: list = [None] * (top + 1)
    for sigma in sorted(wanted):
        if sigma > top:
            raise ValueError(f"level {sigma} beyond pyramid depth {top}")
        if sigma <= GABOR_REUSE_LEVEL:
            out[sigma] = gabor_response(intensity_pyr[sigma],
                                        bank.kernels(orientation_index, 0))
        else:
            k = sigma - GABOR_REUSE_LEVEL
            resp = gabor_response(intensity_pyr[GABOR_REUSE_LEVEL],
                                  bank.kernels(orientation_index, k))
            for _ in range(k):
                resp = reduce_once(resp)
            out[sigma] = resp
    return out


# ---------------------------------------------------------------------------
# Feature maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OpponentPair:
    """Pyramids of the two polarities of one opponent channel."""

    pos: list
    neg: list

    def __post_init__(self):
        if len(self.pos) != len(self.neg):
            raise ValueError("opponent pyramids must have equal depth")
        for p, n in zip(self.pos, self.neg):
            if p.shape != n.shape:
                raise ValueError("opponent pyramids must share level dimensions")


def opponent_feature_maps(pair: OpponentPair, c: int, s: int):
    """Rectified opposite-polarity center-surround responses at scale c.

    The two outputs rectify opposite signs of the same quantity, so at
    every pixel at most one of them is nonzero.
    """
    dc = pair.pos[c] - pair.neg[c]
    ds = pair.neg[s] - pair.pos[s]
    z = across_scale_diff(dc, ds)
    return np.maximum(z, 0.0), np.maximum(-z, 0.0)


def orientation_feature_maps(orient_pyr: list, c: int, s: int) -> np.ndarray:
    """Absolute across-scale difference of orientation responses."""
    return np.abs(across_scale_diff(orient_pyr[c], orient_pyr[s]))


@dataclass
class StaticFeatures:
    """Every static feature map of one frame, tagged by channel and scales.

    intensity: (c, s) -> (on, off) maps
    color:     (c, s) -> (rg_on, rg_off, by_on, by_off)
    orientation: (c, s, orientation_index) -> map
    The positive-intensity pyramid is kept for reuse by the motion stage.
    """

    intensity: dict
    color: dict
    orientation: dict
    intensity_pos_pyramid: list

    def count(self) -> int:
        return (2 * len(self.intensity) + 4 * len(self.color)
                + len(self.orientation))

    def iter_maps(self):
        for (c, s), (on, off) in sorted(self.intensity.items()):
            yield ("intensity", c, s, "on", on)
            yield ("intensity", c, s, "off", off)
        for (c, s), maps in sorted(self.color.items()):
            for tag, m in zip(("rg_on", "rg_off", "by_on", "by_off"), maps):
                yield ("color", c, s, tag, m)
        for (c, s, oi), m in sorted(self.orientation.items()):
            yield ("orientation", c, s, ORIENTATIONS[oi], m)


def static_feature_set(frame: FrameRGB, cfg: PipelineConfig,
                       bank: GaborBank | None = None,
                       executor=None) -> StaticFeatures:
    """All intensity/color/orientation feature maps for one frame.

    The per-channel pyramid builds and the per-orientation filtering are
    independent and run on ``executor`` when given; results are reduced in
    a fixed order so the output is identical for any worker count.
    """
    if bank is None:
        bank = GaborBank(cfg.gabor_wavelength, cfg.pyramid_levels)
    ipos, ineg = intensity_channels(frame)
    red, green, blue, yellow = color_channels(frame)

    bases = [ipos, ineg, red, green, blue, yellow]
    pyrs = pmap(executor, lambda m: build_pyramid(m, cfg.pyramid_levels), bases)
    ipos_pyr, ineg_pyr, red_pyr, green_pyr, blue_pyr, yellow_pyr = pyrs

    pairs = cfg.scale_pairs
    gabor_levels = {v for cs in pairs for v in cs}
    orient_pyrs = pmap(
        executor,
        lambda oi: gabor_orient(ipos_pyr, bank, oi, gabor_levels),
        range(len(ORIENTATIONS)),
    )

    intensity_pair = OpponentPair(ipos_pyr, ineg_pyr)
    rg_pair = OpponentPair(red_pyr, green_pyr)
    by_pair = OpponentPair(blue_pyr, yellow_pyr)

    def one_scale_pair(cs):
        c, s = cs
        i_on, i_off = opponent_feature_maps(intensity_pair, c, s)
        rg_on, rg_off = opponent_feature_maps(rg_pair, c, s)
        by_on, by_off = opponent_feature_maps(by_pair, c, s)
        orients = [orientation_feature_maps(orient_pyrs[oi], c, s)
                   for oi in range(len(ORIENTATIONS))]
        return (i_on, i_off), (rg_on, rg_off, by_on, by_off), orients

    per_pair = pmap(executor, one_scale_pair, pairs)

    features = StaticFeatures({}, {}, {}, ipos_pyr)
    for (c, s), (ipair, cmaps, orients) in zip(pairs, per_pair):
        features.intensity[(c, s)] = ipair
        features.color[(c, s)] = cmaps
        for oi, m in enumerate(orients):
            features.orientation[(c, s, oi)] = m
    return features
