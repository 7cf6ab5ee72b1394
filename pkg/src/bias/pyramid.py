"""Gaussian pyramids and the across-scale operators.

Two operators tie the multi-scale maps together: the center-surround
difference (fine map minus an upsampled coarse map) and the across-scale
sum (resize every map to a target shape, then add).  Coarser levels are
produced by a separable 5-tap binomial blur followed by decimation that
keeps the even-indexed samples, so level dimensions follow the ceil(n/2)
chain.  Borders are edge-replicated everywhere to avoid dark-frame
artifacts that would read as contrast.
"""

from __future__ import annotations

import cv2
import numpy as np

from .core import MAP_DTYPE

_BLUR_KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0], dtype=MAP_DTYPE) / 16.0


def as_map(values) -> np.ndarray:
    """Coerce to the 2D float dtype used by every stage."""
    arr = np.ascontiguousarray(values, dtype=MAP_DTYPE)
    if arr.ndim != 2:
        raise ValueError(f"expected 2D map, got shape {arr.shape}")
    return arr


def level_shapes(base_shape: tuple[int, int], levels: int) -> list[tuple[int, int]]:
    """(height, width) of every pyramid level 0..levels for a given base."""
    h, w = base_shape
    shapes = [(h, w)]
    for _ in range(levels):
        h, w = (h + 1) // 2, (w + 1) // 2
        shapes.append((h, w))
    return shapes


def blur(m: np.ndarray) -> np.ndarray:
    """Separable binomial blur with replicated borders."""
    return cv2.sepFilter2D(m, -1, _BLUR_KERNEL, _BLUR_KERNEL,
                           borderType=cv2.BORDER_REPLICATE)


def reduce_once(m: np.ndarray) -> np.ndarray:
    """Binomial blur then keep even-indexed samples: the next-coarser level.

    pyrDown is the same kernel and sampling grid but only evaluates the
    kept pixels, an order of magnitude cheaper than blur-then-slice.
    """
    h, w = m.shape
    return cv2.pyrDown(m, dstsize=((w + 1) // 2, (h + 1) // 2),
                       borderType=cv2.BORDER_REPLICATE)


def build_pyramid(base: np.ndarray, levels: int) -> list[np.ndarray]:
    """Level 0 is ``base`` itself; each further level is blur + decimate.

    Requires base dimensions >= 2**levels on both axes so the top level
    is still at least one pixel wide.
    """
    base = as_map(base)
    h, w = base.shape
    if min(h, w) < 2 ** levels:
        raise ValueError(
            f"base {w}x{h} too small for {levels} pyramid levels "
            f"(needs >= {2 ** levels} per axis)"
        )
    pyr = [base]
    for _ in range(levels):
        pyr.append(reduce_once(pyr[-1]))
    return pyr


def resize_to(m: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resample; returns the input untouched when dims already match."""
    if width < 1 or height < 1:
        raise ValueError(f"invalid target size {width}x{height}")
    if m.shape == (height, width):
        return m
    return cv2.resize(m, (width, height), interpolation=cv2.INTER_LINEAR)


def across_scale_diff(center: np.ndarray, surround: np.ndarray) -> np.ndarray:
    """Center minus surround with the surround upsampled to the center grid.

    The surround must come from a coarser scale (strictly smaller dims).
    The result keeps the center's dimensions and may be negative; callers
    rectify as needed.
    """
    ch, cw = center.shape
    sh, sw = surround.shape
    if sh > ch or sw > cw or (sh, sw) == (ch, cw):
        raise ValueError(
            f"surround {sw}x{sh} is not coarser than center {cw}x{ch}"
        )
    return center - resize_to(surround, cw, ch)


def across_scale_sum(maps, target_hw: tuple[int, int]) -> np.ndarray:
    """Resize every map to ``target_hw`` and accumulate in the given order."""
    maps = list(maps)
    if not maps:
        raise ValueError("across_scale_sum needs at least one map")
    th, tw = target_hw
    acc = np.zeros((th, tw), dtype=MAP_DTYPE)
    for m in maps:
        acc += resize_to(m, tw, th)
    return acc
