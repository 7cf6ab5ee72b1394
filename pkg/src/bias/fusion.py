"""Map normalization, conspicuity aggregation, and saliency fusion.

The normalization operator promotes maps with one dominant peak and
suppresses maps where many locations compete: a map is scaled by
(M - m)^2 / M, where M is its global maximum and m the mean of its other
local maxima.  A lone peak keeps its value (m = 0); near-uniform
competition drives the factor toward zero.  The operator is degree-2
homogeneous and never reorders pixels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import cv2
import numpy as np

from .core import MAP_DTYPE
from .pyramid import across_scale_sum, resize_to

#: Maps wider than this are downsampled before local-maxima detection so
#: the mean of peers is stable against pixel noise.
_LOCAL_MAXIMA_WIDTH = 64

_NEIGHBORS = np.ones((3, 3), dtype=np.uint8)
_NEIGHBORS[1, 1] = 0


def _local_maxima_values(m: np.ndarray) -> np.ndarray:
    """Values at positive 3x3 local maxima (map border included).

    Maxima are non-strict so plateau points count: a broad flat activation
    is "many equal peers" and must pull the peer mean up toward the peak,
    not fall through as having no maxima at all (which would hand uniform
    fields the largest possible boost).  Zero-valued pixels are background,
    not activation peaks, and are excluded.
    """
    neighborhood_max = cv2.dilate(m, _NEIGHBORS,
                                  borderType=cv2.BORDER_CONSTANT,
                                  borderValue=-np.inf)
    return m[(m >= neighborhood_max) & (m > 0.0)]


def normalize_map(x: np.ndarray) -> np.ndarray:
    """Peak-competition normalization of a non-negative map.

    Zero and constant maps normalize to zero.  The mean of peer maxima is
    taken over positive 3x3 local maxima of the map (downsampled to ~64 px
    wide first, for stability; plateaus included, see _local_maxima_values),
    with one instance of the largest value excluded; with no peers the mean
    is zero and the lone peak gets the full (M)^2/M boost.
    """
    peak = float(x.max())
    if peak <= 0.0 or float(x.min()) == peak:
        return np.zeros_like(x)
    h, w = x.shape
    if w > _LOCAL_MAXIMA_WIDTH:
        ds_h = max(1, round(h * _LOCAL_MAXIMA_WIDTH / w))
        ds = resize_to(x, _LOCAL_MAXIMA_WIDTH, ds_h)
    else:
        ds = x
    maxima = _local_maxima_values(ds)
    if maxima.size > 1:
        peers = np.sort(maxima)[:-1]
        peer_mean = float(peers.mean(dtype=np.float64))
    else:
        peer_mean = 0.0
    factor = (peak - peer_mean) ** 2 / peak
    return x * factor


@dataclass
class ConspicuitySet:
    """Per-family aggregates at the accumulation scale."""

    intensity: np.ndarray
    color: np.ndarray
    orientation: np.ndarray
    motion: dict = field(default_factory=dict)  # temporal offset -> map


def conspicuity_intensity(features, target_hw: tuple[int, int]) -> np.ndarray:
    """Across-scale sum of normalized on/off intensity maps."""
    terms = []
    for (_c, _s), (on, off) in sorted(features.intensity.items()):
        terms.append(normalize_map(on))
        terms.append(normalize_map(off))
    return across_scale_sum(terms, target_hw)


def conspicuity_color(features, target_hw: tuple[int, int]) -> np.ndarray:
    """Across-scale sum of the four normalized opponent-color maps."""
    terms = []
    for (_c, _s), maps in sorted(features.color.items()):
        terms.extend(normalize_map(m) for m in maps)
    return across_scale_sum(terms, target_hw)


def conspicuity_orientation(features, target_hw: tuple[int, int]) -> np.ndarray:
    """Doubly normalized orientation conspicuity.

    Each map is normalized, summed across scale pairs per orientation, the
    per-orientation sum is normalized again, and the four results add up.
    """
    by_orientation: dict[int, list[np.ndarray]] = {}
    for (c, s, oi), m in sorted(features.orientation.items()):
        by_orientation.setdefault(oi, []).append(normalize_map(m))
    acc = np.zeros(target_hw, dtype=MAP_DTYPE)
    for oi in sorted(by_orientation):
        acc += normalize_map(across_scale_sum(by_orientation[oi], target_hw))
    return acc


def static_saliency(cons: ConspicuitySet) -> np.ndarray:
    """Mean of the three normalized static conspicuity maps."""
    return (
        normalize_map(cons.intensity)
        + normalize_map(cons.color)
        + normalize_map(cons.orientation)
    ) / MAP_DTYPE(3.0)


def master_saliency(ss: np.ndarray, ds: np.ndarray,
                    weights: tuple[float, float, float]) -> np.ndarray:
    """Second-order fusion of static and dynamic saliency, rescaled to [0, 1].

    The product term rewards locations that are salient in both worlds;
    the linear terms keep either world alive on its own.
    """
    if ss.shape != ds.shape:
        raise ValueError(f"shape mismatch {ss.shape} vs {ds.shape}")
    a, b, c = weights
    s = (MAP_DTYPE(a) * normalize_map(ss * ds)
         + MAP_DTYPE(b) * normalize_map(ss)
         + MAP_DTYPE(c) * normalize_map(ds))
    peak = float(s.max())
    if peak > 0.0:
        s = s / MAP_DTYPE(peak)
    return s
