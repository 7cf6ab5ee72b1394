"""Standard gaze-prediction metrics over saliency maps and fixations.

Fixations are (x, y) integer pixel coordinates.  Density-based metrics
(CC, SIM) take a continuous ground-truth map; when a dataset provides
only discrete fixations, ``density_from_fixations`` synthesizes one by
Gaussian blobbing.  The two AUC variants are rank statistics: the Judd
variant scores fixated pixels against all remaining pixels, the shuffled
variant against fixations borrowed from other videos so a shared center
bias cancels out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fixation import render_gaussian


def _as_points(fixations) -> np.ndarray:
    pts = np.asarray(fixations)
    if pts.size == 0:
        return pts.reshape(0, 2).astype(np.int64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"fixations must be (N, 2) of (x, y), got {pts.shape}")
    return np.round(pts).astype(np.int64)


def _values_at(pred: np.ndarray, points: np.ndarray) -> np.ndarray:
    h, w = pred.shape
    x, y = points[:, 0], points[:, 1]
    if (x < 0).any() or (x >= w).any() or (y < 0).any() or (y >= h).any():
        raise ValueError("fixation outside map bounds")
    return pred[y, x]


def nss(pred: np.ndarray, fixations) -> float:
    """Mean z-scored saliency at the fixated pixels.

    Zero-variance maps score 0 by convention.
    """
    points = _as_points(fixations)
    if points.shape[0] == 0:
        raise ValueError("nss needs at least one fixation")
    p = pred.astype(np.float64, copy=False)
    values = _values_at(p, points)
    std = float(p.std())
    if std == 0.0:
        return 0.0
    return float((values.mean() - p.mean()) / std)


def cc(pred: np.ndarray, gt_density: np.ndarray) -> float:
    """Pearson correlation between the two maps over pixels.

    Zero variance on either side scores 0 by convention.
    """
    if pred.shape != gt_density.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {gt_density.shape}")
    a = pred.astype(np.float64, copy=False).ravel()
    b = gt_density.astype(np.float64, copy=False).ravel()
    a = a - a.mean()
    b = b - b.mean()
    denom = float(np.sqrt((a * a).sum() * (b * b).sum()))
    if denom == 0.0:
        return 0.0
    return float((a * b).sum() / denom)


def sim(pred: np.ndarray, gt_density: np.ndarray) -> float:
    """Histogram intersection of the sum-normalized maps."""
    if pred.shape != gt_density.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {gt_density.shape}")
    a = pred.astype(np.float64, copy=False)
    b = gt_density.astype(np.float64, copy=False)
    if a.min() < 0.0 or b.min() < 0.0:
        raise ValueError("sim needs non-negative maps")
    sa, sb = float(a.sum()), float(b.sum())
    if sa <= 0.0 or sb <= 0.0:
        raise ValueError("sim needs maps with positive sums")
    return float(np.minimum(a / sa, b / sb).sum())


def _roc_area(tp: np.ndarray, fp: np.ndarray) -> float:
    # lexicographic order makes tied-fp runs vertical (zero-width) segments
    order = np.lexsort((tp, fp))
    return float(np.trapezoid(tp[order], fp[order]))


def auc_judd(pred: np.ndarray, fixations) -> float:
    """ROC area: fixated pixels vs all other pixels.

    Thresholds sweep the prediction values at the fixated pixels; tied
    values collapse into single ROC points joined trapezoidally, so a
    constant map scores exactly 0.5.
    """
    points = np.unique(_as_points(fixations), axis=0)
    if points.shape[0] == 0:
        raise ValueError("auc_judd needs at least one fixation")
    p = pred.astype(np.float64, copy=False)
    pos_vals = _values_at(p, points)
    n_pos = pos_vals.size
    n_neg = p.size - n_pos
    if n_neg <= 0:
        raise ValueError("every pixel is fixated; AUC undefined")

    all_sorted = np.sort(p, axis=None)
    pos_sorted = np.sort(pos_vals)
    thresholds = np.unique(pos_vals)
    # counts of values >= t
    pos_ge = n_pos - np.searchsorted(pos_sorted, thresholds, side="left")
    all_ge = p.size - np.searchsorted(all_sorted, thresholds, side="left")
    tp = pos_ge / n_pos
    fp = (all_ge - pos_ge) / n_neg
    tp = np.concatenate(([0.0], tp, [1.0]))
    fp = np.concatenate(([0.0], fp, [1.0]))
    return _roc_area(tp, fp)


def shuffled_auc(pred: np.ndarray, fixations, other_fix_pool,
                 permutations: int = 100, seed: int = 0) -> float:
    """Mean ROC area against negatives drawn from other videos' fixations.

    Each round samples as many pool points as there are fixated pixels
    (without replacement when the pool allows) and scores fixations
    against them; the result is deterministic for a given seed.
    """
    points = np.unique(_as_points(fixations), axis=0)
    if points.shape[0] == 0:
        raise ValueError("shuffled_auc needs at least one fixation")
    pool = _as_points(other_fix_pool)
    if pool.shape[0] == 0:
        raise ValueError("shuffled_auc needs a non-empty fixation pool")
    p = pred.astype(np.float64, copy=False)
    pos_vals = _values_at(p, points)
    n_pos = pos_vals.size
    pos_sorted = np.sort(pos_vals)
    thresholds = np.unique(pos_vals)
    pos_ge = n_pos - np.searchsorted(pos_sorted, thresholds, side="left")
    tp = np.concatenate(([0.0], pos_ge / n_pos, [1.0]))

    rng = np.random.default_rng(seed)
    areas = np.empty(permutations, dtype=np.float64)
    for i in range(permutations):
        idx = rng.choice(pool.shape[0], size=n_pos,
                         replace=pool.shape[0] < n_pos)
        neg_vals = np.sort(_values_at(p, pool[idx]))
        neg_ge = n_pos - np.searchsorted(neg_vals, thresholds, side="left")
        fp = np.concatenate(([0.0], neg_ge / n_pos, [1.0]))
        areas[i] = _roc_area(tp, fp)
    return float(areas.mean())


def density_from_fixations(shape: tuple[int, int], fixations,
                           sigma: float | None = None) -> np.ndarray:
    """Continuous ground-truth density synthesized from fixation points.

    Each point contributes a Gaussian blob (default width ~1 degree of
    visual angle, taken as map_width/32); the result sums to 1.
    """
    points = _as_points(fixations)
    if points.shape[0] == 0:
        raise ValueError("cannot synthesize density without fixations")
    h, w = shape
    if sigma is None:
        sigma = w / 32.0
    density = np.zeros((h, w), dtype=np.float64)
    for x, y in points:
        density += render_gaussian((h, w), (float(x), float(y)), (sigma, sigma))
    total = float(density.sum())
    return (density / total).astype(np.float64)


@dataclass
class MetricReport:
    """Per-frame metric series plus their means."""

    seed: int = 0
    nss: list = field(default_factory=list)
    cc: list = field(default_factory=list)
    sim: list = field(default_factory=list)
    auc_judd: list = field(default_factory=list)
    shuffled_auc: list = field(default_factory=list)

    _NAMES = ("nss", "cc", "sim", "auc_judd", "shuffled_auc")

    def add_frame(self, **values) -> None:
        for name in self._NAMES:
            if name in values and values[name] is not None:
                getattr(self, name).append(float(values[name]))

    def mean(self, name: str) -> float | None:
        series = getattr(self, name)
        return float(np.mean(series)) if series else None

    def summary(self) -> dict:
        return {name: self.mean(name) for name in self._NAMES}

    def render(self) -> str:
        lines = [f"frames_scored={max((len(getattr(self, n)) for n in self._NAMES), default=0)}",
                 f"seed={self.seed}"]
        for name, value in self.summary().items():
            rendered = "nan" if value is None else f"{value:.6f}"
            lines.append(f"{name}={rendered}")
        return "\n".join(lines)
