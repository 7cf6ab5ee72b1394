"""Direction-selective motion detection and the dynamic saliency map.

The detector compares the current intensity map against a delayed copy
shifted one pixel along a direction and against the same copy shifted the
opposite way; the rectified difference of the two match strengths fires
only for motion along the preferred direction.  Because the one-pixel
shift is applied at every pyramid scale, each scale is tuned to double
the velocity of the previous one, and the set of temporal offsets covers
slow movers the one-frame delay would miss.

Intensity operands are kept in [0, 1]; raw 8-bit ranges would saturate
the exponential match measure to zero.
"""

from __future__ import annotations

import numpy as np

from .core import MAP_DTYPE, PipelineConfig, pmap
from .fusion import normalize_map
from .pyramid import across_scale_diff, across_scale_sum

DIRECTIONS = ("left", "right", "up", "down")
OPPOSITE = {"left": "right", "right": "left", "up": "down", "down": "up"}


class FrameHistory:
    """Ring buffer of past intensity pyramids, one slot per frame.

    The first push fixes the level dimensions; later pushes must match.
    A temporal offset tau is readable once tau+1 frames have been pushed.
    Single writer; reads for a frame happen after its push completes.
    """

    def __init__(self, capacity: int):
        if capacity < 2:
            raise ValueError("capacity must be >= 2")
        self.capacity = int(capacity)
        self._slots: list[list[np.ndarray]] = []
        self._schema: list[tuple[int, int]] | None = None
        self.total_pushed = 0

    def push(self, pyramid: list[np.ndarray]) -> "FrameHistory":
        shapes = [lvl.shape for lvl in pyramid]
        if self._schema is None:
            self._schema = shapes
        elif shapes != self._schema:
            raise ValueError("pyramid dimensions do not match history schema")
        self._slots.append(pyramid)
        if len(self._slots) > self.capacity:
            self._slots.pop(0)
        self.total_pushed += 1
        return self

    @property
    def schema(self) -> list[tuple[int, int]]:
        if self._schema is None:
            raise ValueError("history is empty")
        return self._schema

    def available(self, tau: int) -> bool:
        return tau + 1 <= len(self._slots)

    def latest(self) -> list[np.ndarray]:
        if not self._slots:
            raise ValueError("history is empty")
        return self._slots[-1]

    def delayed(self, tau: int) -> list[np.ndarray]:
        """Pyramid pushed tau frames before the latest one."""
        if tau + 1 > self.capacity:
            raise ValueError(f"tau={tau} exceeds history capacity {self.capacity}")
        if not self.available(tau):
            raise ValueError(f"tau={tau} not available yet "
                             f"({len(self._slots)} frames pushed)")
        return self._slots[-(tau + 1)]


def push_frame(history: FrameHistory, pyramid: list[np.ndarray]) -> FrameHistory:
    """Advance the ring by one frame, evicting the oldest slot when full."""
    return history.push(pyramid)


def shift_one(m: np.ndarray, direction: str) -> np.ndarray:
    """Translate content one pixel along ``direction``, replicating the edge.

    'down' moves content toward larger row indices.
    """
    out = np.empty_like(m)
    if direction == "right":
        out[:, 1:] = m[:, :-1]
        out[:, 0] = m[:, 0]
    elif direction == "left":
        out[:, :-1] = m[:, 1:]
        out[:, -1] = m[:, -1]
    elif direction == "down":
        out[1:, :] = m[:-1, :]
        out[0, :] = m[0, :]
    elif direction == "up":
        out[:-1, :] = m[1:, :]
        out[-1, :] = m[-1, :]
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return out


def hr_response(now: np.ndarray, delayed: np.ndarray, direction: str) -> np.ndarray:
    """Rectified preferred-minus-null correlation response.

    Expects both maps in [0, 1].  Nonzero only where the delayed map
    shifted along ``direction`` matches the current map better than the
    oppositely shifted copy.
    """
    if now.shape != delayed.shape:
        raise ValueError(f"shape mismatch {now.shape} vs {delayed.shape}")
    preferred = np.exp(-np.abs(now - shift_one(delayed, direction)))
    null = np.exp(-np.abs(now - shift_one(delayed, OPPOSITE[direction])))
    return np.maximum(preferred - null, 0.0).astype(MAP_DTYPE, copy=False)


class MotionStack:
    """Per-(scale, direction, offset) motion responses for one frame."""

    def __init__(self):
        self.maps: dict[tuple[int, str, int], np.ndarray] = {}

    def put(self, scale: int, direction: str, tau: int, m: np.ndarray) -> None:
        self.maps[(scale, direction, tau)] = m

    def get(self, scale: int, direction: str, tau: int) -> np.ndarray:
        key = (scale, direction, tau)
        if key not in self.maps:
            raise KeyError(f"missing motion response {key}")
        return self.maps[key]


def compute_motion_stack(history: FrameHistory, scales, taus,
                         executor=None) -> tuple[MotionStack, list[int]]:
    """Detector responses at every (scale, direction, available tau).

    Offsets whose delayed frame does not exist yet are skipped (warm-up).
    The four directions of one (scale, tau) share their exponential match
    terms (each direction's null branch is its mirror's preferred branch),
    so they are computed together; values equal per-direction hr_response
    calls bit for bit.
    """
    now = history.latest()
    usable = [t for t in taus if history.available(t)]
    jobs = [(sigma, tau) for tau in usable for sigma in scales]

    def one(job):
        sigma, tau = job
        delayed = history.delayed(tau)[sigma]
        match = {d: np.exp(-np.abs(now[sigma] - shift_one(delayed, d)))
                 for d in DIRECTIONS}
        return {d: np.maximum(match[d] - match[OPPOSITE[d]], 0.0)
                  .astype(MAP_DTYPE, copy=False)
                for d in DIRECTIONS}

    results = pmap(executor, one, jobs)
    stack = MotionStack()
    for (sigma, tau), responses in zip(jobs, results):
        for d, m in responses.items():
            stack.put(sigma, d, tau, m)
    return stack, usable


def motion_feature_maps(stack: MotionStack, c: int, s: int, direction: str,
                        tau: int):
    """Rectified opponent center-surround of a direction/anti-direction pair.

    Same polarity-preserving pattern as the static opponent channels, with
    the preferred and opposite direction responses as the pair.
    """
    opp = OPPOSITE[direction]
    dc = stack.get(c, direction, tau) - stack.get(c, opp, tau)
    ds = stack.get(s, opp, tau) - stack.get(s, direction, tau)
    z = across_scale_diff(dc, ds)
    return np.maximum(z, 0.0), np.maximum(-z, 0.0)


def dynamic_conspicuity(stack: MotionStack, cfg: PipelineConfig, tau: int,
                        target_hw: tuple[int, int]) -> np.ndarray:
    """Half the across-scale/direction sum of normalized motion features.

    A direction's positive map is bit-identical to its mirror's negative
    map, so summing one direction per axis without the half prefactor
    yields the same value with half the work.
    """
    terms = []
    for c, s in cfg.scale_pairs:
        for d in ("left", "up"):
            m_pos, m_neg = motion_feature_maps(stack, c, s, d, tau)
            terms.append(normalize_map(m_pos))
            terms.append(normalize_map(m_neg))
    return across_scale_sum(terms, target_hw)


def dynamic_saliency(history: FrameHistory, cfg: PipelineConfig,
                     executor=None) -> tuple[np.ndarray, list[int]]:
    """Decay-weighted sum of normalized motion conspicuities over offsets.

    Returns the map at the accumulation scale plus the offsets actually
    used; an empty list marks warm-up (the map is then all zero).
    """
    target_hw = history.schema[cfg.accumulation_scale]
    scales = sorted({v for cs in cfg.scale_pairs for v in cs})
    stack, usable = compute_motion_stack(history, scales, cfg.tau_set, executor)
    ds = np.zeros(target_hw, dtype=MAP_DTYPE)
    if not usable:
        return ds, []
    conspicuities = pmap(
        executor,
        lambda tau: dynamic_conspicuity(stack, cfg, tau, target_hw),
        usable,
    )
    for tau, cons in zip(usable, conspicuities):
        ds += MAP_DTYPE(cfg.gamma ** (tau - 1)) * normalize_map(cons)
    return ds, usable
