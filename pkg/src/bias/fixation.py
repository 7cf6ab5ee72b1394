"""Fixation prediction: greedy Gaussian fitting, center prior, smoothing.

Instead of picking single winner pixels, foci of attention are modeled as
anisotropic Gaussians fitted to the saliency map by gradient ascent on the
saliency mass they cover.  Foci are extracted greedily: fit, subtract,
repeat on the residual until its peak falls below a stop threshold or the
focus budget is exhausted.  A center prior and an exponentially weighted
moving average reproduce the center bias and temporal inertia of human
gaze.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import MAP_DTYPE, GwtaConfig

#: Gradient sums run over a window of this many sigmas around the focus
#: center; beyond it the Gaussian mass is negligible.
_GRAD_WINDOW_SIGMAS = 4.0


@dataclass(frozen=True)
class GaussianFocus:
    """One fitted focus of attention.

    mu is (x, y) in subpixel map coordinates, sigma the per-axis standard
    deviations in pixels, amplitude the residual saliency sampled at mu.
    """

    mu: tuple[float, float]
    sigma: tuple[float, float]
    amplitude: float
    steps_used: int

    def scaled(self, factor_x: float, factor_y: float) -> "GaussianFocus":
        """The same focus expressed on a resampled grid."""
        return GaussianFocus(
            mu=(self.mu[0] * factor_x, self.mu[1] * factor_y),
            sigma=(self.sigma[0] * factor_x, self.sigma[1] * factor_y),
            amplitude=self.amplitude,
            steps_used=self.steps_used,
        )


def _axis_weights(n: int, mu: float, sigma: float, lo: int, hi: int):
    coords = np.arange(lo, hi + 1, dtype=np.float64)
    d = coords - mu
    return d, np.exp(-(d * d) / (2.0 * sigma * sigma))


def focus_objective(saliency: np.ndarray, mu, sigma) -> float:
    """Saliency mass covered by a normalized Gaussian, over the full map."""
    h, w = saliency.shape
    dx, gx = _axis_weights(w, mu[0], sigma[0], 0, w - 1)
    dy, gy = _axis_weights(h, mu[1], sigma[1], 0, h - 1)
    amp = 1.0 / (math.sqrt(2.0 * math.pi) * sigma[0] * sigma[1])
    return float(amp * (gy @ (saliency.astype(np.float64, copy=False) @ gx)))


def _objective_gradients(saliency: np.ndarray, mu, sigma,
                         window_sigmas: float = _GRAD_WINDOW_SIGMAS):
    """Closed-form gradients of the objective w.r.t. mu and sigma.

    Evaluated over a +-window_sigmas box around mu; the Gaussian factors
    make the truncated tails irrelevant.  All sums are separable, so the
    cost is one matrix-vector product per step instead of a full 2D pass.
    """
    h, w = saliency.shape
    mx, my = mu
    sx, sy = sigma
    x0 = max(0, int(np.floor(mx - window_sigmas * sx)))
    x1 = min(w - 1, int(np.ceil(mx + window_sigmas * sx)))
    y0 = max(0, int(np.floor(my - window_sigmas * sy)))
    y1 = min(h - 1, int(np.ceil(my + window_sigmas * sy)))
    dx, gx = _axis_weights(w, mx, sx, x0, x1)
    dy, gy = _axis_weights(h, my, sy, y0, y1)
    win = saliency[y0:y1 + 1, x0:x1 + 1]

    # moments[i, j] = sum_x sum_y S * (gy dy^i) * (gx dx^j), i,j in {0,1,2}
    wx = np.stack([gx, gx * dx, gx * dx * dx], axis=1)
    wy = np.stack([gy, gy * dy, gy * dy * dy], axis=0)
    moments = wy @ (win @ wx)
    c0 = moments[0, 0]
    amp = 1.0 / (math.sqrt(2.0 * math.pi) * sx * sy)

    d_mu = (amp * moments[0, 1] / (sx * sx),
            amp * moments[1, 0] / (sy * sy))
    d_sigma = (amp * (moments[0, 2] / sx ** 3 - c0 / sx),
               amp * (moments[2, 0] / sy ** 3 - c0 / sy))
    return d_mu, d_sigma


def bilinear_sample(m: np.ndarray, xy) -> float:
    """Value of the map at a subpixel point, coordinates clamped to bounds."""
    h, w = m.shape
    x = min(max(float(xy[0]), 0.0), w - 1.0)
    y = min(max(float(xy[1]), 0.0), h - 1.0)
    x0, y0 = int(x), int(y)
    x1, y1 = min(x0 + 1, w - 1), min(y0 + 1, h - 1)
    fx, fy = x - x0, y - y0
    top = (1 - fx) * m[y0, x0] + fx * m[y0, x1]
    bot = (1 - fx) * m[y1, x0] + fx * m[y1, x1]
    return float((1 - fy) * top + fy * bot)


def fit_focus(residual: np.ndarray, gcfg: GwtaConfig) -> GaussianFocus:
    """Fit one Gaussian focus to the residual map by gradient ascent.

    The center starts at the residual argmax (raster-order tie break) and
    the widths at their initial value; both are updated jointly for
    gcfg.max_steps steps.  The width update carries a +lambda/sigma
    regularizer (lambda scaled by sqrt of the map width) that keeps foci
    from collapsing to single pixels.
    """
    h, w = residual.shape
    peak = float(residual.max())
    if peak <= 0.0:
        raise ValueError("cannot fit a focus on a zero map")
    sigma_init = gcfg.sigma_init if gcfg.sigma_init is not None else 0.05 * w
    sigma_max = gcfg.sigma_max if gcfg.sigma_max is not None else 0.5 * w
    sigma_max = max(sigma_max, gcfg.sigma_min)
    lam = gcfg.lambda_coeff * math.sqrt(w)

    flat = int(np.argmax(residual))
    mu = np.array([flat % w, flat // w], dtype=np.float64)
    sigma = np.full(2, float(np.clip(sigma_init, gcfg.sigma_min, sigma_max)))

    sal = residual.astype(np.float64, copy=False)
    for _ in range(gcfg.max_steps):
        d_mu, d_sigma = _objective_gradients(sal, mu, sigma)
        mu[0] = min(max(mu[0] + gcfg.step_mu * d_mu[0], 0.0), w - 1.0)
        mu[1] = min(max(mu[1] + gcfg.step_mu * d_mu[1], 0.0), h - 1.0)
        sigma[0] += gcfg.step_sigma * (d_sigma[0] + lam / sigma[0])
        sigma[1] += gcfg.step_sigma * (d_sigma[1] + lam / sigma[1])
        np.clip(sigma, gcfg.sigma_min, sigma_max, out=sigma)

    return GaussianFocus(
        mu=(float(mu[0]), float(mu[1])),
        sigma=(float(sigma[0]), float(sigma[1])),
        amplitude=bilinear_sample(residual, mu),
        steps_used=gcfg.max_steps,
    )


def render_gaussian(shape: tuple[int, int], mu, sigma) -> np.ndarray:
    """Unit-peak Gaussian over the full grid (float64)."""
    h, w = shape
    _, gx = _axis_weights(w, float(mu[0]), float(sigma[0]), 0, w - 1)
    _, gy = _axis_weights(h, float(mu[1]), float(sigma[1]), 0, h - 1)
    return np.outer(gy, gx)


def gwta(saliency: np.ndarray, gcfg: GwtaConfig):
    """Greedy multi-focus extraction from a [0, 1] saliency map.

    Returns the foci in fit order and the map rebuilt as the sum of the
    fitted Gaussians (amplitude times unit-peak shape).  A nonzero map
    always yields at least one focus; extraction stops once the residual
    peak drops below gcfg.residual_stop or gcfg.max_foci is reached.
    """
    if float(saliency.max()) <= 0.0:
        return [], np.zeros_like(saliency, dtype=MAP_DTYPE)
    residual = saliency.astype(np.float64).copy()
    out = np.zeros(saliency.shape, dtype=np.float64)
    foci: list[GaussianFocus] = []
    while True:
        focus = fit_focus(residual, gcfg)
        foci.append(focus)
        g = render_gaussian(saliency.shape, focus.mu, focus.sigma)
        out += focus.amplitude * g
        np.maximum(residual - focus.amplitude * g, 0.0, out=residual)
        if float(residual.max()) < gcfg.residual_stop or len(foci) >= gcfg.max_foci:
            break
    return foci, out.astype(MAP_DTYPE)


def center_prior(width: int, height: int) -> np.ndarray:
    """Anisotropic Gaussian over the frame, peak 1 at the frame center.

    Axis widths are one third of the frame dimensions, matching the
    spread of human fixations on widescreen video.
    """
    x = np.arange(width, dtype=np.float64) - width / 2.0
    y = np.arange(height, dtype=np.float64) - height / 2.0
    sx, sy = width / 3.0, height / 3.0
    px = np.exp(-(x * x) / (2.0 * sx * sx))
    py = np.exp(-(y * y) / (2.0 * sy * sy))
    return np.outer(py, px).astype(MAP_DTYPE)


def apply_prior(m: np.ndarray, prior: np.ndarray) -> np.ndarray:
    """Pointwise product of a fixation map with the center prior."""
    if m.shape != prior.shape:
        raise ValueError(f"shape mismatch {m.shape} vs {prior.shape}")
    return m * prior


@dataclass(frozen=True)
class EwmaState:
    """Carry-over state of the temporal smoother; starts uninitialized."""

    smoothed: np.ndarray | None = None


def ewma_step(state: EwmaState, current: np.ndarray,
              alpha: float) -> tuple[EwmaState, np.ndarray]:
    """One smoothing step: the first frame passes through unchanged."""
    if state.smoothed is None:
        smoothed = current.copy()
    else:
        if current.shape != state.smoothed.shape:
            raise ValueError(
                f"shape mismatch {current.shape} vs {state.smoothed.shape}"
            )
        smoothed = (MAP_DTYPE(alpha) * current
                    + MAP_DTYPE(1.0 - alpha) * state.smoothed)
    return EwmaState(smoothed), smoothed
