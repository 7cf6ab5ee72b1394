"""Domain types and configuration shared by every pipeline stage.

Conventions used throughout the package:

- A *gray map* is a 2D ``numpy.ndarray`` of real values, indexed
  ``[row, col]`` (height first).  Feature maps are non-negative after
  rectification; intermediate maps may be signed.
- A *pyramid* is a list of gray maps indexed by scale 0..L, each level
  roughly half the resolution of the previous (ceil division).
- All pixel math is done in floating point; 8-bit values appear only at
  I/O boundaries.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAP_DTYPE = np.float32


def pmap(executor, fn, items) -> list:
    """Map ``fn`` over ``items``, on ``executor`` when given, preserving order.

    The fixed result order makes downstream reductions independent of how
    workers are scheduled, so outputs stay bit-identical across thread
    counts.
    """
    items = list(items)
    if executor is None or len(items) <= 1:
        return [fn(item) for item in items]
    return list(executor.map(fn, items))


class ConfigError(ValueError):
    """Raised when a configuration violates an invariant."""


@dataclass(frozen=True)
class FrameRGB:
    """One video frame: three per-pixel channels with values in [0, 255]."""

    r: np.ndarray
    g: np.ndarray
    b: np.ndarray

    @property
    def width(self) -> int:
        return self.r.shape[1]

    @property
    def height(self) -> int:
        return self.r.shape[0]

    @staticmethod
    def from_array(rgb: np.ndarray) -> "FrameRGB":
        """Build from an (H, W, 3) array; values are kept as-is.

        Channels are stored as contiguous planes; strided views would slow
        every downstream vector op.
        """
        if rgb.ndim != 3 or rgb.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) array, got shape {rgb.shape}")
        return FrameRGB(*(np.ascontiguousarray(rgb[:, :, i], dtype=MAP_DTYPE)
                          for i in range(3)))

    def validate(self, min_side: int = 1) -> "FrameRGB":
        for name, ch in (("r", self.r), ("g", self.g), ("b", self.b)):
            if ch.ndim != 2 or ch.shape != self.r.shape:
                raise ValueError(f"channel {name} shape mismatch")
            if not np.isfinite(ch).all():
                raise ValueError(f"channel {name} contains non-finite values")
            if ch.min() < 0 or ch.max() > 255:
                raise ValueError(f"channel {name} outside [0, 255]")
        if self.width < min_side or self.height < min_side:
            raise ValueError(
                f"frame {self.width}x{self.height} too small for pyramid depth"
            )
        return self


@dataclass(frozen=True)
class GwtaConfig:
    """Constants of the greedy Gaussian winner-take-all fitter.

    ``sigma_init`` and ``sigma_max`` default to fractions of the map width
    (0.05*W and 0.5*W) when left as None; set them in pixels to override.
    ``lambda_coeff`` is scaled by sqrt(W) at fit time.
    """

    step_mu: float = 0.1
    step_sigma: float = 4.0
    lambda_coeff: float = 0.03
    max_steps: int = 15
    residual_stop: float = 0.2
    max_foci: int = 12
    sigma_init: float | None = None
    sigma_min: float = 2.0
    sigma_max: float | None = None

    def validate(self) -> "GwtaConfig":
        if self.max_steps < 1:
            raise ConfigError("gwta max_steps must be >= 1")
        if not 0.0 < self.residual_stop < 1.0:
            raise ConfigError("gwta residual_stop out of range")
        if self.max_foci < 1:
            raise ConfigError("gwta max_foci must be >= 1")
        if self.sigma_min <= 0:
            raise ConfigError("gwta sigma_min must be positive")
        return self


def _int_sorted(values) -> tuple[int, ...]:
    return tuple(sorted(int(v) for v in values))


@dataclass(frozen=True)
class PipelineConfig:
    """Every tunable of the pipeline.  Immutable; safe to share across threads."""

    center_scales: tuple[int, ...] = (2,)
    deltas: tuple[int, ...] = (4,)
    tau_set: tuple[int, ...] = (1, 3, 7, 15)
    gamma: float = 0.8
    fusion_weights: tuple[float, float, float] = (1.0, 0.3, 0.3)
    ewma_alpha: float = 0.9
    gwta: GwtaConfig = field(default_factory=GwtaConfig)
    enable_gwta: bool = True
    enable_ewma: bool = True
    enable_center_prior: bool = True
    threads: int = 4
    pyramid_levels: int = 8
    gabor_wavelength: float = 2.7

    def __post_init__(self):
        object.__setattr__(self, "center_scales", _int_sorted(self.center_scales))
        object.__setattr__(self, "deltas", _int_sorted(self.deltas))
        object.__setattr__(self, "tau_set", _int_sorted(self.tau_set))
        object.__setattr__(
            self, "fusion_weights", tuple(float(w) for w in self.fusion_weights)
        )

    @property
    def scale_pairs(self) -> tuple[tuple[int, int], ...]:
        """All (center, surround) scale pairs, surround = center + delta."""
        return tuple(
            (c, c + d) for c in self.center_scales for d in self.deltas
        )

    @property
    def accumulation_scale(self) -> int:
        """Scale at which feature maps are accumulated: the sharpest center."""
        return min(self.center_scales)

    @property
    def history_capacity(self) -> int:
        """Frames of intensity history needed by the motion detector."""
        return max(self.tau_set) + 1


def validate_config(cfg: PipelineConfig) -> PipelineConfig:
    """Check every invariant; return the config unchanged if all hold.

    Raises ConfigError naming the first violated invariant.
    """
    if not cfg.center_scales:
        raise ConfigError("center_scales must be non-empty")
    if not cfg.deltas:
        raise ConfigError("deltas must be non-empty")
    if not cfg.tau_set:
        raise ConfigError("tau_set must be non-empty")
    if cfg.pyramid_levels < 1:
        raise ConfigError("pyramid_levels must be >= 1")
    if min(cfg.center_scales) < 0:
        raise ConfigError("center scale out of range")
    if min(cfg.deltas) < 1:
        raise ConfigError("delta must be >= 1")
    for c in cfg.center_scales:
        for d in cfg.deltas:
            if c + d > cfg.pyramid_levels:
                raise ConfigError("c+delta exceeds pyramid depth")
    if min(cfg.tau_set) < 1:
        raise ConfigError("tau must be >= 1")
    if not 0.0 < cfg.gamma <= 1.0:
        raise ConfigError("gamma out of range")
    if not 0.0 < cfg.ewma_alpha <= 1.0:
        raise ConfigError("ewma_alpha out of range")
    a, b, c = cfg.fusion_weights
    if a < 0 or b < 0 or c < 0:
        raise ConfigError("fusion weights must be non-negative")
    if a == b == c == 0:
        raise ConfigError("fusion weights must not all be zero")
    if cfg.threads < 1:
        raise ConfigError("threads must be positive")
    if cfg.gabor_wavelength <= 0:
        raise ConfigError("gabor_wavelength must be positive")
    cfg.gwta.validate()
    return cfg


# ---------------------------------------------------------------------------
# Config file: flat "key = value" text.  Integer/real sets are comma-separated.
# ---------------------------------------------------------------------------

_SET_FIELDS = {"center_scales", "deltas", "tau_set"}
_TUPLE_FIELDS = {"fusion_weights"}
_BOOL_FIELDS = {"enable_gwta", "enable_ewma", "enable_center_prior"}
_INT_FIELDS = {"threads", "pyramid_levels"}
_GWTA_INT_FIELDS = {"max_steps", "max_foci"}


def save_config(cfg: PipelineConfig, path: str | Path) -> None:
    """Write the flat key/value form of ``cfg``; load_config inverts it."""
    lines = ["# saliency pipeline configuration"]
    for f in dataclasses.fields(PipelineConfig):
        value = getattr(cfg, f.name)
        if f.name == "gwta":
            continue
        if f.name in _SET_FIELDS or f.name in _TUPLE_FIELDS:
            rendered = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        elif f.name in _BOOL_FIELDS:
            rendered = "true" if value else "false"
        elif isinstance(value, float):
            rendered = repr(value)
        else:
            rendered = str(value)
        lines.append(f"{f.name} = {rendered}")
    for f in dataclasses.fields(GwtaConfig):
        value = getattr(cfg.gwta, f.name)
        if value is None:
            continue
        rendered = repr(value) if isinstance(value, float) else str(value)
        lines.append(f"gwta_{f.name} = {rendered}")
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _SET_FIELDS:
        return tuple(int(v) for v in raw.split(",") if v.strip())
    if key in _TUPLE_FIELDS:
        return tuple(float(v) for v in raw.split(",") if v.strip())
    if key in _BOOL_FIELDS:
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected boolean, got {raw!r}")
    if key in _INT_FIELDS:
        return int(raw)
    return float(raw)


def load_config(path: str | Path, base: PipelineConfig | None = None) -> PipelineConfig:
    """Read a flat key/value config file and validate the result.

    Unknown keys are an error; keys absent from the file keep the values of
    ``base`` (the defaults when base is None).
    """
    cfg = base if base is not None else PipelineConfig()
    pipeline_fields = {f.name for f in dataclasses.fields(PipelineConfig)}
    gwta_fields = {f.name for f in dataclasses.fields(GwtaConfig)}
    overrides: dict = {}
    gwta_overrides: dict = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key.startswith("gwta_"):
            sub = key[len("gwta_"):]
            if sub not in gwta_fields:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            if sub in _GWTA_INT_FIELDS:
                gwta_overrides[sub] = int(raw)
            else:
                gwta_overrides[sub] = float(raw)
        elif key in pipeline_fields and key != "gwta":
            overrides[key] = _parse_value(key, raw)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    if gwta_overrides:
        overrides["gwta"] = dataclasses.replace(cfg.gwta, **gwta_overrides)
    cfg = dataclasses.replace(cfg, **overrides)
    return validate_config(cfg)
