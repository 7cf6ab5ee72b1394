"""Bottom-up video saliency engine.

Static contrast channels (intensity, color opponents, Gabor orientation),
a correlation-type motion detector over multiple temporal offsets,
peak-competition fusion into a master saliency map, and fixation
prediction via greedy Gaussian winner-take-all with a center prior and
temporal smoothing.  Includes the standard gaze-prediction metric suite
and a benchmark harness.
"""

from .core import (ConfigError, FrameRGB, GwtaConfig, PipelineConfig,
                   load_config, save_config, validate_config)
from .fixation import (EwmaState, GaussianFocus, apply_prior, center_prior,
                       ewma_step, fit_focus, gwta)
from .fusion import (ConspicuitySet, conspicuity_color, conspicuity_intensity,
                     conspicuity_orientation, master_saliency, normalize_map,
                     static_saliency)
from .metrics import (MetricReport, auc_judd, cc, density_from_fixations, nss,
                      shuffled_auc, sim)
from .motion import (FrameHistory, MotionStack, dynamic_saliency, hr_response,
                     motion_feature_maps, push_frame, shift_one)
from .pipeline import FrameResult, StreamState, process_frame, process_stream
from .pyramid import (across_scale_diff, across_scale_sum, build_pyramid,
                      level_shapes, resize_to)
from .static_channels import (GaborBank, OpponentPair, StaticFeatures,
                              color_channels, gabor_orient, gabor_response,
                              intensity_channels, opponent_feature_maps,
                              orientation_feature_maps, static_feature_set)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "FrameRGB", "GwtaConfig", "PipelineConfig",
    "load_config", "save_config", "validate_config",
    "EwmaState", "GaussianFocus", "apply_prior", "center_prior",
    "ewma_step", "fit_focus", "gwta",
    "ConspicuitySet", "conspicuity_color", "conspicuity_intensity",
    "conspicuity_orientation", "master_saliency", "normalize_map",
    "static_saliency",
    "MetricReport", "auc_judd", "cc", "density_from_fixations", "nss",
    "shuffled_auc", "sim",
    "FrameHistory", "MotionStack", "dynamic_saliency", "hr_response",
    "motion_feature_maps", "push_frame", "shift_one",
    "FrameResult", "StreamState", "process_frame", "process_stream",
    "across_scale_diff", "across_scale_sum", "build_pyramid",
    "level_shapes", "resize_to",
    "GaborBank", "OpponentPair", "StaticFeatures", "color_channels",
    "gabor_orient", "gabor_response", "intensity_channels",
    "opponent_feature_maps", "orientation_feature_maps", "static_feature_set",
    "__version__",
]
