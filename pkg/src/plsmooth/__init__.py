"""Piecewise-linear edge-preserving smoothing by filtering gradients and reconstructing."""
from .errors import (
    CgDidNotConverge,
    DegenerateRange,
    DimensionMismatch,
    FormatError,
    IoError,
    NonPositiveLuminance,
)
from .fileio import load_image, save_image
from .filters import L0, Bilateral, DomainTransformNC, FilterSpec, Guided, WeightedMedian
from .image import GradientField, ImageBuffer, NormState, denormalize, forward_gradient, normalize_unit
from .parallel import get_threads, set_threads
from .pipeline import (
    PipelineConfig,
    ReversalReport,
    ToneMapConfig,
    detail_enhance,
    fig2_signal,
    filter_gradients,
    flash_noflash,
    gradient_reversal_count,
    pc_smooth,
    pc_smooth_then_reconstruct,
    pl_smooth,
    tone_map,
)
from .reconstruction import ReconstructionConfig, reconstruct

__all__ = [
    "CgDidNotConverge", "DegenerateRange", "DimensionMismatch", "FormatError", "IoError",
    "NonPositiveLuminance", "load_image", "save_image", "L0", "Bilateral", "DomainTransformNC",
    "FilterSpec", "Guided", "WeightedMedian", "GradientField", "ImageBuffer", "NormState",
    "denormalize", "forward_gradient", "normalize_unit", "get_threads", "set_threads",
    "PipelineConfig", "ReversalReport", "ToneMapConfig", "detail_enhance", "fig2_signal",
    "filter_gradients", "flash_noflash", "gradient_reversal_count", "pc_smooth",
    "pc_smooth_then_reconstruct", "pl_smooth", "tone_map", "ReconstructionConfig", "reconstruct",
]
