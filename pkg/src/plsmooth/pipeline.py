"""Piecewise-linear smoothing built from piecewise-constant filters, and its applications."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .errors import DimensionMismatch, NonPositiveLuminance
from .filters.spec import Bilateral, FilterSpec
from .image import (
    GradientField,
    ImageBuffer,
    check_same_shape,
    denormalize_gradient,
    forward_gradient,
    normalize_gradient,
)
from .reconstruction import ReconstructionConfig, reconstruct

# Default reconstruction weights per application.
BETA_ENHANCE = 16.0
BETA_TONEMAP = 64.0
BETA_FLASH = 128.0

REC709 = np.array([0.2126, 0.7152, 0.0722])


@dataclass(frozen=True)
class ToneMapConfig:
    # Contrast ratio the base layer is compressed to and colour saturation.
    target_base_contrast: float = 5.0
    saturation: float = 0.6

    def __post_init__(self):
        if not self.target_base_contrast > 1:
            raise ValueError("target_base_contrast must be > 1")
        if not 0 < self.saturation <= 1:
            raise ValueError("saturation must lie in (0, 1]")


@dataclass(frozen=True)
class PipelineConfig:
    filter: FilterSpec = field(default_factory=lambda: Bilateral(16.0, 0.025))
    beta: float = BETA_ENHANCE
    guide: ImageBuffer | None = None
    k: float = 5.0
    tone_map: ToneMapConfig = field(default_factory=ToneMapConfig)

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")


@dataclass
class ReversalReport:
    reversal_count: int
    reversal_positions: List[Tuple[str, int, int, int]]
    tau: float

    def __post_init__(self):
        if self.reversal_count != len(self.reversal_positions):
            raise ValueError("reversal_count must equal the number of positions")


def pc_smooth(i0: ImageBuffer, filter: FilterSpec, guide: ImageBuffer | None = None) -> ImageBuffer:
    """Classical piecewise-constant smoothing of the intensities."""
    return filter.apply(i0, guide)


def _filter_gradient_planes(planes: np.ndarray, guides: np.ndarray | None, filter: FilterSpec) -> np.ndarray:
    out = np.empty_like(planes)
    for c in range(planes.shape[0]):
        src = ImageBuffer(planes[c:c + 1])
        if guides is None:
            guide = src
        else:
            guide = ImageBuffer(guides[min(c, guides.shape[0] - 1)][None])
        out[c] = filter.apply(src, guide).data[0]
    return out


def filter_gradients(i0: ImageBuffer, filter: FilterSpec, guide: ImageBuffer | None = None) -> GradientField:
    """Step one: smooth both normalized gradient components of ``i0`` with ``filter``.

    Each gradient channel is guided by itself, or in joint mode by the matching
    gradient channel of ``guide``. Only the interior of each component is
    filtered: the last gx column and last gy row are boundary zeros, not data,
    and averaging them in would bend constant gradients near the border.
    """
    g = normalize_gradient(forward_gradient(i0))
    gx_guide = gy_guide = None
    if guide is not None:
        check_same_shape(i0, guide)
        gg = normalize_gradient(forward_gradient(guide))
        gx_guide, gy_guide = gg.gx.data[:, :, :-1], gg.gy.data[:, :-1, :]
    fx = g.gx.data.copy()
    fy = g.gy.data.copy()
    if i0.width > 1:
        fx[:, :, :-1] = _filter_gradient_planes(g.gx.data[:, :, :-1], gx_guide, filter)
    if i0.height > 1:
        fy[:, :-1, :] = _filter_gradient_planes(g.gy.data[:, :-1, :], gy_guide, filter)
    smoothed = GradientField(ImageBuffer(fx), ImageBuffer(fy))
    return denormalize_gradient(smoothed).zero_boundary()


def pl_smooth(i0: ImageBuffer, cfg: PipelineConfig) -> ImageBuffer:
    """Filter the gradients with a piecewise-constant filter, then reconstruct."""
    g = filter_gradients(i0, cfg.filter, cfg.guide)
    return reconstruct(i0, g, ReconstructionConfig(beta=cfg.beta))


def pc_smooth_then_reconstruct(i0: ImageBuffer, filter: FilterSpec, beta: float = BETA_ENHANCE) -> ImageBuffer:
    """Control arm: reconstruct from the gradients of the piecewise-constant result."""
    smoothed = pc_smooth(i0, filter)
    return reconstruct(i0, forward_gradient(smoothed), ReconstructionConfig(beta=beta))


def detail_enhance(i0: ImageBuffer, smoothed: ImageBuffer, k: float) -> ImageBuffer:
    if i0.shape != smoothed.shape:
        raise DimensionMismatch(f"{i0.shape} vs {smoothed.shape}")
    return i0.replace(i0.data + k * (i0.data - smoothed.data))


def gradient_reversal_count(reference: ImageBuffer, enhanced: ImageBuffer, tau: float = 0.01) -> ReversalReport:
    """Count forward differences that exceed ``tau`` in ``reference`` but flip sign in ``enhanced``.

    Positions are ``(axis, channel, y, x)`` with axis ``"x"`` or ``"y"``.
    """
    if reference.shape != enhanced.shape:
        raise DimensionMismatch(f"{reference.shape} vs {enhanced.shape}")
    gi = forward_gradient(reference)
    ge = forward_gradient(enhanced)
    positions = []
    for axis, a, b in (("x", gi.gx.data, ge.gx.data), ("y", gi.gy.data, ge.gy.data)):
        flipped = (np.abs(a) > tau) & (np.sign(b) == -np.sign(a))
        positions.extend((axis, int(c), int(y), int(x)) for c, y, x in zip(*np.nonzero(flipped)))
    return ReversalReport(len(positions), positions, tau)


def luminance(img: ImageBuffer) -> np.ndarray:
    if img.channels == 1:
        return img.data[0].copy()
    return np.tensordot(REC709, img.data, axes=1)


def compress_log_luminance(hdr: ImageBuffer, cfg: PipelineConfig | None = None,
                           arm: str = "pl") -> Tuple[np.ndarray, np.ndarray]:
    """Return ``(luminance, compressed log10 luminance)`` for :func:`tone_map`.

    The base layer is the smoothed normalized log10 luminance (``arm`` selects
    piecewise-linear or piecewise-constant smoothing); it is scaled to span
    ``log10(target_base_contrast)`` and the detail layer is added back unchanged.
    """
    cfg = cfg or PipelineConfig(filter=Bilateral(16.0, 0.03), beta=BETA_TONEMAP)
    lum = luminance(hdr)
    peak = float(lum.max())
    if peak <= 0:
        raise NonPositiveLuminance("HDR image has no positive luminance")
    lum = np.maximum(lum, 1e-6 * peak)
    log_lum = np.log10(lum)
    lo, hi = float(log_lum.min()), float(log_lum.max())
    span = hi - lo if hi - lo > 1e-12 else 1.0
    normalized = ImageBuffer((log_lum - lo)[None] / span)
    if arm == "pl":
        base_n = pl_smooth(normalized, cfg)
    elif arm == "pc":
        base_n = pc_smooth(normalized, cfg.filter)
    else:
        raise ValueError(f"arm must be 'pl' or 'pc', got {arm!r}")
    base = base_n.data[0] * span + lo
    detail = log_lum - base
    base_range = float(base.max() - base.min())
    cf = math.log10(cfg.tone_map.target_base_contrast) / base_range if base_range > 1e-12 else 1.0
    return lum, cf * base + detail - cf * float(base.max())


def tone_map(hdr: ImageBuffer, cfg: PipelineConfig | None = None, arm: str = "pl") -> ImageBuffer:
    """Base/detail tone mapping of a linear HDR image into [0, 1]."""
    cfg = cfg or PipelineConfig(filter=Bilateral(16.0, 0.03), beta=BETA_TONEMAP)
    lum, log_out = compress_log_luminance(hdr, cfg, arm)
    ratio = np.maximum(hdr.data, 0.0) / lum
    out = ratio ** cfg.tone_map.saturation * 10.0 ** log_out
    lo, hi = float(out.min()), float(out.max())
    out = (out - lo) / (hi - lo) if hi > lo else np.zeros_like(out)
    return ImageBuffer(np.clip(out, 0.0, 1.0))


def flash_noflash(noflash: ImageBuffer, flash: ImageBuffer, filter: FilterSpec | None = None,
                  beta: float = BETA_FLASH) -> ImageBuffer:
    """Smooth ``noflash`` with gradient guidance from ``flash``."""
    check_same_shape(noflash, flash)
    filter = filter or Bilateral(16.0, 0.005)
    return pl_smooth(noflash, PipelineConfig(filter=filter, beta=beta, guide=flash))


def fig2_signal(n: int = 512) -> ImageBuffer:
    """Deterministic 1-D test line (as a ``1 x n`` image) that provokes gradient reversals.

    Flat segment, a textured ramp (sinusoid of amplitude 0.02 and period 16),
    a soft step of height 0.4, then a second textured ramp going down.
    """
    x = np.arange(n, dtype=float)
    flat_end, step_at, slope = n / 8, n / 2, 1.28 / n
    run = np.clip(x - flat_end, 0.0, None)
    y = 0.05 + slope * np.minimum(run, step_at - flat_end)
    # 4-pixel linear transition centred on step_at
    y += 0.4 * np.clip((x - step_at) / 4.0 + 0.5, 0.0, 1.0)
    y -= slope * np.clip(x - step_at, 0.0, None)
    y += 0.02 * np.sin(2.0 * np.pi * run / 16.0) * (x >= flat_end)
    return ImageBuffer(y[None, None, :])
