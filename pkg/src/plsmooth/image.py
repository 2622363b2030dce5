"""Raster containers and the discrete gradient operators they are smoothed with.

Images are stored planar, as float64 arrays of shape ``(channels, height, width)``.
Gradients are forward differences with a replicated edge, so the last column of
``gx`` and the last row of ``gy`` are always zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DegenerateRange, DimensionMismatch

Range = Tuple[float, float]

_MIN_SPAN = 1e-12


@dataclass(frozen=True)
class ImageBuffer:
    data: np.ndarray
    declared_range: Range = (0.0, 1.0)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise ValueError(f"expected planar (channels, height, width) data, got shape {data.shape}")
        c, h, w = data.shape
        if c not in (1, 3):
            raise ValueError(f"channel count must be 1 or 3, got {c}")
        if h < 1 or w < 1:
            raise ValueError("image must be at least 1x1")
        if not np.all(np.isfinite(data)):
            raise ValueError("image contains non-finite samples")
        lo, hi = (float(v) for v in self.declared_range)
        if not lo < hi:
            raise ValueError(f"declared_range must satisfy lo < hi, got ({lo}, {hi})")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "declared_range", (lo, hi))

    @classmethod
    def from_array(cls, array, declared_range: Range = (0.0, 1.0)) -> "ImageBuffer":
        """Build from an interleaved ``(H, W)`` or ``(H, W, C)`` array."""
        a = np.asarray(array, dtype=np.float64)
        if a.ndim == 2:
            a = a[None]
        elif a.ndim == 3:
            a = np.moveaxis(a, -1, 0)
        else:
            raise ValueError(f"expected a 2-D or 3-D array, got shape {a.shape}")
        return cls(np.ascontiguousarray(a), declared_range)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.data.shape

    def hwc(self) -> np.ndarray:
        """Interleaved ``(H, W, C)`` view of the samples."""
        return np.moveaxis(self.data, 0, -1)

    def replace(self, data, declared_range: Range | None = None) -> "ImageBuffer":
        return ImageBuffer(data, self.declared_range if declared_range is None else declared_range)


@dataclass(frozen=True)
class GradientField:
    gx: ImageBuffer
    gy: ImageBuffer

    def __post_init__(self):
        if self.gx.shape != self.gy.shape:
            raise DimensionMismatch(f"gx {self.gx.shape} and gy {self.gy.shape} differ")

    @property
    def shape(self):
        return self.gx.shape

    def zero_boundary(self) -> "GradientField":
        """Copy with the last gx column and last gy row forced to zero."""
        gx = self.gx.data.copy()
        gy = self.gy.data.copy()
        gx[:, :, -1] = 0.0
        gy[:, -1, :] = 0.0
        return GradientField(self.gx.replace(gx), self.gy.replace(gy))


@dataclass(frozen=True)
class NormState:
    """Affine map ``x -> (x - offset) / scale`` used by :func:`normalize_unit`."""

    scale: float
    offset: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("NormState.scale must be positive")


# Gradients of a [0, 1] image live in [-1, 1]; they are always mapped with (g + 1) / 2.
GRADIENT_NORM = NormState(scale=2.0, offset=-1.0)


def check_same_shape(*images) -> None:
    shapes = {img.shape[1:] for img in images}
    if len(shapes) > 1:
        raise DimensionMismatch(f"image sizes differ: {sorted(shapes)}")


def grad_arrays(u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Forward differences along the last two axes of ``u``."""
    gx = np.zeros_like(u)
    gy = np.zeros_like(u)
    gx[..., :, :-1] = u[..., :, 1:] - u[..., :, :-1]
    gy[..., :-1, :] = u[..., 1:, :] - u[..., :-1, :]
    return gx, gy


def grad_adjoint_arrays(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    out = np.zeros_like(gx)
    out[..., :, :-1] -= gx[..., :, :-1]
    out[..., :, 1:] += gx[..., :, :-1]
    out[..., :-1, :] -= gy[..., :-1, :]
    out[..., 1:, :] += gy[..., :-1, :]
    return out


def forward_gradient(img: ImageBuffer) -> GradientField:
    gx, gy = grad_arrays(img.data)
    lo, hi = img.declared_range
    span = hi - lo
    rng = (-span, span)
    return GradientField(ImageBuffer(gx, rng), ImageBuffer(gy, rng))


def divergence_adjoint(g: GradientField) -> ImageBuffer:
    """Transpose of :func:`forward_gradient`, i.e. the negative divergence.

    Satisfies ``<forward_gradient(u), g> == <u, divergence_adjoint(g)>``.
    """
    out = grad_adjoint_arrays(g.gx.data, g.gy.data)
    span = 2.0 * (g.gx.declared_range[1] - g.gx.declared_range[0])
    return ImageBuffer(out, (-span, span))


def normalize_unit(img: ImageBuffer) -> Tuple[ImageBuffer, NormState]:
    lo, hi = img.declared_range
    if hi - lo < _MIN_SPAN:
        raise DegenerateRange(f"declared range ({lo}, {hi}) is too narrow to normalize")
    st = NormState(scale=hi - lo, offset=lo)
    return ImageBuffer((img.data - st.offset) / st.scale, (0.0, 1.0)), st


def denormalize(img: ImageBuffer, st: NormState) -> ImageBuffer:
    return ImageBuffer(img.data * st.scale + st.offset, (st.offset, st.offset + st.scale))


def normalize_gradient(g: GradientField) -> GradientField:
    """Apply the fixed ``(g + 1) / 2`` map to both components."""
    s = GRADIENT_NORM
    return GradientField(
        ImageBuffer((g.gx.data - s.offset) / s.scale),
        ImageBuffer((g.gy.data - s.offset) / s.scale),
    )


def denormalize_gradient(g: GradientField) -> GradientField:
    return GradientField(denormalize(g.gx, GRADIENT_NORM), denormalize(g.gy, GRADIENT_NORM))
