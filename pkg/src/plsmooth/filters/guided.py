"""Guided image filter (gray guidance), the locally-linear baseline."""
from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch
from ..image import ImageBuffer, check_same_shape


def box_sum(a: np.ndarray, r: int) -> np.ndarray:
    """Sum over the ``(2r+1)^2`` window clipped to the image, for the last two axes."""
    h, w = a.shape[-2:]
    c = np.cumsum(a, axis=-2)
    c = np.concatenate([np.zeros_like(c[..., :1, :]), c], axis=-2)
    top = np.minimum(np.arange(h) + r + 1, h)
    bot = np.maximum(np.arange(h) - r, 0)
    rows = c[..., top, :] - c[..., bot, :]
    c = np.cumsum(rows, axis=-1)
    c = np.concatenate([np.zeros_like(c[..., :, :1]), c], axis=-1)
    right = np.minimum(np.arange(w) + r + 1, w)
    left = np.maximum(np.arange(w) - r, 0)
    return c[..., :, right] - c[..., :, left]


def guided_filter(src: ImageBuffer, guide: ImageBuffer | None = None, radius: int = 16,
                  epsilon: float = 0.01) -> ImageBuffer:
    guide = src if guide is None else guide
    check_same_shape(src, guide)
    if guide.channels != 1:
        raise DimensionMismatch("guided_filter uses a single-channel guide")
    if radius < 1 or epsilon < 0:
        raise ValueError("guided_filter needs radius >= 1 and epsilon >= 0")
    # Centring the guide leaves a unchanged and makes a constant guide exactly zero.
    g = guide.data[0] - guide.data[0].mean()
    p = src.data
    n = box_sum(np.ones_like(g), radius)
    mean_g = box_sum(g, radius) / n
    mean_p = box_sum(p, radius) / n
    cov = box_sum(g * p, radius) / n - mean_g * mean_p
    var = box_sum(g * g, radius) / n - mean_g * mean_g
    denom = var + epsilon
    safe = denom > 0
    a = np.where(safe, cov / np.where(safe, denom, 1.0), 0.0)
    b = mean_p - a * mean_g
    out = box_sum(a, radius) / n * g + box_sum(b, radius) / n
    return src.replace(out)
