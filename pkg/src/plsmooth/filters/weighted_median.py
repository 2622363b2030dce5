"""Joint weighted median filter over quantized intensity levels."""
from __future__ import annotations

import numpy as np
from numba import njit, prange

from ..image import ImageBuffer, check_same_shape


def quantize_levels(u: np.ndarray, bins: int) -> np.ndarray:
    """Index of the nearest level ``k / (bins - 1)`` for each sample (clamped to [0, 1])."""
    return np.rint(np.clip(u, 0.0, 1.0) * (bins - 1)).astype(np.int64)


@njit(cache=True, parallel=True)
def _wmf(levels, guide, radius, inv_2s2, bins):
    c, h, w = levels.shape
    gc = guide.shape[0]
    out = np.empty((c, h, w), dtype=np.int64)
    for y in prange(h):
        hist = np.zeros(bins)
        wgt = np.empty((2 * radius + 1) * (2 * radius + 1))
        y0 = max(0, y - radius)
        y1 = min(h, y + radius + 1)
        for x in range(w):
            x0 = max(0, x - radius)
            x1 = min(w, x + radius + 1)
            n = 0
            for qy in range(y0, y1):
                for qx in range(x0, x1):
                    d2 = 0.0
                    for k in range(gc):
                        d = guide[k, y, x] - guide[k, qy, qx]
                        d2 += d * d
                    wgt[n] = np.exp(-d2 * inv_2s2)
                    n += 1
            for k in range(c):
                # Full O(bins) clear and scan per pixel, as in a sliding-histogram median.
                hist[:] = 0.0
                n = 0
                for qy in range(y0, y1):
                    for qx in range(x0, x1):
                        hist[levels[k, qy, qx]] += wgt[n]
                        n += 1
                total = 0.0
                for b in range(bins):
                    total += hist[b]
                half = 0.5 * total
                acc = 0.0
                pick = bins - 1
                for b in range(bins):
                    acc += hist[b]
                    if acc >= half:
                        pick = b
                        break
                out[k, y, x] = pick
    return out


def weighted_median(src: ImageBuffer, guide: ImageBuffer | None = None, radius: int = 16,
                    sigma_r: float = 0.1, bins: int = 8193) -> ImageBuffer:
    """Weighted median of ``src`` over the ``(2r+1)^2`` window clipped to the image.

    ``src`` is first quantized to ``bins`` uniform levels on [0, 1]; each window
    sample is weighted by a Gaussian of its guide distance to the centre pixel,
    and the output is the smallest level whose cumulative weight reaches half
    of the window total. Output samples are always exactly ``k / (bins - 1)``.
    """
    guide = src if guide is None else guide
    check_same_shape(src, guide)
    if radius < 1 or bins < 2 or not sigma_r > 0:
        raise ValueError("weighted_median needs radius >= 1, bins >= 2, sigma_r > 0")
    levels = quantize_levels(src.data, bins)
    picked = _wmf(levels, np.ascontiguousarray(guide.data), int(radius), 1.0 / (2.0 * sigma_r**2), int(bins))
    return src.replace(picked / (bins - 1))
