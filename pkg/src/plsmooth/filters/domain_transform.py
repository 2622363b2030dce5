"""Normalized-convolution domain transform filter.

Each 1-D pass warps the row into the transformed coordinate
``ct(x) = sum_{u <= x} 1 + sigma_s / sigma_r * sum_c |guide_c(u) - guide_c(u - 1)|``
and replaces every sample by the plain mean of the samples whose warped
position lies within ``sqrt(3) * sigma_H`` of its own.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from ..image import ImageBuffer, check_same_shape


def iteration_sigmas(sigma_s: float, iterations: int) -> list[float]:
    """Per-iteration box sigmas; their squares sum to ``sigma_s ** 2``."""
    n = iterations
    return [sigma_s * math.sqrt(3.0) * 2.0 ** (n - i) / math.sqrt(4.0**n - 1.0) for i in range(1, n + 1)]


def transformed_coordinates(guide: np.ndarray, sigma_s: float, sigma_r: float, axis: int) -> np.ndarray:
    """Cumulative warped coordinate along ``axis`` (1 for y, 2 for x) of a ``(C, H, W)`` guide."""
    d = np.zeros(guide.shape[1:])
    diff = np.abs(np.diff(guide, axis=axis)).sum(axis=0)
    if axis == 2:
        d[:, 1:] = diff
    else:
        d[1:, :] = diff
    return np.cumsum(1.0 + (sigma_s / sigma_r) * d, axis=axis - 1)


@njit(cache=True, parallel=True)
def _box_rows(data, ct, radius):
    """Box mean of each row of ``data`` (C, R, N) over the ct-window of ``radius``."""
    c, rows, n = data.shape
    out = np.empty_like(data)
    for r in prange(rows):
        prefix = np.zeros((c, n + 1))
        for k in range(c):
            for i in range(n):
                prefix[k, i + 1] = prefix[k, i] + data[k, r, i]
        lo = 0
        hi = 0
        for i in range(n):
            while ct[r, i] - ct[r, lo] > radius:
                lo += 1
            while hi < n - 1 and ct[r, hi + 1] - ct[r, i] <= radius:
                hi += 1
            count = hi - lo + 1
            for k in range(c):
                out[k, r, i] = (prefix[k, hi + 1] - prefix[k, lo]) / count
    return out


def domain_transform_nc(src: ImageBuffer, guide: ImageBuffer | None = None, sigma_s: float = 16.0,
                        sigma_r: float = 0.1, iterations: int = 3) -> ImageBuffer:
    guide = src if guide is None else guide
    check_same_shape(src, guide)
    if not sigma_s > 0 or not sigma_r > 0:
        raise ValueError("sigma_s and sigma_r must be > 0")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    ct_x = transformed_coordinates(guide.data, sigma_s, sigma_r, axis=2)
    ct_y = np.ascontiguousarray(transformed_coordinates(guide.data, sigma_s, sigma_r, axis=1).T)
    out = src.data.copy()
    for sigma_h in iteration_sigmas(sigma_s, iterations):
        radius = sigma_h * math.sqrt(3.0)
        out = _box_rows(out, ct_x, radius)
        cols = np.ascontiguousarray(out.transpose(0, 2, 1))
        out = np.ascontiguousarray(_box_rows(cols, ct_y, radius).transpose(0, 2, 1))
    return src.replace(out)
