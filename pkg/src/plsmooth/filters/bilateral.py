"""Joint bilateral filter: exact truncated form, a grid-based fast path and a literal oracle."""
from __future__ import annotations

import math

import numpy as np
from numba import njit
from scipy import ndimage

from ..image import ImageBuffer, check_same_shape


def _radius(sigma_s: float) -> int:
    return int(math.ceil(3.0 * sigma_s))


def _check_params(sigma_s, sigma_r):
    if not sigma_s > 0:
        raise ValueError(f"sigma_s must be > 0, got {sigma_s}")
    if not sigma_r > 0:
        raise ValueError(f"sigma_r must be > 0, got {sigma_r}")


def bilateral(src: ImageBuffer, guide: ImageBuffer | None = None, sigma_s: float = 16.0,
              sigma_r: float = 0.1, fast: bool = False) -> ImageBuffer:
    """Joint bilateral filter of ``src`` with range weights taken from ``guide``.

    The spatial window is the square of half-width ``ceil(3 * sigma_s)``, clipped
    to the image. Range distance is Euclidean over the guide's channels. With
    ``fast=True`` a bilateral grid approximation is used instead; it needs a
    single-channel guide, and colour input without a guide is filtered per channel.
    """
    _check_params(sigma_s, sigma_r)
    if fast and guide is None:
        # Colour self-guidance on the grid: each channel guides itself.
        out = np.stack([_bilateral_grid(plane[None], plane, sigma_s, sigma_r)[0] for plane in src.data])
        return src.replace(out)
    guide = src if guide is None else guide
    check_same_shape(src, guide)
    if fast:
        if guide.channels != 1:
            raise ValueError("the grid fast path needs a single-channel guide")
        out = _bilateral_grid(src.data, guide.data[0], sigma_s, sigma_r)
    else:
        out = _bilateral_exact(src.data, guide.data, sigma_s, sigma_r)
    return src.replace(out)


def _bilateral_exact(u: np.ndarray, g: np.ndarray, sigma_s: float, sigma_r: float) -> np.ndarray:
    _, h, w = u.shape
    rad = _radius(sigma_s)
    ry, rx = min(rad, h - 1), min(rad, w - 1)
    num = np.zeros_like(u)
    den = np.zeros((h, w))
    inv_s = 1.0 / (2.0 * sigma_s * sigma_s)
    inv_r = 1.0 / (2.0 * sigma_r * sigma_r)
    for dy in range(-ry, ry + 1):
        # p rows [y0, y1) see q rows shifted by dy
        y0, y1 = max(0, -dy), min(h, h - dy)
        for dx in range(-rx, rx + 1):
            x0, x1 = max(0, -dx), min(w, w - dx)
            gp = g[:, y0:y1, x0:x1]
            gq = g[:, y0 + dy:y1 + dy, x0 + dx:x1 + dx]
            d2 = np.sum((gp - gq) ** 2, axis=0)
            wgt = np.exp(-(dx * dx + dy * dy) * inv_s - d2 * inv_r)
            num[:, y0:y1, x0:x1] += wgt * u[:, y0 + dy:y1 + dy, x0 + dx:x1 + dx]
            den[y0:y1, x0:x1] += wgt
    return num / den


def bilateral_bruteforce(src: ImageBuffer, guide: ImageBuffer | None = None, sigma_s: float = 16.0,
                         sigma_r: float = 0.1) -> ImageBuffer:
    """Per-pixel double loop over the window; for tests on small images."""
    guide = src if guide is None else guide
    check_same_shape(src, guide)
    _check_params(sigma_s, sigma_r)
    u, g = src.data, guide.data
    _, h, w = u.shape
    rad = _radius(sigma_s)
    out = np.empty_like(u)
    for y in range(h):
        for x in range(w):
            num = np.zeros(u.shape[0])
            den = 0.0
            for qy in range(max(0, y - rad), min(h, y + rad + 1)):
                for qx in range(max(0, x - rad), min(w, x + rad + 1)):
                    ds = (qx - x) ** 2 + (qy - y) ** 2
                    dr = float(np.sum((g[:, y, x] - g[:, qy, qx]) ** 2))
                    wgt = math.exp(-ds / (2 * sigma_s**2)) * math.exp(-dr / (2 * sigma_r**2))
                    num += wgt * u[:, qy, qx]
                    den += wgt
            out[:, y, x] = num / den
    return src.replace(out)


# Grid cells per sigma, spatially and in range.
_GRID_CELLS_PER_SIGMA = 2.0


@njit(cache=True)
def _splat(u, g, step_s, step_r, gmin, grid):
    c, h, w = u.shape
    for y in range(h):
        fy = y / step_s
        iy = int(fy)
        ty = fy - iy
        for x in range(w):
            fx = x / step_s
            ix = int(fx)
            tx = fx - ix
            fz = (g[y, x] - gmin) / step_r
            iz = int(fz)
            tz = fz - iz
            for oy in range(2):
                wy = ty if oy else 1.0 - ty
                for ox in range(2):
                    wx = tx if ox else 1.0 - tx
                    for oz in range(2):
                        wz = tz if oz else 1.0 - tz
                        wgt = wy * wx * wz
                        for k in range(c):
                            grid[k, iy + oy, ix + ox, iz + oz] += wgt * u[k, y, x]
                        grid[c, iy + oy, ix + ox, iz + oz] += wgt


@njit(cache=True)
def _slice(grid, g, step_s, step_r, gmin, out):
    c, h, w = out.shape
    acc = np.empty(c + 1)
    for y in range(h):
        fy = y / step_s
        iy = int(fy)
        ty = fy - iy
        for x in range(w):
            fx = x / step_s
            ix = int(fx)
            tx = fx - ix
            fz = (g[y, x] - gmin) / step_r
            iz = int(fz)
            tz = fz - iz
            acc[:] = 0.0
            for oy in range(2):
                wy = ty if oy else 1.0 - ty
                for ox in range(2):
                    wx = tx if ox else 1.0 - tx
                    for oz in range(2):
                        wz = tz if oz else 1.0 - tz
                        wgt = wy * wx * wz
                        for k in range(c + 1):
                            acc[k] += wgt * grid[k, iy + oy, ix + ox, iz + oz]
            for k in range(c):
                out[k, y, x] = acc[k] / acc[c]


def _bilateral_grid(u: np.ndarray, g: np.ndarray, sigma_s: float, sigma_r: float) -> np.ndarray:
    c, h, w = u.shape
    cells = _GRID_CELLS_PER_SIGMA
    step_s = sigma_s / cells
    step_r = sigma_r / cells
    gmin = float(g.min())
    shape = (
        int((h - 1) / step_s) + 2,
        int((w - 1) / step_s) + 2,
        int((float(g.max()) - gmin) / step_r) + 2,
    )
    grid = np.zeros((c + 1, *shape))
    _splat(np.ascontiguousarray(u), np.ascontiguousarray(g), step_s, step_r, gmin, grid)
    # Splatting and slicing are each a unit tent per axis (variance 1/6 cell^2);
    # shrink the blur so the composite kernel keeps the requested sigma.
    blur = math.sqrt(cells * cells - 1.0 / 3.0)
    for k in range(c + 1):
        grid[k] = ndimage.gaussian_filter(grid[k], sigma=blur, mode="constant", truncate=3.0 * cells / blur)
    out = np.empty_like(u)
    _slice(grid, np.ascontiguousarray(g), step_s, step_r, gmin, out)
    return out
