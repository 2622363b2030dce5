"""Gradient-L0 smoothing by half-quadratic splitting."""
from __future__ import annotations

import numpy as np

from ..image import ImageBuffer, grad_adjoint_arrays, grad_arrays
from ..reconstruction import solve_spectral


def l0_smooth(src: ImageBuffer, lam: float = 0.02, kappa: float = 2.0, beta_max: float = 1e5) -> ImageBuffer:
    """Approximately minimize ``|S - src|^2 + lam * #{p : grad S_p != 0}``.

    Alternates a hard threshold on the gradient (one decision per pixel, shared
    by all channels) with the screened-Poisson solve of the reconstruction
    module, doubling the coupling weight (by ``kappa``) from ``2 * lam`` until
    it exceeds ``beta_max``.
    """
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if not kappa > 1:
        raise ValueError(f"kappa must be > 1, got {kappa}")
    f = src.data
    if lam == 0:
        return src.replace(f.copy())
    s = f.copy()
    beta = 2.0 * lam
    while beta <= beta_max:
        h, v = grad_arrays(s)
        energy = np.sum(h * h + v * v, axis=0)
        drop = energy <= lam / beta
        h[:, drop] = 0.0
        v[:, drop] = 0.0
        s = solve_spectral(f + beta * grad_adjoint_arrays(h, v), beta)
        beta *= kappa
    return src.replace(s)
