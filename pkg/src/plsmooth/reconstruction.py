"""Image reconstruction from an intensity prior and a target gradient field.

Minimizes ``|u - i0|^2 + beta * (|Dx u - gx|^2 + |Dy u - gy|^2)`` whose normal
equations ``(I + beta * D^T D) u = i0 + beta * D^T g`` have a constant-coefficient
Neumann Laplacian. The type-II DCT diagonalizes that operator, so the default
solver is exact; Jacobi-preconditioned CG is kept as an independent cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft

from .errors import CgDidNotConverge, DimensionMismatch
from .image import GradientField, ImageBuffer, grad_adjoint_arrays, grad_arrays
from .parallel import get_threads

SOLVERS = ("spectral", "cg")


@dataclass(frozen=True)
class ReconstructionConfig:
    beta: float = 16.0
    solver: str = "spectral"
    cg_tol: float = 1e-8
    cg_max_iters: int = 1000

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not self.cg_tol > 0:
            raise ValueError(f"cg_tol must be > 0, got {self.cg_tol}")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.cg_max_iters < 1:
            raise ValueError("cg_max_iters must be >= 1")


def _check(i0: ImageBuffer, g: GradientField, *others: ImageBuffer):
    shape = i0.shape
    for item in (g.gx, g.gy, *others):
        if item.shape != shape:
            raise DimensionMismatch(f"shape {item.shape} does not match {shape}")


def energy(candidate: ImageBuffer, i0: ImageBuffer, g: GradientField, beta: float) -> float:
    _check(i0, g, candidate)
    u = candidate.data
    gx, gy = grad_arrays(u)
    data_term = np.sum((u - i0.data) ** 2)
    grad_term = np.sum((gx - g.gx.data) ** 2) + np.sum((gy - g.gy.data) ** 2)
    return float(data_term + beta * grad_term)


def energy_gradient(candidate: ImageBuffer, i0: ImageBuffer, g: GradientField, beta: float) -> np.ndarray:
    """Analytic derivative of :func:`energy` with respect to every sample of ``candidate``."""
    _check(i0, g, candidate)
    u = candidate.data
    gx, gy = grad_arrays(u)
    return 2.0 * (u - i0.data) + 2.0 * beta * grad_adjoint_arrays(gx - g.gx.data, gy - g.gy.data)


def residual_gradient_check(candidate: ImageBuffer, i0: ImageBuffer, g: GradientField, beta: float) -> float:
    """Sup-norm of the energy gradient; zero at the exact minimizer."""
    return float(np.max(np.abs(energy_gradient(candidate, i0, g, beta))))


@lru_cache(maxsize=16)
def _laplacian_eigenvalues(height: int, width: int) -> np.ndarray:
    ky = 2.0 - 2.0 * np.cos(np.pi * np.arange(height) / height)
    kx = 2.0 - 2.0 * np.cos(np.pi * np.arange(width) / width)
    eig = ky[:, None] + kx[None, :]
    eig.setflags(write=False)
    return eig


def _rhs(i0: ImageBuffer, g: GradientField, beta: float) -> np.ndarray:
    return i0.data + beta * grad_adjoint_arrays(g.gx.data, g.gy.data)


def solve_spectral(rhs: np.ndarray, beta: float) -> np.ndarray:
    """Solve ``(I + beta * D^T D) u = rhs`` per plane of a ``(..., H, W)`` array."""
    h, w = rhs.shape[-2:]
    denom = 1.0 + beta * _laplacian_eigenvalues(h, w)
    workers = get_threads()
    coeffs = fft.dctn(rhs, type=2, norm="ortho", axes=(-2, -1), workers=workers)
    coeffs /= denom
    return fft.idctn(coeffs, type=2, norm="ortho", axes=(-2, -1), workers=workers)


def _jacobi_diagonal(h: int, w: int, beta: float) -> np.ndarray:
    deg_x = np.full(w, 2.0)
    deg_y = np.full(h, 2.0)
    deg_x[0] -= 1
    deg_x[-1] -= 1
    deg_y[0] -= 1
    deg_y[-1] -= 1
    if w == 1:
        deg_x[:] = 0.0
    if h == 1:
        deg_y[:] = 0.0
    return 1.0 + beta * (deg_y[:, None] + deg_x[None, :])


def solve_cg(rhs: np.ndarray, beta: float, tol: float = 1e-8, max_iters: int = 1000,
             x0: np.ndarray | None = None) -> np.ndarray:
    """Jacobi-preconditioned conjugate gradient for one ``(H, W)`` plane."""

    def apply(u):
        gx, gy = grad_arrays(u)
        return u + beta * grad_adjoint_arrays(gx, gy)

    inv_diag = 1.0 / _jacobi_diagonal(*rhs.shape, beta)
    b_norm = np.linalg.norm(rhs)
    x = np.zeros_like(rhs) if x0 is None else x0.copy()
    if b_norm == 0.0:
        return np.zeros_like(rhs)
    r = rhs - apply(x)
    z = inv_diag * r
    p = z.copy()
    rz = np.vdot(r, z)
    res = np.linalg.norm(r) / b_norm
    for it in range(max_iters):
        if res <= tol:
            return x
        ap = apply(p)
        alpha = rz / np.vdot(p, ap)
        x += alpha * p
        r -= alpha * ap
        res = np.linalg.norm(r) / b_norm
        z = inv_diag * r
        rz_new = np.vdot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    if res <= tol:
        return x
    raise CgDidNotConverge(max_iters, res)


def reconstruct(i0: ImageBuffer, g: GradientField, cfg: ReconstructionConfig | None = None) -> ImageBuffer:
    """Return the minimizer of :func:`energy` for ``cfg.beta``."""
    cfg = cfg or ReconstructionConfig()
    _check(i0, g)
    if cfg.beta == 0:
        return i0.replace(i0.data.copy())
    rhs = _rhs(i0, g, cfg.beta)
    if cfg.solver == "spectral":
        out = solve_spectral(rhs, cfg.beta)
    else:
        out = np.stack([solve_cg(plane, cfg.beta, cfg.cg_tol, cfg.cg_max_iters) for plane in rhs])
    return i0.replace(out)
