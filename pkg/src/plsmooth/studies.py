"""Reproducibility studies: gradient reversals, quantization bins and the beta sweep.

Every study returns :class:`StudyRow` records that serialize to the CSV schema
``filter,arm,param_set,beta,metric,value``.
"""
from __future__ import annotations

import csv
import time
from dataclasses import astuple, dataclass
from typing import Dict, Iterable, List, Sequence, TextIO, Tuple

import numpy as np

from .filters.spec import L0, Bilateral, DomainTransformNC, FilterSpec, WeightedMedian
from .image import ImageBuffer, normalize_unit
from .pipeline import (
    BETA_ENHANCE,
    PipelineConfig,
    detail_enhance,
    fig2_signal,
    gradient_reversal_count,
    pc_smooth,
    pc_smooth_then_reconstruct,
    pl_smooth,
)

CSV_HEADER = ("filter", "arm", "param_set", "beta", "metric", "value")

# (piecewise-constant, piecewise-linear) parameter pairs per application.
DETAIL_PAIRS: Dict[str, Tuple[FilterSpec, FilterSpec]] = {
    "bilateral": (Bilateral(16.0, 0.1), Bilateral(16.0, 0.025)),
    "l0": (L0(0.007), L0(0.00175)),
    "dt": (DomainTransformNC(16.0, 0.1), DomainTransformNC(16.0, 0.025)),
    "wmf": (WeightedMedian(16, 0.1), WeightedMedian(16, 0.025)),
}
TONEMAP_PAIRS: Dict[str, Tuple[FilterSpec, FilterSpec]] = {
    "bilateral": (Bilateral(16.0, 0.12), Bilateral(16.0, 0.03)),
    "l0": (L0(0.07), L0(0.0175)),
    "dt": (DomainTransformNC(16.0, 0.12), DomainTransformNC(16.0, 0.03)),
    "wmf": (WeightedMedian(16, 0.12), WeightedMedian(16, 0.03)),
}
FLASH_PAIRS: Dict[str, Tuple[FilterSpec, FilterSpec]] = {
    "bilateral": (Bilateral(16.0, 0.02), Bilateral(16.0, 0.005)),
    "wmf": (WeightedMedian(16, 0.02), WeightedMedian(16, 0.005)),
}

REFERENCE_STEPS = 2**12


@dataclass(frozen=True)
class StudyRow:
    filter: str
    arm: str
    param_set: str
    beta: float | None
    metric: str
    value: float | int


def write_csv(rows: Iterable[StudyRow], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        values = list(astuple(row))
        values[3] = "" if row.beta is None else repr(float(row.beta))
        values[5] = str(row.value) if isinstance(row.value, int) else repr(float(row.value))
        writer.writerow(values)


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    mse = float(np.mean((np.asarray(a) - np.asarray(b)) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(peak * peak / mse)


def reversal_study(filters: Sequence[str] = ("bilateral", "l0", "dt", "wmf"), k: float = 2.0,
                   tau: float = 0.01, beta: float = BETA_ENHANCE,
                   signal: ImageBuffer | None = None) -> List[StudyRow]:
    """Reversal counts of the k-times enhanced scan line for the pc, pl and control arms."""
    signal = fig2_signal() if signal is None else signal
    rows = []
    for name in filters:
        pc_spec, pl_spec = DETAIL_PAIRS[name]
        arms = {
            "pc": (pc_smooth(signal, pc_spec), None),
            "pl": (pl_smooth(signal, PipelineConfig(filter=pl_spec, beta=beta)), beta),
            "control": (pc_smooth_then_reconstruct(signal, pc_spec, beta), beta),
        }
        for arm, (smoothed, arm_beta) in arms.items():
            report = gradient_reversal_count(signal, detail_enhance(signal, smoothed, k), tau)
            rows.append(StudyRow(name, arm, f"fig2_k{k:g}_tau{tau:g}", arm_beta, "reversal_count",
                                 int(report.reversal_count)))
    return rows


def quantization_test_image(size: int = 128, seed: int = 0) -> ImageBuffer:
    """Normalized HDR ramp (luminance 50..950 of a 0..1000 range) with faint texture."""
    rng = np.random.default_rng(seed)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=2)
    y, x = np.mgrid[0:size, 0:size].astype(float)
    ramp = 50.0 + 900.0 * x / (size - 1)
    texture = 3.0 * np.sin(2.0 * np.pi * x / 9.0 + phase[0]) * np.sin(2.0 * np.pi * y / 13.0 + phase[1])
    hdr = ImageBuffer((ramp + texture)[None], (0.0, 1000.0))
    return normalize_unit(hdr)[0]


def _timed(fn, repeats: int):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def quantization_study(img: ImageBuffer, radius: int = 4, sigma_r: float = 0.1,
                       bin_counts: Sequence[int] = (2**8, 2**10, 2**12), beta: float = BETA_ENHANCE,
                       repeats: int = 3) -> List[StudyRow]:
    """PSNR and wall time of weighted-median smoothing at several quantization counts.

    A count ``B`` means ``B`` uniform quantization steps on [0, 1], i.e. ``B + 1``
    levels, so that 0.5 (the normalized zero gradient) is a level for every even
    ``B``. Each arm is scored against its own run at ``2**12`` steps. Times are the
    best of ``repeats`` runs after a warm-up call.
    """

    def arms(steps):
        spec = WeightedMedian(radius, sigma_r, steps + 1)
        return {
            "pc": lambda: pc_smooth(img, spec),
            "pl": lambda: pl_smooth(img, PipelineConfig(filter=spec, beta=beta)),
        }

    # Compile the numba kernels outside the timed region.
    tiny = ImageBuffer(img.data[:, :8, :8])
    WeightedMedian(radius, sigma_r, 3).apply(tiny)

    results = {}
    for steps in sorted(set(bin_counts) | {REFERENCE_STEPS}):
        for arm, fn in arms(steps).items():
            results[steps, arm] = _timed(fn, repeats if steps in bin_counts else 1)

    rows = []
    for steps in bin_counts:
        for arm in ("pc", "pl"):
            out, seconds = results[steps, arm]
            ref = results[REFERENCE_STEPS, arm][0]
            arm_beta = beta if arm == "pl" else None
            tag = f"bins={steps}"
            rows.append(StudyRow("wmf", arm, tag, arm_beta, "psnr_vs_4096", psnr(out.data, ref.data)))
            rows.append(StudyRow("wmf", arm, tag, arm_beta, "seconds", seconds))
    return rows


def synthetic_image(size: int = 64, seed: int = 0) -> ImageBuffer:
    """Ramp, soft step and seeded noise texture in [0, 1], for the beta sweep."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size].astype(float)
    img = 0.1 + 0.4 * x / (size - 1) + 0.3 / (1.0 + np.exp(-(y - size / 2) / 1.5))
    img += 0.03 * rng.standard_normal((size, size))
    return ImageBuffer(np.clip(img, 0.0, 1.0)[None])


def beta_study(img: ImageBuffer, filter: FilterSpec, betas: Sequence[float] = (1.0, 16.0, 256.0, 1024.0),
               name: str = "filter") -> List[StudyRow]:
    """Data term ``|I - I0|^2`` of piecewise-linear smoothing for each beta."""
    rows = []
    for beta in betas:
        out = pl_smooth(img, PipelineConfig(filter=filter, beta=beta))
        rows.append(StudyRow(name, "pl", "beta_sweep", beta, "data_term",
                             float(np.sum((out.data - img.data) ** 2))))
    return rows
