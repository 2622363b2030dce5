"""Filter selection: one frozen dataclass per piecewise-constant filter."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..image import ImageBuffer
from .bilateral import bilateral
from .domain_transform import domain_transform_nc
from .guided import guided_filter
from .l0 import l0_smooth
from .weighted_median import weighted_median


def _positive(name, value):
    if not value > 0:
        raise ValueError(f"{name} must be > 0, got {value}")


@dataclass(frozen=True)
class Bilateral:
    sigma_s: float = 16.0
    sigma_r: float = 0.1
    fast: bool = False

    def __post_init__(self):
        _positive("sigma_s", self.sigma_s)
        _positive("sigma_r", self.sigma_r)

    def apply(self, src: ImageBuffer, guide: ImageBuffer | None = None) -> ImageBuffer:
        return bilateral(src, guide, self.sigma_s, self.sigma_r, fast=self.fast)


@dataclass(frozen=True)
class DomainTransformNC:
    sigma_s: float = 16.0
    sigma_r: float = 0.1
    iterations: int = 3

    def __post_init__(self):
        _positive("sigma_s", self.sigma_s)
        _positive("sigma_r", self.sigma_r)
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")

    def apply(self, src, guide=None):
        return domain_transform_nc(src, guide, self.sigma_s, self.sigma_r, self.iterations)


@dataclass(frozen=True)
class WeightedMedian:
    # bins counts quantization levels. An odd count keeps 0.5 (a zero gradient
    # after normalization) exactly representable. With 2**13 steps the rounding
    # bias of a constant gradient is at most 1/8192 per axis, which the beta=16
    # reconstruction amplifies by < 3.6 per axis: ramps stay within 1e-3.
    radius: int = 16
    sigma_r: float = 0.1
    bins: int = 8193

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        _positive("sigma_r", self.sigma_r)
        if self.bins < 2:
            raise ValueError(f"bins must be >= 2, got {self.bins}")

    def apply(self, src, guide=None):
        return weighted_median(src, guide, self.radius, self.sigma_r, self.bins)


@dataclass(frozen=True)
class L0:
    lam: float = 0.007
    kappa: float = 2.0
    beta_max: float = 1e5

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if not self.kappa > 1:
            raise ValueError(f"kappa must be > 1, got {self.kappa}")

    def apply(self, src, guide=None):
        # Global method: there is no guidance image.
        return l0_smooth(src, self.lam, self.kappa, self.beta_max)


@dataclass(frozen=True)
class Guided:
    radius: int = 16
    epsilon: float = 0.01

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")

    def apply(self, src, guide=None):
        if guide is None and src.channels != 1:
            # Gray guidance for colour input.
            guide = src.replace(src.data.mean(axis=0, keepdims=True))
        return guided_filter(src, guide, self.radius, self.epsilon)


FilterSpec = Union[Bilateral, DomainTransformNC, WeightedMedian, L0, Guided]
