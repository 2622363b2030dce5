from .bilateral import bilateral, bilateral_bruteforce
from .domain_transform import domain_transform_nc
from .guided import guided_filter
from .l0 import l0_smooth
from .spec import L0, Bilateral, DomainTransformNC, FilterSpec, Guided, WeightedMedian
from .weighted_median import weighted_median

__all__ = [
    "bilateral",
    "bilateral_bruteforce",
    "domain_transform_nc",
    "guided_filter",
    "l0_smooth",
    "weighted_median",
    "FilterSpec",
    "Bilateral",
    "DomainTransformNC",
    "WeightedMedian",
    "L0",
    "Guided",
]
