"""Code constructions for access trees and access structures."""

from .kronecker import (
    KroneckerResult, SizePrediction, build_kronecker, kronecker_field_size,
    kronecker_to_code, predict_kronecker_size,
)
from .lpcode import LpCode, build_lp_code, overhead_bounds, smallest_set_size
from .partitioned import (
    Assignment, assignment_code, build_partitioned_code, fa_optimal, uniform_assignment,
)

__all__ = [
    "Assignment", "KroneckerResult", "LpCode", "SizePrediction", "assignment_code",
    "build_kronecker", "build_lp_code", "build_partitioned_code", "fa_optimal",
    "kronecker_field_size", "kronecker_to_code", "overhead_bounds",
    "predict_kronecker_size", "smallest_set_size", "uniform_assignment",
]
