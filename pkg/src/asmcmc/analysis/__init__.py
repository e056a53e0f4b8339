"""Numerical checks of acceptance-rate bounds, drift and stability."""

from .bounds import (
    acc_over_points,
    check_acc_envelope,
    check_lower_bound_small_scale,
    check_thresholds_consistent,
    check_upper_bound_compact,
    find_target_scale,
    lower_bound_level,
    mean_acc_oracle,
    near_boundary_points,
    proof_scale_upper,
)
from .drift import DriftFunction, drift_ratio, estimate_drift, overlap_report, proposal_tv_lipschitz
from .stats import Functional, batch_means_se, mann_kendall, slln_report, stability_report

__all__ = [
    "DriftFunction",
    "Functional",
    "acc_over_points",
    "batch_means_se",
    "check_acc_envelope",
    "check_lower_bound_small_scale",
    "check_thresholds_consistent",
    "check_upper_bound_compact",
    "drift_ratio",
    "estimate_drift",
    "find_target_scale",
    "lower_bound_level",
    "mann_kendall",
    "mean_acc_oracle",
    "near_boundary_points",
    "overlap_report",
    "proof_scale_upper",
    "proposal_tv_lipschitz",
    "slln_report",
    "stability_report",
]
