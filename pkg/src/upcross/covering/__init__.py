"""Ball calculus, Vitali selection, towers and the tower-sandwich dichotomy."""

from .balls import Ball, BallCollection, Tower, delta_expansion, delta_interior, is_delta_expanding, scale_radius
from .constants import (
    CoveringConstants,
    D_constant,
    Delta_constant,
    K_constant,
    radius_ratio_bound,
    sandwich_bound,
    vitali_constant,
)
from .sandwich import FillWitness, GrowthCertificate, check_delta_fill, find_delta_fill, verify_sandwich
from .serialize import ball_from_json, ball_to_json, collection_from_json, collection_to_json
from .spaces import BoxSpace, CayleySpace, as_space, box_space_for
from .thresholds import ThresholdTable, compute_thresholds
from .vitali import (
    absorption_violations,
    boundary_measure,
    effective_vitali,
    finitary_vitali,
    maximal_balls,
    measured_vitali,
)

__all__ = [
    "Ball",
    "BallCollection",
    "BoxSpace",
    "CayleySpace",
    "CoveringConstants",
    "D_constant",
    "Delta_constant",
    "FillWitness",
    "GrowthCertificate",
    "K_constant",
    "ThresholdTable",
    "Tower",
    "absorption_violations",
    "as_space",
    "ball_from_json",
    "ball_to_json",
    "boundary_measure",
    "box_space_for",
    "check_delta_fill",
    "collection_from_json",
    "collection_to_json",
    "compute_thresholds",
    "delta_expansion",
    "delta_interior",
    "effective_vitali",
    "finitary_vitali",
    "find_delta_fill",
    "is_delta_expanding",
    "maximal_balls",
    "measured_vitali",
    "radius_ratio_bound",
    "sandwich_bound",
    "scale_radius",
    "vitali_constant",
    "verify_sandwich",
]
