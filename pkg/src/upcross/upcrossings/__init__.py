"""Upcrossing counts, the Q and R events, Monte Carlo tails and chain thinning."""

from .counting import DEFAULT_RADIUS_GRID, UpcrossingQuery, count_upcrossings, count_upcrossings_batch
from .events import FillEvent, detect_Q, detect_R, fill_candidates, largest_fill_radius, transference_density
from .spacing import SpacedTowers, upcrossing_radius_spacing
from .tail import (
    CSV_HEADER,
    ExponentialFit,
    SimulationResult,
    TailRow,
    TailTable,
    binomial_ci,
    fit_exponential,
    replay_trial,
    simulate,
    tail_estimate,
    trial_seed,
)

__all__ = [
    "CSV_HEADER",
    "DEFAULT_RADIUS_GRID",
    "ExponentialFit",
    "FillEvent",
    "SimulationResult",
    "SpacedTowers",
    "TailRow",
    "TailTable",
    "UpcrossingQuery",
    "binomial_ci",
    "count_upcrossings",
    "count_upcrossings_batch",
    "detect_Q",
    "detect_R",
    "fill_candidates",
    "fit_exponential",
    "largest_fill_radius",
    "replay_trial",
    "simulate",
    "tail_estimate",
    "transference_density",
    "trial_seed",
    "upcrossing_radius_spacing",
]
