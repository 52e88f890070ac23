"""Voter-model occupation times on the 2D lattice.

Simulation and estimation laboratory for the two-dimensional voter
model: forward Harris dynamics on a torus, the coalescing-random-walk
dual of the origin's opinion history, and estimators for persistence
and occupation-time tail probabilities together with their decay-rate
scaling fits.
"""

from .lattice_walks import (
    ProbEstimate,
    Site,
    annulus_stay_prob_mc,
    hit_origin_before_exit_exact,
    hit_origin_before_exit_mc,
    lawler_reference_hit_before_exit,
    lawler_reference_hit_by_time,
    meet_prob_mc,
    sample_srw,
)
from .forward_voter import (
    ForwardState,
    TorusConfig,
    evolve,
    forward_covariance_mc,
    forward_persistence_mc,
    forward_tail_mc,
    init_bernoulli,
)
from .dual_coalescer import (
    DualBatch,
    DualSample,
    JumpBudgetExceeded,
    count_window,
    occupation_sample,
    sample_batch,
    simulate_dual,
)
from .estimators import (
    PersistenceEstimate,
    ScalingFit,
    TailEstimate,
    fit_scaling,
    magnetization_tail,
    mean_window_count,
    persistence_dual,
    tail_dual,
    variance_identity_check,
)

__version__ = "0.1.0"

__all__ = [
    "ProbEstimate",
    "Site",
    "annulus_stay_prob_mc",
    "hit_origin_before_exit_exact",
    "hit_origin_before_exit_mc",
    "lawler_reference_hit_before_exit",
    "lawler_reference_hit_by_time",
    "meet_prob_mc",
    "sample_srw",
    "ForwardState",
    "TorusConfig",
    "evolve",
    "forward_covariance_mc",
    "forward_persistence_mc",
    "forward_tail_mc",
    "init_bernoulli",
    "DualBatch",
    "DualSample",
    "JumpBudgetExceeded",
    "count_window",
    "occupation_sample",
    "sample_batch",
    "simulate_dual",
    "PersistenceEstimate",
    "ScalingFit",
    "TailEstimate",
    "fit_scaling",
    "magnetization_tail",
    "mean_window_count",
    "persistence_dual",
    "tail_dual",
    "variance_identity_check",
    "__version__",
]
