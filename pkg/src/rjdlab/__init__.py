"""Numerical laboratory for reflected jump-diffusions on the half-line.

The package simulates nonnegative diffusions with boundary reflection at the
origin and upward jumps, certifies exponential decay rates for them via
exponential test functions, couples ordered pairs of paths monotonically, and
compares certified distance bounds against Monte Carlo estimates.

Layout
------
model        process descriptions: drifts, noise, jump mechanisms, presets
certificate  decay-rate certificates and the distance bounds they imply
engine       reflected Euler stepping, jump clocks, ensembles, streams
coupling     synchronous monotone coupling of ordered path pairs
wasserstein  transport distances, decay curves, long-run comparisons
cli          config-driven command line entry points
"""

__version__ = "0.1.0"

from .certificate import (
    RateCertificate,
    contraction_bound,
    decay_rate,
    lyapunov_bound,
    lyapunov_bound_measures,
    lyapunov_drift_rate,
    make_certificate,
    maximize_decay_rate,
)
from .coupling import (
    CoupledEnsemble,
    CoupledPaths,
    coupled_ensemble,
    coupled_jump,
    coupled_step,
    gap_envelope_violation,
    simulate_coupled,
    supermartingale_probe,
)
from .engine import (
    EnsembleResult,
    EnsembleSummary,
    PathSample,
    PathStreams,
    default_burn_in,
    estimate_stationary,
    reflected_step,
    sample_ensemble,
    sample_jump_times,
    simulate_path,
)
from .model import (
    AffineDrift,
    AssumptionReport,
    ConstantDrift,
    ExponentialDisplacement,
    FixedDisplacement,
    MixtureDisplacement,
    NoJumps,
    ProcessSpec,
    TabulatedDrift,
    UpwardJumps,
    check_assumptions,
    drifted_rbm,
    exp_jump_diffusion,
    probe_grid,
    reflected_ou,
)
from .wasserstein import (
    DecayCurve,
    EmpiricalDistribution,
    decay_curve,
    log_slope,
    path_decay_curve,
    path_sup_distance,
    stationary_gap,
    wp_bruteforce,
    wp_exact,
)

__all__ = [
    "__version__",
    "AffineDrift",
    "AssumptionReport",
    "ConstantDrift",
    "CoupledEnsemble",
    "CoupledPaths",
    "DecayCurve",
    "EmpiricalDistribution",
    "EnsembleResult",
    "EnsembleSummary",
    "ExponentialDisplacement",
    "FixedDisplacement",
    "MixtureDisplacement",
    "NoJumps",
    "PathSample",
    "PathStreams",
    "ProcessSpec",
    "RateCertificate",
    "TabulatedDrift",
    "UpwardJumps",
    "check_assumptions",
    "contraction_bound",
    "coupled_ensemble",
    "coupled_jump",
    "coupled_step",
    "decay_curve",
    "decay_rate",
    "default_burn_in",
    "drifted_rbm",
    "estimate_stationary",
    "exp_jump_diffusion",
    "gap_envelope_violation",
    "log_slope",
    "lyapunov_bound",
    "lyapunov_bound_measures",
    "lyapunov_drift_rate",
    "make_certificate",
    "maximize_decay_rate",
    "path_decay_curve",
    "path_sup_distance",
    "probe_grid",
    "reflected_ou",
    "reflected_step",
    "sample_ensemble",
    "sample_jump_times",
    "simulate_coupled",
    "simulate_path",
    "stationary_gap",
    "supermartingale_probe",
    "wp_bruteforce",
    "wp_exact",
]
