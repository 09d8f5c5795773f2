"""Wasserstein distances on the half-line and decay-curve estimation.

On the real line the optimal transport plan for any convex cost is the
quantile (comonotone) coupling, so the order-p distance between two weighted
samples is computed *exactly* by merging their weight partitions:

    W_p(A, B)^p = integral over u in (0,1) of |F_A^{-1}(u) - F_B^{-1}(u)|^p

evaluated segment by segment on the union of both cumulative-weight grids.
A factorial brute-force oracle over explicit pairings validates the quantile
formula on small instances.

Decay curves report two estimators side by side, on purpose:

* ``wp_coupling`` — the moment of the *constructed* coupling,
  ``(E gap^p)^{1/p}``, which is what the certificate machinery actually
  bounds and is always an upper bound for the true distance;
* ``wp_marginal`` — the exact quantile distance between two independently
  simulated endpoint ensembles, estimating the true distance itself.

Their gap measures how much the shared-noise coupling gives away.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import coupling, engine
from .certificate import (
    RateCertificate,
    contraction_bound,
    lyapunov_bound,
    lyapunov_bound_measures,
)
from .engine import PathStreams
from .model import ProcessSpec

__all__ = [
    "DecayCurve",
    "EmpiricalDistribution",
    "decay_curve",
    "log_slope",
    "path_decay_curve",
    "path_sup_distance",
    "stationary_gap",
    "wp_bruteforce",
    "wp_exact",
]

# per-path substream used for bootstrap resampling (0..2 drive the engine)
BOOTSTRAP = 3
_BOOTSTRAP_ROUNDS = 32


@dataclass(frozen=True)
class EmpiricalDistribution:
    """A weighted sample on the half-line, held sorted.

    Stands in for any law the experiments handle: a time-t endpoint ensemble,
    a long-run ensemble, or a discretized closed-form law.  ``weights``
    defaults to uniform and must sum to one within 1e-12.
    """

    points: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float).ravel()
        if pts.size == 0:
            raise ValueError("empty sample")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        if np.any(pts < 0):
            raise ValueError("points must be nonnegative")
        if self.weights is None:
            w = np.full(pts.size, 1.0 / pts.size)
        else:
            w = np.asarray(self.weights, dtype=float).ravel()
            if w.shape != pts.shape:
                raise ValueError("weights must match points in length")
            if np.any(w <= 0):
                raise ValueError("weights must be positive")
            if abs(w.sum() - 1.0) > 1e-12:
                raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        order = np.argsort(pts, kind="stable")
        object.__setattr__(self, "points", pts[order])
        object.__setattr__(self, "weights", w[order])

    @classmethod
    def from_samples(cls, values) -> "EmpiricalDistribution":
        """Uniformly weighted sample."""
        return cls(np.asarray(values, dtype=float))

    @classmethod
    def from_quantile_function(cls, quantile_fn, n: int) -> "EmpiricalDistribution":
        """Midpoint-quantile discretization of a law given by its quantiles."""
        if n < 1:
            raise ValueError(f"need at least one cell, got {n}")
        u = (np.arange(n) + 0.5) / n
        return cls(np.asarray(quantile_fn(u), dtype=float))

    def mean(self) -> float:
        return float(self.points @ self.weights)


def wp_exact(a: EmpiricalDistribution, b: EmpiricalDistribution, p: float = 1.0) -> float:
    """Exact order-p distance via the merged quantile partition."""
    if not p >= 1:
        raise ValueError(f"order must be at least 1, got {p}")
    ca = np.cumsum(a.weights)
    cb = np.cumsum(b.weights)
    ca[-1] = 1.0
    cb[-1] = 1.0
    edges = np.union1d(ca, cb)
    prev = np.concatenate(([0.0], edges[:-1]))
    widths = edges - prev
    mids = 0.5 * (edges + prev)
    qa = a.points[np.searchsorted(ca, mids, side="left")]
    qb = b.points[np.searchsorted(cb, mids, side="left")]
    cost = float(np.sum(widths * np.abs(qa - qb) ** p))
    return cost ** (1.0 / p)


def wp_bruteforce(a: EmpiricalDistribution, b: EmpiricalDistribution, p: float = 1.0) -> float:
    """Minimum over all pairings; independent oracle for small instances."""
    if not p >= 1:
        raise ValueError(f"order must be at least 1, got {p}")
    n = a.points.size
    if b.points.size != n:
        raise ValueError("brute force needs equal-size samples")
    uniform = np.full(n, 1.0 / n)
    if np.any(np.abs(a.weights - uniform) > 1e-12) or np.any(
        np.abs(b.weights - uniform) > 1e-12
    ):
        raise ValueError("brute force needs uniformly weighted samples")
    if n > 8:
        raise ValueError("oracle size exceeded")
    best = math.inf
    for perm in itertools.permutations(range(n)):
        cost = float(np.mean(np.abs(a.points - b.points[list(perm)]) ** p))
        if cost < best:
            best = cost
    return best ** (1.0 / p)


def path_sup_distance(p_sample, q_sample, window=None) -> float:
    """Largest pointwise distance between two recorded paths on a window.

    Both arguments need ``grid`` and ``values`` arrays on the *same* grid
    (recorded paths qualify).  This upper-bounds the path-space metric that
    the window-decay statements control.
    """
    grid_a = np.asarray(p_sample.grid, dtype=float)
    grid_b = np.asarray(q_sample.grid, dtype=float)
    if grid_a.shape != grid_b.shape or not np.array_equal(grid_a, grid_b):
        raise ValueError("mismatched grids")
    va = np.asarray(p_sample.values, dtype=float)
    vb = np.asarray(q_sample.values, dtype=float)
    if window is None:
        mask = np.ones(grid_a.shape, dtype=bool)
    else:
        lo, hi = float(window[0]), float(window[1])
        if not lo <= hi:
            raise ValueError(f"window must be ordered, got ({lo}, {hi})")
        slack = 1e-9 * max(1.0, hi)
        mask = (grid_a >= lo - slack) & (grid_a <= hi + slack)
        if not np.any(mask):
            raise ValueError("window contains no grid points")
    return float(np.max(np.abs(va[mask] - vb[mask])))


def log_slope(times, values) -> float:
    """Least-squares slope of ``log(values)`` against ``times``."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.size != v.size or t.size < 2:
        raise ValueError("need at least two (time, value) pairs")
    if np.any(v <= 0):
        raise ValueError("values must be positive to fit a log slope")
    return float(np.polyfit(t, np.log(v), 1)[0])


# ---------------------------------------------------------------------------
# decay curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayCurve:
    """Measured contraction against the certificate's theoretical curves.

    ``bound1`` is the moment-route bound and ``bound2`` the drift-slope
    contraction bound (``None`` when the certificate does not support it).
    Columns that an experiment cannot estimate are ``nan``.  When a bound is
    built from an estimated quantity its propagated standard error is kept in
    the matching ``*_stderr`` field.
    """

    times: np.ndarray
    wp_coupling: np.ndarray
    wp_coupling_stderr: np.ndarray
    wp_marginal: np.ndarray
    wp_marginal_stderr: np.ndarray
    bound1: np.ndarray
    bound2: np.ndarray | None
    n_paths: int
    p: float
    bound1_stderr: np.ndarray | None = None
    bound2_stderr: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = np.asarray(self.times).size
        for name in ("wp_coupling", "wp_coupling_stderr", "wp_marginal",
                     "wp_marginal_stderr", "bound1"):
            if np.asarray(getattr(self, name)).size != n:
                raise ValueError(f"column {name} does not match times in length")
        if self.bound2 is not None and np.asarray(self.bound2).size != n:
            raise ValueError("column bound2 does not match times in length")


def _resolve_order(cert: RateCertificate, p) -> float:
    if p is None:
        return cert.p
    if float(p) != cert.p:
        raise ValueError(
            f"order p={p} disagrees with the certificate (p={cert.p}); "
            "build the certificate at the order you want to measure"
        )
    return float(p)


def _moment_estimate(samples: np.ndarray, p: float):
    """``(E s^p)^{1/p}`` with a delta-method standard error, per row."""
    powers = samples ** p
    m = powers.mean(axis=-1)
    n = samples.shape[-1]
    se_m = powers.std(axis=-1, ddof=1) / math.sqrt(n) if n > 1 else np.full_like(m, np.inf)
    est = m ** (1.0 / p)
    scale = np.where(m > 0, (1.0 / p) * m ** (1.0 / p - 1.0), 0.0)
    return est, np.where(m > 0, scale * se_m, 0.0)


def _bootstrap_stderr(xa: np.ndarray, xb: np.ndarray, p: float, rng) -> float:
    vals = np.empty(_BOOTSTRAP_ROUNDS)
    for i in range(_BOOTSTRAP_ROUNDS):
        ra = xa[rng.integers(0, xa.size, xa.size)]
        rb = xb[rng.integers(0, xb.size, xb.size)]
        vals[i] = wp_exact(
            EmpiricalDistribution.from_samples(ra),
            EmpiricalDistribution.from_samples(rb),
            p,
        )
    return float(np.std(vals, ddof=1))


def decay_curve(
    spec: ProcessSpec,
    cert: RateCertificate,
    x1: float,
    x2: float,
    times,
    n_paths: int,
    p=None,
    h: float = 1e-3,
    seed: int = 0,
    jobs: int = 1,
) -> DecayCurve:
    """Measured distance between the two started laws versus the bounds.

    ``wp_coupling`` comes from one batch of coupled pairs; ``wp_marginal``
    compares that batch's lower marginal against a *fresh* ensemble started
    at ``x2`` (disjoint path indices, hence independent streams).
    """
    order = _resolve_order(cert, p)
    pair = coupling.coupled_ensemble(spec, x1, x2, times, h, seed, n_paths, jobs=jobs)
    wp_c, wp_c_se = _moment_estimate(pair.gaps, order)
    fresh = engine.sample_ensemble(
        spec, x2, times, h, seed, n_paths, first_path=n_paths, jobs=jobs
    )
    n_times = pair.times.size
    wp_m = np.empty(n_times)
    wp_m_se = np.empty(n_times)
    for s in range(n_times):
        xa = pair.lower[s]
        xb = fresh.values[s]
        wp_m[s] = wp_exact(
            EmpiricalDistribution.from_samples(xa),
            EmpiricalDistribution.from_samples(xb),
            order,
        )
        rng = PathStreams(seed, path_index=s).generator(BOOTSTRAP)
        wp_m_se[s] = _bootstrap_stderr(xa, xb, order, rng)
    bound_moment = lyapunov_bound(cert, x1, x2, pair.times)
    bound_slope = (
        contraction_bound(cert, x1, x2, pair.times)
        if cert.contraction_applicable
        else None
    )
    return DecayCurve(
        times=pair.times,
        wp_coupling=wp_c,
        wp_coupling_stderr=wp_c_se,
        wp_marginal=wp_m,
        wp_marginal_stderr=wp_m_se,
        bound1=bound_moment,
        bound2=bound_slope,
        n_paths=n_paths,
        p=order,
    )


def path_decay_curve(
    spec: ProcessSpec,
    cert: RateCertificate,
    x1: float,
    x2: float,
    windows,
    n_paths: int,
    p=None,
    h: float = 1e-3,
    seed: int = 0,
    jobs: int = 1,
) -> DecayCurve:
    """Window-supremum decay of the coupled gap versus the bounds.

    Estimates ``(E sup over [t, T] of gap^p)^{1/p}`` for each window and
    evaluates the bounds at the window's start, which dominates the window
    when the drift slope bound is nonpositive — that sign is required here.
    The marginal columns are ``nan``: path-space laws are not re-estimated
    from independent ensembles.
    """
    order = _resolve_order(cert, p)
    windows = [(float(a), float(b)) for a, b in windows]
    if not windows:
        raise ValueError("need at least one window")
    if cert.slope_bound > 0:
        raise ValueError(
            "path-window decay requires a nonpositive drift slope bound; "
            f"got {cert.slope_bound}"
        )
    starts = np.array([a for a, _ in windows])
    if np.any(np.diff(starts) < 0):
        raise ValueError("windows must be ordered by start time")
    ens = coupling.coupled_ensemble(
        spec, x1, x2, starts, h, seed, n_paths, windows=windows, jobs=jobs
    )
    wp_c, wp_c_se = _moment_estimate(ens.window_sup, order)
    nan = np.full(starts.size, np.nan)
    bound_moment = lyapunov_bound(cert, x1, x2, starts)
    bound_slope = (
        contraction_bound(cert, x1, x2, starts)
        if cert.contraction_applicable
        else None
    )
    return DecayCurve(
        times=starts,
        wp_coupling=wp_c,
        wp_coupling_stderr=wp_c_se,
        wp_marginal=nan,
        wp_marginal_stderr=nan.copy(),
        bound1=bound_moment,
        bound2=bound_slope,
        n_paths=n_paths,
        p=order,
    )


def stationary_gap(
    spec: ProcessSpec,
    cert: RateCertificate,
    x: float,
    times,
    n_paths: int,
    p=None,
    h: float = 1e-3,
    seed: int = 0,
    burn_in=None,
    t_extra: float = 0.0,
    jobs: int = 1,
):
    """Distance from the time-t law to the estimated long-run law.

    Simulates one ensemble from ``x`` (paths ``0..n-1``) observed at each
    requested time and an independent long-run ensemble from the boundary
    (paths ``n..2n-1``, horizon ``burn_in + t_extra``), and reports the exact
    quantile distance between them, against the certificate's stationary
    bounds built from the measured moment of ``exp(lam x)``.  That moment's
    standard error is propagated into the bound columns.  Returns
    ``(curve, long_run_summary)``.
    """
    order = _resolve_order(cert, p)
    if burn_in is None:
        burn_in = engine.default_burn_in(cert)
    summary = engine.estimate_stationary(
        spec, cert, burn_in, n_paths, t_extra=t_extra, h=h, seed=seed,
        first_path=n_paths, jobs=jobs,
    )
    started = engine.sample_ensemble(spec, x, times, h, seed, n_paths, jobs=jobs)
    pi_hat = EmpiricalDistribution.from_samples(summary.endpoint_sample)
    n_times = started.times.size
    wp_m = np.empty(n_times)
    wp_m_se = np.empty(n_times)
    for s in range(n_times):
        xa = started.values[s]
        wp_m[s] = wp_exact(EmpiricalDistribution.from_samples(xa), pi_hat, order)
        rng = PathStreams(seed, path_index=s).generator(BOOTSTRAP)
        wp_m_se[s] = _bootstrap_stderr(xa, summary.endpoint_sample, order, rng)
    v_x = math.exp(cert.lam * x)
    total = summary.mean_V + v_x
    bound_moment = lyapunov_bound_measures(cert, summary.mean_V, v_x, started.times)
    # propagate the long-run moment's standard error through the bound
    d_total = (1.0 / order) * total ** (1.0 / order - 1.0) * summary.stderr_V
    bound_moment_se = bound_moment / total ** (1.0 / order) * d_total
    if cert.contraction_applicable:
        decay2 = np.exp(-cert.K * started.times)
        bound_slope = total ** (1.0 / order) * decay2
        bound_slope_se = d_total * decay2
    else:
        bound_slope = None
        bound_slope_se = None
    nan = np.full(n_times, np.nan)
    curve = DecayCurve(
        times=started.times,
        wp_coupling=nan,
        wp_coupling_stderr=nan.copy(),
        wp_marginal=wp_m,
        wp_marginal_stderr=wp_m_se,
        bound1=bound_moment,
        bound2=bound_slope,
        n_paths=n_paths,
        p=order,
        bound1_stderr=bound_moment_se,
        bound2_stderr=bound_slope_se,
    )
    return curve, summary
