"""Monotone coupling of two reflected paths driven by shared randomness.

Both components see the same Gaussian increments, the same jump clock, and
the same displacement variates.  The pair is carried as ``(lower, gap)``
rather than as two separate states, and the gap is updated by direct
arithmetic — never by subtracting the two components — so the properties the
coupling is supposed to have hold *exactly* in floating point:

* ``gap >= 0`` at every grid point (componentwise ordering);
* shared jumps translate the lower component and leave the gap untouched;
* once the gap reaches zero it stays zero (coalescence is absorbing), since
  every update maps a zero gap to a zero gap identically.

One diffusion step from ``(x, gap)`` with increment ``z``:

    y1  = x + h g(x) + sigma sqrt(h) z          (lower, before projection)
    gy  = max(gap + h (g(x + gap) - g(x)), 0)   (drift shear on the gap)
    y2  = y1 + gy                               (upper, before projection)

followed by the joint projection: both nonnegative keeps ``(y1, gy)``; both
nonpositive collapses to ``(0, 0)``; otherwise the lower sticks at the
boundary while the upper stays out, giving ``(0, y2)``.  The lower marginal
is bit-for-bit the single-path engine, because the expressions match.

The drift shear can flip the order only if ``1 + h * slope`` goes negative,
so steps must satisfy ``h * |downward slope| < 1``; violating steps are
rejected up front.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, engine
from .certificate import RateCertificate
from .engine import PathStreams
from .model import ProcessSpec

__all__ = [
    "CoupledEnsemble",
    "CoupledPaths",
    "coupled_ensemble",
    "coupled_jump",
    "coupled_step",
    "gap_envelope_violation",
    "simulate_coupled",
    "supermartingale_probe",
]


def _check_step(spec: ProcessSpec, h: float) -> None:
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    down = -min(0.0, spec.drift.min_slope)
    if down > 0 and h * down >= 1.0:
        raise ValueError(
            f"step too large for monotone coupling: h = {h} against downward "
            f"drift slope {down} (need h * slope < 1)"
        )


def _check_ordered(x1: float, x2: float) -> None:
    if not (math.isfinite(x1) and math.isfinite(x2) and 0 <= x1 <= x2):
        raise ValueError(
            f"initial states must satisfy 0 <= x1 <= x2, got x1={x1}, x2={x2}"
        )


def coupled_step(x_lower: float, gap: float, spec: ProcessSpec, h: float, z: float):
    """One shared-noise step of the coupled pair; returns ``(lower, gap)``."""
    _check_step(spec, h)
    if gap < 0:
        raise ValueError(f"gap must be nonnegative, got {gap}")
    sig_sqh = spec.sigma * math.sqrt(h)
    g_lo = float(spec.drift.value_at(x_lower))
    g_hi = float(spec.drift.value_at(x_lower + gap))
    y1 = x_lower + h * g_lo + sig_sqh * z
    gy = gap + h * (g_hi - g_lo)
    if gy < 0.0:
        gy = 0.0
    y2 = y1 + gy
    if y1 >= 0.0:
        return y1, gy
    if y2 > 0.0:
        return 0.0, y2
    return 0.0, 0.0


def coupled_jump(x_lower: float, gap: float, displacement: float):
    """A shared upward jump: the lower component moves, the gap does not."""
    if displacement < 0:
        raise ValueError(f"displacement must be nonnegative, got {displacement}")
    return x_lower + displacement, gap


@dataclass(frozen=True)
class CoupledPaths:
    """One coupled pair recorded on its full time grid.

    ``upper[i] == lower[i] + gaps[i]`` throughout; ``tau_index`` is the first
    grid index at which the pair sits at ``(0, 0)`` (``None`` if never) and
    ``coalesced_from`` the first index with zero gap.
    """

    grid: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    gaps: np.ndarray
    tau_index: int | None
    coalesced_from: int | None
    jump_times: np.ndarray
    seed_tag: int


def simulate_coupled(
    spec: ProcessSpec,
    x1: float,
    x2: float,
    t_max: float,
    h: float,
    streams: PathStreams,
) -> CoupledPaths:
    """Run one coupled pair from ``x1 <= x2``, recording every grid point."""
    _check_ordered(x1, x2)
    _check_step(spec, h)
    n_steps = engine._n_steps(t_max, h)
    t_end = n_steps * h
    grid = np.arange(n_steps + 1) * h
    z = streams.generator(engine.DIFFUSION).standard_normal(n_steps)
    jump_times, jump_steps, jump_disp = engine._jump_schedule(
        spec, streams, t_end, h, n_steps
    )

    sig_sqh = spec.sigma * math.sqrt(h)
    lower = np.empty(n_steps + 1)
    gaps = np.empty(n_steps + 1)
    x = float(x1)
    gap = float(x2) - float(x1)
    lower[0] = x
    gaps[0] = gap
    tau_index = 0 if (x == 0.0 and gap == 0.0) else None
    coalesced_from = 0 if gap == 0.0 else None
    jp = 0
    for i in range(1, n_steps + 1):
        g_lo = float(spec.drift.value_at(x))
        g_hi = float(spec.drift.value_at(x + gap))
        y1 = x + h * g_lo + sig_sqh * z[i - 1]  # matches the one-path engine
        gy = gap + h * (g_hi - g_lo)
        if gy < 0.0:
            gy = 0.0
        y2 = y1 + gy
        if y1 >= 0.0:
            x, gap = y1, gy
        elif y2 > 0.0:
            x, gap = 0.0, y2
        else:
            x, gap = 0.0, 0.0
        while jp < jump_steps.size and jump_steps[jp] == i:
            x, gap = coupled_jump(x, gap, jump_disp[jp])
            jp += 1
        if tau_index is None and x == 0.0 and gap == 0.0:
            tau_index = i
        if coalesced_from is None and gap == 0.0:
            coalesced_from = i
        lower[i] = x
        gaps[i] = gap
    return CoupledPaths(
        grid=grid,
        lower=lower,
        upper=lower + gaps,
        gaps=gaps,
        tau_index=tau_index,
        coalesced_from=coalesced_from,
        jump_times=jump_times,
        seed_tag=streams.path_index,
    )


# ---------------------------------------------------------------------------
# coupled ensembles (compiled inner loop)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoupledEnsemble:
    """Snapshot statistics of a batch of coupled pairs.

    Per path: ``tau_time`` / ``coalesced_time`` are the first grid times of
    boundary meeting and of zero gap (``nan`` if never); ``min_gap`` the
    smallest gap seen (negative values would falsify the ordering);
    ``envelope_violation`` the largest excess of the gap over the drift-slope
    envelope before the meeting time (``nan`` when no point was checked);
    ``window_sup[w, p]`` the supremum of the gap over requested time windows.
    ``jump_events`` / ``jump_gap_mismatches`` count shared jumps and any jump
    that changed the gap, and ``gap_resurrections`` counts grid points with a
    nonzero gap after coalescence (both always zero by construction; recorded
    as evidence).
    """

    times: np.ndarray
    lower: np.ndarray
    gaps: np.ndarray
    tau_time: np.ndarray
    coalesced_time: np.ndarray
    min_gap: np.ndarray
    envelope_violation: np.ndarray
    window_sup: np.ndarray
    jump_events: np.ndarray
    jump_gap_mismatches: np.ndarray
    gap_resurrections: np.ndarray

    @property
    def upper(self) -> np.ndarray:
        return self.lower + self.gaps


def _coupled_block(args):
    (spec, x1, gap0, h, n_steps, snap_idx, win_lo, win_hi, envelope, seed, lo, hi) = args
    kind, p0, p1, xs, gs = engine._drift_code(spec.drift)
    normals = engine._draw_normals(seed, lo, hi, n_steps)
    steps_tab, disp_tab, counts = engine._draw_jump_tables(
        spec, seed, lo, hi, n_steps * h, h, n_steps
    )
    return _kernels.coupled_ensemble(
        float(x1), float(gap0), h, kind, p0, p1, xs, gs,
        spec.sigma * math.sqrt(h), normals, steps_tab, disp_tab, counts,
        snap_idx, win_lo, win_hi, envelope,
    )


def coupled_ensemble(
    spec: ProcessSpec,
    x1: float,
    x2: float,
    times,
    h: float,
    seed: int,
    n_paths: int,
    windows=None,
    first_path: int = 0,
    jobs: int = 1,
) -> CoupledEnsemble:
    """Run ``n_paths`` coupled pairs, recording snapshots and gap statistics.

    Pair ``p`` reuses the streams of single path ``p`` under the same seed,
    so the lower marginal reproduces `engine.sample_ensemble` bit for bit.
    ``windows`` is an optional sequence of ``(t_lo, t_hi)`` ranges over which
    per-path gap suprema are taken (used by window-based decay estimates).
    """
    _check_ordered(x1, x2)
    _check_step(spec, h)
    if n_paths < 1:
        raise ValueError(f"need at least one path, got {n_paths}")
    t_hint = [np.max(np.atleast_1d(np.asarray(times, dtype=float)))]
    if windows:
        t_hint.extend(float(b) for _, b in windows)
    t_max = float(max(t_hint))
    if t_max <= 0:
        t_max = h
    n_steps = engine._n_steps(t_max, h)
    snap_idx = engine._snap_indices(times, n_steps * h, h, n_steps)
    if windows:
        win_lo = np.array([int(round(a / h)) for a, _ in windows], np.int64)
        win_hi = np.array([int(round(b / h)) for _, b in windows], np.int64)
        if np.any(win_lo > win_hi) or np.any(win_lo < 0):
            raise ValueError("windows must be ordered (t_lo <= t_hi) and nonnegative")
    else:
        win_lo = np.empty(0, np.int64)
        win_hi = np.empty(0, np.int64)
    gap0 = float(x2) - float(x1)
    slope = spec.drift.slope_bound
    envelope = gap0 * np.exp(slope * np.arange(n_steps + 1) * h)
    tasks = [
        (spec, x1, gap0, h, n_steps, snap_idx, win_lo, win_hi, envelope, seed, lo, hi)
        for lo, hi in engine._block_ranges(first_path, n_paths, engine._block_size(n_steps))
    ]
    parts = engine._run_blocks(_coupled_block, tasks, jobs)
    lo_snap = np.concatenate([p[0] for p in parts], axis=0).T
    gap_snap = np.concatenate([p[1] for p in parts], axis=0).T
    tau_idx = np.concatenate([p[2] for p in parts])
    coal_idx = np.concatenate([p[3] for p in parts])
    min_gap = np.concatenate([p[4] for p in parts])
    env_viol = np.concatenate([p[5] for p in parts])
    win_sup = np.concatenate([p[6] for p in parts], axis=0).T
    jump_events = np.concatenate([p[7] for p in parts])
    jump_mismatch = np.concatenate([p[8] for p in parts])
    resurrect = np.concatenate([p[9] for p in parts])
    return CoupledEnsemble(
        times=snap_idx * h,
        lower=np.ascontiguousarray(lo_snap),
        gaps=np.ascontiguousarray(gap_snap),
        tau_time=np.where(tau_idx >= 0, tau_idx * h, np.nan),
        coalesced_time=np.where(coal_idx >= 0, coal_idx * h, np.nan),
        min_gap=min_gap,
        envelope_violation=np.where(np.isneginf(env_viol), np.nan, env_viol),
        window_sup=np.ascontiguousarray(win_sup),
        jump_events=jump_events,
        jump_gap_mismatches=jump_mismatch,
        gap_resurrections=resurrect,
    )


def gap_envelope_violation(ens: CoupledEnsemble) -> float:
    """Largest gap excess over the drift-slope envelope across the ensemble.

    Nonpositive values certify ``gap(t) <= gap(0) * exp(slope_bound * t)`` on
    the grid, up to each pair's meeting time.  Pairs that met immediately
    contribute nothing; an all-met ensemble scores zero.
    """
    viol = ens.envelope_violation
    if np.all(np.isnan(viol)):
        return 0.0
    return float(np.nanmax(viol))


# ---------------------------------------------------------------------------
# decay-functional probe
# ---------------------------------------------------------------------------


def supermartingale_probe(
    spec: ProcessSpec,
    cert: RateCertificate,
    x2: float,
    t: float,
    n_paths: int,
    h: float = 1e-3,
    seed: int = 0,
    jobs: int = 1,
):
    """Monte Carlo mean of ``exp(k min(tau, t)) V(X(min(tau, t)))``.

    Paths start at ``x2``; ``tau`` is the first grid time at the boundary and
    ``V(x) = exp(lam x)`` the certificate's moment function.  Under a valid
    certificate the mean is at most ``V(x2)`` for every ``t``, which is the
    inequality that drives the moment-decay bound.  Returns
    ``(estimate, stderr)``.
    """
    if not cert.rate_positive:
        raise ValueError("no valid certificate: decay rate is not positive")
    if not t > 0:
        raise ValueError(f"horizon must be positive, got {t}")
    result = engine.sample_ensemble(spec, x2, [t], h, seed, n_paths, jobs=jobs)
    t_snap = float(result.times[-1])
    endpoint = result.values[-1]
    tau = result.zero_hit_time
    stopped = ~np.isnan(tau) & (tau <= t_snap)
    stat = np.where(
        stopped,
        np.exp(cert.k * np.where(np.isnan(tau), 0.0, tau)),
        np.exp(cert.k * t_snap + cert.lam * endpoint),
    )
    mean = float(np.mean(stat))
    stderr = float(np.std(stat, ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else math.inf
    return mean, stderr
