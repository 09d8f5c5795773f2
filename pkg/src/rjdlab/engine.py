"""Path simulation for reflected jump-diffusions.

Discretization
--------------
The diffusive part advances by an Euler step and is reflected by projection:
with ``y = x + g(x) h + sigma sqrt(h) Z`` the next state is ``max(y, 0)`` and
the boundary push is ``max(-y, 0)``.  Jump epochs are drawn from their own
Poisson clock and applied at the first grid point at or after each epoch, so
a path is piecewise determined by the grid.

Randomness contract
-------------------
Every path owns three counter-based streams derived from
``SeedSequence(entropy=seed, spawn_key=(path_index, substream))``: substream
0 drives the Gaussian increments, substream 1 the jump clock, and substream 2
the jump displacements.  A path's realization therefore depends only on
``(seed, path_index)`` — never on batch partitioning, worker counts, or which
other paths were simulated — which is what makes ensemble output reproducible
across ``jobs`` settings, and what lets a coupled pair reuse one path's
streams exactly.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .certificate import RateCertificate
from .model import AffineDrift, ConstantDrift, NoJumps, ProcessSpec, TabulatedDrift

__all__ = [
    "DIFFUSION",
    "JUMP_SIZES",
    "JUMP_TIMES",
    "EnsembleResult",
    "EnsembleSummary",
    "PathSample",
    "PathStreams",
    "apply_jump",
    "default_burn_in",
    "estimate_stationary",
    "reflected_step",
    "sample_ensemble",
    "sample_jump_times",
    "simulate_path",
]

DIFFUSION = 0
JUMP_TIMES = 1
JUMP_SIZES = 2

# target number of Gaussian variates held in memory per worker block
_BLOCK_BUDGET = 30_000_000


@dataclass(frozen=True)
class PathStreams:
    """Factory for the per-path random substreams."""

    seed: int
    path_index: int = 0

    def generator(self, substream: int) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.path_index, substream)
        )
        return np.random.Generator(np.random.Philox(seq))


def _n_steps(t_max: float, h: float) -> int:
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    if not t_max > 0:
        raise ValueError(f"time horizon must be positive, got {t_max}")
    # snap the horizon to the grid, rounding up unless t_max is (numerically)
    # already a multiple of h
    return max(1, math.ceil(t_max / h - 1e-9))


def _advance(x: float, g: float, h: float, sig_sqh: float, z: float):
    """One projected Euler step from scalar state ``x``.

    Returns ``(next_state, boundary_push)``.  The expression order matches the
    compiled kernels so pure-Python paths and kernel paths agree bit for bit
    on constant and affine drifts.
    """
    y = x + h * g + sig_sqh * z
    if y >= 0.0:
        return y, 0.0
    return 0.0, -y


def reflected_step(x, spec: ProcessSpec, h: float, z):
    """Vectorized projected Euler step: ``(max(y, 0), max(-y, 0))``."""
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    y = x + h * spec.drift.value_at(x) + (spec.sigma * math.sqrt(h)) * np.asarray(z, dtype=float)
    return np.maximum(y, 0.0), np.maximum(-y, 0.0)


def sample_jump_times(intensity: float, t_max: float, rng: np.random.Generator) -> np.ndarray:
    """Arrival times of a Poisson clock on ``(0, t_max)``, sorted ascending."""
    if intensity < 0:
        raise ValueError(f"intensity must be nonnegative, got {intensity}")
    if intensity == 0 or t_max <= 0:
        return np.empty(0)
    times = np.empty(0)
    horizon = 0.0
    chunk = max(16, int(intensity * t_max + 6.0 * math.sqrt(intensity * t_max) + 16.0))
    while horizon < t_max:
        gaps = rng.exponential(1.0 / intensity, size=chunk)
        new = horizon + np.cumsum(gaps)
        times = np.concatenate((times, new))
        horizon = times[-1]
    return times[times < t_max]


def apply_jump(x, jumps, u):
    """Destination after one upward jump driven by the uniform variate ``u``."""
    if isinstance(jumps, NoJumps):
        raise ValueError("no jumps to apply: the process has no jump part")
    return np.asarray(x, dtype=float) + jumps.displacement.inverse_cdf(u)


def _jump_schedule(spec: ProcessSpec, streams: PathStreams, t_end: float, h: float, n_steps: int):
    """Jump times, their grid indices, and their displacements for one path."""
    if not spec.has_jumps:
        return np.empty(0), np.empty(0, np.int64), np.empty(0)
    times = sample_jump_times(spec.intensity, t_end, streams.generator(JUMP_TIMES))
    if times.size == 0:
        return times, np.empty(0, np.int64), np.empty(0)
    u = streams.generator(JUMP_SIZES).random(times.size)
    disp = np.asarray(spec.jumps.displacement.inverse_cdf(u), dtype=float)
    steps = np.ceil(times / h).astype(np.int64)
    np.clip(steps, 1, n_steps, out=steps)
    return times, steps, disp


@dataclass(frozen=True)
class PathSample:
    """One simulated path recorded on its full time grid.

    ``values[i]`` is the post-jump state at ``grid[i]`` and ``local_time[i]``
    the cumulative boundary push up to that point; ``seed_tag`` records the
    path index within its seed so any path can be regenerated in isolation.
    """

    grid: np.ndarray
    values: np.ndarray
    local_time: np.ndarray
    jump_times: np.ndarray
    seed_tag: int


def simulate_path(
    spec: ProcessSpec, x0: float, t_max: float, h: float, streams: PathStreams
) -> PathSample:
    """Simulate one reflected path and record every grid point."""
    if not (math.isfinite(x0) and x0 >= 0):
        raise ValueError(f"initial state must be finite and nonnegative, got {x0}")
    n_steps = _n_steps(t_max, h)
    t_end = n_steps * h
    grid = np.arange(n_steps + 1) * h
    z = streams.generator(DIFFUSION).standard_normal(n_steps)
    jump_times, jump_steps, jump_disp = _jump_schedule(spec, streams, t_end, h, n_steps)

    values = np.empty(n_steps + 1)
    local_time = np.empty(n_steps + 1)
    sig_sqh = spec.sigma * math.sqrt(h)
    x = float(x0)
    ell = 0.0
    values[0] = x
    local_time[0] = ell
    jp = 0
    for i in range(1, n_steps + 1):
        g = float(spec.drift.value_at(x))
        x, push = _advance(x, g, h, sig_sqh, z[i - 1])
        ell += push
        while jp < jump_steps.size and jump_steps[jp] == i:
            x = x + jump_disp[jp]
            jp += 1
        values[i] = x
        local_time[i] = ell
    return PathSample(grid, values, local_time, jump_times, streams.path_index)


# ---------------------------------------------------------------------------
# ensembles (compiled inner loop, block-partitioned, optional process pool)
# ---------------------------------------------------------------------------


def _drift_code(drift):
    """Encode a drift for the compiled kernels."""
    empty = np.empty(0)
    if isinstance(drift, TabulatedDrift):
        return 2, 0.0, 0.0, drift.xs, drift.gs
    if isinstance(drift, AffineDrift):
        return 1, float(drift.slope), float(drift.intercept), empty, empty
    if isinstance(drift, ConstantDrift):
        return 0, float(drift.value), 0.0, empty, empty
    raise TypeError(f"unsupported drift type: {type(drift).__name__}")


def _block_size(n_steps: int) -> int:
    return max(1, _BLOCK_BUDGET // max(1, n_steps))


def _block_ranges(first: int, count: int, block: int):
    return [(lo, min(lo + block, first + count)) for lo in range(first, first + count, block)]


def _draw_normals(seed: int, lo: int, hi: int, n_steps: int) -> np.ndarray:
    out = np.empty((hi - lo, n_steps))
    for j, p in enumerate(range(lo, hi)):
        out[j] = PathStreams(seed, p).generator(DIFFUSION).standard_normal(n_steps)
    return out


def _draw_jump_tables(spec: ProcessSpec, seed: int, lo: int, hi: int, t_end: float, h: float, n_steps: int):
    """Padded per-path jump tables for a block: grid steps, sizes, counts."""
    count = hi - lo
    counts = np.zeros(count, np.int64)
    if not spec.has_jumps:
        return np.full((count, 1), n_steps + 1, np.int64), np.zeros((count, 1)), counts
    steps_rows = []
    disp_rows = []
    for j, p in enumerate(range(lo, hi)):
        _, steps, disp = _jump_schedule(spec, PathStreams(seed, p), t_end, h, n_steps)
        counts[j] = steps.size
        steps_rows.append(steps)
        disp_rows.append(disp)
    width = max(1, int(counts.max()))
    steps_tab = np.full((count, width), n_steps + 1, np.int64)
    disp_tab = np.zeros((count, width))
    for j in range(count):
        steps_tab[j, : counts[j]] = steps_rows[j]
        disp_tab[j, : counts[j]] = disp_rows[j]
    return steps_tab, disp_tab, counts


def _ensemble_block(args):
    (spec, x0, h, n_steps, snap_idx, seed, lo, hi) = args
    kind, p0, p1, xs, gs = _drift_code(spec.drift)
    normals = _draw_normals(seed, lo, hi, n_steps)
    steps_tab, disp_tab, counts = _draw_jump_tables(spec, seed, lo, hi, n_steps * h, h, n_steps)
    return _kernels.path_ensemble(
        float(x0), h, kind, p0, p1, xs, gs, spec.sigma * math.sqrt(h),
        normals, steps_tab, disp_tab, counts, snap_idx,
    )


def _run_blocks(worker, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, tasks))


@dataclass(frozen=True)
class EnsembleResult:
    """Snapshot matrix of an ensemble run.

    ``values[s, p]`` is path ``p`` at snapshot time ``times[s]``;
    ``zero_hit_time[p]`` is the first grid time at which the path sits exactly
    at the boundary (``nan`` if it never does) and ``zero_fraction[p]`` the
    fraction of grid points spent there.
    """

    times: np.ndarray
    values: np.ndarray
    local_times: np.ndarray
    zero_hit_time: np.ndarray
    zero_fraction: np.ndarray


def _snap_indices(times, t_max: float, h: float, n_steps: int) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0:
        raise ValueError("need at least one snapshot time")
    if np.any(times < 0) or np.any(times > t_max + 1e-9 * max(1.0, t_max)):
        raise ValueError("snapshot times must lie within [0, t_max]")
    idx = np.rint(times / h).astype(np.int64)
    np.clip(idx, 0, n_steps, out=idx)
    if np.any(np.diff(idx) < 0):
        raise ValueError("snapshot times must be nondecreasing")
    return idx


def sample_ensemble(
    spec: ProcessSpec,
    x0: float,
    times,
    h: float,
    seed: int,
    n_paths: int,
    first_path: int = 0,
    jobs: int = 1,
) -> EnsembleResult:
    """Simulate ``n_paths`` independent paths, recording the snapshot times.

    Snapshot times are rounded to the nearest grid point.  Paths are numbered
    ``first_path, ..., first_path + n_paths - 1`` within the seed, so disjoint
    index ranges give independent ensembles under one seed.
    """
    if not (math.isfinite(x0) and x0 >= 0):
        raise ValueError(f"initial state must be finite and nonnegative, got {x0}")
    if n_paths < 1:
        raise ValueError(f"need at least one path, got {n_paths}")
    t_max = float(np.max(np.atleast_1d(np.asarray(times, dtype=float))))
    if t_max <= 0:
        t_max = h
    n_steps = _n_steps(t_max, h)
    snap_idx = _snap_indices(times, n_steps * h, h, n_steps)
    tasks = [
        (spec, x0, h, n_steps, snap_idx, seed, lo, hi)
        for lo, hi in _block_ranges(first_path, n_paths, _block_size(n_steps))
    ]
    parts = _run_blocks(_ensemble_block, tasks, jobs)
    x_snap = np.concatenate([p[0] for p in parts], axis=0).T
    ell_snap = np.concatenate([p[1] for p in parts], axis=0).T
    zero_idx = np.concatenate([p[2] for p in parts])
    zero_steps = np.concatenate([p[3] for p in parts])
    zero_hit = np.where(zero_idx >= 0, zero_idx * h, np.nan)
    return EnsembleResult(
        times=snap_idx * h,
        values=np.ascontiguousarray(x_snap),
        local_times=np.ascontiguousarray(ell_snap),
        zero_hit_time=zero_hit,
        zero_fraction=zero_steps / (n_steps + 1),
    )


# ---------------------------------------------------------------------------
# long-run (stationary) sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleSummary:
    """Endpoint sample of a long-run ensemble with its certificate moment."""

    n_paths: int
    endpoint_sample: np.ndarray
    mean_V: float
    stderr_V: float


def default_burn_in(cert: RateCertificate) -> float:
    """Horizon after which the certified moment bound has decayed by e^-20."""
    if not cert.rate_positive:
        raise ValueError("no positive decay rate: cannot size a burn-in horizon")
    return 20.0 * cert.p / cert.k


def estimate_stationary(
    spec: ProcessSpec,
    cert: RateCertificate,
    burn_in: float,
    n_paths: int,
    t_extra: float = 0.0,
    h: float = 1e-3,
    seed: int = 0,
    first_path: int = 0,
    jobs: int = 1,
) -> EnsembleSummary:
    """Sample the long-run law by running paths from the boundary past burn-in.

    Returns the endpoint sample at ``burn_in + t_extra`` together with the
    empirical mean of the certificate's moment function ``exp(lam * x)`` and
    its standard error.  If the certificate does not establish a positive
    decay rate the long-run law may not exist; the run proceeds but warns.
    """
    if not cert.rate_positive:
        warnings.warn("stationarity not certified: decay rate is not positive", stacklevel=2)
    if not burn_in > 0:
        raise ValueError(f"burn-in must be positive, got {burn_in}")
    if t_extra < 0:
        raise ValueError(f"extra horizon must be nonnegative, got {t_extra}")
    result = sample_ensemble(
        spec, 0.0, [burn_in + t_extra], h, seed, n_paths,
        first_path=first_path, jobs=jobs,
    )
    sample = result.values[-1]
    moments = np.exp(cert.lam * sample)
    mean_v = float(np.mean(moments))
    stderr_v = float(np.std(moments, ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else math.inf
    return EnsembleSummary(
        n_paths=n_paths,
        endpoint_sample=sample,
        mean_V=mean_v,
        stderr_V=stderr_v,
    )
