"""Tests for the path engine.

Oracles:

* a noiseless dyadic-step path with unit pull is exactly ``max(1 - t, 0)``
  in floating point, including its boundary push;
* Poisson clock gaps are checked against the exponential law with a KS test
  and the arrival count against a Poisson band;
* the long-run moment of the reflected linear-pull process has a closed form
  in terms of ``erfc`` (Gaussian integrals), evaluated independently here.
"""

import math

import numpy as np
import pytest
from scipy import special, stats

from rjdlab import engine
from rjdlab.certificate import make_certificate
from rjdlab.engine import (
    DIFFUSION,
    JUMP_SIZES,
    JUMP_TIMES,
    PathStreams,
    apply_jump,
    default_burn_in,
    estimate_stationary,
    reflected_step,
    sample_ensemble,
    sample_jump_times,
    simulate_path,
)
from rjdlab.model import (
    AffineDrift,
    ConstantDrift,
    ExponentialDisplacement,
    NoJumps,
    ProcessSpec,
    UpwardJumps,
    drifted_rbm,
    exp_jump_diffusion,
    reflected_ou,
)

UNIT_PULL = ProcessSpec(ConstantDrift(-1.0), 0.0)


# ---------------------------------------------------------------------------
# streams
# ---------------------------------------------------------------------------


def test_substreams_are_distinct_and_reproducible():
    a = PathStreams(seed=7, path_index=3)
    x1 = a.generator(DIFFUSION).standard_normal(8)
    x2 = a.generator(DIFFUSION).standard_normal(8)
    assert np.array_equal(x1, x2)
    y = a.generator(JUMP_TIMES).standard_normal(8)
    z = a.generator(JUMP_SIZES).standard_normal(8)
    assert not np.array_equal(x1, y)
    assert not np.array_equal(x1, z)
    assert not np.array_equal(y, z)
    other = PathStreams(seed=7, path_index=4).generator(DIFFUSION).standard_normal(8)
    assert not np.array_equal(x1, other)


# ---------------------------------------------------------------------------
# single steps
# ---------------------------------------------------------------------------


def test_reflected_step_projects_and_records_push():
    x, push = reflected_step(np.array([2.0, 0.25]), UNIT_PULL, 0.5, np.array([0.0, 0.0]))
    assert np.array_equal(x, [1.5, 0.0])
    assert np.array_equal(push, [0.0, 0.25])


def test_reflected_step_requires_positive_step():
    with pytest.raises(ValueError, match="step size"):
        reflected_step(1.0, UNIT_PULL, 0.0, 0.0)


def test_reflected_step_applies_noise_scaling():
    spec = drifted_rbm(drift=0.0, sigma=2.0)
    x, push = reflected_step(1.0, spec, 0.25, 1.0)
    assert x == pytest.approx(1.0 + 2.0 * 0.5)
    assert push == 0.0


# ---------------------------------------------------------------------------
# jump clock and displacements
# ---------------------------------------------------------------------------


def test_jump_times_sorted_within_horizon_and_reproducible():
    rng = PathStreams(seed=0, path_index=0).generator(JUMP_TIMES)
    times = sample_jump_times(1.0, 2000.0, rng)
    assert np.all(np.diff(times) > 0)
    assert times[0] > 0
    assert times[-1] < 2000.0
    rng2 = PathStreams(seed=0, path_index=0).generator(JUMP_TIMES)
    assert np.array_equal(times, sample_jump_times(1.0, 2000.0, rng2))


def test_jump_gaps_follow_exponential_law():
    rng = PathStreams(seed=1, path_index=0).generator(JUMP_TIMES)
    times = sample_jump_times(1.0, 2000.0, rng)
    gaps = np.diff(np.concatenate(([0.0], times)))
    assert stats.kstest(gaps, "expon").pvalue > 1e-3
    # arrival count within a five-sigma Poisson band
    assert abs(times.size - 2000.0) < 5.0 * math.sqrt(2000.0)


def test_jump_times_edge_cases():
    rng = np.random.default_rng(0)
    assert sample_jump_times(0.0, 10.0, rng).size == 0
    assert sample_jump_times(1.0, 0.0, rng).size == 0
    with pytest.raises(ValueError, match="intensity"):
        sample_jump_times(-1.0, 10.0, rng)


def test_apply_jump_uses_quantile_transform():
    jumps = UpwardJumps(ExponentialDisplacement(2.0), 1.0)
    # u = 1 - e^{-2} is the quantile of displacement exactly 1
    assert apply_jump(3.0, jumps, 1.0 - math.exp(-2.0)) == pytest.approx(4.0)
    with pytest.raises(ValueError, match="no jumps"):
        apply_jump(3.0, NoJumps(), 0.5)


# ---------------------------------------------------------------------------
# single recorded paths
# ---------------------------------------------------------------------------


def test_noiseless_unit_pull_path_is_exact():
    h = 1.0 / 1024.0
    path = simulate_path(UNIT_PULL, 1.0, 2.0, h, PathStreams(seed=0))
    assert path.grid.shape == path.values.shape == path.local_time.shape == (2049,)
    assert np.array_equal(path.values, np.maximum(1.0 - path.grid, 0.0))
    # after reaching zero at t = 1 the pull converts one-for-one into push
    assert np.array_equal(path.local_time, np.maximum(path.grid - 1.0, 0.0))
    assert path.jump_times.size == 0
    assert path.seed_tag == 0


def test_local_time_grows_only_at_the_boundary():
    path = simulate_path(drifted_rbm(), 0.0, 5.0, 1e-3, PathStreams(seed=3))
    increments = np.diff(path.local_time)
    assert np.all(increments >= 0)
    assert np.all(path.values[1:][increments > 0] == 0.0)
    assert path.local_time[-1] > 0  # the boundary is actually visited


def test_degenerate_spec_yields_constant_path():
    with pytest.warns(UserWarning, match="degenerate"):
        spec = ProcessSpec(ConstantDrift(0.0), 0.0)
    path = simulate_path(spec, 0.5, 1.0, 0.125, PathStreams(seed=0))
    assert np.all(path.values == 0.5)
    assert np.all(path.local_time == 0.0)


def test_simulate_path_validates_inputs():
    with pytest.raises(ValueError, match="initial state"):
        simulate_path(UNIT_PULL, -0.5, 1.0, 0.1, PathStreams(seed=0))
    with pytest.raises(ValueError, match="step size"):
        simulate_path(UNIT_PULL, 1.0, 1.0, 0.0, PathStreams(seed=0))
    with pytest.raises(ValueError, match="time horizon"):
        simulate_path(UNIT_PULL, 1.0, -1.0, 0.1, PathStreams(seed=0))


def test_jumps_only_raise_the_path():
    """Same seed, same diffusion stream: the jumped path dominates pointwise."""
    base = drifted_rbm(drift=-1.0, sigma=1.0)
    jumped = exp_jump_diffusion(drift=-1.0, sigma=1.0, jump_rate=2.0, intensity=1.0)
    streams = PathStreams(seed=11, path_index=2)
    p0 = simulate_path(base, 1.0, 5.0, 1e-3, streams)
    p1 = simulate_path(jumped, 1.0, 5.0, 1e-3, streams)
    assert p1.jump_times.size > 0
    assert np.all(p1.values >= p0.values)
    first_jump_idx = math.ceil(p1.jump_times[0] / 1e-3)
    assert np.array_equal(p0.values[:first_jump_idx], p1.values[:first_jump_idx])
    assert p1.values[first_jump_idx] > p0.values[first_jump_idx]


def test_path_determinism_and_stream_separation():
    spec = exp_jump_diffusion()
    a = simulate_path(spec, 2.0, 3.0, 1e-2, PathStreams(seed=5, path_index=9))
    b = simulate_path(spec, 2.0, 3.0, 1e-2, PathStreams(seed=5, path_index=9))
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.jump_times, b.jump_times)
    c = simulate_path(spec, 2.0, 3.0, 1e-2, PathStreams(seed=5, path_index=10))
    assert not np.array_equal(a.values, c.values)


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------


def test_ensemble_matches_recorded_path_exactly():
    """The compiled ensemble and the recording loop agree bit for bit."""
    spec = exp_jump_diffusion()
    times = [0.0, 0.5, 1.25, 3.0]
    result = sample_ensemble(spec, 1.5, times, 1e-2, seed=4, n_paths=3)
    for p in range(3):
        path = simulate_path(spec, 1.5, 3.0, 1e-2, PathStreams(seed=4, path_index=p))
        idx = np.rint(np.asarray(times) / 1e-2).astype(int)
        assert np.array_equal(result.values[:, p], path.values[idx])
        assert np.array_equal(result.local_times[:, p], path.local_time[idx])


def test_ensemble_zero_hit_statistics():
    result = sample_ensemble(UNIT_PULL, 1.0, [2.0], 1.0 / 1024.0, seed=0, n_paths=2)
    assert np.array_equal(result.zero_hit_time, [1.0, 1.0])
    assert np.allclose(result.zero_fraction, 1025.0 / 2049.0)
    # a path pinned away from the boundary never hits it
    with pytest.warns(UserWarning, match="degenerate"):
        pinned = ProcessSpec(ConstantDrift(0.0), 0.0)
    result = sample_ensemble(pinned, 0.5, [1.0], 0.125, seed=0, n_paths=1)
    assert np.isnan(result.zero_hit_time[0])
    assert result.zero_fraction[0] == 0.0


def test_ensemble_partitioning_does_not_change_output(monkeypatch):
    spec = exp_jump_diffusion()
    whole = sample_ensemble(spec, 1.0, [1.0], 1e-2, seed=8, n_paths=12)
    # force several small blocks and a worker pool
    monkeypatch.setattr(engine, "_BLOCK_BUDGET", 300)
    split = sample_ensemble(spec, 1.0, [1.0], 1e-2, seed=8, n_paths=12, jobs=3)
    assert np.array_equal(whole.values, split.values)
    assert np.array_equal(whole.zero_hit_time, split.zero_hit_time, equal_nan=True)


def test_ensemble_path_numbering_is_stable():
    spec = drifted_rbm()
    wide = sample_ensemble(spec, 1.0, [1.0], 1e-2, seed=2, n_paths=10)
    tail = sample_ensemble(spec, 1.0, [1.0], 1e-2, seed=2, n_paths=6, first_path=4)
    assert np.array_equal(wide.values[:, 4:], tail.values)


def test_ensemble_validates_inputs():
    with pytest.raises(ValueError, match="at least one path"):
        sample_ensemble(UNIT_PULL, 1.0, [1.0], 0.1, seed=0, n_paths=0)
    with pytest.raises(ValueError, match="snapshot times"):
        sample_ensemble(UNIT_PULL, 1.0, [1.0, 0.5], 0.1, seed=0, n_paths=1)
    with pytest.raises(ValueError, match="initial state"):
        sample_ensemble(UNIT_PULL, math.nan, [1.0], 0.1, seed=0, n_paths=1)


def test_rbm_endpoint_mean_near_long_run_value():
    """Unit-pull reflected Brownian motion settles near mean 1/2."""
    result = sample_ensemble(drifted_rbm(), 0.0, [30.0], 1e-3, seed=13, n_paths=5000)
    endpoint = result.values[-1]
    assert abs(endpoint.mean() - 0.5) < 0.05
    assert 0.0 < result.zero_fraction.mean() < 1.0


# ---------------------------------------------------------------------------
# long-run sampling
# ---------------------------------------------------------------------------


def test_estimate_stationary_matches_gaussian_integral_oracle():
    """Long-run moment of the reflected linear pull, against erfc form.

    With pull speed 1, depth 1, unit noise, the long-run density on the
    half-line is proportional to exp(-2x - x^2), and the moment of e^x is
    exp(-3/4) * erfc(1/2) / erfc(1).
    """
    spec = reflected_ou(1.0, 1.0, 1.0)
    cert = make_certificate(spec)
    oracle = math.exp(-0.75) * special.erfc(0.5) / special.erfc(1.0)
    summary = estimate_stationary(spec, cert, burn_in=12.0, n_paths=3000, h=1e-3, seed=21)
    assert summary.n_paths == 3000
    assert summary.endpoint_sample.shape == (3000,)
    assert abs(summary.mean_V - oracle) < max(0.06, 4.0 * summary.stderr_V)


def test_default_burn_in_scales_with_rate():
    cert = make_certificate(drifted_rbm())  # rate 1/2 at exponent 1
    assert default_burn_in(cert) == pytest.approx(40.0)
    bad = make_certificate(ProcessSpec(AffineDrift(1.0, 1.0), 1.0))
    with pytest.raises(ValueError, match="burn-in"):
        default_burn_in(bad)


def test_estimate_stationary_warns_without_positive_rate():
    spec = ProcessSpec(AffineDrift(1.0, 1.0), 1.0)
    cert = make_certificate(spec)
    with pytest.warns(UserWarning, match="stationarity not certified"):
        estimate_stationary(spec, cert, burn_in=0.5, n_paths=4, h=0.1, seed=0)


def test_estimate_stationary_validates_horizons():
    spec = drifted_rbm()
    cert = make_certificate(spec)
    with pytest.raises(ValueError, match="burn-in"):
        estimate_stationary(spec, cert, burn_in=0.0, n_paths=4)
    with pytest.raises(ValueError, match="extra horizon"):
        estimate_stationary(spec, cert, burn_in=1.0, n_paths=4, t_extra=-1.0)
