"""Tests for the shared-noise monotone coupling.

The exactness claims (ordering, absorbing coalescence, jump-gap preservation)
are tested with equality, not tolerances: the ``(lower, gap)`` state makes
them arithmetic identities.  The gap's drift shear is checked against the
closed-form geometric decay of a linear pull.
"""

import math

import numpy as np
import pytest

from rjdlab import coupling, engine
from rjdlab.certificate import make_certificate
from rjdlab.coupling import (
    coupled_ensemble,
    coupled_jump,
    coupled_step,
    gap_envelope_violation,
    simulate_coupled,
    supermartingale_probe,
)
from rjdlab.engine import PathStreams, sample_ensemble, simulate_path
from rjdlab.model import (
    ConstantDrift,
    ExponentialDisplacement,
    ProcessSpec,
    UpwardJumps,
    drifted_rbm,
    exp_jump_diffusion,
    reflected_ou,
)

UNIT_PULL = ProcessSpec(ConstantDrift(-1.0), 0.0)


# ---------------------------------------------------------------------------
# single steps
# ---------------------------------------------------------------------------


def test_coupled_step_away_from_boundary():
    assert coupled_step(1.0, 1.0, UNIT_PULL, 0.25, 0.0) == (0.75, 1.0)


def test_coupled_step_partial_reflection_moves_gap():
    # lower projects to the boundary, upper stays out: gap absorbs the deficit
    lower, gap = coupled_step(0.1, 1.0, UNIT_PULL, 0.25, 0.0)
    assert lower == 0.0
    assert gap == pytest.approx(0.85)


def test_coupled_step_joint_collapse():
    assert coupled_step(0.0, 0.1, UNIT_PULL, 0.5, 0.0) == (0.0, 0.0)


def test_coupled_step_gap_shear_for_linear_pull():
    spec = reflected_ou(1.0, 1.0, 0.0)
    lower, gap = coupled_step(5.0, 1.0, spec, 1e-3, 0.0)
    assert gap == pytest.approx(1.0 - 1e-3)
    assert lower == pytest.approx(5.0 + 1e-3 * (-1.0 - 5.0))


def test_coupled_step_rejects_oversized_steps():
    spec = reflected_ou(2.0, 1.0, 1.0)  # downward slope 2
    with pytest.raises(ValueError, match="step too large"):
        coupled_step(1.0, 1.0, spec, 0.5, 0.0)
    # at half that step the shear is admissible
    coupled_step(1.0, 1.0, spec, 0.25, 0.0)


def test_coupled_jump_translates_lower_only():
    assert coupled_jump(1.5, 0.25, 2.0) == (3.5, 0.25)
    with pytest.raises(ValueError, match="displacement"):
        coupled_jump(1.5, 0.25, -1.0)


# ---------------------------------------------------------------------------
# recorded pairs
# ---------------------------------------------------------------------------


def test_lower_marginal_is_the_single_path_engine():
    """Coupling must not perturb the lower path: bitwise identity."""
    spec = exp_jump_diffusion()
    streams = PathStreams(seed=9, path_index=5)
    pair = simulate_coupled(spec, 0.7, 2.0, 3.0, 1e-3, streams)
    solo = simulate_path(spec, 0.7, 3.0, 1e-3, streams)
    assert np.array_equal(pair.lower, solo.values)
    assert np.array_equal(pair.jump_times, solo.jump_times)


def test_gap_decays_geometrically_under_linear_pull():
    spec = reflected_ou(1.0, 1.0, 0.0)
    h = 1e-3
    pair = simulate_coupled(spec, 5.0, 6.0, 1.0, h, PathStreams(seed=0))
    assert pair.tau_index is None
    assert pair.coalesced_from is None
    expected = (1.0 - h) ** np.arange(1001)
    assert np.allclose(pair.gaps, expected, rtol=1e-9)
    assert np.all(pair.upper == pair.lower + pair.gaps)


def test_noiseless_pair_preserves_gap_through_jumps():
    """With flat drift and no noise the gap can change only at the boundary."""
    spec = ProcessSpec(
        ConstantDrift(-1.0), 0.0, UpwardJumps(ExponentialDisplacement(2.0), 1.0)
    )
    h = 1.0 / 128.0
    pair = simulate_coupled(spec, 0.5, 0.875, 4.0, h, PathStreams(seed=14))
    assert pair.jump_times.size > 0
    changed = pair.gaps[1:] != pair.gaps[:-1]
    assert np.all(pair.lower[1:][changed] == 0.0)
    assert np.all(np.diff(pair.gaps) <= 0)
    assert pair.gaps[0] == 0.875 - 0.5


def test_coalescence_is_permanent():
    spec = drifted_rbm()
    pair = simulate_coupled(spec, 0.0, 0.5, 20.0, 1e-3, PathStreams(seed=2))
    assert pair.tau_index is not None
    assert pair.coalesced_from is not None
    assert pair.coalesced_from <= pair.tau_index
    assert np.all(pair.gaps[pair.coalesced_from :] == 0.0)
    assert np.all(pair.upper[pair.coalesced_from :] == pair.lower[pair.coalesced_from :])
    # the meeting point is an exact boundary meeting
    assert pair.lower[pair.tau_index] == 0.0
    assert pair.upper[pair.tau_index] == 0.0


def test_simulate_coupled_validates_inputs():
    with pytest.raises(ValueError, match="x1 <= x2"):
        simulate_coupled(UNIT_PULL, 2.0, 1.0, 1.0, 0.1, PathStreams(seed=0))
    with pytest.raises(ValueError, match="x1 <= x2"):
        simulate_coupled(UNIT_PULL, -1.0, 1.0, 1.0, 0.1, PathStreams(seed=0))
    with pytest.raises(ValueError, match="step size"):
        simulate_coupled(UNIT_PULL, 0.0, 1.0, 1.0, -0.1, PathStreams(seed=0))


# ---------------------------------------------------------------------------
# coupled ensembles
# ---------------------------------------------------------------------------


def test_ensemble_ordering_and_exact_event_counters():
    spec = exp_jump_diffusion()
    ens = coupled_ensemble(spec, 0.0, 1.5, [0.0, 1.0, 2.0], 1e-3, seed=6, n_paths=200)
    assert np.all(ens.min_gap >= 0.0)
    assert np.all(ens.gaps >= 0.0)
    assert int(ens.jump_events.sum()) > 0
    assert int(ens.jump_gap_mismatches.sum()) == 0
    assert int(ens.gap_resurrections.sum()) == 0
    met = ~np.isnan(ens.tau_time)
    assert np.any(met)
    assert np.all(ens.coalesced_time[met] <= ens.tau_time[met])
    # flat drift: the envelope is the initial gap, touched exactly at t = 0
    assert gap_envelope_violation(ens) == 0.0


def test_ensemble_lower_marginal_matches_single_path_ensemble():
    spec = exp_jump_diffusion()
    times = [0.5, 1.0, 2.0]
    ens = coupled_ensemble(spec, 0.25, 2.0, times, 1e-3, seed=3, n_paths=16)
    solo = sample_ensemble(spec, 0.25, times, 1e-3, seed=3, n_paths=16)
    assert np.array_equal(ens.lower, solo.values)


def test_ensemble_partitioning_does_not_change_output(monkeypatch):
    spec = exp_jump_diffusion()
    whole = coupled_ensemble(spec, 0.0, 1.0, [1.0], 1e-2, seed=8, n_paths=12)
    monkeypatch.setattr(engine, "_BLOCK_BUDGET", 300)
    split = coupled_ensemble(spec, 0.0, 1.0, [1.0], 1e-2, seed=8, n_paths=12, jobs=3)
    assert np.array_equal(whole.gaps, split.gaps)
    assert np.array_equal(whole.tau_time, split.tau_time, equal_nan=True)
    assert np.array_equal(
        whole.envelope_violation, split.envelope_violation, equal_nan=True
    )


def test_ensemble_envelope_is_strict_for_negative_slope():
    spec = reflected_ou(1.0, 1.0, 1.0)
    ens = coupled_ensemble(spec, 1.0, 2.0, [1.0], 1e-3, seed=4, n_paths=64)
    # geometric decay sits strictly below the exponential envelope after t=0
    assert gap_envelope_violation(ens) == 0.0
    assert np.all(ens.envelope_violation[~np.isnan(ens.envelope_violation)] <= 0.0)


def test_ensemble_window_suprema():
    spec = reflected_ou(1.0, 1.0, 0.0)
    h = 1e-2
    ens = coupled_ensemble(
        spec, 5.0, 6.0, [2.0], h, seed=0, n_paths=2, windows=[(0.0, 0.5), (1.0, 2.0)]
    )
    assert ens.window_sup.shape == (2, 2)
    # noiseless geometric gap: window sup is attained at the window's left edge
    assert ens.window_sup[0, 0] == pytest.approx(1.0, rel=1e-12)
    assert ens.window_sup[1, 0] == pytest.approx((1.0 - h) ** 100, rel=1e-9)


def test_ensemble_all_met_scores_zero_envelope():
    # coalesced from the start but away from the boundary: zero gap vs zero
    # envelope, exact zero violation
    ens = coupled_ensemble(drifted_rbm(), 1.0, 1.0, [0.5], 1e-2, seed=0, n_paths=4)
    assert np.all(ens.envelope_violation == 0.0)
    assert np.all(ens.coalesced_time == 0.0)
    assert gap_envelope_violation(ens) == 0.0
    # meeting at the boundary from the start: nothing to check, scores zero
    ens = coupled_ensemble(drifted_rbm(), 0.0, 0.0, [0.5], 1e-2, seed=0, n_paths=4)
    assert np.all(np.isnan(ens.envelope_violation))
    assert np.all(ens.tau_time == 0.0)
    assert gap_envelope_violation(ens) == 0.0


def test_ensemble_validates_windows():
    with pytest.raises(ValueError, match="windows"):
        coupled_ensemble(
            drifted_rbm(), 0.0, 1.0, [1.0], 1e-2, seed=0, n_paths=2, windows=[(2.0, 1.0)]
        )


# ---------------------------------------------------------------------------
# decay-functional probe
# ---------------------------------------------------------------------------


def test_supermartingale_probe_respects_initial_moment():
    spec = drifted_rbm()
    cert = make_certificate(spec)
    mean, stderr = supermartingale_probe(spec, cert, x2=1.0, t=2.0, n_paths=2000, seed=7)
    assert stderr > 0
    assert 1.0 <= mean <= math.exp(1.0) + 4.0 * stderr + 0.05


def test_supermartingale_probe_validates():
    spec = drifted_rbm()
    cert = make_certificate(spec)
    with pytest.raises(ValueError, match="horizon"):
        supermartingale_probe(spec, cert, x2=1.0, t=0.0, n_paths=4)
    from rjdlab.model import AffineDrift

    bad = make_certificate(ProcessSpec(AffineDrift(1.0, 1.0), 1.0))
    with pytest.raises(ValueError, match="no valid certificate"):
        supermartingale_probe(spec, bad, x2=1.0, t=1.0, n_paths=4)
