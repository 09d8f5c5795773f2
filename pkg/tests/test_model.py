"""Process-specification layer: drifts, jump laws, structural audit."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from rjdlab.model import (
    AffineDrift,
    ConstantDrift,
    ExponentialDisplacement,
    FixedDisplacement,
    MixtureDisplacement,
    NoJumps,
    ProcessSpec,
    StateDependentJumps,
    TabulatedDrift,
    UpwardJumps,
    check_assumptions,
    drifted_rbm,
    effective_drift,
    exp_jump_diffusion,
    mgf_domain,
    probe_grid,
    reflected_ou,
)

TOL = 1e-12
QUAD_TOL = 1e-9


# ---------------------------------------------------------------------------
# displacement laws
# ---------------------------------------------------------------------------


def test_exponential_mean_against_integral_oracle():
    law = ExponentialDisplacement(rate=2.0)
    oracle, err = quad(lambda z: z * 2.0 * np.exp(-2.0 * z), 0, np.inf)
    assert err < QUAD_TOL
    assert abs(law.mean() - oracle) < QUAD_TOL


def test_exponential_mgf_against_integral_oracle():
    law = ExponentialDisplacement(rate=2.0)
    for lam in (0.3, 1.0, 1.9):
        oracle, err = quad(lambda z, a=lam: 2.0 * np.exp((a - 2.0) * z), 0, np.inf)
        assert err < 1e-6
        assert abs(law.mgf(lam) - oracle) < 1e-7
    assert law.mgf_domain() == 2.0


def test_exponential_mgf_divergence():
    law = ExponentialDisplacement(rate=2.0)
    for lam in (2.0, 2.5):
        with pytest.raises(ValueError, match="MGF divergence"):
            law.mgf(lam)


def test_exponential_inverse_cdf_hand_value():
    law = ExponentialDisplacement(rate=2.0)
    # u = 1 - exp(-2) maps to the point with survival exp(-2), i.e. z = 1
    assert abs(law.inverse_cdf(1.0 - math.exp(-2.0)) - 1.0) < TOL


def test_fixed_displacement():
    law = FixedDisplacement(size=1.5)
    assert law.mean() == 1.5
    assert law.mgf_domain() == math.inf
    assert abs(law.mgf(2.0) - math.exp(3.0)) < TOL
    assert np.all(law.inverse_cdf(np.array([0.0, 0.3, 0.999])) == 1.5)
    assert law.survival(1.5) == 1.0
    assert law.survival(1.5000001) == 0.0


def test_mixture_stratified_inverse_cdf():
    law = MixtureDisplacement(((0.5, ExponentialDisplacement(1.0)), (0.5, FixedDisplacement(3.0))))
    # u below the first edge lands in the rescaled exponential stratum
    assert abs(law.inverse_cdf(0.25) - (-math.log1p(-0.5))) < TOL
    # u above the edge lands in the deterministic stratum
    assert law.inverse_cdf(0.75) == 3.0
    assert law.mgf_domain() == 1.0
    assert abs(law.mean() - 2.0) < TOL


def test_mixture_sampling_mean():
    law = MixtureDisplacement(((0.5, ExponentialDisplacement(1.0)), (0.5, FixedDisplacement(3.0))))
    rng = np.random.default_rng(42)
    draws = law.inverse_cdf(rng.random(200_000))
    assert abs(draws.mean() - 2.0) < 0.02


def test_mixture_weight_validation():
    with pytest.raises(ValueError, match="sum to 1"):
        MixtureDisplacement(((0.5, FixedDisplacement(1.0)), (0.6, FixedDisplacement(2.0))))
    with pytest.raises(ValueError, match="positive"):
        MixtureDisplacement(((1.5, FixedDisplacement(1.0)), (-0.5, FixedDisplacement(2.0))))


def test_mgf_domain_dispatch():
    assert mgf_domain(NoJumps()) == math.inf
    assert mgf_domain(UpwardJumps(ExponentialDisplacement(2.0), 1.0)) == 2.0
    mix = MixtureDisplacement(((0.25, FixedDisplacement(1.0)), (0.75, ExponentialDisplacement(0.5))))
    assert mgf_domain(UpwardJumps(mix, 2.0)) == 0.5


# ---------------------------------------------------------------------------
# jump families
# ---------------------------------------------------------------------------


def test_destination_tails_are_stochastically_ordered():
    fam = UpwardJumps(ExponentialDisplacement(2.0), 1.0)
    ys = np.linspace(0.0, 8.0, 33)
    lo = fam.destination_tail(0.5, ys)
    hi = fam.destination_tail(1.5, ys)
    assert np.all(hi >= lo - TOL)  # higher start dominates


def test_displacement_tail_is_translation_invariant():
    fam = UpwardJumps(ExponentialDisplacement(2.0), 3.0)
    zs = np.linspace(0.0, 5.0, 21)
    t0 = fam.destination_tail(0.0, 0.0 + zs)
    t7 = fam.destination_tail(7.0, 7.0 + zs)
    np.testing.assert_allclose(t0, t7, rtol=0, atol=TOL)


def test_state_dependent_jumps_reserved():
    with pytest.raises(NotImplementedError):
        StateDependentJumps()


# ---------------------------------------------------------------------------
# drifts
# ---------------------------------------------------------------------------


def test_constant_drift():
    d = ConstantDrift(-1.0)
    assert d.value_at(0.0) == -1.0
    assert np.all(d.value_at(np.array([0.0, 5.0])) == -1.0)
    assert d.slope_bound == 0.0
    assert d.sup_value() == -1.0


def test_affine_drift():
    d = AffineDrift(slope=-1.0, intercept=-1.0)
    assert d.value_at(2.0) == -3.0
    assert d.slope_bound == -1.0
    assert d.sup_value() == -1.0
    assert AffineDrift(2.0, 1.0).sup_value() == math.inf


def test_tabulated_drift_interpolation():
    d = TabulatedDrift(((0.0, 0.0), (1.0, -1.0), (3.0, -1.5)))
    assert d.value_at(0.5) == -0.5
    assert d.value_at(2.0) == -1.25
    # constant extrapolation on both sides
    assert d.value_at(10.0) == -1.5
    d2 = TabulatedDrift(((1.0, -2.0), (2.0, -3.0)))
    assert d2.value_at(0.0) == -2.0


def test_tabulated_drift_slope_bounds():
    d = TabulatedDrift(((0.0, 0.0), (1.0, -1.0), (2.0, -1.1)))
    assert abs(d.slope_bound - (-0.1)) < TOL  # largest secant
    assert abs(d.min_slope - (-1.0)) < TOL
    assert d.sup_value() == 0.0


def test_tabulated_drift_validation():
    with pytest.raises(ValueError, match="strictly increasing"):
        TabulatedDrift(((0.0, 0.0), (0.0, -1.0)))
    with pytest.raises(ValueError, match="nonnegative"):
        TabulatedDrift(((-1.0, 0.0), (1.0, -1.0)))


# ---------------------------------------------------------------------------
# full process and audit
# ---------------------------------------------------------------------------


def test_effective_drift_with_jumps():
    spec = exp_jump_diffusion(drift=-1.0, sigma=1.0, jump_rate=2.0, intensity=1.0)
    # drift -1 plus intensity * mean jump = -1 + 1 * 0.5
    assert abs(effective_drift(spec, 0.0) - (-0.5)) < TOL
    assert abs(effective_drift(spec, 17.0) - (-0.5)) < TOL


def test_effective_drift_without_jumps():
    spec = drifted_rbm(-1.0, 1.0)
    assert effective_drift(spec, 3.0) == -1.0
    ou = reflected_ou(speed=1.0, depth=1.0, sigma=1.0)
    assert effective_drift(ou, 2.0) == -3.0


def test_probe_grid_shape():
    g = probe_grid()
    assert g[0] == 0.0
    assert g[1] == 2.0**-4
    assert g[-1] == 2.0**20
    assert len(g) == 26
    assert np.all(np.diff(g) > 0)


def test_check_assumptions_reflected_ou():
    rep = check_assumptions(reflected_ou(1.0, 1.0, 1.0))
    assert rep.constant_intensity
    assert rep.stochastically_ordered
    assert rep.displacement_tail_monotone
    assert rep.drift_slope_bound == -1.0
    # effective drift -(1+x) peaks at x = 0 on the grid
    assert rep.mean_drift_bound == -1.0


def test_check_assumptions_jump_process():
    rep = check_assumptions(exp_jump_diffusion())
    assert rep.drift_slope_bound == 0.0
    assert abs(rep.mean_drift_bound - (-0.5)) < TOL


def test_check_assumptions_flags_nonnegative_mean_drift():
    rep = check_assumptions(drifted_rbm(drift=0.5))
    assert rep.mean_drift_bound == 0.5
    assert any("no positive decay rate" in n for n in rep.notes)


def test_sigma_validation():
    with pytest.raises(ValueError, match="sigma"):
        ProcessSpec(ConstantDrift(-1.0), -0.5, NoJumps())


def test_degenerate_process_warns_but_constructs():
    with pytest.warns(UserWarning, match="degenerate"):
        spec = ProcessSpec(ConstantDrift(0.0), 0.0, NoJumps())
    assert spec.sigma == 0.0
    # strictly negative drift with zero noise is fine
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ProcessSpec(ConstantDrift(-1.0), 0.0, NoJumps())


def test_presets():
    ou = reflected_ou(speed=2.0, depth=2.0, sigma=0.5)
    assert ou.drift.value_at(0.0) == -4.0
    assert ou.drift.slope_bound == -2.0
    jd = exp_jump_diffusion()
    assert jd.intensity == 1.0
    assert jd.jumps.displacement.rate == 2.0
