"""Process specifications for reflected jump-diffusions on the half-line.

A process is described by three ingredients:

* a drift function ``g`` (constant, affine, or tabulated with linear
  interpolation),
* a constant diffusion coefficient ``sigma >= 0``,
* a jump mechanism: either no jumps, or upward jumps arriving at a constant
  Poisson rate whose displacement law does not depend on the current state.

The diffusive part is reflected at zero; jump destinations ``x + Z`` with
``Z >= 0`` never leave the half-line.  ``check_assumptions`` audits the
structural properties that the rate-certificate machinery relies on:
constant total jump intensity, stochastic monotonicity of the jump kernel,
a one-sided slope bound for the drift, and a finite bound on the mean drift.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AffineDrift",
    "AssumptionReport",
    "ConstantDrift",
    "Displacement",
    "Drift",
    "ExponentialDisplacement",
    "FixedDisplacement",
    "JumpFamily",
    "MixtureDisplacement",
    "NoJumps",
    "ProcessSpec",
    "StateDependentJumps",
    "TabulatedDrift",
    "UpwardJumps",
    "check_assumptions",
    "drifted_rbm",
    "effective_drift",
    "exp_jump_diffusion",
    "mgf_domain",
    "probe_grid",
    "reflected_ou",
]


def probe_grid() -> np.ndarray:
    """Reference grid used when a supremum over states must be scanned.

    Returns ``{0} ∪ {2**j : j = -4, ..., 20}``, which spans from well inside
    the diffusive boundary layer out to states where any admissible drift has
    long since saturated.
    """
    return np.concatenate(([0.0], 2.0 ** np.arange(-4, 21, dtype=float)))


# ---------------------------------------------------------------------------
# displacement laws (jump sizes)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentialDisplacement:
    """Exponential jump sizes with the given rate (mean ``1/rate``)."""

    rate: float

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise ValueError(f"displacement rate must be positive, got {self.rate}")

    def mean(self) -> float:
        return 1.0 / self.rate

    def mgf_domain(self) -> float:
        """Supremum of exponents with a finite exponential moment."""
        return self.rate

    def mgf(self, lam: float) -> float:
        if lam >= self.mgf_domain():
            raise ValueError("MGF divergence")
        return self.rate / (self.rate - lam)

    def inverse_cdf(self, u):
        """Quantile transform; accepts scalars or arrays in [0, 1)."""
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate

    def survival(self, z) -> np.ndarray:
        """P(Z >= z)."""
        z = np.asarray(z, dtype=float)
        return np.where(z <= 0.0, 1.0, np.exp(-self.rate * np.maximum(z, 0.0)))


@dataclass(frozen=True)
class FixedDisplacement:
    """Deterministic jump of a fixed nonnegative size."""

    size: float

    def __post_init__(self) -> None:
        if not self.size >= 0:
            raise ValueError(f"displacement size must be nonnegative, got {self.size}")

    def mean(self) -> float:
        return self.size

    def mgf_domain(self) -> float:
        return math.inf

    def mgf(self, lam: float) -> float:
        return math.exp(lam * self.size)

    def inverse_cdf(self, u):
        return np.full_like(np.asarray(u, dtype=float), self.size)

    def survival(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return np.where(z <= self.size, 1.0, 0.0)


@dataclass(frozen=True)
class MixtureDisplacement:
    """Finite mixture of displacement laws.

    ``components`` is a sequence of ``(weight, law)`` pairs with positive
    weights summing to one.  Sampling uses a stratified inverse transform:
    the uniform variate first selects the component through the cumulative
    weights, then is rescaled and pushed through that component's quantile
    function.
    """

    components: tuple

    def __post_init__(self) -> None:
        comps = tuple((float(w), law) for w, law in self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        weights = np.array([w for w, _ in comps])
        if np.any(weights <= 0):
            raise ValueError("mixture weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must sum to 1, got {weights.sum()!r}")
        object.__setattr__(self, "components", comps)

    def mean(self) -> float:
        return sum(w * law.mean() for w, law in self.components)

    def mgf_domain(self) -> float:
        return min(law.mgf_domain() for _, law in self.components)

    def mgf(self, lam: float) -> float:
        if lam >= self.mgf_domain():
            raise ValueError("MGF divergence")
        return sum(w * law.mgf(lam) for w, law in self.components)

    def inverse_cdf(self, u):
        u = np.asarray(u, dtype=float)
        weights = np.array([w for w, _ in self.components])
        edges = np.concatenate(([0.0], np.cumsum(weights)))
        edges[-1] = 1.0  # guard against cumulative rounding
        out = np.empty_like(u)
        for j, (w, law) in enumerate(self.components):
            lo, hi = edges[j], edges[j + 1]
            sel = (u >= lo) & (u < hi) if j < len(self.components) - 1 else (u >= lo)
            if np.any(sel):
                out[sel] = law.inverse_cdf((u[sel] - lo) / w)
        return out

    def survival(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return sum(w * law.survival(z) for w, law in self.components)


Displacement = ExponentialDisplacement | FixedDisplacement | MixtureDisplacement


# ---------------------------------------------------------------------------
# jump families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoJumps:
    """Pure reflected diffusion; the jump part is switched off."""

    @property
    def intensity(self) -> float:
        return 0.0


@dataclass(frozen=True)
class UpwardJumps:
    """Upward jumps at a constant Poisson rate, state-independent sizes.

    From state ``x`` the process jumps to ``x + Z`` where ``Z`` follows
    ``displacement``; the total intensity is ``intensity`` regardless of the
    state, so the jump kernel is a single law translated along the half-line.
    """

    displacement: Displacement
    intensity: float

    def __post_init__(self) -> None:
        if not self.intensity > 0:
            raise ValueError(f"jump intensity must be positive, got {self.intensity}")

    def destination_tail(self, x, y) -> np.ndarray:
        """Mass the jump kernel at ``x`` puts on destinations ``>= y``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.intensity * self.displacement.survival(y - x)


class StateDependentJumps:
    """Reserved extension point for state-indexed jump catalogs.

    Declared so configuration errors mention it by name; constructing one is
    not supported.
    """

    def __init__(self, *args, **kwargs):
        raise NotImplementedError("state-dependent jump catalogs are not implemented")


JumpFamily = NoJumps | UpwardJumps


# ---------------------------------------------------------------------------
# drifts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantDrift:
    value: float

    def value_at(self, x):
        x = np.asarray(x, dtype=float)
        return np.full_like(x, self.value)

    @property
    def slope_bound(self) -> float:
        """Least constant ``G`` with ``g(x) - G*x`` nonincreasing."""
        return 0.0

    @property
    def min_slope(self) -> float:
        """Most negative incremental slope (step-size control for couplings)."""
        return 0.0

    def sup_value(self) -> float:
        return self.value


@dataclass(frozen=True)
class AffineDrift:
    """Drift ``g(x) = slope * x + intercept``."""

    slope: float
    intercept: float

    def value_at(self, x):
        x = np.asarray(x, dtype=float)
        return self.slope * x + self.intercept

    @property
    def slope_bound(self) -> float:
        return self.slope

    @property
    def min_slope(self) -> float:
        return self.slope

    def sup_value(self) -> float:
        if self.slope > 0:
            return math.inf
        return self.intercept  # attained as x -> 0+


@dataclass(frozen=True)
class TabulatedDrift:
    """Piecewise-linear drift through ``knots = ((x0, g0), (x1, g1), ...)``.

    Between knots the value is linearly interpolated; beyond the first/last
    knot it is held constant.  Knot abscissae must be strictly increasing and
    nonnegative.
    """

    knots: tuple

    def __post_init__(self) -> None:
        knots = tuple((float(x), float(g)) for x, g in self.knots)
        if not knots:
            raise ValueError("tabulated drift needs at least one knot")
        xs = np.array([x for x, _ in knots])
        if np.any(xs < 0):
            raise ValueError("tabulated drift knots must have nonnegative x")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("tabulated drift knots must be strictly increasing in x")
        object.__setattr__(self, "knots", knots)

    @property
    def xs(self) -> np.ndarray:
        return np.array([x for x, _ in self.knots])

    @property
    def gs(self) -> np.ndarray:
        return np.array([g for _, g in self.knots])

    def value_at(self, x):
        x = np.asarray(x, dtype=float)
        # np.interp clamps to the end values, matching constant extrapolation
        return np.interp(x, self.xs, self.gs)

    def _secants(self) -> np.ndarray:
        xs, gs = self.xs, self.gs
        if len(xs) < 2:
            return np.zeros(1)
        return np.diff(gs) / np.diff(xs)

    @property
    def slope_bound(self) -> float:
        return float(np.max(self._secants()))

    @property
    def min_slope(self) -> float:
        return float(np.min(self._secants()))

    def sup_value(self) -> float:
        # piecewise linear with flat tails: the maximum sits on a knot
        return float(np.max(self.gs))


Drift = ConstantDrift | AffineDrift | TabulatedDrift


# ---------------------------------------------------------------------------
# the full process
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProcessSpec:
    """A reflected jump-diffusion on ``[0, inf)``.

    Between jumps the state follows ``dX = g(X) dt + sigma dW`` reflected at
    zero; at Poisson epochs it jumps upward by an independent displacement.
    """

    drift: Drift
    sigma: float
    jumps: JumpFamily = field(default_factory=NoJumps)

    def __post_init__(self) -> None:
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if self.sigma == 0 and self.intensity == 0:
            if self.drift.sup_value() >= 0:
                warnings.warn(
                    "degenerate process: zero noise, no jumps, and the drift "
                    "is not strictly negative",
                    stacklevel=2,
                )

    @property
    def intensity(self) -> float:
        return self.jumps.intensity

    @property
    def has_jumps(self) -> bool:
        return self.intensity > 0

    def drift_value(self, x):
        return self.drift.value_at(x)


def effective_drift(spec: ProcessSpec, x) -> np.ndarray:
    """Drift plus the mean displacement rate: ``g(x) + intensity * E[Z]``."""
    x = np.asarray(x, dtype=float)
    base = spec.drift.value_at(x)
    if not spec.has_jumps:
        return base
    jump_mean = spec.jumps.displacement.mean()
    if not math.isfinite(jump_mean):
        raise ValueError("mean drift undefined: displacement law has infinite mean")
    return base + spec.intensity * jump_mean


def mgf_domain(jumps: JumpFamily) -> float:
    """Supremum of exponents at which the jump part keeps finite moments."""
    if isinstance(jumps, NoJumps):
        return math.inf
    return jumps.displacement.mgf_domain()


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of the structural audit backing the rate certificates."""

    constant_intensity: bool
    stochastically_ordered: bool
    displacement_tail_monotone: bool
    drift_slope_bound: float | None
    mean_drift_bound: float | None
    notes: tuple


def check_assumptions(spec: ProcessSpec) -> AssumptionReport:
    """Audit the structural properties of ``spec``.

    All jump families in the catalog have constant total intensity and a
    translation-invariant kernel, so the ordering properties hold by
    construction; the report still evaluates the drift-dependent constants:

    * ``drift_slope_bound`` — least ``G`` with ``g(x) - G*x`` nonincreasing
      (the affine slope, the largest secant slope for tabulated drifts,
      zero for constant drifts);
    * ``mean_drift_bound`` — supremum of the effective drift over the probe
      grid ``{0} ∪ {2**j : j = -4..20}``.
    """
    notes = []
    g = probe_grid()
    mean_bound = float(np.max(effective_drift(spec, g)))
    notes.append("mean drift scanned on the probe grid {0} U {2^j : j=-4..20}")
    if mean_bound >= 0:
        notes.append(
            "effective mean drift is nonnegative somewhere on the probe grid; "
            "no positive decay rate can be certified"
        )
    slope = spec.drift.slope_bound
    if isinstance(spec.drift, TabulatedDrift):
        notes.append("drift slope bound taken over knot secants")
    if spec.sigma == 0 and not spec.has_jumps:
        notes.append("zero noise and no jumps: deterministic motion")
    return AssumptionReport(
        constant_intensity=True,
        stochastically_ordered=True,
        displacement_tail_monotone=True,
        drift_slope_bound=float(slope),
        mean_drift_bound=mean_bound,
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# ready-made processes
# ---------------------------------------------------------------------------


def drifted_rbm(drift: float = -1.0, sigma: float = 1.0) -> ProcessSpec:
    """Reflected Brownian motion with constant drift."""
    return ProcessSpec(ConstantDrift(drift), sigma, NoJumps())


def reflected_ou(speed: float = 1.0, depth: float = 1.0, sigma: float = 1.0) -> ProcessSpec:
    """Reflected linear pull toward the level ``-depth`` below the boundary.

    The drift is ``g(x) = -speed * (depth + x)``; because the attracting
    level sits below zero the boundary is visited persistently.
    """
    return ProcessSpec(AffineDrift(-speed, -speed * depth), sigma, NoJumps())


def exp_jump_diffusion(
    drift: float = -1.0,
    sigma: float = 1.0,
    jump_rate: float = 2.0,
    intensity: float = 1.0,
) -> ProcessSpec:
    """Drifted reflected diffusion plus exponential upward jumps."""
    return ProcessSpec(
        ConstantDrift(drift),
        sigma,
        UpwardJumps(ExponentialDisplacement(jump_rate), intensity),
    )
