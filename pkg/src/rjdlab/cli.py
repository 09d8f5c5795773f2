"""Command-line orchestration for the reflected jump-diffusion laboratory.

One config document drives everything.  Values resolve as flag > file >
default, every applied default is echoed into the report, and all randomness
flows through the per-path substream contract, so a fixed (config, seed) pair
produces byte-identical CSV output regardless of worker count.

Subcommands
-----------
certificate   decay-rate certificate for the configured process (JSON)
simulate      dump recorded paths (CSV: path_id, t, x, ell)
couple        dump coupled pairs (CSV: path_id, t, x_lower, x_upper, coalesced)
decay         distance-decay curve vs the certificate bounds (CSV)
path-decay    window-supremum decay curve (CSV, same columns)
stationary    distance to the estimated long-run law (CSV, same columns)
verify        run the bound and invariant verdicts for the configured process
examples      run the built-in worked-example verdict suite

Exit codes: 0 success, 1 verdict failure, 2 config error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__, coupling, engine, model, wasserstein
from .certificate import RateCertificate, make_certificate
from .engine import PathStreams
from .model import ProcessSpec

__all__ = ["ConfigError", "ExperimentConfig", "main", "parse_config", "run_examples"]


class ConfigError(ValueError):
    """A config document or flag set that cannot be turned into a run."""


_PRESETS = {
    "drifted-rbm": model.drifted_rbm,
    "reflected-ou": model.reflected_ou,
    "exp-jump-diffusion": model.exp_jump_diffusion,
}

_KINDS = (
    "certificate",
    "simulate",
    "couple",
    "decay",
    "path-decay",
    "stationary",
    "verify",
    "examples",
)

# kinds whose numerics must satisfy the monotone-coupling step bound
_COUPLING_KINDS = {"couple", "decay", "path-decay", "verify"}

# kinds that dump full path tables and therefore default to a few paths
# rather than the ensemble default
_DUMP_KINDS = {"simulate", "couple"}

_CURVE_COLUMNS = (
    "t",
    "wp_coupling",
    "wp_coupling_stderr",
    "wp_marginal",
    "bound_thm1",
    "bound_thm2",
    "n_paths",
)

_KNOWN_KEYS = {
    "process.preset",
    "process.drift.type",
    "process.drift.value",
    "process.drift.slope",
    "process.drift.intercept",
    "process.drift.knots",
    "process.sigma",
    "process.jumps.type",
    "process.jumps.rate",
    "process.jumps.size",
    "process.jumps.intensity",
    "numerics.dt",
    "numerics.t_max",
    "numerics.paths",
    "numerics.seed",
    "numerics.burn_in",
    "run.kind",
    "run.p",
    "run.x0",
    "run.x",
    "run.x1",
    "run.x2",
    "run.times",
    "run.windows",
    "run.stride",
    "run.t_extra",
    "output.path",
    "output.format",
}

_SECTIONS = ("process", "numerics", "run", "output")


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def _flatten(document) -> dict:
    """Normalize a flat or two-level document to dotted keys."""
    if not isinstance(document, dict):
        raise ConfigError("config document must be a key-value mapping")
    flat = {}
    for key, value in document.items():
        if not isinstance(key, str):
            raise ConfigError(f"config keys must be strings, got {key!r}")
        if key in _SECTIONS and isinstance(value, dict):
            for sub, subvalue in value.items():
                flat[f"{key}.{sub}"] = subvalue
        else:
            flat[key] = value
    return flat


def _as_float(key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    return float(value)


def _as_int(key: str, value) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    if isinstance(value, float) and not value.is_integer():
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    if not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return int(value)


def _build_process(flat: dict) -> ProcessSpec | None:
    keys = {k: v for k, v in flat.items() if k.startswith("process.")}
    if not keys:
        return None
    preset = keys.pop("process.preset", None)
    if preset is not None:
        if keys:
            raise ConfigError(
                "process.preset cannot be combined with explicit process keys: "
                + ", ".join(sorted(keys))
            )
        if preset not in _PRESETS:
            raise ConfigError(
                f"unknown process.preset {preset!r}; choose from "
                + ", ".join(sorted(_PRESETS))
            )
        return _PRESETS[preset]()

    drift_type = keys.get("process.drift.type")
    if drift_type is None:
        raise ConfigError("process.drift.type is required when no preset is used")
    if drift_type == "constant":
        drift = model.ConstantDrift(_as_float("process.drift.value", keys.get("process.drift.value", -1.0)))
    elif drift_type == "affine":
        drift = model.AffineDrift(
            _as_float("process.drift.slope", keys.get("process.drift.slope", 0.0)),
            _as_float("process.drift.intercept", keys.get("process.drift.intercept", 0.0)),
        )
    elif drift_type == "tabulated":
        knots = keys.get("process.drift.knots")
        if not isinstance(knots, (list, tuple)) or not knots:
            raise ConfigError("process.drift.knots must be a nonempty list of [x, g] pairs")
        try:
            drift = model.TabulatedDrift(tuple((float(x), float(g)) for x, g in knots))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid process.drift.knots: {exc}") from exc
    else:
        raise ConfigError(
            f"unknown process.drift.type {drift_type!r}; choose constant, affine, or tabulated"
        )

    sigma = _as_float("process.sigma", keys.get("process.sigma", 1.0))
    jumps_type = keys.get("process.jumps.type", "none")
    intensity = keys.get("process.jumps.intensity")
    if jumps_type == "none":
        jumps = model.NoJumps()
    elif jumps_type == "exponential":
        rate = _as_float("process.jumps.rate", keys.get("process.jumps.rate", 1.0))
        lam = _as_float("process.jumps.intensity", intensity if intensity is not None else 1.0)
        jumps = model.UpwardJumps(model.ExponentialDisplacement(rate), lam)
    elif jumps_type == "deterministic":
        size = _as_float("process.jumps.size", keys.get("process.jumps.size", 1.0))
        lam = _as_float("process.jumps.intensity", intensity if intensity is not None else 1.0)
        jumps = model.UpwardJumps(model.FixedDisplacement(size), lam)
    else:
        raise ConfigError(
            f"unknown process.jumps.type {jumps_type!r}; choose none, exponential, or deterministic"
        )
    try:
        return ProcessSpec(drift, sigma, jumps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment: process, numerics, run, and output."""

    spec: ProcessSpec | None
    kind: str | None
    dt: float
    t_max: float
    paths: int
    seed: int
    burn_in: float | str
    run: dict
    out_path: str | None
    out_format: str | None
    defaults_applied: tuple
    document: dict


def parse_config(document) -> ExperimentConfig:
    """Validate a config document and fill (and echo) defaults."""
    flat = _flatten(document)
    unknown = sorted(set(flat) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError("unknown config keys: " + ", ".join(unknown))

    defaults = []

    def _pull(key, default, note=True):
        if key in flat:
            return flat[key]
        if note:
            defaults.append(f"{key}={default}")
        return default

    kind = flat.get("run.kind")
    if kind is not None and kind not in _KINDS:
        raise ConfigError(f"unknown run.kind {kind!r}; choose from " + ", ".join(_KINDS))

    dt = _as_float("numerics.dt", _pull("numerics.dt", 1e-3))
    if not dt > 0:
        raise ConfigError("dt must be positive")
    default_paths = 4 if kind in _DUMP_KINDS else 10_000
    paths = _as_int("numerics.paths", _pull("numerics.paths", default_paths))
    if paths < 1:
        raise ConfigError("paths must be at least 1")
    seed = _as_int("numerics.seed", _pull("numerics.seed", 0))
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be a nonnegative 64-bit integer")
    t_max = _as_float("numerics.t_max", _pull("numerics.t_max", 10.0, note=kind in _DUMP_KINDS))
    if not t_max > 0:
        raise ConfigError("t_max must be positive")
    burn_in = _pull("numerics.burn_in", "auto", note=kind == "stationary")
    if burn_in != "auto":
        burn_in = _as_float("numerics.burn_in", burn_in)
        if not burn_in > 0:
            raise ConfigError("burn_in must be positive or 'auto'")

    spec = _build_process(flat)
    if spec is not None and kind in _COUPLING_KINDS:
        down = -min(0.0, spec.drift.min_slope)
        if down > 0 and dt * down >= 1.0:
            raise ConfigError(
                f"step too large for monotone coupling: dt = {dt} against "
                f"downward drift slope {down} (need dt < {1.0 / down})"
            )

    run = {k.split(".", 1)[1]: v for k, v in flat.items() if k.startswith("run.")}
    run.pop("kind", None)
    if "p" in run:
        run["p"] = _as_float("run.p", run["p"])
        if not run["p"] >= 1:
            raise ConfigError("p must be at least 1")
    if "stride" in run:
        run["stride"] = _as_int("run.stride", run["stride"])
        if run["stride"] < 1:
            raise ConfigError("stride must be at least 1")
    for key in ("x0", "x", "x1", "x2"):
        if key in run:
            run[key] = _as_float(f"run.{key}", run[key])
            if run[key] < 0:
                raise ConfigError(f"{key} must be nonnegative")
    if "times" in run:
        times = run["times"]
        if not isinstance(times, (list, tuple)) or not times:
            raise ConfigError("run.times must be a nonempty list of times")
        times = [_as_float("run.times", t) for t in times]
        if any(t < 0 for t in times) or any(b < a for a, b in zip(times, times[1:])):
            raise ConfigError("run.times must be nonnegative and nondecreasing")
        run["times"] = times
    if "windows" in run:
        wins = run["windows"]
        if not isinstance(wins, (list, tuple)) or not wins:
            raise ConfigError("run.windows must be a nonempty list of [start, end] pairs")
        parsed = []
        for w in wins:
            if not isinstance(w, (list, tuple)) or len(w) != 2:
                raise ConfigError("run.windows entries must be [start, end] pairs")
            a, b = (_as_float("run.windows", v) for v in w)
            if a < 0 or b < a:
                raise ConfigError("run.windows entries must satisfy 0 <= start <= end")
            parsed.append((a, b))
        run["windows"] = parsed
    if "t_extra" in run:
        run["t_extra"] = _as_float("run.t_extra", run["t_extra"])
        if run["t_extra"] < 0:
            raise ConfigError("t_extra must be nonnegative")

    out_path = flat.get("output.path")
    out_format = flat.get("output.format")
    if out_format is not None and out_format not in ("csv", "json"):
        raise ConfigError(f"output.format must be csv or json, got {out_format!r}")

    return ExperimentConfig(
        spec=spec,
        kind=kind,
        dt=dt,
        t_max=t_max,
        paths=paths,
        seed=seed,
        burn_in=burn_in,
        run=run,
        out_path=out_path,
        out_format=out_format,
        defaults_applied=tuple(defaults),
        document={k: flat[k] for k in sorted(flat)},
    )


# ---------------------------------------------------------------------------
# serialization helpers
# ---------------------------------------------------------------------------


def _sanitize(obj):
    """Make a structure JSON-safe: numpy → python, non-finite → strings."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        if math.isnan(obj):
            return "nan"
        return "inf" if obj > 0 else "-inf"
    return obj


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_format_cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _emit(cfg: ExperimentConfig, text: str) -> None:
    if cfg.out_path:
        with open(cfg.out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _certificate_echo(cert: RateCertificate) -> dict:
    return {
        "lambda": cert.lam,
        "k": cert.k,
        "G": cert.slope_bound,
        "K": cert.K,
        "p": cert.p,
        "lambda_max": cert.lam_max,
        "a3_holds": cert.rate_positive,
        "notes": list(cert.notes),
    }


def _report(
    command: str,
    cfg: ExperimentConfig,
    started: float,
    certificate: dict | None = None,
    results=None,
    verdicts=None,
    jobs: int = 1,
) -> dict:
    return _sanitize(
        {
            "tool": "rjdlab",
            "version": __version__,
            "command": command,
            "config": cfg.document,
            "defaults_applied": list(cfg.defaults_applied),
            "certificate": certificate,
            "results": results,
            "verdicts": verdicts if verdicts is not None else [],
            "runtime": {"jobs": jobs},
            "wall_clock_seconds": time.perf_counter() - started,
        }
    )


def _verdict(check: str, measured: float, threshold: float, passed: bool) -> dict:
    return {
        "check": check,
        "pass": bool(passed),
        "measured": float(measured),
        "threshold": float(threshold),
    }


def _emit_report(cfg: ExperimentConfig, report: dict) -> None:
    _emit(cfg, json.dumps(report, indent=2) + "\n")


def _emit_table(cfg: ExperimentConfig, command: str, started: float, header, rows,
                certificate=None, extras=None, jobs: int = 1) -> None:
    if cfg.out_format == "json":
        results = {
            "columns": list(header),
            "rows": [dict(zip(header, [_sanitize(v) for v in row])) for row in rows],
        }
        if extras:
            results.update(_sanitize(extras))
        _emit_report(cfg, _report(command, cfg, started, certificate=certificate,
                                  results=results, jobs=jobs))
    else:
        _emit(cfg, _csv_text(header, rows))


def _require_spec(cfg: ExperimentConfig) -> ProcessSpec:
    if cfg.spec is None:
        raise ConfigError(
            "missing process specification: set process.preset or process.drift.* keys"
        )
    return cfg.spec


def _resolved_burn_in(cfg: ExperimentConfig, cert: RateCertificate) -> float:
    if cfg.burn_in == "auto":
        return engine.default_burn_in(cert)
    return float(cfg.burn_in)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_certificate(cfg: ExperimentConfig, jobs: int) -> int:
    started = time.perf_counter()
    spec = _require_spec(cfg)
    cert = make_certificate(spec, p=cfg.run.get("p", 1.0))
    report = _report("certificate", cfg, started, certificate=_certificate_echo(cert))
    _emit_report(cfg, report)
    return 0


def _cmd_simulate(cfg: ExperimentConfig, jobs: int) -> int:
    started = time.perf_counter()
    spec = _require_spec(cfg)
    x0 = cfg.run.get("x0", 0.0)
    stride = cfg.run.get("stride", 1)
    rows = []
    for p in range(cfg.paths):
        path = engine.simulate_path(spec, x0, cfg.t_max, cfg.dt, PathStreams(cfg.seed, p))
        for i in range(0, path.grid.size, stride):
            rows.append((p, path.grid[i], path.values[i], path.local_time[i]))
    _emit_table(cfg, "simulate", started, ("path_id", "t", "x", "ell"), rows, jobs=jobs)
    return 0


def _cmd_couple(cfg: ExperimentConfig, jobs: int) -> int:
    started = time.perf_counter()
    spec = _require_spec(cfg)
    x1 = cfg.run.get("x1", 0.0)
    x2 = cfg.run.get("x2", 1.0)
    stride = cfg.run.get("stride", 1)
    rows = []
    for p in range(cfg.paths):
        pair = coupling.simulate_coupled(spec, x1, x2, cfg.t_max, cfg.dt, PathStreams(cfg.seed, p))
        coal = pair.coalesced_from if pair.coalesced_from is not None else pair.grid.size
        for i in range(0, pair.grid.size, stride):
            rows.append((p, pair.grid[i], pair.lower[i], pair.upper[i], int(i >= coal)))
    _emit_table(
        cfg, "couple", started,
        ("path_id", "t", "x_lower", "x_upper", "coalesced"), rows, jobs=jobs,
    )
    return 0


def _curve_rows(curve: wasserstein.DecayCurve):
    bound2 = curve.bound2 if curve.bound2 is not None else np.full(curve.times.size, np.nan)
    return [
        (
            curve.times[i],
            curve.wp_coupling[i],
            curve.wp_coupling_stderr[i],
            curve.wp_marginal[i],
            curve.bound1[i],
            bound2[i],
            curve.n_paths,
        )
        for i in range(curve.times.size)
    ]


def _curve_extras(curve: wasserstein.DecayCurve) -> dict:
    extras = {"p": curve.p, "wp_marginal_stderr": curve.wp_marginal_stderr}
    if curve.bound1_stderr is not None:
        extras["bound_thm1_stderr"] = curve.bound1_stderr
    if curve.bound2_stderr is not None:
        extras["bound_thm2_stderr"] = curve.bound2_stderr
    return extras


def _cmd_decay(cfg: ExperimentConfig, jobs: int) -> int:
    started = time.perf_counter()
    spec = _require_spec(cfg)
    if "times" not in cfg.run:
        raise ConfigError("run.times is required for decay")
    cert = make_certificate(spec, p=cfg.run.get("p", 1.0))
    curve = wasserstein.decay_curve(
        spec, cert, cfg.run.get("x1", 0.0), cfg.run.get("x2", 1.0), cfg.run["times"],
        n_paths=cfg.paths, h=cfg.dt, seed=cfg.seed, jobs=jobs,
    )
    _emit_table(cfg, "decay", started, _CURVE_COLUMNS, _curve_rows(curve),
                certificate=_certificate_echo(cert), extras=_curve_extras(curve), jobs=jobs)
    return 0


def _cmd_path_decay(cfg: ExperimentConfig, jobs: int) -> int:
    started = time.perf_counter()
    spec = _require_spec(cfg)
    if "windows" not in cfg.run:
        raise ConfigError("run.windows is required for path-decay")
    cert = make_certificate(spec, p=cfg.run.get("p", 1.0))
    curve = wasserstein.path_decay_curve(
        spec, cert, cfg.run.get("x1", 0.0), cfg.run.get("x2", 1.0), cfg.run["windows"],
        n_paths=cfg.paths, h=cfg.dt, seed=cfg.seed, jobs=jobs,
    )
    _emit_table(cfg, "path-decay", started, _CURVE_COLUMNS, _curve_rows(curve),
                certificate=_certificate_echo(cert), extras=_curve_extras(curve), jobs=jobs)
    return 0


def _cmd_stationary(cfg: ExperimentConfig, jobs: int) -> int:
    started = time.perf_counter()
    spec = _require_spec(cfg)
    if "times" not in cfg.run:
        raise ConfigError("run.times is required for stationary")
    cert = make_certificate(spec, p=cfg.run.get("p", 1.0))
    burn_in = _resolved_burn_in(cfg, cert)
    curve, summary = wasserstein.stationary_gap(
        spec, cert, cfg.run.get("x", 0.0), cfg.run["times"], n_paths=cfg.paths,
        h=cfg.dt, seed=cfg.seed, burn_in=burn_in,
        t_extra=cfg.run.get("t_extra", 0.0), jobs=jobs,
    )
    extras = _curve_extras(curve)
    extras.update(
        {
            "burn_in": burn_in,
            "long_run_moment": summary.mean_V,
            "long_run_moment_stderr": summary.stderr_V,
        }
    )
    _emit_table(cfg, "stationary", started, _CURVE_COLUMNS, _curve_rows(curve),
                certificate=_certificate_echo(cert), extras=extras, jobs=jobs)
    return 0


def _bound_verdicts(curve: wasserstein.DecayCurve, which: str, slack: float = 1.1):
    """Bound-satisfaction verdicts for one decay curve, one per time point."""
    verdicts = []
    estimates = curve.wp_marginal if which == "marginal" else curve.wp_coupling
    for i, t in enumerate(np.asarray(curve.times)):
        measured = float(estimates[i])
        threshold = float(curve.bound1[i]) * slack
        verdicts.append(
            _verdict(f"wp_{which}(t={t:g}) within moment bound x{slack}", measured,
                     threshold, measured <= threshold)
        )
        if curve.bound2 is not None:
            threshold2 = float(curve.bound2[i]) * slack
            verdicts.append(
                _verdict(f"wp_{which}(t={t:g}) within contraction bound x{slack}",
                         measured, threshold2, measured <= threshold2)
            )
    return verdicts


def _invariant_verdicts(spec: ProcessSpec, cert, x1, x2, t_max, h, n_paths, seed, jobs):
    """Coupling-invariant verdicts: ordering, permanence, jumps, envelope."""
    ens = coupling.coupled_ensemble(spec, x1, x2, [t_max], h, seed, n_paths, jobs=jobs)
    verdicts = [
        _verdict("coupling ordering violations", float(np.sum(ens.min_gap < 0)), 0.0,
                 bool(np.all(ens.min_gap >= 0))),
        _verdict("coalescence resurrections", float(ens.gap_resurrections.sum()), 0.0,
                 int(ens.gap_resurrections.sum()) == 0),
        _verdict("jump events altering the gap", float(ens.jump_gap_mismatches.sum()),
                 0.0, int(ens.jump_gap_mismatches.sum()) == 0),
    ]
    violation = coupling.gap_envelope_violation(ens)
    verdicts.append(
        _verdict("gap envelope excess <= 5h", violation, 5.0 * h, violation <= 5.0 * h)
    )
    return verdicts


def _cmd_verify(cfg: ExperimentConfig, jobs: int) -> int:
    started = time.perf_counter()
    spec = _require_spec(cfg)
    p = cfg.run.get("p", 1.0)
    cert = make_certificate(spec, p=p)
    x1 = cfg.run.get("x1", 0.0)
    x2 = cfg.run.get("x2", 1.0)
    times = cfg.run.get("times", [1.0, 2.0, 4.0])
    verdicts = []
    results = {}

    verdicts.extend(
        _invariant_verdicts(spec, cert, x1, x2, max(times), cfg.dt, cfg.paths, cfg.seed, jobs)
    )
    if cert.rate_positive:
        curve = wasserstein.decay_curve(
            spec, cert, x1, x2, times, n_paths=cfg.paths, h=cfg.dt, seed=cfg.seed, jobs=jobs
        )
        results["decay"] = {
            "columns": list(_CURVE_COLUMNS),
            "rows": [dict(zip(_CURVE_COLUMNS, row)) for row in _curve_rows(curve)],
        }
        verdicts.extend(_bound_verdicts(curve, "marginal"))
        if curve.bound2 is not None:
            verdicts.extend(
                v for v in _bound_verdicts(curve, "coupling") if "contraction" in v["check"]
            )
        probe_t = max(1.0, min(times))
        mean, stderr = coupling.supermartingale_probe(
            spec, cert, x2, probe_t, cfg.paths, h=cfg.dt, seed=cfg.seed, jobs=jobs
        )
        threshold = math.exp(cert.lam * x2) + 3.0 * stderr
        verdicts.append(
            _verdict("decay functional within initial moment + 3 stderr", mean,
                     threshold, mean <= threshold)
        )
        results["supermartingale_probe"] = {"t": probe_t, "mean": mean, "stderr": stderr}
    else:
        verdicts.append(_verdict("certified decay rate positive", cert.k, 0.0, False))

    report = _report("verify", cfg, started, certificate=_certificate_echo(cert),
                     results=results, verdicts=verdicts, jobs=jobs)
    _emit_report(cfg, report)
    return 0 if all(v["pass"] for v in verdicts) else 1


# ---------------------------------------------------------------------------
# the worked-example verdict suite
# ---------------------------------------------------------------------------


def run_examples(seed: int = 0, paths: int = 10_000, h: float = 1e-3, jobs: int = 1) -> dict:
    """Run the built-in worked examples and return their verdict report.

    Five parts: the jump-benchmark certificate, the linear-pull certificate
    in closed form, the moment-route decay bound, the contraction-route decay
    bound, and the coupling invariant / decay-functional checks.
    """
    started = time.perf_counter()
    verdicts = []
    results = {}

    # (i) jump benchmark: drift -1, unit noise, Exp(2) jumps at unit rate
    jump_spec = model.exp_jump_diffusion()
    jump_cert = make_certificate(jump_spec)
    verdicts.append(
        _verdict("jump benchmark lambda* = 0.304 +- 0.005",
                 jump_cert.lam, 0.005, abs(jump_cert.lam - 0.304) <= 0.005)
    )
    verdicts.append(
        _verdict("jump benchmark k* = 0.0785 +- 0.001",
                 jump_cert.k, 0.001, abs(jump_cert.k - 0.0785) <= 0.001)
    )
    results["jump_benchmark_certificate"] = _certificate_echo(jump_cert)

    # (ii) linear pull (speed 1, depth 1, unit noise): closed-form optimum
    ou_spec = model.reflected_ou(1.0, 1.0, 1.0)
    ou_cert = make_certificate(ou_spec)
    verdicts.append(
        _verdict("linear pull lambda* = 1", ou_cert.lam, 1e-3, abs(ou_cert.lam - 1.0) <= 1e-3)
    )
    verdicts.append(
        _verdict("linear pull k* = 1/2", ou_cert.k, 1e-3, abs(ou_cert.k - 0.5) <= 1e-3)
    )
    verdicts.append(
        _verdict("linear pull K = 3/2", ou_cert.K, 1e-3, abs(ou_cert.K - 1.5) <= 1e-3)
    )
    verdicts.append(
        _verdict("linear pull p*K > k*", ou_cert.p * ou_cert.K, ou_cert.k,
                 ou_cert.p * ou_cert.K > ou_cert.k)
    )
    results["linear_pull_certificate"] = _certificate_echo(ou_cert)

    # (iii) moment-route bound on the drifted-RBM decay curve
    rbm_spec = model.drifted_rbm()
    rbm_cert = make_certificate(rbm_spec)
    rbm_curve = wasserstein.decay_curve(
        rbm_spec, rbm_cert, 0.0, 1.0, [2.0, 4.0, 6.0, 8.0],
        n_paths=paths, h=h, seed=seed, jobs=jobs,
    )
    verdicts.extend(_bound_verdicts(rbm_curve, "marginal"))
    results["rbm_decay"] = {
        "columns": list(_CURVE_COLUMNS),
        "rows": [dict(zip(_CURVE_COLUMNS, row)) for row in _curve_rows(rbm_curve)],
    }

    # (iv) contraction-route bound on the linear-pull decay curve
    ou_curve = wasserstein.decay_curve(
        ou_spec, ou_cert, 0.0, 1.0, [0.5, 1.0, 2.0],
        n_paths=paths, h=h, seed=seed, jobs=jobs,
    )
    verdicts.extend(
        v for v in _bound_verdicts(ou_curve, "coupling") if "contraction" in v["check"]
    )
    results["linear_pull_decay"] = {
        "columns": list(_CURVE_COLUMNS),
        "rows": [dict(zip(_CURVE_COLUMNS, row)) for row in _curve_rows(ou_curve)],
    }

    # (v) coupling invariants (gap envelope included) and the decay functional
    verdicts.extend(
        _invariant_verdicts(ou_spec, ou_cert, 0.0, 1.0, 5.0, h, paths, seed, jobs)
    )
    for name, probe_spec, probe_cert in (
        ("drifted rbm", rbm_spec, rbm_cert),
        ("jump benchmark", jump_spec, jump_cert),
    ):
        mean, stderr = coupling.supermartingale_probe(
            probe_spec, probe_cert, 1.0, 5.0, paths, h=h, seed=seed, jobs=jobs
        )
        threshold = math.exp(probe_cert.lam) + 3.0 * stderr
        verdicts.append(
            _verdict(f"{name} decay functional within initial moment + 3 stderr",
                     mean, threshold, mean <= threshold)
        )

    return {
        "tool": "rjdlab",
        "version": __version__,
        "command": "examples",
        "config": {"numerics.dt": h, "numerics.paths": paths, "numerics.seed": seed},
        "defaults_applied": [],
        "certificate": None,
        "results": _sanitize(results),
        "verdicts": verdicts,
        "runtime": {"jobs": jobs},
        "wall_clock_seconds": time.perf_counter() - started,
    }


def _cmd_examples(cfg: ExperimentConfig, jobs: int) -> int:
    report = run_examples(seed=cfg.seed, paths=cfg.paths, h=cfg.dt, jobs=jobs)
    report["config"] = cfg.document or report["config"]
    report["defaults_applied"] = list(cfg.defaults_applied)
    _emit_report(cfg, _sanitize(report))
    return 0 if all(v["pass"] for v in report["verdicts"]) else 1


_COMMANDS = {
    "certificate": _cmd_certificate,
    "simulate": _cmd_simulate,
    "couple": _cmd_couple,
    "decay": _cmd_decay,
    "path-decay": _cmd_path_decay,
    "stationary": _cmd_stationary,
    "verify": _cmd_verify,
    "examples": _cmd_examples,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _parse_times(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"could not parse times {text!r}: comma-separated numbers") from exc


def _parse_windows(text: str):
    windows = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        pieces = part.split(":")
        if len(pieces) != 2:
            raise ConfigError(f"could not parse window {part!r}: use start:end")
        try:
            windows.append([float(pieces[0]), float(pieces[1])])
        except ValueError as exc:
            raise ConfigError(f"could not parse window {part!r}") from exc
    if not windows:
        raise ConfigError("no windows given")
    return windows


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rjdlab",
        description="Simulation laboratory for reflected jump-diffusions with decay-rate certificates.",
    )
    parser.add_argument("--version", action="version", version=f"rjdlab {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config document")
    common.add_argument("--preset", help="named process: " + ", ".join(sorted(_PRESETS)))
    common.add_argument("--seed", type=int, help="base seed for all substreams")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--dt", type=float, help="time step")
    common.add_argument("--paths", type=int, help="number of paths")

    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("certificate", parents=[common], help="decay-rate certificate")
    sp.add_argument("--p", type=float, help="distance order (>= 1)")

    sp = sub.add_parser("simulate", parents=[common], help="dump recorded paths")
    sp.add_argument("--x0", type=float, help="initial state")
    sp.add_argument("--t-max", type=float, dest="t_max", help="horizon")
    sp.add_argument("--stride", type=int, help="record every n-th grid point")

    sp = sub.add_parser("couple", parents=[common], help="dump coupled pairs")
    sp.add_argument("--x1", type=float, help="lower initial state")
    sp.add_argument("--x2", type=float, help="upper initial state")
    sp.add_argument("--t-max", type=float, dest="t_max", help="horizon")
    sp.add_argument("--stride", type=int, help="record every n-th grid point")

    sp = sub.add_parser("decay", parents=[common], help="distance-decay curve vs bounds")
    sp.add_argument("--x1", type=float, help="lower initial state")
    sp.add_argument("--x2", type=float, help="upper initial state")
    sp.add_argument("--times", help="comma-separated snapshot times")
    sp.add_argument("--p", type=float, help="distance order (>= 1)")

    sp = sub.add_parser("path-decay", parents=[common], help="window-sup decay curve")
    sp.add_argument("--x1", type=float, help="lower initial state")
    sp.add_argument("--x2", type=float, help="upper initial state")
    sp.add_argument("--windows", help="comma-separated start:end windows")
    sp.add_argument("--p", type=float, help="distance order (>= 1)")

    sp = sub.add_parser("stationary", parents=[common], help="distance to the long-run law")
    sp.add_argument("--x", type=float, help="initial state")
    sp.add_argument("--times", help="comma-separated snapshot times")
    sp.add_argument("--burn-in", dest="burn_in", help="burn-in horizon or 'auto'")
    sp.add_argument("--p", type=float, help="distance order (>= 1)")

    sp = sub.add_parser("verify", parents=[common], help="bound and invariant verdicts")
    sp.add_argument("--x1", type=float, help="lower initial state")
    sp.add_argument("--x2", type=float, help="upper initial state")
    sp.add_argument("--times", help="comma-separated snapshot times")
    sp.add_argument("--p", type=float, help="distance order (>= 1)")

    sub.add_parser("examples", parents=[common], help="built-in worked-example verdicts")

    return parser


def _overrides_from_args(args: argparse.Namespace) -> dict:
    """Dotted-key overrides from flags; flags beat the config file."""
    mapping = {
        "preset": "process.preset",
        "seed": "numerics.seed",
        "dt": "numerics.dt",
        "paths": "numerics.paths",
        "t_max": "numerics.t_max",
        "out": "output.path",
        "format": "output.format",
        "p": "run.p",
        "x0": "run.x0",
        "x": "run.x",
        "x1": "run.x1",
        "x2": "run.x2",
        "stride": "run.stride",
    }
    overrides = {}
    for attr, key in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    times = getattr(args, "times", None)
    if times is not None:
        overrides["run.times"] = _parse_times(times)
    windows = getattr(args, "windows", None)
    if windows is not None:
        overrides["run.windows"] = _parse_windows(windows)
    burn = getattr(args, "burn_in", None)
    if burn is not None:
        if burn != "auto":
            try:
                burn = float(burn)
            except ValueError as exc:
                raise ConfigError("burn-in must be a number or 'auto'") from exc
        overrides["numerics.burn_in"] = burn
    return overrides


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        document = {}
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    document = json.load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config {args.config!r} is not valid JSON: {exc}") from exc
        flat = _flatten(document)
        flat.update(_overrides_from_args(args))
        flat["run.kind"] = args.command
        cfg = parse_config(flat)
        if args.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        return _COMMANDS[args.command](cfg, args.jobs)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
