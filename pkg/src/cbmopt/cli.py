"""Command line surface: config ingestion, dispatch, and report emission.

The CLI is a pure shell over the library. Every number in a report is the
corresponding library result, serialized at 12 significant digits; curve
files carry full-precision values. Reports are deterministic given the
config and seed, up to the wall-clock duration field.

Exit codes: 0 success, 2 config or validation error, 3 computation error
(truncation, tail, or horizon caps, failed quadrature, failed starts),
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import (
    AllStartsFailedError,
    CbmError,
    ConfigError,
    DomainError,
    HorizonCapError,
    IntegrationError,
    TailCapError,
    TruncationCapError,
)
from .failure_model import ComponentParams, SystemModel, TruncationConfig
from .maintenance_policy import (
    CostParams,
    Policy,
    SeriesTailConfig,
    cost_rate,
    validate_policy,
)
from .optimizer import OptimizerConfig, optimize_fixed_tau, optimize_policy
from .simulator import (
    SimulationConfig,
    empirical_first_passage_cdf,
    estimate_from_outcomes,
    simulate_many,
)
from .system_reliability import series_survival_over_times

__all__ = [
    "RunConfig",
    "parse_config",
    "cmd_reliability",
    "cmd_evaluate",
    "cmd_optimize",
    "cmd_simulate",
    "main",
]

_COMPONENT_FIELDS = {
    "name": str,
    "h1": float,
    "d": float,
    "alpha": float,
    "beta": float,
    "y_alpha": float,
    "y_beta": float,
    "w_mu": float,
    "w_sigma": float,
}


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run configuration with all defaults resolved."""

    system: SystemModel
    costs: CostParams
    policy: Policy | None
    optimizer: OptimizerConfig
    simulation: SimulationConfig
    truncation: TruncationConfig
    tail: SeriesTailConfig


def _check_keys(obj: dict, path: str, required: set[str], optional: set[str] = frozenset()):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path} must be an object")
    unknown = set(obj) - required - set(optional)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"{path}: missing keys {sorted(missing)}")


def _number(obj: dict, path: str, key: str, default=None):
    if key not in obj:
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key} must be a number, got {value!r}")
    return float(value)


def _integer(obj: dict, path: str, key: str, default=None):
    if key not in obj:
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}.{key} must be an integer, got {value!r}")
    return value


def _build_component(obj: dict, path: str) -> ComponentParams:
    _check_keys(obj, path, set(_COMPONENT_FIELDS) - {"name"}, {"name"})
    kwargs = {"name": obj.get("name", path.rsplit("[", 1)[-1].rstrip("]"))}
    if not isinstance(kwargs["name"], str):
        raise ConfigError(f"{path}.name must be a string")
    for field in _COMPONENT_FIELDS:
        if field == "name":
            continue
        kwargs[field] = _number(obj, path, field)
    try:
        return ComponentParams(**kwargs)
    except DomainError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _build_system(obj: dict) -> SystemModel:
    _check_keys(obj, "system", {"lambda", "components"})
    raw = obj["components"]
    if not isinstance(raw, list) or not raw:
        raise ConfigError("system.components must be a non-empty list")
    components = tuple(
        _build_component(item, f"system.components[{i}]") for i, item in enumerate(raw)
    )
    try:
        return SystemModel(components=components, lam=_number(obj, "system", "lambda"))
    except DomainError as exc:
        raise ConfigError(f"system: {exc}") from exc


def _build_policy(obj: dict, system: SystemModel) -> Policy:
    _check_keys(obj, "policy", {"tau", "h2"})
    h2 = obj["h2"]
    if not isinstance(h2, list):
        raise ConfigError("policy.h2 must be a list of numbers")
    values = []
    for i, v in enumerate(h2):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"policy.h2[{i}] must be a number")
        values.append(float(v))
    try:
        policy = Policy(tau=_number(obj, "policy", "tau"), h2=tuple(values))
    except DomainError as exc:
        raise ConfigError(f"policy.tau: {exc}") from exc
    if len(values) != system.n:
        raise ConfigError(
            f"policy.h2 has {len(values)} entries for {system.n} components"
        )
    for i, (v, c) in enumerate(zip(values, system.components)):
        if v > c.h1:
            raise ConfigError(f"policy.h2[{i}] > system.components[{i}].h1")
        if v < 0.0:
            raise ConfigError(f"policy.h2[{i}] must be >= 0")
    return policy


def _build_optimizer(obj: dict) -> OptimizerConfig:
    _check_keys(
        obj, "optimizer", set(),
        {"multistart_count", "max_iterations", "x_tol", "f_tol", "tau_bounds", "seed"},
    )
    defaults = OptimizerConfig()
    bounds = defaults.tau_bounds
    if "tau_bounds" in obj:
        raw = obj["tau_bounds"]
        if not isinstance(raw, list) or len(raw) != 2:
            raise ConfigError("optimizer.tau_bounds must be a [low, high] pair")
        bounds = (float(raw[0]), float(raw[1]))
    try:
        return OptimizerConfig(
            multistart_count=_integer(obj, "optimizer", "multistart_count", defaults.multistart_count),
            max_iterations=_integer(obj, "optimizer", "max_iterations", defaults.max_iterations),
            x_tol=_number(obj, "optimizer", "x_tol", defaults.x_tol),
            f_tol=_number(obj, "optimizer", "f_tol", defaults.f_tol),
            tau_bounds=bounds,
            seed=_integer(obj, "optimizer", "seed", defaults.seed),
        )
    except DomainError as exc:
        raise ConfigError(f"optimizer: {exc}") from exc


def _build_simulation(obj: dict) -> SimulationConfig:
    _check_keys(obj, "simulation", set(), {"replications", "seed", "sub_step", "horizon_cap"})
    defaults = SimulationConfig()
    try:
        return SimulationConfig(
            replications=_integer(obj, "simulation", "replications", defaults.replications),
            seed=_integer(obj, "simulation", "seed", defaults.seed),
            sub_step=_number(obj, "simulation", "sub_step", None),
            horizon_cap=_integer(obj, "simulation", "horizon_cap", defaults.horizon_cap),
        )
    except DomainError as exc:
        raise ConfigError(f"simulation: {exc}") from exc


def _build_truncation(obj: dict) -> TruncationConfig:
    _check_keys(obj, "truncation", set(), {"poisson_tail_eps", "m_max_cap"})
    defaults = TruncationConfig()
    try:
        return TruncationConfig(
            poisson_tail_eps=_number(obj, "truncation", "poisson_tail_eps", defaults.poisson_tail_eps),
            m_max_cap=_integer(obj, "truncation", "m_max_cap", defaults.m_max_cap),
        )
    except DomainError as exc:
        raise ConfigError(f"truncation: {exc}") from exc


def _build_tail(obj: dict) -> SeriesTailConfig:
    _check_keys(obj, "tail", set(), {"k_tail_eps", "k_max_cap"})
    defaults = SeriesTailConfig()
    try:
        return SeriesTailConfig(
            k_tail_eps=_number(obj, "tail", "k_tail_eps", defaults.k_tail_eps),
            k_max_cap=_integer(obj, "tail", "k_max_cap", defaults.k_max_cap),
        )
    except DomainError as exc:
        raise ConfigError(f"tail: {exc}") from exc


def parse_config(path: str) -> RunConfig:
    """Load and validate a JSON run configuration."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    _check_keys(
        raw, "config", {"system", "costs"},
        {"policy", "optimizer", "simulation", "truncation", "tail"},
    )
    system = _build_system(raw["system"])
    costs_obj = raw["costs"]
    _check_keys(costs_obj, "costs", {"c_i", "c_rho", "c_r"})
    try:
        costs = CostParams(
            c_i=_number(costs_obj, "costs", "c_i"),
            c_rho=_number(costs_obj, "costs", "c_rho"),
            c_r=_number(costs_obj, "costs", "c_r"),
        )
    except DomainError as exc:
        raise ConfigError(f"costs: {exc}") from exc
    return RunConfig(
        system=system,
        costs=costs,
        policy=_build_policy(raw["policy"], system) if "policy" in raw else None,
        optimizer=_build_optimizer(raw.get("optimizer", {})),
        simulation=_build_simulation(raw.get("simulation", {})),
        truncation=_build_truncation(raw.get("truncation", {})),
        tail=_build_tail(raw.get("tail", {})),
    )


def _round12(value):
    """Serialize floats at 12 significant digits, keeping them JSON-safe."""
    if isinstance(value, dict):
        return {k: _round12(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round12(v) for v in value]
    if isinstance(value, bool):
        return value
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(f"{v:.12g}")
    if isinstance(value, (np.integer,)):
        return int(value)
    return value


def _echo_config(config: RunConfig) -> dict:
    return {
        "system": {
            "lambda": config.system.lam,
            "components": [
                {
                    "name": c.name, "h1": c.h1, "d": c.d, "alpha": c.alpha,
                    "beta": c.beta, "y_alpha": c.y_alpha, "y_beta": c.y_beta,
                    "w_mu": c.w_mu, "w_sigma": c.w_sigma,
                }
                for c in config.system.components
            ],
        },
        "costs": {"c_i": config.costs.c_i, "c_rho": config.costs.c_rho, "c_r": config.costs.c_r},
        "policy": (
            {"tau": config.policy.tau, "h2": list(config.policy.h2)}
            if config.policy
            else None
        ),
        "optimizer": {
            "multistart_count": config.optimizer.multistart_count,
            "max_iterations": config.optimizer.max_iterations,
            "x_tol": config.optimizer.x_tol,
            "f_tol": config.optimizer.f_tol,
            "tau_bounds": list(config.optimizer.tau_bounds),
            "seed": config.optimizer.seed,
        },
        "simulation": {
            "replications": config.simulation.replications,
            "seed": config.simulation.seed,
            "sub_step": config.simulation.sub_step,
            "horizon_cap": config.simulation.horizon_cap,
        },
        "truncation": {
            "poisson_tail_eps": config.truncation.poisson_tail_eps,
            "m_max_cap": config.truncation.m_max_cap,
        },
        "tail": {
            "k_tail_eps": config.tail.k_tail_eps,
            "k_max_cap": config.tail.k_max_cap,
        },
    }


def _report(command: str, config: RunConfig, outputs: dict, warnings: list[str], started: float, threads: int) -> dict:
    return {
        "command": command,
        "config": _echo_config(config),
        "outputs": outputs,
        "warnings": warnings,
        "version": __version__,
        "threads": threads,
        "duration_seconds": time.time() - started,
    }


def _breakdown_dict(breakdown) -> dict:
    return {
        "e_ni": breakdown.e_ni,
        "e_rho": breakdown.e_rho,
        "e_k": breakdown.e_k,
        "e_tc": breakdown.e_tc,
        "cr": breakdown.cr,
    }


def _estimate_dict(estimate) -> dict:
    return {
        "mean_cr": estimate.mean_cr,
        "stderr_cr": estimate.stderr_cr,
        "mean_inspections": estimate.mean_breakdown.inspections,
        "mean_downtime": estimate.mean_breakdown.downtime,
        "mean_cycle_length": estimate.mean_breakdown.cycle_length,
        "mean_total_cost": estimate.mean_breakdown.total_cost,
        "preventive_fraction": estimate.preventive_fraction,
    }


def _write_csv(path: str, header: list[str], columns: list[list[float]]):
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(repr(float(v)) for v in row))
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def _curve_path(out_path: str, suffix: str = "") -> str:
    stem, _ = os.path.splitext(out_path)
    return f"{stem}{suffix}.csv"


def cmd_reliability(config: RunConfig, t_max: float, steps: int, out_path: str, threads: int = 1) -> dict:
    """System survival and first-passage CDFs on an even time grid."""
    started = time.time()
    if not (t_max > 0.0):
        raise ConfigError(f"t-max must be positive, got {t_max}")
    if steps < 2:
        raise ConfigError(f"steps must be at least 2, got {steps}")
    grid = np.linspace(0.0, t_max, steps)
    h1 = config.system.h1_vector
    survival = series_survival_over_times(config.system, grid, h1, config.truncation)
    failure = 1.0 - survival
    header = ["t", "reliability", "failure_cdf"]
    columns = [grid.tolist(), survival.tolist(), failure.tolist()]
    outputs = {
        "t": grid.tolist(),
        "reliability": survival.tolist(),
        "failure_cdf": failure.tolist(),
    }
    if config.policy is not None:
        detection = 1.0 - series_survival_over_times(
            config.system, grid, config.policy.h2, config.truncation
        )
        header.append("detection_cdf")
        columns.append(detection.tolist())
        outputs["detection_cdf"] = detection.tolist()
    _write_csv(_curve_path(out_path), header, columns)
    outputs["curve_csv"] = _curve_path(out_path)
    return _report("reliability", config, outputs, [], started, threads)


def cmd_evaluate(config: RunConfig, threads: int = 1) -> dict:
    """Cost breakdown for the configured policy, with an optional Monte
    Carlo cross-check when a simulation section is present."""
    started = time.time()
    if config.policy is None:
        raise ConfigError("evaluate requires a policy section in the config")
    validate_policy(config.system, config.policy)
    breakdown = cost_rate(
        config.system, config.policy, config.costs, config.truncation, config.tail
    )
    outputs = {"breakdown": _breakdown_dict(breakdown)}
    warnings = []
    if config.simulation.replications > 1:
        outcomes = simulate_many(config.system, config.policy, config.simulation)
        estimate = estimate_from_outcomes(outcomes, config.costs)
        downtimes = np.array([o.downtime for o in outcomes])
        downtime_stderr = float(downtimes.std(ddof=1) / math.sqrt(downtimes.size))
        outputs["simulation"] = _estimate_dict(estimate)
        outputs["cr_gap"] = breakdown.cr - estimate.mean_cr
        outputs["downtime_gap"] = breakdown.e_rho - estimate.mean_breakdown.downtime
        outputs["downtime_gap_stderr"] = downtime_stderr
        if abs(outputs["cr_gap"]) > 3.0 * estimate.stderr_cr:
            warnings.append(
                f"analytic cost rate differs from simulation by {outputs['cr_gap']:.6g} "
                f"(> 3 stderr = {3.0 * estimate.stderr_cr:.6g})"
            )
        if abs(outputs["downtime_gap"]) > 3.0 * downtime_stderr:
            warnings.append(
                "closed-form downtime differs from the path-wise mean by "
                f"{outputs['downtime_gap']:.6g} (> 3 stderr = {3.0 * downtime_stderr:.6g}); "
                "the closed form weights each interval twice by design, see README"
            )
    return _report("evaluate", config, outputs, warnings, started, threads)


def cmd_optimize(
    config: RunConfig,
    fixed_tau: float | None = None,
    multistart: int | None = None,
    seed: int | None = None,
    out_path: str | None = None,
    threads: int = 1,
) -> dict:
    """Minimize the cost rate over the policy variables."""
    started = time.time()
    opt = config.optimizer
    if multistart is not None or seed is not None:
        opt = OptimizerConfig(
            multistart_count=multistart if multistart is not None else opt.multistart_count,
            max_iterations=opt.max_iterations,
            x_tol=opt.x_tol,
            f_tol=opt.f_tol,
            tau_bounds=opt.tau_bounds,
            seed=seed if seed is not None else opt.seed,
        )
    if fixed_tau is not None:
        result = optimize_fixed_tau(
            config.system, config.costs, fixed_tau, opt, config.truncation, config.tail
        )
    else:
        result = optimize_policy(
            config.system, config.costs, opt, config.truncation, config.tail
        )
    outputs = {
        "best_policy": {
            "tau": result.best_policy.tau,
            "h2": list(result.best_policy.h2),
        },
        "best_breakdown": _breakdown_dict(result.best_breakdown),
        "iterations_used": result.iterations_used,
        "starts_converged": result.starts_converged,
        "trace_length": len(result.trace),
    }
    if out_path:
        trace_path = _curve_path(out_path, "_trace")
        header = ["iteration", "tau"] + [
            f"h2_{i}" for i in range(config.system.n)
        ] + ["cr"]
        rows = list(
            zip(
                *[
                    [float(i) for i in range(len(result.trace))],
                    [p.tau for p, _ in result.trace],
                    *[[p.h2[i] for p, _ in result.trace] for i in range(config.system.n)],
                    [v for _, v in result.trace],
                ]
            )
        )
        _write_csv(trace_path, header, [list(col) for col in zip(*rows)] if rows else [[] for _ in header])
        outputs["trace_csv"] = trace_path
    return _report("optimize", config, outputs, [], started, threads)


def cmd_simulate(
    config: RunConfig,
    reps: int | None = None,
    fpt_t_max: float | None = None,
    fpt_steps: int = 101,
    out_path: str | None = None,
    threads: int = 1,
) -> dict:
    """Monte Carlo estimate of the configured policy's cost rate."""
    started = time.time()
    if config.policy is None:
        raise ConfigError("simulate requires a policy section in the config")
    validate_policy(config.system, config.policy)
    sim = config.simulation
    if reps is not None:
        sim = SimulationConfig(
            replications=reps, seed=sim.seed, sub_step=sim.sub_step,
            horizon_cap=sim.horizon_cap,
        )
    outcomes = simulate_many(config.system, config.policy, sim)
    estimate = estimate_from_outcomes(outcomes, config.costs)
    warnings = []
    if sim.replications == 1:
        warnings.append("single replication: stderr is undefined")
    outputs = {"simulation": _estimate_dict(estimate), "replications": sim.replications}
    if fpt_t_max is not None:
        grid = np.linspace(0.0, fpt_t_max, fpt_steps)
        curve = empirical_first_passage_cdf(
            config.system, config.system.h1_vector, sim, grid
        )
        outputs["first_passage"] = {
            "t": [t for t, _ in curve],
            "empirical_cdf": [v for _, v in curve],
        }
        if out_path:
            fpt_path = _curve_path(out_path, "_fpt")
            _write_csv(
                fpt_path,
                ["t", "empirical_cdf"],
                [[t for t, _ in curve], [v for _, v in curve]],
            )
            outputs["first_passage_csv"] = fpt_path
    return _report("simulate", config, outputs, warnings, started, threads)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cbmopt",
        description="Condition-based maintenance analysis for degrading series systems",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=False):
        p.add_argument("--config", required=True, help="path to a JSON run configuration")
        p.add_argument("--out", required=out_required, help="path for the JSON report")
        p.add_argument("--seed", type=int, default=None, help="override configured seeds")
        p.add_argument(
            "--threads", type=int, default=os.cpu_count() or 1,
            help="parallelism hint recorded in the report; evaluation is single-threaded",
        )

    rel = sub.add_parser("reliability", help="survival and first-passage curves")
    common(rel, out_required=True)
    rel.add_argument("--t-max", type=float, required=True)
    rel.add_argument("--steps", type=int, default=101)

    ev = sub.add_parser("evaluate", help="cost rate of the configured policy")
    common(ev)

    opt = sub.add_parser("optimize", help="optimize the inspection policy")
    common(opt)
    opt.add_argument("--fixed-tau", type=float, default=None)
    opt.add_argument("--multistart", type=int, default=None)

    sim = sub.add_parser("simulate", help="Monte Carlo policy estimate")
    common(sim)
    sim.add_argument("--reps", type=int, default=None)
    sim.add_argument("--fpt-t-max", type=float, default=None)
    sim.add_argument("--fpt-steps", type=int, default=101)
    return parser


def _apply_seed_override(config: RunConfig, seed: int | None) -> RunConfig:
    if seed is None:
        return config
    opt = config.optimizer
    sim = config.simulation
    return RunConfig(
        system=config.system,
        costs=config.costs,
        policy=config.policy,
        optimizer=OptimizerConfig(
            multistart_count=opt.multistart_count, max_iterations=opt.max_iterations,
            x_tol=opt.x_tol, f_tol=opt.f_tol, tau_bounds=opt.tau_bounds, seed=seed,
        ),
        simulation=SimulationConfig(
            replications=sim.replications, seed=seed, sub_step=sim.sub_step,
            horizon_cap=sim.horizon_cap,
        ),
        truncation=config.truncation,
        tail=config.tail,
    )


def _emit(report: dict, out_path: str | None):
    text = json.dumps(_round12(report), indent=2)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _apply_seed_override(parse_config(args.config), args.seed)
        if args.command == "reliability":
            report = cmd_reliability(config, args.t_max, args.steps, args.out, args.threads)
        elif args.command == "evaluate":
            report = cmd_evaluate(config, args.threads)
        elif args.command == "optimize":
            report = cmd_optimize(
                config, args.fixed_tau, args.multistart, args.seed, args.out, args.threads
            )
        else:
            report = cmd_simulate(
                config, args.reps, args.fpt_t_max, args.fpt_steps, args.out, args.threads
            )
        _emit(report, args.out)
        return 0
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (
        TruncationCapError, TailCapError, HorizonCapError,
        IntegrationError, AllStartsFailedError,
    ) as exc:
        print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except CbmError as exc:
        print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
