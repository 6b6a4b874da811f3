"""Batch front-end: config parsing, verification runs and artifact emission.

Configuration is TOML with four flat sections::

    [scenario]
    name = "dumbbell"
    neck = 0.5
    w = 0.4
    grid_n = 256

    [flow]
    cfl_factor = 0.2
    t_end = 0.2

    [verify]
    checks = ["area_law", "monotonicity"]
    seed = 0

    [output]
    dir = "out"
    figures = true
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import tomli
import tomli_w

from . import __version__
from .flow import FlowError, FlowState, StepControl, area_law_check, evolve
from .identities import (
    CSV_COLUMNS,
    FlowTrace,
    ResidualReport,
    convergence_order,
    monotonicity_check,
    random_identity_trials,
    residual_12a,
    residual_12b_report,
    residual_heat_9,
)
from .scenarios import FAMILIES, ScenarioSpec, build_profile, detect_stationarity
from .surface import MIN_INTERVALS, validate_profile

ARTIFACT_VERSION = "1"
ENV_OUT = "CHEEGER_FLOW_OUT"
DEFAULT_OUT = "cheeger_flow_out"

VERIFICATIONS = (
    "area_law",
    "residual_12a",
    "residual_12b",
    "residual_heat_9",
    "identities_13",
    "monotonicity",
    "papasoglu",
    "stationarity",
    "convergence",
)

AREA_LAW_TOL = 1e-6
RESIDUAL_TOL_256 = 5e-3
IDENTITY_TOL = 1e-12
MONOTONICITY_TOL = 1e-6
STATIONARITY_TOL = 0.1
MIN_ORDER = 1.7


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioSpec
    outputs: str | None = None
    emit_csv: bool = True
    emit_json: bool = True
    emit_figures: bool = True
    verify: tuple[str, ...] = VERIFICATIONS
    seed: int = 0


# -- parsing ---------------------------------------------------------------

_FLOW_KEYS: dict[str, tuple[float, float, bool]] = {
    # key: (low, high, low inclusive)
    "cfl_factor": (0.0, 0.5, False),
    "t_end": (0.0, math.inf, False),
    "dt_min": (0.0, math.inf, False),
    "dt_max": (0.0, math.inf, False),
    "min_area": (0.0, math.inf, False),
    "max_curvature": (0.0, math.inf, False),
}
_OUTPUT_KEYS = {"dir": str, "csv": bool, "json": bool, "figures": bool}
_VERIFY_KEYS = {"checks", "seed"}


def _number(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {type(value).__name__}")
    return float(value)


def _in_range(key: str, value: float, low: float, high: float, low_inclusive: bool) -> float:
    ok = (value >= low if low_inclusive else value > low) and value <= high
    if not ok:
        lb = "[" if low_inclusive else "("
        raise ConfigError(f"{key}: {value!r} outside accepted range {lb}{low:g}, {high:g}]")
    return value


def _parse_scenario(sec: dict) -> tuple[str, dict[str, float], int]:
    if "name" not in sec:
        raise ConfigError("scenario.name: required; one of " + ", ".join(sorted(FAMILIES)))
    name = sec["name"]
    if name not in FAMILIES:
        raise ConfigError(f"scenario.name: {name!r} not one of {sorted(FAMILIES)}")
    fam = FAMILIES[name]
    grid_n = sec.get("grid_n", 256)
    if isinstance(grid_n, bool) or not isinstance(grid_n, int):
        raise ConfigError("scenario.grid_n: expected an integer")
    if grid_n < MIN_INTERVALS:
        raise ConfigError(f"scenario.grid_n: {grid_n} outside accepted range [{MIN_INTERVALS}, inf) (grid too coarse)")
    params = {}
    for key, value in sec.items():
        if key in ("name", "grid_n"):
            continue
        if key not in fam.ranges:
            raise ConfigError(
                f"scenario.{key}: unknown key for {name!r}; accepted: name, grid_n, {', '.join(fam.ranges)}"
            )
        params[key] = _number(f"scenario.{key}", value)
    try:
        profile = build_profile(name, params, grid_n)
    except ValueError as err:
        raise ConfigError(f"scenario.{err}") from None
    _check_resolved(profile)
    return name, params, grid_n


def _check_resolved(profile) -> None:
    violations = validate_profile(profile)
    if violations:
        n = profile.grid.n_intervals
        raise ConfigError(f"scenario.grid_n: {n} does not resolve the profile ({violations[0]}); use a finer grid")


def _parse_flow(sec: dict) -> StepControl:
    kwargs = {}
    for key, value in sec.items():
        if key not in _FLOW_KEYS:
            raise ConfigError(f"flow.{key}: unknown key; accepted: {', '.join(_FLOW_KEYS)}")
        low, high, inc = _FLOW_KEYS[key]
        kwargs[key] = _in_range(f"flow.{key}", _number(f"flow.{key}", value), low, high, inc)
    try:
        return StepControl(**kwargs)
    except ValueError as err:
        raise ConfigError(f"flow: {err}") from None


def parse_verify_list(names: list[str] | str) -> tuple[str, ...]:
    if isinstance(names, str):
        names = [s.strip() for s in names.split(",") if s.strip()]
    if names == ["all"]:
        return VERIFICATIONS
    unknown = [n for n in names if n not in VERIFICATIONS]
    if unknown:
        raise ConfigError(f"verify.checks: unknown {unknown}; accepted: {', '.join(VERIFICATIONS)}")
    # registry order, duplicates dropped
    return tuple(v for v in VERIFICATIONS if v in names)


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a TOML run configuration."""
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as err:
        raise ConfigError(f"malformed config: {err}") from None
    unknown = set(doc) - {"scenario", "flow", "verify", "output"}
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown section; accepted: scenario, flow, verify, output")
    for name, sec in doc.items():
        if not isinstance(sec, dict):
            raise ConfigError(f"{name}: expected a section")

    name, params, grid_n = _parse_scenario(doc.get("scenario", {}))
    control = _parse_flow(doc.get("flow", {}))

    ver = doc.get("verify", {})
    for key in ver:
        if key not in _VERIFY_KEYS:
            raise ConfigError(f"verify.{key}: unknown key; accepted: checks, seed")
    checks = ver.get("checks", list(VERIFICATIONS))
    if not isinstance(checks, list) or not all(isinstance(c, str) for c in checks):
        raise ConfigError("verify.checks: expected a list of names")
    seed = ver.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("verify.seed: expected an integer")

    out = doc.get("output", {})
    for key, value in out.items():
        if key not in _OUTPUT_KEYS:
            raise ConfigError(f"output.{key}: unknown key; accepted: {', '.join(_OUTPUT_KEYS)}")
        if not isinstance(value, _OUTPUT_KEYS[key]):
            raise ConfigError(f"output.{key}: expected {_OUTPUT_KEYS[key].__name__}")

    return RunConfig(
        scenario=ScenarioSpec(name, params, grid_n, control),
        outputs=out.get("dir"),
        emit_csv=out.get("csv", True),
        emit_json=out.get("json", True),
        emit_figures=out.get("figures", True),
        verify=parse_verify_list(checks),
        seed=seed,
    )


def config_to_dict(cfg: RunConfig) -> dict:
    sc = cfg.scenario
    flow = {k: v for k, v in asdict(sc.step_control).items() if v is not None}
    output: dict[str, Any] = {"csv": cfg.emit_csv, "json": cfg.emit_json, "figures": cfg.emit_figures}
    if cfg.outputs is not None:
        output["dir"] = str(cfg.outputs)
    return {
        "scenario": {"name": sc.name, "grid_n": sc.grid_n, **dict(sorted(sc.parameters.items()))},
        "flow": flow,
        "verify": {"checks": list(cfg.verify), "seed": cfg.seed},
        "output": output,
    }


def dump_config(cfg: RunConfig) -> str:
    return tomli_w.dumps(config_to_dict(cfg))


# -- verifications ---------------------------------------------------------


@dataclass
class Outcome:
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.passed)


def _residual_tol(n: int, scale: float = 1.0) -> float:
    """Second-order budget ``5e-3 (256/n)^2``, relative to the size of the equation's terms."""
    return RESIDUAL_TOL_256 * (256.0 / n) ** 2 * max(1.0, scale)


def _residual_outcome(reports: list[ResidualReport], n: int) -> Outcome:
    scale = max(float(np.max(np.abs(r.lhs))) for r in reports)
    tol = _residual_tol(n, scale)
    worst = max(r.sup_norm for r in reports)
    return Outcome(
        worst <= tol,
        f"sup residual {worst:.3e} (tol {tol:.3e})",
        {"tol": tol, "term_scale": scale, "reports": [r.to_dict() for r in reports]},
    )


class _Run:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.profile = cfg.scenario.build()
        self.trace: FlowTrace | None = None
        self.error: str | None = None

    def flow(self) -> FlowTrace:
        try:
            self.trace = evolve(FlowState(self.profile), self.cfg.scenario.step_control)
        except FlowError as err:
            self.error = str(err)
            self.trace = err.trace
        return self.trace

    def area_law(self) -> Outcome:
        dev = area_law_check(self.trace)
        return Outcome(dev <= AREA_LAW_TOL, f"max relative deviation {dev:.3e} (tol {AREA_LAW_TOL:g})", {"deviation": dev})

    def residual_12a(self) -> Outcome:
        return _residual_outcome([residual_12a(self.profile)], self.cfg.scenario.grid_n)

    def residual_12b(self) -> Outcome:
        reports = [residual_12b_report(self.profile, side) for side in ("plus", "minus")]
        return _residual_outcome(reports, self.cfg.scenario.grid_n)

    def residual_heat_9(self) -> Outcome:
        return _residual_outcome([residual_heat_9(self.profile)], self.cfg.scenario.grid_n)

    def identities_13(self) -> Outcome:
        res = random_identity_trials(self.cfg.seed)
        worst = max(res["max_rel_13a"], res["max_rel_13b"])
        return Outcome(worst <= IDENTITY_TOL, f"worst relative gap {worst:.3e} over {res['trials']} trials", res)

    def monotonicity(self) -> Outcome:
        viol = monotonicity_check(self.trace, MONOTONICITY_TOL)
        gated = sum(r.threshold_ok for r in self.trace.records)
        return Outcome(
            not viol,
            f"{len(viol)} violations; threshold held at {gated}/{len(self.trace)} records",
            {"tol": MONOTONICITY_TOL, "violations": [asdict(v) for v in viol], "threshold_records": gated},
        )

    def papasoglu(self) -> Outcome:
        bad = [r.t for r in self.trace.records if not r.papasoglu_ok]
        return Outcome(not bad, f"bound violated at {len(bad)} records", {"violated_at": bad})

    def stationarity(self) -> Outcome:
        # informational: stationary instants are allowed, only reported
        if len(self.trace) < 3:
            return Outcome(False, "trace too short", {"times": []})
        times = detect_stationarity(self.trace, STATIONARITY_TOL)
        return Outcome(True, f"{len(times)} stationary records at tol {STATIONARITY_TOL:g}", {"tol": STATIONARITY_TOL, "times": times})

    def convergence(self) -> Outcome:
        n = self.cfg.scenario.grid_n
        grids = [max(n // 2, 32), 2 * max(n // 2, 32), 4 * max(n // 2, 32)]
        order = convergence_order(residual_12a, self.cfg.scenario.build, grids)
        ok = order == "exact" or order >= MIN_ORDER
        shown = order if isinstance(order, str) else f"{order:.3f}"
        return Outcome(ok, f"residual_12a order {shown} on grids {grids} (need >= {MIN_ORDER})", {"order": order, "grids": grids})


def _fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return repr(float(v))


def write_trace_csv(trace: FlowTrace, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in trace.records:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])


def resolve_out_dir(cfg: RunConfig, override: str | None = None) -> Path:
    return Path(override or cfg.outputs or os.environ.get(ENV_OUT) or DEFAULT_OUT)


def run(cfg: RunConfig, out_dir: Path | None = None, quiet: bool = False) -> int:
    """Run the configured scenario and verifications; returns the exit status."""
    out = Path(out_dir) if out_dir is not None else resolve_out_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    job = _Run(cfg)
    trace = job.flow()

    outcomes: dict[str, Outcome] = {}
    for name in cfg.verify:
        outcomes[name] = getattr(job, name)()
    if job.error:
        outcomes["flow"] = Outcome(False, job.error)

    if cfg.emit_csv:
        write_trace_csv(trace, out / "trace.csv")
    if cfg.emit_json:
        report = {
            "artifact_version": ARTIFACT_VERSION,
            "package_version": __version__,
            "config": config_to_dict(cfg),
            "seed": cfg.seed,
            "stop_reason": trace.stop_reason,
            "records": len(trace),
            "final_time": trace.records[-1].t,
            "final_area": trace.records[-1].area,
            "verifications": {
                k: {"passed": o.passed, "summary": o.summary, **o.details} for k, o in outcomes.items()
            },
        }
        text = json.dumps(report, indent=1, sort_keys=True, allow_nan=False)
        (out / "report.json").write_text(text + "\n", encoding="utf-8")
    lines = [f"{'PASS' if o.passed else 'FAIL'} {k}: {o.summary}" for k, o in outcomes.items()]
    header = f"scenario {cfg.scenario.name} n={cfg.scenario.grid_n} stop={trace.stop_reason} t={trace.records[-1].t:.6g}"
    (out / "report.txt").write_text("\n".join([header, *lines]) + "\n", encoding="utf-8")

    if cfg.emit_figures:
        from .plotting import plot_profiles, plot_trace

        plot_trace(trace, out / "trace.png")
        final = trace.final_state.profile if trace.final_state is not None else job.profile
        plot_profiles(job.profile, final, out / "profiles.png")

    if not quiet:
        print(header)
        print("\n".join(lines))
    failed = [k for k, o in outcomes.items() if not o.passed]
    if failed:
        print(f"verification failed: {failed[0]}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cheeger-flow",
        description="Run Ricci flow on an axisymmetric sphere and check how its Cheeger constant evolves.",
    )
    ap.add_argument("--config", type=Path, help="TOML run configuration (default: unit round sphere)")
    ap.add_argument("--out", help=f"output directory (default: ${ENV_OUT} or ./{DEFAULT_OUT})")
    ap.add_argument("--verify", help="comma-separated verifications, overrides the config; 'all' for every check")
    ap.add_argument("--grid", type=int, help="number of polar-angle intervals")
    ap.add_argument("--seed", type=int, help="seed for the randomized identity trials")
    ap.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    ap.add_argument("--quiet", action="store_true", help="no summary on stdout")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else 'scenario.name = "round_sphere"\n'
        cfg = parse_config(text)
        if args.grid is not None:
            if args.grid < MIN_INTERVALS:
                raise ConfigError(f"--grid: {args.grid} outside accepted range [{MIN_INTERVALS}, inf) (grid too coarse)")
            cfg = replace(cfg, scenario=replace(cfg.scenario, grid_n=args.grid))
            _check_resolved(cfg.scenario.build())
        if args.verify is not None:
            cfg = replace(cfg, verify=parse_verify_list(args.verify))
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.no_figures:
            cfg = replace(cfg, emit_figures=False)
    except (ConfigError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return run(cfg, resolve_out_dir(cfg, args.out), quiet=args.quiet)
