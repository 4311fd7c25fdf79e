"""Command-line front end: read a machine config, run a computation, emit data files.

Commands
    steady-state   analytic + null-space steady state and their deviation
    currents       full current report with regime label at the steady state
    diagram        regime classification over a 2D grid, with boundary overlays
    curve          power-efficiency samples along a field sweep
    collide        finite-time repeated-collision trajectory dump
    verify         run the invariant suite; nonzero exit on any violation

Exit codes: 0 success, 1 invariant violation, 2 configuration error,
3 numerical failure. Identical config and build produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    AxisSpec,
    Regime,
    classify,
    power_efficiency_curve,
    sweep_diagram,
)
from .collision import (
    DEFAULT_TAU_LADDER,
    convergence_to_steady_state,
    collide,
    rate_extrapolate,
    run,
    write_trajectory_csv,
)
from .errors import ConfigError, NumericalError
from .lindblad import effective_coherence, steady_state_analytic, steady_state_numeric
from .linalg import coherence_relative_entropy, relative_entropy
from .model import (
    MachineParams,
    ancilla_state,
    BathSpec,
    params_from_config,
    params_to_mapping,
    with_param,
)
from .thermo import (
    coherence_rate_closed_form,
    common_factor_V,
    common_factor_V2,
    equivalent_single_bath_coherence,
    heat_currents,
    heat_currents_trace,
    power,
    power_trace,
    second_law_residuals,
    thermo_report,
)

_FLOAT_FMT = "{:.16e}"


def _fmt(x: float) -> str:
    return _FLOAT_FMT.format(x)


def _load_params(path: str) -> MachineParams:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return params_from_config(text)


def _header_lines(params: MachineParams, command: str, extra: dict | None = None) -> list[str]:
    lines = [f"qcmachine {__version__}", f"command = {command}"]
    lines += [f"{k} = {_fmt(v)}" for k, v in params_to_mapping(params).items()]
    if extra:
        lines += [f"{k} = {v}" for k, v in extra.items()]
    return lines


def _write_text(out: str | None, text: str) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _json_payload(params: MachineParams, command: str, payload: dict) -> str:
    doc = {
        "version": __version__,
        "command": command,
        "params": params_to_mapping(params),
    }
    doc.update(payload)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _rho_dict(rho: np.ndarray) -> dict:
    return {
        "rho_ee": float(rho[0, 0].real),
        "rho_gg": float(rho[1, 1].real),
        "rho_eg_re": float(rho[0, 1].real),
        "rho_eg_im": float(rho[0, 1].imag),
    }


def _parse_grid(spec: str) -> AxisSpec:
    parts = spec.split(":")
    if len(parts) != 4:
        raise ConfigError(f"grid spec must be axis:min:max:steps, got {spec!r}")
    key, lo, hi, steps = parts
    try:
        return AxisSpec(key=key, start=float(lo), stop=float(hi), steps=int(steps))
    except ValueError as exc:
        raise ConfigError(f"bad grid spec {spec!r}: {exc}") from exc


def _parse_tau_ladder(text: str) -> tuple[float, ...]:
    try:
        ladder = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"bad tau ladder {text!r}: {exc}") from exc
    if not ladder:
        raise ConfigError("tau ladder is empty")
    return ladder


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _require_format(args, command: str, supported: tuple[str, ...]) -> str:
    chosen = args.format or supported[0]
    if chosen not in supported:
        raise ConfigError(f"{command} supports only --format {'|'.join(supported)}, got {chosen!r}")
    return chosen


def _cmd_steady_state(args) -> int:
    params = _load_params(args.config)
    _require_format(args, "steady-state", ("json",))
    analytic = steady_state_analytic(params).rho
    numeric = steady_state_numeric(params).rho
    eff = effective_coherence(params)
    payload = {
        "analytic": _rho_dict(analytic),
        "numeric": _rho_dict(numeric),
        "max_abs_deviation": float(np.max(np.abs(analytic - numeric))),
        "effective_coherence": {
            "eps_eff": eff.eps_eff,
            "phi": eff.phi,
            "gamma_eff": eff.gamma_eff,
            "n_avg": eff.n_avg,
        },
    }
    _write_text(args.out, _json_payload(params, "steady-state", payload))
    return 0


def _cmd_currents(args) -> int:
    params = _load_params(args.config)
    fmt = _require_format(args, "currents", ("json", "csv"))
    rho = steady_state_analytic(params).rho
    report = thermo_report(params, rho)
    label = classify(report, params, rel_tol=args.tolerance)
    if fmt == "csv":
        from .thermo import ThermoReport

        lines = [f"# {h}" for h in _header_lines(params, "currents", {
            "regime": label.base.value, "beyond_carnot": int(label.beyond_carnot),
        })]
        lines.append(",".join(ThermoReport.CSV_COLUMNS))
        lines.append(report.to_csv_row())
        _write_text(args.out, "\n".join(lines) + "\n")
        return 0
    payload = {
        "report": report.to_dict(),
        "totals": {"q1": report.q1, "q2": report.q2, "w": report.w},
        "regime": label.base.value,
        "beyond_carnot": label.beyond_carnot,
        "first_law_residual": report.first_law_residual,
    }
    _write_text(args.out, _json_payload(params, "currents", payload))
    return 0


def _diagram_csv(result, params) -> str:
    lines = [f"# {h}" for h in _header_lines(params, "diagram", {
        "grid1": f"{result.axis1.key}:{result.axis1.start:g}:{result.axis1.stop:g}:{result.axis1.steps}",
        "grid2": f"{result.axis2.key}:{result.axis2.start:g}:{result.axis2.stop:g}:{result.axis2.steps}",
    })]
    from .thermo import ThermoReport

    cols = [result.axis1.key, result.axis2.key, *ThermoReport.CSV_COLUMNS,
            "regime", "beyond_carnot", "efficiency", "cop",
            "hybrid_cooling_per_work", "hybrid_work_output"]
    lines.append(",".join(cols))
    for rec in result.records:
        cells = [_fmt(rec.axis1_value), _fmt(rec.axis2_value), rec.report.to_csv_row(),
                 rec.label.base.value, str(int(rec.label.beyond_carnot))]
        for v in (rec.efficiency, rec.cop, rec.hybrid_cooling_per_work, rec.hybrid_work_output):
            cells.append("nan" if v is None else _fmt(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _record_dict(rec) -> dict:
    return {
        "axis1_value": rec.axis1_value,
        "axis2_value": rec.axis2_value,
        "report": rec.report.to_dict(),
        "regime": rec.label.base.value,
        "beyond_carnot": rec.label.beyond_carnot,
        "efficiency": rec.efficiency,
        "cop": rec.cop,
        "hybrid_cooling_per_work": rec.hybrid_cooling_per_work,
        "hybrid_work_output": rec.hybrid_work_output,
    }


def _cmd_diagram(args) -> int:
    params = _load_params(args.config)
    fmt = _require_format(args, "diagram", ("csv", "json"))
    grids = [(_parse_grid(g)) for g in (args.grid or [])]
    if len(grids) != 2:
        raise ConfigError(f"diagram needs exactly two --grid specs, got {len(grids)}")
    result = sweep_diagram(params, grids[0], grids[1])
    if fmt == "json":
        payload = {
            "axis1": {"key": result.axis1.key, "values": list(result.axis1.values())},
            "axis2": {"key": result.axis2.key, "values": list(result.axis2.values())},
            "records": [_record_dict(r) for r in result.records],
            "boundaries": {name: [[float(x), float(y)] for x, y in series]
                           for name, series in result.boundaries.items()},
        }
        _write_text(args.out, _json_payload(params, "diagram", payload))
        return 0
    if args.out in (None, "-"):
        raise ConfigError("diagram CSV requires --out (boundary overlays are written alongside)")
    _write_text(args.out, _diagram_csv(result, params))
    base = Path(args.out)
    for name, series in result.boundaries.items():
        lines = [f"# {h}" for h in _header_lines(params, "diagram", {"boundary": name})]
        lines.append(f"{result.axis1.key},{result.axis2.key}")
        for x, y in series:
            lines.append(f"{_fmt(x)},{_fmt(y)}")
        overlay = base.with_name(base.stem + f".boundary_{name}" + base.suffix)
        overlay.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def _cmd_curve(args) -> int:
    params = _load_params(args.config)
    fmt = _require_format(args, "curve", ("csv", "json"))
    grids = [(_parse_grid(g)) for g in (args.grid or [])]
    if len(grids) != 1:
        raise ConfigError(f"curve needs exactly one --grid spec, got {len(grids)}")
    result = power_efficiency_curve(params, grids[0])
    if fmt == "json":
        payload = {
            "grid": {"key": grids[0].key, "values": list(grids[0].values())},
            "samples": [{"field": f, "efficiency": e, "w": w} for f, e, w in result.samples],
            "skipped_non_engine_points": result.skipped,
            "field_at_max_power": result.field_at_max_power,
            "max_power_output": result.max_power_output,
            "eta_at_max_power": result.eta_at_max_power,
        }
        _write_text(args.out, _json_payload(params, "curve", payload))
        return 0
    extra = {
        "grid": f"{grids[0].key}:{grids[0].start:g}:{grids[0].stop:g}:{grids[0].steps}",
        "skipped_non_engine_points": result.skipped,
    }
    if result.field_at_max_power is not None:
        extra["field_at_max_power"] = _fmt(result.field_at_max_power)
        extra["max_power_output"] = _fmt(result.max_power_output)
        extra["eta_at_max_power"] = _fmt(result.eta_at_max_power)
    else:
        extra["engine_region"] = "empty"
    lines = [f"# {h}" for h in _header_lines(params, "curve", extra)]
    lines.append(f"{grids[0].key},efficiency,w")
    for field_value, eta, w in result.samples:
        lines.append(f"{_fmt(field_value)},{_fmt(eta)},{_fmt(w)}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_collide(args) -> int:
    params = _load_params(args.config)
    _require_format(args, "collide", ("csv",))
    ladder = _parse_tau_ladder(args.tau_ladder) if args.tau_ladder else DEFAULT_TAU_LADDER
    tau = ladder[0]
    rho0 = steady_state_analytic(params).rho if args.start == "steady" else 0.5 * np.eye(2, dtype=complex)
    trajectory = run(rho0, params, tau, args.collisions)
    if args.out in (None, "-"):
        raise ConfigError("collide requires --out")
    header = _header_lines(params, "collide", {
        "tau": _fmt(tau), "collisions": args.collisions, "start": args.start,
    })
    write_trajectory_csv(trajectory, args.out, header_lines=header)
    return 0


# ---------------------------------------------------------------------------
# invariant suite
# ---------------------------------------------------------------------------

def _random_params(rng) -> MachineParams:
    return MachineParams(
        B=rng.uniform(0.5, 2.0),
        gamma=rng.uniform(0.5, 2.0),
        bath1=BathSpec(T=rng.uniform(1.0, 5.0), B=rng.uniform(0.5, 2.0),
                       epsilon=rng.uniform(0.0, 1.0), phi=rng.uniform(0.0, 2.0 * np.pi)),
        bath2=BathSpec(T=rng.uniform(1.0, 5.0), B=rng.uniform(0.5, 2.0),
                       epsilon=rng.uniform(0.0, 1.0), phi=rng.uniform(0.0, 2.0 * np.pi)),
    )


def _random_state(rng) -> np.ndarray:
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def _strip_coherence(params: MachineParams, which=("bath1", "bath2")) -> MachineParams:
    for bath in which:
        params = with_param(params, f"{bath}.epsilon", 0.0)
    return params


def _verify_checks(params: MachineParams, seed: int):
    rng = np.random.default_rng(seed)
    checks = []

    def record(name, passed, detail):
        checks.append({"name": name, "passed": bool(passed), "detail": detail})

    worst = 0.0
    for _ in range(100):
        p = _random_params(rng)
        dev = np.max(np.abs(steady_state_analytic(p).rho - steady_state_numeric(p).rho))
        worst = max(worst, float(dev))
    record("steady_state_agreement", worst < 1e-10, f"max entrywise deviation {worst:.3e} (tol 1e-10)")

    worst = 0.0
    for _ in range(100):
        p = _strip_coherence(_random_params(rng), ("bath2",))
        rho = steady_state_analytic(p).rho
        rep = thermo_report(p, rho)
        v = common_factor_V(p)
        scale = max(abs(rep.q1), abs(rep.q2), abs(rep.w), 1e-30)
        worst = max(worst, abs(rep.q1 - p.bath1.B * v) / scale,
                    abs(rep.q2 + p.bath2.B * v) / scale,
                    abs(rep.w - (p.bath2.B - p.bath1.B) * v) / scale)
    record("common_factor_single_coherence", worst < 1e-9, f"worst relative deviation {worst:.3e} (tol 1e-9)")

    worst = 0.0
    for _ in range(100):
        p = _random_params(rng)
        rho = steady_state_analytic(p).rho
        rep = thermo_report(p, rho)
        v = common_factor_V2(p)
        scale = max(abs(rep.q1), abs(rep.q2), abs(rep.w), 1e-30)
        worst = max(worst, abs(rep.q1 - p.bath1.B * v) / scale,
                    abs(rep.q2 + p.bath2.B * v) / scale,
                    abs(rep.w - (p.bath2.B - p.bath1.B) * v) / scale)
    record("common_factor_double_coherence", worst < 1e-9, f"worst relative deviation {worst:.3e} (tol 1e-9)")

    worst = 0.0
    for _ in range(1000):
        p = _random_params(rng)
        rep = thermo_report(p, _random_state(rng))
        worst = max(worst, abs(rep.first_law_residual))
    record("first_law", worst < 1e-10, f"worst |U' - W - Q1 - Q2| = {worst:.3e} (tol 1e-10)")

    worst = 0.0
    used = 0
    for _ in range(500):
        p = _random_params(rng)
        try:
            eps_eq = equivalent_single_bath_coherence(p)
        except ValueError:
            continue
        used += 1
        p_eq = with_param(_strip_coherence(p, ("bath2",)), "bath1.epsilon", eps_eq)
        worst = max(worst, abs(common_factor_V(p_eq) - common_factor_V2(p)))
    record("equivalent_coherence_identity", worst < 1e-9,
           f"worst |V(A1/A2) - V2| = {worst:.3e} over {used}/500 representable draws (tol 1e-9)")

    worst = 0.0
    for _ in range(200):
        p = _random_params(rng)
        rho = _random_state(rng)
        closed = np.array([*heat_currents(p, rho)[0], *heat_currents(p, rho)[1], *power(p, rho)])
        traced = np.array([*heat_currents_trace(p, rho)[0], *heat_currents_trace(p, rho)[1], *power_trace(p, rho)])
        worst = max(worst, float(np.max(np.abs(closed - traced))))
    record("trace_form_agreement", worst < 1e-10, f"worst closed-vs-trace deviation {worst:.3e} (tol 1e-10)")

    bad = 0
    low = 0.0
    for _ in range(1000):
        p = _strip_coherence(_random_params(rng), ("bath2",))
        c1 = coherence_rate_closed_form(p, 1)
        c2 = coherence_rate_closed_form(p, 2)
        if c1 > 0 or c2 < 0:
            bad += 1
        r1, r2 = second_law_residuals(p, steady_state_analytic(p).rho)
        low = min(low, r1, r2)
    record("coherence_rate_signs", bad == 0, f"{bad}/1000 draws violate Cdot1<=0<=Cdot2")
    record("second_law_bound", low >= -1e-9, f"lowest residual {low:.3e} (floor -1e-9)")

    violations = 0
    for _ in range(1000):
        p = _strip_coherence(_random_params(rng))
        rep = thermo_report(p, steady_state_analytic(p).rho)
        label = classify(rep, p)
        if label.base in (Regime.REFRIGERATOR, Regime.ENGINE) and label.beyond_carnot:
            violations += 1
    record("classical_consistency", violations == 0,
           f"{violations}/1000 coherence-free draws classified beyond the Carnot bound")

    return checks


def _cmd_verify(args) -> int:
    params = _load_params(args.config)
    _require_format(args, "verify", ("json",))
    checks = _verify_checks(params, args.seed)

    # config-specific collision checks
    ladder = _parse_tau_ladder(args.tau_ladder) if args.tau_ladder else (0.1, 0.05, 0.025, 0.0125)
    rho_ss = steady_state_analytic(params).rho
    try:
        distances = convergence_to_steady_state(params, rho_ss, ladder)
        monotone = all(b < a for a, b in zip(distances, distances[1:]))
        checks.append({"name": "collision_convergence", "passed": monotone,
                       "detail": "trace distances " + ", ".join(f"{d:.3e}" for d in distances)})
    except (ConfigError, NumericalError) as exc:
        checks.append({"name": "collision_convergence", "passed": False, "detail": str(exc)})

    if params.bath2.epsilon == 0.0:
        beta1 = 1.0 / params.bath1.T
        extr_ladder = DEFAULT_TAU_LADDER

        def entropy_rate(tau):
            anc1 = ancilla_state(params.bath1, tau)
            _, ledger = collide(rho_ss, params, tau)
            return relative_entropy(ledger.anc1_post, anc1) / tau

        def coherence_rate(tau):
            anc1 = ancilla_state(params.bath1, tau)
            _, ledger = collide(rho_ss, params, tau)
            return (coherence_relative_entropy(ledger.anc1_post) - coherence_relative_entropy(anc1)) / tau

        q1_coh = heat_currents(params, rho_ss)[0][0]
        s_rate = rate_extrapolate(entropy_rate, extr_ladder).limit
        c_rate = rate_extrapolate(coherence_rate, extr_ladder).limit
        residual = abs(s_rate - beta1 * q1_coh - c_rate)
        checks.append({"name": "entropy_relation_extrapolated", "passed": residual < 1e-4,
                       "detail": f"|Sdot - beta1 Q1coh - Cdot1| = {residual:.3e} (tol 1e-4)"})
    else:
        checks.append({"name": "entropy_relation_extrapolated", "passed": True,
                       "detail": "skipped: closed forms need eps2 = 0"})

    all_passed = all(c["passed"] for c in checks)
    payload = {"seed": args.seed, "checks": checks, "all_passed": all_passed}
    _write_text(args.out, _json_payload(params, "verify", payload))
    return 0 if all_passed else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcmachine",
        description="Steady-state thermodynamics of a qubit machine driven by coherent collisional baths",
    )
    parser.add_argument("--version", action="version", version=f"qcmachine {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="machine config file (flat key = value format)")
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="output format (informational; each command has a native format)")
        p.add_argument("--tolerance", type=float, default=1e-9,
                       help="relative tolerance for regime classification")

    p = sub.add_parser("steady-state", help="analytic and numeric steady state")
    common(p)
    p.set_defaults(func=_cmd_steady_state)

    p = sub.add_parser("currents", help="steady-state currents, splits and regime")
    common(p)
    p.set_defaults(func=_cmd_currents)

    p = sub.add_parser("diagram", help="regime diagram over a 2D grid")
    common(p)
    p.add_argument("--grid", action="append", help="axis:min:max:steps (give twice)")
    p.set_defaults(func=_cmd_diagram)

    p = sub.add_parser("curve", help="power-efficiency curve along a field sweep")
    common(p)
    p.add_argument("--grid", action="append", help="axis:min:max:steps (give once)")
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser("collide", help="finite-time collision trajectory")
    common(p)
    p.add_argument("--tau-ladder", help="comma-separated collision times; the first is used")
    p.add_argument("--collisions", type=int, default=2000, help="number of collisions")
    p.add_argument("--start", choices=("mixed", "steady"), default="mixed",
                   help="initial state: maximally mixed or the analytic steady state")
    p.set_defaults(func=_cmd_collide)

    p = sub.add_parser("verify", help="run the invariant suite")
    common(p)
    p.add_argument("--tau-ladder", help="comma-separated collision times for the convergence check")
    p.add_argument("--seed", type=int, default=0, help="seed for the fuzz draws")
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
