"""Command line entry point: ``chargetomo {timing,verify-tables,simulate,tomo-state,tomo-process}``.

Exit codes: 0 success, 1 validation error, 2 physics-invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import control, formats, process, tomography
from .device import ConfigurationError, DeviceParams, convert_energy, reference_parameters, timings
from .formats import ConfigError
from .measurement import ProbabilityError
from .qmath import NotHermitianError, num_qubits, trace_distance
from .states import named_state

TASKS = ("timing", "verify-tables", "simulate", "tomo-state", "tomo-process")

EXIT_OK, EXIT_VALIDATION, EXIT_PHYSICS = 0, 1, 2

TAU_CONVENTION_NOTE = (
    "tau = sqrt(15)/(8 E_J) with E_J = tau_energy (default E_J0, SQUID biased at flux 1/3); "
    "tau_alternative evaluates the same formula at E_J(0) = 2 E_J0, i.e. flux 0 with E_L = 2 sqrt(15) E_J0"
)


class PhysicsViolation(RuntimeError):
    pass


@dataclass
class RunConfig:
    device: DeviceParams
    task: str = "tomo-state"
    values: dict[str, str] = field(default_factory=dict)
    shots: int = 0
    master_seed: int = 0
    route: str = "auto"
    project: bool | None = None
    out: Path = Path("out")
    readout_error: float = 0.0
    t2_budget_ns: float = 5.0

    def get(self, key: str, default: str | None = None) -> str | None:
        return self.values.get(key, default)


def _energy(values: dict[str, str], name: str) -> float | None:
    value = values.get(f"device.{name}.value", values.get(f"device.{name}"))
    if value is None:
        return None
    unit = values.get(f"device.{name}.unit", "GHz")
    try:
        return convert_energy(float(value), unit)
    except ValueError as exc:
        raise ConfigError(f"device.{name}: {exc}") from exc


def device_from_config(values: dict[str, str]) -> DeviceParams:
    n = int(values.get("device.n_qubits", "1"))
    extra = {}
    for name in ("E_L", "tau_energy"):
        e = _energy(values, name)
        if e is not None:
            extra[name] = e
    if "device.coupling" in values:
        extra["coupling"] = values["device.coupling"]
    e_c, e_j0 = _energy(values, "E_C"), _energy(values, "E_J0")
    if "device.parameter_set" in values or (e_c is None and e_j0 is None):
        # parameter set 1 (E_C = 1 K, E_J0 = 100 mK) unless told otherwise
        base = reference_parameters(int(values.get("device.parameter_set", "1")), n)
        e_c = base.E_C if e_c is None else e_c
        e_j0 = base.E_J0 if e_j0 is None else e_j0
    elif e_c is None or e_j0 is None:
        raise ConfigError("device needs both E_C and E_J0 (or device.parameter_set)")
    return DeviceParams(n, e_c, e_j0, **extra)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("on", "true", "yes", "1"):
        return True
    if lowered in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"expected on/off, got {text!r}")


def build_config(values: dict[str, str], args: argparse.Namespace) -> RunConfig:
    try:
        cfg = RunConfig(
            device=device_from_config(values),
            task=args.task,
            values=values,
            shots=int(values.get("shots", "0")),
            master_seed=int(values.get("seed", values.get("master_seed", "0"))),
            route=values.get("route", "auto"),
            project=_parse_bool(values["project"]) if "project" in values else None,
            out=Path(values.get("out", "out")),
            readout_error=float(values.get("readout_error", "0")),
            t2_budget_ns=float(values.get("timing.T2_budget_ns", "5")),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if "task" in values and values["task"] != args.task:
        raise ConfigError(f"config task {values['task']!r} does not match subcommand {args.task!r}")
    if args.shots is not None:
        cfg.shots = args.shots
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.route is not None:
        cfg.route = args.route
    if args.project is not None:
        cfg.project = args.project == "on"
    if args.out is not None:
        cfg.out = Path(args.out)
    if cfg.project is None:
        # state tomography projects by default; process tomography inverts raw states
        cfg.project = cfg.task != "tomo-process"
    if cfg.shots < 0:
        raise ConfigError("shots must be >= 0")
    if cfg.route not in ("auto", "qubit1", "qubit2"):
        raise ConfigError(f"route must be auto, qubit1 or qubit2, got {cfg.route!r}")
    return cfg


def _state(cfg: RunConfig) -> np.ndarray:
    if cfg.get("state.file"):
        rho = formats.read_matrix(cfg.get("state.file"))
    else:
        preset = cfg.get("state.preset", "maximally_mixed")
        n = int(cfg.get("state.n_qubits", str(cfg.device.n_qubits)))
        rho = named_state(preset, n, int(cfg.get("state.seed", "0")))
    n = num_qubits(rho)
    if n > 4:
        raise ConfigError(f"states beyond 4 qubits are unsupported (got {n})")
    return rho


def _device_for(cfg: RunConfig, n: int) -> DeviceParams:
    return cfg.device if cfg.device.n_qubits == n else cfg.device.with_qubits(n)


def _schedule_obj(schedule: tomography.TomographySchedule) -> list[dict]:
    out = []
    for s, rel in zip(schedule.settings, sorted(schedule.relations, key=lambda r: r.setting_index)):
        out.append({
            "label": s.label,
            "sequence": s.sequence.label,
            "readout_qubit": s.readout_qubit + 1,
            "duration_ns": s.sequence.total_duration,
            "target": rel.target,
            "relation": {w: a for w, a in rel.coefficients},
        })
    return out


def _records_rows(records):
    return [(r.setting.label, r.setting.sequence.label or "I", r.setting.readout_qubit + 1,
             r.setting.sequence.total_duration, r.ideal_probability, r.shots, r.ones_count, r.seed)
            for r in records]


RECORD_HEADER = ("label", "sequence", "readout_qubit", "duration_ns", "ideal_probability", "shots", "ones", "seed")


def cmd_timing(cfg: RunConfig) -> dict:
    p2 = _device_for(cfg, 2)
    t = timings(p2)
    budget = cfg.t2_budget_ns
    rows = []
    for row in control.TABLE_I + control.TABLE_II:
        d = control.sequence(p2, row.label).total_duration
        rows.append({"table": row.table, "row": row.index, "target": row.target, "sequence": row.label,
                     "duration_ns": d, "within_T2": d < budget})
    routes = {}
    for route in ("auto", "qubit1", "qubit2"):
        sched = tomography.schedule_2q(route, p2)
        durations = sched.total_durations()
        routes[route] = {
            "settings": {k: {"duration_ns": v, "within_T2": v < budget} for k, v in durations.items()},
            "max_duration_ns": max(durations.values()),
        }
    report = {
        "t_x_ns": t.t_x,
        "t_z_quarter_ns": t.t_z_quarter,
        "t_y_total_ns": t.t_y_total,
        "tau_ns": t.tau,
        "tau_alternative_ns": t.tau_alternative,
        "tau_convention": TAU_CONVENTION_NOTE,
        "T2_budget_ns": budget,
        "table_sequences": rows,
        "routes": routes,
        "default_route": "auto",
        "max_two_qubit_duration_ns": routes["auto"]["max_duration_ns"],
        "all_within_T2": all(v["within_T2"] for v in routes["auto"]["settings"].values()),
    }
    cfg.out.mkdir(parents=True, exist_ok=True)
    formats.write_json(cfg.out / "timing.json", report)
    return report


def cmd_verify_tables(cfg: RunConfig) -> control.TableReport:
    report = control.verify_tables(_device_for(cfg, 2))
    obj = {
        "convention": report.convention,
        "tolerance": report.tol,
        "passed": report.passed,
        "rows": [{
            "table": r.row.table, "row": r.row.index, "target": r.row.target, "sequence": r.row.label,
            "expected": r.row.expected_dict, "measured": r.measured,
            "deviation_matrix_order": r.deviation, "deviation_reversed_order": r.reversed_deviation,
            "target_term_deviation": r.target_deviation, "order": r.order or "none", "passed": r.passed,
        } for r in report.rows],
    }
    cfg.out.mkdir(parents=True, exist_ok=True)
    formats.write_json(cfg.out / "tables.json", obj)
    return report


def cmd_simulate(cfg: RunConfig) -> list:
    rho = _state(cfg)
    n = num_qubits(rho)
    schedule = tomography.schedule_for(n, _device_for(cfg, n), cfg.route)
    records = tomography.simulate_records(schedule, rho, cfg.shots, cfg.master_seed, cfg.readout_error)
    cfg.out.mkdir(parents=True, exist_ok=True)
    formats.write_json(cfg.out / "schedule.json", _schedule_obj(schedule))
    formats.write_csv(cfg.out / "records.csv", RECORD_HEADER, _records_rows(records))
    return records


def cmd_tomo_state(cfg: RunConfig) -> tomography.ReconstructionResult:
    rho = _state(cfg)
    n = num_qubits(rho)
    schedule = tomography.schedule_for(n, _device_for(cfg, n), cfg.route)
    records = tomography.simulate_records(schedule, rho, cfg.shots, cfg.master_seed, cfg.readout_error)
    result = tomography.reconstruct(schedule, records, project=cfg.project)
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    formats.write_matrix(out / "input_rho.json", rho)
    formats.write_matrix(out / "raw_rho.json", result.raw_rho)
    formats.write_matrix(out / "rho.json", result.physical_rho, projected=cfg.project)
    formats.write_csv(out / "coefficients.csv", ("word", "coefficient", "stderr"),
                      [(c.word, c.coefficient, result.stderr.get(c.word, 0.0)) for c in result.coefficients])
    formats.write_csv(out / "records.csv", RECORD_HEADER, _records_rows(records))
    formats.write_json(out / "schedule.json", _schedule_obj(schedule))
    formats.write_csv(out / "barchart_raw.csv", ("i", "j", "re", "im"), formats.barchart_rows(result.raw_rho))
    formats.write_csv(out / "barchart.csv", ("i", "j", "re", "im"), formats.barchart_rows(result.physical_rho))
    formats.write_json(out / "summary.json", {
        "n_qubits": n,
        "shots": cfg.shots,
        "master_seed": cfg.master_seed,
        "projected": cfg.project,
        "raw_min_eigenvalue": result.min_eigenvalue,
        "trace_distance_raw": trace_distance(result.raw_rho, rho),
        "trace_distance": trace_distance(result.physical_rho, rho),
    })
    return result


def _channel(cfg: RunConfig) -> process.Channel:
    if cfg.get("channel.file"):
        obj = json.loads(Path(cfg.get("channel.file")).read_text())
        ops = [formats.matrix_from_obj(k) for k in obj.get("kraus", [])]
        return process.Channel(tuple(ops), obj.get("label", "custom"))
    kind = cfg.get("channel.kind", "identity")
    return process.standard_channel(kind, float(cfg.get("channel.param", "0")))


def cmd_tomo_process(cfg: RunConfig) -> process.ProcessTomographyResult:
    channel = _channel(cfg)
    result = process.run_process_tomography(channel, cfg.shots, cfg.master_seed, project=cfg.project,
                                            device=_device_for(cfg, 1))
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    chi = result.chi
    formats.write_matrix(out / "chi.json", chi.entries, basis_label=chi.basis_label, channel=channel.label)
    for j, rec in enumerate(result.reconstructions):
        formats.write_matrix(out / f"output{j}_rho.json", rec.physical_rho if cfg.project else rec.raw_rho)
        formats.write_csv(out / f"output{j}_records.csv", RECORD_HEADER, _records_rows(result.records[j]))
    formats.write_json(out / "diagnostics.json", {
        "channel": channel.label,
        "shots": cfg.shots,
        "projected_outputs": cfg.project,
        "hermitian_defect": chi.hermitian_defect,
        "trace_re": chi.trace.real,
        "trace_im": chi.trace.imag,
        "min_eigenvalue": chi.min_eigenvalue,
        "completely_positive": chi.min_eigenvalue >= -1e-8,
        "tp_residual": chi.tp_residual(),
    })
    return result


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chargetomo", description=__doc__.splitlines()[0])
    parser.add_argument("task", choices=TASKS)
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seed", type=int, help="master seed (overrides config)")
    parser.add_argument("--shots", type=int, help="shots per setting; 0 = exact probabilities")
    parser.add_argument("--route", choices=("auto", "qubit1", "qubit2"))
    parser.add_argument("--project", choices=("on", "off"))
    parser.add_argument("--out", help="output directory")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        values = formats.read_config(args.config) if args.config else {}
        cfg = build_config(values, args)
        if cfg.task == "timing":
            cmd_timing(cfg)
        elif cfg.task == "verify-tables":
            report = cmd_verify_tables(cfg)
            if not report.passed:
                rows = ", ".join(f"{r.row.table}.{r.row.index}" for r in report.failures())
                raise PhysicsViolation(f"table rows not reproduced as operator identities: {rows}")
        elif cfg.task == "simulate":
            cmd_simulate(cfg)
        elif cfg.task == "tomo-state":
            cmd_tomo_state(cfg)
        else:
            cmd_tomo_process(cfg)
    except (PhysicsViolation, ProbabilityError) as exc:
        print(f"chargetomo: physics check failed: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except (ConfigError, ConfigurationError, NotHermitianError, process.ChannelError,
            tomography.ScheduleError, ValueError, OSError) as exc:
        print(f"chargetomo: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
