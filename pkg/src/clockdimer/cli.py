"""Command-line front end: ``clockdimer {levels,gate,calibrate,sweep,validate}``.

Every command writes plain data files under ``--out``; nothing is plotted.
Sweep points run in a process pool sized by ``CLOCKDIMER_WORKERS``
(default 1); rows are written in grid order.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .evolve import DephasingRates, run_schedule_lindblad
from .experiments import (
    calibrate_gate,
    canonical_gate,
    jzz_report,
    run_gate,
    t2_report,
    validation_checks,
)
from .fidelity import GATE_NAMES, fidelity_mixed, ideal_gate
from .spectrum import TruncationError, extract_effective_model, level_diagram

WORKERS_ENV = "CLOCKDIMER_WORKERS"


def fmt(x: float) -> str:
    return format(float(x), ".12g")


def header(cfg: RunConfig, command: str) -> list[str]:
    return [f"clockdimer {__version__} config={cfg.digest()}", f"command: {command}"]


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise SystemExit(f"error: cannot write {path}: {exc.strerror}") from exc
    return path


def _t2_label(t2: float | None) -> str:
    return "inf" if t2 is None or math.isinf(t2) else fmt(t2)


def parse_state(text: str) -> np.ndarray:
    """Comma-separated complex amplitudes in the order dd, du, ud, uu."""
    try:
        amps = np.array([complex(s.strip().replace(" ", "")) for s in text.split(",")])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad amplitude in {text!r}") from exc
    if amps.shape != (4,) or not np.linalg.norm(amps):
        raise argparse.ArgumentTypeError("--input-state needs four amplitudes, not all zero")
    return amps / np.linalg.norm(amps)


def density_csv(rho: np.ndarray, head: list[str]) -> str:
    lines = [f"# {h}" for h in head] + ["i,j,re,im"]
    for i in range(4):
        for j in range(4):
            lines.append(f"{i},{j},{fmt(rho[i, j].real)},{fmt(rho[i, j].imag)}")
    return "\n".join(lines) + "\n"


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _map(fn, jobs):
    n = _workers()
    if n == 1 or len(jobs) < 2:
        yield from map(fn, jobs)
        return
    with ProcessPoolExecutor(max_workers=n) as pool:
        yield from pool.map(fn, jobs)


# --------------------------------------------------------------------------
# commands


def cmd_levels(cfg: RunConfig, out: Path, target: str, axis: str, spin: int = 1) -> Path:
    if target == "monomer":
        r = cfg.monomer_range_mT
        diagram = level_diagram(cfg.monomer(spin), axis, (-r, r), cfg.level_steps)
        name = f"levels_monomer{spin}_{axis}.csv"
    else:
        r = cfg.dimer_range_mT
        diagram = level_diagram(cfg.dimer(), axis, (-r, r), cfg.level_steps).lowest(4)
        name = f"levels_dimer_{axis}.csv"
    path = out / name
    try:
        out.mkdir(parents=True, exist_ok=True)
        diagram.to_csv(path, header(cfg, f"levels target={target} axis={axis}"))
    except OSError as exc:
        raise SystemExit(f"error: cannot write {path}: {exc.strerror}") from exc
    return path


def cmd_gate(cfg: RunConfig, out: Path, gate: str, jzz: float | None, t2: float | None,
             input_state: np.ndarray | None = None) -> dict:
    gate = canonical_gate(gate)
    d = cfg.dimer(jzz)
    rates = None if t2 is None else DephasingRates.from_t2(t2)
    run = run_gate(d, gate, rates, cfg.amplitude_mT)
    tag = f"{gate}_jzz{fmt(d.j.J_zz * 1e3)}_t2{_t2_label(t2)}"
    summary = {
        "version": __version__,
        "config": cfg.digest(),
        "J_zz_MHz": d.j.J_zz * 1e3,
        "T2_us": _t2_label(t2),
        "report": run.report.to_dict(),
        "calibration": {
            "initial_fidelity": run.calibration.initial_fidelity,
            "fidelity": run.calibration.fidelity,
            "adjustments_ns": list(run.calibration.adjustments),
            "sweeps": run.calibration.sweeps,
        },
        "delta_GHz": run.em.delta,
        "schedule": run.schedule.to_dict(),
    }
    _write(out / f"gate_{tag}.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")

    if input_state is not None:
        rho0 = np.outer(input_state, input_state.conj())
        rho = run_schedule_lindblad(run.schedule, run.em, rho0, rates)
        phi = ideal_gate(gate) @ input_state
        ideal = np.outer(phi, phi.conj())
        summary["input_state_fidelity"] = fidelity_mixed(phi, rho)
        head = header(cfg, f"gate {gate} input-state") + [
            f"fidelity={fmt(summary['input_state_fidelity'])}"
        ]
        _write(out / f"rho_{tag}_simulated.csv", density_csv(rho, head))
        _write(out / f"rho_{tag}_ideal.csv", density_csv(ideal, head))
    return summary


def cmd_calibrate(cfg: RunConfig, out: Path, gate: str, jzz: float | None) -> dict:
    gate = canonical_gate(gate)
    d = cfg.dimer(jzz)
    em = extract_effective_model(d)
    cal = calibrate_gate(em, gate, cfg.amplitude_mT)
    tag = f"{gate}_jzz{fmt(d.j.J_zz * 1e3)}"
    _write(out / f"schedule_{tag}.json", cal.schedule.to_json() + "\n")
    return {
        "gate": gate,
        "initial_fidelity": cal.initial_fidelity,
        "fidelity": cal.fidelity,
        "adjustments_ns": list(cal.adjustments),
    }


def cmd_sweep(cfg: RunConfig, out: Path, variable: str, gate: str = "CNOT",
              jzz: float | None = None, t2: float | None = None) -> Path:
    gate = canonical_gate(gate)
    if variable == "t2":
        grid = cfg.t2_grid_us
        if not grid:
            raise ValueError("empty T2 grid")
        d = cfg.dimer(jzz)
        em = extract_effective_model(d)
        sched = calibrate_gate(em, gate, cfg.amplitude_mT).schedule
        jobs = [(sched, em, gate, t) for t in grid]
        fn, col = t2_report, "T2_us"
    else:
        grid = cfg.jzz_grid_MHz
        if not grid:
            raise ValueError("empty Jzz grid")
        jobs = [(cfg.dimer(j), gate, t2, cfg.amplitude_mT) for j in grid]
        fn, col = jzz_report, "J_zz_MHz"

    path = out / f"sweep_{variable}_{gate}.csv"
    try:
        out.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            for h in header(cfg, f"sweep variable={variable} gate={gate}"):
                fh.write(f"# {h}\n")
            fh.write(f"{col},average,min,max\n")
            fh.flush()
            for value, report in zip(grid, _map(fn, jobs)):
                label = "inf" if math.isinf(value) else fmt(value)
                fh.write(f"{label},{report.csv_row()}\n")
                fh.flush()
    except OSError as exc:
        raise SystemExit(f"error: cannot write {path}: {exc.strerror}") from exc
    return path


def cmd_validate(cfg: RunConfig, jzz: float | None = None, stream=None) -> int:
    stream = stream or sys.stdout
    try:
        checks = validation_checks(cfg.dimer(jzz), cfg.amplitude_mT)
    except TruncationError as exc:
        print(f"FAIL  truncation: {exc}", file=stream)
        return 1
    for c in checks:
        print(c.line(), file=stream)
    return 0 if all(c.passed for c in checks) else 1


# --------------------------------------------------------------------------
# argument parsing


def _t2_arg(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("T2 must be > 0 (or inf)")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI config file (defaults: Cr7Mn heterodimer)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--jzz", type=float, help="J_zz in MHz (overrides config)")

    p = argparse.ArgumentParser(prog="clockdimer", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"clockdimer {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    lv = sub.add_parser("levels", parents=[common], help="energy levels vs field")
    lv.add_argument("--target", choices=("monomer", "dimer"), default="dimer")
    lv.add_argument("--axis", choices=("x", "y", "z"), default="z")
    lv.add_argument("--spin", type=int, choices=(1, 2), default=1, help="which monomer")

    gt = sub.add_parser("gate", parents=[common], help="calibrate and score one gate")
    gt.add_argument("--gate", default="cnot", help="cnot, pi2-1, pi2-2 or e.g. Ybar2")
    gt.add_argument("--t2", type=_t2_arg, help="T2 in microseconds (inf: none)")
    gt.add_argument("--input-state", type=parse_state, help="amplitudes dd,du,ud,uu e.g. '1j,0,0,1'")

    cb = sub.add_parser("calibrate", parents=[common], help="write a calibrated schedule")
    cb.add_argument("--gate", default="cnot")

    sw = sub.add_parser("sweep", parents=[common], help="fidelity table over a grid")
    sw.add_argument("--variable", choices=("jzz", "t2"), default="t2")
    sw.add_argument("--gate", default="cnot")
    sw.add_argument("--t2", type=_t2_arg, help="T2 (us) applied at every point of a jzz sweep")

    sub.add_parser("validate", parents=[common], help="model self-consistency checks")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    except (OSError, ValueError) as exc:
        parser.error(f"config: {exc}")

    gate = getattr(args, "gate", None)
    if gate is not None and canonical_gate(gate) not in GATE_NAMES:
        parser.error(f"unknown gate {gate!r}")
    if gate is not None and canonical_gate(gate) == "I":
        parser.error("the identity has no pulse schedule")

    try:
        if args.command == "levels":
            print(cmd_levels(cfg, args.out, args.target, args.axis, args.spin))
        elif args.command == "gate":
            s = cmd_gate(cfg, args.out, args.gate, args.jzz, args.t2, args.input_state)
            line = f"{s['report']['gate']} Jzz={fmt(s['J_zz_MHz'])} MHz T2={s['T2_us']}: average fidelity {s['report']['average']:.6f}"
            if "input_state_fidelity" in s:
                line += f", input state {s['input_state_fidelity']:.6f}"
            print(line)
        elif args.command == "calibrate":
            s = cmd_calibrate(cfg, args.out, args.gate, args.jzz)
            print(f"{s['gate']}: {s['initial_fidelity']:.6f} -> {s['fidelity']:.6f}")
        elif args.command == "sweep":
            try:
                print(cmd_sweep(cfg, args.out, args.variable, args.gate, args.jzz, args.t2))
            except ValueError as exc:
                parser.error(str(exc))
        elif args.command == "validate":
            return cmd_validate(cfg, args.jzz)
    except TruncationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
