"""Gate runs, sweeps and diagnostics shared by the CLI and the acceptance tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolve import DephasingRates, full_space_validation
from .fidelity import FidelityReport, average_gate_fidelity, ideal_gate, make_scorer
from .model import DimerParams, MonomerParams, dimer_hamiltonian, zeeman_coefficient
from .pulses import CalibrationResult, Schedule, calibrate_schedule, cnot_schedule, rotation_segment
from .spectrum import (
    EffectiveModel,
    clock_derivative_check,
    extract_effective_model,
    perturbative_states,
)

GATE_ALIASES = {"pi2-1": "X1", "pi2-2": "X2", "cnot": "CNOT"}


def canonical_gate(name: str) -> str:
    return GATE_ALIASES.get(name, GATE_ALIASES.get(name.lower(), name))


def nominal_schedule(em: EffectiveModel, gate: str, amplitude: float = 1.0) -> Schedule:
    gate = canonical_gate(gate)
    if gate in ("CNOT", "CNOT21"):
        return cnot_schedule(em, amplitude=amplitude)
    return Schedule((rotation_segment(em, gate, amplitude),), gate)


@dataclass(frozen=True)
class GateRun:
    em: EffectiveModel
    calibration: CalibrationResult
    report: FidelityReport

    @property
    def schedule(self) -> Schedule:
        return self.calibration.schedule


def calibrate_gate(em: EffectiveModel, gate: str, amplitude: float = 1.0) -> CalibrationResult:
    """Compile and calibrate ``gate`` against the decoherence-free MUB average."""
    gate = canonical_gate(gate)
    sched = nominal_schedule(em, gate, amplitude)
    return calibrate_schedule(sched, make_scorer(em, ideal_gate(gate)))


def run_gate(
    d: DimerParams, gate: str, rates: DephasingRates | None = None, amplitude: float = 1.0
) -> GateRun:
    gate = canonical_gate(gate)
    em = extract_effective_model(d)
    cal = calibrate_gate(em, gate, amplitude)
    report = average_gate_fidelity(cal.schedule, em, ideal_gate(gate), rates, gate=gate)
    return GateRun(em, cal, report)


def t2_report(args) -> FidelityReport:
    """Score a fixed schedule at one T2 (picklable worker for sweeps)."""
    sched, em, gate, t2 = args
    return average_gate_fidelity(sched, em, ideal_gate(gate), DephasingRates.from_t2(t2), gate=gate)


def jzz_report(args) -> FidelityReport:
    d, gate, t2, amplitude = args
    rates = None if t2 is None else DephasingRates.from_t2(t2)
    return run_gate(d, gate, rates, amplitude).report


# --------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    comparison: str = "<"

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {self.value:.6g} {self.comparison} {self.tolerance:.6g}"


def _below(name, value, tol) -> Check:
    return Check(name, float(value), tol, bool(value < tol))


def validation_checks(d: DimerParams, amplitude: float = 1.0) -> list[Check]:
    """Model self-consistency checks; raises TruncationError for invalid params."""
    em = extract_effective_model(d)
    checks = [
        Check("min logical overlap with product states", float(em.overlaps.min()), 0.99,
              bool(em.overlaps.min() > 0.99), ">"),
        _below("Hermiticity defect of H (relative)",
               np.linalg.norm(dimer_hamiltonian(d) - dimer_hamiltonian(d).conj().T)
               / np.linalg.norm(dimer_hamiltonian(d)), 1e-12),
    ]
    for axis in "xyz":
        checks.append(_below(f"dimer clock slope along {axis} (GHz/mT)",
                             clock_derivative_check(d, axis).max_slope, 1e-5))
    for k, m in ((1, d.m1), (2, d.m2)):
        worst = max(clock_derivative_check(m, a).max_slope for a in "xyz")
        checks.append(_below(f"monomer {k} clock slope (GHz/mT)", worst, 1e-6))

    control = clock_derivative_check(MonomerParams(0.0, 0.0, d.m1.g), "z").max_slope
    checks.append(_below("Zeeman control slope error vs g*muB/h (GHz/mT)",
                         abs(control - zeeman_coefficient(d.m1.g)), 1e-6))

    pt = perturbative_states(d)
    err = np.max(np.abs(pt.energies(d) - em.energies)) * 1e3
    checks.append(_below("closed-form manifold energies (MHz)", err, 0.5))
    if d.j.J_perp:
        rel = abs(em.delta - em.delta_perturbative) / abs(em.delta_perturbative)
        checks.append(_below("delta vs second-order estimate (relative)", rel, 0.05))

    seg = rotation_segment(em, "X1", amplitude)
    leak = full_space_validation(d, Schedule((seg,), "X1"), em=em).leakage
    checks.append(_below("9-level leakage of a pi/2 pulse", leak, 1e-3))
    return checks
