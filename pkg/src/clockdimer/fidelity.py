"""Mutually unbiased input states, ideal gates and averaged fidelities."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import expm

from .evolve import (
    DephasingRates,
    apply_superoperator,
    check_density_matrix,
    schedule_superoperator,
    schedule_unitary,
)
from .pulses import AXIS_PHASES, Schedule
from .spectrum import EffectiveModel

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

#: Commuting generator pairs whose joint eigenbases form the five MUBs.
MUB_PARTITION = (("ZI", "IZ"), ("XI", "IX"), ("YI", "IY"), ("XY", "YZ"), ("YX", "ZY"))

#: Which spin controls the ideal CNOT (the other is the target).  Fixed by
#: running the calibrated protocol at Jzz = 0 against both assignments.
CNOT_CONTROL = 1


def _pauli(word: str) -> NDArray[np.complex128]:
    return np.kron(_PAULI[word[0]], _PAULI[word[1]])


def _joint_eigenbasis(a: NDArray, b: NDArray) -> NDArray[np.complex128]:
    """Columns: joint eigenvectors ordered by eigenvalue signs (++, +-, -+, --)."""
    eye = np.eye(4)
    cols = []
    for sa in (1, -1):
        for sb in (1, -1):
            P = (eye + sa * a) @ (eye + sb * b) / 4.0
            k = int(np.argmax(np.linalg.norm(P, axis=0)))
            vec = P[:, k] / np.linalg.norm(P[:, k])
            first = vec[np.flatnonzero(np.abs(vec) > 1e-12)[0]]
            cols.append(vec * np.exp(-1j * np.angle(first)))
    return np.array(cols).T


@dataclass(frozen=True)
class MubSet:
    bases: tuple[NDArray[np.complex128], ...]  # each 4x4, columns are states

    @property
    def states(self) -> list[NDArray[np.complex128]]:
        return [b[:, i] for b in self.bases for i in range(4)]

    def as_array(self) -> NDArray[np.complex128]:
        """20x4 array, one input state per row."""
        return np.array(self.states)


@lru_cache(maxsize=1)
def mub20() -> MubSet:
    """Five mutually unbiased bases of C^4 from the Pauli partition."""
    bases = tuple(_joint_eigenbasis(_pauli(a), _pauli(b)) for a, b in MUB_PARTITION)
    for b in bases:
        b.setflags(write=False)
    return MubSet(bases)


def fidelity_pure(phi, psi) -> float:
    return float(abs(np.vdot(phi, psi)) ** 2)


def fidelity_mixed(phi, rho) -> float:
    phi = np.asarray(phi)
    value = np.vdot(phi, np.asarray(rho) @ phi)
    if abs(value.imag) > 1e-10:
        raise ValueError(f"<phi|rho|phi> has imaginary part {value.imag:.3g}")
    return float(value.real)


# --------------------------------------------------------------------------
# ideal gates

_LOWER = np.array([[0, 1], [0, 0]], dtype=complex)  # |down><up|, down = index 0


def rotation(phase: float) -> NDArray[np.complex128]:
    """Single-qubit pi/2 rotation produced by a resonant tone of ``phase``."""
    gen = np.exp(1j * phase) * _LOWER
    return expm(-0.25j * math.pi * (gen + gen.conj().T))


def on_qubit(U: NDArray, qubit: int) -> NDArray[np.complex128]:
    """Embed a 2x2 gate; the logical space is ``qubit2 (x) qubit1``."""
    if qubit == 1:
        return np.kron(np.eye(2), U)
    if qubit == 2:
        return np.kron(U, np.eye(2))
    raise ValueError(f"qubit must be 1 or 2, got {qubit!r}")


def cnot(control: int = CNOT_CONTROL) -> NDArray[np.complex128]:
    """Flip the target qubit when the control is up."""
    perm = [0, 3, 2, 1] if control == 1 else [0, 1, 3, 2]
    return np.eye(4, dtype=complex)[:, perm]


def ideal_gate(name: str) -> NDArray[np.complex128]:
    """Named ideal gate: ``I``, ``CNOT``, ``CNOT21`` or a rotation like ``Ybar2``."""
    if name == "I":
        return np.eye(4, dtype=complex)
    if name in ("CNOT", "CNOT12"):
        return cnot(CNOT_CONTROL)
    if name == "CNOT21":
        return cnot(3 - CNOT_CONTROL)
    axis, qubit = name[:-1], name[-1:]
    if axis in AXIS_PHASES and qubit in ("1", "2"):
        return on_qubit(rotation(AXIS_PHASES[axis]), int(qubit))
    raise ValueError(f"unknown gate {name!r}")


GATE_NAMES = ("I", "CNOT", "CNOT21") + tuple(f"{a}{q}" for q in (1, 2) for a in AXIS_PHASES)


# --------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class FidelityReport:
    gate: str
    per_state: tuple[float, ...]
    average: float
    params: dict = field(default_factory=dict)
    rates: DephasingRates | None = None

    @property
    def minimum(self) -> float:
        return min(self.per_state)

    @property
    def maximum(self) -> float:
        return max(self.per_state)

    def to_dict(self) -> dict:
        return {
            "gate": self.gate,
            "average": self.average,
            "min": self.minimum,
            "max": self.maximum,
            "per_state": list(self.per_state),
            "params": self.params,
            "gamma_per_ns": None if self.rates is None else [self.rates.gamma1, self.rates.gamma2],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def csv_row(self) -> str:
        return ",".join(format(x, ".12g") for x in (self.average, self.minimum, self.maximum))


def state_fidelities(
    sched: Schedule, em: EffectiveModel, ideal: NDArray, rates: DephasingRates | None = None, states=None
) -> NDArray[np.float64]:
    """Fidelity of the simulated output with ``ideal @ input`` for each input.

    Both ``|<phi|psi>|^2`` and ``<phi|rho|phi>`` ignore a global phase on
    the ideal gate, so no phase is fitted.
    """
    states = mub20().as_array() if states is None else np.atleast_2d(np.asarray(states, dtype=complex))
    targets = states @ np.asarray(ideal).T
    if rates is None or rates.is_zero:
        out = states @ schedule_unitary(sched, em).T
        return np.abs(np.einsum("ki,ki->k", targets.conj(), out)) ** 2
    S = schedule_superoperator(sched, em, rates)
    values = []
    for psi, phi in zip(states, targets):
        rho = apply_superoperator(S, np.outer(psi, psi.conj()))
        check_density_matrix(rho)
        values.append(fidelity_mixed(phi, rho))
    return np.array(values)


def average_gate_fidelity(
    sched: Schedule,
    em: EffectiveModel,
    ideal: NDArray,
    rates: DephasingRates | None = None,
    gate: str = "",
) -> FidelityReport:
    values = state_fidelities(sched, em, ideal, rates)
    d = em.params
    params = {
        "D1": d.m1.D, "E1": d.m1.E, "g1": d.m1.g,
        "D2": d.m2.D, "E2": d.m2.E, "g2": d.m2.g,
        "J_perp": d.j.J_perp, "J_zz": d.j.J_zz,
    }
    return FidelityReport(
        gate=gate or sched.name,
        per_state=tuple(float(x) for x in values),
        average=float(np.mean(values)),
        params=params,
        rates=rates,
    )


def make_scorer(em: EffectiveModel, ideal: NDArray, rates: DephasingRates | None = None) -> Callable[[Schedule], float]:
    """Average-MUB-fidelity objective for :func:`clockdimer.pulses.calibrate_schedule`."""
    states = mub20().as_array()

    def score(sched: Schedule) -> float:
        return float(np.mean(state_fidelities(sched, em, ideal, rates, states)))

    return score
