"""Closed and open (pure-dephasing) evolution through pulse schedules.

Time is in ns and Hamiltonians in GHz, so a constant segment propagates with
``exp(-2 pi i H t)``.  Density matrices are vectorised row-major, for which
``vec(A rho B) = kron(A, B.T) vec(rho)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import expm

from .model import DimerParams, Operator, dimer_hamiltonian, drive_operators
from .pulses import Schedule, Segment, drive_coefficient, frame_generator, rwa_hamiltonian
from .spectrum import TRANSITIONS, EffectiveModel, extract_effective_model

TWO_PI = 2.0 * math.pi


class NumericalError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# closed systems


def hamiltonian_propagator(H: Operator, t: float) -> Operator:
    """``exp(-2 pi i H t)`` for Hermitian ``H`` via eigendecomposition."""
    w, v = np.linalg.eigh(H)
    U = (v * np.exp(-1j * TWO_PI * w * t)) @ v.conj().T
    # one Newton-Schulz step removes the O(1e-15) non-unitarity of eigh, which
    # otherwise shows up as norm drift over thousands of chained segments
    return 0.5 * U @ (3.0 * np.eye(U.shape[0]) - U.conj().T @ U)


def propagate_segment_pure(H: Operator, t: float, psi: NDArray[np.complex128]) -> NDArray[np.complex128]:
    return hamiltonian_propagator(H, t) @ psi


def _frame_return(seg: Segment) -> NDArray[np.complex128]:
    """Diagonal of ``exp(-2 pi i F t)`` taking the tone frame back to the drive frame."""
    f = np.real(np.diag(frame_generator(seg)))
    return np.exp(-1j * TWO_PI * f * seg.duration)


def segment_unitary(em: EffectiveModel, seg: Segment) -> Operator:
    U = hamiltonian_propagator(rwa_hamiltonian(em, seg), seg.duration)
    return _frame_return(seg)[:, None] * U


def schedule_unitary(sched: Schedule, em: EffectiveModel) -> Operator:
    U = np.eye(4, dtype=complex)
    for seg in sched.segments:
        U = segment_unitary(em, seg) @ U
    return U


def run_schedule_pure(sched: Schedule, em: EffectiveModel, psi0) -> NDArray[np.complex128]:
    psi = np.asarray(psi0, dtype=complex)
    for seg in sched.segments:
        psi = segment_unitary(em, seg) @ psi
    return psi


# --------------------------------------------------------------------------
# open systems


@dataclass(frozen=True)
class DephasingRates:
    """Pure-dephasing rates ``gamma_i = 1/T2_i`` in 1/ns."""

    gamma1: float = 0.0
    gamma2: float = 0.0

    def __post_init__(self):
        if not (self.gamma1 >= 0 and self.gamma2 >= 0):
            raise ValueError("dephasing rates must be >= 0")

    @classmethod
    def from_t2(cls, t2_us: float, t2_us_2: float | None = None) -> DephasingRates:
        """Rates from T2 in microseconds; ``inf`` gives zero dephasing."""

        def rate(t2):
            if t2 <= 0:
                raise ValueError(f"T2 must be > 0, got {t2!r}")
            return 0.0 if math.isinf(t2) else 1.0 / (1000.0 * t2)

        return cls(rate(t2_us), rate(t2_us if t2_us_2 is None else t2_us_2))

    @property
    def is_zero(self) -> bool:
        return self.gamma1 == 0 and self.gamma2 == 0


def sigma_z(qubit: int) -> NDArray[np.float64]:
    """Logical Pauli Z of a qubit (+1 for up) in the order ``(dd, du, ud, uu)``."""
    if qubit == 1:
        return np.diag([-1.0, 1.0, -1.0, 1.0])
    if qubit == 2:
        return np.diag([-1.0, -1.0, 1.0, 1.0])
    raise ValueError(f"qubit must be 1 or 2, got {qubit!r}")


def collapse_operators(rates: DephasingRates) -> list[NDArray[np.float64]]:
    return [0.5 * math.sqrt(g) * sigma_z(q) for q, g in ((1, rates.gamma1), (2, rates.gamma2))]


def lindblad_rhs(H: Operator, rho, rates: DephasingRates | None = None):
    """``-2 pi i [H, rho] + sum_i (2 L rho L^+ - rho L^+ L - L^+ L rho)``.

    Broadcasts over leading dimensions of ``rho``.
    """
    rho = np.asarray(rho, dtype=complex)
    out = -1j * TWO_PI * (H @ rho - rho @ H)
    if rates is not None:
        for L in collapse_operators(rates):
            LdL = L.conj().T @ L
            out = out + 2.0 * L @ rho @ L.conj().T - rho @ LdL - LdL @ rho
    return out


def liouvillian(H: Operator, rates: DephasingRates | None = None) -> NDArray[np.complex128]:
    """16x16 generator of :func:`lindblad_rhs` acting on row-major ``vec(rho)``."""
    n = H.shape[0]
    eye = np.eye(n)
    L = -1j * TWO_PI * (np.kron(H, eye) - np.kron(eye, H.T))
    if rates is not None:
        for C in collapse_operators(rates):
            CdC = C.conj().T @ C
            L = L + 2.0 * np.kron(C, C.conj()) - np.kron(eye, CdC.T) - np.kron(CdC, eye)
    return L


def segment_superoperator(em: EffectiveModel, seg: Segment, rates: DephasingRates | None) -> NDArray[np.complex128]:
    S = expm(liouvillian(rwa_hamiltonian(em, seg), rates) * seg.duration)
    w = _frame_return(seg)
    return np.kron(w, w.conj())[:, None] * S


def schedule_superoperator(sched: Schedule, em: EffectiveModel, rates: DephasingRates | None) -> NDArray[np.complex128]:
    S = np.eye(16, dtype=complex)
    for seg in sched.segments:
        S = segment_superoperator(em, seg, rates) @ S
    return S


def check_density_matrix(rho, trace_tol: float = 1e-9, herm_tol: float = 1e-10, pos_tol: float = 1e-6) -> None:
    rho = np.asarray(rho)
    if abs(np.trace(rho) - 1.0) > trace_tol:
        raise NumericalError(f"trace drifted to {np.trace(rho)}")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise NumericalError("density matrix lost Hermiticity")
    lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lo < -pos_tol:
        raise NumericalError(f"density matrix has negative eigenvalue {lo:.3g}")


def apply_superoperator(S, rho) -> NDArray[np.complex128]:
    rho = np.asarray(rho, dtype=complex)
    return (S @ rho.reshape(-1)).reshape(rho.shape)


def run_schedule_lindblad(
    sched: Schedule, em: EffectiveModel, rho0, rates: DephasingRates | None = None
) -> NDArray[np.complex128]:
    rho = apply_superoperator(schedule_superoperator(sched, em, rates), rho0)
    check_density_matrix(rho)
    return rho


# --------------------------------------------------------------------------
# independent RK4 oracle


def _drive_frame_hamiltonian(em: EffectiveModel, seg: Segment, tau: float) -> Operator:
    """Time-dependent drive-frame Hamiltonian at ``tau`` ns into ``seg``.

    Built directly from the tone list; detuned tones carry a running phase
    instead of a frame change.
    """
    H = np.zeros((4, 4), dtype=complex)
    H[1, 1] = H[2, 2] = em.delta
    for tone in seg.tones:
        amp = drive_coefficient(em.g_drive, tone.amplitude)
        ph = np.exp(1j * (tone.phase + TWO_PI * tone.detuning * tau))
        for (i, j), m in zip(TRANSITIONS[tone.channel], em.elements.channel(tone.channel)):
            H[i, j] += amp * m * ph
            H[j, i] += amp * m * np.conj(ph)
    return H


def _rk4(f, y, t0: float, duration: float, dt: float):
    n = max(1, math.ceil(duration / dt - 1e-9))
    h = duration / n
    t = t0
    for _ in range(n):
        k1 = f(t, y)
        k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def rk4_oracle(
    sched: Schedule,
    em: EffectiveModel,
    state,
    rates: DephasingRates | None = None,
    dt: float = 0.01,
    mode: str | None = None,
):
    """Fixed-step RK4 integration of the same dynamics; test-only oracle.

    ``mode`` is ``"pure"`` (state vectors, last axis 4) or ``"density"``
    (4x4 matrices, optionally stacked); by default 1-D input is pure.
    """
    if dt > 0.01:
        raise ValueError("rk4_oracle needs dt <= 0.01 ns")
    y = np.asarray(state, dtype=complex)
    if mode is None:
        mode = "pure" if y.ndim == 1 else "density"
    if mode == "pure" and rates is not None and not rates.is_zero:
        raise ValueError("dephasing needs mode='density'")
    for seg in sched.segments:
        static = not any(t.detuning for t in seg.tones)
        H0 = _drive_frame_hamiltonian(em, seg, 0.0) if static else None

        def H_at(tau, seg=seg, H0=H0):
            return H0 if H0 is not None else _drive_frame_hamiltonian(em, seg, tau)

        if mode == "pure":
            f = lambda tau, psi: -1j * TWO_PI * (psi @ H_at(tau).T)  # noqa: E731
        else:
            f = lambda tau, rho: lindblad_rhs(H_at(tau), rho, rates)  # noqa: E731
        y = _rk4(f, y, 0.0, seg.duration, dt)
    return y


def trace_distance(a, b) -> float:
    """Trace distance between density matrices, or between pure states."""
    a, b = np.asarray(a), np.asarray(b)
    if a.ndim == 1:
        a = np.outer(a, a.conj())
        b = np.outer(b, b.conj())
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


# --------------------------------------------------------------------------
# full 9-level validation


@dataclass(frozen=True)
class LeakageResult:
    leakage: float  # worst case over the four logical inputs
    per_state: tuple[float, ...]


def lab_drive_operator(d: DimerParams) -> Operator:
    s1, s2 = drive_operators()
    return (d.m1.g * s1 + d.m2.g * s2) / d.g_mean


def full_space_validation(
    d: DimerParams, sched: Schedule, dt: float = 0.001, em: EffectiveModel | None = None
) -> LeakageResult:
    """Leakage out of the four-level manifold under the 9-level lab-frame drive.

    Each tone becomes a linearly polarised field
    ``2 c cos(2 pi (omega_ch + detuning) t + phase)`` coupling to the summed
    ``Sz`` operator, with ``c`` the rotating-frame coefficient, so that the
    rotating-wave limit reproduces :func:`rwa_hamiltonian`.  Returns the
    population outside the lowest four eigenstates after the schedule,
    for each logical basis state as input.
    """
    if dt > 0.001:
        raise ValueError("full_space_validation needs dt <= 0.001 ns")
    em = em or extract_effective_model(d)
    H0 = dimer_hamiltonian(d)
    w, v = np.linalg.eigh(H0)
    H0 = H0 - np.mean(w[:4]) * np.eye(9)
    G = lab_drive_operator(d)
    omega = {1: em.omega1, 2: em.omega2}

    psi = em.basis.T.copy()  # columns are the four logical inputs
    t_abs = 0.0
    for seg in sched.segments:
        tones = [
            (2.0 * drive_coefficient(em.g_drive, t.amplitude), omega[t.channel], t.detuning, t.phase)
            for t in seg.tones
        ]
        t0 = t_abs

        def f(t, y, tones=tones, t0=t0):
            H = H0.copy()
            for a, om, det, ph in tones:
                H = H + a * math.cos(TWO_PI * (om * t + det * (t - t0)) + ph) * G
            return -1j * TWO_PI * (H @ y)

        psi = _rk4(f, psi, t_abs, seg.duration, dt)
        t_abs += seg.duration

    outside = v[:, 4:].conj().T @ psi
    per_state = np.sum(np.abs(outside) ** 2, axis=0)
    return LeakageResult(float(per_state.max()), tuple(float(x) for x in per_state))
