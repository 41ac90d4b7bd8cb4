"""Spectra, level diagrams and the four-level logical manifold of the dimer.

Logical labels follow the ordering under which the drive term of spin 1
connects ``|dd>`` to ``|du>``: the *first* arrow is spin 2 and the
*second* arrow is spin 1, with "up" meaning the upper clock state ``|+>``.
Index ``k = 2*b2 + b1`` (``b = 1`` for up) so the logical basis order is
``(dd, du, ud, uu)`` and the 4-dim space factorises as ``qubit2 (x) qubit1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray

from .model import (
    ZERO_FIELD,
    DimerParams,
    FieldVector,
    MonomerParams,
    Operator,
    clock_states,
    dimer_hamiltonian,
    drive_operators,
    is_hermitian,
    monomer_hamiltonian,
)

LABELS = ("↓↓", "↓↑", "↑↓", "↑↑")
ASCII_LABELS = ("dd", "du", "ud", "uu")

#: Default finite-difference step for clock checks, mT.
CLOCK_STEP_MT = 0.01


class TruncationError(ValueError):
    """The four lowest dimer levels do not form an isolated clock manifold."""


class NonHermitianError(ValueError):
    pass


def diagonalize(H: Operator, rtol: float = 1e-10) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    """Ascending eigenvalues and orthonormal eigenvectors (columns) of ``H``."""
    H = np.asarray(H, dtype=complex)
    if not is_hermitian(H, rtol):
        raise NonHermitianError("diagonalize requires a Hermitian operator")
    return np.linalg.eigh(0.5 * (H + H.conj().T))


def reference_products() -> NDArray[np.complex128]:
    """Rows are the uncoupled clock products for ``(dd, du, ud, uu)``."""
    plus, minus = clock_states()
    one = {0: minus, 1: plus}
    rows = []
    for k in range(4):
        b2, b1 = divmod(k, 2)
        rows.append(np.kron(one[b1], one[b2]))
    return np.array(rows)


# --------------------------------------------------------------------------
# level diagrams


@dataclass(frozen=True)
class LevelDiagram:
    axis: str
    fields: NDArray[np.float64]
    energies: NDArray[np.float64]

    def __post_init__(self):
        if len(self.fields) < 2:
            raise ValueError("a level diagram needs at least two field samples")
        if self.energies.shape[0] != len(self.fields):
            raise ValueError("one row of energies per field sample")

    def lowest(self, n: int) -> LevelDiagram:
        return LevelDiagram(self.axis, self.fields, self.energies[:, :n])

    def to_csv(self, path: str | Path, header: Sequence[str] = ()) -> None:
        lines = [f"# {h}" for h in header]
        cols = ["field_mT"] + [f"E{k}_GHz" for k in range(self.energies.shape[1])]
        lines.append(",".join(cols))
        for b, row in zip(self.fields, self.energies):
            lines.append(",".join(format(float(x), ".12g") for x in (b, *row)))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _hamiltonian(params: MonomerParams | DimerParams, B: FieldVector) -> Operator:
    if isinstance(params, DimerParams):
        return dimer_hamiltonian(params, B)
    return monomer_hamiltonian(params, B)


def level_diagram(
    params: MonomerParams | DimerParams,
    axis: str = "z",
    field_range: tuple[float, float] = (-50.0, 50.0),
    steps: int = 201,
) -> LevelDiagram:
    """Sorted eigenvalues on a uniform grid of fields along ``axis``."""
    if steps < 3:
        raise ValueError("steps must be >= 3")
    fields = np.linspace(field_range[0], field_range[1], steps)
    energies = np.array(
        [np.linalg.eigvalsh(_hamiltonian(params, FieldVector.along(axis, b))) for b in fields]
    )
    return LevelDiagram(axis.lower(), fields, energies)


# --------------------------------------------------------------------------
# effective four-level model


class DriveElements(NamedTuple):
    """Matrix elements of a drive operator on the four resonant transitions.

    ``ch1_*`` flip spin 1 (``dd-du`` and ``ud-uu``), ``ch2_*`` flip spin 2
    (``dd-ud`` and ``du-uu``).
    """

    ch1_low: float
    ch1_high: float
    ch2_low: float
    ch2_high: float

    def channel(self, ch: int) -> tuple[float, float]:
        if ch == 1:
            return self.ch1_low, self.ch1_high
        if ch == 2:
            return self.ch2_low, self.ch2_high
        raise ValueError(f"channel must be 1 or 2, got {ch!r}")

    def mean(self, ch: int) -> float:
        return 0.5 * sum(self.channel(ch))


# (row, col) in the logical basis for each transition
TRANSITIONS = {1: ((0, 1), (2, 3)), 2: ((0, 2), (1, 3))}


@dataclass(frozen=True)
class EffectiveModel:
    """The dimer restricted to its four clock-derived levels.

    ``basis`` rows are the 9-dim logical vectors.  ``elements`` are matrix
    elements of the rf coupling ``(g1 S1z + g2 S2z)/g_mean``: both spins see
    the same field because the principal frames are colinear.  ``spin_elements``
    keep ``S1z`` (channel 1) and ``S2z`` (channel 2) alone.
    """

    params: DimerParams
    basis: NDArray[np.complex128]
    energies: NDArray[np.float64]
    theta: float
    delta: float
    omega1: float
    omega2: float
    elements: DriveElements
    spin_elements: DriveElements
    gap: float
    overlaps: NDArray[np.float64] = field(repr=False)

    labels = LABELS

    @property
    def g_drive(self) -> float:
        return self.params.g_mean

    @property
    def delta_closed_form(self) -> float:
        """``-2 Dbar Jperp^2 / (Dbar^2 - Ebar^2)``, GHz."""
        d = self.params
        return -2.0 * d.D_mean * d.j.J_perp**2 / (d.D_mean**2 - d.E_mean**2)

    @property
    def delta_perturbative(self) -> float:
        """Second-order estimate of ``delta`` from the outer-level shifts, GHz."""
        d = self.params
        return d.D_mean * d.j.J_perp**2 / (2.0 * (d.D_mean**2 - d.E_mean**2))

    @property
    def theta_closed_form(self) -> float:
        return mixing_angle(self.params)

    def transition_frequencies(self) -> dict[tuple[str, str], float]:
        """All six intra-manifold transition frequencies (GHz), keyed by labels."""
        out = {}
        for i in range(4):
            for j in range(i + 1, 4):
                out[(LABELS[i], LABELS[j])] = float(self.energies[j] - self.energies[i])
        return out


def mixing_angle(d: DimerParams) -> float:
    """Closed-form angle in ``|ud> = cos(t)|ud>_0 + sin(t)|du>_0``.

    The middle block in the basis ``(|ud>_0, |du>_0)`` is
    ``[[-dE, Jzz], [Jzz, dE]]`` so ``tan(2t) = -Jzz/dE``.
    """
    dE, jzz = d.delta_E, d.j.J_zz
    if dE == 0.0:
        return math.copysign(math.pi / 4, jzz) if jzz else 0.0
    return -0.5 * math.atan(jzz / dE)


def _assign_logical_states(
    w: NDArray[np.float64], v: NDArray[np.complex128], refs: NDArray[np.complex128], tol: float = 1e-9
) -> NDArray[np.complex128]:
    """Rotate the 4 lowest eigenvectors onto the references, cluster by cluster.

    Non-degenerate levels are taken as they are; within a degenerate cluster
    the references with the largest projections (lower index on ties) are
    projected in and symmetrically orthonormalised.
    """
    clusters: list[list[int]] = [[0]]
    for k in range(1, 4):
        if w[k] - w[clusters[-1][-1]] <= tol * max(1.0, abs(w[k])):
            clusters[-1].append(k)
        else:
            clusters.append([k])

    out = np.zeros((4, v.shape[0]), dtype=complex)
    free = list(range(4))
    for cluster in clusters:
        sub = v[:, cluster]
        weight = np.linalg.norm(refs[free] @ sub.conj(), axis=1) ** 2
        order = sorted(range(len(free)), key=lambda i: (-round(weight[i], 12), free[i]))
        chosen = sorted(free[i] for i in order[: len(cluster)])
        proj = (refs[chosen].conj() @ sub).conj().T  # columns: coefficients in `sub`
        # symmetric orthonormalisation in the cluster subspace
        u, _, vh = np.linalg.svd(proj, full_matrices=False)
        coeffs = u @ vh
        for col, k in enumerate(chosen):
            out[k] = sub @ coeffs[:, col]
            free.remove(k)
    return out


def extract_effective_model(d: DimerParams) -> EffectiveModel:
    """Label the four lowest zero-field levels and compute drive parameters."""
    H = dimer_hamiltonian(d)
    w, v = diagonalize(H)
    gap = float(w[4] - w[3])
    coupling = max(abs(d.j.J_perp), abs(d.j.J_zz))
    if not gap > max(10.0 * coupling, 1e-9 * max(1.0, abs(w[3]))):
        raise TruncationError(
            f"four lowest levels not isolated: gap to fifth level {gap:.6g} GHz "
            f"vs exchange {coupling:.6g} GHz"
        )

    refs = reference_products()
    basis = _assign_logical_states(w[:4], v[:, :4], refs)
    overlaps = np.abs(np.einsum("ki,ki->k", refs.conj(), basis)) ** 2
    if np.any(overlaps <= 0.5):
        raise TruncationError(
            "four lowest levels are not the clock-state products "
            f"(overlaps {np.round(overlaps, 4).tolist()})"
        )
    # gauge: overlap with the reference product real and positive
    phases = np.einsum("ki,ki->k", refs.conj(), basis)
    basis = basis * np.exp(-1j * np.angle(phases))[:, None]

    energies = np.real(np.einsum("ki,ij,kj->k", basis.conj(), H, basis))
    e_dd, e_du, e_ud, e_uu = energies
    omega1 = 0.5 * ((e_du - e_dd) + (e_uu - e_ud))
    omega2 = 0.5 * ((e_ud - e_dd) + (e_uu - e_du))
    delta = 0.5 * (e_du + e_ud - e_dd - e_uu)

    s1, s2 = drive_operators()
    coupling_op = (d.m1.g * s1 + d.m2.g * s2) / d.g_mean
    elements = DriveElements(*_transition_elements(basis, coupling_op, coupling_op))
    spin_elements = DriveElements(*_transition_elements(basis, s1, s2))

    ud = basis[2]
    theta = math.atan2(float(np.real(refs[1].conj() @ ud)), float(np.real(refs[2].conj() @ ud)))

    return EffectiveModel(
        params=d,
        basis=basis,
        energies=energies,
        theta=theta,
        delta=float(delta),
        omega1=float(omega1),
        omega2=float(omega2),
        elements=elements,
        spin_elements=spin_elements,
        gap=gap,
        overlaps=overlaps,
    )


def _transition_elements(basis, op1, op2) -> list[float]:
    vals = []
    for ch, op in ((1, op1), (2, op2)):
        for i, j in TRANSITIONS[ch]:
            x = basis[i].conj() @ op @ basis[j]
            if abs(x.imag) > 1e-9 or x.real <= 0:
                raise ValueError(f"drive element <{LABELS[i]}|S|{LABELS[j]}> = {x} is not real-positive")
            vals.append(float(x.real))
    return vals


# --------------------------------------------------------------------------
# perturbative forms


@dataclass(frozen=True)
class PerturbativeStates:
    """Second-order compositions of the outer logical states.

    ``uu`` and ``dd`` map component names (``"pp"``, ``"00"``, ``"mm"``) to
    amplitudes on ``|++>``, ``|00>`` and ``|-->`` in the gauge of
    :func:`reference_products`.
    """

    E_pp: float
    E_mm: float
    uu: dict[str, float]
    dd: dict[str, float]
    shift_uu: float
    shift_dd: float

    def energies(self, d: DimerParams) -> NDArray[np.float64]:
        """Closed-form manifold energies in logical order (GHz)."""
        mid = math.hypot(d.delta_E, d.j.J_zz)
        sign = 1.0 if d.delta_E >= 0 else -1.0
        return np.array(
            [
                self.E_mm + self.shift_dd,
                -2.0 * d.D_mean + sign * mid,
                -2.0 * d.D_mean - sign * mid,
                self.E_pp + self.shift_uu,
            ]
        )


def perturbative_states(d: DimerParams) -> PerturbativeStates:
    jp = d.j.J_perp
    if abs(jp) >= d.E_mean:
        raise ValueError("perturbative forms need |J_perp| < Ebar")
    e_pp = 2.0 * (-d.D_mean + d.E_mean)
    e_mm = 2.0 * (-d.D_mean - d.E_mean)
    # <00|V|++> = +J_perp, <00|V|--> = -J_perp with V the transverse exchange
    uu = {
        "pp": 1.0 - jp**2 / (2.0 * e_pp**2),
        "00": jp / e_pp,
        "mm": jp**2 / ((e_mm - e_pp) * e_pp),
    }
    dd = {
        "mm": 1.0 - jp**2 / (2.0 * e_mm**2),
        "00": -jp / e_mm,
        "pp": -(jp**2) / ((e_mm - e_pp) * e_mm),
    }
    return PerturbativeStates(
        E_pp=e_pp,
        E_mm=e_mm,
        uu=uu,
        dd=dd,
        shift_uu=jp**2 / (2.0 * (-d.D_mean + d.E_mean)),
        shift_dd=jp**2 / (2.0 * (-d.D_mean - d.E_mean)),
    )


# --------------------------------------------------------------------------
# clock-transition checks


@dataclass(frozen=True)
class ClockCheck:
    axis: str
    step: float
    #: one-sided (forward, backward) and central slopes per transition, GHz/mT
    forward: NDArray[np.float64]
    backward: NDArray[np.float64]
    central: NDArray[np.float64]

    @property
    def max_slope(self) -> float:
        return float(np.max(np.abs(np.concatenate([self.forward, self.backward, self.central]))))


def _manifold_transitions(params: MonomerParams | DimerParams, B: FieldVector) -> NDArray[np.float64]:
    w = np.linalg.eigvalsh(_hamiltonian(params, B))
    n = 4 if isinstance(params, DimerParams) else 2
    low = w[:n]
    return np.array([low[j] - low[i] for i in range(n) for j in range(i + 1, n)])


def clock_derivative_check(
    params: MonomerParams | DimerParams, axis: str = "z", step: float = CLOCK_STEP_MT
) -> ClockCheck:
    """Slopes ``df/dB`` at zero field of the low-lying transitions.

    For a dimer these are the six transitions inside the four-level manifold,
    for a monomer the single transition between its two lowest levels.
    Levels are sorted, so a level crossing at B=0 is a kink; one-sided
    second-order differences expose it where the central one cancels.
    """
    f = {k: _manifold_transitions(params, FieldVector.along(axis, k * step)) for k in (-2, -1, 0, 1, 2)}
    forward = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * step)
    backward = (3 * f[0] - 4 * f[-1] + f[-2]) / (2 * step)
    central = (8 * (f[1] - f[-1]) - (f[2] - f[-2])) / (12 * step)
    return ClockCheck(axis.lower(), step, forward, backward, central)


@dataclass(frozen=True)
class SingleQubitErrors:
    """Drive-element mismatches between the two transitions of each channel."""

    mismatch_1: float
    mismatch_2: float
    spin_mismatch_1: float
    spin_mismatch_2: float
    scale_j_perp: float
    scale_j_zz: float


def single_qubit_error_estimates(em: EffectiveModel | DimerParams) -> SingleQubitErrors:
    if isinstance(em, DimerParams):
        em = extract_effective_model(em)
    d = em.params
    el, sp = em.elements, em.spin_elements
    return SingleQubitErrors(
        mismatch_1=el.ch1_low - el.ch1_high,
        mismatch_2=el.ch2_low - el.ch2_high,
        spin_mismatch_1=sp.ch1_low - sp.ch1_high,
        spin_mismatch_2=sp.ch2_low - sp.ch2_high,
        scale_j_perp=d.j.J_perp**2 / (d.D_mean * d.E_mean),
        scale_j_zz=abs(d.j.J_zz / d.delta_E) if d.delta_E else math.inf,
    )


def zero_field_spectrum(params: MonomerParams | DimerParams) -> NDArray[np.float64]:
    return np.linalg.eigvalsh(_hamiltonian(params, ZERO_FIELD))
