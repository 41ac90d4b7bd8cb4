"""Spin-1 operators and the monomer / dimer spin Hamiltonians.

Units: energies are ordinary frequencies (energy/h) in GHz, fields in mT.
Per-spin basis order is ``{|+1>, |0>, |-1>}``; the dimer uses the
lexicographic product ``spin1 (x) spin2`` so index ``3*i + j`` is
``|m1_i, m2_j>``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

#: Bohr magneton over Planck's constant, GHz per mT.
MU_B_GHZ_PER_MT = 13.9962449e-3

#: Relative Frobenius tolerance used for Hermiticity checks.
HERMITIAN_RTOL = 1e-12

Operator = NDArray[np.complex128]


def is_hermitian(op: Operator, rtol: float = HERMITIAN_RTOL) -> bool:
    """True if ``op`` equals its adjoint to ``rtol`` relative Frobenius norm."""
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        return False
    scale = max(np.linalg.norm(op), 1.0)
    return bool(np.linalg.norm(op - op.conj().T) <= rtol * scale)


@dataclass(frozen=True)
class MonomerParams:
    """Single S=1 nanomagnet: easy-axis ``D``, transverse ``E`` (GHz), g-factor.

    Only sign and finiteness are checked here.  Whether ``D`` dominates ``E``
    (so that the clock doublet is the low-energy pair) is tested where it
    matters, in :func:`clockdimer.spectrum.extract_effective_model`.
    """

    D: float
    E: float
    g: float = 2.0

    def __post_init__(self):
        for name in ("D", "E", "g"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.D < 0 or self.E < 0:
            raise ValueError(f"D and E must be non-negative (D={self.D}, E={self.E})")


@dataclass(frozen=True)
class ExchangeParams:
    """Diagonal exchange: ``J_perp (S1x S2x + S1y S2y) + J_zz S1z S2z`` in GHz."""

    J_perp: float = 0.1
    J_zz: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.J_perp) and math.isfinite(self.J_zz)):
            raise ValueError("exchange constants must be finite")


@dataclass(frozen=True)
class DimerParams:
    m1: MonomerParams
    m2: MonomerParams
    j: ExchangeParams = ExchangeParams()

    def __post_init__(self):
        scale = min(self.m1.E, self.m2.E)
        coupling = max(abs(self.j.J_perp), abs(self.j.J_zz))
        if coupling > 0 and coupling > 0.1 * scale:
            warnings.warn(
                f"exchange {coupling:g} GHz is not small against min(E1, E2) = {scale:g} GHz; "
                "the four-level effective model may be inaccurate",
                stacklevel=3,
            )

    @property
    def D_mean(self) -> float:
        return 0.5 * (self.m1.D + self.m2.D)

    @property
    def E_mean(self) -> float:
        return 0.5 * (self.m1.E + self.m2.E)

    @property
    def delta_E(self) -> float:
        """``E1 - E2``."""
        return self.m1.E - self.m2.E

    @property
    def g_mean(self) -> float:
        return 0.5 * (self.m1.g + self.m2.g)

    def with_exchange(self, J_perp: float | None = None, J_zz: float | None = None) -> DimerParams:
        return DimerParams(
            self.m1,
            self.m2,
            ExchangeParams(
                self.j.J_perp if J_perp is None else J_perp,
                self.j.J_zz if J_zz is None else J_zz,
            ),
        )


def cr7mn_heterodimer(J_perp: float = 0.1, J_zz: float = 0.0, g: float = 2.0) -> DimerParams:
    """Green (spin 1) / purple (spin 2) Cr7Mn heterodimer parameters."""
    return DimerParams(
        MonomerParams(D=21.0, E=1.9, g=g),
        MonomerParams(D=16.5, E=2.6, g=g),
        ExchangeParams(J_perp=J_perp, J_zz=J_zz),
    )


@dataclass(frozen=True)
class FieldVector:
    """Static field in mT, components in the (shared) principal-axis frame."""

    Bx: float = 0.0
    By: float = 0.0
    Bz: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(b) for b in (self.Bx, self.By, self.Bz)):
            raise ValueError("field components must be finite")

    @classmethod
    def along(cls, axis: str, value: float) -> FieldVector:
        axis = axis.lower()
        if axis not in ("x", "y", "z"):
            raise ValueError(f"axis must be one of x, y, z; got {axis!r}")
        return cls(**{"B" + axis: value})

    def as_array(self) -> NDArray[np.float64]:
        return np.array([self.Bx, self.By, self.Bz])


ZERO_FIELD = FieldVector()


def spin1_operators() -> tuple[Operator, Operator, Operator]:
    """``(Sx, Sy, Sz)`` for S=1 in the basis ``{|+1>, |0>, |-1>}``."""
    r2 = math.sqrt(2.0)
    s_plus = np.array([[0, r2, 0], [0, 0, r2], [0, 0, 0]], dtype=complex)
    s_minus = s_plus.conj().T
    sx = 0.5 * (s_plus + s_minus)
    sy = -0.5j * (s_plus - s_minus)
    sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    return sx, sy, sz


def zeeman_coefficient(g: float) -> float:
    """Zeeman energy per unit spin per mT, GHz/mT."""
    return g * MU_B_GHZ_PER_MT


def monomer_hamiltonian(p: MonomerParams, B: FieldVector = ZERO_FIELD) -> Operator:
    """``-D Sz^2 + E (Sx^2 - Sy^2) + g muB S.B / h`` (GHz, 3x3)."""
    sx, sy, sz = spin1_operators()
    h = -p.D * sz @ sz + p.E * (sx @ sx - sy @ sy)
    k = zeeman_coefficient(p.g)
    h = h + k * (B.Bx * sx + B.By * sy + B.Bz * sz)
    return h


def exchange_hamiltonian(j: ExchangeParams) -> Operator:
    sx, sy, sz = spin1_operators()
    return j.J_perp * (np.kron(sx, sx) + np.kron(sy, sy)) + j.J_zz * np.kron(sz, sz)


def dimer_hamiltonian(d: DimerParams, B: FieldVector = ZERO_FIELD) -> Operator:
    """Full 9x9 dimer Hamiltonian; the same field acts on both spins."""
    eye = np.eye(3)
    h1 = monomer_hamiltonian(d.m1, B)
    h2 = monomer_hamiltonian(d.m2, B)
    return np.kron(h1, eye) + np.kron(eye, h2) + exchange_hamiltonian(d.j)


def drive_operators() -> tuple[Operator, Operator]:
    """``(S1z (x) I, I (x) S2z)`` on the 9-dim product space."""
    _, _, sz = spin1_operators()
    eye = np.eye(3)
    return np.kron(sz, eye), np.kron(eye, sz)


def clock_states() -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """Zero-field clock doublet ``(|+>, |->) = (|+1> +- |-1>)/sqrt(2)``."""
    r = 1.0 / math.sqrt(2.0)
    plus = np.array([r, 0.0, r], dtype=complex)
    minus = np.array([r, 0.0, -r], dtype=complex)
    return plus, minus
