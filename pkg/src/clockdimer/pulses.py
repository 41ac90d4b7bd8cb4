"""Piecewise-constant pulse programs in the rotating frame of the dimer.

Each tone drives the transitions of one channel (channel 1 flips spin 1 at
``omega1``, channel 2 flips spin 2 at ``omega2``).  Within a segment the
interaction-picture Hamiltonian is constant, so segments are exact building
blocks for both unitary and Lindblad propagation.

Drive normalisation: a tone of amplitude ``B`` contributes
``(g muB B / 4h) * m`` to the off-diagonal entry of a transition whose
coupling matrix element is ``m``.  With this scale a 1 mT (10 G) tone
completes a pi/2 rotation in 17.9 ns.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .model import MU_B_GHZ_PER_MT, Operator
from .spectrum import TRANSITIONS, EffectiveModel

#: Tone phase of each named rotation axis.
AXIS_PHASES = {
    "X": 0.0,
    "Y": 0.5 * math.pi,
    "Xbar": math.pi,
    "Ybar": 1.5 * math.pi,
}

#: Entangling time used to seed the CNOT schedule, ns.
NOMINAL_ENTANGLING_TIME = 924.0

#: Free-evolution window explored by calibration, as multiples of nominal.
FREE_WINDOW = (0.2, 2.0)
#: Driven-segment window explored by calibration, relative.
DRIVEN_WINDOW = 0.10
CALIBRATION_RESOLUTION = 0.01  # ns
CALIBRATION_TOL = 1e-6


def drive_coefficient(g: float, amplitude: float) -> float:
    """Off-diagonal rotating-frame coupling per unit matrix element, GHz."""
    return g * MU_B_GHZ_PER_MT * amplitude / 4.0


@dataclass(frozen=True)
class Tone:
    channel: int
    amplitude: float  # mT
    phase: float = 0.0  # rad
    detuning: float = 0.0  # GHz, offset from the channel frequency

    def __post_init__(self):
        if self.channel not in (1, 2):
            raise ValueError(f"channel must be 1 or 2, got {self.channel!r}")
        if not self.amplitude >= 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude!r}")

    def to_dict(self) -> dict:
        return {
            "channel": self.channel,
            "amplitude_mT": self.amplitude,
            "phase_rad": self.phase,
            "detuning_GHz": self.detuning,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Tone:
        return cls(
            channel=int(d["channel"]),
            amplitude=float(d["amplitude_mT"]),
            phase=float(d.get("phase_rad", 0.0)),
            detuning=float(d.get("detuning_GHz", 0.0)),
        )


@dataclass(frozen=True)
class Segment:
    duration: float  # ns
    tones: tuple[Tone, ...] = ()
    label: str = ""

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"segment duration must be > 0, got {self.duration!r}")
        object.__setattr__(self, "tones", tuple(self.tones))
        channels = [t.channel for t in self.tones]
        if len(set(channels)) != len(channels):
            raise ValueError("at most one tone per channel in a segment")

    @property
    def is_free(self) -> bool:
        return not self.tones

    def to_dict(self) -> dict:
        d = {"duration_ns": self.duration, "tones": [t.to_dict() for t in self.tones]}
        if self.label:
            d["label"] = self.label
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Segment:
        return cls(
            duration=float(d["duration_ns"]),
            tones=tuple(Tone.from_dict(t) for t in d.get("tones", [])),
            label=d.get("label", ""),
        )


@dataclass(frozen=True)
class Schedule:
    segments: tuple[Segment, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("a schedule needs at least one segment")

    @property
    def duration(self) -> float:
        return sum(s.duration for s in self.segments)

    def with_durations(self, durations: Sequence[float]) -> Schedule:
        if len(durations) != len(self.segments):
            raise ValueError("one duration per segment")
        return Schedule(
            tuple(replace(s, duration=float(t)) for s, t in zip(self.segments, durations)),
            self.name,
        )

    def to_dict(self) -> dict:
        return {"name": self.name, "segments": [s.to_dict() for s in self.segments]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> Schedule:
        return cls(tuple(Segment.from_dict(s) for s in d["segments"]), d.get("name", ""))

    @classmethod
    def from_json(cls, text: str) -> Schedule:
        return cls.from_dict(json.loads(text))


# --------------------------------------------------------------------------
# Hamiltonians

_N1 = np.diag([0.0, 1.0, 0.0, 1.0])  # spin 1 up
_N2 = np.diag([0.0, 0.0, 1.0, 1.0])  # spin 2 up


def frame_generator(seg: Segment) -> Operator:
    """Diagonal ``sum_k detuning_k N_k`` of the per-segment tone frame (GHz)."""
    out = np.zeros((4, 4), dtype=complex)
    for tone in seg.tones:
        out += tone.detuning * (_N1 if tone.channel == 1 else _N2)
    return out


def rwa_hamiltonian(em: EffectiveModel, seg: Segment) -> Operator:
    """Constant 4x4 interaction-picture Hamiltonian of a segment (GHz).

    With nonzero tone detunings this is the Hamiltonian in the frame that
    co-rotates with the tones (tone phases referenced to the segment start);
    :func:`clockdimer.evolve.segment_unitary` maps back with
    ``exp(-2 pi i F t)``, ``F`` the :func:`frame_generator`.
    """
    H = np.diag([0.0, em.delta, em.delta, 0.0]).astype(complex)
    for tone in seg.tones:
        c = drive_coefficient(em.g_drive, tone.amplitude) * np.exp(1j * tone.phase)
        for (i, j), m in zip(TRANSITIONS[tone.channel], em.elements.channel(tone.channel)):
            H[i, j] += c * m
            H[j, i] += np.conj(c) * m
    return H - frame_generator(seg)


def pi2_duration(em: EffectiveModel, channel: int, amplitude: float = 1.0) -> float:
    """Quarter Rabi cycle at the channel's mean matrix element, ns."""
    rabi = 2.0 * drive_coefficient(em.g_drive, amplitude) * em.elements.mean(channel)
    return 1.0 / (4.0 * rabi)


def pi2_segment(em: EffectiveModel, channel: int, phase: float = 0.0, amplitude: float = 1.0) -> Segment:
    return Segment(
        pi2_duration(em, channel, amplitude),
        (Tone(channel, amplitude, phase),),
        label=f"pi/2 ch{channel} phase={phase:.6g}",
    )


def two_tone_segment(em: EffectiveModel, phase1: float, phase2: float, amplitude: float = 1.0) -> Segment:
    """Simultaneous pi/2 rotations on both channels with a shared duration.

    The slower channel runs at ``amplitude``; the other is scaled down so
    both finish together.
    """
    t1 = pi2_duration(em, 1, amplitude)
    t2 = pi2_duration(em, 2, amplitude)
    t = max(t1, t2)
    return Segment(
        t,
        (Tone(1, amplitude * t1 / t, phase1), Tone(2, amplitude * t2 / t, phase2)),
        label=f"pi/2 ch1 phase={phase1:.6g} + ch2 phase={phase2:.6g}",
    )


def free_evolution_segment(t: float) -> Segment:
    return Segment(t, (), label="free evolution")


def rotation_segment(em: EffectiveModel, name: str, amplitude: float = 1.0) -> Segment:
    """Segment for a named pi/2 rotation such as ``"X1"`` or ``"Ybar2"``."""
    axis, qubit = name[:-1], int(name[-1])
    if axis not in AXIS_PHASES or qubit not in (1, 2):
        raise ValueError(f"unknown rotation {name!r}")
    seg = pi2_segment(em, qubit, AXIS_PHASES[axis], amplitude)
    return replace(seg, label=name)


def cnot_schedule(
    em: EffectiveModel, entangling_time: float = NOMINAL_ENTANGLING_TIME, amplitude: float = 1.0
) -> Schedule:
    """``X1 [Ybar1 X2] [Xbar1 Ybar2] U_J Y2`` laid out in time order."""
    p = AXIS_PHASES
    segments = (
        replace(pi2_segment(em, 2, p["Y"], amplitude), label="Y2"),
        replace(free_evolution_segment(entangling_time), label="U_J"),
        replace(two_tone_segment(em, p["Xbar"], p["Ybar"], amplitude), label="[Xbar1 Ybar2]"),
        replace(two_tone_segment(em, p["Ybar"], p["X"], amplitude), label="[Ybar1 X2]"),
        replace(pi2_segment(em, 1, p["X"], amplitude), label="X1"),
    )
    return Schedule(segments, "CNOT")


def entangling_time_candidates(em: EffectiveModel) -> dict[str, float]:
    """Free-evolution times (ns) implied by different readings of ``pi/(2 delta)``."""
    closed = abs(em.delta_closed_form)
    return {
        "inverse_closed_form": 1.0 / closed if closed else math.inf,
        "quarter_turn_closed_form": 1.0 / (4.0 * closed) if closed else math.inf,
        "quarter_turn_exact": 1.0 / (4.0 * abs(em.delta)) if em.delta else math.inf,
    }


# --------------------------------------------------------------------------
# calibration


@dataclass(frozen=True)
class CalibrationResult:
    schedule: Schedule
    fidelity: float
    initial_fidelity: float
    adjustments: tuple[float, ...]  # ns, per segment
    sweeps: int
    history: tuple[float, ...] = field(default=(), repr=False)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Maximise a unimodal ``f`` on ``[lo, hi]`` to bracket width ``tol``."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def calibrate_schedule(
    sched: Schedule,
    scorer: Callable[[Schedule], float],
    resolution: float = CALIBRATION_RESOLUTION,
    tol: float = CALIBRATION_TOL,
    max_sweeps: int = 50,
) -> CalibrationResult:
    """Coordinate-wise golden-section search over segment durations.

    Windows are anchored on the input schedule: driven segments may move by
    ``DRIVEN_WINDOW`` relative, free segments span ``FREE_WINDOW`` times
    their nominal length.  A candidate is only accepted if it raises the
    score, so the result is never worse than the input.
    """
    nominal = [s.duration for s in sched.segments]
    windows = []
    for s, t in zip(sched.segments, nominal):
        if s.is_free:
            windows.append((FREE_WINDOW[0] * t, FREE_WINDOW[1] * t))
        else:
            windows.append(((1 - DRIVEN_WINDOW) * t, (1 + DRIVEN_WINDOW) * t))

    current = list(nominal)
    best = initial = scorer(sched)
    history = [best]
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        start = best
        for k, (lo, hi) in enumerate(windows):

            def trial(t, k=k):
                durations = list(current)
                durations[k] = t
                return scorer(sched.with_durations(durations))

            t_new, f_new = golden_section_max(trial, lo, hi, resolution)
            if f_new > best:
                current[k] = t_new
                best = f_new
            history.append(best)
        if best - start < tol:
            break

    return CalibrationResult(
        schedule=sched.with_durations(current),
        fidelity=best,
        initial_fidelity=initial,
        adjustments=tuple(c - n for c, n in zip(current, nominal)),
        sweeps=sweeps,
        history=tuple(history),
    )
