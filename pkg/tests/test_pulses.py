import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clockdimer.evolve import run_schedule_pure, schedule_unitary, segment_unitary
from clockdimer.fidelity import ideal_gate, make_scorer
from clockdimer.model import is_hermitian
from clockdimer.pulses import (
    AXIS_PHASES,
    NOMINAL_ENTANGLING_TIME,
    Schedule,
    Segment,
    Tone,
    calibrate_schedule,
    cnot_schedule,
    entangling_time_candidates,
    free_evolution_segment,
    golden_section_max,
    pi2_duration,
    pi2_segment,
    rotation_segment,
    rwa_hamiltonian,
    two_tone_segment,
)

from conftest import effective


def test_free_segment_hamiltonian(em50):
    H = rwa_hamiltonian(em50, free_evolution_segment(10.0))
    np.testing.assert_allclose(H, np.diag([0, em50.delta, em50.delta, 0]))
    zz = np.diag([1.0, -1.0, -1.0, 1.0])
    np.testing.assert_allclose(H - 0.5 * em50.delta * (np.eye(4) - zz), 0, atol=1e-15)


def test_uncoupled_drive_element(em_uncoupled):
    seg = Segment(10.0, (Tone(1, 1.0, 0.0),))
    H = rwa_hamiltonian(em_uncoupled, seg)
    assert H[0, 1].real * 1e3 == pytest.approx(6.998, abs=1e-3)
    assert H[2, 3] == pytest.approx(H[0, 1])
    assert H[0, 2] == 0
    assert np.max(np.abs(H - H.conj().T)) < 1e-14


def test_segment_rejects_bad_input():
    with pytest.raises(ValueError):
        Segment(1.0, (Tone(1, 1.0), Tone(1, 0.5)))
    with pytest.raises(ValueError):
        Segment(0.0)
    with pytest.raises(ValueError):
        Tone(3, 1.0)
    with pytest.raises(ValueError):
        Tone(1, -1.0)
    with pytest.raises(ValueError):
        Schedule(())


def test_pi2_duration(em_uncoupled):
    assert pi2_duration(em_uncoupled, 1) == pytest.approx(17.86, abs=0.01)
    assert pi2_duration(em_uncoupled, 1, 2.0) == pytest.approx(0.5 * pi2_duration(em_uncoupled, 1))


def test_pi2_splits_population(em_uncoupled):
    for ch, target in ((1, 1), (2, 2)):
        psi = run_schedule_pure(Schedule((pi2_segment(em_uncoupled, ch),)), em_uncoupled, np.eye(4)[0])
        p = np.abs(psi) ** 2
        assert p[0] == pytest.approx(0.5, abs=1e-6)
        assert p[target] == pytest.approx(0.5, abs=1e-6)


def test_four_pi2_return(em_uncoupled):
    seg = pi2_segment(em_uncoupled, 1)
    U = schedule_unitary(Schedule((seg,) * 4), em_uncoupled)
    psi = np.ones(4) / 2
    assert abs(np.vdot(psi, U @ psi)) ** 2 > 1 - 1e-4


@pytest.mark.parametrize("name", ["X1", "Y1", "Xbar1", "Ybar1", "X2", "Y2", "Xbar2", "Ybar2"])
def test_rotation_matches_ideal_in_uncoupled_limit(em_uncoupled, name):
    U = segment_unitary(em_uncoupled, rotation_segment(em_uncoupled, name))
    overlap = abs(np.trace(ideal_gate(name).conj().T @ U)) / 4
    assert overlap == pytest.approx(1.0, abs=1e-12)


def test_x_and_y_are_orthogonal_axes(em_uncoupled):
    X = segment_unitary(em_uncoupled, rotation_segment(em_uncoupled, "X1"))
    Y = segment_unitary(em_uncoupled, rotation_segment(em_uncoupled, "Y1"))
    assert abs(np.trace(X.conj().T @ Y)) / 4 == pytest.approx(0.5, abs=1e-12)


def test_two_tone_segment_factorizes_uncoupled(em_uncoupled):
    seg = two_tone_segment(em_uncoupled, AXIS_PHASES["Xbar"], AXIS_PHASES["Ybar"])
    assert [t.phase for t in seg.tones] == [math.pi, 1.5 * math.pi]
    U = segment_unitary(em_uncoupled, seg)
    expected = ideal_gate("Xbar1") @ ideal_gate("Ybar2")
    np.testing.assert_allclose(U, expected, atol=1e-12)


def test_two_tone_shared_duration(em50):
    seg = two_tone_segment(em50, 0.0, 0.0)
    assert seg.duration == pytest.approx(max(pi2_duration(em50, 1), pi2_duration(em50, 2)))
    amps = [t.amplitude for t in seg.tones]
    assert max(amps) == 1.0 and min(amps) <= 1.0


def test_two_tone_vs_sequential(em50):
    seg = two_tone_segment(em50, 0.0, 0.0)
    both = segment_unitary(em50, seg)
    seq = segment_unitary(em50, rotation_segment(em50, "X2")) @ segment_unitary(em50, rotation_segment(em50, "X1"))
    ideal = ideal_gate("X1") @ ideal_gate("X2")
    f_both = abs(np.trace(ideal.conj().T @ both)) / 4
    f_seq = abs(np.trace(ideal.conj().T @ seq)) / 4
    assert f_both > 0.99 and f_seq > 0.99
    assert abs(f_both - f_seq) < 0.01


def test_free_evolution():
    em = effective(50.0)
    U = segment_unitary(em, free_evolution_segment(1e-12))
    np.testing.assert_allclose(U, np.eye(4), atol=1e-12)
    t = 100.0
    U = segment_unitary(em, free_evolution_segment(t))
    assert np.angle(U[1, 1]) == pytest.approx(-2 * math.pi * em.delta * t)
    assert U[0, 0] == 1 and U[3, 3] == 1


def _concurrence_power(em, t):
    # entangling power proxy: |sin(2 pi delta t)| from the phase (U11 U22)/(U00 U33)
    U = segment_unitary(em, free_evolution_segment(t))
    phase = np.angle(U[1, 1] * U[2, 2] / (U[0, 0] * U[3, 3]))
    return abs(math.sin(phase / 2))


def test_quarter_turn_maximizes_entangling_phase():
    em = effective(50.0)
    t_quarter = entangling_time_candidates(em)["quarter_turn_exact"]
    best = max(np.linspace(0.5 * t_quarter, 1.5 * t_quarter, 201), key=lambda t: _concurrence_power(em, t))
    assert best == pytest.approx(t_quarter, rel=0.01)


def test_cnot_schedule_layout(em50):
    s = cnot_schedule(em50)
    assert len(s.segments) == 5
    assert [seg.label for seg in s.segments] == ["Y2", "U_J", "[Xbar1 Ybar2]", "[Ybar1 X2]", "X1"]
    assert s.segments[1].duration == NOMINAL_ENTANGLING_TIME
    assert s.duration == pytest.approx(924 + 4 * 17.9, abs=1.0)


def test_cnot_without_exchange_cannot_entangle():
    em = effective(0.0, 0.0)
    U = schedule_unitary(cnot_schedule(em), em)
    # product-gate bound on |Tr(CNOT^+ U)|/4 is 1/sqrt(2)
    assert abs(np.trace(ideal_gate("CNOT").conj().T @ U)) / 4 <= 1 / math.sqrt(2) + 1e-9


def test_schedule_json_roundtrip(em50):
    s = cnot_schedule(em50)
    again = Schedule.from_json(s.to_json())
    assert again == s
    assert s.to_json() == again.to_json()
    seg = s.to_dict()["segments"][0]
    assert set(seg["tones"][0]) == {"channel", "amplitude_mT", "phase_rad", "detuning_GHz"}
    assert "duration_ns" in seg


def test_golden_section():
    x, fx = golden_section_max(lambda x: -(x - 1.234) ** 2, 0.0, 3.0, 1e-6)
    assert x == pytest.approx(1.234, abs=1e-5)


def test_calibration_monotone_and_fixed_point(em50, cnot50):
    assert cnot50.fidelity >= cnot50.initial_fidelity
    assert all(b >= a for a, b in zip(cnot50.history, cnot50.history[1:]))
    scorer = make_scorer(em50, ideal_gate("CNOT"))
    again = calibrate_schedule(cnot50.schedule, scorer)
    assert again.fidelity - cnot50.fidelity < 1e-6
    assert max(abs(a) for a in again.adjustments) < 0.5


def test_calibration_deterministic(em50):
    scorer = make_scorer(em50, ideal_gate("X1"))
    sched = Schedule((rotation_segment(em50, "X1"),), "X1")
    a = calibrate_schedule(sched, scorer)
    b = calibrate_schedule(sched, scorer)
    assert a == b


@settings(max_examples=30, deadline=None)
@given(
    st.lists(
        st.tuples(st.sampled_from([1, 2]), st.floats(0, 5), st.floats(-10, 10), st.floats(-0.01, 0.01)),
        min_size=0,
        max_size=2,
        unique_by=lambda t: t[0],
    ),
    st.floats(0.1, 100),
)
def test_rwa_hamiltonian_hermitian(tones, duration):
    em = effective(50.0)
    seg = Segment(duration, tuple(Tone(*t) for t in tones))
    assert is_hermitian(rwa_hamiltonian(em, seg), 1e-14)
    U = segment_unitary(em, seg)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(4), atol=1e-12)
