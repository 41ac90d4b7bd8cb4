import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clockdimer.evolve import DephasingRates
from clockdimer.fidelity import (
    GATE_NAMES,
    FidelityReport,
    average_gate_fidelity,
    cnot,
    fidelity_mixed,
    fidelity_pure,
    ideal_gate,
    mub20,
    state_fidelities,
)
from clockdimer.pulses import Schedule, rotation_segment

from conftest import calibrated, effective


def test_mub_structure():
    mubs = mub20()
    assert len(mubs.bases) == 5
    states = mubs.as_array()
    assert states.shape == (20, 4)
    for b in mubs.bases:
        np.testing.assert_allclose(b.conj().T @ b, np.eye(4), atol=1e-12)
    np.testing.assert_allclose(mubs.bases[0], np.eye(4), atol=1e-12)
    for i in range(5):
        for j in range(i + 1, 5):
            overlaps = np.abs(mubs.bases[i].conj().T @ mubs.bases[j]) ** 2
            np.testing.assert_allclose(overlaps, 0.25, atol=1e-12)


def test_mub_deterministic():
    assert mub20() is mub20()
    np.testing.assert_array_equal(mub20().as_array(), mub20().as_array())


def test_fidelity_pure_examples():
    a, b = np.eye(4)[0], np.eye(4)[1]
    assert fidelity_pure(a, a) == 1.0
    assert fidelity_pure(a, b) == 0.0
    assert fidelity_pure((a + b) / math.sqrt(2), a) == pytest.approx(0.5)


def test_fidelity_mixed_examples():
    phi = np.array([1, 1j, 0, 1]) / math.sqrt(3)
    assert fidelity_mixed(phi, np.outer(phi, phi.conj())) == pytest.approx(1.0)
    assert fidelity_mixed(phi, np.eye(4) / 4) == pytest.approx(0.25)
    not_hermitian = np.zeros((4, 4), dtype=complex)
    not_hermitian[0, 1] = 1j
    with pytest.raises(ValueError):
        fidelity_mixed(np.array([1, 1, 0, 0]) / math.sqrt(2), not_hermitian)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_mixed_pure_consistency(seed):
    rng = np.random.default_rng(seed)
    phi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    phi /= np.linalg.norm(phi)
    psi /= np.linalg.norm(psi)
    f = fidelity_pure(phi, psi)
    assert 0.0 <= f <= 1.0 + 1e-15
    assert fidelity_mixed(phi, np.outer(psi, psi.conj())) == pytest.approx(f, abs=1e-12)


def test_ideal_gates():
    C = ideal_gate("CNOT")
    np.testing.assert_array_equal(C @ C, np.eye(4))
    np.testing.assert_array_equal(C, cnot(1))
    X1 = ideal_gate("X1")
    X4 = np.linalg.matrix_power(X1, 4)
    assert abs(np.trace(X4)) / 4 == pytest.approx(1.0)
    for name in GATE_NAMES:
        U = ideal_gate(name)
        np.testing.assert_allclose(U.conj().T @ U, np.eye(4), atol=1e-12)
    with pytest.raises(ValueError):
        ideal_gate("Z3")


def test_cnot_on_bell_like_input():
    # (|uu> + i|dd>)/sqrt2 -> control (qubit 1) up flips qubit 2: |uu> -> |du>
    psi = np.array([1j, 0, 0, 1]) / math.sqrt(2)
    out = ideal_gate("CNOT") @ psi
    np.testing.assert_allclose(out, np.array([1j, 1, 0, 0]) / math.sqrt(2))


def test_ideal_schedule_scores_one():
    em = effective(0.0, 0.0)
    sched = Schedule((rotation_segment(em, "Ybar2"),), "Ybar2")
    report = average_gate_fidelity(sched, em, ideal_gate("Ybar2"))
    assert report.average == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 2 * math.pi))
def test_global_phase_invariance(phase):
    em = effective(50.0)
    sched = calibrated("X1").schedule
    a = average_gate_fidelity(sched, em, ideal_gate("X1"))
    b = average_gate_fidelity(sched, em, np.exp(1j * phase) * ideal_gate("X1"))
    assert a.average == pytest.approx(b.average, abs=1e-12)


def test_report_consistency():
    em = effective(50.0)
    sched = calibrated("CNOT").schedule
    report = average_gate_fidelity(sched, em, ideal_gate("CNOT"), DephasingRates.from_t2(10.0), gate="CNOT")
    assert len(report.per_state) == 20
    assert report.average == float(np.mean(report.per_state))
    assert all(0.0 <= f <= 1.0 for f in report.per_state)
    d = json.loads(report.to_json())
    assert d["gate"] == "CNOT" and d["min"] <= d["average"] <= d["max"]
    assert len(report.csv_row().split(",")) == 3


def test_state_fidelities_pure_vs_lindblad_limit():
    em = effective(50.0)
    sched = calibrated("CNOT").schedule
    a = state_fidelities(sched, em, ideal_gate("CNOT"))
    b = state_fidelities(sched, em, ideal_gate("CNOT"), DephasingRates(1e-300, 0.0))
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_cnot_control_assignment():
    em = effective(0.0)
    sched = calibrated("CNOT", 0.0).schedule
    f12 = average_gate_fidelity(sched, em, ideal_gate("CNOT")).average
    f21 = average_gate_fidelity(sched, em, ideal_gate("CNOT21")).average
    assert f12 >= 0.999
    assert f21 < 0.9


def test_monotone_in_t2():
    em = effective(50.0)
    sched = calibrated("CNOT").schedule
    values = [
        average_gate_fidelity(sched, em, ideal_gate("CNOT"), DephasingRates.from_t2(t)).average
        for t in (0.1, 1.0, 10.0, 100.0, 1000.0)
    ]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_report_dataclass_defaults():
    r = FidelityReport("X1", (0.5, 1.0), 0.75)
    assert r.minimum == 0.5 and r.maximum == 1.0
    assert r.to_dict()["gamma_per_ns"] is None
