import json
import math

import numpy as np
import pytest

import nmrbell


QUANTUM_MAX = 1.0 + 4.0 * math.sqrt(3.0)


def density(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def test_version():
    assert nmrbell.__version__ == "1.0.0"


def test_reference_state_amplitudes():
    s = np.asarray(nmrbell.reference_state("S"))
    r6 = 1.0 / math.sqrt(6.0)
    expected = np.array([0, r6, r6, 0, -r6, 0, 0, 1.0 / math.sqrt(2.0)], dtype=complex)
    assert np.allclose(s, expected, atol=1e-15)
    ghz = np.asarray(nmrbell.reference_state("GHZ"))
    assert abs(ghz[0] - 1 / math.sqrt(2)) < 1e-15
    assert abs(ghz[7] - 1 / math.sqrt(2)) < 1e-15
    with pytest.raises(Exception):
        nmrbell.reference_state("Q")


def test_prep_circuit_matches_target():
    u = np.asarray(nmrbell.s_prep_unitary())
    psi = u[:, 0]
    s = np.asarray(nmrbell.reference_state("S"))
    assert abs(abs(np.vdot(s, psi)) - 1.0) < 1e-12
    assert nmrbell.s_prep_cnot_count() == 4
    gates = json.loads(nmrbell.s_prep_circuit_json())
    assert sum(1 for g in gates if g["gate"] == "cnot") == 4


def test_bell_values():
    rho = density(nmrbell.reference_state("S"))
    assert abs(nmrbell.evaluate_t26(rho) - QUANTUM_MAX) < 1e-9
    assert abs(nmrbell.t26_quantum_maximum() - QUANTUM_MAX) < 1e-12
    bound, achievers = nmrbell.classical_bound_t26()
    assert bound == 5.0
    assert len(achievers) == 32


def test_entanglement_values():
    rho = density(nmrbell.reference_state("S"))
    neg = nmrbell.tripartite_negativity(rho)
    assert abs(neg["tripartite"] - 2.0 * math.sqrt(2.0) / 3.0) < 1e-10
    conc = nmrbell.pairwise_concurrences(rho)
    assert all(abs(c - 0.24401693585629253) < 1e-7 for c in conc)
    pair = nmrbell.partial_trace(rho, [1, 2])
    assert abs(nmrbell.concurrence(pair) - conc[0]) < 1e-12


def test_noise_and_calibration():
    rho = density(nmrbell.reference_state("S"))
    noisy = nmrbell.apply_depolarizing(rho, 0.2)
    assert abs(nmrbell.evaluate_t26(noisy) - 0.8 * QUANTUM_MAX) < 1e-10
    p = nmrbell.calibrate_to_fidelity(0.949, nmrbell.reference_state("S"))
    assert abs(p - 8.0 * (1.0 - 0.949**2) / 7.0) < 1e-5
    assert abs(nmrbell.state_fidelity(nmrbell.apply_depolarizing(rho, p), rho) - 0.949) < 1e-6


def test_tomography_round_trip():
    rho = density(nmrbell.reference_state("S"))
    labels = nmrbell.canonical_settings()
    assert labels == ["III", "IIY", "IYY", "YII", "XYX", "XXY", "XXX"]
    assert nmrbell.sensing_ranks(labels) == (63, 64)
    records = [(l, np.asarray(nmrbell.simulate_readout(rho, l))) for l in labels]
    rec = nmrbell.reconstruct(records)
    assert rec["converged"]
    assert nmrbell.trace_distance(rec["rho_hat"], rho) < 1e-6


def test_sweep_curve():
    rho = density(nmrbell.reference_state("S"))
    thetas = [0.0, math.pi / 2, math.pi]
    curve = nmrbell.incompatibility_sweep(rho, 0, 1, thetas)
    assert abs(curve[0][1] - 3.3094010767585034) < 1e-9
    assert abs(curve[1][1] - (1.0 + 12.0 / math.sqrt(3.0))) < 1e-9


def test_pulse_level():
    psi = np.asarray(nmrbell.pulse_prepared_state())
    s = np.asarray(nmrbell.reference_state("S"))
    assert abs(np.vdot(s, psi)) > 1.0 - 1e-6
    u = np.asarray(nmrbell.cnot_pulse_unitary(1, 2))
    cnot = np.eye(8)[:, [0, 1, 2, 3, 6, 7, 4, 5]]
    phi = abs(np.trace(cnot.T.conj() @ u)) ** 2 / 64.0
    assert phi > 1.0 - 1e-9


def test_run_pipeline_report():
    report = json.loads(nmrbell.run_pipeline('{"source": "circuit"}'))
    assert report["bell"]["violated"] is True
    assert abs(report["bell"]["value"] - QUANTUM_MAX) < 1e-9
    assert report["reference_comparison"]["calibration"]["violation_preserved"] is True
    with pytest.raises(Exception):
        nmrbell.run_pipeline('{"source": "circuit", "bogus": 1}')
