"""Three-qubit Bell-violation simulator: python surface over the C++ core."""

from ._nmrbell import (
    __version__,
    apply_dephasing,
    apply_depolarizing,
    calibrate_to_fidelity,
    canonical_settings,
    classical_bound_t26,
    cnot_pulse_unitary,
    concurrence,
    evaluate_t26,
    grape_optimize,
    hamiltonian,
    incompatibility_sweep,
    pairwise_concurrences,
    partial_trace,
    partial_transpose,
    pseudopure_density,
    pulse_prepared_state,
    reconstruct,
    reference_state,
    run_pipeline,
    s_prep_circuit_json,
    s_prep_cnot_count,
    s_prep_unitary,
    sensing_ranks,
    simulate_readout,
    state_fidelity,
    t26_quantum_maximum,
    t26_text,
    trace_distance,
    tripartite_negativity,
)

__all__ = [
    "__version__",
    "apply_dephasing",
    "apply_depolarizing",
    "calibrate_to_fidelity",
    "canonical_settings",
    "classical_bound_t26",
    "cnot_pulse_unitary",
    "concurrence",
    "evaluate_t26",
    "grape_optimize",
    "hamiltonian",
    "incompatibility_sweep",
    "pairwise_concurrences",
    "partial_trace",
    "partial_transpose",
    "pseudopure_density",
    "pulse_prepared_state",
    "reconstruct",
    "reference_state",
    "run_pipeline",
    "s_prep_circuit_json",
    "s_prep_cnot_count",
    "s_prep_unitary",
    "sensing_ranks",
    "simulate_readout",
    "state_fidelity",
    "t26_quantum_maximum",
    "t26_text",
    "trace_distance",
    "tripartite_negativity",
]
