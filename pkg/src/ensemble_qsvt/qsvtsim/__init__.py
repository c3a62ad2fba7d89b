"""Desk-scale statevector simulation of the preparation pipeline."""

from .block_encoding import (
    EvtCircuit,
    MatrixBlockEncoding,
    QueryCounter,
    evt_circuit,
    make_block_encoding,
    svt_oracle,
)
from .fpaa import FpaaCircuit, OverlapError, fpaa
from .qsp import PhaseSequence, PhaseSolverError, qsp_phases, qsp_reconstruct
from .statevector import MAX_QUBITS, StateVector
from .thermal import (
    ThermalDiagnostics,
    exact_density_matrix,
    free_spin_hamiltonian,
    prepare_thermal,
    purified_reference,
    save_state_csv,
    trace_distance,
)

__all__ = [
    "EvtCircuit",
    "FpaaCircuit",
    "MatrixBlockEncoding",
    "MAX_QUBITS",
    "OverlapError",
    "PhaseSequence",
    "PhaseSolverError",
    "QueryCounter",
    "StateVector",
    "ThermalDiagnostics",
    "evt_circuit",
    "exact_density_matrix",
    "fpaa",
    "free_spin_hamiltonian",
    "make_block_encoding",
    "prepare_thermal",
    "purified_reference",
    "qsp_phases",
    "qsp_reconstruct",
    "save_state_csv",
    "svt_oracle",
    "trace_distance",
]
