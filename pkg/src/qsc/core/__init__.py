"""Deterministic statevector core: gates, measurement, Paulis, duality."""
from .errors import QscError, SimulationError, ValidationError
from .gates import UnitarySpec, named_gate, gates_equal_up_to_phase
from .state import (
    MAX_QUBITS,
    StateVector,
    append_state,
    apply_gate,
    fidelity,
    from_amplitudes,
    make_cluster,
    make_ebit,
    permute_qubits,
    single_qubit,
    states_equal_up_to_phase,
    zero_state,
)
from .measure import (
    Basis,
    MeasurementRecord,
    RngPolicy,
    X_BASIS,
    Z_BASIS,
    bell_measure,
    measure,
    rotated,
)
from .pauli import PauliOperator, pauli_from_dense
from .channels import (
    ChannelSpec,
    ChoiState,
    apply_superchannel,
    choi_of_unitary,
    density_of,
    partial_trace,
    trace_distance,
    unitary_of_choi,
)
from .workspace import Workspace

__all__ = [
    "QscError", "SimulationError", "ValidationError",
    "UnitarySpec", "named_gate", "gates_equal_up_to_phase",
    "MAX_QUBITS", "StateVector", "append_state", "apply_gate", "fidelity",
    "from_amplitudes", "make_cluster", "make_ebit", "permute_qubits",
    "single_qubit", "states_equal_up_to_phase", "zero_state",
    "Basis", "MeasurementRecord", "RngPolicy", "X_BASIS", "Z_BASIS",
    "bell_measure", "measure", "rotated",
    "PauliOperator", "pauli_from_dense",
    "ChannelSpec", "ChoiState", "apply_superchannel", "choi_of_unitary",
    "density_of", "partial_trace", "trace_distance", "unitary_of_choi",
    "Workspace",
]
