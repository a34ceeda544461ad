"""Circuit-to-local-Hamiltonian compiler with a spectral verifier.

A verifier circuit is turned into a Feynman-Kitaev Hamiltonian at one of
three locality levels (binary clock, 5-local unary clock, 2-local unary
clock); the package then checks the resulting ground energies against a
brute-force witness oracle.
"""
from .circuit import (
    Circuit,
    CircuitError,
    Gate,
    acceptance_probability,
    circuit_from_gates,
    cnot,
    pad_and_normalize,
    parse_circuit,
    serialize_circuit,
    simulate,
)
from .history import HistoryState, build_history_state, history_energy
from .operators import (
    ConvergenceError,
    HamiltonianSum,
    LocalTerm,
    OperatorError,
    apply,
    embed_to_dense,
    expectation,
    locality_audit,
    operator_norm,
    parse_hamiltonian,
    serialize_hamiltonian,
)
from .oracle import Decision, brute_force_max_acceptance, decide_instance
from .reduction import (
    DecisionThresholds,
    ReductionError,
    ReductionParams,
    assemble,
    auto_penalties,
    build_groups,
    choose_penalties,
)
from .spectrum import (
    SpectrumResult,
    min_eigenvalue,
    projection_lemma_check,
    restricted_min_eigenvalue,
    zero_eigenspace_basis,
)
from .verify import VerifyReport, format_report, verify_instance

__version__ = "0.1.0"
