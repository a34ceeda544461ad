"""Small verifier circuits used by the tests, the demos and the acceptance suite."""
from __future__ import annotations

import numpy as np

from .circuit import Circuit, Gate, cnot


def swap_reject() -> Circuit:
    """SWAP of witness qubit 1 with a |0> ancilla from three CNOTs: always rejects."""
    gates = cnot(1, 2) + cnot(2, 1) + cnot(1, 2)
    return Circuit(1, 1, tuple(gates))


def move_reject() -> Circuit:
    """CNOT(1->2) then CNOT(2->1): |y>|0> -> |0>|y>, so qubit 1 always reads 0."""
    return Circuit(1, 1, tuple(cnot(1, 2) + cnot(2, 1)))


def copy_accept() -> Circuit:
    """Copy the witness into the ancilla; accepts exactly when y = 1."""
    return Circuit(1, 1, tuple(cnot(1, 2)))


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


_PHASE_GATES = ("X", "Z", "S", "I")


def random_reversible(rng: np.random.Generator, n_x: int, m_x: int, T: int) -> Circuit:
    """Random circuit of X/Z/S/I gates and CNOTs written as H-CPHASE-H.

    Such circuits map basis states to basis states up to a phase, so the
    acceptance operator is diagonal in the witness basis and classical and
    quantum witnesses reach the same maximum.  The gate count is exactly T
    (a CNOT uses three steps, so it is only drawn when it fits).
    """
    n = n_x + m_x
    gates: list[Gate] = []
    while len(gates) < T:
        room = T - len(gates)
        if n > 1 and room >= 3 and rng.random() < 0.4:
            a, b = rng.choice(np.arange(1, n + 1), size=2, replace=False)
            gates += cnot(int(a), int(b))
        else:
            name = _PHASE_GATES[int(rng.integers(len(_PHASE_GATES)))]
            gates.append(Gate(name, (int(rng.integers(1, n + 1)),)))
    return Circuit(n_x, m_x, tuple(gates))


def with_output_rotation(c: Circuit, theta: float) -> Circuit:
    """Append a small Y rotation on the output qubit (acceptance moves by sin^2(theta/2))."""
    return Circuit(c.n_x, c.m_x, c.gates + (Gate.custom(ry(theta), 1),))
