"""History states |y'> = (T+1)^(-1/2) sum_t U_t...U_1 (|y>|0>) ⊗ |t> and their energies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, intermediate_states
from .operators import HamiltonianSum, OperatorError, expectation
from .reduction import clock_width


@dataclass(frozen=True, eq=False)
class HistoryState:
    state: np.ndarray
    encoding: str
    T: int
    witness: str

    @property
    def system_size(self) -> int:
        return int(np.log2(self.state.size))


def clock_index(t: int, T: int, encoding: str) -> int:
    """Basis index of clock value t in the clock register."""
    if encoding == "binary":
        return t
    if encoding == "unary":
        return int("1" * t + "0" * (T - t), 2)
    raise ValueError(f"unknown clock encoding {encoding!r}")


def build_history_state(c: Circuit, witness: str, encoding: str = "binary") -> HistoryState:
    width = clock_width(c.T, encoding)
    states = intermediate_states(c, witness)
    psi = np.zeros(2 ** (c.n_qubits + width), dtype=complex)
    for t, phi in enumerate(states):
        clock = np.zeros(2 ** width, dtype=complex)
        clock[clock_index(t, c.T, encoding)] = 1.0
        psi += np.kron(phi, clock)
    psi /= np.sqrt(c.T + 1)
    return HistoryState(psi, encoding, c.T, witness)


def history_energy(hs: HistoryState, h: HamiltonianSum) -> tuple[float, dict[str, float]]:
    """Total <y'|H|y'> and its split by term label (in first-appearance order)."""
    if hs.state.size != h.dim:
        raise OperatorError(f"history state has dimension {hs.state.size}, Hamiltonian {h.dim}")
    breakdown = {label or "-": expectation(h.select(label) if label else _unlabeled(h), hs.state)
                 for label in h.group_names()}
    return expectation(h, hs.state), breakdown


def _unlabeled(h: HamiltonianSum) -> HamiltonianSum:
    return HamiltonianSum(h.system_size, [t for t in h.terms if not t.label])
