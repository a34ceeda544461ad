"""Verifier circuits: representation, text format, simulation and padding.

Qubits are numbered from 1.  Qubit 1 is the most significant bit of the
computational basis index and is the output qubit measured at the end of
the circuit.  Witness qubits come first (1..n_x), ancillas after them.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

UNITARY_TOL = 1e-12

_S2 = 1 / np.sqrt(2)
NAMED_GATES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
}
CPHASE = np.diag([1, 1, 1, -1]).astype(complex)


class CircuitError(ValueError):
    """Invalid circuit, or malformed circuit text (``line`` is 1-based)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Gate:
    """One time step of a verifier circuit.

    ``name`` is one of the named single-qubit gates, ``"U"`` for a custom
    single-qubit unitary (then ``entries`` holds the four matrix entries in
    row-major order) or ``"CPHASE"``.
    """

    name: str
    targets: tuple[int, ...]
    entries: tuple[complex, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        if self.name == "CPHASE":
            if len(self.targets) != 2:
                raise CircuitError("CPHASE needs exactly 2 targets")
            if self.targets[0] == self.targets[1]:
                raise CircuitError("CPHASE has duplicate targets")
        elif self.name == "U":
            if len(self.targets) != 1:
                raise CircuitError("custom gate U acts on exactly 1 qubit")
            if self.entries is None or len(self.entries) != 4:
                raise CircuitError("custom gate U needs 4 matrix entries")
            object.__setattr__(self, "entries", tuple(complex(z) for z in self.entries))
            u = self.matrix
            residual = np.max(np.abs(u.conj().T @ u - np.eye(2)))
            if residual > UNITARY_TOL:
                raise CircuitError(f"custom gate is not unitary (max |U^dag U - I| = {residual:.3g})")
        elif self.name in NAMED_GATES:
            if len(self.targets) != 1:
                raise CircuitError(f"gate {self.name} acts on exactly 1 qubit")
        else:
            raise CircuitError(f"unknown gate {self.name!r}")
        if any(q < 1 for q in self.targets):
            raise CircuitError("qubit indices start at 1")

    @classmethod
    def custom(cls, matrix, target: int) -> "Gate":
        m = np.asarray(matrix, dtype=complex)
        return cls("U", (target,), tuple(m.reshape(4)))

    @property
    def matrix(self) -> np.ndarray:
        if self.name == "CPHASE":
            return CPHASE
        if self.name == "U":
            return np.array(self.entries, dtype=complex).reshape(2, 2)
        return NAMED_GATES[self.name]

    @property
    def is_cphase(self) -> bool:
        return self.name == "CPHASE"

    def __str__(self):
        qs = ",".join(str(q) for q in self.targets)
        return f"{self.name}@{qs}"


@dataclass(frozen=True)
class Circuit:
    """Verifier circuit V = U_T ... U_1 over ``n_x`` witness and ``m_x`` ancilla qubits."""

    n_x: int
    m_x: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_x < 1:
            raise CircuitError("need at least one witness qubit")
        if self.m_x < 0:
            raise CircuitError("ancilla count must be non-negative")
        if not self.gates:
            raise CircuitError("circuit has no gates (T >= 1 required)")
        n = self.n_qubits
        for t, g in enumerate(self.gates, start=1):
            if any(q > n for q in g.targets):
                raise CircuitError(f"gate {t} ({g}) targets a qubit outside 1..{n}")

    @property
    def n_qubits(self) -> int:
        return self.n_x + self.m_x

    @property
    def T(self) -> int:
        return len(self.gates)

    def cphase_times(self) -> list[int]:
        return [t for t, g in enumerate(self.gates, start=1) if g.is_cphase]

    def __add__(self, other: "Circuit") -> "Circuit":
        if (self.n_x, self.m_x) != (other.n_x, other.m_x):
            raise CircuitError("register layouts differ")
        return Circuit(self.n_x, self.m_x, self.gates + other.gates)


# ---------------------------------------------------------------------------
# text format

def _parse_qubit(tok: str, lineno: int) -> int:
    if not tok.startswith("q") or not tok[1:].isdigit():
        raise CircuitError(f"expected qubit token like 'q1', got {tok!r}", lineno)
    return int(tok[1:])


def parse_circuit(text: str) -> Circuit:
    """Parse the line-based ``circuit v1`` format."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((lineno, body.split()))
    if not lines or lines[0][1] != ["circuit", "v1"]:
        raise CircuitError("first line must be 'circuit v1'", lines[0][0] if lines else 1)
    if len(lines) < 2 or lines[1][1][0] != "qubits" or len(lines[1][1]) != 3:
        raise CircuitError("second line must be 'qubits <n_x> <m_x>'", lines[1][0] if len(lines) > 1 else 2)
    lineno, toks = lines[1]
    try:
        n_x, m_x = int(toks[1]), int(toks[2])
    except ValueError:
        raise CircuitError("qubit counts must be integers", lineno) from None
    if n_x < 1 or m_x < 0:
        raise CircuitError("need n_x >= 1 and m_x >= 0", lineno)
    n = n_x + m_x

    gates = []
    for lineno, toks in lines[2:]:
        if toks[0] != "gate" or len(toks) < 3:
            raise CircuitError(f"malformed gate line: {' '.join(toks)!r}", lineno)
        name = toks[1]
        try:
            if name == "U":
                if len(toks) != 11:
                    raise CircuitError("custom gate needs one qubit and 8 real numbers", lineno)
                q = _parse_qubit(toks[2], lineno)
                vals = [float(x) for x in toks[3:]]
                entries = [complex(vals[2 * i], vals[2 * i + 1]) for i in range(4)]
                gate = Gate("U", (q,), tuple(entries))
            else:
                qs = tuple(_parse_qubit(tok, lineno) for tok in toks[2:])
                gate = Gate(name, qs)
        except CircuitError as exc:
            if exc.line is not None:
                raise
            raise CircuitError(str(exc), lineno) from None
        except ValueError as exc:
            raise CircuitError(f"bad number: {exc}", lineno) from None
        bad = [q for q in gate.targets if q > n]
        if bad:
            raise CircuitError(f"qubit q{bad[0]} out of range 1..{n}", lineno)
        gates.append(gate)
    if not gates:
        raise CircuitError("circuit has no gates (T >= 1 required)", lines[-1][0])
    return Circuit(n_x, m_x, tuple(gates))


def serialize_circuit(c: Circuit) -> str:
    out = ["circuit v1", f"qubits {c.n_x} {c.m_x}"]
    for g in c.gates:
        qs = " ".join(f"q{q}" for q in g.targets)
        if g.name == "U":
            nums = " ".join(f"{x:.17g}" for z in g.entries for x in (z.real, z.imag))
            out.append(f"gate U {qs} {nums}")
        else:
            out.append(f"gate {g.name} {qs}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# simulation

def basis_state(bits: str) -> np.ndarray:
    """Computational basis vector for a bitstring, first character most significant."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2) if bits else 0] = 1.0
    return v


def apply_gate(state: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    """Apply one gate to a state over ``n`` qubits (qubit 1 is axis 0)."""
    k = len(gate.targets)
    psi = state.reshape((2,) * n)
    axes = [q - 1 for q in gate.targets]
    op = gate.matrix.reshape((2,) * (2 * k))
    psi = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), axes))
    psi = np.moveaxis(psi, list(range(k)), axes)
    return psi.reshape(-1)


def _check_witness(c: Circuit, witness: str) -> None:
    if len(witness) != c.n_x or set(witness) - {"0", "1"}:
        raise CircuitError(f"witness must be a bitstring of length n_x={c.n_x}, got {witness!r}")


def initial_state(c: Circuit, witness: str) -> np.ndarray:
    _check_witness(c, witness)
    return basis_state(witness + "0" * c.m_x)


def intermediate_states(c: Circuit, witness: str) -> list[np.ndarray]:
    """[U_t ... U_1 (|y>|0>) for t = 0..T]."""
    psi = initial_state(c, witness)
    states = [psi]
    for g in c.gates:
        psi = apply_gate(psi, g, c.n_qubits)
        states.append(psi)
    return states


def simulate(c: Circuit, witness: str, initial: np.ndarray | None = None) -> np.ndarray:
    """Return V_x (|y> ⊗ |0^m>), or V_x applied to ``initial`` when given."""
    psi = initial_state(c, witness) if initial is None else np.asarray(initial, dtype=complex)
    for g in c.gates:
        psi = apply_gate(psi, g, c.n_qubits)
    return psi


def output_one_probability(state: np.ndarray) -> float:
    probs = np.abs(state.reshape(2, -1)) ** 2
    return float(probs[1].sum())


def acceptance_probability(c: Circuit, witness: str) -> float:
    """Probability that measuring qubit 1 of V_x(|y>|0>) yields 1."""
    return min(1.0, max(0.0, output_one_probability(simulate(c, witness))))


def rejection_probability(c: Circuit, witness: str) -> float:
    probs = np.abs(simulate(c, witness).reshape(2, -1)) ** 2
    return float(probs[0].sum())


def gate_unitary(gate: Gate, n: int) -> np.ndarray:
    cols = [apply_gate(col, gate, n) for col in np.eye(2 ** n, dtype=complex)]
    return np.array(cols).T


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Dense 2^n x 2^n unitary of the whole circuit (small n only)."""
    n = c.n_qubits
    return reduce(lambda acc, g: gate_unitary(g, n) @ acc, c.gates, np.eye(2 ** n, dtype=complex))


# ---------------------------------------------------------------------------
# spacing for the 2-local construction

def _segments(gates: Sequence[Gate]) -> tuple[list[list[Gate]], list[Gate]]:
    segments: list[list[Gate]] = [[]]
    cphases = []
    for g in gates:
        if g.is_cphase:
            cphases.append(g)
            segments.append([])
        else:
            segments[-1].append(g)
    return segments, cphases


def min_spacing(c: Circuit) -> int:
    """Smallest L accepted by :func:`pad_and_normalize` for this circuit."""
    segments, cphases = _segments(c.gates)
    if not cphases:
        return max(4, len(segments[0]) + 1)
    longest = max(len(s) for s in segments)
    return max(4, longest + 1)


def pad_and_normalize(c: Circuit, L: int) -> Circuit:
    """Insert identity gates so every CPHASE sits at a multiple of ``L``.

    In the result every multiple of L up to T' holds a CPHASE and every other
    slot a single-qubit gate, the first CPHASE is at t = L >= 4 and the last
    one at T' - (L - 1).  Each run of single-qubit gates between CPHASEs
    must therefore fit into L - 1 slots.  A CPHASE-free circuit must fit
    before the first multiple of L; it is padded to at least two steps.
    """
    if L < 4:
        raise CircuitError("gate spacing L must be at least 4")
    for g in c.gates:
        if len(g.targets) > 1 and not g.is_cphase:
            raise CircuitError(f"gate {g} is outside the {{single-qubit, CPHASE}} gate set")
    segments, cphases = _segments(c.gates)
    too_long = [len(s) for s in segments if len(s) > L - 1]
    if too_long:
        raise CircuitError(
            f"a run of {max(too_long)} single-qubit gates does not fit between CPHASE slots "
            f"with L={L}; use L >= {min_spacing(c)}"
        )
    ident = Gate("I", (1,))
    out: list[Gate] = []
    for seg, cz in zip(segments, cphases):
        out.extend(seg)
        out.extend([ident] * (L - 1 - len(seg)))
        out.append(cz)
    tail = segments[-1]
    out.extend(tail)
    if cphases:
        out.extend([ident] * (L - 1 - len(tail)))
    elif len(out) < 2:
        out.extend([ident] * (2 - len(out)))
    return Circuit(c.n_x, c.m_x, tuple(out))


def cnot(control: int, target: int) -> list[Gate]:
    """CNOT written in the {H, CPHASE} gate set."""
    return [Gate("H", (target,)), Gate("CPHASE", (control, target)), Gate("H", (target,))]


def circuit_from_gates(n_x: int, m_x: int, gates: Iterable) -> Circuit:
    """Build a circuit from ``Gate`` objects or ``(name, targets)`` pairs."""
    built = []
    for g in gates:
        if isinstance(g, Gate):
            built.append(g)
        else:
            name, targets = g
            built.append(Gate(name, tuple(targets) if isinstance(targets, (tuple, list)) else (targets,)))
    return Circuit(n_x, m_x, tuple(built))
