"""k-local Hermitian terms, their sums, and the operations on them.

A :class:`LocalTerm` stores a dense ``2^k x 2^k`` block on an ordered support
of global qubit indices (1-based, first support qubit most significant in the
block).  Embedding follows the global convention of :mod:`lhlc.circuit`:
qubit 1 is the most significant bit of the basis index.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

HERMITIAN_TOL = 1e-12
DENSE_MAX_QUBITS = 14
ITERATIVE_MAX_QUBITS = 24


class OperatorError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap; ``residual`` is the last residual."""

    def __init__(self, message: str, residual: float = float("nan")):
        self.residual = residual
        super().__init__(message if np.isnan(residual) else f"{message} (residual {residual:.3g})")


@dataclass(frozen=True, eq=False)
class LocalTerm:
    coefficient: float
    support: tuple[int, ...]
    block: np.ndarray
    label: str = ""

    def __post_init__(self):
        support = tuple(int(q) for q in self.support)
        block = np.array(self.block, dtype=complex)
        block.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "block", block)
        object.__setattr__(self, "coefficient", float(self.coefficient))
        k = len(support)
        if k < 1:
            raise OperatorError("a term acts on at least one qubit")
        if len(set(support)) != k:
            raise OperatorError(f"support {support} has repeated qubits")
        if min(support) < 1:
            raise OperatorError("qubit indices start at 1")
        if block.shape != (2 ** k, 2 ** k):
            raise OperatorError(f"block shape {block.shape} does not match k={k}")
        residual = np.max(np.abs(block - block.conj().T))
        if residual > HERMITIAN_TOL:
            raise OperatorError(f"block is not Hermitian (residual {residual:.3g})")

    @property
    def k(self) -> int:
        return len(self.support)

    def __eq__(self, other):
        if not isinstance(other, LocalTerm):
            return NotImplemented
        return (
            self.coefficient == other.coefficient
            and self.support == other.support
            and self.label == other.label
            and np.array_equal(self.block, other.block)
        )

    def scaled(self, factor: float) -> "LocalTerm":
        return LocalTerm(self.coefficient * factor, self.support, self.block, self.label)

    def with_label(self, label: str) -> "LocalTerm":
        return LocalTerm(self.coefficient, self.support, self.block, label)

    def is_diagonal(self) -> bool:
        return not np.any(self.block - np.diag(np.diag(self.block)))


@dataclass(frozen=True)
class HamiltonianSum:
    """H = sum_i coefficient_i * embed(block_i) on ``system_size`` qubits."""

    system_size: int
    terms: tuple[LocalTerm, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.system_size < 1:
            raise OperatorError("system needs at least one qubit")
        for t in self.terms:
            if max(t.support) > self.system_size:
                raise OperatorError(f"term support {t.support} exceeds system size {self.system_size}")

    @property
    def dim(self) -> int:
        return 2 ** self.system_size

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(t.label for t in self.terms)

    def __len__(self):
        return len(self.terms)

    def __add__(self, other: "HamiltonianSum") -> "HamiltonianSum":
        if self.system_size != other.system_size:
            raise OperatorError("system sizes differ")
        return HamiltonianSum(self.system_size, self.terms + other.terms)

    def scaled(self, factor: float) -> "HamiltonianSum":
        return HamiltonianSum(self.system_size, [t.scaled(factor) for t in self.terms])

    def relabeled(self, label: str) -> "HamiltonianSum":
        return HamiltonianSum(self.system_size, [t.with_label(label) for t in self.terms])

    def select(self, *labels: str) -> "HamiltonianSum":
        """Terms whose label equals, or starts with ``<label>-``, one of ``labels``."""
        def keep(lab):
            return any(lab == want or lab.startswith(want + "-") for want in labels)
        return HamiltonianSum(self.system_size, [t for t in self.terms if keep(t.label)])

    def group_names(self) -> list[str]:
        seen = []
        for lab in self.labels:
            if lab not in seen:
                seen.append(lab)
        return seen

    def is_diagonal(self) -> bool:
        return all(t.is_diagonal() for t in self.terms)


def empty(system_size: int) -> HamiltonianSum:
    return HamiltonianSum(system_size, ())


def term_sum(system_size: int, terms: Iterable[LocalTerm]) -> HamiltonianSum:
    return HamiltonianSum(system_size, tuple(terms))


# ---------------------------------------------------------------------------
# embedding

def _term_coo(term: LocalTerm, n: int):
    """COO triplets of coefficient * (I ⊗ block ⊗ I) in the 2^n basis."""
    k = term.k
    idx = np.arange(2 ** n, dtype=np.int64)
    shifts = np.array([n - q for q in term.support], dtype=np.int64)
    bits = (idx[:, None] >> shifts[None, :]) & 1                    # (2^n, k)
    local = bits @ (1 << np.arange(k - 1, -1, -1, dtype=np.int64))  # column index into block
    mask = np.bitwise_or.reduce(1 << shifts)
    base = idx & ~mask
    # row index for every local row r: base with support bits set to r
    r = np.arange(2 ** k, dtype=np.int64)
    rbits = (r[:, None] >> np.arange(k - 1, -1, -1, dtype=np.int64)[None, :]) & 1
    roffset = rbits @ (1 << shifts)
    rows = base[None, :] + roffset[:, None]                          # (2^k, 2^n)
    vals = term.coefficient * term.block[:, local]                   # (2^k, 2^n)
    cols = np.broadcast_to(idx, rows.shape)
    keep = vals != 0
    return rows[keep], cols[keep], vals[keep]


def to_sparse(h: HamiltonianSum) -> sp.csr_matrix:
    n = h.system_size
    if n > ITERATIVE_MAX_QUBITS:
        raise OperatorError(f"{n} qubits exceeds the {ITERATIVE_MAX_QUBITS}-qubit ceiling")
    dim = 2 ** n
    if not h.terms:
        return sp.csr_matrix((dim, dim), dtype=complex)
    parts = [_term_coo(t, n) for t in h.terms]
    rows = np.concatenate([p[0] for p in parts])
    cols = np.concatenate([p[1] for p in parts])
    vals = np.concatenate([p[2] for p in parts])
    return sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()


def embed_to_dense(h: HamiltonianSum) -> np.ndarray:
    """Dense 2^n x 2^n matrix of ``h``; refuses systems above the dense cap."""
    if h.system_size > DENSE_MAX_QUBITS:
        raise OperatorError(f"{h.system_size} qubits is above the dense cap of {DENSE_MAX_QUBITS}")
    return to_sparse(h).toarray()


def diagonal(h: HamiltonianSum) -> np.ndarray:
    return to_sparse(h).diagonal()


def _check_vector(h: HamiltonianSum, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape[0] != h.dim:
        raise OperatorError(f"vector length {v.shape[0]} does not match dimension {h.dim}")
    return v


def apply_term(term: LocalTerm, v: np.ndarray, n: int) -> np.ndarray:
    k = term.k
    axes = [q - 1 for q in term.support]
    psi = v.reshape((2,) * n)
    op = (term.coefficient * term.block).reshape((2,) * (2 * k))
    out = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes).reshape(-1)


def apply(h: HamiltonianSum, v: np.ndarray) -> np.ndarray:
    """Matrix-free H @ v.  Terms are accumulated in list order."""
    v = _check_vector(h, v)
    out = np.zeros(h.dim, dtype=complex)
    for term in h.terms:
        out += apply_term(term, v, h.system_size)
    return out


def expectation(h: HamiltonianSum, v: np.ndarray) -> float:
    v = _check_vector(h, v)
    value = np.vdot(v, apply(h, v))
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
        raise OperatorError(f"expectation has imaginary part {value.imag:.3g}")
    return float(value.real)


def triangle_norm_bound(h: HamiltonianSum) -> float:
    """sum_i |c_i| * ||block_i||, an upper bound on ||H||."""
    return float(sum(abs(t.coefficient) * np.linalg.norm(t.block, 2) for t in h.terms))


def row_sum_bound(h: HamiltonianSum) -> float:
    """max_i sum_j |H_ij|, an upper bound on ||H|| for Hermitian H."""
    if not h.terms:
        return 0.0
    return float(np.abs(to_sparse(h)).sum(axis=1).max())


def norm_upper_bound(h: HamiltonianSum) -> float:
    """The smaller of the row-sum and triangle bounds; cheap at any size."""
    return min(row_sum_bound(h), triangle_norm_bound(h))


def linear_operator(h: HamiltonianSum, shift: float = 0.0, sign: float = 1.0) -> spla.LinearOperator:
    """LinearOperator for shift*I + sign*H, built on the sparse matrix."""
    mat = to_sparse(h)
    return spla.LinearOperator(
        (h.dim, h.dim),
        matvec=lambda x: shift * x + sign * (mat @ x),
        dtype=complex,
    )


def operator_norm(h: HamiltonianSum, dense_max: int = 10, tol: float = 1e-9, maxiter: int = 10_000) -> float:
    """Spectral norm of ``h``: dense eigenvalues for small systems, Lanczos otherwise."""
    if not h.terms:
        return 0.0
    if h.is_diagonal():
        return float(np.max(np.abs(diagonal(h))))
    if h.system_size <= dense_max:
        w = np.linalg.eigvalsh(embed_to_dense(h))
        return float(max(abs(w[0]), abs(w[-1])))
    mat = to_sparse(h)
    try:
        w = spla.eigsh(mat, k=1, which="LM", tol=tol, maxiter=maxiter, return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError("operator norm did not converge") from exc
    return float(abs(w[0]))


def locality_audit(h: HamiltonianSum) -> tuple[int, dict[int, int]]:
    """(max support size, {k: number of terms with |support| = k})."""
    hist = Counter(t.k for t in h.terms)
    return (max(hist) if hist else 0), dict(sorted(hist.items()))


# ---------------------------------------------------------------------------
# text format

def serialize_hamiltonian(h: HamiltonianSum, header: dict | None = None) -> str:
    out = []
    for key, val in (header or {}).items():
        out.append(f"# {key} = {val}")
    out += ["hamiltonian v1", f"qubits {h.system_size}"]
    for t in h.terms:
        qs = " ".join(f"q{q}" for q in t.support)
        out.append(f"term {t.label or '-'} {t.coefficient:.17g} k={t.k} {qs}")
        for z in t.block.reshape(-1):
            out.append(f"{z.real:.17g} {z.imag:.17g}")
    return "\n".join(out) + "\n"


def parse_hamiltonian(text: str) -> HamiltonianSum:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((lineno, body.split()))
    if not lines or lines[0][1] != ["hamiltonian", "v1"]:
        raise OperatorError("first line must be 'hamiltonian v1'")
    if len(lines) < 2 or lines[1][1][0] != "qubits" or len(lines[1][1]) != 2:
        raise OperatorError("second line must be 'qubits <n>'")
    n = int(lines[1][1][1])
    terms = []
    pos = 2
    while pos < len(lines):
        lineno, toks = lines[pos]
        if toks[0] != "term" or len(toks) < 5 or not toks[3].startswith("k="):
            raise OperatorError(f"line {lineno}: expected 'term <label> <coeff> k=<k> q<i>...'")
        label = "" if toks[1] == "-" else toks[1]
        try:
            coeff = float(toks[2])
            k = int(toks[3][2:])
            support = [int(tok[1:]) for tok in toks[4:] if tok.startswith("q")]
        except ValueError:
            raise OperatorError(f"line {lineno}: malformed term header") from None
        if len(support) != k or len(toks) != 4 + k:
            raise OperatorError(f"line {lineno}: support does not list k={k} qubits")
        count = 4 ** k
        rows = lines[pos + 1: pos + 1 + count]
        if len(rows) != count or any(len(r[1]) != 2 for r in rows):
            raise OperatorError(f"line {lineno}: expected {count} '<re> <im>' lines")
        try:
            vals = np.array([complex(float(r[1][0]), float(r[1][1])) for r in rows])
        except ValueError:
            raise OperatorError(f"line {lineno}: bad matrix entry") from None
        try:
            terms.append(LocalTerm(coeff, tuple(support), vals.reshape(2 ** k, 2 ** k), label))
        except OperatorError as exc:
            raise OperatorError(f"line {lineno}: {exc}") from None
        pos += 1 + count
    return HamiltonianSum(n, tuple(terms))


# ---------------------------------------------------------------------------
# small building blocks

def projector(bits: str) -> np.ndarray:
    """|bits><bits| on len(bits) qubits."""
    d = 2 ** len(bits)
    m = np.zeros((d, d), dtype=complex)
    i = int(bits, 2)
    m[i, i] = 1.0
    return m


def transition(to_bits: str, from_bits: str) -> np.ndarray:
    """|to><from| on len(bits) qubits (not Hermitian on its own)."""
    d = 2 ** len(to_bits)
    m = np.zeros((d, d), dtype=complex)
    m[int(to_bits, 2), int(from_bits, 2)] = 1.0
    return m


PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def single(op: str | np.ndarray, qubit: int, n: int, coefficient: float = 1.0, label: str = "") -> HamiltonianSum:
    block = PAULI[op] if isinstance(op, str) else op
    return HamiltonianSum(n, (LocalTerm(coefficient, (qubit,), block, label),))
