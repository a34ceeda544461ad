"""Minimal eigenvalues (full and kernel-restricted) and the projection-lemma check."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla

from .operators import (
    DENSE_MAX_QUBITS,
    ITERATIVE_MAX_QUBITS,
    ConvergenceError,
    HamiltonianSum,
    OperatorError,
    apply,
    diagonal,
    operator_norm,
    to_sparse,
)

KERNEL_CUTOFF = 1e-9
DENSE_TOL = 1e-10
ITERATIVE_TOL = 1e-7
MAX_ITER = 10_000
DENSE_BLOCK_MAX = 4096
# double precision leaves ~eps*scale absolute error; beyond this nothing is certifiable
MAX_CERTIFIABLE_SCALE = 1e9


class NotPositiveSemidefinite(ValueError):
    def __init__(self, min_eigenvalue: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(f"operator is not PSD on the given subspace (min eigenvalue {min_eigenvalue:.6g})")


class EmptyKernel(ValueError):
    pass


@dataclass
class SpectrumResult:
    """Smallest eigenvalue with its residual certificate.

    ``residual`` is ||H v - lambda v|| for the returned unit vector.  For
    heavily penalized operators the attainable residual scales with the
    operator's magnitude, so ``scale`` records ||H|| (or a bound on it) and
    :meth:`certified` compares ``residual / max(1, scale)`` to ``tol``.
    """

    lambda_min: float
    method: str
    residual: float
    dim: int
    restriction: str | None = None
    scale: float = 1.0
    vector: np.ndarray | None = None
    blocks: int = 1

    def certified(self, tol: float | None = None) -> bool:
        if tol is None:
            tol = DENSE_TOL if self.method == "dense" else ITERATIVE_TOL
        return self.residual <= tol * max(1.0, self.scale)


# ---------------------------------------------------------------------------
# full-space minimal eigenvalue

def _block_min_dense(mat):
    w, v = np.linalg.eigh(mat.toarray() if hasattr(mat, "toarray") else mat)
    return w[0], v[:, 0]


def _block_min_iterative(mat, sigma, tol, maxiter):
    dim = mat.shape[0]
    op = spla.LinearOperator((dim, dim), matvec=lambda x: sigma * x - mat @ x, dtype=complex)
    v0 = np.ones(dim, dtype=complex) / np.sqrt(dim)
    try:
        theta, vec = spla.eigsh(op, k=1, which="LA", tol=tol * 1e-3, maxiter=maxiter, v0=v0)
    except spla.ArpackNoConvergence as exc:
        partial = exc.eigenvectors
        residual = float("nan")
        if partial is not None and partial.shape[1]:
            x = partial[:, 0]
            lam = np.vdot(x, mat @ x).real
            residual = float(np.linalg.norm(mat @ x - lam * x))
        raise ConvergenceError("Lanczos did not converge", residual) from exc
    x = vec[:, 0]
    x = x / np.linalg.norm(x)
    lam = float(np.vdot(x, mat @ x).real)
    return lam, x


def min_eigenvalue(h: HamiltonianSum, method: str = "auto", tol: float | None = None,
                   maxiter: int = MAX_ITER) -> SpectrumResult:
    """Smallest eigenvalue of ``h`` with a residual certificate.

    ``method`` is ``"dense"``, ``"iterative"`` or ``"auto"``.  The basis is
    first split into the connected components of the operator's sparsity
    graph; each component is an invariant subspace, so diagonalizing them
    separately is exact and keeps large penalties on decoupled sectors from
    polluting the precision of the others.  Components whose Gershgorin
    lower bound exceeds the best eigenvalue found so far are skipped.  The
    iterative path runs restarted Lanczos on sigma*I - H with sigma the
    component's Gershgorin norm bound.
    """
    n = h.system_size
    if method not in ("auto", "dense", "iterative"):
        raise ValueError(f"unknown method {method!r}")
    if method == "dense" and n > DENSE_MAX_QUBITS:
        raise OperatorError(f"{n} qubits is above the dense cap of {DENSE_MAX_QUBITS}")
    if n > ITERATIVE_MAX_QUBITS:
        raise OperatorError(f"{n} qubits is above the iterative cap of {ITERATIVE_MAX_QUBITS}")

    mat = to_sparse(h)
    n_comp, comp = csgraph.connected_components(abs(mat) > 0, directed=False)
    order = np.argsort(comp, kind="stable")
    bounds = np.searchsorted(comp[order], np.arange(n_comp + 1))

    # Gershgorin discs per component: skip any whose lower edge is above the best so far
    d = mat.diagonal().real
    radius = np.asarray(abs(mat).sum(axis=1)).ravel() - np.abs(d)
    lower, upper = d - radius, d + radius
    blocks = []
    for b in range(n_comp):
        idx = order[bounds[b]:bounds[b + 1]]
        scale = float(max(np.abs(lower[idx]).max(), np.abs(upper[idx]).max(), 1.0))
        blocks.append((float(lower[idx].min()), scale, idx))
    blocks.sort(key=lambda blk: blk[0])

    best = None
    used_iterative = False
    for lb, scale, idx in blocks:
        if best is not None and lb > best[0]:
            break
        sub = mat[idx][:, idx]
        if len(idx) > 1 and scale > MAX_CERTIFIABLE_SCALE:
            raise ConvergenceError(
                f"operator scale {scale:.3g} leaves no digits for a certified eigenvalue "
                f"in a {len(idx)}-dimensional block"
            )
        if len(idx) == 1:
            lam, x = sub[0, 0].real, np.ones(1, dtype=complex)
        elif method == "dense" or (method == "auto" and len(idx) <= DENSE_BLOCK_MAX) or len(idx) < 3:
            lam, x = _block_min_dense(sub)
        else:
            used_iterative = True
            lam, x = _block_min_iterative(sub, scale, tol or ITERATIVE_TOL, maxiter)
        if best is None or lam < best[0]:
            best = (float(lam), idx, x, scale)

    lam, idx, x, sigma = best
    vec = np.zeros(h.dim, dtype=complex)
    vec[idx] = x
    residual = float(np.linalg.norm(mat @ vec - lam * vec))
    result = SpectrumResult(
        lambda_min=lam,
        method="iterative" if used_iterative else "dense",
        residual=residual,
        dim=h.dim,
        scale=sigma,
        vector=vec,
        blocks=n_comp,
    )
    if used_iterative and not result.certified(tol):
        raise ConvergenceError("Lanczos result failed its residual certificate", residual)
    return result


# ---------------------------------------------------------------------------
# restricted spectra

def check_orthonormal(basis: np.ndarray, tol: float = 1e-10) -> float:
    gram = basis.conj().T @ basis
    residual = float(np.max(np.abs(gram - np.eye(basis.shape[1])))) if basis.shape[1] else 0.0
    if residual > tol:
        raise ValueError(f"basis is not orthonormal (Gram residual {residual:.3g})")
    return residual


def compress(h: HamiltonianSum, basis: np.ndarray | None) -> np.ndarray:
    """B^dag H B as a dense matrix; ``basis=None`` means the full space."""
    mat = to_sparse(h)
    if basis is None:
        return mat.toarray()
    m = basis.conj().T @ (mat @ basis)
    return (m + m.conj().T) / 2


def zero_eigenspace_basis(h_penalty: HamiltonianSum, within: np.ndarray | None = None,
                          cutoff: float = KERNEL_CUTOFF) -> np.ndarray:
    """Orthonormal basis (as columns) of the kernel of a PSD penalty.

    With ``within`` the kernel is taken inside that subspace (columns of an
    orthonormal basis).  Penalties that are diagonal in the computational
    basis, such as the clock constraints, take an exact fast path that
    returns basis vectors.
    """
    if within is None and h_penalty.is_diagonal():
        d = diagonal(h_penalty).real
        if d.min() < -cutoff:
            raise NotPositiveSemidefinite(float(d.min()))
        idx = np.flatnonzero(d < cutoff)
        if idx.size == 0:
            raise EmptyKernel("penalty has no zero eigenvalue")
        basis = np.zeros((h_penalty.dim, idx.size), dtype=complex)
        basis[idx, np.arange(idx.size)] = 1.0
        return basis
    if within is None and h_penalty.system_size > DENSE_MAX_QUBITS:
        raise OperatorError("kernel of a non-diagonal penalty needs the dense path")
    w, v = np.linalg.eigh(compress(h_penalty, within))
    if w[0] < -cutoff:
        raise NotPositiveSemidefinite(float(w[0]))
    keep = w < cutoff
    if not keep.any():
        raise EmptyKernel("penalty has no zero eigenvalue on the given subspace")
    vecs = v[:, keep]
    return vecs if within is None else within @ vecs


def restricted_spectrum(h: HamiltonianSum, basis: np.ndarray | None) -> np.ndarray:
    """All eigenvalues of h compressed onto ``basis`` (ascending)."""
    return np.linalg.eigvalsh(compress(h, basis))


def smallest_nonzero_eigenvalue(h_penalty: HamiltonianSum, within: np.ndarray | None = None,
                                cutoff: float = KERNEL_CUTOFF) -> float:
    """Spectral gap above the kernel of a PSD penalty (restricted to ``within``)."""
    if within is None and h_penalty.is_diagonal():
        w = np.sort(diagonal(h_penalty).real)
    else:
        w = restricted_spectrum(h_penalty, within)
    if w[0] < -cutoff:
        raise NotPositiveSemidefinite(float(w[0]))
    if w[0] >= cutoff:
        raise EmptyKernel("penalty has no zero eigenvalue")
    above = w[w >= cutoff]
    return float(above[0]) if above.size else float("inf")


def restricted_norm(h: HamiltonianSum, basis: np.ndarray | None) -> float:
    if basis is None:
        return operator_norm(h)
    if not h.terms:
        return 0.0
    w = restricted_spectrum(h, basis)
    return float(max(abs(w[0]), abs(w[-1])))


def restricted_min_eigenvalue(h1: HamiltonianSum, basis: np.ndarray,
                              restriction: str | None = None) -> SpectrumResult:
    """Smallest eigenvalue of B^dag H_1 B for an orthonormal basis B."""
    basis = np.asarray(basis, dtype=complex)
    if basis.ndim != 2 or basis.shape[0] != h1.dim:
        raise ValueError("basis must be a (2^n, d) array")
    check_orthonormal(basis)
    m = compress(h1, basis)
    w, v = np.linalg.eigh(m)
    x = v[:, 0]
    residual = float(np.linalg.norm(m @ x - w[0] * x))
    return SpectrumResult(
        lambda_min=float(w[0]),
        method="dense",
        residual=residual,
        dim=basis.shape[1],
        restriction=restriction or f"{basis.shape[1]}-dimensional subspace",
        scale=max(1.0, float(np.max(np.abs(w)))),
        vector=basis @ x,
    )


# ---------------------------------------------------------------------------
# projection lemma

@dataclass
class ProjectionReport:
    lambda_full: float           # lambda(H_1 + H_2)
    lambda_restricted: float     # lambda(H_1 | S_2)
    norm_h1: float
    gap: float                   # smallest nonzero eigenvalue J of H_2
    lower_bound: float | None    # lambda(H_1|S_2) - ||H_1||^2 / (J - 2||H_1||)
    lower_slack: float | None    # lambda_full - lower_bound
    upper_slack: float           # lambda_restricted - lambda_full
    precondition_met: bool       # J > 2 ||H_1||
    tol: float = 1e-9

    @property
    def upper_ok(self) -> bool:
        return self.upper_slack >= -self.tol

    @property
    def lower_ok(self) -> bool | None:
        if not self.precondition_met:
            return None
        return self.lower_slack >= -self.tol

    @property
    def passed(self) -> bool:
        return self.upper_ok and self.lower_ok is not False


def projection_lemma_check(h1: HamiltonianSum, h2: HamiltonianSum, tol: float = 1e-9) -> ProjectionReport:
    """Evaluate both sides of the projection lemma for H_1 and a PSD penalty H_2."""
    if h1.system_size != h2.system_size:
        raise OperatorError("system sizes differ")
    kernel = zero_eigenspace_basis(h2)
    lam_res = restricted_min_eigenvalue(h1, kernel).lambda_min
    lam_full = min_eigenvalue(h1 + h2, method="dense").lambda_min
    norm = operator_norm(h1, dense_max=DENSE_MAX_QUBITS)
    gap = smallest_nonzero_eigenvalue(h2)
    ok = gap > 2 * norm
    lower = slack = None
    if ok:
        lower = lam_res - norm ** 2 / (gap - 2 * norm)
        slack = lam_full - lower
    return ProjectionReport(
        lambda_full=lam_full,
        lambda_restricted=lam_res,
        norm_h1=norm,
        gap=gap,
        lower_bound=lower,
        lower_slack=slack,
        upper_slack=lam_res - lam_full,
        precondition_met=ok,
        tol=tol,
    )


def random_lemma_instance(rng: np.random.Generator, n_qubits: int, h1_norm: float = 0.25,
                          penalty: float = 10.0, rank: int | None = None):
    """Random (H_1, H_2): H_1 Hermitian with ||H_1|| = h1_norm, H_2 = penalty * projector."""
    from .operators import LocalTerm

    dim = 2 ** n_qubits
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    herm = (a + a.conj().T) / 2
    herm *= h1_norm / np.max(np.abs(np.linalg.eigvalsh(herm)))
    if rank is None:
        rank = int(rng.integers(1, dim))
    q, _ = np.linalg.qr(rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank)))
    proj = q @ q.conj().T
    proj = (proj + proj.conj().T) / 2
    support = tuple(range(1, n_qubits + 1))
    h1 = HamiltonianSum(n_qubits, (LocalTerm(1.0, support, herm, "h1"),))
    h2 = HamiltonianSum(n_qubits, (LocalTerm(penalty, support, proj, "h2"),))
    return h1, h2


def residual_of(h: HamiltonianSum, vector: np.ndarray, value: float) -> float:
    return float(np.linalg.norm(apply(h, vector) - value * vector))
