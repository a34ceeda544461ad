"""Circuit-to-Hamiltonian reductions at three locality levels.

Register layout: computational qubits 1..n first, then the clock register.
A binary clock has ceil(log2(T+1)) qubits holding t as an unsigned integer
(first clock qubit most significant); a unary clock has T qubits and time t
is the string 1^t 0^(T-t).

Locality levels:

``log``
    binary clock, H = J_in H_in + H_out + J_prop sum_t H_prop,t, plus a
    projector onto out-of-range clock values when T+1 is not a power of 2.
``five``
    unary clock with three-qubit clock windows in the propagation terms and
    J_clock H_clock; at most 5-local.
``two``
    unary clock, single-clock-qubit propagation for the non-CPHASE steps,
    H_qubit + H_time at the CPHASE steps (which must sit at multiples of L).

Every builder returns terms with unit penalty weight; :func:`assemble`
multiplies each labeled group by its coefficient.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .circuit import Circuit, Gate
from .operators import (
    HamiltonianSum,
    LocalTerm,
    projector,
    norm_upper_bound,
    transition,
)
from .spectrum import (
    EmptyKernel,
    NotPositiveSemidefinite,
    restricted_norm,
    smallest_nonzero_eigenvalue,
    zero_eigenspace_basis,
)

LOCALITIES = ("log", "five", "two")
ENCODING_FOR = {"log": "binary", "five": "unary", "two": "unary"}
# order in which penalties are eliminated in the soundness argument
ELIMINATION_ORDER = ("clock", "prop", "prop1", "prop2", "in")
PENALTY_MARGIN = 1.1
# above this, full-space norms in the penalty chain use a cheap upper bound
EXACT_NORM_MAX_QUBITS = 12

_P0 = projector("0")
_P1 = projector("1")
_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


class ReductionError(ValueError):
    pass


@dataclass(frozen=True)
class ReductionParams:
    locality: str = "log"
    clock_encoding: str | None = None
    L: int | None = None
    J_in: float = 1.0
    J_prop: float = 1.0
    J_clock: float = 1.0
    J_1: float = 1.0
    J_2: float = 1.0
    epsilon: float = 0.01
    auto_penalties: bool = False

    def __post_init__(self):
        if self.locality not in LOCALITIES:
            raise ReductionError(f"locality must be one of {LOCALITIES}")
        enc = self.clock_encoding or ENCODING_FOR[self.locality]
        object.__setattr__(self, "clock_encoding", enc)
        if enc != ENCODING_FOR[self.locality]:
            raise ReductionError(f"locality {self.locality!r} needs a {ENCODING_FOR[self.locality]} clock")
        if self.locality == "two" and (self.L is None or self.L < 4):
            raise ReductionError("the 2-local construction needs gate spacing L >= 4")
        if min(self.J_in, self.J_prop, self.J_clock, self.J_1, self.J_2) <= 0:
            raise ReductionError("penalty coefficients must be positive")
        if not 0 < self.epsilon <= 1 / 3:
            raise ReductionError("epsilon must lie in (0, 1/3]")

    def coefficient(self, group: str) -> float:
        return {
            "in": self.J_in,
            "out": 1.0,
            "prop": self.J_prop,
            "clock": self.J_clock,
            "prop1": self.J_1,
            "prop2": self.J_2,
        }[group]

    def with_penalties(self, penalties: dict[str, float]) -> "ReductionParams":
        names = {"in": "J_in", "prop": "J_prop", "clock": "J_clock", "prop1": "J_1", "prop2": "J_2"}
        return replace(self, auto_penalties=False, **{names[g]: float(v) for g, v in penalties.items()})


@dataclass(frozen=True)
class DecisionThresholds:
    a: float
    b: float

    def __post_init__(self):
        if not 0 < self.a < self.b < 1:
            raise ReductionError(f"need 0 < a < b < 1, got a={self.a}, b={self.b}")

    @classmethod
    def for_locality(cls, locality: str, epsilon: float) -> "DecisionThresholds":
        no_bound = 0.75 if locality == "log" else 0.5
        return cls(epsilon, no_bound - epsilon)

    def decide(self, energy: float) -> str:
        if energy <= self.a:
            return "YES"
        if energy >= self.b:
            return "NO"
        return "UNDECIDED"


# ---------------------------------------------------------------------------
# clock helpers

def clock_width(T: int, encoding: str) -> int:
    if encoding == "binary":
        return max(1, math.ceil(math.log2(T + 1)))
    return T


def system_size(c: Circuit, encoding: str) -> int:
    return c.n_qubits + clock_width(c.T, encoding)


def _binary_clock(t: int, width: int) -> str:
    return format(t, f"0{width}b")


def _clock_qubits(c: Circuit, encoding: str) -> tuple[int, ...]:
    n = c.n_qubits
    return tuple(range(n + 1, n + clock_width(c.T, encoding) + 1))


# ---------------------------------------------------------------------------
# input / output / clock

def build_h_in(c: Circuit, encoding: str = "binary") -> HamiltonianSum:
    """Penalize ancilla qubit i in state 1 at time 0, one term per ancilla."""
    size = system_size(c, encoding)
    clocks = _clock_qubits(c, encoding)
    if encoding == "binary":
        clock_support, clock_block = clocks, projector("0" * len(clocks))
    else:
        clock_support, clock_block = clocks[:1], _P0
    terms = [
        LocalTerm(1.0, (i,) + clock_support, np.kron(_P1, clock_block), "in")
        for i in range(c.n_x + 1, c.n_qubits + 1)
    ]
    return HamiltonianSum(size, terms)


def build_h_out(c: Circuit, encoding: str = "binary") -> HamiltonianSum:
    """(T+1) |0><0|_1 at the final time step."""
    size = system_size(c, encoding)
    clocks = _clock_qubits(c, encoding)
    if encoding == "binary":
        support, block = (1,) + clocks, np.kron(_P0, projector(_binary_clock(c.T, len(clocks))))
    else:
        support, block = (1, clocks[-1]), np.kron(_P0, _P1)
    return HamiltonianSum(size, [LocalTerm(c.T + 1, support, block, "out")])


def build_h_clock(T: int, offset: int = 0, size: int | None = None) -> HamiltonianSum:
    """sum_{i<j} |01><01|_{ij} over unary clock qubits offset+1..offset+T."""
    if T < 2:
        raise ReductionError("H_clock needs T >= 2")
    size = offset + T if size is None else size
    block = projector("01")
    terms = [
        LocalTerm(1.0, (offset + i, offset + j), block, "clock")
        for i in range(1, T + 1) for j in range(i + 1, T + 1)
    ]
    return HamiltonianSum(size, terms)


def build_h_clock_range(c: Circuit) -> HamiltonianSum:
    """Projector onto binary clock values above T (empty when 2^w = T+1)."""
    size = system_size(c, "binary")
    clocks = _clock_qubits(c, "binary")
    w = len(clocks)
    if 2 ** w == c.T + 1:
        return HamiltonianSum(size, ())
    diag = np.zeros(2 ** w)
    diag[c.T + 1:] = 1.0
    return HamiltonianSum(size, [LocalTerm(1.0, clocks, np.diag(diag), "clock")])


# ---------------------------------------------------------------------------
# propagation

def _gate_block(gate: Gate) -> tuple[tuple[int, ...], np.ndarray]:
    return gate.targets, gate.matrix


def build_h_prop_binary(c: Circuit) -> HamiltonianSum:
    """One term per gate: 1/2 (|t><t| + |t-1><t-1| - U_t |t><t-1| - U_t^dag |t-1><t|)."""
    size = system_size(c, "binary")
    clocks = _clock_qubits(c, "binary")
    w = len(clocks)
    terms = []
    for t, gate in enumerate(c.gates, start=1):
        targets, u = _gate_block(gate)
        eye = np.eye(u.shape[0])
        now, before = _binary_clock(t, w), _binary_clock(t - 1, w)
        block = 0.5 * (
            np.kron(eye, projector(now) + projector(before))
            - np.kron(u, transition(now, before))
            - np.kron(u.conj().T, transition(before, now))
        )
        terms.append(LocalTerm(1.0, targets + clocks, block, "prop"))
    return HamiltonianSum(size, terms)


def build_h_prop_five(c: Circuit) -> HamiltonianSum:
    """Unary propagation with clock windows (t-1, t, t+1): |100> -> |110>.

    Boundary steps use the two-qubit windows (1, 2) with |00> -> |10> and
    (T-1, T) with |10> -> |11>; a single-step circuit uses clock qubit 1.
    Each term is PSD and at most 2 + 3 local.
    """
    size = system_size(c, "unary")
    clocks = _clock_qubits(c, "unary")
    T = c.T
    terms = []
    for t, gate in enumerate(c.gates, start=1):
        targets, u = _gate_block(gate)
        if T == 1:
            window, before, now = (clocks[0],), "0", "1"
        elif t == 1:
            window, before, now = clocks[0:2], "00", "10"
        elif t == T:
            window, before, now = clocks[T - 2:T], "10", "11"
        else:
            window, before, now = clocks[t - 2:t + 1], "100", "110"
        eye = np.eye(u.shape[0])
        block = 0.5 * (
            np.kron(eye, projector(before) + projector(now))
            - np.kron(u, transition(now, before))
            - np.kron(u.conj().T, transition(before, now))
        )
        terms.append(LocalTerm(1.0, targets + window, block, "prop"))
    return HamiltonianSum(size, terms)


def build_h_prop_unary(c: Circuit, times=None) -> HamiltonianSum:
    """Single-clock-qubit propagation terms, split into Hermitian pieces.

    For step t: 1/2 |10><10|_{t,t+1} and 1/2 |10><10|_{t-1,t} (clock-only),
    and -1/2 (U_t ⊗ |1><0|_t + U_t^dag ⊗ |0><1|_t).  At t = 1 the second
    projector is |0><0|_1; at t = T the first one is |1><1|_T.
    """
    T = c.T
    if T < 2:
        raise ReductionError("unary propagation terms need T >= 2")
    size = system_size(c, "unary")
    clocks = _clock_qubits(c, "unary")
    times = range(1, T + 1) if times is None else times
    raise_up = transition("1", "0")
    terms = []
    for t in times:
        gate = c.gates[t - 1]
        targets, u = _gate_block(gate)
        if t < T:
            terms.append(LocalTerm(0.5, (clocks[t - 1], clocks[t]), projector("10"), "prop"))
        else:
            terms.append(LocalTerm(0.5, (clocks[T - 1],), _P1, "prop"))
        if t > 1:
            terms.append(LocalTerm(0.5, (clocks[t - 2], clocks[t - 1]), projector("10"), "prop"))
        else:
            terms.append(LocalTerm(0.5, (clocks[0],), _P0, "prop"))
        hop = np.kron(u, raise_up) + np.kron(u.conj().T, raise_up.T)
        terms.append(LocalTerm(-0.5, targets + (clocks[t - 1],), hop, "prop"))
    return HamiltonianSum(size, terms)


def h_qubit_clock_factor() -> np.ndarray:
    """Clock factor of the H_qubit terms: |1><0| + |0><1| on clock qubit t."""
    return _X


def build_h_qubit(t: int, f: int, s: int, clock_offset: int, size: int) -> list[LocalTerm]:
    """1/2 (-2|0><0|_f - 2|0><0|_s + |1><1|_f + |1><1|_s) ⊗ clock factor at t.

    Returned as four 2-local terms: for each of f, s a -|0><0| piece and a
    +1/2 |1><1| piece.
    """
    if f == s:
        raise ReductionError("H_qubit needs two distinct CPHASE qubits")
    clock = clock_offset + t
    factor = h_qubit_clock_factor()
    terms = []
    for q in (f, s):
        terms.append(LocalTerm(-1.0, (q, clock), np.kron(_P0, factor), "prop2-qubit"))
        terms.append(LocalTerm(0.5, (q, clock), np.kron(_P1, factor), "prop2-qubit"))
    return terms


def build_h_time(t: int, T: int, clock_offset: int = 0, size: int | None = None) -> HamiltonianSum:
    """Clock-only terms around a CPHASE at time t, every summand weighted by 1/8.

    Forward side (clock qubits t..t+3) and its mirror (t-3..t), each pair
    written in increasing qubit order:
    |10><10| with weights 1, 6, 1 on the pairs (t,t+1), (t+1,t+2), (t+2,t+3),
    2(|11><00| + |00><11|) on (t+1,t+2), and |1><0| + |0><1| on t+1 and t+2;
    mirrored: weights 1, 6, 1 on (t-1,t), (t-2,t-1), (t-3,t-2),
    2(|11><00| + h.c.) on (t-2,t-1), and |1><0| + h.c. on t-1 and t-2.
    """
    if not 4 <= t <= T - 3:
        raise ReductionError(f"H_time needs 4 <= t <= T-3, got t={t}, T={T}")
    size = clock_offset + T if size is None else size
    q = lambda j: clock_offset + j  # noqa: E731
    p10 = projector("10")
    swap_pair = 2 * (transition("11", "00") + transition("00", "11"))
    w = 1 / 8
    pieces = [
        (1, (t, t + 1), p10), (6, (t + 1, t + 2), p10), (1, (t + 2, t + 3), p10),
        (1, (t + 1, t + 2), swap_pair),
        (1, (t + 1,), _X), (1, (t + 2,), _X),
        (1, (t - 1, t), p10), (6, (t - 2, t - 1), p10), (1, (t - 3, t - 2), p10),
        (1, (t - 2, t - 1), swap_pair),
        (1, (t - 1,), _X), (1, (t - 2,), _X),
    ]
    terms = [LocalTerm(w * weight, tuple(q(j) for j in sup), block, "prop2-time")
             for weight, sup, block in pieces]
    return HamiltonianSum(size, terms)


# ---------------------------------------------------------------------------
# assembly

def check_padded(c: Circuit, L: int) -> None:
    """Raise unless CPHASEs occupy exactly the multiples of L with room for H_time."""
    times = c.cphase_times()
    expected = list(range(L, c.T + 1, L))
    if times != expected:
        raise ReductionError(
            f"CPHASE times {times} must be exactly the multiples of L={L} up to T={c.T}; "
            "run pad_and_normalize first"
        )
    if times and (times[0] < 4 or times[-1] > c.T - 3):
        raise ReductionError("CPHASE times must lie in [4, T-3]")
    for g in c.gates:
        if len(g.targets) > 1 and not g.is_cphase:
            raise ReductionError(f"gate {g} is outside the {{single-qubit, CPHASE}} gate set")


def build_groups(c: Circuit, p: ReductionParams) -> dict[str, HamiltonianSum]:
    """Unit-weight labeled groups of the construction selected by ``p.locality``."""
    enc = p.clock_encoding
    groups = {"in": build_h_in(c, enc), "out": build_h_out(c, enc)}
    if p.locality == "log":
        groups["prop"] = build_h_prop_binary(c)
        groups["clock"] = build_h_clock_range(c)
    elif p.locality == "five":
        groups["prop"] = build_h_prop_five(c)
        size = system_size(c, enc)
        groups["clock"] = build_h_clock(c.T, c.n_qubits, size) if c.T >= 2 else HamiltonianSum(size, ())
    else:
        check_padded(c, p.L)
        size = system_size(c, enc)
        cz_times = c.cphase_times()
        t1 = [t for t in range(1, c.T + 1) if t not in cz_times]
        groups["prop1"] = build_h_prop_unary(c, t1).relabeled("prop1")
        prop2 = []
        for t in cz_times:
            f, s = c.gates[t - 1].targets
            prop2 += build_h_qubit(t, f, s, c.n_qubits, size)
            prop2 += build_h_time(t, c.T, c.n_qubits, size).terms
        groups["prop2"] = HamiltonianSum(size, prop2)
        groups["clock"] = build_h_clock(c.T, c.n_qubits, size)
    return {k: v for k, v in groups.items() if v.terms or k in ("in", "out")}


def combine(groups: dict[str, HamiltonianSum], coefficients: dict[str, float]) -> HamiltonianSum:
    size = next(iter(groups.values())).system_size
    total = HamiltonianSum(size, ())
    for name in ("out", "in", "prop", "prop1", "prop2", "clock"):
        if name in groups:
            total = total + groups[name].scaled(coefficients.get(name, 1.0))
    return total


def assemble(c: Circuit, p: ReductionParams) -> tuple[HamiltonianSum, DecisionThresholds]:
    """Full labeled Hamiltonian for ``c`` plus the decision thresholds a, b."""
    if p.auto_penalties:
        p = auto_penalties(c, p).params
    groups = build_groups(c, p)
    h = combine(groups, {g: p.coefficient(g) for g in groups})
    return h, DecisionThresholds.for_locality(p.locality, p.epsilon)


# ---------------------------------------------------------------------------
# penalty selection

def lemma_penalty(norm_h1: float, gap: float, margin: float = PENALTY_MARGIN) -> float:
    """J_2 with J * J_2 = margin * (2 ||H_1|| + 8 ||H_1||^2)."""
    if gap < 1e-9:
        raise ReductionError(f"penalty gap {gap:.3g} is below 1e-9")
    return margin * (2 * norm_h1 + 8 * norm_h1 ** 2) / gap


def choose_penalties(h_rest: HamiltonianSum, h_penalty: HamiltonianSum,
                     within: np.ndarray | None = None, margin: float = PENALTY_MARGIN) -> float:
    """Coefficient J_2 making lambda(H_1|S_2) - 1/8 <= lambda(H_1 + J_2 H_2).

    ``within`` optionally restricts both operators to a subspace (orthonormal
    columns), as happens further down the elimination chain.
    """
    try:
        gap = smallest_nonzero_eigenvalue(h_penalty, within)
    except EmptyKernel:
        raise ReductionError("penalty has no zero eigenvalue") from None
    norm = restricted_norm(h_rest, within)
    return lemma_penalty(norm, gap, margin)


@dataclass
class PenaltyStage:
    group: str
    norm_rest: float
    gap: float | None
    J: float
    kernel_dim: int | None
    lemma_ok: bool
    note: str = ""


@dataclass
class PenaltyChain:
    params: ReductionParams
    stages: list[PenaltyStage] = field(default_factory=list)
    kernel: np.ndarray | None = None   # joint constraint kernel, if every stage had one

    @property
    def lemma_ok(self) -> bool:
        return all(s.lemma_ok for s in self.stages)

    @property
    def guaranteed_loss(self) -> float:
        """Energy the chain may lose: 1/8 per stage."""
        return len(self.stages) / 8


def constraint_kernels(groups: dict[str, HamiltonianSum]):
    """Nested kernels along the elimination order.

    Returns (order, bases, notes, broken).  bases[k] is the subspace on
    which group order[k] is examined (None for the full space) and bases[-1]
    the joint kernel.  When a group is not PSD, or has no kernel, on its
    subspace, the chain stops there: notes says why, broken is True and the
    later entries repeat the last valid subspace.
    """
    order = [g for g in ELIMINATION_ORDER if g in groups and groups[g].terms]
    bases: list[np.ndarray | None] = [None]
    notes: dict[str, str] = {}
    broken = False
    for g in order:
        if broken:
            bases.append(bases[-1])
            continue
        try:
            bases.append(zero_eigenspace_basis(groups[g], within=bases[-1]))
        except NotPositiveSemidefinite as exc:
            notes[g] = f"not PSD on the remaining subspace (min eigenvalue {exc.min_eigenvalue:.12g})"
            broken = True
            bases.append(bases[-1])
        except EmptyKernel:
            notes[g] = "no zero eigenvalue on the remaining subspace"
            broken = True
            bases.append(bases[-1])
    return order, bases, notes, broken


def auto_penalties(c: Circuit, p: ReductionParams) -> PenaltyChain:
    """Pick every penalty coefficient with the projection-lemma rule.

    Penalties are eliminated in the order clock, prop/prop1, prop2, in; each
    coefficient must dominate everything eliminated after it, so they are
    computed innermost first: J_in against H_out on the joint kernel of the
    other constraints, then prop2 against H_out + J_in H_in, and so on out
    to J_clock on the full space.  Coefficients are floored at 1.
    """
    groups = build_groups(c, p)
    order, bases, notes, broken = constraint_kernels(groups)
    rest = groups["out"]
    chosen: dict[str, float] = {}
    stages = []
    for k in reversed(range(len(order))):
        g = order[k]
        within = bases[k]
        bounded = within is None and rest.system_size > EXACT_NORM_MAX_QUBITS
        # overestimating ||rest|| only makes J larger, so the lemma still holds
        norm = norm_upper_bound(rest) if bounded else restricted_norm(rest, within)
        kdim = bases[k + 1].shape[1] if bases[k + 1] is not bases[k] else None
        try:
            gap = smallest_nonzero_eigenvalue(groups[g], within)
            J = max(lemma_penalty(norm, gap), 1.0)
            ok = g not in notes and not _upstream_broken(order, k, notes)
            note = notes.get(g, "")
            if not ok and not note:
                note = "an earlier constraint broke the kernel chain"
            if bounded:
                note = (note + "; " if note else "") + "norm is an upper bound (row-sum/triangle)"
        except (NotPositiveSemidefinite, EmptyKernel):
            gap, J, ok = None, 1.0, False
            note = notes.get(g, "") + "; lemma precondition unmet, coefficient set to 1"
        chosen[g] = J
        stages.append(PenaltyStage(g, norm, gap, J, kdim, ok, note))
        rest = rest + groups[g].scaled(J)
    stages.reverse()
    params = p.with_penalties(chosen)
    return PenaltyChain(params, stages, None if broken else bases[-1])


def _upstream_broken(order, k, notes) -> bool:
    return any(g in notes for g in order[:k])
