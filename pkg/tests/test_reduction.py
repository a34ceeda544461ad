import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lhlc.circuit import Circuit, Gate, circuit_from_gates, cnot, min_spacing, pad_and_normalize
from lhlc.history import build_history_state
from lhlc.instances import copy_accept, move_reject, swap_reject
from lhlc.operators import (
    HamiltonianSum,
    PAULI,
    apply,
    embed_to_dense,
    locality_audit,
    projector,
    single,
)
from lhlc.reduction import (
    DecisionThresholds,
    ReductionError,
    ReductionParams,
    assemble,
    auto_penalties,
    build_groups,
    build_h_clock,
    build_h_in,
    build_h_out,
    build_h_prop_binary,
    build_h_prop_five,
    build_h_prop_unary,
    build_h_qubit,
    build_h_time,
    check_padded,
    choose_penalties,
    clock_width,
    combine,
    lemma_penalty,
)
from lhlc.spectrum import min_eigenvalue, zero_eigenspace_basis

from oracles import lowest
from strategies import circuits, circuits_with_witness

P0, P1 = projector("0"), projector("1")


def legal_unary_basis(c: Circuit) -> np.ndarray:
    """Computational register ⊗ legal unary clock strings, as orthonormal columns."""
    n, T = c.n_qubits, c.T
    cols = []
    for x in range(2 ** n):
        for t in range(T + 1):
            v = np.zeros(2 ** (n + T), dtype=complex)
            v[(x << T) | int("1" * t + "0" * (T - t), 2)] = 1
            cols.append(v)
    return np.array(cols).T


# parameters -----------------------------------------------------------------

def test_params_validation():
    assert ReductionParams(locality="five").clock_encoding == "unary"
    with pytest.raises(ReductionError):
        ReductionParams(locality="two")
    with pytest.raises(ReductionError):
        ReductionParams(locality="two", L=3)
    with pytest.raises(ReductionError):
        ReductionParams(J_in=0)
    with pytest.raises(ReductionError):
        ReductionParams(epsilon=0.5)
    with pytest.raises(ReductionError):
        ReductionParams(locality="log", clock_encoding="unary")


def test_thresholds():
    assert DecisionThresholds.for_locality("two", 0.01) == DecisionThresholds(0.01, 0.49)
    assert DecisionThresholds.for_locality("log", 0.01).b == pytest.approx(0.74)
    with pytest.raises(ReductionError):
        DecisionThresholds(0.5, 0.4)
    th = DecisionThresholds(0.1, 0.4)
    assert [th.decide(e) for e in (0.05, 0.2, 0.9)] == ["YES", "UNDECIDED", "NO"]


# H_in / H_out -----------------------------------------------------------------

def test_h_in_without_ancilla_is_empty():
    assert len(build_h_in(circuit_from_gates(1, 0, [("X", 1)]))) == 0


def test_h_in_unary_term():
    c = circuit_from_gates(1, 1, [("X", 1)] * 3)
    h = build_h_in(c, "unary")
    (term,) = h.terms
    assert term.support == (2, 3) and term.k == 2
    assert np.allclose(term.block, np.kron(P1, P0))
    hs = build_history_state(c, "1", "unary")
    assert abs(np.vdot(hs.state, apply(h, hs.state))) < 1e-15


def test_h_out_binary_T1():
    c = circuit_from_gates(1, 0, [("X", 1)])
    (term,) = build_h_out(c).terms
    assert term.coefficient == 2
    assert term.support == (1, 2)
    assert np.allclose(term.block, np.kron(P0, P1))


@pytest.mark.parametrize("gate, expected", [("X", 0.0), ("I", 1.0)])
def test_h_out_on_history_state(gate, expected):
    c = circuit_from_gates(1, 0, [(gate, 1)])
    hs = build_history_state(c, "0")
    assert np.vdot(hs.state, apply(build_h_out(c), hs.state)).real == pytest.approx(expected, abs=1e-12)


# propagation ------------------------------------------------------------------

def test_prop_binary_identity_T1():
    c = circuit_from_gates(1, 0, [("I", 1)])
    (term,) = build_h_prop_binary(c).terms
    assert np.allclose(term.block, np.kron(np.eye(2), 0.5 * (np.eye(2) - PAULI["X"])))
    assert np.allclose(np.linalg.eigvalsh(term.block), [0, 0, 1, 1])


def test_prop_binary_cphase_locality():
    c = Circuit(2, 0, tuple(cnot(1, 2) * 2))
    h = build_h_prop_binary(c)
    w = clock_width(c.T, "binary")
    assert max(t.k for t in h.terms) == 2 + w == 2 + int(np.ceil(np.log2(c.T + 1)))
    assert len(h) == c.T


def test_prop_unary_boundary_and_locality():
    c = circuit_from_gates(1, 0, [("X", 1), ("X", 1), ("H", 1)])
    h = build_h_prop_unary(c)
    first = h.terms[:3]
    assert first[1].support == (2,) and np.allclose(first[1].block, P0)
    last = h.terms[-3:]
    assert last[0].support == (4,) and np.allclose(last[0].block, P1)
    hops = [t for t in h.terms if t.coefficient < 0]
    assert all(t.k == 2 for t in hops)
    assert max(t.k for t in h.terms) <= 3
    with pytest.raises(ReductionError):
        build_h_prop_unary(circuit_from_gates(1, 0, [("X", 1)]))


def test_prop_unary_history_expectation_zero():
    c = circuit_from_gates(1, 0, [("X", 1), ("X", 1)])
    hs = build_history_state(c, "0", "unary")
    out = apply(build_h_prop_unary(c), hs.state)
    assert abs(np.vdot(hs.state, out)) < 1e-12
    # the single-clock-qubit hop leaks into illegal clock strings; nothing remains on legal ones
    legal = legal_unary_basis(c)
    assert np.linalg.norm(legal.conj().T @ out) < 1e-12
    assert np.linalg.norm(out) > 0.1


def test_prop_unary_is_psd_on_legal_clocks_only():
    c = circuit_from_gates(1, 0, [("H", 1), ("X", 1), ("S", 1)])
    legal = legal_unary_basis(c)
    for t in (1, 2, 3):
        m = embed_to_dense(build_h_prop_unary(c, [t]))
        assert np.linalg.eigvalsh(legal.conj().T @ m @ legal)[0] > -1e-10
    # the single-qubit hopping pieces see illegal clock strings too
    assert lowest(embed_to_dense(build_h_prop_unary(c, [2]))) < -0.1


def test_prop_five_terms_are_psd_and_five_local():
    c = Circuit(2, 0, (Gate("X", (1,)),) + tuple(cnot(1, 2)) + (Gate("H", (2,)),))
    h = build_h_prop_five(c)
    assert locality_audit(h)[0] == 5
    for term in h.terms:
        assert np.linalg.eigvalsh(term.block)[0] > -1e-12


# clock ----------------------------------------------------------------------

def test_h_clock_examples():
    assert len(build_h_clock(2)) == 1
    h = build_h_clock(3)
    assert len(h) == 3
    basis = zero_eigenspace_basis(h)
    strings = sorted(format(int(np.flatnonzero(col)[0]), "03b") for col in basis.T)
    assert strings == ["000", "100", "110", "111"]
    d = embed_to_dense(h).diagonal().real
    assert d[int("010", 2)] >= 1
    with pytest.raises(ReductionError):
        build_h_clock(1)


@pytest.mark.parametrize("T", range(2, 9))
def test_h_clock_kernel_dimension(T):
    h = build_h_clock(T)
    assert len(h) == T * (T - 1) // 2
    assert zero_eigenspace_basis(h).shape[1] == T + 1


# 2-local pieces -------------------------------------------------------------------

def test_h_qubit_terms():
    terms = build_h_qubit(4, 1, 2, clock_offset=2, size=2 + 7)
    assert len(terms) == 4
    # computational factor per qubit, read off the bracket: -2 on |0>, +1 on |1>
    for q in (1, 2):
        pieces = [t for t in terms if t.support == (q, 6)]
        factor = sum(2 * t.coefficient * t.block.reshape(2, 2, 2, 2)[:, 0, :, 1] for t in pieces)
        assert np.allclose(factor, np.diag([-2, 1]))
    for t in terms:
        assert t.k == 2
        assert np.max(np.abs(t.block - t.block.conj().T)) < 1e-12
    with pytest.raises(ReductionError):
        build_h_qubit(4, 1, 1, 2, 9)


def test_h_time_structure():
    h = build_h_time(4, 7)
    assert len(h) == 12
    assert max(t.k for t in h.terms) == 2
    heavy = [t for t in h.terms if t.support == (5, 6) and np.allclose(t.block, projector("10"))]
    assert len(heavy) == 1 and heavy[0].coefficient == pytest.approx(6 / 8)
    m = embed_to_dense(h)
    assert np.max(np.abs(m - m.conj().T)) < 1e-12
    for bad in (3, 5):
        with pytest.raises(ReductionError):
            build_h_time(bad, 7)


def test_check_padded():
    c = circuit_from_gates(2, 0, [("CPHASE", (1, 2))])
    with pytest.raises(ReductionError):
        check_padded(c, 4)
    check_padded(pad_and_normalize(c, 4), 4)


# assembly -------------------------------------------------------------------

def test_assemble_x_log():
    c = circuit_from_gates(1, 0, [("X", 1)])
    h, th = assemble(c, ReductionParams(J_in=1, J_prop=1))
    assert h.system_size == 2 and len(h) == 2
    assert min_eigenvalue(h).lambda_min == pytest.approx(0.0, abs=1e-12)
    assert th == DecisionThresholds(0.01, 0.74)


def test_five_local_without_cphase_is_four_local():
    c = circuit_from_gates(1, 0, [("X", 1)] * 3)
    h, _ = assemble(c, ReductionParams(locality="five"))
    # one computational qubit plus a three-qubit clock window
    assert locality_audit(h)[0] == 4


def test_padded_cphase_two_local():
    c = pad_and_normalize(circuit_from_gates(2, 0, [("CPHASE", (1, 2))]), 4)
    h, th = assemble(c, ReductionParams(locality="two", L=4))
    assert locality_audit(h)[0] == 2
    assert set(h.group_names()) == {"out", "prop1", "prop2-qubit", "prop2-time", "clock"}
    assert th.b == pytest.approx(0.49)


def test_assemble_requires_padding_for_two():
    with pytest.raises(ReductionError):
        assemble(move_reject(), ReductionParams(locality="two", L=4))


@given(circuits(max_qubits=3, max_T=6))
@settings(max_examples=40, deadline=None)
def test_locality_bounds(c):
    log, _ = assemble(c, ReductionParams())
    assert locality_audit(log)[0] <= 2 + int(np.ceil(np.log2(c.T + 1)))
    five, _ = assemble(c, ReductionParams(locality="five"))
    assert locality_audit(five)[0] <= 5
    L = min_spacing(c)
    padded = pad_and_normalize(c, L)
    two, _ = assemble(padded, ReductionParams(locality="two", L=L))
    assert locality_audit(two)[0] == 2


@given(circuits(max_qubits=2, max_T=4))
@settings(max_examples=30, deadline=None)
def test_constraint_groups_are_psd(c):
    for loc in ("log", "five"):
        groups = build_groups(c, ReductionParams(locality=loc))
        for name in ("in", "out", "clock"):
            if name in groups and groups[name].terms:
                assert lowest(embed_to_dense(groups[name])) > -1e-10
        for term in groups["prop"].terms:
            assert np.linalg.eigvalsh(term.block)[0] > -1e-10


@given(circuits_with_witness(max_qubits=3, max_T=5))
@settings(max_examples=40, deadline=None)
def test_history_state_annihilated_by_constraints(cy):
    c, y = cy
    for loc in ("log", "five"):
        p = ReductionParams(locality=loc)
        groups = build_groups(c, p)
        hs = build_history_state(c, y, p.clock_encoding)
        for name in ("in", "prop", "clock"):
            if name in groups:
                assert np.linalg.norm(apply(groups[name], hs.state)) < 1e-9


@given(circuits_with_witness(max_qubits=2, max_T=5))
@settings(max_examples=25, deadline=None)
def test_two_local_history_state_in_constraint_kernels(cy):
    c, y = cy
    L = min_spacing(c)
    padded = pad_and_normalize(c, L)
    groups = build_groups(padded, ReductionParams(locality="two", L=L))
    hs = build_history_state(padded, y, "unary")
    for name in ("in", "clock"):
        if name in groups:
            assert np.linalg.norm(apply(groups[name], hs.state)) < 1e-9
    out = apply(groups["prop1"], hs.state)
    assert abs(np.vdot(hs.state, out)) < 1e-9
    assert np.linalg.norm(legal_unary_basis(padded).conj().T @ out) < 1e-9


@given(circuits(max_qubits=2, max_T=3), st.sampled_from(["in", "prop", "clock"]))
@settings(max_examples=25, deadline=None)
def test_lambda_monotone_in_penalty(c, which):
    groups = build_groups(c, ReductionParams(locality="five"))
    if which not in groups:
        return
    values = []
    for J in (0.1, 0.5, 1.0, 4.0, 16.0):
        coeffs = {g: 1.0 for g in groups}
        coeffs[which] = J
        values.append(lowest(embed_to_dense(combine(groups, coeffs))))
    assert all(b >= a - 1e-10 for a, b in zip(values, values[1:]))


# penalties ------------------------------------------------------------------

def test_lemma_penalty_arithmetic():
    assert lemma_penalty(0.3, 1.0) == pytest.approx((0.6 + 0.72) * 1.1)
    assert lemma_penalty(0.3, 1.0) == pytest.approx(1.452)
    assert lemma_penalty(0.0, 1.0) == 0.0
    with pytest.raises(ReductionError):
        lemma_penalty(1.0, 1e-12)


def test_choose_penalties():
    h1 = single("X", 1, 1, 0.3)
    h2 = single(P1, 1, 1)
    assert choose_penalties(h1, h2) == pytest.approx(1.452)
    with pytest.raises(ReductionError):
        choose_penalties(h1, single(np.eye(2), 1, 1))


@pytest.mark.parametrize("circuit, locality", [(swap_reject(), "log"), (move_reject(), "five"), (copy_accept(), "five")])
def test_auto_penalty_chain_log_and_five(circuit, locality):
    chain = auto_penalties(circuit, ReductionParams(locality=locality))
    assert [s.group for s in chain.stages] == ["clock", "prop", "in"]
    assert chain.lemma_ok
    assert chain.kernel is not None
    for s in chain.stages:
        assert s.J >= 1.0
        assert s.J * s.gap >= 2 * s.norm_rest + 8 * s.norm_rest ** 2
    # the clock penalty dominates everything inside it
    assert chain.params.J_clock >= chain.params.J_prop >= chain.params.J_in


def test_auto_penalty_chain_two_local_records_broken_stage():
    c = pad_and_normalize(copy_accept(), 4)
    chain = auto_penalties(c, ReductionParams(locality="two", L=4))
    by_group = {s.group: s for s in chain.stages}
    assert list(by_group) == ["clock", "prop1", "prop2", "in"]
    assert by_group["clock"].lemma_ok and by_group["prop1"].lemma_ok
    assert not by_group["prop2"].lemma_ok and "not PSD" in by_group["prop2"].note
    assert chain.kernel is None
