"""End-to-end check of one instance: oracle decision vs. the spectrum of its Hamiltonian."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, pad_and_normalize
from .history import build_history_state, history_energy
from .operators import ConvergenceError, HamiltonianSum, locality_audit
from .oracle import Decision, brute_force_max_acceptance, decide_instance
from .reduction import (
    DecisionThresholds,
    PenaltyChain,
    ReductionParams,
    build_groups,
    combine,
    auto_penalties,
    constraint_kernels,
)
from .spectrum import SpectrumResult, min_eigenvalue, restricted_min_eigenvalue

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PROMISE, EXIT_NUMERIC = 0, 1, 2, 3, 4


@dataclass
class VerifyReport:
    circuit: Circuit                   # the circuit actually compiled (padded for "two")
    params: ReductionParams
    thresholds: DecisionThresholds
    decision: Decision
    max_acceptance: float
    witness: str
    hamiltonian: HamiltonianSum
    chain: PenaltyChain | None
    spectrum: SpectrumResult | None
    spectrum_note: str
    upper_bound: float                 # lambda of H compressed to a constraint subspace
    upper_bound_space: str
    lower_bound: float | None          # upper_bound - depth/8 when every eliminated stage met the lemma
    history_total: float
    history_breakdown: dict[str, float]
    restricted_out: float | None       # lambda(H_out | joint constraint kernel)
    restricted_note: str = ""
    status: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def lam(self) -> float | None:
        return None if self.spectrum is None else self.spectrum.lambda_min

    @property
    def exit_code(self) -> int:
        return {"PASS": EXIT_OK, "FAIL": EXIT_FAIL, "PROMISE_VIOLATED": EXIT_PROMISE}.get(self.status, EXIT_NUMERIC)


def _judge(decision, th, lam, upper_bound, lower_bound=None):
    """PASS/FAIL/UNDETERMINED for the bound that applies to ``decision``.

    Without a certified eigenvalue, lower_bound <= lambda(H) <= upper_bound
    may still settle the check.
    """
    if decision is Decision.PROMISE_VIOLATED:
        return "PROMISE_VIOLATED"
    if lam is not None:
        lo = hi = lam
    else:
        lo = -np.inf if lower_bound is None else lower_bound
        hi = upper_bound
    if decision is Decision.YES:
        if hi <= th.a:
            return "PASS"
        return "FAIL" if lo > th.a else "UNDETERMINED"
    if lo >= th.b:
        return "PASS"
    return "FAIL" if hi < th.b else "UNDETERMINED"


def verify_instance(c: Circuit, locality: str = "log", epsilon: float = 0.01, L: int | None = None,
                    penalties: dict[str, float] | None = None, method: str = "auto") -> VerifyReport:
    """Decide ``c`` by brute force, compile it and test the matching energy bound.

    With ``penalties=None`` the projection-lemma chain picks every penalty;
    otherwise the given coefficients (keys in/prop/clock/prop1/prop2) are used.
    """
    max_acc, witness = brute_force_max_acceptance(c)
    decision = decide_instance(c, epsilon)
    compiled = pad_and_normalize(c, L) if locality == "two" else c
    base = ReductionParams(locality=locality, L=L, epsilon=epsilon)
    chain = None
    if penalties is None:
        chain = auto_penalties(compiled, base)
        params = chain.params
    else:
        params = base.with_penalties(penalties)
    groups = build_groups(compiled, params)
    h = combine(groups, {g: params.coefficient(g) for g in groups})
    th = DecisionThresholds.for_locality(locality, epsilon)
    notes = []

    spectrum, spectrum_note = None, ""
    try:
        spectrum = min_eigenvalue(h, method=method)
    except ConvergenceError as exc:
        spectrum_note = str(exc)

    order, bases, kernel_notes, broken = constraint_kernels(groups)
    for g, note in kernel_notes.items():
        notes.append(f"{g}: {note}")
    # deepest subspace reached by the kernel chain; any subspace bounds lambda(H) from above
    depth = len(order)
    if broken:
        depth = next(k for k, g in enumerate(order) if g in kernel_notes)
    space = bases[depth]
    if space is None:
        upper, space_name = (spectrum.lambda_min if spectrum else float("nan")), "full space"
    else:
        upper = restricted_min_eigenvalue(h, space).lambda_min
        space_name = "kernel of " + (", ".join(order[:depth]) or "nothing")

    lower = None
    if chain is not None and all(st.lemma_ok for st in chain.stages if st.group in order[:depth]):
        lower = float(upper) - depth / 8

    hs = build_history_state(compiled, witness, params.clock_encoding)
    total, breakdown = history_energy(hs, h)

    restricted, restricted_note = None, ""
    if broken:
        restricted_note = "joint constraint kernel unavailable: " + "; ".join(kernel_notes.values())
    elif bases[-1] is not None:
        restricted = restricted_min_eigenvalue(groups["out"], bases[-1]).lambda_min
        restricted_note = f"kernel of {', '.join(order)} (dim {bases[-1].shape[1]})"

    status = _judge(decision, th, spectrum.lambda_min if spectrum else None, upper, lower)
    return VerifyReport(
        circuit=compiled, params=params, thresholds=th, decision=decision,
        max_acceptance=max_acc, witness=witness, hamiltonian=h, chain=chain,
        spectrum=spectrum, spectrum_note=spectrum_note,
        upper_bound=float(upper), upper_bound_space=space_name, lower_bound=lower,
        history_total=total, history_breakdown=breakdown,
        restricted_out=restricted, restricted_note=restricted_note,
        status=status, notes=notes,
    )


def fmt(x) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def format_report(r: VerifyReport) -> str:
    p = r.params
    kmax, hist = locality_audit(r.hamiltonian)
    lines = [
        f"locality          {p.locality} ({p.clock_encoding} clock)",
        f"T                 {r.circuit.T}",
        f"system qubits     {r.hamiltonian.system_size}",
        f"terms M           {len(r.hamiltonian)}",
        f"max locality      {kmax}   histogram {hist}",
        f"epsilon           {fmt(p.epsilon)}",
        f"thresholds        a = {fmt(r.thresholds.a)}   b = {fmt(r.thresholds.b)}",
        f"oracle decision   {r.decision.value}   max acceptance {fmt(r.max_acceptance)} at y = {r.witness}",
        "penalties:",
    ]
    if r.chain is not None:
        lines.append(f"  {'group':<7} {'||rest||':>24} {'gap':>24} {'J':>24}  lemma")
        for s in r.chain.stages:
            lines.append(f"  {s.group:<7} {fmt(s.norm_rest):>24} {fmt(s.gap):>24} {fmt(s.J):>24}  "
                         f"{'ok' if s.lemma_ok else 'UNMET'} {s.note}".rstrip())
    else:
        for g in ("in", "prop", "prop1", "prop2", "clock"):
            lines.append(f"  {g:<7} {fmt(p.coefficient(g))} (explicit)")
    if r.spectrum is not None:
        lines.append(f"lambda(H)         {fmt(r.spectrum.lambda_min)}   "
                     f"[{r.spectrum.method}, residual {fmt(r.spectrum.residual)}, scale {fmt(r.spectrum.scale)}]")
    else:
        lines.append(f"lambda(H)         not computed: {r.spectrum_note}")
    lines.append(f"upper bound       {fmt(r.upper_bound)}   (H restricted to {r.upper_bound_space})")
    if r.lower_bound is not None:
        lines.append(f"lower bound       {fmt(r.lower_bound)}   (upper bound - 1/8 per eliminated constraint)")
    lines.append(f"<y'|H|y'>         {fmt(r.history_total)}")
    for label, value in r.history_breakdown.items():
        lines.append(f"  {label:<12} {fmt(value)}")
    lines.append(f"lambda(H_out|S)   {fmt(r.restricted_out)}   ({r.restricted_note})")
    lines.append(f"1 - max accept    {fmt(1 - r.max_acceptance)}")
    for note in r.notes:
        lines.append(f"note: {note}")
    if r.decision is Decision.YES:
        bound = f"lambda(H) <= a = {fmt(r.thresholds.a)}"
    elif r.decision is Decision.NO:
        bound = f"lambda(H) >= b = {fmt(r.thresholds.b)}"
    else:
        bound = "no bound applies"
    lines.append(f"check             {bound}: {r.status}")
    return "\n".join(lines)
