"""Exhaustive search over classical witnesses: the ground truth for decisions."""
from __future__ import annotations

import itertools
from enum import Enum

from .circuit import Circuit, acceptance_probability

MAX_WITNESS_QUBITS = 20
TIE_TOL = 1e-12


class Decision(str, Enum):
    YES = "YES"
    NO = "NO"
    PROMISE_VIOLATED = "PROMISE_VIOLATED"


def witnesses(n: int):
    """All bitstrings of length n in lexicographic order."""
    for bits in itertools.product("01", repeat=n):
        yield "".join(bits)


def brute_force_max_acceptance(c: Circuit) -> tuple[float, str]:
    """(max_y Pr[accept], first maximizing y in lexicographic order)."""
    if c.n_x > MAX_WITNESS_QUBITS:
        raise ValueError(f"n_x = {c.n_x} exceeds the {MAX_WITNESS_QUBITS}-qubit enumeration limit")
    best, arg = -1.0, ""
    for y in witnesses(c.n_x):
        p = acceptance_probability(c, y)
        if p > best + TIE_TOL:
            best, arg = p, y
    return best, arg


def decide_instance(c: Circuit, eps: float) -> Decision:
    best, _ = brute_force_max_acceptance(c)
    if best >= 1 - eps:
        return Decision.YES
    if best <= eps:
        return Decision.NO
    return Decision.PROMISE_VIOLATED
