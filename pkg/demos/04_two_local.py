"""
The 2-local construction, measured
==================================

The 2-local level spaces the CPHASE gates L steps apart and replaces each
of their propagation terms by single-qubit and clock-only pieces (H_qubit
and H_time).  For the reduction to keep its gap, the history state has to
stay a zero-energy state of those pieces.  This script measures what
actually happens on the smallest rejecting instance.
"""
import numpy as np

from lhlc.circuit import pad_and_normalize
from lhlc.history import build_history_state, history_energy
from lhlc.instances import move_reject
from lhlc.operators import locality_audit
from lhlc.reduction import ReductionParams, build_groups, combine, constraint_kernels
from lhlc.spectrum import restricted_min_eigenvalue, restricted_spectrum

c = pad_and_normalize(move_reject(), 4)
print("padded gates:", " ".join(str(g) for g in c.gates))
print("CPHASE times:", c.cphase_times(), " T =", c.T)

groups = build_groups(c, ReductionParams(locality="two", L=4))
h = combine(groups, {})
print("max locality:", locality_audit(h)[0], "  qubits:", h.system_size)

# the history state passes every constraint except the CPHASE replacement
hs = build_history_state(c, "0", "unary")
for name, g in groups.items():
    total, _ = history_energy(hs, g)
    print(f"  <y'|H_{name}|y'> = {total: .6f}")

# inside the legal-clock, correct-propagation subspace H_prop2 is indefinite,
# so it cannot act as a penalty there
order, bases, notes, broken = constraint_kernels(groups)
print("kernel chain:", order, "->", notes)
S = bases[order.index("prop2")]
w = restricted_spectrum(groups["prop2"], S)
print(f"H_prop2 on that subspace: eigenvalues from {w[0]:.6f} to {w[-1]:.6f}")

# on that subspace the energy stays far below 1/2 - eps, whatever weight H_prop2 and H_in get
best = -np.inf
for J2 in (0.0, 0.01, 0.1, 1.0, 10.0):
    for J_in in (1.0, 10.0, 100.0):
        sub = combine({k: groups[k] for k in ("out", "in", "prop2")}, {"in": J_in, "prop2": J2})
        best = max(best, restricted_min_eigenvalue(sub, S).lambda_min)
print(f"largest lambda(H | clock, prop1 kernel) over the scan: {best:.3e}  (NO threshold 0.49)")
