"""
History states and the completeness bound
=========================================

A verifier circuit becomes a Hamiltonian whose low-energy states encode
its computation.  The history state of a witness y pays energy only where
the circuit rejects, so its energy is exactly 1 - Pr[accept].
"""
import numpy as np

from lhlc.circuit import acceptance_probability
from lhlc.history import build_history_state, history_energy
from lhlc.instances import copy_accept, ry, with_output_rotation
from lhlc.reduction import ReductionParams, assemble, auto_penalties
from lhlc.spectrum import min_eigenvalue

# copy the witness into an ancilla, then tilt the output qubit a little so
# that even the best witness is rejected with a small probability
c = with_output_rotation(copy_accept(), 0.15)
print("gates:", " ".join(str(g) for g in c.gates))

for y in ("0", "1"):
    print(f"Pr[accept | y={y}] = {acceptance_probability(c, y):.12f}")

# binary clock, penalties picked by the projection-lemma chain
chain = auto_penalties(c, ReductionParams(locality="log"))
for s in chain.stages:
    print(f"J_{s.group:<6} = {s.J:.6g}   (||rest|| = {s.norm_rest:.6g}, gap = {s.gap:.6g})")
h, th = assemble(c, chain.params)
print(f"{h.system_size} qubits, {len(h)} terms")

hs = build_history_state(c, "1", "binary")
total, parts = history_energy(hs, h)
for label, value in parts.items():
    print(f"  {label:<5} {value: .3e}")
print(f"<y'|H|y'>      = {total:.12f}")
print(f"1 - Pr[accept] = {1 - acceptance_probability(c, '1'):.12f}")

# the ground energy can only be lower, and sits below the YES threshold a
lam = min_eigenvalue(h).lambda_min
print(f"lambda(H) = {lam:.12f} <= a = {th.a}")

# the clock register holds t = 0..T with equal weight 1/(T+1)
weights = np.abs(hs.state.reshape(2 ** c.n_qubits, -1)) ** 2
print("clock weights:", np.round(weights.sum(axis=0)[: c.T + 1], 6))
