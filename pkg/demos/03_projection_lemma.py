"""
How big must a penalty be?
==========================

Adding J * H_2 to H_1 pushes the low-energy states into the kernel of H_2.
The ground energy then lies between lambda(H_1 restricted to that kernel)
and that value minus ||H_1||^2 / (J - 2||H_1||).
"""
import numpy as np

from lhlc.operators import PAULI, projector, single
from lhlc.reduction import choose_penalties
from lhlc.spectrum import projection_lemma_check, random_lemma_instance

h1 = single(PAULI["X"], 1, 1, 0.3)
for J in (1.0, 2.0, 10.0, 100.0):
    rep = projection_lemma_check(h1, single(projector("1"), 1, 1, J))
    lower = "precondition unmet" if rep.lower_bound is None else f"{rep.lower_bound: .7f}"
    print(f"J = {J:6.1f}   lambda(H1+H2) = {rep.lambda_full: .7f}   lower = {lower}   upper = {rep.lambda_restricted:.1f}")

# the closed form for J = 10
print("(10 - sqrt(100.36)) / 2 =", (10 - np.sqrt(100.36)) / 2)

# the coefficient that guarantees a loss of at most 1/8
J2 = choose_penalties(h1, single(projector("1"), 1, 1))
print(f"choose_penalties: J_2 = {J2:.4f}")

rng = np.random.default_rng(7)
reports = [projection_lemma_check(*random_lemma_instance(rng, 4)) for _ in range(200)]
slack = min(r.lower_slack for r in reports)
print(f"{sum(r.passed for r in reports)}/200 random instances pass, tightest lower slack {slack:.3e}")
