"""
Rejecting circuits and the energy gap
=====================================

When every witness is rejected, no state gets below the NO threshold b.
The verify pipeline compares the brute-force witness search with the
spectrum of the compiled Hamiltonian at the binary-clock and 5-local levels.
"""
from lhlc.instances import move_reject, swap_reject
from lhlc.verify import format_report, verify_instance

# three CNOTs swap the witness into a fresh |0> ancilla: qubit 1 always reads 0
report = verify_instance(swap_reject(), locality="log", epsilon=0.01)
print(format_report(report))
print()

# unary clock with three-qubit clock windows: every term touches at most 5 qubits
report = verify_instance(move_reject(), locality="five", epsilon=0.01)
print(format_report(report))
