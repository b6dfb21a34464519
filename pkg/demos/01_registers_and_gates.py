"""
Registers, gates and measurement
================================

Build a small register, entangle it, and look at how a single-qubit
gate is split among workers.
"""

import numpy as np

from parqsim import StateVector, kernels, measure_full, measure_subregister, memory_bytes, new_register

rng = np.random.default_rng(7)

# qubit 0 is the most significant bit of the basis index
s = new_register(2)
kernels.apply_single(s, kernels.H, 0)
kernels.apply_controlled(s, kernels.X, [0], 1)
print("Bell state amplitudes:", np.round(s.amps, 4))

# measuring the first qubit collapses both
out = measure_subregister(s, (0, 1), rng)
print("measured qubit 0 ->", out.value, "collapsed:", np.round(out.collapsed.amps, 4))

# a full measurement with an explicit random number
uniform = StateVector.from_amplitudes(np.full(4, 0.5))
print("r = 0.70 on a uniform 2-qubit state picks", measure_full(uniform, r=0.70).value)

# how a gate on qubit 0 of a 3-qubit register is shared by two workers:
# one block of 8 amplitudes, so each worker takes half of every pair row
p = kernels.plan(3, 0, 2)
print("plan mode:", p.mode)
for w in range(2):
    print(f"  worker {w} pairs:", p.pairs(w))

print("a 30-qubit register needs", memory_bytes(30) / 2 ** 30, "GiB")
