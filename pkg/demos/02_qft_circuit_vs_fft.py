"""
QFT: gate circuit against FFT
=============================

The QFT circuit (Hadamards, controlled phase rotations and a final bit
reversal) must agree with a unitary FFT to rounding error. The FFT route
is much faster.
"""

import time

import numpy as np

from parqsim import StateVector, circuits, fidelity

rng = np.random.default_rng(1)

print(circuits.format_gates(circuits.qft_gates(3)))

for n in (8, 12, 16, 20):
    a = StateVector.random(n, rng)
    b = a.copy()
    t0 = time.perf_counter()
    circuits.qft_circuit(a)
    t1 = time.perf_counter()
    circuits.qft_fft(b)
    t2 = time.perf_counter()
    diff = np.max(np.abs(a.amps - b.amps))
    print(f"n={n:2d}  max diff {diff:.1e}  circuit {t1 - t0:.4f}s  fft {t2 - t1:.4f}s")

# dropping the smallest rotations costs little fidelity
n = 14
s = StateVector.random(n, rng)
exact = s.copy()
circuits.qft_fft(exact)
for bound in (2, 4, 6, 8):
    t = s.copy()
    circuits.qft_circuit(t, approx_bound=bound)
    print(f"approx bound d<={bound}: fidelity {fidelity(exact, t):.8f}")
