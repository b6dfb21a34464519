"""
Shor factoring
==============

N=15 through the full gate-level circuit, then a 12-bit RSA-type number
with the semantic order-finding step, with and without the extra
post-processing checks.
"""

import numpy as np

from parqsim import ShorConfig, shor_factor
from parqsim.noise import trial_rng
from parqsim.shor import CHECKS, convergents, order_find, prob_succ

rng = np.random.default_rng(5)
ys = [order_find(7, 15, "gate-level", rng) for _ in range(8)]
print("x=7, N=15 measured y:", ys)
print("y=64 ->", [(c.k, c.r) for c in convergents(64, 8, 15)])

st = shor_factor(ShorConfig(15, mode="gate-level", x=11), rng)
print("N=15:", st.factors, "after", st.iterations, "iteration(s)")

N, runs = 3233, 40
plain = [shor_factor(ShorConfig(N), trial_rng(0, i)).iterations for i in range(runs)]
improved = [shor_factor(ShorConfig(N, improvements=CHECKS), trial_rng(0, i)) for i in range(runs)]
print(f"N={N}: bound {1 / prob_succ(N):.2f}, original {np.mean(plain):.2f}, "
      f"improved {np.mean([s.iterations for s in improved]):.2f} mean iterations")
for c in CHECKS:
    s = sum(r.tallies.success[c] for r in improved)
    f = sum(r.tallies.failure[c] for r in improved)
    print(f"  {c:>12}: {s}/{f}")
