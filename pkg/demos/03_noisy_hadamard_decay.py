"""
Noisy Hadamard transforms
=========================

Applying H_n an even number of times returns |0...0>. With depolarizing or
operational errors the |0><0| term decays; the trajectory average follows
the closed-form curves.
"""

import numpy as np

from parqsim import NoiseConfig, run_trajectories
from parqsim.experiments import ht_decay_experiment
from parqsim.noise import analytic_ht_depolarizing, analytic_ht_operational

n, kmax, trials = 8, 40, 300
ks = np.arange(2, kmax + 1, 2)

for cfg, curve in [
    (NoiseConfig(p=1e-2, seed=3), lambda k: analytic_ht_depolarizing(n, 1e-2, k)),
    (NoiseConfig(sigma=5e-2, seed=3), lambda k: analytic_ht_operational(n, 5e-2, k)),
]:
    st = run_trajectories(ht_decay_experiment(n, kmax), cfg, trials)
    mean, err = st.mean("prob_zero"), st.stderr("prob_zero")
    print(f"p={cfg.p} sigma={cfg.sigma}")
    for k, m, e in list(zip(ks, mean, err))[::4]:
        print(f"  k={k:3d}  simulated {m:.4f} +- {e:.4f}  analytic {curve(int(k)):.4f}")
