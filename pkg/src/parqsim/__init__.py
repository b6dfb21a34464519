"""Parallel state-vector quantum simulator.

Dense n-qubit registers with in-place, worker-partitioned gate kernels,
Hadamard/QFT/Grover/modular-exponentiation circuits, depolarizing and
operational (Gaussian angle) noise by trajectory averaging, and Shor
factoring with the improved classical post-processing.
"""
from .statevec import (
    MAX_QUBITS,
    RegisterSizeError,
    StateVector,
    fidelity,
    measure_full,
    measure_subregister,
    memory_bytes,
    new_register,
    prob_zero,
)
from .kernels import GateMatrix, apply_controlled, apply_f_controlled, apply_permutation, apply_single
from .noise import NoiseConfig, run_trajectories
from .shor import ShorConfig, shor_factor

__version__ = "0.1.0"

__all__ = [
    "MAX_QUBITS", "RegisterSizeError", "StateVector", "fidelity", "measure_full",
    "measure_subregister", "memory_bytes", "new_register", "prob_zero",
    "GateMatrix", "apply_controlled", "apply_f_controlled", "apply_permutation", "apply_single",
    "NoiseConfig", "run_trajectories", "ShorConfig", "shor_factor",
]
