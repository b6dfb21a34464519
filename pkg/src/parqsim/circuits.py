"""Composite circuits: Hadamard transform, QFT (gate-level and FFT), Grover, modular exponentiation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.fft

from . import kernels
from .kernels import GateMatrix
from .noise import GateNoise
from .statevec import MeasurementOutcome, StateVector, measure_full, new_register

_ANCILLA_MINUS = 1 / math.sqrt(2)


@dataclass(frozen=True)
class Gate:
    """One gate of a circuit description.

    ``name`` is ``"H"``, ``"CR"`` (controlled R_d, ``d`` set, ``sign=-1`` for the
    inverse) or ``"SWAP"`` (``control`` is the other qubit).
    """

    name: str
    target: int
    control: int | None = None
    d: int | None = None
    sign: int = 1

    def __str__(self) -> str:
        if self.name == "H":
            return f"H q{self.target}"
        if self.name == "CR":
            tag = "CR" if self.sign > 0 else "CRdg"
            return f"{tag} d={self.d} ctrl=q{self.control} tgt=q{self.target}"
        if self.name == "SWAP":
            return f"SWAP q{self.control} q{self.target}"
        raise ValueError(f"unknown gate {self.name}")


@dataclass(frozen=True)
class PhaseGateSpec:
    d: int

    @property
    def phase(self) -> complex:
        return complex(math.cos(math.pi / (1 << self.d)), math.sin(math.pi / (1 << self.d)))

    def matrix(self, sign: int = 1) -> GateMatrix:
        return kernels.phase_gate(self.d, sign)


def format_gates(gates: Sequence[Gate]) -> str:
    return "\n".join(str(g) for g in gates)


def _qubit_range(n: int, qubits: range | tuple[int, int] | None) -> tuple[int, int]:
    if qubits is None:
        return 0, n
    lo, hi = (qubits.start, qubits.stop) if isinstance(qubits, range) else qubits
    if not 0 <= lo < hi <= n:
        raise ValueError(f"qubit range [{lo}, {hi}) invalid for {n} qubits")
    return lo, hi


def hadamard_gates(n: int, qubits=None) -> list[Gate]:
    lo, hi = _qubit_range(n, qubits)
    return [Gate("H", q) for q in range(lo, hi)]


def approx_bound_for(n: int, eps: float) -> int:
    """Largest R_d depth kept by an approximate QFT of accuracy ``eps``."""
    return max(1, math.ceil(math.log2(n / eps)))


def qft_gates(n: int, approx_bound: int | None = None, qubits=None,
              inverse: bool = False) -> list[Gate]:
    """Gate list of the QFT on the qubit range ``qubits`` (default: all).

    Qubit ``lo`` is the sub-register's MSB. After the H / controlled-R_d
    ladder the output is bit-reversed, so trailing swaps restore the order
    demanded by ``beta_x = 2^{-m/2} sum_y exp(2 pi i x y / 2^m) alpha_y``.
    Controlled R_d with ``d > approx_bound`` are dropped.
    """
    lo, hi = _qubit_range(n, qubits)
    m = hi - lo
    gates: list[Gate] = []
    for j in range(m):
        gates.append(Gate("H", lo + j))
        for c in range(j + 1, m):
            d = c - j
            if approx_bound is None or d <= approx_bound:
                gates.append(Gate("CR", lo + j, control=lo + c, d=d))
    for j in range(m // 2):
        gates.append(Gate("SWAP", lo + m - 1 - j, control=lo + j))
    if inverse:
        gates = [Gate(g.name, g.target, g.control, g.d, -g.sign) for g in reversed(gates)]
    return gates


def run_gates(s: StateVector, gates: Sequence[Gate], noise: GateNoise | None = None,
              workers: int | None = None) -> None:
    """Execute a gate list in order.

    With ``noise``: H and controlled-R_d matrices come from the noise source
    (perturbed when sigma > 0); depolarizing injection follows every
    controlled-R_d on its two qubits. SWAPs are qubit relabelling and stay
    noiseless.
    """
    for g in gates:
        if g.name == "H":
            U = kernels.H if noise is None else noise.gate("H", nominal=kernels.H)
            kernels.apply_single(s, U, g.target, workers=workers)
        elif g.name == "CR":
            nominal = kernels.phase_gate(g.d, g.sign)
            if noise is None:
                U = nominal
            else:
                U = noise.gate("R", g.d, nominal=nominal)
                if g.sign < 0:
                    U = U.dagger()
            kernels.apply_controlled(s, U, [(g.control, 1)], g.target, workers=workers)
            if noise is not None:
                noise.after_gate(s, (g.control, g.target))
        elif g.name == "SWAP":
            kernels.apply_swap(s, g.control, g.target, workers=workers)
        else:
            raise ValueError(f"unknown gate {g.name}")


def hadamard_all(s: StateVector, noise: GateNoise | None = None, qubits=None,
                 workers: int | None = None) -> None:
    """Apply H to every qubit in ``qubits`` (default all).

    With ``noise`` each H may be perturbed and is followed by a depolarizing
    injection on its own qubit.
    """
    for g in hadamard_gates(s.n, qubits):
        if noise is None:
            kernels.apply_single(s, kernels.H, g.target, workers=workers)
        else:
            kernels.apply_single(s, noise.gate("H", nominal=kernels.H), g.target, workers=workers)
            noise.after_gate(s, (g.target,))


def qft_circuit(s: StateVector, approx_bound: int | None = None, qubits=None,
                inverse: bool = False, noise: GateNoise | None = None,
                workers: int | None = None) -> None:
    run_gates(s, qft_gates(s.n, approx_bound, qubits, inverse), noise, workers)


def qft_fft(s: StateVector, qubits=None, inverse: bool = False,
            workers: int | None = None) -> None:
    """Exact QFT on a qubit range via FFT, unitary normalization.

    The forward QFT uses ``exp(+2 pi i xy/N)``, i.e. the inverse DFT in
    numpy/scipy sign convention.
    """
    lo, hi = _qubit_range(s.n, qubits)
    view = s.amps.reshape(1 << lo, 1 << (hi - lo), 1 << (s.n - hi))
    transform = scipy.fft.fft if inverse else scipy.fft.ifft
    view[...] = transform(view, axis=1, norm="ortho", workers=workers or kernels.default_workers())


# -- Grover ------------------------------------------------------------------------

def grover_register(n: int, use_ancilla: bool = False, noise: GateNoise | None = None,
                    workers: int | None = None) -> StateVector:
    """Uniform superposition over n data qubits, plus an ancilla in ``(|0>-|1>)/sqrt2``.

    The ancilla, when present, is the last (least significant) qubit.
    """
    total = n + 1 if use_ancilla else n
    s = new_register(total)
    if use_ancilla:
        U = kernels.X if noise is None else noise.gate("NOT", nominal=kernels.X)
        kernels.apply_single(s, U, n, workers=workers)
        U = kernels.H if noise is None else noise.gate("H", nominal=kernels.H)
        kernels.apply_single(s, U, n, workers=workers)
    hadamard_all(s, noise, qubits=(0, n), workers=workers)
    return s


def _oracle(s: StateVector, n: int, index: int, use_ancilla: bool,
            noise: GateNoise | None, workers: int | None) -> None:
    # sign change V_f for f(x) = [x == index]
    if use_ancilla:
        table = np.zeros(1 << n, dtype=np.bool_)
        table[index] = True
        U = kernels.X if noise is None else noise.gate("NOT", nominal=kernels.X)
        kernels.apply_f_controlled(s, U, table, (0, n), n, workers=workers)
    else:
        kernels.apply_phase_flip(s, index)


def grover_iteration(s: StateVector, k: int, use_ancilla: bool = False,
                     noise: GateNoise | None = None, workers: int | None = None) -> None:
    """One G-iteration ``-H_n V_{f_0} H_n V_{f_k}`` on the data register.

    Depolarizing noise at ``"iteration"`` granularity is injected once at the
    end, on the data qubits only.
    """
    n = s.n - 1 if use_ancilla else s.n
    if not 0 <= k < (1 << n):
        raise ValueError(f"target index {k} outside 0..{(1 << n) - 1}")
    data = (0, n)
    _oracle(s, n, k, use_ancilla, noise, workers)
    hadamard_all(s, noise, qubits=data, workers=workers)
    _oracle(s, n, 0, use_ancilla, noise, workers)
    hadamard_all(s, noise, qubits=data, workers=workers)
    np.negative(s.amps, out=s.amps)
    if noise is not None:
        noise.after_iteration(s, range(n))


def target_amplitude(s: StateVector, k: int, use_ancilla: bool = False) -> complex:
    """Amplitude of data value ``k``, projecting the ancilla onto ``(|0>-|1>)/sqrt2``."""
    if use_ancilla:
        return complex((s.amps[2 * k] - s.amps[2 * k + 1]) * _ANCILLA_MINUS)
    return complex(s.amps[k])


def grover_default_iterations(n: int) -> int:
    return int(math.floor(math.pi / 4 * math.sqrt(1 << n)))


@dataclass
class GroverResult:
    outcome: MeasurementOutcome
    value: int
    iterations: int
    trace: np.ndarray  # complex target amplitude after each iteration
    success_probability: float


def grover_search(n: int, k: int, iterations: int | None = None,
                  rng: np.random.Generator | None = None, use_ancilla: bool = False,
                  noise: GateNoise | None = None, workers: int | None = None) -> GroverResult:
    if iterations is None:
        iterations = grover_default_iterations(n)
    rng = rng if rng is not None else np.random.default_rng()
    s = grover_register(n, use_ancilla, noise, workers)
    trace = np.empty(iterations, dtype=np.complex128)
    for j in range(iterations):
        grover_iteration(s, k, use_ancilla, noise, workers)
        trace[j] = target_amplitude(s, k, use_ancilla)
    out = measure_full(s, rng)
    value = out.value >> 1 if use_ancilla else out.value
    if use_ancilla:
        p_k = float(np.sum(np.abs(s.amps[2 * k:2 * k + 2]) ** 2))
    else:
        p_k = float(abs(s.amps[k]) ** 2)
    return GroverResult(out, value, iterations, trace, p_k)


# -- modular exponentiation ------------------------------------------------------------

@dataclass(frozen=True)
class ModExpSpec:
    """``|res>|a> -> |res XOR x^a mod N>|a>`` on a 3l-qubit layout.

    Result register: qubits ``[0, l)``; exponent register: ``[l, 3l)``.
    """

    x: int
    N: int

    def __post_init__(self):
        if self.N < 3 or self.N % 2 == 0:
            raise ValueError(f"modulus must be odd and >= 3, got {self.N}")
        if math.gcd(self.x, self.N) != 1:
            raise ValueError(f"gcd({self.x}, {self.N}) != 1")

    @property
    def l(self) -> int:
        return self.N.bit_length()

    @property
    def qubits(self) -> int:
        return 3 * self.l


def modexp_table(x: int, N: int, bits: int) -> np.ndarray:
    """``x^a mod N`` for every ``a < 2**bits`` by the chain of squared factors."""
    a = np.arange(1 << bits, dtype=np.int64)
    out = np.ones(a.size, dtype=np.int64)
    factor = x % N
    for i in range(bits):
        sel = ((a >> i) & 1).astype(bool)
        out[sel] = (out[sel] * factor) % N
        factor = factor * factor % N
    return out


def modexp_operator(spec: ModExpSpec) -> np.ndarray:
    """Basis permutation for :func:`kernels.apply_permutation`.

    On the ``res = 0`` slice it sends ``(0, a)`` to ``(x^a mod N, a)``;
    XOR with the result register makes it a bijection everywhere.
    """
    l = spec.l
    abits = 2 * l
    idx = np.arange(1 << (3 * l), dtype=np.int64)
    res = idx >> abits
    a = idx & ((1 << abits) - 1)
    f = modexp_table(spec.x, spec.N, abits)
    return ((res ^ f[a]) << abits) | a


def modexp_qubit_budget(l: int) -> int:
    """Qubits for the gate-level modular exponentiation circuit: ``5l + 6``."""
    if l < 2:
        raise ValueError("bit length must be >= 2")
    return 5 * l + 6
