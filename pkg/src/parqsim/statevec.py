"""Dense n-qubit register: allocation, measurement, fidelity and memory accounting.

Basis-index convention: qubit 0 is the most significant bit, so qubit ``q``
addresses bit position ``n - 1 - q`` of the index (stride ``2**(n-1-q)``).
"""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAX_QUBITS = 30
BYTES_PER_AMPLITUDE = 16  # two float64 words
NORM_TOL = 1e-10


class RegisterSizeError(ValueError):
    """Requested register is outside the supported size or the memory budget."""


def memory_bytes(n: int) -> int:
    """Bytes needed to hold an n-qubit state: ``2**(n+4)``."""
    if n < 1:
        raise ValueError(f"qubit count must be >= 1, got {n}")
    return 1 << (n + 4)


def default_memory_budget() -> int:
    """Allocation budget in bytes.

    Taken from ``PARQSIM_MEMORY_BUDGET`` when set, otherwise 3/4 of physical RAM.
    """
    env = os.environ.get("PARQSIM_MEMORY_BUDGET")
    if env:
        return int(float(env))
    try:
        return int(os.sysconf("SC_PAGE_SIZE") * os.sysconf("SC_PHYS_PAGES") * 3 // 4)
    except (ValueError, OSError, AttributeError):
        return memory_bytes(MAX_QUBITS)


def check_budget(n: int, budget: int | None = None) -> None:
    """Raise RegisterSizeError if an n-qubit register cannot be allocated."""
    if not 1 <= n <= MAX_QUBITS:
        need = f"2^{n + 4} bytes" if n >= 1 else "a positive qubit count"
        raise RegisterSizeError(
            f"register of {n} qubits is outside 1..{MAX_QUBITS} (would need {need})"
        )
    budget = default_memory_budget() if budget is None else budget
    need = memory_bytes(n)
    if need > budget:
        raise RegisterSizeError(
            f"register of {n} qubits needs 2^{n + 4} = {need} bytes, "
            f"exceeding the memory budget of {budget} bytes"
        )


class StateVector:
    """State of an n-qubit register as ``2**n`` complex128 amplitudes.

    Not synchronized: only one gate application may mutate ``amps`` at a time.
    """

    __slots__ = ("n", "amps")

    def __init__(self, n: int, amps: np.ndarray):
        amps = np.asarray(amps)
        if amps.shape != (1 << n,):
            raise ValueError(f"expected {1 << n} amplitudes for n={n}, got shape {amps.shape}")
        self.n = n
        self.amps = np.ascontiguousarray(amps, dtype=np.complex128)

    @classmethod
    def from_amplitudes(cls, amps, normalize: bool = False) -> "StateVector":
        amps = np.array(amps, dtype=np.complex128)
        size = amps.size
        n = size.bit_length() - 1
        if size < 2 or (1 << n) != size:
            raise ValueError(f"amplitude count must be a power of two >= 2, got {size}")
        if normalize:
            amps /= np.linalg.norm(amps)
        s = cls(n, amps)
        if abs(s.norm_squared() - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {s.norm_squared()!r})")
        return s

    @classmethod
    def basis(cls, n: int, index: int) -> "StateVector":
        s = new_register(n)
        s.amps[0] = 0.0
        s.amps[index] = 1.0
        return s

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "StateVector":
        """Haar-ish random state (normalized complex Gaussian vector)."""
        amps = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
        return cls.from_amplitudes(amps, normalize=True)

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amps.copy())

    def norm_squared(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def probabilities(self) -> np.ndarray:
        return self.amps.real ** 2 + self.amps.imag ** 2

    def __len__(self) -> int:
        return self.amps.size

    def __repr__(self) -> str:
        return f"StateVector(n={self.n})"

    # -- dumps -----------------------------------------------------------

    def to_bytes(self) -> bytes:
        """Little-endian: uint64 n, then 2**n (re, im) float64 pairs."""
        return struct.pack("<Q", self.n) + self.amps.astype("<c16").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "StateVector":
        (n,) = struct.unpack_from("<Q", data, 0)
        amps = np.frombuffer(data, dtype="<c16", offset=8)
        if amps.size != 1 << n:
            raise ValueError(f"dump holds {amps.size} amplitudes, header says n={n}")
        return cls(int(n), amps.astype(np.complex128))

    def dump(self, path, text: bool = False) -> None:
        path = Path(path)
        if text:
            lines = (f"{i} {float(a.real)!r} {float(a.imag)!r}" for i, a in enumerate(self.amps))
            path.write_text("\n".join(lines) + "\n")
        else:
            path.write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path, text: bool = False) -> "StateVector":
        path = Path(path)
        if not text:
            return cls.from_bytes(path.read_bytes())
        rows = np.loadtxt(path, ndmin=2)
        amps = np.zeros(rows.shape[0], dtype=np.complex128)
        amps[rows[:, 0].astype(np.int64)] = rows[:, 1] + 1j * rows[:, 2]
        return cls.from_amplitudes(amps)


def new_register(n: int, budget: int | None = None) -> StateVector:
    """Allocate ``|0...0>`` on n qubits, refusing sizes beyond the budget."""
    check_budget(n, budget)
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n, amps)


@dataclass
class MeasurementOutcome:
    value: int
    collapsed: StateVector


def _pick(probs: np.ndarray, r: float) -> int:
    # sequential scan: sum_{j<i} p_j <= r < sum_{j<=i} p_j
    cum = np.cumsum(probs)
    i = int(np.searchsorted(cum, r, side="right"))
    if i >= probs.size:
        # rounding left r above the accumulated total
        i = int(np.flatnonzero(probs)[-1])
    return i


def _draw(rng: np.random.Generator | None, r: float | None) -> float:
    if r is not None:
        if not 0.0 <= r < 1.0:
            raise ValueError(f"r must lie in [0, 1), got {r}")
        return float(r)
    if rng is None:
        raise ValueError("either rng or r is required")
    return float(rng.random())


def measure_full(s: StateVector, rng: np.random.Generator | None = None,
                 r: float | None = None) -> MeasurementOutcome:
    """Measure every qubit in the computational basis.

    ``r`` may be given explicitly instead of drawing it from ``rng``.
    """
    i = _pick(s.probabilities(), _draw(rng, r))
    return MeasurementOutcome(i, StateVector.basis(s.n, i))


def measure_subregister(s: StateVector, qubits: range | tuple[int, int],
                        rng: np.random.Generator | None = None,
                        r: float | None = None) -> MeasurementOutcome:
    """Measure the contiguous qubit range ``[lo, hi)`` and collapse onto the result.

    The returned value is the sub-register's own integer (its first qubit is
    the sub-register's MSB).
    """
    lo, hi = (qubits.start, qubits.stop) if isinstance(qubits, range) else qubits
    if hi <= lo:
        raise ValueError("cannot measure an empty qubit range")
    if lo < 0 or hi > s.n:
        raise ValueError(f"qubit range [{lo}, {hi}) outside register of {s.n} qubits")
    view = s.amps.reshape(1 << lo, 1 << (hi - lo), 1 << (s.n - hi))
    probs = s.probabilities().reshape(view.shape)
    marginal = probs.sum(axis=(0, 2))
    v = _pick(marginal, _draw(rng, r))
    out = np.zeros_like(view)
    out[:, v, :] = view[:, v, :] / np.sqrt(marginal[v])
    return MeasurementOutcome(v, StateVector(s.n, out.reshape(-1)))


def fidelity(a: StateVector, b: StateVector) -> float:
    """Magnitude of the inner product ``|<a|b>|`` (not squared)."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n} qubits")
    return float(min(1.0, abs(np.vdot(a.amps, b.amps))))


def prob_zero(s: StateVector) -> float:
    """Single-trajectory estimate of the |0><0| density-matrix entry."""
    a = s.amps[0]
    return float(a.real * a.real + a.imag * a.imag)
