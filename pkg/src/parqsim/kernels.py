"""In-place gate kernels with explicit work partitioning.

A single-qubit gate on target ``i`` touches amplitude pairs
``(j, j + 2**(n-1-i))`` where bit ``i`` of ``j`` is 0. Pairs are numbered by a
pair index ``q`` in ``[0, 2**(n-1))``; pair ``q`` lives in block
``q // stride`` (the submatrix-subvector product ``M_k``) at row ``q % stride``.
A :class:`WorkPlan` hands every pair, with both of its members, to exactly one
worker, so each worker can update its pairs through a local temporary with
no cross-worker reads.
"""
from __future__ import annotations

import cmath
import functools
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numba
import numpy as np
from numba import njit, prange

from .statevec import StateVector

if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER = "omp"

UNITARY_TOL = 1e-12
# Below this many pairs thread dispatch costs more than the update itself.
SERIAL_THRESHOLD = 1 << 14


class PlanMismatchError(ValueError):
    pass


class NonUnitaryError(ValueError):
    pass


@dataclass(frozen=True)
class GateMatrix:
    """2x2 matrix ``[[u11, u12], [u21, u22]]``; only this is ever stored."""

    u11: complex
    u12: complex
    u21: complex
    u22: complex
    strict: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.strict and not self.is_unitary():
            raise NonUnitaryError(f"matrix is not unitary within {UNITARY_TOL}: {self}")

    @classmethod
    def from_array(cls, m, strict: bool = True) -> "GateMatrix":
        m = np.asarray(m, dtype=np.complex128)
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]), strict)

    def as_array(self) -> np.ndarray:
        return np.array([[self.u11, self.u12], [self.u21, self.u22]], dtype=np.complex128)

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        m = self.as_array()
        return bool(np.abs(m @ m.conj().T - np.eye(2)).max() <= tol)

    def is_diagonal(self) -> bool:
        return self.u12 == 0 and self.u21 == 0

    def dagger(self) -> "GateMatrix":
        c = complex.conjugate
        return GateMatrix(c(self.u11), c(self.u21), c(self.u12), c(self.u22), self.strict)

    def __matmul__(self, other: "GateMatrix") -> "GateMatrix":
        return GateMatrix(
            self.u11 * other.u11 + self.u12 * other.u21,
            self.u11 * other.u12 + self.u12 * other.u22,
            self.u21 * other.u11 + self.u22 * other.u21,
            self.u21 * other.u12 + self.u22 * other.u22,
            strict=False,
        )


_S = 1 / math.sqrt(2)
I = GateMatrix(1, 0, 0, 1)
H = GateMatrix(_S, _S, _S, -_S)
X = GateMatrix(0, 1, 1, 0)
Y = GateMatrix(0, -1j, 1j, 0)
Z = GateMatrix(1, 0, 0, -1)


def phase_gate(d: int, sign: int = 1) -> GateMatrix:
    """``R_d = diag(1, exp(i*pi/2**d))``; ``sign=-1`` gives its inverse."""
    return GateMatrix(1, 0, 0, cmath.exp(sign * 1j * math.pi / (1 << d)))


# -- worker configuration and instrumentation ---------------------------------

def _env_workers() -> int:
    env = os.environ.get("PARQSIM_WORKERS")
    return max(1, int(env)) if env else (os.cpu_count() or 1)


_default_workers = _env_workers()


def default_workers() -> int:
    return _default_workers


def set_default_workers(w: int) -> None:
    global _default_workers
    if w < 1:
        raise ValueError("worker count must be >= 1")
    _default_workers = w


@dataclass
class KernelCounters:
    gates: int = 0
    pair_updates: int = 0
    barriers: int = 0

    def reset(self) -> None:
        self.gates = self.pair_updates = self.barriers = 0


counters = KernelCounters()


# -- planning -----------------------------------------------------------------

@dataclass(frozen=True)
class WorkPlan:
    """Assignment of pair-index ranges to workers for one (n, target).

    Worker ``w`` owns ranges ``ptr[w]:ptr[w+1]`` of ``starts``/``stops``.
    ``mode`` is ``"blocks"`` when whole blocks are dealt out contiguously and
    ``"chunks"`` when each block is cut into per-worker row chunks.
    """

    n: int
    target: int
    workers: int
    mode: str
    starts: np.ndarray
    stops: np.ndarray
    ptr: np.ndarray

    @property
    def stride(self) -> int:
        return 1 << (self.n - 1 - self.target)

    def ranges(self, worker: int) -> list[tuple[int, int]]:
        lo, hi = self.ptr[worker], self.ptr[worker + 1]
        return list(zip(self.starts[lo:hi].tolist(), self.stops[lo:hi].tolist()))

    def pairs(self, worker: int) -> list[tuple[int, int]]:
        """Amplitude index pairs handled by ``worker`` (for inspection/tests)."""
        s = self.stride
        out = []
        for a, b in self.ranges(worker):
            for q in range(a, b):
                j = (q // s) * 2 * s + q % s
                out.append((j, j + s))
        return out


def _split(total: int, parts: int) -> list[tuple[int, int]]:
    # np.array_split sizing: first `total % parts` pieces get one extra
    base, extra = divmod(total, parts)
    out, lo = [], 0
    for p in range(parts):
        hi = lo + base + (1 if p < extra else 0)
        out.append((lo, hi))
        lo = hi
    return out


@functools.lru_cache(maxsize=512)
def plan(n: int, target: int, workers: int) -> WorkPlan:
    if not 0 <= target < n:
        raise ValueError(f"target qubit {target} outside register of {n} qubits")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    stride = 1 << (n - 1 - target)
    blocks = 1 << target
    starts: list[int] = []
    stops: list[int] = []
    ptr = [0]
    if blocks >= workers:
        mode = "blocks"
        for b0, b1 in _split(blocks, workers):
            if b1 > b0:
                starts.append(b0 * stride)
                stops.append(b1 * stride)
            ptr.append(len(starts))
    else:
        mode = "chunks"
        chunks = _split(stride, workers)
        for c0, c1 in chunks:
            if c1 > c0:
                for k in range(blocks):
                    starts.append(k * stride + c0)
                    stops.append(k * stride + c1)
            ptr.append(len(starts))
    arr = lambda v: np.asarray(v, dtype=np.int64)  # noqa: E731
    return WorkPlan(n, target, workers, mode, arr(starts), arr(stops), arr(ptr))


# -- numba kernels --------------------------------------------------------------

@njit(cache=True, inline="always")
def _update_range(amps, lo, hi, log2s, smask, u11, u12, u21, u22, diag,
                  cmask, cval, ftable, fshift, fmask):
    done = 0
    for q in range(lo, hi):
        a = ((q >> log2s) << (log2s + 1)) | (q & smask)
        if (a & cmask) != cval:
            continue
        if not ftable[(a >> fshift) & fmask]:
            continue
        b = a + smask + 1
        if diag:
            amps[a] = u11 * amps[a]
            amps[b] = u22 * amps[b]
        else:
            x = amps[a]
            y = amps[b]
            t1 = u11 * x + u12 * y
            amps[b] = u21 * x + u22 * y
            amps[a] = t1
        done += 1
    return done


@njit(cache=True)
def _apply_serial(amps, starts, stops, log2s, u11, u12, u21, u22, diag,
                  cmask, cval, ftable, fshift, fmask):
    done = 0
    for r in range(starts.size):
        done += _update_range(amps, starts[r], stops[r], log2s, (1 << log2s) - 1,
                              u11, u12, u21, u22, diag, cmask, cval, ftable, fshift, fmask)
    return done


@njit(cache=True, parallel=True)
def _apply_parallel(amps, starts, stops, ptr, log2s, u11, u12, u21, u22, diag,
                    cmask, cval, ftable, fshift, fmask):
    done = np.zeros(ptr.size - 1, dtype=np.int64)
    for w in prange(ptr.size - 1):
        local = 0
        for r in range(ptr[w], ptr[w + 1]):
            local += _update_range(amps, starts[r], stops[r], log2s, (1 << log2s) - 1,
                                   u11, u12, u21, u22, diag, cmask, cval, ftable, fshift, fmask)
        done[w] = local
    return done.sum()


_ALWAYS = np.ones(1, dtype=np.bool_)


def _run(s: StateVector, U: GateMatrix, target: int, p: WorkPlan | None, workers: int | None,
         cmask: int = 0, cval: int = 0, ftable: np.ndarray = _ALWAYS,
         fshift: int = 0, fmask: int = 0) -> int:
    if p is None:
        p = plan(s.n, target, workers or _default_workers)
    elif p.n != s.n or p.target != target or (workers is not None and p.workers != workers):
        raise PlanMismatchError(
            f"plan for (n={p.n}, target={p.target}, workers={p.workers}) used with "
            f"(n={s.n}, target={target}, workers={workers})"
        )
    log2s = s.n - 1 - target
    args = (np.complex128(U.u11), np.complex128(U.u12), np.complex128(U.u21),
            np.complex128(U.u22), U.is_diagonal(), cmask, cval, ftable, fshift, fmask)
    if p.workers == 1 or s.amps.size < 2 * SERIAL_THRESHOLD:
        done = _apply_serial(s.amps, p.starts, p.stops, log2s, *args)
    else:
        numba.set_num_threads(min(p.workers, numba.config.NUMBA_NUM_THREADS))
        done = _apply_parallel(s.amps, p.starts, p.stops, p.ptr, log2s, *args)
    # returning from the kernel joins all workers: the one barrier per gate
    counters.gates += 1
    counters.barriers += 1
    counters.pair_updates += int(done)
    return int(done)


def _bit(n: int, q: int) -> int:
    return 1 << (n - 1 - q)


def apply_single(s: StateVector, U: GateMatrix, target: int,
                 plan: WorkPlan | None = None, workers: int | None = None) -> int:
    """Apply ``U`` to qubit ``target`` in place. Returns the number of pair updates."""
    return _run(s, U, target, plan, workers)


def apply_controlled(s: StateVector, U: GateMatrix, controls: Sequence[tuple[int, int]] | Sequence[int],
                     target: int, plan: WorkPlan | None = None, workers: int | None = None) -> int:
    """Apply ``U`` to ``target`` on basis states matching every control condition.

    ``controls`` holds ``(qubit, required_bit)`` pairs; a bare qubit number
    means required bit 1.
    """
    cmask = cval = 0
    seen = {target}
    for c in controls:
        q, bit = (c, 1) if isinstance(c, (int, np.integer)) else c
        if q in seen:
            raise ValueError(f"qubit {q} used twice among controls/target")
        if not 0 <= q < s.n:
            raise ValueError(f"control qubit {q} outside register of {s.n} qubits")
        seen.add(q)
        m = _bit(s.n, q)
        cmask |= m
        if bit:
            cval |= m
    return _run(s, U, target, plan, workers, cmask=cmask, cval=cval)


def predicate_table(f: Callable | np.ndarray, width: int) -> np.ndarray:
    """Tabulate ``f`` over all ``2**width`` control values as a bool array."""
    if isinstance(f, np.ndarray):
        table = np.asarray(f, dtype=np.bool_)
    else:
        values = np.arange(1 << width)
        try:
            table = np.asarray(f(values), dtype=np.bool_)
        except TypeError:
            table = None
        if table is None or table.shape != values.shape:
            table = np.fromiter((bool(f(int(v))) for v in values), dtype=np.bool_, count=values.size)
    if table.shape != (1 << width,):
        raise ValueError(f"predicate table must have {1 << width} entries")
    return table


def apply_f_controlled(s: StateVector, U: GateMatrix, f: Callable | np.ndarray,
                       control: range | tuple[int, int], target: int,
                       plan: WorkPlan | None = None, workers: int | None = None) -> int:
    """Apply ``U`` to ``target`` wherever ``f(c) = 1`` for the control sub-register value ``c``.

    ``control`` is a contiguous qubit range ``[lo, hi)``; ``f`` is a callable
    (vectorized or scalar) or a precomputed table of ``2**(hi-lo)`` booleans.
    """
    lo, hi = (control.start, control.stop) if isinstance(control, range) else control
    if not (0 <= lo < hi <= s.n):
        raise ValueError(f"control range [{lo}, {hi}) invalid for {s.n} qubits")
    if lo <= target < hi:
        raise ValueError("target lies inside the control range")
    table = predicate_table(f, hi - lo)
    return _run(s, U, target, plan, workers, ftable=table,
                fshift=s.n - hi, fmask=(1 << (hi - lo)) - 1)


def apply_phase_flip(s: StateVector, pred: Callable | int | Sequence[int] | np.ndarray) -> None:
    """Negate the amplitudes of basis states selected by ``pred``.

    ``pred`` is a vectorized predicate over index arrays, a boolean mask, or
    an index / list of indices.
    """
    if callable(pred):
        mask = np.asarray(pred(np.arange(s.amps.size)), dtype=np.bool_)
        np.negative(s.amps, out=s.amps, where=mask)
    else:
        idx = np.asarray(pred)
        if idx.dtype == np.bool_:
            np.negative(s.amps, out=s.amps, where=idx)
        else:
            s.amps[idx] = -s.amps[idx]
    counters.gates += 1
    counters.barriers += 1


BIJECTION_CHECK_MAX_QUBITS = 20


def check_permutation(perm: np.ndarray, size: int) -> None:
    if perm.shape != (size,):
        raise ValueError(f"permutation must have {size} entries, got {perm.shape}")
    if perm.min() < 0 or perm.max() >= size:
        raise ValueError("permutation maps outside the basis")
    seen = np.zeros(size, dtype=np.bool_)
    seen[perm] = True
    if not seen.all():
        raise ValueError("map is not a bijection on basis indices")


def apply_permutation(s: StateVector, perm: np.ndarray | Callable) -> None:
    """Relabel basis states: ``new[perm[j]] = old[j]``.

    Done out of place through a scratch buffer, since a general permutation
    has no pair structure that would make an in-place update safe.
    """
    size = s.amps.size
    if callable(perm):
        perm = np.asarray(perm(np.arange(size)))
    perm = np.asarray(perm, dtype=np.intp)
    if s.n <= BIJECTION_CHECK_MAX_QUBITS:
        check_permutation(perm, size)
    scratch = np.empty_like(s.amps)
    scratch[perm] = s.amps
    s.amps = scratch
    counters.gates += 1
    counters.barriers += 1


def apply_swap(s: StateVector, q1: int, q2: int, workers: int | None = None) -> None:
    """Exchange two qubits with three CNOTs."""
    apply_controlled(s, X, [q1], q2, workers=workers)
    apply_controlled(s, X, [q2], q1, workers=workers)
    apply_controlled(s, X, [q1], q2, workers=workers)


def explicit_operator(n: int, U: GateMatrix, target: int,
                      controls: Sequence[tuple[int, int]] = ()) -> np.ndarray:
    """Dense ``2**n x 2**n`` operator for a (controlled) single-qubit gate.

    Test oracle only: rows whose index fails a control condition are identity
    rows, the rest are rows of ``I x .. x U x .. x I``.
    """
    size = 1 << n
    m = U.as_array()
    full = np.array([[1.0 + 0j]])
    for q in range(n):
        full = np.kron(full, m if q == target else np.eye(2))
    eye = np.eye(size, dtype=np.complex128)
    idx = np.arange(size)
    ok = np.ones(size, dtype=bool)
    for q, bit in controls:
        ok &= ((idx >> (n - 1 - q)) & 1) == bit
    return np.where(ok[:, None], full, eye)
