"""Depolarizing and operational error models, trajectory averaging, analytic decay curves.

Operational errors perturb the angles of a gate's rotation/phase
decomposition; depolarizing errors apply a random Pauli with total
probability ``p`` per qubit per injection point. A noisy experiment is
averaged over many pure-state trajectories, each driven by its own seeded
random stream.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from . import kernels
from .kernels import GateMatrix
from .statevec import StateVector

GRANULARITIES = ("gate", "iteration")


@dataclass(frozen=True)
class NoiseConfig:
    """Noise parameters for one experiment.

    granularity: ``"gate"`` injects depolarizing noise after each injection-point
    gate on the qubits it touches; ``"iteration"`` injects once per algorithm
    iteration on every register qubit.
    """

    p: float = 0.0
    sigma: float = 0.0
    granularity: str = "gate"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"depolarizing probability must be in [0, 1], got {self.p}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.granularity not in GRANULARITIES:
            raise ValueError(f"granularity must be one of {GRANULARITIES}")

    @property
    def noiseless(self) -> bool:
        return self.p == 0.0 and self.sigma == 0.0


# -- rotation / phase decomposition ---------------------------------------------

def rotation(theta: float) -> GateMatrix:
    c, s = math.cos(theta), math.sin(theta)
    return GateMatrix(c, -s, s, c, strict=False)


def phase1(phi: float) -> GateMatrix:
    return GateMatrix(1, 0, 0, cmath.exp(1j * phi), strict=False)


def phase2(phi: float) -> GateMatrix:
    return GateMatrix(cmath.exp(1j * phi), 0, 0, 1, strict=False)


_FACTOR_BUILDERS = {"R": rotation, "P1": phase1, "P2": phase2}


@dataclass(frozen=True)
class Factor:
    kind: str  # "R", "P1" or "P2"
    angle: float

    def matrix(self, deviation: float = 0.0) -> GateMatrix:
        return _FACTOR_BUILDERS[self.kind](self.angle + deviation)


@dataclass(frozen=True)
class RotationDecomposition:
    """Ordered factors whose left-to-right product is the gate."""

    factors: tuple[Factor, ...]

    def matrix(self, deviations: Iterable[float] | None = None) -> GateMatrix:
        devs = [0.0] * len(self.factors) if deviations is None else list(deviations)
        out = GateMatrix(1, 0, 0, 1, strict=False)
        for f, d in zip(self.factors, devs):
            out = out @ f.matrix(d)
        return out


def decompose(name: str, d: int | None = None) -> RotationDecomposition:
    """Decompose H, NOT, R_d or identity into U_R / U_P1 factors."""
    key = name.upper()
    if key == "H":
        fs = (Factor("R", math.pi / 4), Factor("P1", math.pi))
    elif key in ("NOT", "X"):
        fs = (Factor("R", math.pi / 2), Factor("P1", math.pi))
    elif key in ("R", "RD", "CR"):
        if d is None:
            raise ValueError("R_d needs its depth index d")
        fs = (Factor("P1", math.pi / (1 << d)),)
    elif key in ("I", "ID", "IDENTITY"):
        fs = ()
    else:
        raise ValueError(f"no rotation decomposition for gate {name!r}")
    return RotationDecomposition(fs)


def perturb(decomp: RotationDecomposition, sigma: float,
            rng: np.random.Generator) -> GateMatrix:
    """Product of the factors with every angle shifted by an independent N(0, sigma^2)."""
    if sigma == 0.0:
        return decomp.matrix()
    return decomp.matrix(rng.normal(0.0, sigma, size=len(decomp.factors)))


# -- depolarizing channel --------------------------------------------------------

PAULIS = (kernels.X, kernels.Y, kernels.Z)


def inject_depolarizing(s: StateVector, qubits: Iterable[int], p: float,
                        rng: np.random.Generator, workers: int | None = None) -> int:
    """Independently per qubit: with probability p apply a uniformly chosen Pauli.

    One uniform ``u`` is drawn per qubit; ``u < p`` selects an error and
    ``floor(3u/p)`` picks which Pauli, so the stream advances by exactly one
    draw per listed qubit. Returns the number of Pauli errors applied.
    """
    if p == 0.0:
        return 0
    events = 0
    for q in qubits:
        u = rng.random()
        if u < p:
            kernels.apply_single(s, PAULIS[min(2, int(3.0 * u / p))], q, workers=workers)
            events += 1
    return events


class GateNoise:
    """Per-trajectory noise source handed to circuits.

    Circuits ask it for (possibly perturbed) gate matrices and call the two
    injection hooks; which hook actually injects depends on the granularity.
    """

    def __init__(self, cfg: NoiseConfig, rng: np.random.Generator, workers: int | None = None):
        self.cfg = cfg
        self.rng = rng
        self.workers = workers
        self.pauli_events = 0
        self.injections = 0
        self._decomp: dict[tuple[str, int | None], RotationDecomposition] = {}

    def gate(self, name: str, d: int | None = None, nominal: GateMatrix | None = None) -> GateMatrix:
        if self.cfg.sigma == 0.0 and nominal is not None:
            return nominal
        key = (name, d)
        dec = self._decomp.get(key)
        if dec is None:
            dec = self._decomp[key] = decompose(name, d)
        return perturb(dec, self.cfg.sigma, self.rng)

    def _inject(self, s: StateVector, qubits: Iterable[int]) -> None:
        qubits = tuple(qubits)
        self.injections += len(qubits)
        self.pauli_events += inject_depolarizing(s, qubits, self.cfg.p, self.rng, self.workers)

    def after_gate(self, s: StateVector, qubits: Iterable[int]) -> None:
        if self.cfg.granularity == "gate":
            self._inject(s, qubits)

    def after_iteration(self, s: StateVector, qubits: Iterable[int]) -> None:
        if self.cfg.granularity == "iteration":
            self._inject(s, qubits)


# -- trajectories ----------------------------------------------------------------

def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Random stream for one trial, derived from (master seed, trial index)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, trial])))


@dataclass
class TrajectoryStats:
    """Running sums for trajectory averages; merge is commutative."""

    trials: int = 0
    sums: dict[str, np.ndarray] = field(default_factory=dict)
    sumsq: dict[str, np.ndarray] = field(default_factory=dict)

    def add(self, observables: Mapping[str, float | np.ndarray]) -> None:
        for k, v in observables.items():
            v = np.asarray(v, dtype=np.float64)
            if k in self.sums:
                self.sums[k] = self.sums[k] + v
                self.sumsq[k] = self.sumsq[k] + v * v
            else:
                self.sums[k] = v.copy()
                self.sumsq[k] = v * v
        self.trials += 1

    def merge(self, other: "TrajectoryStats") -> "TrajectoryStats":
        out = TrajectoryStats(self.trials + other.trials)
        for k in set(self.sums) | set(other.sums):
            z = 0.0
            out.sums[k] = self.sums.get(k, z) + other.sums.get(k, z)
            out.sumsq[k] = self.sumsq.get(k, z) + other.sumsq.get(k, z)
        return out

    def mean(self, key: str) -> np.ndarray:
        return self.sums[key] / self.trials

    def stderr(self, key: str) -> np.ndarray:
        """Sample standard deviation over sqrt(trials); zero for a single trial."""
        t = self.trials
        if t < 2:
            return np.zeros_like(self.sums[key])
        m = self.sums[key] / t
        var = np.maximum(self.sumsq[key] - t * m * m, 0.0) / (t - 1)
        return np.sqrt(var / t)

    @property
    def observables(self) -> list[str]:
        return sorted(self.sums)


Experiment = Callable[[GateNoise], Mapping[str, float | np.ndarray]]


def run_trajectories(experiment: Experiment, cfg: NoiseConfig, trials: int,
                     workers: int | None = None) -> TrajectoryStats:
    """Run ``experiment`` once per trial and average the observables it returns.

    Trial ``t`` draws every random number from ``trial_rng(cfg.seed, t)`` in
    circuit order, so results do not depend on the worker count.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    stats = TrajectoryStats()
    for t in range(trials):
        stats.add(experiment(GateNoise(cfg, trial_rng(cfg.seed, t), workers)))
    return stats


# -- analytic |0><0| decay under repeated Hadamard transforms --------------------

def _check_even(k: int) -> None:
    if k < 0 or k % 2:
        raise ValueError(f"k must be a non-negative even number, got {k}")


def analytic_ht_depolarizing(n: int, p: float, k: int) -> float:
    """``((1 + (1 - 4p/3)**k) / 2)**n`` for k (even) noisy Hadamard sweeps."""
    _check_even(k)
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    return ((1.0 + (1.0 - 4.0 * p / 3.0) ** k) / 2.0) ** n


def analytic_ht_operational(n: int, sigma: float, k: int) -> float:
    """``((1 + exp(-9 k sigma**2 / 4)) / 2)**n`` for k (even) perturbed Hadamard sweeps."""
    _check_even(k)
    return ((1.0 + math.exp(-(sigma ** 2) / 4.0 * 9.0 * k)) / 2.0) ** n
