"""Experiment recipes and benchmarks behind the command line.

Every recipe returns a list of row dicts; :func:`to_csv` renders them with
a fixed column order and ``repr`` floats, so equal inputs and seed give
byte-identical files whatever the worker count. Benchmark rows carry wall
times and are the only non-deterministic output.
"""
from __future__ import annotations

import csv
import io
import math
import os
import statistics
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import circuits, kernels, noise as noisemod, shor
from .noise import NoiseConfig, run_trajectories
from .statevec import StateVector, check_budget, fidelity, new_register, prob_zero

KINDS = ("ht-decay", "qft-fidelity", "grover-curve", "shor", "qft-bench", "ht-bench", "gate-microbench")


@dataclass
class ExperimentSpec:
    kind: str
    n: list[int] = field(default_factory=lambda: [10])
    p: list[float] = field(default_factory=lambda: [0.0])
    sigma: list[float] = field(default_factory=lambda: [0.0])
    k: list[int] = field(default_factory=lambda: [100])
    trials: int = 100
    workers: list[int] = field(default_factory=lambda: [kernels.default_workers()])
    seed: int = 0
    out: str | None = None
    # shor
    N: list[int] = field(default_factory=lambda: [21311])
    mode: str = "semantic"
    improvements: list[str] = field(default_factory=list)
    runs: int = 100
    max_iterations: int = 1000
    # qft-fidelity
    x: int = 23
    modulus: int = 187
    # grover
    target: int = 1
    ancilla: bool = True
    granularity: str | None = None
    repeats: int = 5
    budget: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; choose from {KINDS}")
        for name in ("n", "p", "sigma", "k", "workers"):
            if not getattr(self, name):
                raise ValueError(f"sweep list {name!r} is empty")
        if self.trials < 1 or self.runs < 1:
            raise ValueError("trials and runs must be >= 1")

    @classmethod
    def from_mapping(cls, kind: str, values: dict[str, str]) -> "ExperimentSpec":
        """Build from text key=value pairs (config file or CLI)."""
        types = {f.name: f.type for f in fields(cls)}
        kw: dict = {}
        for key, raw in values.items():
            key = key.strip().replace("-", "_")
            if key == "kind":
                kind = raw.strip()
                continue
            if key not in types:
                raise ValueError(f"unknown setting {key!r}")
            kw[key] = _parse(types[key], raw.strip())
        return cls(kind=kind, **kw)


def _parse(typ: str, raw: str):
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if typ == "list[int]":
        return [int(float(s)) for s in items]
    if typ == "list[float]":
        return [float(s) for s in items]
    if typ == "list[str]":
        return items
    if typ == "int":
        return int(float(raw))
    if typ == "int | None":
        return None if raw.lower() in ("", "none") else int(float(raw))
    if typ == "bool":
        return raw.lower() in ("1", "true", "yes", "on")
    if typ == "str | None":
        return None if raw.lower() in ("", "none") else raw
    return raw


def read_config(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {line!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _even_ks(kmax: int) -> list[int]:
    return list(range(2, kmax + 1, 2))


# -- Hadamard transform decay --------------------------------------------------------

def ht_decay_experiment(n: int, kmax: int, workers: int | None = None) -> noisemod.Experiment:
    """Apply H_n ``kmax`` times to |0..0>, recording |a_0|^2 after every even sweep."""
    def experiment(noise: noisemod.GateNoise):
        s = new_register(n)
        out = np.empty(kmax // 2)
        for sweep in range(1, kmax + 1):
            circuits.hadamard_all(s, noise, workers=workers)
            if sweep % 2 == 0:
                out[sweep // 2 - 1] = prob_zero(s)
        return {"prob_zero": out}
    return experiment


def ht_decay(spec: ExperimentSpec) -> list[dict]:
    rows = []
    w = spec.workers[0]
    kmax = max(spec.k)
    for n in spec.n:
        check_budget(n, spec.budget)
        for p in spec.p:
            for sigma in spec.sigma:
                cfg = NoiseConfig(p, sigma, spec.granularity or "gate", spec.seed)
                stats = run_trajectories(ht_decay_experiment(n, kmax, w), cfg, spec.trials, w)
                mean, err = stats.mean("prob_zero"), stats.stderr("prob_zero")
                for i, k in enumerate(_even_ks(kmax)):
                    if sigma == 0:
                        theory = noisemod.analytic_ht_depolarizing(n, p, k)
                    elif p == 0:
                        theory = noisemod.analytic_ht_operational(n, sigma, k)
                    else:
                        theory = (noisemod.analytic_ht_depolarizing(n, p, k)
                                  * noisemod.analytic_ht_operational(n, sigma, k))
                    rows.append(dict(kind="ht-decay", n=n, p=p, sigma=sigma, k=k, trials=spec.trials,
                                     mean=float(mean[i]), stderr=float(err[i]), analytic=theory))
    return rows


# -- QFT under noise -------------------------------------------------------------------

def qft_fidelity_experiment(N: int, x: int, workers: int | None = None) -> noisemod.Experiment:
    """Noisy QFT circuit on the period-finding comb vs the exact transform.

    Records the fidelity and the exact probability that a measurement of
    the noisy state lets plain post-processing recover a factor.
    """
    bits = 2 * N.bit_length()
    r = shor.multiplicative_order(x, N)
    good = np.zeros(1 << bits, dtype=bool)
    for y in range(1, 1 << bits):
        cands = shor.convergents(y, bits, N)
        good[y] = any(shor.try_candidate(N, x, c.r).factor for c in cands)

    def experiment(noise: noisemod.GateNoise):
        a0 = int(noise.rng.integers(1 << bits)) % r
        ideal = shor.comb_state(bits, a0, r)
        noisy = ideal.copy()
        circuits.qft_fft(ideal, workers=workers)
        circuits.qft_circuit(noisy, noise=noise, workers=workers)
        return {"fidelity": fidelity(ideal, noisy),
                "success_prob": float(noisy.probabilities()[good].sum())}
    return experiment


def qft_fidelity(spec: ExperimentSpec) -> list[dict]:
    N, x = spec.modulus, spec.x
    bits = 2 * N.bit_length()
    check_budget(bits, spec.budget)
    w = spec.workers[0]
    exp = qft_fidelity_experiment(N, x, w)
    rows = []
    for p in spec.p:
        for sigma in spec.sigma:
            cfg = NoiseConfig(p, sigma, spec.granularity or "gate", spec.seed)
            stats = run_trajectories(exp, cfg, spec.trials, w)
            sp = float(stats.mean("success_prob"))
            rows.append(dict(kind="qft-fidelity", N=N, x=x, qubits=bits, p=p, sigma=sigma,
                             trials=spec.trials, fidelity=float(stats.mean("fidelity")),
                             fidelity_stderr=float(stats.stderr("fidelity")),
                             success_prob=sp, iterations=(1.0 / sp if sp > 0 else math.inf)))
    return rows


# -- Grover under noise ----------------------------------------------------------------

def grover_experiment(n: int, k: int, iterations: int, use_ancilla: bool = True,
                      workers: int | None = None) -> noisemod.Experiment:
    """Magnitude of the target amplitude after each G-iteration."""
    def experiment(noise: noisemod.GateNoise):
        s = circuits.grover_register(n, use_ancilla, noise, workers)
        amp = np.empty(iterations)
        for j in range(iterations):
            circuits.grover_iteration(s, k, use_ancilla, noise, workers)
            amp[j] = abs(circuits.target_amplitude(s, k, use_ancilla))
        return {"amplitude": amp}
    return experiment


def grover_curve(spec: ExperimentSpec) -> list[dict]:
    rows = []
    w = spec.workers[0]
    iters = max(spec.k)
    for n in spec.n:
        check_budget(n + spec.ancilla, spec.budget)
        theta = math.asin(2.0 ** (-n / 2))
        for p in spec.p:
            for sigma in spec.sigma:
                cfg = NoiseConfig(p, sigma, spec.granularity or "iteration", spec.seed)
                stats = run_trajectories(grover_experiment(n, spec.target, iters, spec.ancilla, w),
                                         cfg, spec.trials, w)
                mean, err = stats.mean("amplitude"), stats.stderr("amplitude")
                for j in range(iters):
                    rows.append(dict(kind="grover-curve", n=n, target=spec.target, p=p, sigma=sigma,
                                     iteration=j + 1, trials=spec.trials, amplitude=float(mean[j]),
                                     stderr=float(err[j]),
                                     noiseless=abs(math.sin((2 * (j + 1) + 1) * theta))))
    return rows


# -- Shor --------------------------------------------------------------------------------

def shor_runs(N: int, runs: int, seed: int, workers: int | None = None, **cfg_kw) -> list[shor.ShorStats]:
    """``runs`` independent factorizations; run i uses seed ``(seed, i)``."""
    cfg = shor.ShorConfig(N, **cfg_kw)
    return [shor.shor_factor(cfg, noisemod.trial_rng(seed, i), workers) for i in range(runs)]


def shor_table(spec: ExperimentSpec) -> list[dict]:
    rows = []
    w = spec.workers[0]
    improvements = frozenset(shor.CHECKS) if spec.improvements == ["all"] else frozenset(spec.improvements)
    noise = None
    if spec.p[0] or spec.sigma[0]:
        noise = NoiseConfig(spec.p[0], spec.sigma[0], spec.granularity or "gate", spec.seed)
    for N in spec.N:
        cfg = shor.ShorConfig(N, mode=spec.mode, improvements=improvements, noise=noise,
                              max_iterations=spec.max_iterations)
        results = [shor.shor_factor(cfg, noisemod.trial_rng(spec.seed, i), w) for i in range(spec.runs)]
        its = [r.iterations for r in results]
        row = dict(kind="shor", N=N, mode=spec.mode, improvements=cfg.improvements_mask,
                   runs=spec.runs, successes=sum(r.success for r in results),
                   mean_iterations=statistics.fmean(its),
                   stderr=(statistics.stdev(its) / math.sqrt(len(its)) if len(its) > 1 else 0.0),
                   theoretical=1.0 / shor.prob_succ(N),
                   factor=next((min(r.factors) for r in results if r.success), ""))
        for c in shor.CHECKS:
            s = sum(r.tallies.success[c] for r in results)
            f = sum(r.tallies.failure[c] for r in results)
            row[f"{c}_sf"] = f"{s}/{f}"
        rows.append(row)
    return rows


# -- benchmarks --------------------------------------------------------------------------

def median_time(fn: Callable[[], None], repeats: int = 5) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def _bench_ops(kind: str, n: int) -> dict[str, Callable[[StateVector, int], None]]:
    if kind == "qft-bench":
        return {"circuit": lambda s, w: circuits.qft_circuit(s, workers=w),
                "fft": lambda s, w: circuits.qft_fft(s, workers=w)}
    if kind == "ht-bench":
        return {"circuit": lambda s, w: circuits.hadamard_all(s, workers=w)}
    if kind == "gate-microbench":
        return {"single-H": lambda s, w: kernels.apply_single(s, kernels.H, n // 2, workers=w)}
    raise ValueError(f"not a benchmark kind: {kind}")


def bench_speedup(kind: str, n: int, workers: Iterable[int], repeats: int = 5,
                  seed: int = 0, budget: int | None = None) -> list[dict]:
    """Median-of-``repeats`` wall times per algorithm and worker count, speedup vs 1 worker."""
    check_budget(n, budget)
    workers = list(workers)
    rng = np.random.default_rng(seed)
    state = StateVector.random(n, rng)
    rows = []
    for alg, op in _bench_ops(kind, n).items():
        base = None
        op(state.copy(), 1)  # warm-up / JIT
        for w in sorted(set(workers) | {1}):
            s = state.copy()
            t = median_time(lambda: op(s, w), repeats)
            if w == 1:
                base = t
            if w in workers:
                rows.append(dict(kind=kind, n=n, algorithm=alg, workers=w, cores=_cores(),
                                 median_seconds=t, speedup=base / t))
    return rows


def _cores() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def bench(spec: ExperimentSpec) -> list[dict]:
    rows = []
    for n in spec.n:
        rows.extend(bench_speedup(spec.kind, n, spec.workers, spec.repeats, spec.seed, spec.budget))
    return rows


RECIPES: dict[str, Callable[[ExperimentSpec], list[dict]]] = {
    "ht-decay": ht_decay,
    "qft-fidelity": qft_fidelity,
    "grover-curve": grover_curve,
    "shor": shor_table,
    "qft-bench": bench,
    "ht-bench": bench,
    "gate-microbench": bench,
}


def run_experiment(spec: ExperimentSpec) -> list[dict]:
    """Run one spec; writes CSV to ``spec.out`` when set and returns the rows."""
    rows = RECIPES[spec.kind](spec)
    if spec.out:
        Path(spec.out).write_text(to_csv(rows))
    return rows


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    cols = list(rows[0])
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in cols])
    return buf.getvalue()
