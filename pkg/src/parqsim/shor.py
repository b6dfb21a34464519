"""Shor factorization: order finding (gate-level or semantic), continued fractions,
candidate checks, the improved post-processing pipeline and the success-probability bound."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import kernels
from .circuits import ModExpSpec, hadamard_all, modexp_operator, modexp_qubit_budget, qft_circuit, qft_fft
from .noise import GateNoise, NoiseConfig
from .statevec import MAX_QUBITS, StateVector, measure_full, measure_subregister, new_register

EULER_GAMMA = 0.57721566490153286060651209
CHECKS = ("neighbor", "gcd", "small-factor", "lcm")


def gcd(a: int, b: int) -> int:
    """Euclid's algorithm."""
    if a < 0 or b < 0 or (a == 0 and b == 0):
        raise ValueError("gcd needs non-negative arguments, not both zero")
    while b:
        a, b = b, a % b
    return a


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def multiplicative_order(x: int, N: int) -> int:
    if gcd(x, N) != 1:
        raise ValueError(f"{x} is not a unit mod {N}")
    r, v = 1, x % N
    while v != 1:
        v = v * x % N
        r += 1
    return r


def euler_phi(N: int) -> int:
    """Totient by trial division."""
    phi, m, p = N, N, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            phi -= phi // p
        p += 1
    if m > 1:
        phi -= phi // m
    return phi


def smallest_factor(N: int) -> int:
    p = 2
    while p * p <= N:
        if N % p == 0:
            return p
        p += 1
    return N


def is_prime_power(N: int) -> bool:
    p = smallest_factor(N)
    while N % p == 0:
        N //= p
    return N == 1


def prob_succ(N: int, phi: int | None = None) -> float:
    """Lower bound on the per-iteration success probability.

    ``(1 - phi/(N-1)) + phi/(N-1) * (1/2)(4/pi^2) e^{-gamma} / ln ln N``.
    """
    if N < 16:
        raise ValueError("N must be >= 16 so that ln ln N > 0")
    phi = euler_phi(N) if phi is None else phi
    frac = phi / (N - 1)
    step34 = 0.5 * (4.0 / math.pi ** 2) * math.exp(-EULER_GAMMA) / math.log(math.log(N))
    return (1.0 - frac) + frac * step34


# -- order finding -----------------------------------------------------------------

class OrderFindingError(ValueError):
    pass


def sample_comb_spectrum(r: int, M: int, bits: int, rng: np.random.Generator) -> int:
    """Draw y from the exact QFT output distribution of an M-tooth, period-r comb.

    ``P(y) = F(y r mod Q) / (M Q)`` with ``F(z) = sin^2(pi z M/Q) / sin^2(pi z/Q)``.
    ``z = y r mod Q`` runs over multiples of ``g = gcd(r, Q)``, each hit by
    ``g`` values of y. z is drawn by rejection from the envelope
    ``min(M^2, A^2/(t(t-1)))`` on the lattice index ``t = z/g``, then y is
    recovered by inverting ``r/g`` modulo ``Q/g``. No 2^bits array is built.
    """
    Q = 1 << bits
    g = math.gcd(r, Q)
    K = Q // g
    half = K // 2
    A = Q / (2 * g)
    T0 = max(1, int(A // M))
    center = (2 * T0 + 1) * float(M) ** 2
    tails = 2 * A * A / T0
    while True:
        if rng.random() * (center + tails) < center:
            t = int(rng.integers(-T0, T0 + 1))
            h = float(M) ** 2
        else:
            u = 1.0 - rng.random()  # (0, 1]
            mag = int(T0 / u) + 1
            if mag > half:
                continue
            t = mag if rng.random() < 0.5 else -mag
            h = A * A / (mag * (mag - 1))
        if t <= -half or t > half:
            continue
        z = (g * t) % Q
        if z == 0:
            F = float(M) ** 2
        else:
            num = math.sin(math.pi * ((z * M) % Q) / Q)
            den = math.sin(math.pi * z / Q)
            F = (num * num) / (den * den)
        if rng.random() * h <= F:
            break
    inv = pow(r // g, -1, K) if K > 1 else 0
    y0 = ((t % K) * inv) % K
    return y0 + K * int(rng.integers(g))


def comb_state(bits: int, offset: int, period: int) -> StateVector:
    """Uniform superposition over ``a = offset + j*period < 2**bits``."""
    s = new_register(bits)
    s.amps[0] = 0.0
    count = ((1 << bits) - offset - 1) // period + 1
    s.amps[offset::period] = 1.0 / math.sqrt(count)
    return s


def order_find(x: int, N: int, mode: str = "semantic", rng: np.random.Generator | None = None,
               noise: NoiseConfig | None = None, fft_max_qubits: int = 20,
               method: str = "auto", workers: int | None = None) -> int:
    """One run of the quantum step; returns the measured QFT register value y.

    mode ``"gate-level"`` builds result and exponent registers (3l qubits),
    applies H to the exponent register, the modular-exponentiation permutation,
    measures the result register, runs the QFT circuit on the exponent register
    and measures it. mode ``"semantic"`` computes the order classically, draws
    the first-register residue with its exact weight, and transforms only the
    2l-qubit comb. ``method`` picks the semantic transform: ``"fft"``,
    ``"circuit"`` (used automatically when noise is set), ``"analytic"``
    (closed-form sampling, for registers above ``fft_max_qubits``), or ``"auto"``.
    """
    rng = rng if rng is not None else np.random.default_rng()
    if gcd(x, N) != 1:
        raise OrderFindingError(f"gcd({x}, {N}) != 1")
    l = N.bit_length()
    bits = 2 * l
    noisy = noise is not None and not noise.noiseless
    gn = GateNoise(noise, rng, workers) if noisy else None

    if mode == "gate-level":
        if modexp_qubit_budget(l) > MAX_QUBITS:
            raise OrderFindingError(
                f"gate-level mode needs 5l+6 = {modexp_qubit_budget(l)} qubits (> {MAX_QUBITS}) for N={N}"
            )
        spec = ModExpSpec(x, N)
        s = new_register(spec.qubits)
        hadamard_all(s, qubits=(l, 3 * l), workers=workers)
        kernels.apply_permutation(s, modexp_operator(spec))
        s = measure_subregister(s, (0, l), rng).collapsed
        qft_circuit(s, qubits=(l, 3 * l), noise=gn, workers=workers)
        return measure_subregister(s, (l, 3 * l), rng).value
    if mode != "semantic":
        raise ValueError(f"unknown mode {mode!r}")

    r = multiplicative_order(x, N)
    a = int(rng.integers(1 << bits))
    a0 = a % r
    if method == "auto":
        method = "circuit" if noisy else ("fft" if bits <= fft_max_qubits else "analytic")
    if method == "analytic":
        if noisy:
            raise OrderFindingError("noise needs an explicit state; use method='circuit'")
        M = ((1 << bits) - a0 - 1) // r + 1
        return sample_comb_spectrum(r, M, bits, rng)
    s = comb_state(bits, a0, r)
    if method == "fft":
        qft_fft(s, workers=workers)
    elif method == "circuit":
        qft_circuit(s, noise=gn, workers=workers)
    else:
        raise ValueError(f"unknown method {method!r}")
    return measure_full(s, rng).value


# -- classical post-processing ---------------------------------------------------------

@dataclass(frozen=True)
class OrderCandidate:
    k: int
    r: int
    provenance: str = "base"


def continued_fraction(num: int, den: int) -> list[int]:
    terms = []
    while den:
        q, rem = divmod(num, den)
        terms.append(q)
        num, den = den, rem
    return terms


def convergents(y: int, bits: int, N: int, provenance: str = "base") -> list[OrderCandidate]:
    """Convergents k/r of ``y / 2**bits`` with ``0 < k < r < N`` within ``2**-(bits+1)``.

    Largest r first.
    """
    Q = 1 << bits
    if not 0 <= y < Q:
        raise ValueError(f"y={y} outside [0, 2^{bits})")
    if y == 0:
        return []
    target = Fraction(y, Q)
    bound = Fraction(1, 2 * Q)
    h0, h1 = 0, 1  # numerators h_{-2}, h_{-1}
    k0, k1 = 1, 0
    found = []
    for a in continued_fraction(y, Q):
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 >= N:
            break
        if 0 < h1 < k1 and abs(target - Fraction(h1, k1)) <= bound:
            found.append(OrderCandidate(h1, k1, provenance))
    found.sort(key=lambda c: c.r, reverse=True)
    return found


class Attempt(NamedTuple):
    factor: int | None
    reason: str


def try_candidate(N: int, x: int, r: int) -> Attempt:
    """Standard check of a candidate order r; on success a nontrivial divisor of N."""
    if r < 1:
        raise ValueError("candidate order must be >= 1")
    if pow(x, r, N) != 1:
        return Attempt(None, "x^r != 1 mod N")
    if r % 2:
        return Attempt(None, "r is odd")
    h = pow(x, r // 2, N)
    if h == 1 or h == N - 1:
        return Attempt(None, "x^(r/2) = +-1 mod N")
    for d in (gcd(N, h - 1), gcd(N, h + 1)):
        if 1 < d < N:
            return Attempt(d, "ok")
    return Attempt(None, "gcds trivial")


def gcd_check(N: int, x: int, r: int) -> int | None:
    """``gcd(N, x^{r/2} +- 1)`` for even r, whether or not ``x^r = 1``."""
    if r % 2:
        return None
    h = pow(x, r // 2, N)
    for d in (gcd(N, (h - 1) % N), gcd(N, h + 1)):
        if 1 < d < N:
            return d
    return None


@dataclass
class ShorConfig:
    N: int
    mode: str = "semantic"
    improvements: frozenset[str] = frozenset()
    small_factor_bound: int = 8
    neighbor_radius: int = 2
    noise: NoiseConfig | None = None
    max_iterations: int = 1000
    x: int | None = None  # fixed base instead of random choice
    fft_max_qubits: int = 20
    method: str = "auto"

    def __post_init__(self):
        self.improvements = frozenset(self.improvements)
        unknown = self.improvements - set(CHECKS)
        if unknown:
            raise ValueError(f"unknown improvements {sorted(unknown)}")
        if self.N < 15 or self.N % 2 == 0:
            raise ValueError(f"N must be odd and >= 15, got {self.N}")
        if is_prime_power(self.N):
            raise ValueError(f"N={self.N} is a prime power")

    @property
    def bits(self) -> int:
        return 2 * self.N.bit_length()

    @property
    def improvements_mask(self) -> int:
        return sum(1 << i for i, c in enumerate(CHECKS) if c in self.improvements)


@dataclass
class Tallies:
    success: dict[str, int] = field(default_factory=lambda: dict.fromkeys(CHECKS, 0))
    failure: dict[str, int] = field(default_factory=lambda: dict.fromkeys(CHECKS, 0))

    def record(self, check: str, ok: bool) -> None:
        (self.success if ok else self.failure)[check] += 1

    def ratio(self, check: str) -> str:
        return f"{self.success[check]}/{self.failure[check]}"


@dataclass
class PostprocessResult:
    factor: int | None
    check: str | None  # check that produced the factor: base, neighbor stage, gcd, small-factor, lcm
    candidates: list[OrderCandidate]


def plain_postprocess(N: int, x: int, y: int, bits: int) -> PostprocessResult:
    cands = convergents(y, bits, N)
    for c in cands:
        f = try_candidate(N, x, c.r).factor
        if f:
            return PostprocessResult(f, "base", cands)
    return PostprocessResult(None, None, cands)


def _candidate_checks(N: int, x: int, r: int, cfg: ShorConfig, performed: set[str]) -> tuple[int | None, str | None]:
    f = try_candidate(N, x, r).factor
    if f:
        return f, "base"
    if "gcd" in cfg.improvements and r % 2 == 0:
        performed.add("gcd")
        f = gcd_check(N, x, r)
        if f:
            return f, "gcd"
    if "small-factor" in cfg.improvements and pow(x, r, N) != 1:
        performed.add("small-factor")
        for m in range(2, cfg.small_factor_bound + 1):
            rm = m * r
            if rm >= N:
                break
            if pow(x, rm, N) == 1:
                f = try_candidate(N, x, rm).factor
                if f is None and "gcd" in cfg.improvements:
                    f = gcd_check(N, x, rm)
                if f:
                    return f, "small-factor"
                break
    return None, None


def improved_postprocess(N: int, x: int, y: int, cfg: ShorConfig,
                         memory: list[int] | None = None,
                         tallies: Tallies | None = None) -> PostprocessResult:
    """Post-process one measurement with the enabled checks.

    Order: candidates from y (standard, GCD, small-factor checks each); if
    none yields a factor, candidates from y+-1 .. y+-radius; then lcm of each
    new candidate with every remembered one. ``memory`` carries candidate
    orders across iterations and is extended in place. Tallies count, per
    check, iterations where it ran and did (success) or did not (failure)
    produce the factor.
    """
    bits = cfg.bits
    Q = 1 << bits
    memory = [] if memory is None else memory
    performed: set[str] = set()
    found: int | None = None
    by: str | None = None
    tried: set[int] = set()
    all_cands: list[OrderCandidate] = []

    def run(cands: list[OrderCandidate]) -> tuple[int | None, str | None]:
        for c in cands:
            if c.r in tried:
                continue
            tried.add(c.r)
            all_cands.append(c)
            f, how = _candidate_checks(N, x, c.r, cfg, performed)
            if f:
                return f, how
        return None, None

    found, by = run(convergents(y, bits, N))
    neighbor_hit = False
    if found is None and "neighbor" in cfg.improvements:
        performed.add("neighbor")
        near = []
        for d in range(1, cfg.neighbor_radius + 1):
            for yy in (y - d, y + d):
                if 0 <= yy < Q:
                    near.extend(convergents(yy, bits, N, "neighbor"))
        found, by = run(near)
        neighbor_hit = found is not None
    if found is None and "lcm" in cfg.improvements:
        new = [c.r for c in all_cands]
        pool = memory + new
        if new and len(pool) > 1:
            performed.add("lcm")
            seen: set[int] = set()
            for r1 in new:
                for r2 in pool:
                    L = lcm(r1, r2)
                    if L in seen or L in tried or L >= N:
                        continue
                    seen.add(L)
                    f = try_candidate(N, x, L).factor
                    if f is None and "gcd" in cfg.improvements:
                        f = gcd_check(N, x, L)
                    if f:
                        found, by = f, "lcm"
                        break
                if found:
                    break
    for c in all_cands:
        if c.r not in memory:
            memory.append(c.r)
    if tallies is not None:
        for check in performed:
            ok = (by == check) or (check == "neighbor" and neighbor_hit)
            tallies.record(check, ok)
    return PostprocessResult(found, by, all_cands)


@dataclass
class ShorStats:
    N: int
    iterations: int = 0
    factor: int | None = None
    tallies: Tallies = field(default_factory=Tallies)
    found_by: str | None = None

    @property
    def success(self) -> bool:
        return self.factor is not None

    @property
    def factors(self) -> tuple[int, int] | None:
        if self.factor is None:
            return None
        a, b = sorted((self.factor, self.N // self.factor))
        return a, b


def shor_factor(cfg: ShorConfig, rng: np.random.Generator | None = None,
                workers: int | None = None) -> ShorStats:
    """Repeat choose-x / order-find / post-process until a factor appears.

    Each pass through the loop is one iteration, including a lucky
    ``gcd(x, N) > 1``.
    """
    rng = rng if rng is not None else np.random.default_rng()
    N = cfg.N
    stats = ShorStats(N)
    memory: list[int] = []
    improved = bool(cfg.improvements)
    while stats.iterations < cfg.max_iterations:
        stats.iterations += 1
        x = cfg.x if cfg.x is not None else int(rng.integers(2, N - 1))
        d = gcd(x, N)
        if d > 1:
            stats.factor, stats.found_by = d, "gcd(x,N)"
            break
        y = order_find(x, N, cfg.mode, rng, cfg.noise, cfg.fft_max_qubits, cfg.method, workers)
        if improved:
            res = improved_postprocess(N, x, y, cfg, memory, stats.tallies)
        else:
            res = plain_postprocess(N, x, y, cfg.bits)
        if res.factor:
            stats.factor, stats.found_by = res.factor, res.check
            break
    return stats
