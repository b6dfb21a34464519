import math

import numpy as np
import pytest

from parqsim import circuits, kernels
from parqsim.circuits import (
    Gate,
    ModExpSpec,
    approx_bound_for,
    format_gates,
    grover_iteration,
    grover_register,
    grover_search,
    hadamard_all,
    modexp_operator,
    modexp_qubit_budget,
    modexp_table,
    qft_circuit,
    qft_fft,
    qft_gates,
    target_amplitude,
)
from parqsim.statevec import StateVector, fidelity, new_register


def dft_matrix(m):
    Q = 1 << m
    x = np.arange(Q)
    return np.exp(2j * np.pi * np.outer(x, x) / Q) / math.sqrt(Q)


class TestHadamard:
    def test_n1(self):
        s = new_register(1)
        hadamard_all(s)
        np.testing.assert_allclose(s.amps, [1 / math.sqrt(2)] * 2, atol=1e-15)

    def test_n2_from_01(self):
        s = StateVector.basis(2, 0b01)
        hadamard_all(s)
        np.testing.assert_allclose(s.amps, [0.5, -0.5, 0.5, -0.5], atol=1e-15)

    def test_against_walsh(self, rng):
        n = 5
        s = StateVector.random(n, rng)
        x = np.arange(1 << n)
        sign = np.array([[(-1) ** bin(a & b).count("1") for b in x] for a in x]) / math.sqrt(1 << n)
        expected = sign @ s.amps
        hadamard_all(s)
        np.testing.assert_allclose(s.amps, expected, atol=1e-13)

    def test_involution(self, rng):
        s = StateVector.random(9, rng)
        ref = s.amps.copy()
        hadamard_all(s)
        hadamard_all(s)
        np.testing.assert_allclose(s.amps, ref, atol=1e-13)


class TestQFT:
    def test_zero_to_uniform(self):
        s = new_register(3)
        qft_circuit(s)
        np.testing.assert_allclose(s.amps, np.full(8, 1 / math.sqrt(8)), atol=1e-15)

    def test_comb_example(self):
        s = StateVector.from_amplitudes([1, 0, 0, 0, 1, 0, 0, 0], normalize=True)
        qft_circuit(s)
        np.testing.assert_allclose(s.amps, [0.5, 0, 0.5, 0, 0.5, 0, 0.5, 0], atol=1e-15)

    @pytest.mark.parametrize("m", [1, 2, 3, 6])
    def test_matches_dft_matrix(self, rng, m):
        s = StateVector.random(m, rng)
        expected = dft_matrix(m) @ s.amps
        t = s.copy()
        qft_circuit(s)
        qft_fft(t)
        np.testing.assert_allclose(s.amps, expected, atol=1e-13)
        np.testing.assert_allclose(t.amps, expected, atol=1e-13)

    def test_subregister(self, rng):
        # QFT on qubits [1, 4) of 5 acts as (I_2 x F_8 x I_2)
        s = StateVector.random(5, rng)
        op = np.kron(np.kron(np.eye(2), dft_matrix(3)), np.eye(2))
        expected = op @ s.amps
        t = s.copy()
        qft_circuit(s, qubits=(1, 4))
        qft_fft(t, qubits=(1, 4))
        np.testing.assert_allclose(s.amps, expected, atol=1e-13)
        np.testing.assert_allclose(t.amps, expected, atol=1e-13)

    def test_inverse_round_trip(self, rng):
        s = StateVector.random(7, rng)
        ref = s.amps.copy()
        qft_circuit(s)
        qft_circuit(s, inverse=True)
        np.testing.assert_allclose(s.amps, ref, atol=1e-13)
        qft_fft(s)
        qft_fft(s, inverse=True)
        np.testing.assert_allclose(s.amps, ref, atol=1e-13)

    def test_norm(self, rng):
        s = StateVector.random(10, rng)
        qft_circuit(s)
        assert abs(s.norm_squared() - 1) < 1e-12

    @pytest.mark.parametrize("n, r", [(6, 4), (8, 8), (10, 32)])
    def test_comb_support(self, n, r):
        s = StateVector.from_amplitudes((np.arange(1 << n) % r == 1).astype(float), normalize=True)
        direct = dft_matrix(n) @ s.amps
        qft_circuit(s)
        np.testing.assert_allclose(s.amps, direct, atol=1e-12)
        support = np.flatnonzero(np.abs(s.amps) > 1e-9)
        np.testing.assert_array_equal(support, np.arange(0, 1 << n, (1 << n) // r))

    def test_approximation_exact_at_n_minus_1(self, rng):
        n = 8
        s = StateVector.random(n, rng)
        a, b = s.copy(), s.copy()
        qft_circuit(a)
        qft_circuit(b, approx_bound=n - 1)
        assert np.array_equal(a.amps, b.amps)

    def test_approximation_monotone(self, rng):
        n = 10
        s = StateVector.random(n, rng)
        exact = s.copy()
        qft_fft(exact)
        fids = []
        for bound in (1, 2, 4, 6, 9):
            t = s.copy()
            qft_circuit(t, approx_bound=bound)
            fids.append(fidelity(exact, t))
        assert all(a <= b + 1e-12 for a, b in zip(fids, fids[1:]))
        assert fids[-1] == pytest.approx(1.0, abs=1e-12)

    def test_approx_bound_for(self):
        assert approx_bound_for(16, 1 / 16) == 8
        assert approx_bound_for(1, 1.0) == 1

    def test_golden_gate_list(self):
        text = format_gates(qft_gates(3))
        assert text == "\n".join([
            "H q0",
            "CR d=1 ctrl=q1 tgt=q0",
            "CR d=2 ctrl=q2 tgt=q0",
            "H q1",
            "CR d=1 ctrl=q2 tgt=q1",
            "H q2",
            "SWAP q0 q2",
        ])

    def test_gate_counts(self):
        n = 12
        gates = qft_gates(n)
        assert sum(g.name == "H" for g in gates) == n
        assert sum(g.name == "CR" for g in gates) == n * (n - 1) // 2
        approx = qft_gates(n, approx_bound=3)
        assert all(g.d <= 3 for g in approx if g.name == "CR")

    def test_inverse_list(self):
        fwd = qft_gates(4)
        inv = qft_gates(4, inverse=True)
        assert [str(g) for g in inv][-1] == "H q0"
        assert all(g.sign == -1 for g in inv)
        assert len(inv) == len(fwd)

    def test_unknown_gate(self):
        with pytest.raises(ValueError):
            circuits.run_gates(new_register(2), [Gate("T", 0)])


class TestGrover:
    def test_n2_one_iteration_exact(self):
        for k in range(4):
            s = grover_register(2)
            grover_iteration(s, k)
            assert target_amplitude(s, k).real == pytest.approx(1.0, abs=1e-14)

    def test_n10_sine_curve(self):
        n, k = 10, 357
        theta = math.asin(2 ** -5)
        s = grover_register(n)
        for j in range(1, 81):
            grover_iteration(s, k)
            assert target_amplitude(s, k).real == pytest.approx(math.sin((2 * j + 1) * theta), abs=1e-10)

    def test_ancilla_matches_phase_flip(self):
        n, k = 6, 41
        a = grover_register(n)
        b = grover_register(n, use_ancilla=True)
        minus = np.array([1, -1]) / math.sqrt(2)
        for _ in range(5):
            grover_iteration(a, k)
            grover_iteration(b, k, use_ancilla=True)
            np.testing.assert_allclose(b.amps, np.kron(a.amps, minus), atol=1e-12)
            assert target_amplitude(b, k, True) == pytest.approx(target_amplitude(a, k), abs=1e-12)

    def test_auto_iterations(self, rng):
        r2 = grover_search(2, 3, rng=rng)
        assert r2.iterations == 1 and r2.success_probability == pytest.approx(1.0)
        assert r2.value == 3
        r10 = grover_search(10, 500, rng=rng, use_ancilla=True)
        assert r10.iterations == 25
        assert r10.success_probability >= 0.99

    def test_target_range(self):
        with pytest.raises(ValueError):
            grover_iteration(grover_register(3), 8)


class TestModExp:
    def test_table(self):
        t = modexp_table(7, 15, 8)
        assert t[2] == 4
        t = modexp_table(11, 15, 8)
        assert set(t[::2]) == {1} and set(t[1::2]) == {11}
        a = np.arange(1 << 10)
        np.testing.assert_array_equal(modexp_table(5, 33, 10), [pow(5, int(v), 33) for v in a])

    def test_operator_example(self):
        spec = ModExpSpec(7, 15)
        perm = modexp_operator(spec)
        l = spec.l
        s = StateVector.basis(3 * l, 2)  # |0>|2>
        kernels.apply_permutation(s, perm)
        assert np.flatnonzero(s.amps).tolist() == [(4 << 2 * l) | 2]

    @pytest.mark.parametrize("x, N", [(2, 3), (2, 5), (4, 9), (5, 21), (7, 33), (10, 63)])
    def test_bijection(self, x, N):
        perm = modexp_operator(ModExpSpec(x, N))
        assert np.array_equal(np.sort(perm), np.arange(perm.size))

    def test_invalid(self):
        with pytest.raises(ValueError):
            ModExpSpec(3, 15)
        with pytest.raises(ValueError):
            ModExpSpec(2, 16)

    def test_budget(self):
        assert modexp_qubit_budget(4) == 26
        assert modexp_qubit_budget(5) == 31
