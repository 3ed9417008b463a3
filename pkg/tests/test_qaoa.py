"""Tests for the statevector QAOA simulator."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dqaoa.errors import CapacityError
from dqaoa.qaoa import (
    QaoaConfig,
    QaoaParams,
    apply_cost_phase,
    apply_mixer,
    cost_diagonal,
    expectation,
    optimize_params,
    qaoa_ansatz,
    qaoa_solve,
    sample_solution,
    uniform_state,
)
from dqaoa.qubo import QuboMatrix, bits_from_index, energy, gen_gaussian_qubo
from dqaoa.oracle import brute_force


def random_state(rng, k):
    v = rng.normal(size=1 << k) + 1j * rng.normal(size=1 << k)
    return v / np.linalg.norm(v)


def single_qubit_prob1(gamma, beta):
    """Closed-form P(|1>) of the one-layer ansatz on Q = [[-1]].

    Derived by multiplying the 2x2 phase and mixer matrices applied to
    |+>: P1 = (1 - sin(2 beta) sin(gamma)) / 2.
    """
    return (1.0 - np.sin(2.0 * beta) * np.sin(gamma)) / 2.0


class TestCostDiagonal:
    def test_single_negative_variable(self):
        diag = cost_diagonal(QuboMatrix(np.array([[-1.0]])))
        assert np.array_equal(diag, [0.0, -1.0])

    def test_zero_matrix(self):
        diag = cost_diagonal(QuboMatrix(np.zeros((2, 2))))
        assert np.array_equal(diag, np.zeros(4))

    def test_matches_energy_exhaustively(self):
        Q = gen_gaussian_qubo(4, seed=10)
        diag = cost_diagonal(Q)
        for b in range(16):
            assert diag[b] == pytest.approx(energy(Q, bits_from_index(b, 4)), rel=1e-12)

    def test_capacity_error(self):
        Q = gen_gaussian_qubo(5, seed=1)
        with pytest.raises(CapacityError):
            cost_diagonal(Q, max_qubits=4)


class TestGates:
    def test_phase_gamma_zero_is_identity(self):
        state = uniform_state(3)
        diag = cost_diagonal(gen_gaussian_qubo(3, seed=1))
        assert np.allclose(apply_cost_phase(state, diag, 0.0), state)

    def test_phase_constant_diag_is_global_phase(self):
        rng = np.random.default_rng(2)
        state = random_state(rng, 3)
        diag = np.full(8, 1.7)
        out = apply_cost_phase(state, diag, 0.9)
        assert np.allclose(np.abs(out) ** 2, np.abs(state) ** 2)

    def test_phase_single_qubit_example(self):
        state = uniform_state(1)
        out = apply_cost_phase(state, np.array([0.0, -1.0]), np.pi / 2)
        # relative phase only: amplitudes (1, i)/sqrt(2) up to global phase
        target = np.array([1.0, 1.0j]) / np.sqrt(2)
        phase = out[0] / target[0]
        assert np.allclose(out, phase * target)

    def test_phase_length_mismatch(self):
        with pytest.raises(ValueError):
            apply_cost_phase(uniform_state(2), np.zeros(2), 0.1)

    def test_mixer_beta_zero_is_identity(self):
        rng = np.random.default_rng(3)
        state = random_state(rng, 4)
        assert np.allclose(apply_mixer(state, 0.0), state)

    def test_mixer_half_pi_flips_all(self):
        k = 3
        state = np.zeros(1 << k, dtype=complex)
        state[0] = 1.0
        out = apply_mixer(state, np.pi / 2)
        probs = np.abs(out) ** 2
        assert probs[-1] == pytest.approx(1.0, abs=1e-12)

    def test_mixer_norm_preserved(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            k = int(rng.integers(1, 6))
            state = random_state(rng, k)
            out = apply_mixer(state, float(rng.uniform(-np.pi, np.pi)))
            assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)

    def test_mixer_matches_explicit_2x2(self):
        # one qubit: compare against the literal matrix product
        rng = np.random.default_rng(5)
        state = random_state(rng, 1)
        beta = 0.77
        m = np.array([[np.cos(beta), -1j * np.sin(beta)],
                      [-1j * np.sin(beta), np.cos(beta)]])
        assert np.allclose(apply_mixer(state, beta), m @ state)


class TestExpectation:
    def test_uniform_is_mean(self):
        diag = np.array([0.0, 1.0, 2.0, 3.0])
        assert expectation(uniform_state(2), diag) == pytest.approx(1.5)

    def test_basis_state(self):
        state = np.zeros(8, dtype=complex)
        state[5] = 1.0
        diag = np.arange(8, dtype=float)
        assert expectation(state, diag) == pytest.approx(5.0)

    def test_matches_dot_product_oracle(self):
        rng = np.random.default_rng(6)
        state = random_state(rng, 3)
        diag = rng.normal(size=8)
        oracle = float(np.real(np.conj(state) @ (diag * state)))
        assert expectation(state, diag) == pytest.approx(oracle, rel=1e-12)

    @settings(deadline=None, max_examples=50)
    @given(st.integers(0, 2**32 - 1))
    def test_bounded_by_diag_range(self, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 5))
        state = random_state(rng, k)
        diag = rng.normal(size=1 << k)
        val = expectation(state, diag)
        assert diag.min() - 1e-12 <= val <= diag.max() + 1e-12


class TestAnsatz:
    def test_zero_angles_give_uniform(self):
        Q = gen_gaussian_qubo(4, seed=7)
        params = QaoaParams(betas=[0.0], gammas=[0.0])
        assert np.allclose(qaoa_ansatz(Q, params), uniform_state(4))

    def test_norm_one(self):
        Q = gen_gaussian_qubo(3, seed=8)
        rng = np.random.default_rng(9)
        for _ in range(20):
            params = QaoaParams(betas=rng.uniform(0, np.pi, 2),
                                gammas=rng.uniform(0, np.pi, 2))
            state = qaoa_ansatz(Q, params)
            assert np.linalg.norm(state) == pytest.approx(1.0, abs=1e-10)

    def test_single_qubit_closed_form(self):
        Q = QuboMatrix(np.array([[-1.0]]))
        rng = np.random.default_rng(10)
        for _ in range(25):
            gamma = float(rng.uniform(0, np.pi))
            beta = float(rng.uniform(0, np.pi))
            state = qaoa_ansatz(Q, QaoaParams(betas=[beta], gammas=[gamma]))
            assert np.abs(state[1]) ** 2 == pytest.approx(
                single_qubit_prob1(gamma, beta), abs=1e-12
            )

    def test_single_qubit_perfect_point(self):
        # ground state |1> reached exactly at (gamma, beta) = (pi/2, 3pi/4)
        Q = QuboMatrix(np.array([[-1.0]]))
        state = qaoa_ansatz(Q, QaoaParams(betas=[3 * np.pi / 4], gammas=[np.pi / 2]))
        assert np.abs(state[1]) ** 2 == pytest.approx(1.0, abs=1e-9)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            QaoaParams(betas=[0.1, 0.2], gammas=[0.1])


class TestOptimizeParams:
    def test_zero_matrix_gives_zero(self):
        Q = QuboMatrix(np.zeros((2, 2)))
        _, best = optimize_params(Q, budget=50, seed=1)
        assert best == pytest.approx(0.0, abs=1e-12)

    def test_single_qubit_reaches_optimum(self):
        Q = QuboMatrix(np.array([[-1.0]]))
        _, best = optimize_params(Q, layers=1, budget=200, seed=3)
        assert best <= -0.95

    def test_grid_oracle_agrees(self):
        # dense grid search over [0, pi)^2 as the independent optimum check
        gammas = np.linspace(0, np.pi, 50, endpoint=False)
        betas = np.linspace(0, np.pi, 50, endpoint=False)
        grid_best = min(
            -single_qubit_prob1(g, b) for g in gammas for b in betas
        )
        Q = QuboMatrix(np.array([[-1.0]]))
        _, best = optimize_params(Q, layers=1, budget=200, seed=3)
        assert best <= grid_best + 0.01

    def test_never_worse_than_start(self):
        Q = gen_gaussian_qubo(3, seed=12)
        for seed in range(5):
            rng = np.random.default_rng(seed)
            theta0 = rng.uniform(0.0, np.pi, size=2)
            params0 = QaoaParams(betas=theta0[:1], gammas=theta0[1:])
            diag = cost_diagonal(Q)
            f0 = expectation(qaoa_ansatz(Q, params0, diag=diag), diag)
            _, best = optimize_params(Q, layers=1, budget=120, seed=seed)
            assert best <= f0 + 1e-12


class TestSampleSolution:
    def test_basis_state_always_returned(self):
        state = np.zeros(8, dtype=complex)
        state[6] = 1.0
        diag = np.arange(8, dtype=float)
        bits, value = sample_solution(state, diag, shots=16, seed=0)
        assert list(bits) == [0, 1, 1]
        assert value == 6.0

    def test_uniform_finds_best_with_enough_shots(self):
        # P(miss index 3 in 1024 shots) = (3/4)^1024, effectively zero
        diag = np.array([0.0, -1.0, -2.0, -3.0])
        bits, value = sample_solution(uniform_state(2), diag, shots=1024, seed=5)
        assert list(bits) == [1, 1]
        assert value == -3.0

    def test_deterministic(self):
        rng = np.random.default_rng(13)
        state = random_state(rng, 3)
        diag = rng.normal(size=8)
        a = sample_solution(state, diag, shots=64, seed=21)
        b = sample_solution(state, diag, shots=64, seed=21)
        assert np.array_equal(a[0], b[0]) and a[1] == b[1]


class TestQaoaSolve:
    def test_single_variable(self):
        bits, value = qaoa_solve(QuboMatrix(np.array([[-1.0]])), QaoaConfig(seed=1))
        assert list(bits) == [1]
        assert value == pytest.approx(-1.0)

    def test_zero_matrix(self):
        bits, value = qaoa_solve(QuboMatrix(np.zeros((3, 3))), QaoaConfig(seed=2))
        assert value == 0.0

    def test_energy_consistency_and_quality(self):
        hits = 0
        for seed in range(100):
            Q = gen_gaussian_qubo(4, seed=2000 + seed)
            bits, value = qaoa_solve(Q, QaoaConfig(budget=300, shots=1024, seed=seed))
            assert value == pytest.approx(energy(Q, bits), rel=1e-12, abs=1e-12)
            _, e_min = brute_force(Q)
            assert value >= e_min - 1e-12
            if value == pytest.approx(e_min, rel=1e-12, abs=1e-12):
                hits += 1
        assert hits >= 90

    def test_capacity_error_propagates(self):
        Q = gen_gaussian_qubo(6, seed=3)
        with pytest.raises(CapacityError):
            qaoa_solve(Q, QaoaConfig(max_qubits=5))
