"""Exact statevector QAOA for small QUBOs.

The cost Hamiltonian is diagonal in the computational basis, so instead
of building Pauli circuits we precompute the vector of QUBO energies of
all basis states and apply cost layers as elementwise phases. The mixer
``sum_i sigma^x_i`` is applied qubit by qubit as the 2x2 rotation

    exp(-i beta sigma^x) = [[cos b, -i sin b], [-i sin b, cos b]].

Bit order is little-endian throughout: bit i of a basis index is
variable i. Everything is deterministic given the inputs and a seed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .errors import CapacityError
from .qubo import QuboMatrix, all_energies, bits_from_index

DEFAULT_MAX_QUBITS = 20


@dataclass(frozen=True)
class QaoaParams:
    """Variational angles, one (beta, gamma) pair per layer."""

    betas: np.ndarray
    gammas: np.ndarray

    def __post_init__(self):
        betas = np.atleast_1d(np.asarray(self.betas, dtype=np.float64))
        gammas = np.atleast_1d(np.asarray(self.gammas, dtype=np.float64))
        if betas.shape != gammas.shape or betas.ndim != 1 or betas.size < 1:
            raise ValueError("betas and gammas must be 1-d arrays of equal length >= 1")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "gammas", gammas)

    @property
    def layers(self) -> int:
        return self.betas.size


@dataclass(frozen=True)
class QaoaConfig:
    """Settings for one sub-QUBO solve."""

    layers: int = 1
    budget: int = 300       # objective evaluation cap for the optimizer
    shots: int = 1024
    seed: int = 0
    n_starts: int = 1
    max_qubits: int = DEFAULT_MAX_QUBITS

    def __post_init__(self):
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")

    def with_seed(self, seed: int) -> "QaoaConfig":
        return replace(self, seed=int(seed))


def _check_cap(k: int, max_qubits: int) -> None:
    if k > max_qubits:
        raise CapacityError(
            f"sub-QUBO with {k} variables exceeds the {max_qubits}-qubit "
            f"statevector cap (2^{k} amplitudes)"
        )


def cost_diagonal(subq: QuboMatrix, max_qubits: int = DEFAULT_MAX_QUBITS) -> np.ndarray:
    """Vector of QUBO energies of all 2^k basis states (the cost diagonal)."""
    _check_cap(subq.n, max_qubits)
    return all_energies(subq)


def uniform_state(k: int) -> np.ndarray:
    """|+>^k, the uniform superposition over 2^k basis states."""
    dim = 1 << k
    return np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128)


def apply_cost_phase(state: np.ndarray, diag: np.ndarray, gamma: float) -> np.ndarray:
    """Apply exp(-i * gamma * H_C) with H_C the given diagonal."""
    if state.shape != diag.shape:
        raise ValueError("state and diagonal lengths differ")
    return state * np.exp(-1j * gamma * diag)


def apply_mixer(state: np.ndarray, beta: float) -> np.ndarray:
    """Apply exp(-i * beta * sigma^x) to every qubit."""
    k = int(np.log2(state.size))
    if 1 << k != state.size:
        raise ValueError("state length must be a power of two")
    c = np.cos(beta)
    s = -1j * np.sin(beta)
    out = state
    for i in range(k):
        v = out.reshape(-1, 2, 1 << i)
        lo, hi = v[:, 0, :], v[:, 1, :]
        out = np.empty_like(v)
        out[:, 0, :] = c * lo + s * hi
        out[:, 1, :] = s * lo + c * hi
        out = out.reshape(state.size)
    return out


def expectation(state: np.ndarray, diag: np.ndarray) -> float:
    """<state| H_C |state> for a diagonal cost Hamiltonian."""
    if state.shape != diag.shape:
        raise ValueError("state and diagonal lengths differ")
    probs = (state.real * state.real) + (state.imag * state.imag)
    return float(probs @ diag)


def qaoa_ansatz(
    subq: QuboMatrix,
    params: QaoaParams,
    diag: np.ndarray | None = None,
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> np.ndarray:
    """Prepare the layered ansatz state: |+>^k, then per layer cost phase
    followed by mixer."""
    if diag is None:
        diag = cost_diagonal(subq, max_qubits)
    state = uniform_state(subq.n)
    for beta, gamma in zip(params.betas, params.gammas):
        state = apply_cost_phase(state, diag, gamma)
        state = apply_mixer(state, beta)
    return state


def optimize_params(
    subq: QuboMatrix,
    layers: int = 1,
    budget: int = 300,
    seed: int = 0,
    n_starts: int = 1,
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> tuple[QaoaParams, float]:
    """Minimize the ansatz expectation with Nelder-Mead.

    Starts from seeded uniform draws in [0, pi)^(2*layers); with
    ``n_starts > 1`` the evaluation budget is split across restarts and
    the best result wins. The returned expectation never exceeds the
    value at the first start point.
    """
    diag = cost_diagonal(subq, max_qubits)
    rng = np.random.default_rng(seed)

    def objective(theta: np.ndarray) -> float:
        params = QaoaParams(betas=theta[:layers], gammas=theta[layers:])
        return expectation(qaoa_ansatz(subq, params, diag=diag), diag)

    best_theta = None
    best_f = np.inf
    per_start = max(1, budget // n_starts)
    for _ in range(n_starts):
        theta0 = rng.uniform(0.0, np.pi, size=2 * layers)
        with warnings.catch_warnings():
            # budget exhaustion is expected behaviour, not a failure
            warnings.simplefilter("ignore", RuntimeWarning)
            res = minimize(
                objective,
                theta0,
                method="Nelder-Mead",
                options={"maxfev": per_start, "xatol": 1e-6, "fatol": 1e-10},
            )
        if res.fun < best_f:
            best_f = float(res.fun)
            best_theta = np.asarray(res.x)
    params = QaoaParams(betas=best_theta[:layers], gammas=best_theta[layers:])
    return params, best_f


def sample_solution(
    state: np.ndarray, diag: np.ndarray, shots: int = 1024, seed: int = 0
) -> tuple[np.ndarray, float]:
    """Draw basis states from |amplitude|^2 and keep the lowest-cost one.

    Returns the best sampled bitstring and its cost diagonal value.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if state.shape != diag.shape:
        raise ValueError("state and diagonal lengths differ")
    probs = (state.real * state.real) + (state.imag * state.imag)
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    sampled = rng.choice(probs.size, size=shots, p=probs)
    sampled = np.unique(sampled)
    best_idx = int(sampled[np.argmin(diag[sampled])])
    k = int(np.log2(probs.size))
    return bits_from_index(best_idx, k), float(diag[best_idx])


def qaoa_solve(subq: QuboMatrix, cfg: QaoaConfig) -> tuple[np.ndarray, float]:
    """End-to-end sub-QUBO solve: optimize angles, prepare the state, sample.

    The returned energy equals the QUBO energy of the returned bits.
    """
    diag = cost_diagonal(subq, cfg.max_qubits)
    params, _ = optimize_params(
        subq,
        layers=cfg.layers,
        budget=cfg.budget,
        seed=cfg.seed,
        n_starts=cfg.n_starts,
        max_qubits=cfg.max_qubits,
    )
    state = qaoa_ansatz(subq, params, diag=diag, max_qubits=cfg.max_qubits)
    return sample_solution(state, diag, shots=cfg.shots, seed=cfg.seed)
