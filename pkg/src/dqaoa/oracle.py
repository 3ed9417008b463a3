"""Reference solvers and the benchmark harness.

Brute force is the ground truth for n <= 24; above that a high-budget
simulated annealer stands in as the reference, and every record carries
a label saying which one produced its reference energy.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CapacityError, UndefinedRatioError
from .qubo import QuboMatrix, all_energies, bits_from_index, gen_gaussian_qubo

BRUTE_FORCE_CAP = 24


def brute_force(Q: QuboMatrix) -> tuple[np.ndarray, float]:
    """Exact global minimum by exhaustive enumeration (n <= 24).

    Ties are broken toward the lowest binary index.
    """
    if Q.n > BRUTE_FORCE_CAP:
        raise CapacityError(
            f"brute force is capped at n={BRUTE_FORCE_CAP} (2^{Q.n} states requested)"
        )
    energies = all_energies(Q)
    best = int(np.argmin(energies))  # argmin returns the first (lowest) index on ties
    return bits_from_index(best, Q.n), float(energies[best])


@dataclass(frozen=True)
class SaConfig:
    """Simulated-annealing settings: geometric schedule, best-of-restarts."""

    sweeps: int = 2000
    t_hot: float = 2.0
    t_cold: float = 0.01
    restarts: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.t_hot <= 0 or self.t_cold <= 0 or self.t_cold > self.t_hot:
            raise ValueError("need 0 < t_cold <= t_hot")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


def simulated_annealing(Q: QuboMatrix, cfg: SaConfig = SaConfig()) -> tuple[np.ndarray, float]:
    """Single-flip Metropolis on a geometric temperature schedule.

    Each restart draws its own seeded start; the best state seen across
    all restarts is returned. Restart seed streams are prefix-stable, so
    raising ``restarts`` never worsens the result for a fixed seed.
    """
    n = Q.n
    q = Q.q
    diag = np.diag(q).copy()
    sym = q + q.T  # field h = sym @ x gives O(1) flip deltas
    sym_diag = np.diag(sym).copy()
    if cfg.sweeps > 1:
        temps = cfg.t_hot * (cfg.t_cold / cfg.t_hot) ** (np.arange(cfg.sweeps) / (cfg.sweeps - 1))
    else:
        temps = np.array([cfg.t_hot])

    best_bits = np.zeros(n, dtype=np.int8)
    best_e = float(np.inf)
    for r in range(cfg.restarts):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed & 0xFFFFFFFF, r]))
        x = rng.integers(0, 2, size=n).astype(np.float64)
        h = sym @ x
        e = float(x @ q @ x)
        run_best_e = e
        run_best = x.copy()
        # pre-draw per-sweep randomness to keep the inner loop tight
        for t in temps:
            order = rng.permutation(n)
            accept_u = rng.random(n)
            for step, i in enumerate(order):
                xi = x[i]
                delta = (1.0 - 2.0 * xi) * (diag[i] + h[i] - sym_diag[i] * xi)
                if delta < 0.0 or accept_u[step] < np.exp(-delta / t):
                    nv = 1.0 - xi
                    x[i] = nv
                    h += sym[:, i] * (nv - xi)
                    e += delta
                    if e < run_best_e:
                        run_best_e = e
                        run_best = x.copy()
        if run_best_e < best_e:
            best_e = run_best_e
            best_bits = run_best.astype(np.int8)
    # report the exact energy of the returned bits, not the accumulated one
    xb = best_bits.astype(np.float64)
    return best_bits, float(xb @ q @ xb)


def approximation_ratio(e_alg: float, e_ref: float) -> float:
    """Ratio of algorithm energy to reference energy."""
    if e_ref == 0.0:
        raise UndefinedRatioError("reference energy is zero; ratio undefined")
    return e_alg / e_ref


@dataclass
class BenchmarkRecord:
    """One (size, mode, seed) benchmark row."""

    n: int
    mode: str
    seed: int
    ratio: float | None
    reference: str  # "brute" | "sa"
    energy_alg: float
    energy_ref: float
    time_s: float
    sub_solves: int
    flagged: bool = False  # algorithm beat the reference; reference is suspect
    error: str | None = None

    CSV_FIELDS = ("n", "mode", "seed", "ratio", "reference", "energy_alg",
                  "energy_ref", "time_s", "sub_solves")

    def csv_row(self) -> list:
        return [getattr(self, f) for f in self.CSV_FIELDS]


@dataclass(frozen=True)
class BenchmarkConfig:
    """Sweep definition for the benchmark suite."""

    sizes: tuple[int, ...]
    modes: tuple[str, ...] = ("dqaoa",)
    seeds_per_size: int = 3
    base_seed: int = 0
    solver: "SolverConfig | None" = None  # shared overrides; mode/seed set per row
    sa_reference: SaConfig = field(default_factory=SaConfig)

    def __post_init__(self):
        if not self.sizes:
            raise ValueError("sizes must be non-empty")
        if not self.modes:
            raise ValueError("modes must be non-empty")
        if self.seeds_per_size < 1:
            raise ValueError("seeds_per_size must be >= 1")


def benchmark_suite(cfg: BenchmarkConfig) -> list[BenchmarkRecord]:
    """Run every (size, mode, seed) cell and measure ratio + wall time.

    The reference is brute force for n <= 24 and simulated annealing
    above. Failures are recorded per row and the sweep continues.
    """
    from dataclasses import replace as _replace

    from .engine import SolverConfig, run_mode

    base = cfg.solver if cfg.solver is not None else SolverConfig()
    records: list[BenchmarkRecord] = []
    for n in cfg.sizes:
        ref_kind = "brute" if n <= BRUTE_FORCE_CAP else "sa"
        for seed_i in range(cfg.seeds_per_size):
            seed = cfg.base_seed + seed_i
            Q = gen_gaussian_qubo(n, seed=seed * 10_007 + n)
            if ref_kind == "brute":
                _, e_ref = brute_force(Q)
            else:
                _, e_ref = simulated_annealing(
                    Q, _replace(cfg.sa_reference, seed=seed * 7919 + n)
                )
            for mode in cfg.modes:
                solver_cfg = _replace(base, mode=mode, seed=seed)
                t0 = time.perf_counter()
                try:
                    report = run_mode(Q, solver_cfg)
                except Exception as exc:
                    records.append(BenchmarkRecord(
                        n=n, mode=mode, seed=seed, ratio=None, reference=ref_kind,
                        energy_alg=float("nan"), energy_ref=e_ref,
                        time_s=time.perf_counter() - t0, sub_solves=0,
                        error=f"{type(exc).__name__}: {exc}",
                    ))
                    continue
                try:
                    ratio = approximation_ratio(report.best_energy, e_ref)
                except UndefinedRatioError:
                    ratio = None
                records.append(BenchmarkRecord(
                    n=n, mode=mode, seed=seed, ratio=ratio, reference=ref_kind,
                    energy_alg=report.best_energy, energy_ref=e_ref,
                    time_s=report.wall_time, sub_solves=report.sub_solves,
                    flagged=ratio is not None and ratio > 1.0,
                ))
    return records


def write_benchmark_csv(records: list[BenchmarkRecord], path) -> None:
    """Plot-ready CSV, one row per successful record."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BenchmarkRecord.CSV_FIELDS)
        for rec in records:
            if rec.error is None:
                writer.writerow(rec.csv_row())


def write_benchmark_json(records: list[BenchmarkRecord], cfg: BenchmarkConfig, path) -> None:
    """JSON mirror of the CSV plus the sweep configuration."""
    payload = {
        "config": {
            "sizes": list(cfg.sizes),
            "modes": list(cfg.modes),
            "seeds_per_size": cfg.seeds_per_size,
            "base_seed": cfg.base_seed,
            "solver": cfg.solver.config_echo() if cfg.solver is not None else None,
            "sa_reference": cfg.sa_reference.__dict__,
        },
        "records": [rec.__dict__ for rec in records],
    }
    Path(path).write_text(json.dumps(payload, indent=2))
