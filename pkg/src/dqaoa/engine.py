"""Decomposed QUBO solving with a worker pool.

The driver alternates two phases:

* Initialization walks n-k+1 sliding windows over the variables in
  index order. The first window's sub-solution assigns variables
  0..k-1; each later window re-solves with everything already assigned
  clamped and contributes only its newly introduced variable. Every
  variable is assigned exactly once.

* Iteration draws p random k-subsets, clamps each against a snapshot of
  the global assignment taken at the start of the iteration, solves the
  p sub-QUBOs on the pool, and folds the sub-solutions back one variable
  at a time, accepting a flip only when it strictly lowers the global
  energy. The energy trace is therefore exactly non-increasing.

Three modes share this machinery: the full distributed solver
("dqaoa"), its single-worker degenerate form ("dq_qaoa", p forced to
1), and a one-shot divide-and-conquer baseline ("dc_baseline") that
partitions the variables into contiguous blocks, drops all cross-block
couplings, and never iterates.

Workers only ever see read-only tasks; the orchestrator owns the global
assignment and aggregates results in task order, so runs are
reproducible for a fixed seed regardless of pool size.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import SolverError
from .qaoa import QaoaConfig, qaoa_solve
from .qubo import (
    QuboMatrix,
    SubProblem,
    check_bits,
    energy,
    energy_delta_flip,
    extract_sub_qubo,
)

MODES = ("dqaoa", "dq_qaoa", "dc_baseline")

# seed-derivation tags, one per independent random stream
_TAG_INIT = 1
_TAG_SUBSET = 2
_TAG_SOLVE = 3
_TAG_DC = 4


def derive_seed(*parts: int) -> int:
    """Collision-resistant child seed from integer parts (stable across runs)."""
    ss = np.random.SeedSequence([int(p) & 0xFFFFFFFF for p in parts])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class WorkerPool:
    """Ordered task fan-out over processes; size 1 runs inline.

    Results always come back in task order, so the aggregation sequence
    is independent of completion timing.
    """

    def __init__(self, workers: int | None = None):
        self.workers = int(workers) if workers else (os.cpu_count() or 1)
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        self._executor = None

    def __enter__(self) -> "WorkerPool":
        if self.workers > 1:
            self._executor = ProcessPoolExecutor(max_workers=self.workers)
        return self

    def __exit__(self, *exc) -> None:
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None

    def map(self, fn: Callable, tasks: Sequence) -> list:
        if self._executor is None:
            return [fn(t) for t in tasks]
        chunksize = max(1, len(tasks) // (4 * self.workers))
        return list(self._executor.map(fn, tasks, chunksize=chunksize))


@dataclass(frozen=True)
class SolverConfig:
    """Configuration for one decomposed solve.

    ``p`` is the number of sub-QUBOs per iteration (worker slots), ``k``
    the sub-QUBO size. ``iterations`` and ``p`` default per mode:
    dqaoa -> (30, n), dq_qaoa -> (300, 1). ``sub_solver`` selects the
    sub-QUBO backend: "qaoa", "brute", or a callable
    ``(QuboMatrix, seed) -> (bits, energy)``.
    """

    mode: str = "dqaoa"
    k: int = 4
    iterations: int | None = None
    p: int | None = None
    seed: int = 0
    qaoa: QaoaConfig = field(default_factory=QaoaConfig)
    sub_solver: str | Callable = "qaoa"
    workers: int = 1
    k_sweep: tuple[int, ...] | None = None  # dc_baseline only

    def normalized(self, n: int) -> tuple["SolverConfig", list[str]]:
        """Resolve defaults against a problem size; returns (config, warnings)."""
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}, expected one of {MODES}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.mode != "dc_baseline" and self.k > n:
            raise ValueError(f"k={self.k} exceeds problem size n={n}")
        warnings: list[str] = []
        iterations = self.iterations
        p = self.p
        if self.mode == "dqaoa":
            iterations = 30 if iterations is None else iterations
            p = n if p is None else p
        elif self.mode == "dq_qaoa":
            iterations = 300 if iterations is None else iterations
            if p is not None and p != 1:
                warnings.append(f"dq_qaoa uses a single sub-QUBO per iteration; p={p} forced to 1")
            p = 1
        else:
            iterations = 0 if iterations is None else iterations
            p = 1 if p is None else p
        if iterations < 0:
            raise ValueError("iterations must be >= 0")
        if p < 1:
            raise ValueError("p must be >= 1")
        return replace(self, iterations=iterations, p=p), warnings

    def config_echo(self) -> dict:
        d = asdict(self)
        d["sub_solver"] = self.sub_solver if isinstance(self.sub_solver, str) else getattr(
            self.sub_solver, "__name__", "custom"
        )
        return d


@dataclass
class SolveReport:
    """Outcome of a decomposed solve, with its per-iteration trace."""

    mode: str
    n: int
    best_x: np.ndarray
    best_energy: float
    energy_trace: list[float]
    trace_times: list[float]
    wall_time: float
    sub_solves: int
    failed_sub_solves: int
    warnings: list[str]
    config: dict

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["best_x"] = [int(b) for b in self.best_x]
        return d

    def write_trace_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("iteration,best_energy\n")
            for i, e in enumerate(self.energy_trace):
                fh.write(f"{i},{e!r}\n")


@dataclass(frozen=True)
class _SubSolveTask:
    q: np.ndarray
    qaoa: QaoaConfig
    solver: str | Callable
    seed: int


def _run_sub_solve(task: _SubSolveTask) -> tuple[np.ndarray, float]:
    sub = QuboMatrix(task.q)
    if callable(task.solver):
        bits, e = task.solver(sub, task.seed)
        return check_bits(bits, sub.n), float(e)
    if task.solver == "qaoa":
        return qaoa_solve(sub, task.qaoa.with_seed(task.seed))
    if task.solver == "brute":
        from .oracle import brute_force

        return brute_force(sub)
    raise ValueError(f"unknown sub_solver {task.solver!r}")


def _safe_sub_solve(task: _SubSolveTask):
    try:
        return ("ok",) + _run_sub_solve(task)
    except Exception as exc:  # reported back to the orchestrator for retry
        return ("err", f"{type(exc).__name__}: {exc}")


def init_windows(n: int, k: int) -> list[np.ndarray]:
    """The n-k+1 contiguous index windows [j, j+k), in order."""
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    if k < 1:
        raise ValueError("k must be >= 1")
    return [np.arange(j, j + k, dtype=np.intp) for j in range(n - k + 1)]


def random_subset(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random sorted k-subset of 0..n-1, without replacement."""
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    return np.sort(rng.choice(n, size=k, replace=False)).astype(np.intp)


class _Orchestrator:
    """Tracks the running assignment, energy, and solve bookkeeping."""

    def __init__(self, Q: QuboMatrix, cfg: SolverConfig, pool: WorkerPool):
        self.Q = Q
        self.cfg = cfg
        self.pool = pool
        self.sub_solves = 0
        self.failed = 0
        self.warnings: list[str] = []

    def solve_batch(self, tasks: list[_SubSolveTask]) -> list[tuple[np.ndarray, float] | None]:
        """Solve tasks on the pool; retry each failure once, then skip it."""
        raw = self.pool.map(_safe_sub_solve, tasks)
        out: list[tuple[np.ndarray, float] | None] = []
        for task, res in zip(tasks, raw):
            if res[0] == "ok":
                out.append((res[1], res[2]))
                self.sub_solves += 1
                continue
            retry = _safe_sub_solve(task)
            if retry[0] == "ok":
                out.append((retry[1], retry[2]))
                self.sub_solves += 2
            else:
                out.append(None)
                self.sub_solves += 2
                self.failed += 1
                self.warnings.append(f"sub-solve failed twice and was skipped: {retry[1]}")
        return out

    def solve_one(self, sub: QuboMatrix, seed: int) -> tuple[np.ndarray, float]:
        res = self.solve_batch([_SubSolveTask(sub.q, self.cfg.qaoa, self.cfg.sub_solver, seed)])[0]
        if res is None:
            raise SolverError("sub-solve failed twice during initialization")
        return res


def _aggregate_inplace(
    Q: QuboMatrix, x: np.ndarray, indices: np.ndarray, s: np.ndarray, e: float
) -> float:
    """Adopt sub-solution bits that strictly reduce the global energy.

    Mutates ``x``; returns the updated running energy. Ties (delta == 0)
    keep the current value.
    """
    for a, i in enumerate(indices):
        if s[a] != x[i]:
            delta = energy_delta_flip(Q, x, int(i))
            if delta < 0:
                x[i] = s[a]
                e += delta
    return e


def aggregate(Q: QuboMatrix, x_g, sub: SubProblem, s) -> np.ndarray:
    """Fold one sub-solution into a global assignment, variable by variable.

    Each differing bit is adopted only if flipping it strictly lowers
    the global energy, so the result never has higher energy than the
    input assignment.
    """
    x = check_bits(x_g, Q.n).copy()
    bits = check_bits(s, sub.k)
    _aggregate_inplace(Q, x, sub.indices, bits, 0.0)
    return x


def _initialize(orch: _Orchestrator) -> np.ndarray:
    Q, cfg = orch.Q, orch.cfg
    n, k = Q.n, cfg.k
    x = np.zeros(n, dtype=np.int8)
    for j, window in enumerate(init_windows(n, k)):
        sub = extract_sub_qubo(Q, window, x)
        bits, _ = orch.solve_one(sub.subq, derive_seed(cfg.seed, _TAG_INIT, j))
        if j == 0:
            x[window] = bits
        else:
            x[j + k - 1] = bits[-1]
    return x


def initialize_global(Q: QuboMatrix, cfg: SolverConfig, pool: WorkerPool) -> np.ndarray:
    """Assign every variable once by solving the sliding windows in order.

    Window j is clamped against the partial assignment (unassigned
    variables outside the window count as 0); window 0 assigns its k
    variables, every later window only its newly introduced one. The
    dependency chain makes this phase inherently sequential.
    """
    cfg, _ = cfg.normalized(Q.n)
    return _initialize(_Orchestrator(Q, cfg, pool))


def _iterate(orch: _Orchestrator, x: np.ndarray, e: float, trace, times, t0) -> float:
    Q, cfg = orch.Q, orch.cfg
    n = Q.n
    subset_rng = np.random.default_rng(derive_seed(cfg.seed, _TAG_SUBSET))
    for it in range(cfg.iterations):
        snapshot = x.copy()
        subs = [extract_sub_qubo(Q, random_subset(n, cfg.k, subset_rng), snapshot)
                for _ in range(cfg.p)]
        tasks = [
            _SubSolveTask(sub.subq.q, cfg.qaoa, cfg.sub_solver,
                          derive_seed(cfg.seed, _TAG_SOLVE, it, slot))
            for slot, sub in enumerate(subs)
        ]
        results = orch.solve_batch(tasks)
        for sub, res in zip(subs, results):
            if res is None:
                continue
            e = _aggregate_inplace(Q, x, sub.indices, res[0], e)
        trace.append(e)
        times.append(time.perf_counter() - t0)
    return e


def _finish_report(orch: _Orchestrator, x, trace, times, t0, extra_warnings=()) -> SolveReport:
    best_energy = energy(orch.Q, x)
    return SolveReport(
        mode=orch.cfg.mode,
        n=orch.Q.n,
        best_x=x,
        best_energy=best_energy,
        energy_trace=list(trace),
        trace_times=list(times),
        wall_time=time.perf_counter() - t0,
        sub_solves=orch.sub_solves,
        failed_sub_solves=orch.failed,
        warnings=list(extra_warnings) + orch.warnings,
        config=orch.cfg.config_echo(),
    )


def _run_iterative(Q: QuboMatrix, cfg: SolverConfig, pool: WorkerPool | None) -> SolveReport:
    cfg, warns = cfg.normalized(Q.n)
    own_pool = pool is None
    pool = pool if pool is not None else WorkerPool(cfg.workers)
    try:
        if own_pool:
            pool.__enter__()
        t0 = time.perf_counter()
        orch = _Orchestrator(Q, cfg, pool)
        x = _initialize(orch)
        e = energy(Q, x)
        trace = [e]
        times = [time.perf_counter() - t0]
        _iterate(orch, x, e, trace, times, t0)
        return _finish_report(orch, x, trace, times, t0, warns)
    finally:
        if own_pool:
            pool.__exit__(None, None, None)


def dqaoa_run(Q: QuboMatrix, cfg: SolverConfig, pool: WorkerPool | None = None) -> SolveReport:
    """Distributed decomposed solve: p random sub-QUBOs per iteration."""
    if cfg.mode != "dqaoa":
        raise ValueError(f"dqaoa_run requires mode='dqaoa', got {cfg.mode!r}")
    return _run_iterative(Q, cfg, pool)


def dq_qaoa_run(Q: QuboMatrix, cfg: SolverConfig, pool: WorkerPool | None = None) -> SolveReport:
    """Single-worker degenerate mode: one sub-QUBO per iteration (p = 1)."""
    if cfg.mode != "dq_qaoa":
        raise ValueError(f"dq_qaoa_run requires mode='dq_qaoa', got {cfg.mode!r}")
    return _run_iterative(Q, cfg, pool)


def dc_baseline_run(Q: QuboMatrix, cfg: SolverConfig, pool: WorkerPool | None = None) -> SolveReport:
    """Divide-and-conquer baseline: independent contiguous blocks, no iteration.

    Cross-block couplings are dropped entirely (no clamping); block
    sub-solutions are concatenated. With ``k_sweep`` set, each k is
    tried and the best final energy wins.
    """
    if cfg.mode != "dc_baseline":
        raise ValueError(f"dc_baseline_run requires mode='dc_baseline', got {cfg.mode!r}")
    cfg, warns = cfg.normalized(Q.n)
    n = Q.n
    ks = list(cfg.k_sweep) if cfg.k_sweep else [cfg.k]
    own_pool = pool is None
    pool = pool if pool is not None else WorkerPool(cfg.workers)
    try:
        if own_pool:
            pool.__enter__()
        t0 = time.perf_counter()
        orch = _Orchestrator(Q, cfg, pool)
        best_x, best_e = None, np.inf
        trace, times = [], []
        for k in ks:
            if k < 1:
                raise ValueError("k must be >= 1")
            blocks = [np.arange(s, min(s + k, n), dtype=np.intp) for s in range(0, n, k)]
            tasks = [
                _SubSolveTask(Q.q[np.ix_(b, b)], cfg.qaoa, cfg.sub_solver,
                              derive_seed(cfg.seed, _TAG_DC, k, bi))
                for bi, b in enumerate(blocks)
            ]
            results = orch.solve_batch(tasks)
            if any(r is None for r in results):
                raise SolverError(f"dc baseline: a block solve failed twice (k={k})")
            x = np.zeros(n, dtype=np.int8)
            for b, (bits, _) in zip(blocks, results):
                x[b] = bits
            e = energy(Q, x)
            if e < best_e:
                best_x, best_e = x, e
            trace.append(best_e)
            times.append(time.perf_counter() - t0)
        return _finish_report(orch, best_x, trace, times, t0, warns)
    finally:
        if own_pool:
            pool.__exit__(None, None, None)


def run_mode(Q: QuboMatrix, cfg: SolverConfig, pool: WorkerPool | None = None) -> SolveReport:
    """Dispatch on ``cfg.mode``."""
    if cfg.mode not in MODES:
        raise ValueError(f"unknown mode {cfg.mode!r}")
    runner = {"dqaoa": dqaoa_run, "dq_qaoa": dq_qaoa_run, "dc_baseline": dc_baseline_run}
    return runner[cfg.mode](Q, cfg, pool)
