"""Active-learning design loop: surrogate -> solver -> evaluator -> dataset.

Each cycle trains a factorization machine on the accumulated (structure,
figure-of-merit) dataset, maps it to a QUBO, minimizes that surrogate
with the decomposed solver, and scores the proposed structure with the
evaluator (thin-film optics by default, synthetic landscapes in tests).
If the proposal already exists in the dataset, a fresh uniform-random
structure is scored instead and the cycle is flagged as a random
injection; a run stops once 90 of the last 100 cycles were injections
or a size-dependent cycle cap is reached.

The dataset grows by exactly one row per cycle, so the best FOM is
non-increasing. All randomness is derived from (seed, cycle), which
makes interrupted runs resumable without replay drift.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .engine import SolverConfig, WorkerPool, derive_seed, run_mode
from .errors import DataError
from .fm import Dataset, FmTrainConfig, fm_to_qubo, fm_train
from .optics import (
    MaterialDb,
    Spectrum,
    decode_structure,
    default_grid,
    default_material_db,
    default_solar_spectrum,
    fom,
    ideal_filter_spectrum,
    transmission_spectrum,
)
from .qubo import check_bits

# seed-derivation tags for the per-cycle streams
_TAG_AL_INIT = 11
_TAG_AL_FM = 12
_TAG_AL_SOLVE = 13
_TAG_AL_INJECT = 14

STOP_WINDOW = 100
STOP_INJECTIONS = 90


def default_cycle_cap(n_bits: int) -> int:
    """Size-dependent cycle cap: 250 / 3000 / 4000 / 5000 for 12/30/50/100 bits."""
    if n_bits <= 12:
        return 250
    if n_bits <= 30:
        return 3000
    if n_bits <= 50:
        return 4000
    return 5000


@dataclass(frozen=True)
class AlConfig:
    """Loop configuration; the evaluator is supplied separately."""

    n_bits: int
    init_count: int = 25
    seed: int = 0
    latent_size: int = 8
    fm: FmTrainConfig = field(default_factory=FmTrainConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    cycles_cap: int | None = None

    def __post_init__(self):
        if self.n_bits < 2 or self.n_bits % 2 != 0:
            raise ValueError("n_bits must be even and >= 2")
        if self.init_count < 5:
            raise ValueError("init_count must be >= 5")

    @property
    def cap(self) -> int:
        return self.cycles_cap if self.cycles_cap is not None else default_cycle_cap(self.n_bits)


@dataclass
class AlState:
    """Dataset plus convergence bookkeeping for one run."""

    dataset: Dataset
    cycle: int
    best_bits: np.ndarray
    best_fom: float
    injection_flags: list[bool]
    seed: int

    def injections_in_window(self, window: int = STOP_WINDOW) -> int:
        return sum(self.injection_flags[-window:])

    def contains(self, bits: np.ndarray) -> bool:
        return bool(np.any(np.all(self.dataset.x == bits[None, :], axis=1)))

    def to_dict(self) -> dict:
        return {
            "cycle": self.cycle,
            "seed": self.seed,
            "best_bits": [int(b) for b in self.best_bits],
            "best_fom": self.best_fom,
            "injection_flags": [int(f) for f in self.injection_flags],
            "dataset_bits": ["".join(str(int(b)) for b in row) for row in self.dataset.x],
            "dataset_y": [float(v) for v in self.dataset.y],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AlState":
        x = np.asarray([[int(c) for c in row] for row in d["dataset_bits"]], dtype=np.int8)
        return cls(
            dataset=Dataset(x=x, y=np.asarray(d["dataset_y"])),
            cycle=int(d["cycle"]),
            best_bits=np.asarray(d["best_bits"], dtype=np.int8),
            best_fom=float(d["best_fom"]),
            injection_flags=[bool(f) for f in d["injection_flags"]],
            seed=int(d["seed"]),
        )


def bit_count_evaluator(bits) -> float:
    """Synthetic landscape: the number of set bits (optimum all-zeros)."""
    return float(np.sum(check_bits(bits)))


def make_optics_evaluator(
    db: MaterialDb | None = None,
    solar: Spectrum | None = None,
    grid=None,
    band=None,
) -> Callable[[np.ndarray], float]:
    """FOM evaluator: decode bits, run the transfer-matrix model, score."""
    db = db if db is not None else default_material_db()
    grid = default_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    solar = (solar if solar is not None else default_solar_spectrum()).resample(grid)
    ideal = ideal_filter_spectrum(grid) if band is None else ideal_filter_spectrum(grid, band)

    def evaluate(bits) -> float:
        stack = decode_structure(bits)
        designed = transmission_spectrum(stack, db, grid)
        return fom(designed, ideal, solar)

    return evaluate


def al_init(
    n_bits: int, init_count: int, seed: int, evaluator: Callable[[np.ndarray], float]
) -> AlState:
    """Seed the dataset with uniform-random structures (duplicates kept)."""
    if init_count < 5:
        raise ValueError("init_count must be >= 5")
    rng = np.random.default_rng(derive_seed(seed, _TAG_AL_INIT))
    x = rng.integers(0, 2, size=(init_count, n_bits)).astype(np.int8)
    y = np.asarray([evaluator(row) for row in x], dtype=np.float64)
    best = int(np.argmin(y))
    return AlState(
        dataset=Dataset(x=x, y=y),
        cycle=0,
        best_bits=x[best].copy(),
        best_fom=float(y[best]),
        injection_flags=[],
        seed=seed,
    )


def al_cycle(
    state: AlState,
    cfg: AlConfig,
    evaluator: Callable[[np.ndarray], float],
    pool: WorkerPool | None = None,
) -> tuple[AlState, dict]:
    """One surrogate/solve/evaluate/append cycle.

    Returns the new state and a record dict with the cycle's FOM,
    injection flag and per-component timings. Raises without touching
    the input state if any component fails.
    """
    cycle = state.cycle
    t0 = time.perf_counter()
    fm_hp = replace(cfg.fm, seed=derive_seed(state.seed, _TAG_AL_FM, cycle))
    model, fm_metrics = fm_train(state.dataset, m=cfg.latent_size, hp=fm_hp)
    surrogate, _ = fm_to_qubo(model)
    t1 = time.perf_counter()

    solver_cfg = replace(cfg.solver, seed=derive_seed(state.seed, _TAG_AL_SOLVE, cycle))
    report = run_mode(surrogate, solver_cfg, pool)
    proposal = np.asarray(report.best_x, dtype=np.int8)
    t2 = time.perf_counter()

    injected = state.contains(proposal)
    if injected:
        rng = np.random.default_rng(derive_seed(state.seed, _TAG_AL_INJECT, cycle))
        proposal = rng.integers(0, 2, size=cfg.n_bits).astype(np.int8)
    y = float(evaluator(proposal))
    t3 = time.perf_counter()

    new_dataset = Dataset(
        x=np.vstack([state.dataset.x, proposal[None, :]]),
        y=np.append(state.dataset.y, y),
    )
    improved = y < state.best_fom
    new_state = AlState(
        dataset=new_dataset,
        cycle=cycle + 1,
        best_bits=proposal.copy() if improved else state.best_bits,
        best_fom=y if improved else state.best_fom,
        injection_flags=state.injection_flags + [injected],
        seed=state.seed,
    )
    record = {
        "cycle": cycle + 1,
        "fom": y,
        "best_fom": new_state.best_fom,
        "injected": injected,
        "fm_s": t1 - t0,
        "solve_s": t2 - t1,
        "eval_s": t3 - t2,
        "fm_train_mse": fm_metrics["train_mse"],
        "fm_test_mse": fm_metrics["test_mse"],
    }
    return new_state, record


def stopping_check(state: AlState, cfg: AlConfig) -> bool:
    """True once convergence (90 injections in the last 100 cycles) or the
    cycle cap is reached."""
    if state.injections_in_window() >= STOP_INJECTIONS:
        return True
    return state.cycle >= cfg.cap


TRACE_FIELDS = ("cycle", "fom", "best_fom", "injected", "fm_s", "solve_s", "eval_s")


def al_run(
    cfg: AlConfig,
    evaluator: Callable[[np.ndarray], float] | None = None,
    out_dir=None,
    pool: WorkerPool | None = None,
    progress: Callable[[dict], None] | None = None,
) -> tuple[AlState, list[dict]]:
    """Run cycles until :func:`stopping_check` fires; optionally persist.

    With ``out_dir`` set, the dataset, per-cycle trace, best structure
    and a resumable state snapshot are written after every cycle; if a
    snapshot already exists there the run resumes from it and continues
    exactly as an uninterrupted run would.
    """
    evaluator = evaluator if evaluator is not None else make_optics_evaluator()
    out = Path(out_dir) if out_dir is not None else None
    records: list[dict] = []

    state = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        snapshot = out / "state.json"
        if snapshot.exists():
            try:
                state = AlState.from_dict(json.loads(snapshot.read_text()))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise DataError(f"{snapshot}: cannot resume ({exc})") from exc
    if state is None:
        state = al_init(cfg.n_bits, cfg.init_count, cfg.seed, evaluator)
        if out is not None:
            _persist(state, records, out)

    while not stopping_check(state, cfg):
        state, record = al_cycle(state, cfg, evaluator, pool)
        records.append(record)
        if progress is not None:
            progress(record)
        if out is not None:
            _persist(state, records, out)
    return state, records


def _persist(state: AlState, records: list[dict], out: Path) -> None:
    (out / "state.json").write_text(json.dumps(state.to_dict()))
    from .fm import save_dataset

    save_dataset(state.dataset, out / "dataset.csv")
    (out / "best.json").write_text(json.dumps({
        "bits": [int(b) for b in state.best_bits],
        "fom": state.best_fom,
        "cycle": state.cycle,
    }, indent=2))
    trace = out / "trace.csv"
    with open(trace, "a" if trace.exists() and records else "w") as fh:
        if fh.tell() == 0:
            fh.write(",".join(TRACE_FIELDS) + "\n")
        if records:
            rec = records[-1]
            fh.write(",".join(_fmt(rec[f]) for f in TRACE_FIELDS) + "\n")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)
