"""Command-line interface.

Subcommands: gen-qubo, solve, bench, evaluate, al-design, qaoa-debug.
Exit codes: 0 success, 2 usage error, 3 data error, 4 capacity error,
5 solver failure. ``DQOPT_SEED`` provides the seed when ``--seed`` is
omitted. ``--config FILE`` supplies JSON defaults for the chosen
subcommand; explicit flags override it, unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .al import AlConfig, al_run, bit_count_evaluator, make_optics_evaluator
from .engine import SolveReport, SolverConfig, run_mode
from .errors import CapacityError, DataError, SolverError
from .fm import FmTrainConfig
from .oracle import (
    BenchmarkConfig,
    SaConfig,
    benchmark_suite,
    brute_force,
    simulated_annealing,
    write_benchmark_csv,
    write_benchmark_json,
)
from .optics import (
    decode_structure,
    default_grid,
    default_material_db,
    default_solar_spectrum,
    fom,
    ideal_filter_spectrum,
    load_materials,
    load_spectrum,
    transmission_spectrum,
)
from .qaoa import QaoaConfig, cost_diagonal, optimize_params, qaoa_ansatz
from .qubo import QuboMatrix, gen_gaussian_qubo, load_qubo, save_qubo

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CAPACITY = 4
EXIT_SOLVER = 5

CLI_MODES = {"dqaoa": "dqaoa", "dq-qaoa": "dq_qaoa", "dc": "dc_baseline",
             "brute": "brute", "sa": "sa"}


def _default_seed() -> int:
    return int(os.environ.get("DQOPT_SEED", "0"))


def _add_seed(parser):
    parser.add_argument("--seed", type=int, default=None,
                        help="global seed (default: $DQOPT_SEED or 0)")


def _resolve_seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _add_qaoa_flags(parser):
    parser.add_argument("--layers", type=int, default=1, help="ansatz layers")
    parser.add_argument("--budget", type=int, default=300,
                        help="optimizer evaluation budget per sub-solve")
    parser.add_argument("--shots", type=int, default=1024, help="samples per sub-solve")
    parser.add_argument("--max-qubits", type=int, default=20, help="statevector size cap")


def _qaoa_cfg(args, seed: int) -> QaoaConfig:
    return QaoaConfig(layers=args.layers, budget=args.budget, shots=args.shots,
                      seed=seed, max_qubits=args.max_qubits)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dqaoa",
        description="Decomposition-based QAOA solver for dense QUBOs, "
                    "with benchmarks and an active-learning filter designer.",
    )
    parser.add_argument("--version", action="version", version=f"dqaoa {__version__}")
    parser.add_argument("--config", type=str, default=None,
                        help="JSON file with defaults for the chosen subcommand")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-qubo", help="generate a random Gaussian QUBO file")
    p.add_argument("--n", type=int, required=True, help="problem size")
    _add_seed(p)
    p.add_argument("--out", type=str, required=True, help="output JSON path")

    p = sub.add_parser("solve", help="solve a QUBO file with one of the solver modes")
    p.add_argument("--mode", choices=sorted(CLI_MODES), required=True)
    p.add_argument("--qubo", type=str, required=True, help="QUBO file (JSON or CSV)")
    p.add_argument("--k", type=int, default=4, help="sub-QUBO size")
    p.add_argument("--iters", type=int, default=None, help="iteration count (mode default)")
    p.add_argument("--p", type=int, default=None, help="sub-QUBOs per iteration (mode default)")
    p.add_argument("--k-sweep", type=str, default=None,
                   help="comma list of k values (dc mode only)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: CPUs, capped at p)")
    p.add_argument("--sub-solver", choices=["qaoa", "brute"], default="qaoa")
    p.add_argument("--deterministic", action="store_true",
                   help="force a single worker for fully serial execution")
    _add_qaoa_flags(p)
    p.add_argument("--sweeps", type=int, default=2000, help="sa mode: sweeps")
    p.add_argument("--restarts", type=int, default=8, help="sa mode: restarts")
    _add_seed(p)
    p.add_argument("--out", type=str, default=None, help="report JSON path")
    p.add_argument("--trace-csv", type=str, default=None, help="trace CSV path")

    p = sub.add_parser("bench", help="approximation-ratio / time benchmark sweep")
    p.add_argument("--sizes", type=str, required=True, help="comma list, e.g. 6,8,10")
    p.add_argument("--modes", type=str, default="dqaoa",
                   help="comma list from: dqaoa,dq-qaoa,dc")
    p.add_argument("--seeds-per-size", type=int, default=3)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    _add_qaoa_flags(p)
    _add_seed(p)
    p.add_argument("--out-csv", type=str, required=True)
    p.add_argument("--out-json", type=str, default=None)

    p = sub.add_parser("evaluate", help="decode a structure bitstring and compute its FOM")
    p.add_argument("--bits", type=str, required=True, help="0/1 string, two bits per layer")
    p.add_argument("--materials", type=str, default=None,
                   help="directory of material CSVs (default: bundled tables)")
    p.add_argument("--solar", type=str, default=None,
                   help="solar spectrum CSV (default: bundled model)")
    p.add_argument("--out", type=str, default=None, help="output JSON path")

    p = sub.add_parser("al-design", help="active-learning filter design loop")
    p.add_argument("--n-bits", type=int, required=True)
    p.add_argument("--materials", type=str, default=None)
    p.add_argument("--solar", type=str, default=None)
    p.add_argument("--synthetic-evaluator", action="store_true",
                   help="use the bit-count landscape instead of optics (testing)")
    p.add_argument("--cycles-cap", type=int, default=None)
    p.add_argument("--init-count", type=int, default=25)
    p.add_argument("--latent-size", type=int, default=8)
    p.add_argument("--epochs", type=int, default=500, help="FM training epochs")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    _add_qaoa_flags(p)
    _add_seed(p)
    p.add_argument("--out", type=str, required=True, help="output directory")

    p = sub.add_parser("qaoa-debug", help="dump optimized parameters and state for one QUBO")
    p.add_argument("--qubo", type=str, required=True)
    _add_qaoa_flags(p)
    _add_seed(p)
    p.add_argument("--out", type=str, default=None, help="output JSON path")

    return parser


def _apply_config_file(parser, argv):
    """Inject JSON config values as subcommand defaults; flags still win."""
    if "--config" not in argv:
        return parser, argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        parser.error("--config requires a path")
    try:
        cfg = json.loads(Path(path).read_text())
    except OSError as exc:
        raise DataError(f"config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"config file {path}: invalid JSON ({exc})") from exc
    if not isinstance(cfg, dict):
        raise DataError(f"config file {path}: expected a JSON object")
    remaining = [a for i, a in enumerate(argv) if i not in (idx, idx + 1)]
    command = next((a for a in remaining if not a.startswith("-")), None)
    subparsers = next(a for a in parser._actions
                      if isinstance(a, argparse._SubParsersAction))
    if command not in subparsers.choices:
        parser.error("--config requires a subcommand")
    sp = subparsers.choices[command]
    known = {a.dest for a in sp._actions}
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise DataError(f"config file {path}: unknown keys {unknown}")
    sp.set_defaults(**cfg)
    return parser, remaining


def cmd_gen_qubo(args) -> int:
    if args.n < 1:
        raise ValueError("--n must be >= 1")
    seed = _resolve_seed(args)
    Q = gen_gaussian_qubo(args.n, seed)
    save_qubo(Q, args.out)
    q = Q.q
    print(f"wrote {args.out}: n={Q.n}, {q.size} coefficients, "
          f"mean={q.mean():.5f}, std={q.std():.5f}, min={q.min():.5f}, max={q.max():.5f}")
    return EXIT_OK


def _solver_config_from_args(args, seed: int, n: int) -> SolverConfig:
    mode = CLI_MODES[args.mode]
    k_sweep = None
    if args.k_sweep:
        k_sweep = tuple(int(v) for v in args.k_sweep.split(","))
    workers = args.workers
    if args.deterministic:
        workers = 1
    if workers is None:
        p_guess = args.p if args.p is not None else (n if mode == "dqaoa" else 1)
        workers = max(1, min(os.cpu_count() or 1, p_guess))
    return SolverConfig(
        mode=mode, k=args.k, iterations=args.iters, p=args.p, seed=seed,
        qaoa=_qaoa_cfg(args, seed), sub_solver=args.sub_solver,
        workers=workers, k_sweep=k_sweep,
    )


def cmd_solve(args) -> int:
    seed = _resolve_seed(args)
    Q = load_qubo(args.qubo)
    if args.mode in ("brute", "sa"):
        t0 = time.perf_counter()
        if args.mode == "brute":
            bits, e = brute_force(Q)
        else:
            bits, e = simulated_annealing(
                Q, SaConfig(sweeps=args.sweeps, restarts=args.restarts, seed=seed))
        report = SolveReport(
            mode=args.mode, n=Q.n, best_x=bits, best_energy=e,
            energy_trace=[e], trace_times=[time.perf_counter() - t0],
            wall_time=time.perf_counter() - t0, sub_solves=0,
            failed_sub_solves=0, warnings=[],
            config={"mode": args.mode, "seed": seed, "sweeps": args.sweeps,
                    "restarts": args.restarts},
        )
    else:
        cfg = _solver_config_from_args(args, seed, Q.n)
        report = run_mode(Q, cfg)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"mode={report.mode} n={report.n} best_energy={report.best_energy:.6f} "
          f"sub_solves={report.sub_solves} wall_time={report.wall_time:.3f}s")
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_dict(), indent=2))
        print(f"report written to {args.out}")
    if args.trace_csv:
        report.write_trace_csv(args.trace_csv)
        print(f"trace written to {args.trace_csv}")
    return EXIT_OK


def cmd_bench(args) -> int:
    seed = _resolve_seed(args)
    sizes = tuple(int(v) for v in args.sizes.split(","))
    try:
        modes = tuple(CLI_MODES[m] for m in args.modes.split(","))
    except KeyError as exc:
        raise ValueError(f"unknown benchmark mode {exc.args[0]!r}") from exc
    if any(m in ("brute", "sa") for m in modes):
        raise ValueError("bench modes must be solver modes: dqaoa, dq-qaoa, dc")
    solver = SolverConfig(k=args.k, iterations=args.iters, seed=seed,
                          qaoa=_qaoa_cfg(args, seed), workers=args.workers)
    cfg = BenchmarkConfig(sizes=sizes, modes=modes,
                          seeds_per_size=args.seeds_per_size,
                          base_seed=seed, solver=solver)
    records = benchmark_suite(cfg)
    write_benchmark_csv(records, args.out_csv)
    print(f"{sum(1 for r in records if r.error is None)} records -> {args.out_csv}"
          + (f" ({sum(1 for r in records if r.error is not None)} failures)"
             if any(r.error for r in records) else ""))
    if args.out_json:
        write_benchmark_json(records, cfg, args.out_json)
        print(f"json mirror -> {args.out_json}")
    return EXIT_OK


def _load_optics(args):
    db = load_materials(args.materials) if args.materials else default_material_db()
    solar = load_spectrum(args.solar) if args.solar else default_solar_spectrum()
    return db, solar


def cmd_evaluate(args) -> int:
    bits = _parse_bits(args.bits)
    db, solar = _load_optics(args)
    stack = decode_structure(bits)
    grid = default_grid()
    designed = transmission_spectrum(stack, db, grid)
    score = fom(designed, ideal_filter_spectrum(grid), solar.resample(grid))
    desc = " / ".join(f"{m}({d:.1f} nm)" for m, d in stack.layers)
    print(f"structure: {desc}")
    print(f"fom: {score:.6f}")
    if args.out:
        payload = {
            "bits": [int(b) for b in bits],
            "layers": [{"material": m, "thickness_nm": d} for m, d in stack.layers],
            "fom": score,
            "wavelength_nm": designed.wavelengths.tolist(),
            "transmittance": designed.values.tolist(),
            "manifest": _manifest(args),
        }
        Path(args.out).write_text(json.dumps(payload))
        print(f"spectrum written to {args.out}")
    return EXIT_OK


def cmd_al_design(args) -> int:
    seed = _resolve_seed(args)
    if args.synthetic_evaluator:
        evaluator = bit_count_evaluator
    else:
        db, solar = _load_optics(args)
        evaluator = make_optics_evaluator(db, solar)
    solver = SolverConfig(
        mode="dqaoa", k=min(args.k, args.n_bits), iterations=args.iters, p=args.p,
        seed=seed, qaoa=_qaoa_cfg(args, seed), workers=args.workers,
    )
    cfg = AlConfig(
        n_bits=args.n_bits, init_count=args.init_count, seed=seed,
        latent_size=args.latent_size, fm=FmTrainConfig(epochs=args.epochs),
        solver=solver, cycles_cap=args.cycles_cap,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(json.dumps(_manifest(args), indent=2))

    def progress(rec):
        flag = " [random injection]" if rec["injected"] else ""
        print(f"cycle {rec['cycle']}: fom={rec['fom']:.6f} "
              f"best={rec['best_fom']:.6f}{flag}")

    state, _ = al_run(cfg, evaluator, out_dir=out, progress=progress)
    print(f"stopped after {state.cycle} cycles; best_fom={state.best_fom:.6f}")
    print(f"artifacts under {out}")
    return EXIT_OK


def cmd_qaoa_debug(args) -> int:
    seed = _resolve_seed(args)
    Q = load_qubo(args.qubo)
    params, best_f = optimize_params(Q, layers=args.layers, budget=args.budget,
                                     seed=seed, max_qubits=args.max_qubits)
    diag = cost_diagonal(Q, args.max_qubits)
    state = qaoa_ansatz(Q, params, diag=diag, max_qubits=args.max_qubits)
    probs = np.abs(state) ** 2
    payload = {
        "n": Q.n,
        "betas": params.betas.tolist(),
        "gammas": params.gammas.tolist(),
        "expectation": best_f,
        "distribution": probs.tolist(),
        "cost_diagonal": diag.tolist(),
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text)
        print(f"written to {args.out}")
    else:
        print(text)
    return EXIT_OK


def _parse_bits(text: str) -> np.ndarray:
    cleaned = text.replace(" ", "")
    if not cleaned or any(c not in "01" for c in cleaned):
        raise ValueError("--bits must be a non-empty 0/1 string")
    return np.asarray([int(c) for c in cleaned], dtype=np.int8)


def _manifest(args) -> dict:
    d = {k: v for k, v in vars(args).items() if k not in ("command", "func")}
    return {"command": args.command, "version": __version__, "args": d}


COMMANDS = {
    "gen-qubo": cmd_gen_qubo,
    "solve": cmd_solve,
    "bench": cmd_bench,
    "evaluate": cmd_evaluate,
    "al-design": cmd_al_design,
    "qaoa-debug": cmd_qaoa_debug,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        parser, argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
