"""Decomposition-based QAOA for large dense QUBOs.

Large QUBO instances are split into small clamped sub-problems, each
solved with an exact statevector QAOA simulator; sub-solutions are
folded back into the global assignment only where they strictly reduce
the cost, so convergence is monotone. Reference solvers (brute force,
simulated annealing), a factorization-machine surrogate with an exact
QUBO mapping, transfer-matrix thin-film optics, and an active-learning
design loop round out the toolkit.
"""

__version__ = "0.1.0"

from .al import (
    AlConfig,
    AlState,
    al_cycle,
    al_init,
    al_run,
    bit_count_evaluator,
    default_cycle_cap,
    make_optics_evaluator,
    stopping_check,
)
from .engine import (
    SolveReport,
    SolverConfig,
    WorkerPool,
    aggregate,
    dc_baseline_run,
    dq_qaoa_run,
    dqaoa_run,
    init_windows,
    initialize_global,
    random_subset,
    run_mode,
)
from .errors import CapacityError, DataError, SolverError, UndefinedRatioError
from .fm import (
    Dataset,
    FmModel,
    FmTrainConfig,
    fm_predict,
    fm_to_qubo,
    fm_train,
    load_dataset,
    load_fm_model,
    save_dataset,
    save_fm_model,
)
from .oracle import (
    BenchmarkConfig,
    BenchmarkRecord,
    SaConfig,
    approximation_ratio,
    benchmark_suite,
    brute_force,
    simulated_annealing,
    write_benchmark_csv,
    write_benchmark_json,
)
from .optics import (
    LayerStack,
    MaterialDb,
    Spectrum,
    decode_structure,
    default_grid,
    default_material_db,
    default_solar_spectrum,
    encode_structure,
    fom,
    ideal_filter_spectrum,
    load_materials,
    load_spectrum,
    rt_spectra,
    tmm_reflectance,
    tmm_transmittance,
    transmission_spectrum,
)
from .qaoa import (
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
from .qubo import (
    QuboMatrix,
    SubProblem,
    energy,
    energy_delta_flip,
    extract_sub_qubo,
    gen_gaussian_qubo,
    load_qubo,
    merge_assignment,
    save_qubo,
)
