"""Phase retrieval from magnitude measurements by alternating minimization.

The solver alternates between estimating the missing measurement phases and
solving a least-squares problem, starting from a spectral initializer.
Resampled and sparse variants, the measurement models, an experiment
harness, and numerical oracles for the supporting analysis live in the
submodules re-exported here.
"""

__version__ = "0.1.0"

from .linalg import (
    AdjointPairError,
    CgnrResult,
    NumericalError,
    PowerIterationResult,
    align_global_phase,
    cgnr_least_squares,
    dist,
    phase,
    phase_vector,
    power_iteration,
)
from .measurements import (
    DenseOperator,
    MaskedDFTOperator,
    MeasurementOperator,
    ProblemInstance,
    adjoint_pair_mismatch,
    build_instance,
    build_masked_dft_operator,
    measure,
    measure_noisy,
    sample_gaussian_operator,
    sample_standard_complex,
)
from .altmin import (
    AltMinConfig,
    RecoveryTrace,
    altmin_phase,
    altmin_phase_resampled,
    partition_blocks,
    sparse_altmin_phase,
    spectral_init,
    support_statistic,
    top_k_support,
)
from .oracles import (
    MonteCarloSpec,
    QuadratureSpec,
    expected_U_monte_carlo,
    f_beta,
    f_beta_derivative,
    phase_perturbation_check,
    phase_perturbation_fuzz_max,
    spectral_weight_moments,
    support_expectation,
    support_expectation_monte_carlo,
)
from .harness import (
    SweepReport,
    SweepRow,
    TrialConfig,
    TrialResult,
    emit_report,
    min_measurements_search,
    noise_sweep,
    run_trial,
    trial_seed,
    validate_lemmas,
)
from . import backend
