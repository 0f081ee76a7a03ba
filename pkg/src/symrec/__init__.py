"""symrec: numerical certification of symmetry-induced limits on quantum
information recovery."""

from .bounds import (
    BoundReport,
    Decomposition,
    FluctuationReport,
    delta_j,
    dynamical_fluctuation,
    eastin_knill_bound,
    evaluate_bound,
    evaluate_matrix_bound,
    hp_bounds,
    operator_spread,
)
from .channels import (
    QuantumChannel,
    RecoveryResult,
    ScramblingInstance,
    apply_channel,
    avg_from_entanglement_fidelity,
    code_error,
    decoupling_residuals,
    implementation_error,
    optimize_recovery,
    petz_recovery,
    scramble,
)
from .hp import (
    HPConfig,
    build_hp_instance,
    concentration_sweep,
    equidistribution_check,
    foggy_mirror_experiment,
)
from .qec import audit_code, phase_covariant_code, repetition_code
from .showcase import build_alleviation_instance, verify_alleviation
from .states import (
    DensityMatrix,
    PureState,
    covariance,
    fidelity,
    minimal_variance_reference,
    moments,
    mvd_tradeoff_check,
    purified_distance,
    purify,
    qfi,
    qfi_matrix,
    variance,
)
from .symmetry import (
    ChargeSpec,
    ViolationReport,
    charge_sectors,
    conservation_check,
    covariance_check,
    covariant_erasure_noise,
    erasure_noise,
    sample_block_haar,
)
from .tensor import (
    SystemLayout,
    hermitian_spectrum,
    partial_trace,
    psd_sqrt,
    tensor_compose,
)

__version__ = "0.1.0"
