"""qlandscape: statevector laboratory for variational-circuit cost
landscapes, gradient statistics, expressibility, and 2-design diagnostics."""

from .ansatz import (
    AngleDistribution,
    AnsatzSpec,
    AxisPolicy,
    CorrelationScheme,
    ParameterAssignment,
    realize_circuit,
    sample_assignment,
    sample_axes,
    split_at,
)
from .bounds import (
    BoundReport,
    TwoDesignVariance,
    f_correction,
    pauli_string_variance_rl,
    theorem_bounds,
    two_design_variance_l,
    two_design_variance_r,
    two_design_variance_rl,
)
from .dense import (
    DenseOperator,
    ResourceGuardError,
    dense_circuit_unitary,
    haar_random_unitary,
    haar_unitaries,
    swap_operator,
)
from .expressibility import (
    AnsatzSampler,
    ExpressibilityReport,
    FixedSampler,
    FramePotentialEstimate,
    HaarSampler,
    IdentityCheck,
    dense_epsilon_oracle,
    dense_haar_twirl,
    expressibility_report,
    frame_potential,
    haar_frame_potential,
    verify_haar_identities,
)
from .gradients import (
    CostSpec,
    VarianceReport,
    chebyshev_tail,
    cost,
    draw_gradient_samples,
    estimate_gradient_statistics,
    partial_derivative,
)
from .paulis import (
    NumericConsistencyError,
    Observable,
    PauliTerm,
    expectation,
    global_z,
    local_z,
    single_pauli,
)
from .rng import stream
from .states import (
    CPhaseLadder,
    InitialStateSpec,
    Rotation,
    StateVector,
    apply_cphase_ladder,
    apply_gates,
    apply_rotation,
)

__version__ = "0.1.0"
