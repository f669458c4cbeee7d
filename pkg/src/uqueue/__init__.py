"""Polynomial-chaos uncertainty propagation for unreliable-server queueing models.

The package turns epistemic uncertainty in queueing parameters (breakdown
probabilities, arrival/service/repair rates) into statistics of the model's
stationary distribution: a total-degree polynomial chaos surrogate is fit by
Gauss-quadrature projection, and moments and Sobol' sensitivity indices are
read off its coefficients.  A seeded Monte-Carlo estimator provides an
independent comparison path, and the `uq` CLI reproduces the built-in
reference tables.
"""

__version__ = "0.1.0"

from .errors import NumericalError, UqueueError, ValidationError
from .montecarlo import DensityCurve, SampleSet, draw_samples, kde, mc_moments
from .orthopoly import (
    HERMITE,
    LEGENDRE,
    PolynomialFamily,
    RecurrenceTable,
    custom_family,
    eval_ortho,
    eval_orthonormal,
    norm_squared,
    standard_recurrence,
    stieltjes_recurrence,
)
from .pce import (
    InputSpec,
    MomentSummary,
    PceSurrogate,
    SobolReport,
    TotalDegreeBasis,
    UncertainParameter,
    basis_for_spec,
    enumerate_basis,
    eval_basis_function,
    eval_surrogate,
    input_spec,
    moments,
    project,
    sobol,
    surrogate_from_json,
    surrogate_to_json,
)
from .quadrature import QuadratureRule1D, TensorGrid, gauss_rule, integrate, tensor_grid
from .queueing import (
    Erlang2Service,
    ExponentialService,
    GeneratorMatrix,
    Hyperexp2Service,
    MG1NParams,
    MM1ThresholdParams,
    StationaryDist,
    StochasticMatrix,
    a_coefficients,
    make_model,
    mg1n_matrix,
    mm1_generator,
    solve_mg1n,
    solve_mm1_threshold,
    stationary_ctmc,
    stationary_dtmc,
)
from .studies import StudyConfig, build_density, build_table, mm1_config, me2_config, mh2_config, parse_config, run_study
