"""oscitrace: spectra, heat traces and complete-monotonicity diagnostics for
one-parameter Schrodinger pencils -d^2/dx^2 + V0(x) + t*V1(x) with power-law
potentials, plus a finite-matrix laboratory for the trace-exponential
positivity statement."""

from .potentials import (
    HomogeneousTerm,
    Potential,
    PencilPotential,
    ConditionReport,
    evaluate,
    evaluate_pencil,
    homogeneity_residual,
    validate_conditions,
    parse_potential,
    parse_pencil,
)
from .tridiag import SymTridiagonal, sturm_count, bisect_kth, lowest
from .spectrum import (
    ConvergenceError,
    MeshInfo,
    SpectrumRequest,
    Spectrum,
    discretize,
    choose_domain,
    parity_labels,
    compute_spectrum,
    compute_spectrum_with_budgets,
    scaled_spectrum,
)
from .weyl import (
    WeylEstimate,
    EnvelopeViolation,
    gamma_function,
    counting_function,
    phase_space_integral,
    weyl_constant,
    tail_bound,
    make_estimate,
)
from .traces import (
    TracePoint,
    TraceCurve,
    TraceEvaluator,
    trace_value,
    parity_split_trace,
    sample_curve,
    harmonic_closed_form,
)
from .absmono import (
    SampledFunction,
    CMReport,
    nth_difference,
    am_test,
    bell_recursion,
    exp_derivatives,
    power_law_derivatives,
)
from .measures import (
    StableScaleDensity,
    MeasureGrid,
    levy_density,
    pollard_density,
    stable_series_density,
    stable_tail_mass,
    mode_measure,
    aggregate_measure,
    laplace_transform,
)
from .bmv import (
    HermitianMatrix,
    MatrixPencil,
    SlopeReport,
    jacobi_symmetric,
    hermitian_eigenvalues,
    pencil_trace_exp,
    commuting_measure,
    support_slope_check,
    bmv_cm_test,
)
from .quadrature import QuadratureError, adaptive_simpson

__version__ = "0.1.0"
