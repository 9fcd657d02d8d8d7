"""Numerical verification engine for slant submanifolds of Lorentzian
almost contact manifolds."""

from .ambient import (
    AmbientStructure,
    CheckRecord,
    ChristoffelData,
    ambient_cov_deriv,
    canonical_lorentzian_sasakian,
    christoffel,
    default_sample_points,
    flat_product,
    get_structure,
    list_structures,
    verify_sasakian,
    verify_structure,
)
from .curvature import (
    CurvatureData,
    TensorDerivative,
    curvature_symmetry_records,
    lemma41_residuals,
    nabla_T,
    nabla_q_norm,
    riemann,
    sectional_xi,
    slant_from_curvature,
)
from .errors import SlantLabError
from .runner import RunSummary, run_scenario
from .slant import (
    SlantAngleSample,
    SlantReport,
    metric_identities,
    q_operator,
    q_spectrum,
    slant_angle,
    slant_fit,
    theorem31_check,
)
from .submanifold import (
    Immersion,
    PhiSplit,
    PointFrame,
    SecondFundamental,
    anti_invariant_r5,
    frame_at,
    get_immersion,
    invariant_r5,
    list_immersions,
    phi_split,
    second_fundamental,
    slant_candidate_r5,
    xi_identities,
)
from .tensor_core import (
    FDConfig,
    MetricAtPoint,
    fd_jacobian,
    inner,
    metric_signature,
    orthonormalize_spacelike,
    self_adjoint_spectrum,
)

__version__ = "0.1.0"
