"""Numerical toolkit for real hypersurfaces in complex and para-complex space forms."""

__version__ = "0.1.0"

from .algebra import (
    EpsilonKind,
    EpsScalar,
    IndefiniteForm,
    coe_prime_inverse,
    eps_cot,
    eps_norm,
    eps_product,
    eps_trig,
    inner,
    j_apply,
    omega_form,
)
from .ambient import (
    SpaceFormSpec,
    anti_isometry,
    curvature_operator,
    fiber_act,
    fiber_angle,
    fiber_equivalent,
    holomorphic_sectional,
    para_polar,
    quadric_normalize,
    quadric_residual,
    standard_point,
    tangent_split,
)
from .errors import *  # noqa: F401,F403
from .hopf import (
    SpectrumReport,
    companion_curvature,
    constancy_scan,
    hopf_data,
    hopf_identity_residuals,
    eigenspace_residuals,
    phi_invariance_defect,
    principal_spectrum,
)
from .hypersurface import (
    FrameData,
    HypersurfacePatch,
    ResidualReport,
    codazzi_obstruction,
    connection_residuals,
    contact_residuals,
    frame_at,
    frames_at,
    gauss_codazzi_residuals,
    shape_operator,
    umbilic_deviation,
    umbilic_obstruction,
)
from .tube import (
    CoreSpec,
    FocalData,
    focal_map,
    focal_radius,
    geodesic_sphere_patch,
    hopf_law,
    j_invariance_check,
    rank_report,
    tube_over_linear_core,
)
