"""Bergman kernel, metric and curvature of planar annuli."""

from .asymptotics import (
    AsymptoticExpansion,
    TermBasis,
    extract_asymptotic_coefficients,
    verify_aj_tables,
    verify_r310_limit,
    verify_sqrt_divergence,
)
from .chain import (
    ChainSpec,
    LensGeometry,
    build_chain,
    check_chain,
    check_lemma21,
    default_chain_spec,
    green_two_discs,
    lens_map,
    load_chain_spec,
    special_points,
    validate_chain_spec,
)
from .curvature import (
    AnnulusCurvature,
    CurvatureBreakdown,
    GeneralAnnulus,
    curvature,
    curvature_breakdown,
    curvature_general_annulus,
    metric_g,
)
from .exceptions import *  # noqa: F401,F403
from .extremal import curvature_extremal, extremal_j, extremal_problems
from .kernel import (
    Annulus,
    KernelJet,
    TruncationPolicy,
    basis_kernel_oracle,
    basis_norm,
    kernel_jet,
)

__version__ = "0.1.0"
