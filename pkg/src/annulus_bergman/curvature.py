"""Bergman metric and Gaussian curvature of annuli.

The curvature is evaluated along two independent routes from the same
kernel jet:

* the 24-term decomposition ``R = A_1 + ... + A_24``, each ``A_j`` a rational
  expression in the jet entries and ``S``;
* ``R = -(log g)_{z z̄} / g`` with the derivatives of ``g`` expanded
  analytically through the jet (quotient rule, no differencing).

``S`` is the metric density ``g = K_{11̄}/K - |K_1|^2/K^2``; the ``A_j`` are
homogeneous of degree -1 in it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._precision import STANDARD_DIGITS, get_context, to_complex, to_real
from ._validation import check_open_unit, check_points, check_positive_int
from .exceptions import DomainError, InvalidJetError, NumericalConsistencyError
from .kernel import Annulus, KernelJet, TruncationPolicy, kernel_jet

__all__ = [
    "A_TERMS",
    "CurvatureBreakdown",
    "GeneralAnnulus",
    "AnnulusCurvature",
    "metric_g",
    "metric_derivatives",
    "curvature_direct",
    "curvature_breakdown",
    "curvature",
    "curvature_general_annulus",
    "default_consistency_tolerance",
]


# A_1 .. A_24, each a function of the jet ``k`` and ``S``.
A_TERMS = (
    lambda k, S: 4 * k.Kb**3 * k.K1**3 / (k.K**6 * S**3),
    lambda k, S: -2 * k.Kb * k.Kbb * k.K1**3 / (k.K**5 * S**3),
    lambda k, S: -8 * k.Kb**2 * k.K1**2 * k.K1b / (k.K**5 * S**3),
    lambda k, S: 2 * k.K1b * k.K1**2 * k.Kbb / (k.K**4 * S**3),
    lambda k, S: 4 * k.Kb * k.K1 * k.K1b**2 / (k.K**4 * S**3),
    lambda k, S: 6 * k.Kb**2 * k.K1**2 / (k.K**4 * S**2),
    lambda k, S: -2 * k.Kbb * k.K1**2 / (k.K**3 * S**2),
    lambda k, S: -8 * k.Kb * k.K1 * k.K1b / (k.K**3 * S**2),
    lambda k, S: 2 * k.K1b**2 / (k.K**2 * S**2),
    lambda k, S: 2 * k.Kb * k.K1**2 * k.K1bb / (k.K**4 * S**3),
    lambda k, S: -2 * k.K1 * k.K1b * k.K1bb / (k.K**3 * S**3),
    lambda k, S: 2 * k.K1 * k.K1bb / (k.K**2 * S**2),
    lambda k, S: -2 * k.Kb**3 * k.K1 * k.K11 / (k.K**5 * S**3),
    lambda k, S: k.Kb * k.Kbb * k.K1 * k.K11 / (k.K**4 * S**3),
    lambda k, S: 2 * k.Kb**2 * k.K1b * k.K11 / (k.K**4 * S**3),
    lambda k, S: -2 * k.Kb**2 * k.K11 / (k.K**3 * S**2),
    lambda k, S: k.K11 * k.Kbb / (k.K**2 * S**2),
    lambda k, S: -k.Kb * k.K1bb * k.K11 / (k.K**3 * S**3),
    lambda k, S: 2 * k.Kb**2 * k.K1 * k.K11b / (k.K**4 * S**3),
    lambda k, S: -k.Kbb * k.K1 * k.K11b / (k.K**3 * S**3),
    lambda k, S: -2 * k.Kb * k.K1b * k.K11b / (k.K**3 * S**3),
    lambda k, S: 2 * k.Kb * k.K11b / (k.K**2 * S**2),
    lambda k, S: k.K1bb * k.K11b / (k.K**2 * S**3),
    lambda k, S: -k.K11bb / (k.K * S**2),
)


def _real(x):
    return x.real if hasattr(x, "real") else x


def metric_g(jet: KernelJet):
    """Metric density ``(log K)_{z z̄} = K_{11̄}/K - |K_1|^2/K^2``."""
    K = _real(jet.K)
    if not K > 0:
        raise InvalidJetError(f"kernel value must be positive, got {K}")
    return _real(jet.K1b) / K - _real(jet.K1 * jet.Kb) / K**2


def metric_derivatives(jet: KernelJet):
    """``(g, g_z, g_{z z̄})`` expressed in jet entries."""
    K, K1, Kb, K11, Kbb = jet.K, jet.K1, jet.Kb, jet.K11, jet.Kbb
    K1b, K11b, K1bb, K11bb = jet.K1b, jet.K11b, jet.K1bb, jet.K11bb
    g = metric_g(jet)
    g_z = K11b / K - 2 * K1b * K1 / K**2 - K11 * Kb / K**2 + 2 * K1**2 * Kb / K**3
    g_zzb = (
        K11bb / K
        - 2 * K11b * Kb / K**2
        - 2 * K1bb * K1 / K**2
        - 2 * K1b**2 / K**2
        - K11 * Kbb / K**2
        + 8 * K1 * K1b * Kb / K**3
        + 2 * K11 * Kb**2 / K**3
        + 2 * K1**2 * Kbb / K**3
        - 6 * K1**2 * Kb**2 / K**4
    )
    return g, g_z, _real(g_zzb)


def curvature_direct(jet: KernelJet):
    """``-(log g)_{z z̄} / g`` through the analytic derivatives of ``g``."""
    g, g_z, g_zzb = metric_derivatives(jet)
    return -(g_zzb / g - abs(g_z) ** 2 / g**2) / g


def default_consistency_tolerance(digits: int):
    """Relative two-route tolerance: half the working digits (1e-8 at 16)."""
    return 10.0 ** (-max(digits, STANDARD_DIGITS) / 2)


@dataclass(frozen=True)
class CurvatureBreakdown:
    r: object
    z: object
    g: object
    S: object
    a_terms: tuple
    R: object
    R_direct: object
    discrepancy: object
    jet: KernelJet

    @property
    def K(self):
        return self.jet.K


def curvature_breakdown(annulus: Annulus, z, policy: TruncationPolicy | None = None,
                        digits: int = STANDARD_DIGITS, consistency_tolerance=None,
                        check_bound: bool = True) -> CurvatureBreakdown:
    """Evaluate ``g``, ``S``, ``A_1..A_24`` and ``R`` at ``z`` in ``P_r``.

    Raises :class:`NumericalConsistencyError` when the two routes disagree
    by more than ``consistency_tolerance * (1 + |R|)``, or when ``R >= 2``
    (impossible for a Bergman metric, so a sure sign of lost digits).
    """
    jet = kernel_jet(annulus, z, policy, digits)
    g = metric_g(jet)
    S = g
    terms = tuple(_real(A(jet, S)) for A in A_TERMS)
    R = sum(terms)
    R_direct = curvature_direct(jet)
    discrepancy = abs(R - R_direct)
    tol = consistency_tolerance
    if tol is None:
        tol = default_consistency_tolerance(jet.digits)
    if discrepancy > tol * (1 + abs(R)):
        raise NumericalConsistencyError(
            f"24-term sum {float(R)!r} and direct route {float(R_direct)!r} differ by "
            f"{float(discrepancy):.3g} at z={complex(jet.z)!r}, r={annulus.r}",
            first=R,
            second=R_direct,
        )
    if check_bound and not R < 2:
        raise NumericalConsistencyError(
            f"curvature {float(R)!r} is not below 2 at z={complex(jet.z)!r}, r={annulus.r}; "
            "increase precision",
            first=R,
            second=R_direct,
        )
    return CurvatureBreakdown(annulus.r, jet.z, g, S, terms, R, R_direct, discrepancy, jet)


def curvature(annulus: Annulus, z, policy: TruncationPolicy | None = None,
              digits: int = STANDARD_DIGITS, **kwargs):
    return curvature_breakdown(annulus, z, policy, digits, **kwargs).R


@dataclass(frozen=True)
class GeneralAnnulus:
    """Annulus ``{rho1 < |w - center| < rho2}``."""

    center: complex
    rho1: object
    rho2: object

    def __post_init__(self):
        if not 0 < float(self.rho1) < float(self.rho2):
            raise DomainError(f"need 0 < rho1 < rho2, got rho1={self.rho1!r}, rho2={self.rho2!r}")

    def normalized(self, ctx):
        """Inner radius of the biholomorphic normalized annulus."""
        return to_real(ctx, self.rho1) / to_real(ctx, self.rho2)


def curvature_general_annulus(ga: GeneralAnnulus, z, policy: TruncationPolicy | None = None,
                              digits: int = STANDARD_DIGITS, **kwargs):
    """Curvature at ``z`` via the affine map onto ``P_{rho1/rho2}``."""
    ctx = get_context(digits)
    rho1 = to_real(ctx, ga.rho1)
    rho2 = to_real(ctx, ga.rho2)
    w = (to_complex(ctx, z) - to_complex(ctx, ga.center)) / rho2
    if not rho1 < abs(w) * rho2 < rho2:
        raise DomainError(f"point {complex(z)!r} is not inside {ga}")
    return curvature(Annulus(rho1 / rho2), w, policy, digits, **kwargs)


class AnnulusCurvature(TransformerMixin, BaseEstimator):
    """Map points of ``P_r`` to the feature triple ``(R, g, K)``.

    ``fit`` only validates the parameters; ``transform`` accepts an array
    of complex (or real) points of shape ``(n,)`` or ``(n, 1)``.
    """

    def __init__(self, r=0.1, precision_digits=STANDARD_DIGITS, tolerance=None,
                 max_terms=100_000):
        self.r = r
        self.precision_digits = precision_digits
        self.tolerance = tolerance
        self.max_terms = max_terms

    def fit(self, X=None, y=None):
        check_open_unit(self.r, "r")
        check_positive_int(self.precision_digits, "precision_digits")
        check_positive_int(self.max_terms, "max_terms")
        self.annulus_ = Annulus(self.r)
        self.policy_ = TruncationPolicy(self.tolerance, self.max_terms)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        if not hasattr(self, "annulus_"):
            from sklearn.exceptions import NotFittedError

            raise NotFittedError("call fit before transform")
        points = check_points(X)
        out = np.empty((points.size, 3))
        for i, z in enumerate(points):
            b = curvature_breakdown(self.annulus_, z, self.policy_, self.precision_digits)
            out[i] = float(b.R), float(b.g), float(_real(b.K))
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(["R", "g", "K"], dtype=object)
