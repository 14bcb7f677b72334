import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from annulus_bergman.curvature import (
    A_TERMS,
    AnnulusCurvature,
    GeneralAnnulus,
    curvature,
    curvature_breakdown,
    curvature_direct,
    curvature_general_annulus,
    metric_g,
)
from annulus_bergman.exceptions import DomainError, InvalidJetError, NumericalConsistencyError
from annulus_bergman.kernel import Annulus, kernel_jet


def test_metric_positive():
    assert metric_g(kernel_jet(Annulus(0.1), 0.5)) > 0


def test_metric_is_laplacian_of_log_kernel():
    ann = Annulus(0.2)
    logK = lambda z: math.log(kernel_jet(ann, z).K)  # noqa: E731
    g = metric_g(kernel_jet(ann, 0.6))
    errs = []
    for h in (4e-3, 2e-3, 1e-3):
        lap = (logK(0.6 + h) + logK(0.6 - h) + logK(0.6 + 1j * h) + logK(0.6 - 1j * h) - 4 * logK(0.6)) / h**2
        errs.append(abs(lap / 4 - g))
    assert errs[2] < 1e-5 * g
    assert 3 < errs[0] / errs[1] < 5


def test_nonpositive_kernel_rejected():
    jet = kernel_jet(Annulus(0.1), 0.5)
    bad = type(jet)(**{**jet.__dict__, "K": -1.0})
    with pytest.raises(InvalidJetError):
        metric_g(bad)


def test_breakdown_has_24_terms_and_two_routes():
    b = curvature_breakdown(Annulus(0.1), 0.4)
    assert len(b.a_terms) == len(A_TERMS) == 24
    assert b.S == b.g
    assert b.R == pytest.approx(sum(b.a_terms))
    assert abs(b.R - b.R_direct) < 1e-12


def test_rotation_and_inversion():
    ann = Annulus(0.1)
    R = curvature(ann, 0.4)
    assert curvature(ann, 0.4 * cmath.exp(1j * math.pi / 3)) == pytest.approx(R, abs=1e-13)
    assert abs(curvature(ann, 0.25) - R) < 1e-9


def test_approaches_minus_one_at_outer_circle():
    # below float resolution from k = 3 on, so extended digits
    ann = Annulus("0.2")
    gaps = [abs(curvature(ann, "0." + "9" * k, digits=40) + 1) for k in (2, 3, 4)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert abs(curvature(Annulus(0.2), 0.99) + 1) < 1e-9


def test_consistency_error_carries_both_values():
    with pytest.raises(NumericalConsistencyError) as info:
        curvature_breakdown(Annulus(0.1), 0.4, consistency_tolerance=1e-30)
    assert info.value.first is not None and info.value.second is not None


def test_general_annulus_reduction():
    ann = Annulus(0.1)
    assert curvature_general_annulus(GeneralAnnulus(0, 0.1, 1), 0.4) == curvature(ann, 0.4)
    assert curvature_general_annulus(GeneralAnnulus(0, 0.2, 2), 0.8) == pytest.approx(curvature(ann, 0.4), abs=1e-13)
    assert curvature_general_annulus(GeneralAnnulus(1, 0.05, 0.5), 1.2) == pytest.approx(curvature(ann, 0.4), abs=1e-13)


def test_general_annulus_errors():
    with pytest.raises(DomainError):
        GeneralAnnulus(0, 0.5, 0.2)
    with pytest.raises(DomainError):
        curvature_general_annulus(GeneralAnnulus(1, 0.05, 0.5), 1.01)


def test_extended_precision_routes():
    b = curvature_breakdown(Annulus("0.1"), "0.4", digits=50)
    assert abs(b.R - b.R_direct) < 1e-40
    assert float(b.R) == pytest.approx(curvature(Annulus(0.1), 0.4), abs=1e-13)


@given(r=st.floats(0.02, 0.8), u=st.floats(0.03, 0.97), theta=st.floats(-math.pi, math.pi))
def test_curvature_bounded_and_radial(r, u, theta):
    ann = Annulus(r)
    rho = r + (1 - r) * u
    b = curvature_breakdown(ann, rho * cmath.exp(1j * theta))
    assert b.R < 2
    assert b.g > 0
    assert b.R == pytest.approx(curvature(ann, rho), abs=1e-11 * (1 + abs(b.R)))


@given(r=st.floats(0.02, 0.8), u=st.floats(0.05, 0.95))
def test_inversion_symmetry(r, u):
    ann = Annulus(r)
    rho = r + (1 - r) * u
    assert abs(curvature(ann, rho) - curvature(ann, r / rho)) < 1e-9 * (1 + abs(curvature(ann, rho)))


def test_direct_route_matches_sum_on_jet():
    jet = kernel_jet(Annulus(0.3), 0.5 + 0.2j)
    S = metric_g(jet)
    assert sum(A(jet, S) for A in A_TERMS).real == pytest.approx(curvature_direct(jet), rel=1e-13)


class TestTransformer:
    def test_transform_shape_and_values(self):
        est = AnnulusCurvature(r=0.1)
        out = est.fit_transform(np.array([0.4, 0.25, 0.5j]))
        assert out.shape == (3, 3)
        assert out[0, 0] == pytest.approx(out[1, 0], abs=1e-9)
        assert list(est.get_feature_names_out()) == ["R", "g", "K"]

    def test_params_roundtrip(self):
        est = AnnulusCurvature(r=0.3, precision_digits=50)
        assert clone(est).get_params() == est.get_params()

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            AnnulusCurvature().transform([0.5])

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            AnnulusCurvature(r=1.5).fit()

    def test_pipeline(self):
        pipe = make_pipeline(FunctionTransformer(lambda x: np.asarray(x) * 0.5), AnnulusCurvature(r=0.1))
        out = pipe.fit_transform(np.array([0.8, 1.2]))
        assert np.all(out[:, 0] < 2)
