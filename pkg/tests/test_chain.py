import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from annulus_bergman import chain as ch
from annulus_bergman.chain import (
    LensGeometry,
    build_chain,
    chain_spec_from_mapping,
    check_chain,
    check_lemma21,
    default_chain_spec,
    green_array,
    green_two_discs,
    lens_for_overlap,
    lens_map,
    load_chain_spec,
    special_points,
    validate_chain_spec,
)
from annulus_bergman.exceptions import (
    BranchError,
    ChainValidationError,
    GeometryInconsistencyError,
    SingularPointError,
)


@pytest.fixture(scope="module")
def default_chain():
    return build_chain(default_chain_spec())


def _rule(**over):
    data = {"length": 6, "R": {"rule": "geometric", "first": 0.5, "ratio": 0.5},
            "ratio": {"rule": "geometric", "first": 0.05, "ratio": 0.05}, "s": {"safety": 0.9}}
    data.update(over)
    return chain_spec_from_mapping(data)


def test_default_chain_valid(default_chain):
    assert set(default_chain.status) == {"i", "ii", "iii"}
    assert default_chain.length == 6
    x = [c.real for c in default_chain.centers]
    assert all(b > a for a, b in zip(x, x[1:]))
    assert x[-1] + default_chain.R[-1] < default_chain.zeta < 1.5


def test_zeta_is_limit_of_right_ends(default_chain):
    longer = build_chain(default_chain_spec(), length=40)
    assert longer.centers[-1].real + longer.R[-1] == pytest.approx(default_chain.zeta, abs=1e-11)


def test_centres_sit_on_chord_bisector(default_chain):
    for ov in default_chain.overlaps:
        j = ov.index
        for p in (ov.upper, ov.lower):
            assert abs(p - default_chain.centers[j - 1]) == pytest.approx(default_chain.R[j - 1], rel=1e-13)
            assert abs(p - default_chain.centers[j]) == pytest.approx(default_chain.R[j], rel=1e-13)
        assert abs(ov.upper - ov.lower) == pytest.approx(ov.s, rel=1e-13)


def test_circle_intersection_geometry():
    spec = ch.ChainSpec((1.0, 1.0), (0.1, 0.05), (0.5,))
    geom = build_chain(spec, validate=False)
    assert geom.centers[1] - geom.centers[0] == pytest.approx(2 * math.sqrt(1 - 0.0625), rel=1e-15)


def test_literal_condition_iii_rejects_halving_rule():
    data = {"length": 6, "R": {"rule": "geometric", "first": 0.5, "ratio": 0.5},
            "ratio": {"rule": "harmonic", "offset": 2}, "s": {"safety": 0.9}}
    with pytest.raises(ChainValidationError) as info:
        validate_chain_spec(chain_spec_from_mapping(data))
    assert info.value.condition == "iii"
    data["condition_iii"] = "scaled"
    assert validate_chain_spec(chain_spec_from_mapping(data))["iii"].startswith("holds")


@pytest.mark.parametrize("override, condition", [
    ({"R": {"rule": "geometric", "first": 0.5, "ratio": 1.0}}, "i"),
    ({"R": {"rule": "power", "first": 0.5, "exponent": 1.0}}, "i"),
    ({"ratio": {"rule": "geometric", "first": 0.6, "ratio": 0.5}}, "ii"),
    ({"s": [0.2, 0.01, 0.01, 0.01, 0.01]}, "iii"),
])
def test_broken_specs_name_their_condition(override, condition):
    with pytest.raises(ChainValidationError) as info:
        validate_chain_spec(_rule(**override))
    assert info.value.condition == condition
    assert f"({condition})" in str(info.value)


def test_ratio_must_decrease():
    spec = ch.ChainSpec((0.5, 0.25), (0.01, 0.01), (0.01,))
    with pytest.raises(ChainValidationError) as info:
        validate_chain_spec(spec)
    assert info.value.condition == "ii" and info.value.index == 2


def test_yaml_roundtrip(tmp_path):
    path = tmp_path / "chain.yaml"
    path.write_text("length: 4\nR: {rule: power, first: 0.5, exponent: 2}\n"
                    "ratio: {rule: geometric, first: 0.001, ratio: 0.001}\ns: {safety: 0.8}\n")
    spec = load_chain_spec(path)
    assert spec.R == (0.5, 0.125, 0.5 / 9, 0.03125)
    assert build_chain(spec).status["i"] == "summable by rule"


def test_special_points_single_annulus():
    spec = ch.ChainSpec((0.5,), (0.125,), ())
    geom = build_chain(spec, validate=False)
    zp, zpp = special_points(geom, 1)
    assert zp == pytest.approx(0.25, abs=1e-15)
    assert zpp == pytest.approx(0.5 * 0.25**0.3, abs=1e-15)
    assert zpp == pytest.approx(0.32988, abs=1e-5)


def test_special_points_in_reduced_annuli(default_chain):
    for j in range(1, default_chain.length + 1):
        for p in special_points(default_chain, j):
            assert ch.in_reduced_annulus(default_chain, j, p)


def test_special_point_inside_removed_disc_detected():
    spec = ch.ChainSpec((0.5, 0.5), (0.3, 0.01), (0.9,))
    geom = build_chain(spec, validate=False)
    with pytest.raises(GeometryInconsistencyError):
        special_points(geom, 1)


def test_lens_corners():
    lens = LensGeometry(0.5, 0.4, 0.05)
    # both corner limits are approached like |z - corner|^(1/2)
    gaps = [abs(lens_map(lens, complex(-h, h)) - 1) for h in (1e-6, 1e-9, 1e-12)]
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-4
    gaps = [abs(lens_map(lens, complex(h, -0.05)) + 1) for h in (1e-6, 1e-9, 1e-12)]
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-4
    for corner in (0, -0.05j):
        with pytest.raises(SingularPointError):
            lens_map(lens, corner)
    with pytest.raises(BranchError):
        lens_map(lens, complex(0, 0.3))


def test_lens_boundary_is_unit_circle():
    lens = LensGeometry(0.5, 0.4, 0.05)
    c2 = lens.center2
    for phi in np.linspace(-2.5, 2.5, 11):
        z = c2 + 0.4 * (1 - 1e-13) * cmath.exp(1j * phi)
        if abs(z - lens.center1) > lens.rho1:
            assert abs(lens_map(lens, z)) == pytest.approx(1, abs=1e-10)


def test_removal_circle_maps_to_arc_through_plus_minus_one():
    lens = LensGeometry(0.5, 0.4, 0.05)
    # each half of the circle maps onto one arc of a circle through 1 and -1,
    # whose centre ic satisfies |f|^2 - 2c Im f = 1
    for sign in (1, -1):
        zs = [-0.025j + 0.025 * cmath.exp(1j * phi) for phi in np.linspace(-1.4, 1.4, 9)]
        images = [lens_map(lens, sign * z.real + 1j * z.imag) for z in zs]
        centres = [(abs(f) ** 2 - 1) / (2 * f.imag) for f in images]
        assert np.ptp(centres) < 1e-9


def test_green_function_properties():
    lens = LensGeometry(0.5, 0.4, 0.05)
    a, b = complex(0.1, -0.02), complex(0.3, 0.1)
    assert green_two_discs(lens, a, b) < 0
    assert abs(green_two_discs(lens, a, b) - green_two_discs(lens, b, a)) < 1e-8
    with pytest.raises(SingularPointError):
        green_two_discs(lens, a, a)
    near = [green_two_discs(lens, a + h, a) - math.log(h) for h in (1e-4, 1e-6, 1e-8)]
    assert np.ptp(near) < 1e-3


def test_tangent_constant():
    assert 0.21 < ch.tangent_angle_constant() < 0.23


def test_sublevel_monotone(default_chain):
    lens, j = lens_for_overlap(default_chain, 1, "right")
    z0 = special_points(default_chain, j)[1]
    f0 = lens_map(lens, complex(lens.local(z0)))
    pts = lens.local(z0) + np.random.default_rng(0).normal(scale=0.1, size=4000) * (1 + 1j)
    G = green_array(lens, pts, f0)
    low, high = G < -2, G < -1
    assert np.all(high[low])


def test_lemma_report_passes_at_special_point(default_chain):
    lens, j = lens_for_overlap(default_chain, 2, "left")
    rep = check_lemma21(lens, special_points(default_chain, j)[1], default_chain, j, 2)
    assert rep.passed and rep.samples >= 10**4 and rep.escapes == 0


@given(first=st.floats(0.2, 0.9), ratio=st.floats(0.2, 0.8), q=st.floats(0.005, 0.2),
       safety=st.floats(0.1, 0.99))
def test_rule_generated_chains_validate(first, ratio, q, safety):
    spec = _rule(R={"rule": "geometric", "first": first, "ratio": ratio},
                 ratio={"rule": "geometric", "first": q, "ratio": q}, s={"safety": safety},
                 condition_iii="scaled")
    geom = build_chain(spec)
    for j in range(1, geom.length + 1):
        zp, zpp = special_points(geom, j)
        assert ch.in_reduced_annulus(geom, j, zp) and ch.in_reduced_annulus(geom, j, zpp)
