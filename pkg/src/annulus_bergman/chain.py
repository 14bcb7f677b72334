"""Chains of overlapping annuli and the two-disc lens Green function.

A chain is a sequence of annuli ``Ω_j = {r_j < |z - x_j| < R_j}`` with
centres on the positive real axis, where consecutive outer circles cross
along a vertical chord of length ``s_j``. The sequences must satisfy

(i)   ``Σ R_j < ∞``;
(ii)  ``r_1 < R_1/2`` and ``r_j/R_j`` strictly decreasing to 0;
(iii) ``s_j < min{2 R_j sin(0.07π), 2 R_{j+1} sin(0.07π), T_j, T_{j+1}}``
      with ``T_j = R_j - (r_j/R_j)^0.3``.

Near an overlap the union of two discs through the chord end points is
mapped onto the unit disc by

    w = (1/z - i/s) e^{-iπ/2} e^{i(β-α)/2},   f = (w^e - 1)/(w^e + 1),

``e = π/(2π - α - β)``, in a frame where the discs meet at 0 and ``-is``,
which gives the Green function of the lens in closed form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .exceptions import (
    BranchError,
    ChainValidationError,
    GeometryInconsistencyError,
    SingularPointError,
)

__all__ = [
    "ANGLE_LIMIT",
    "ChainSpec",
    "ChainGeometry",
    "LensGeometry",
    "Lemma21Report",
    "default_chain_spec",
    "load_chain_spec",
    "chain_spec_from_mapping",
    "validate_chain_spec",
    "s_bound",
    "build_chain",
    "special_points",
    "in_reduced_annulus",
    "lens_for_overlap",
    "lens_map",
    "lens_map_array",
    "green_two_discs",
    "green_array",
    "tangent_angle_constant",
    "check_lemma21",
    "check_chain",
]

ANGLE_LIMIT = 0.07 * math.pi
SIN_LIMIT = math.sin(ANGLE_LIMIT)
EXPONENT_LIMIT = 0.3
TAIL_CUTOFF = 1e-17   # relative size at which rule-generated radii stop mattering


# --------------------------------------------------------------------------
# specification


@dataclass(frozen=True)
class ChainSpec:
    """Materialized radii and chords, plus the rule that generated them.

    ``rule`` is ``None`` for explicit lists. ``condition_iii`` is
    ``"literal"`` (``T = R - (r/R)^0.3``) or ``"scaled"``
    (``T = R (1 - (r/R)^0.3)``).
    """

    R: tuple
    r: tuple
    s: tuple
    rule: dict | None = None
    condition_iii: str = "literal"

    @property
    def length(self):
        return len(self.R)


def _t_bound(R, r, mode):
    q = (r / R) ** EXPONENT_LIMIT
    return R - q if mode == "literal" else R * (1 - q)


def s_bound(R1, r1, R2, r2, mode="literal"):
    """Upper bound on the chord between annuli (R1, r1) and (R2, r2)."""
    return min(2 * R1 * SIN_LIMIT, 2 * R2 * SIN_LIMIT, _t_bound(R1, r1, mode), _t_bound(R2, r2, mode))


def _radii_rule(rule, n):
    kind = rule.get("rule", "geometric")
    first = float(rule["first"])
    if kind == "geometric":
        ratio = float(rule["ratio"])
        return [first * ratio**j for j in range(n)]
    if kind == "power":
        exponent = float(rule["exponent"])
        return [first * (j + 1) ** -exponent for j in range(n)]
    raise ValueError(f"unknown outer radius rule {kind!r}; use 'geometric' or 'power'")


def _ratio_rule(rule, n):
    kind = rule.get("rule", "harmonic")
    if kind == "harmonic":
        offset = float(rule.get("offset", 2))
        return [1 / (j + 1 + offset) for j in range(n)]
    if kind == "geometric":
        first = float(rule["first"])
        ratio = float(rule["ratio"])
        return [first * ratio**j for j in range(n)]
    raise ValueError(f"unknown inner ratio rule {kind!r}; use 'harmonic' or 'geometric'")


def _materialize(R_rule, ratio_rule, s_rule, n, mode):
    R = _radii_rule(R_rule, n)
    q = _ratio_rule(ratio_rule, n)
    r = [a * b for a, b in zip(R, q)]
    if "values" in s_rule:
        s = [float(v) for v in s_rule["values"]][: n - 1]
    else:
        safety = float(s_rule.get("safety", 0.9))
        s = [safety * s_bound(R[j], r[j], R[j + 1], r[j + 1], mode) for j in range(n - 1)]
    return R, r, s


def chain_spec_from_mapping(data: dict) -> ChainSpec:
    """Build a spec from a parsed configuration mapping.

    Rule form::

        length: 6
        R: {rule: geometric, first: 0.5, ratio: 0.5}     # or {rule: power, first, exponent}
        ratio: {rule: geometric, first: 0.05, ratio: 0.05}  # r_j/R_j; or {rule: harmonic, offset: 2}
        s: {safety: 0.9}                                  # s_j = safety * bound_j
        condition_iii: literal                            # or scaled

    Explicit form: ``R``, ``r`` and ``s`` given as lists (``s`` one shorter).
    """
    if not isinstance(data, dict):
        raise ValueError("chain specification must be a mapping")
    mode = data.get("condition_iii", "literal")
    if mode not in ("literal", "scaled"):
        raise ValueError(f"condition_iii must be 'literal' or 'scaled', got {mode!r}")
    R_field, s_field = data.get("R"), data.get("s", {"safety": 0.9})
    if isinstance(R_field, (list, tuple)):
        R = [float(v) for v in R_field]
        r = [float(v) for v in data["r"]]
        s = [float(v) for v in s_field]
        if not (len(r) == len(R) and len(s) == len(R) - 1):
            raise ValueError("explicit chain needs len(r) == len(R) and len(s) == len(R) - 1")
        return ChainSpec(tuple(R), tuple(r), tuple(s), None, mode)
    if not isinstance(R_field, dict):
        raise ValueError("field 'R' must be a rule mapping or a list")
    n = int(data.get("length", 6))
    if n < 2:
        raise ValueError(f"chain length must be at least 2, got {n}")
    ratio_field = data.get("ratio", {"rule": "harmonic", "offset": 2})
    if isinstance(s_field, (list, tuple)):
        s_field = {"values": s_field}
    R, r, s = _materialize(R_field, ratio_field, s_field, n, mode)
    rule = {"R": dict(R_field), "ratio": dict(ratio_field), "s": dict(s_field)}
    return ChainSpec(tuple(R), tuple(r), tuple(s), rule, mode)


def load_chain_spec(path) -> ChainSpec:
    """Read a YAML (or JSON) chain specification file."""
    with Path(path).open() as fh:
        return chain_spec_from_mapping(yaml.safe_load(fh))


def default_chain_spec(length: int = 6) -> ChainSpec:
    """A chain satisfying all three conditions with (iii) taken literally."""
    return chain_spec_from_mapping({
        "length": length,
        "R": {"rule": "geometric", "first": 0.5, "ratio": 0.5},
        "ratio": {"rule": "geometric", "first": 0.05, "ratio": 0.05},
        "s": {"safety": 0.9},
    })


def validate_chain_spec(spec: ChainSpec) -> dict:
    """Check (i), (ii), (iii) in order; raise on the first violation.

    Returns a mapping condition -> status string for a valid spec.
    """
    status = {}
    # (i) summability
    for j, v in enumerate(spec.R):
        if not v > 0:
            raise ChainValidationError("i", j + 1, f"R_{j + 1} = {v} is not positive")
    if spec.rule is None:
        status["i"] = "satisfied by rule (explicit finite list)"
    else:
        R_rule = spec.rule["R"]
        kind = R_rule.get("rule", "geometric")
        if kind == "geometric" and not 0 < float(R_rule["ratio"]) < 1:
            raise ChainValidationError(
                "i", None, f"geometric ratio {R_rule['ratio']} >= 1 gives a divergent sum of R_j")
        if kind == "power" and not float(R_rule["exponent"]) > 1:
            raise ChainValidationError(
                "i", None, f"power-law exponent {R_rule['exponent']} <= 1 gives a divergent sum of R_j")
        status["i"] = "summable by rule"

    # (ii) inner radii
    R, r = spec.R, spec.r
    for j, v in enumerate(r):
        if not v > 0:
            raise ChainValidationError("ii", j + 1, f"r_{j + 1} = {v} is not positive")
    if not r[0] < R[0] / 2:
        raise ChainValidationError("ii", 1, f"r_1 = {r[0]} is not below R_1/2 = {R[0] / 2}")
    q = [a / b for a, b in zip(r, R)]
    for j in range(1, len(q)):
        if not q[j] < q[j - 1]:
            raise ChainValidationError(
                "ii", j + 1, f"r_j/R_j = {q[j]:.6g} does not decrease (previous {q[j - 1]:.6g})")
    if spec.rule is not None:
        ratio_rule = spec.rule["ratio"]
        if ratio_rule.get("rule", "harmonic") == "geometric" and not 0 < float(ratio_rule["ratio"]) < 1:
            raise ChainValidationError("ii", None, "geometric rule for r_j/R_j must have ratio in (0, 1)")
    status["ii"] = "holds"

    # (iii) chords
    for j, s in enumerate(spec.s):
        bound = s_bound(R[j], r[j], R[j + 1], r[j + 1], spec.condition_iii)
        if not 0 < s < bound:
            raise ChainValidationError(
                "iii", j + 1, f"s_{j + 1} = {s:.6g} must lie in (0, {bound:.6g})")
    status["iii"] = f"holds ({spec.condition_iii})"
    return status


# --------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class Overlap:
    index: int                  # 1-based: the overlap of annuli index and index+1
    s: float
    upper: complex
    lower: complex
    disc_center: complex        # removal disc: centre at the chord midpoint, radius s/2
    disc_radius: float


@dataclass(frozen=True)
class ChainGeometry:
    spec: ChainSpec
    centers: tuple
    overlaps: tuple
    zeta: float | None
    status: dict = field(default_factory=dict)

    @property
    def R(self):
        return self.spec.R

    @property
    def r(self):
        return self.spec.r

    @property
    def length(self):
        return self.spec.length


def _centers(R, s):
    x = [0.0]
    for j, sj in enumerate(s):
        h = sj / 2
        x.append(x[-1] + math.sqrt(R[j] ** 2 - h * h) + math.sqrt(R[j + 1] ** 2 - h * h))
    return x


def _zeta(spec: ChainSpec):
    """``lim x_j + R_j``, materializing the rule until the radii are negligible."""
    if spec.rule is None:
        return None
    n = spec.length
    while True:
        R, r, s = _materialize(spec.rule["R"], spec.rule["ratio"], spec.rule["s"], n,
                               spec.condition_iii)
        if R[-1] < TAIL_CUTOFF * R[0] or n > 100_000:
            break
        n *= 2
    return _centers(R, s)[-1] + R[-1]


def build_chain(spec: ChainSpec, length: int | None = None, validate: bool = True) -> ChainGeometry:
    """Validate ``spec`` and place the annuli (centres on opposite sides of each chord).

    ``validate=False`` skips conditions (i)-(iii) and only needs each chord
    to be shorter than both diameters; useful for plain circle geometry.
    """
    if length is not None and length != spec.length:
        if spec.rule is None:
            raise ValueError("an explicit chain cannot be rematerialized at another length")
        R, r, s = _materialize(spec.rule["R"], spec.rule["ratio"], spec.rule["s"], length,
                               spec.condition_iii)
        spec = ChainSpec(tuple(R), tuple(r), tuple(s), spec.rule, spec.condition_iii)
    if validate:
        status = validate_chain_spec(spec)
    else:
        status = {}
        for j, sj in enumerate(spec.s):
            if not 0 < sj < 2 * min(spec.R[j], spec.R[j + 1]):
                raise GeometryInconsistencyError(f"circles {j + 1} and {j + 2} cannot share a chord of length {sj}")
    x = _centers(spec.R, spec.s)
    overlaps = []
    for j, sj in enumerate(spec.s):
        foot = x[j] + math.sqrt(spec.R[j] ** 2 - sj * sj / 4)
        overlaps.append(Overlap(j + 1, sj, complex(foot, sj / 2), complex(foot, -sj / 2),
                                complex(foot, 0.0), sj / 2))
    return ChainGeometry(spec, tuple(complex(v, 0.0) for v in x), tuple(overlaps),
                         _zeta(spec), status)


def in_reduced_annulus(chain: ChainGeometry, j: int, z) -> bool:
    """Membership in ``Ω'_j``: inside annulus j, outside the adjacent removal discs."""
    c = chain.centers[j - 1]
    d = abs(z - c)
    if not chain.r[j - 1] < d < chain.R[j - 1]:
        return False
    for k in (j - 1, j):        # overlaps touching annulus j
        if 1 <= k <= len(chain.overlaps):
            ov = chain.overlaps[k - 1]
            if abs(z - ov.disc_center) <= ov.disc_radius:
                return False
    return True


def special_points(chain: ChainGeometry, j: int):
    """``(z'_j, z''_j) = x_j + R_j (r_j/R_j)^{1/2}, x_j + R_j (r_j/R_j)^{3/10}``."""
    if not 1 <= j <= chain.length:
        raise IndexError(f"annulus index {j} outside 1..{chain.length}")
    x, R, r = chain.centers[j - 1], chain.R[j - 1], chain.r[j - 1]
    q = r / R
    pts = (x + R * math.sqrt(q), x + R * q**EXPONENT_LIMIT)
    for p in pts:
        if not in_reduced_annulus(chain, j, p):
            raise GeometryInconsistencyError(f"special point {p!r} of annulus {j} is not in Ω'_{j}")
    return pts


# --------------------------------------------------------------------------
# lens map and Green function


@dataclass(frozen=True)
class LensGeometry:
    """Two discs ``U_1`` (left) and ``U_2`` (right) meeting at 0 and ``-is``.

    ``origin`` and ``mirror`` place the lens in the plane: the local
    coordinate of ``z`` is ``z - origin``, reflected by ``ζ -> -conj(ζ)``
    when ``mirror`` is set.
    """

    rho1: float
    rho2: float
    s: float
    origin: complex = 0j
    mirror: bool = False

    def __post_init__(self):
        if not (self.s > 0 and self.rho1 > self.s / 2 and self.rho2 > self.s / 2):
            raise ValueError("need s > 0 and both radii above s/2")

    @property
    def alpha(self):
        return math.asin(self.s / (2 * self.rho2))

    @property
    def beta(self):
        return math.asin(self.s / (2 * self.rho1))

    @property
    def exponent(self):
        return math.pi / (2 * math.pi - self.alpha - self.beta)

    @property
    def applicable(self):
        return self.alpha < ANGLE_LIMIT and self.beta < ANGLE_LIMIT

    @property
    def center1(self):
        return complex(-math.sqrt(self.rho1**2 - self.s**2 / 4), -self.s / 2)

    @property
    def center2(self):
        return complex(math.sqrt(self.rho2**2 - self.s**2 / 4), -self.s / 2)

    @property
    def sector_half_width(self):
        return math.pi - (self.alpha + self.beta) / 2

    def local(self, z):
        zeta = np.asarray(z, dtype=complex) - self.origin
        return -np.conj(zeta) if self.mirror else zeta

    def contains_local(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        return (np.abs(zeta - self.center1) < self.rho1) | (np.abs(zeta - self.center2) < self.rho2)

    def _rotation(self):
        return cmath.exp(-0.5j * math.pi) * cmath.exp(0.5j * (self.beta - self.alpha))


def lens_map(lens: LensGeometry, z) -> complex:
    """Conformal map of the lens onto the unit disc at a local coordinate ``z``."""
    z = complex(z)
    if z == 0 or z == complex(0, -lens.s):
        raise SingularPointError(f"{z!r} is a corner of the lens")
    w = (1 / z - 1j / lens.s) * lens._rotation()
    if not abs(cmath.phase(w)) < lens.sector_half_width:
        raise BranchError(
            f"arg w = {cmath.phase(w):.6g} outside the sector of half-width "
            f"{lens.sector_half_width:.6g}; {z!r} is not in the lens")
    W = w**lens.exponent
    return (W - 1) / (W + 1)


def lens_map_array(lens: LensGeometry, zeta):
    """Vectorized ``lens_map``; points outside the sector come back as NaN."""
    zeta = np.asarray(zeta, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = (1 / zeta - 1j / lens.s) * lens._rotation()
        ok = np.abs(np.angle(w)) < lens.sector_half_width
        W = np.power(w, lens.exponent)
        f = (W - 1) / (W + 1)
    return np.where(ok, f, np.nan + 0j)


def green_two_discs(lens: LensGeometry, z, z0) -> float:
    """``log |(f(z) - f(z0)) / (1 - f(z) conj f(z0))|`` in local coordinates."""
    if complex(z) == complex(z0):
        raise SingularPointError("Green function is singular at z = z0")
    a = lens_map(lens, z)
    b = lens_map(lens, z0)
    return math.log(abs((a - b) / (1 - a * b.conjugate())))


def green_array(lens: LensGeometry, zeta, f0):
    f = lens_map_array(lens, zeta)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(np.abs((f - f0) / (1 - f * np.conj(f0))))


def tangent_angle_constant():
    """``arccos(tanh 1)/π``, the image-arc angle bound (about 0.2244)."""
    return math.acos(math.tanh(1.0)) / math.pi


def lens_for_overlap(chain: ChainGeometry, k: int, home: str, rho_margin: float = 1e-6,
                     rho_other=None) -> tuple[LensGeometry, int]:
    """Lens around overlap ``k`` (annuli k, k+1) seen from the ``home`` annulus.

    ``home="right"`` makes annulus k+1 the home disc ``U_2``;
    ``home="left"`` makes annulus k the home disc, using a mirrored frame.
    Returns the lens and the home index.
    """
    ov = chain.overlaps[k - 1]
    if home == "right":
        j, other = k + 1, k
        mirror = False
    elif home == "left":
        j, other = k, k + 1
        mirror = True
    else:
        raise ValueError(f"home must be 'left' or 'right', got {home!r}")
    rho1 = rho_other if rho_other is not None else chain.R[other - 1]
    rho2 = chain.R[j - 1] * (1 + rho_margin)
    return LensGeometry(rho1, rho2, ov.s, ov.upper, mirror), j


@dataclass(frozen=True)
class Lemma21Report:
    home: int
    overlap: int
    z0: complex
    f0: complex
    analytic_ok: bool
    alpha: float
    beta: float
    angles_ok: bool
    constant: float
    constant_ok: bool
    samples: int
    sublevel: int               # samples with G below the level
    escapes: int
    sampling_ok: bool

    @property
    def passed(self):
        return self.analytic_ok and self.angles_ok and self.constant_ok and self.sampling_ok


def _sublevel_samples(lens, home_center, home_radius, z0, f0, level, angles=256, radii=48,
                      margin=0.1):
    """Sample ``{G < level}`` along rays from ``z0``.

    Each ray is marched in coarse steps until it leaves the lens or ``G``
    exceeds ``level + margin``; ``radii`` points are then placed evenly up
    to that cap. Returns (samples, samples below level, samples below level
    outside the home disc).
    """
    z0_local = complex(lens.local(z0))
    theta = np.linspace(0.0, 2 * np.pi, angles, endpoint=False)
    dirs = np.exp(1j * theta)
    reach = 2 * (lens.rho1 + lens.rho2)
    coarse_n = 512
    steps = reach * np.arange(1, coarse_n + 1) / coarse_n
    pts = z0_local + dirs[:, None] * steps[None, :]
    G = green_array(lens, pts, f0)
    stop = ~lens.contains_local(pts) | ~np.isfinite(G) | (G > level + margin)
    first = np.where(stop.any(axis=1), stop.argmax(axis=1), coarse_n - 1)
    cap = steps[first]
    fine = cap[:, None] * np.arange(1, radii + 1)[None, :] / radii
    fpts = z0_local + dirs[:, None] * fine
    Gf = green_array(lens, fpts, f0)
    inside = lens.contains_local(fpts)
    # back to global coordinates for the containment test
    if lens.mirror:
        fglob = -np.conj(fpts) + lens.origin
    else:
        fglob = fpts + lens.origin
    below = inside & (Gf < level)
    escapes = below & (np.abs(fglob - home_center) >= home_radius)
    return int(fpts.size), int(below.sum()), int(escapes.sum())


def check_lemma21(lens: LensGeometry, z0, chain: ChainGeometry, home: int, overlap: int,
                  level: float = -1.0, angles: int = 256, radii: int = 48) -> Lemma21Report:
    """Analytic inequality, angle preconditions, constant and sampled containment."""
    z0 = complex(z0)
    f0 = lens_map(lens, complex(lens.local(z0)))
    c = math.sinh(1.0)
    analytic = f0.imag < 0 and abs(f0 - 1j * c) >= math.cosh(1.0)
    const = tangent_angle_constant()
    samples, sublevel, escapes = _sublevel_samples(
        lens, chain.centers[home - 1], chain.R[home - 1], z0, f0, level, angles, radii)
    return Lemma21Report(
        home, overlap, z0, f0, analytic, lens.alpha, lens.beta, lens.applicable,
        const, 0.21 < const < 0.23, samples, sublevel, escapes, escapes == 0 and sublevel > 0,
    )


def check_chain(chain: ChainGeometry, level: float = -1.0, angles: int = 256, radii: int = 48):
    """Run the lemma check for every overlap, from both sides, at ``z'_j`` and ``z''_j``."""
    reports = []
    for ov in chain.overlaps:
        for home in ("right", "left"):
            lens, j = lens_for_overlap(chain, ov.index, home)
            for z0 in special_points(chain, j):
                reports.append(check_lemma21(lens, z0, chain, j, ov.index, level, angles, radii))
    return reports
