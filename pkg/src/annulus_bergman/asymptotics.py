"""Asymptotic coefficients of the curvature terms as r -> 0.

A quantity ``A(r)`` is modelled as a finite sum ``Σ c_i r^(-p_i) L^(-q_i)``
with ``L = log(r^2)``. The coefficients are the iterated limits one gets by
peeling off the dominant term, multiplying by the next scale and letting
r -> 0. Literal iterated limits are useless numerically; instead the model
(the target basis plus every lower-order term that can occur) is fitted by
interpolation on a geometric grid of very small r in high precision. When
the model contains the true expansion up to a remainder that is negligible
on the grid, the fitted coefficients equal the limits. Stability is
reported by refitting on a shifted window of the grid.

Two evaluation points are supported: ``z = sqrt(r)`` (curvature diverges to
-infinity like ``1/(2 r L)``) and ``z = r^(3/10)`` (curvature tends to 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
from sklearn.base import BaseEstimator

from ._precision import get_context, to_real
from ._validation import check_decreasing_grid, check_positive_int
from .curvature import A_TERMS, curvature_breakdown, metric_g
from .exceptions import (
    ExtractionUnstableError,
    NumericalConsistencyError,
    PrecisionExhaustedError,
)
from .kernel import Annulus, TruncationPolicy, kernel_jet

__all__ = [
    "Monomial",
    "TermBasis",
    "Extraction",
    "CoefficientRow",
    "CaseSetup",
    "CASES",
    "SQRT_BASIS",
    "SQRT_SHORT_BASIS",
    "R310_BASIS",
    "R310_SHORT_BASIS",
    "REFERENCE_TABLES",
    "AsymptoticExpansion",
    "extract_asymptotic_coefficients",
    "a_term_values",
    "verify_aj_tables",
    "verify_sqrt_divergence",
    "verify_r310_limit",
    "divergence_digits",
]


@dataclass(frozen=True, order=True)
class Monomial:
    """``r^(-p) L^(-q)`` with ``L = log(r^2)``; ``p`` rational, ``q`` integer."""

    p: Fraction
    q: int

    def __post_init__(self):
        object.__setattr__(self, "p", Fraction(self.p))
        object.__setattr__(self, "q", int(self.q))

    def dominance_key(self):
        # larger p dominates; at equal p a smaller q dominates since |L| > 1
        return (-self.p, self.q)

    def evaluate(self, ctx, log_r, L):
        p = ctx.mpf(self.p.numerator) / self.p.denominator
        return ctx.exp(-p * log_r) * L ** (-self.q)

    @property
    def label(self):
        if self.p == 0 and self.q == 0:
            return "1"
        parts = []
        if self.p:
            parts.append(f"r^{-self.p}")
        if self.q:
            parts.append(f"L^{-self.q}")
        return " ".join(parts)


@dataclass(frozen=True)
class TermBasis:
    """Ordered basis, most dominant term first."""

    terms: tuple

    def __post_init__(self):
        terms = tuple(t if isinstance(t, Monomial) else Monomial(*t) for t in self.terms)
        object.__setattr__(self, "terms", terms)
        keys = [t.dominance_key() for t in terms]
        if any(b <= a for a, b in zip(keys, keys[1:])):
            raise ValueError("basis terms must be listed in strictly decreasing dominance")

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    @property
    def labels(self):
        return [t.label for t in self.terms]

    @classmethod
    def of(cls, *pairs):
        return cls(tuple(Monomial(p, q) for p, q in pairs))


_F = Fraction
SQRT_BASIS = TermBasis.of((3, 3), (2, 2), (2, 3), (1, 1))
SQRT_SHORT_BASIS = TermBasis.of((2, 2), (1, 1))
R310_BASIS = TermBasis.of(
    (_F(9, 5), 3), (_F(6, 5), 2), (_F(6, 5), 3), (1, 3), (_F(3, 5), 1), (_F(3, 5), 2),
    (_F(3, 5), 3), (_F(2, 5), 2), (_F(2, 5), 3), (_F(1, 5), 3), (0, 0),
)
R310_SHORT_BASIS = TermBasis.of((_F(6, 5), 2), (_F(3, 5), 1), (_F(3, 5), 2), (_F(2, 5), 2), (0, 0))

_h = _F(1, 2)
REFERENCE_TABLES = {
    "sqrt": {
        "long": {
            23: (-_h, 7, 12, -30), 21: (_h, -6, -12, 22), 20: (_h, -_F(11, 2), -12, 18),
            19: (-_h, 5, 12, -14), 18: (_h, -_F(11, 2), -12, 18), 15: (-_h, _F(9, 2), 12, -13),
            14: (-_h, 4, 12, -_F(21, 2)), 13: (_h, -_F(7, 2), -12, 8), 11: (_h, -6, -12, 22),
            10: (-_h, 5, 12, -14), 5: (-_h, 5, 12, -16), 4: (-_h, _F(9, 2), 12, -13),
            3: (1, -8, -24, 20), 2: (_h, -_F(7, 2), -12, 8), 1: (-_h, 3, 12, -6),
        },
        "short": {
            24: (1, 11), 22: (-1, -8), 17: (-_h, -6), 16: (_h, 5), 12: (-_h, -8),
            9: (-_h, -4), 8: (2, 12), 7: (_h, 5), 6: (-_F(3, 2), -6),
        },
        "sum": (0, 0, 0, _h),
    },
    "r310": {
        "long": {
            23: (-4, 16, 96, 12, -24, -376, -1212, -32, -384, -24, 16),
            21: (4, -12, -96, -12, 12, 288, 1212, 24, 384, 24, -4),
            20: (4, -12, -96, -12, 12, 296, 1212, 28, 384, 24, -4),
            19: (-4, 8, 96, 12, -4, -224, -1212, -16, -384, -24, 0),
            18: (4, -12, -96, -12, 12, 296, 1212, 28, 384, 24, -4),
            15: (-4, 8, 96, 12, -4, -208, -1212, -20, -384, -24, 0),
            14: (-4, 8, 96, 12, -4, -216, -1212, -24, -384, -24, 0),
            13: (4, -4, -96, -12, 0, 144, 1212, 12, 384, 24, 0),
            11: (4, -12, -96, -12, 12, 288, 1212, 24, 384, 24, -4),
            10: (-4, 8, 96, 12, -4, -224, -1212, -16, -384, -24, 0),
            5: (-4, 8, 96, 12, -4, -200, -1212, -16, -384, -24, 0),
            4: (-4, 8, 96, 12, -4, -208, -1212, -20, -384, -24, 0),
            3: (8, -8, -192, -24, 0, 272, 2424, 16, 768, 48, 0),
            2: (4, -4, -96, -12, 0, 144, 1212, 12, 384, 24, 0),
            1: (-4, 0, 96, 12, 0, -72, -1212, 0, -384, -24, 0),
        },
        "short": {
            24: (-4, 12, 64, 8, -12), 22: (4, -8, -64, -8, 4), 17: (4, -8, -64, -8, 4),
            16: (-4, 4, 64, 8, 0), 12: (4, -8, -64, -8, 4), 9: (2, -4, -32, -4, 2),
            8: (-8, 8, 128, 16, 0), 7: (-4, 4, 64, 8, 0), 6: (6, 0, -96, -12, 0),
        },
        "sum": (0,) * 10 + (2,),
    },
}
del _h


@dataclass(frozen=True)
class CaseSetup:
    """Everything needed to extract one table: point, bases, model and grids."""

    name: str
    exponent: Fraction          # z = r^exponent
    basis: TermBasis
    short_basis: TermBasis
    model: TermBasis            # basis plus all lower-order terms that occur
    grid_exponents: tuple       # (first, last) decimal exponents of the main grid
    digits: int

    def grid(self, ctx, exponents=None, size=None):
        lo, hi = exponents or self.grid_exponents
        n = size or len(self.model) + 2
        return [ctx.mpf(10) ** -(lo + ctx.mpf(hi - lo) * i / (n - 1)) for i in range(n)]


def _sqrt_model():
    # A_j(r) r^3 L^3 is a polynomial in r and L with deg_L <= deg_r
    pairs = [(3 - a, 3 - b) for a in range(6) for b in range(a + 1)]
    return TermBasis.of(*sorted(pairs, key=lambda t: (-t[0], t[1])))


def _r310_model():
    # in s = r^(1/5): A_j r^(9/5) L^3 = Σ c_{k,b} s^k L^b with b <= min(k, 4)
    pairs = [(_F(9 - k, 5), 3 - b) for k in range(13) for b in range(min(k, 4) + 1)]
    return TermBasis.of(*sorted(pairs, key=lambda t: (-t[0], t[1])))


CASES = {
    "sqrt": CaseSetup("sqrt", _F(1, 2), SQRT_BASIS, SQRT_SHORT_BASIS, _sqrt_model(),
                      (20, 62), 250),
    "r310": CaseSetup("r310", _F(3, 10), R310_BASIS, R310_SHORT_BASIS, _r310_model(),
                      (20, 60), 300),
}


@dataclass(frozen=True)
class Extraction:
    """Fitted coefficients aligned with the requested basis.

    ``model_coefficients`` covers every fitted term; ``stability`` is the
    per-coefficient change between the full grid and the nested sub-grid.
    """

    coefficients: tuple
    stability: tuple
    condition: object
    model: TermBasis
    model_coefficients: tuple


class _Fit:
    """Square interpolation system, rows and columns rescaled to unit size."""

    def __init__(self, ctx, model: TermBasis, grid):
        self.ctx = ctx
        self.grid = grid
        rows = []
        self.row_scale = []
        for r in grid:
            log_r = ctx.log(r)
            L = 2 * log_r
            vals = [t.evaluate(ctx, log_r, L) for t in model]
            scale = abs(vals[0])
            self.row_scale.append(scale)
            rows.append([v / scale for v in vals])
        m = len(model)
        self.col_scale = [max(abs(row[k]) for row in rows) for k in range(m)]
        self.M = ctx.matrix([[row[k] / self.col_scale[k] for k in range(m)] for row in rows])

    def condition(self):
        return self.ctx.cond(self.M)

    def solve(self, values):
        ctx = self.ctx
        y = ctx.matrix([v / s for v, s in zip(values, self.row_scale)])
        x = ctx.lu_solve(self.M, y)
        return [x[k] / self.col_scale[k] for k in range(self.M.cols)]


def _default_threshold(digits):
    # keep at least 20 significant digits after the solve
    return mpmath.mpf(10) ** max(digits - 20, 4)


def _fit_many(ctx, model, grid, columns, threshold):
    """Fit every value column; return ``([(coefficients, stability)], condition)``.

    The model is solved exactly on the first ``m`` grid points and again on
    the last ``m``; the difference between the two solutions is the stability.
    """
    m = len(model)
    first = _Fit(ctx, model, grid[:m])
    cond = first.condition()
    if cond > threshold:
        raise ExtractionUnstableError(
            f"fit condition estimate {mpmath.nstr(cond, 3)} exceeds threshold "
            f"{mpmath.nstr(threshold, 3)}",
            condition=cond,
        )
    last = _Fit(ctx, model, grid[-m:])
    out = []
    for values in columns:
        a = first.solve(values[:m])
        b = last.solve(values[-m:])
        out.append((a, [abs(x - y) for x, y in zip(a, b)]))
    return out, cond


def _align(model: TermBasis, basis: TermBasis, coefs):
    index = {t: i for i, t in enumerate(model)}
    missing = [t.label for t in basis if t not in index]
    if missing:
        raise ValueError(f"model lacks basis terms {missing}")
    return tuple(coefs[index[t]] for t in basis)


def extract_asymptotic_coefficients(
    evaluable: Callable,
    basis: TermBasis,
    r_grid: Sequence | None = None,
    precision_digits: int = 60,
    model: TermBasis | None = None,
    condition_threshold=None,
) -> Extraction:
    """Fit ``evaluable(r)`` against ``model`` (default: ``basis``) on ``r_grid``.

    ``evaluable`` receives ``r`` as a real of the extended context and must
    return a real. The grid needs at least ``len(model) + 2`` points; the
    fit uses the first ``len(model)`` and the stability refit the last
    ``len(model)``. Without a grid the points
    ``10^(-3-k/2)``, ``k = 0..len(model)+3`` are used.
    """
    precision_digits = check_positive_int(precision_digits, "precision_digits", 17)
    ctx = get_context(precision_digits)
    model = model or basis
    m = len(model)
    if r_grid is None:
        r_grid = [ctx.mpf(10) ** (-3 - ctx.mpf(k) / 2) for k in range(m + 4)]
    r_grid = check_decreasing_grid(r_grid, min_length=m + 2)
    grid = [to_real(ctx, r) for r in r_grid]
    values = [ctx.mpf(evaluable(r)) for r in grid]
    return _extract(ctx, basis, model, grid, values, condition_threshold)


def _extract(ctx, basis, model, grid, values, condition_threshold):
    threshold = condition_threshold or _default_threshold(ctx.dps)
    [(coefs, stab)], cond = _fit_many(ctx, model, grid, [values], threshold)
    return Extraction(
        _align(model, basis, coefs), _align(model, basis, stab), cond, model, tuple(coefs)
    )


class AsymptoticExpansion(BaseEstimator):
    """Estimator wrapper around the fit: ``fit(r, y)`` then ``predict(r)``.

    ``coef_`` holds the coefficients of ``basis``; ``model_coef_`` those of
    the full model used for prediction.
    """

    def __init__(self, basis=SQRT_BASIS, model=None, precision_digits=60,
                 condition_threshold=None):
        self.basis = basis
        self.model = model
        self.precision_digits = precision_digits
        self.condition_threshold = condition_threshold

    def fit(self, r, y):
        r = list(r)
        y = list(y)
        if len(r) != len(y):
            raise ValueError(f"r and y have different lengths ({len(r)} and {len(y)})")
        digits = check_positive_int(self.precision_digits, "precision_digits", 17)
        ctx = get_context(digits)
        model = self.model or self.basis
        check_decreasing_grid(r, "r", min_length=len(model) + 2)
        grid = [to_real(ctx, x) for x in r]
        ext = _extract(ctx, self.basis, model, grid, [ctx.mpf(v) for v in y],
                       self.condition_threshold)
        self.coef_ = ext.coefficients
        self.model_coef_ = ext.model_coefficients
        self.model_ = ext.model
        self.condition_ = ext.condition
        self.stability_ = ext.stability
        return self

    def predict(self, r):
        ctx = get_context(self.precision_digits)
        out = []
        for x in r:
            x = to_real(ctx, x)
            log_r = ctx.log(x)
            L = 2 * log_r
            out.append(sum(c * t.evaluate(ctx, log_r, L) for c, t in zip(self.model_coef_, self.model_)))
        return out


def a_term_values(case: str, r, digits: int):
    """``(A_1..A_24, R)`` at the case's point ``z = r^exponent``."""
    setup = CASES[case]
    ctx = get_context(digits)
    r = to_real(ctx, r)
    z = ctx.exp(ctx.mpf(setup.exponent.numerator) / setup.exponent.denominator * ctx.log(r))
    jet = kernel_jet(Annulus(r), z, TruncationPolicy(), digits)
    g = metric_g(jet)
    terms = [A(jet, g) for A in A_TERMS]
    terms = [t.real if hasattr(t, "real") else t for t in terms]
    return terms, sum(terms)


@dataclass(frozen=True)
class CoefficientRow:
    term_index: object          # 1..24 or "sum"
    case: str
    kind: str                   # "long", "short" or "sum"
    labels: tuple
    extracted: tuple
    reference: tuple
    max_rel_error: float
    zero_error: float           # largest |extracted| at zero references, over the row max
    stability: float
    passed: bool


def _compare(extracted, reference, rel_tol=0.01, zero_tol=1e-3):
    ref = [float(v) for v in reference]
    ext = [float(v) for v in extracted]
    scale = max(abs(v) for v in ref) or max(max(abs(v) for v in ext), 1.0)
    rel = [abs(e - r) / abs(r) for e, r in zip(ext, ref) if r != 0]
    zero = [abs(e) / scale for e, r in zip(ext, ref) if r == 0]
    max_rel = max(rel, default=0.0)
    max_zero = max(zero, default=0.0)
    return max_rel, max_zero, max_rel <= rel_tol and max_zero < zero_tol


def verify_aj_tables(case: str, r_grid=None, precision_digits=None,
                     condition_threshold=None, include=("long", "short", "sum")):
    """Extract every tabulated row of ``case`` and compare with the reference."""
    if case not in CASES:
        raise ValueError(f"case must be one of {sorted(CASES)}, got {case!r}")
    setup = CASES[case]
    digits = precision_digits or setup.digits
    ctx = get_context(digits)
    grid = setup.grid(ctx) if r_grid is None else [
        to_real(ctx, r) for r in check_decreasing_grid(r_grid, min_length=len(setup.model) + 2)
    ]
    per_point = [a_term_values(case, r, digits) for r in grid]
    refs = REFERENCE_TABLES[case]
    wanted = []
    if "long" in include:
        wanted += [(j, "long", setup.basis, refs["long"][j]) for j in refs["long"]]
    if "short" in include:
        wanted += [(j, "short", setup.short_basis, refs["short"][j]) for j in refs["short"]]
    if "sum" in include:
        wanted.append(("sum", "sum", setup.basis, refs["sum"]))
    columns = [
        [total if j == "sum" else terms[j - 1] for terms, total in per_point]
        for j, *_ in wanted
    ]
    threshold = condition_threshold or _default_threshold(digits)
    fits, _ = _fit_many(ctx, setup.model, grid, columns, threshold)
    rows = []
    for (j, kind, basis, ref), (coefs, stab) in zip(wanted, fits):
        ext = _align(setup.model, basis, coefs)
        st = _align(setup.model, basis, stab)
        max_rel, max_zero, ok = _compare(ext, ref)
        rows.append(CoefficientRow(
            j, case, kind, tuple(basis.labels), tuple(float(v) for v in ext),
            tuple(float(v) for v in ref), max_rel, max_zero, float(max(st)), ok,
        ))
    return rows


def divergence_digits(r) -> int:
    """Working digits for curvature at ``z = sqrt(r)``: the A_j cancel ~2 log10(1/r) digits."""
    return max(50, 30 + 3 * math.ceil(-math.log10(float(r))))


def _curvature_checked(r, z_exponent, digits):
    """Curvature at ``z = r^exponent``, raising when cancellation eats the digits."""
    ctx = get_context(digits)
    r = to_real(ctx, r)
    z = ctx.exp(z_exponent * ctx.log(r))
    try:
        b = curvature_breakdown(Annulus(r), z, TruncationPolicy(), digits,
                                consistency_tolerance=ctx.mpf(10) ** (-10))
    except NumericalConsistencyError as exc:
        raise PrecisionExhaustedError(
            f"cancellation exhausted {digits} digits at r={mpmath.nstr(r, 6)}", r=r
        ) from exc
    largest = max(abs(a) for a in b.a_terms)
    lost = ctx.log10(largest / max(abs(b.R), ctx.mpf(1)))
    if lost > digits - 12:
        raise PrecisionExhaustedError(
            f"cancellation costs {int(lost)} of {digits} digits at r={mpmath.nstr(r, 6)}", r=r
        )
    return b.R


def verify_sqrt_divergence(r_seq, precision_digits=None):
    """Rows ``(r, R(sqrt r), R * 2 r log(r^2))``; the last column tends to 1."""
    r_seq = check_decreasing_grid(r_seq, "r_seq")
    if any(float(r) > 1e-2 for r in r_seq):
        raise ValueError("r_seq must lie in (0, 1e-2]")
    rows = []
    for r in r_seq:
        digits = precision_digits or divergence_digits(r)
        ctx = get_context(digits)
        rr = to_real(ctx, r)
        R = _curvature_checked(rr, ctx.mpf(1) / 2, digits)
        rows.append((rr, R, R * 2 * rr * ctx.log(rr * rr)))
    return rows


def verify_r310_limit(r_seq, precision_digits=None):
    """Rows ``(r, R(r^(3/10)), R(r^(7/10)))``; both tend to 2 from below."""
    r_seq = check_decreasing_grid(r_seq, "r_seq")
    rows = []
    for r in r_seq:
        digits = precision_digits or divergence_digits(r)
        ctx = get_context(digits)
        rr = to_real(ctx, r)
        a = _curvature_checked(rr, ctx.mpf(3) / 10, digits)
        b = _curvature_checked(rr, ctx.mpf(7) / 10, digits)
        rows.append((rr, a, b))
    return rows
