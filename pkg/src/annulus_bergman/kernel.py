"""Bergman kernel of the round annulus ``P_r = {r < |z| < 1}`` and its jet.

On the diagonal the kernel is a radial function ``K(z) = F(t)`` with
``t = |z|^2``::

    pi F(t) = -1/(L t) + sum_{j>=0} [ a_j/(t - a_j)^2 + b_j/(1 - b_j t)^2 ]

where ``L = log(r^2)``, ``a_j = r^(2j+2)`` and ``b_j = r^(2j)``. Every
Wirtinger derivative up to order (2, 2) is a polynomial in ``z``, ``conj(z)``
and the radial derivatives ``F^(k)(t)``, ``k <= 4``, so one pass over the
series produces the whole jet. The singular ``1/(L t)`` part is added in
closed form; the sum over ``j`` is truncated with a geometric tail bound.

An independent oracle sums the orthonormal Laurent basis ``z^n`` directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from ._precision import (
    STANDARD_DIGITS,
    digits_of,
    expm1,
    get_context,
    is_extended,
    to_complex,
    to_real,
)
from .exceptions import DomainError, TruncationError

__all__ = [
    "Annulus",
    "TruncationPolicy",
    "KernelJet",
    "JET_INDICES",
    "kernel_jet",
    "radial_derivatives",
    "basis_norm",
    "log_basis_norm",
    "basis_kernel_oracle",
    "basis_jet_oracle",
    "OracleValue",
]

# Wirtinger multi-indices (holomorphic order, antiholomorphic order).
JET_INDICES = ((0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (1, 1), (2, 1), (1, 2), (2, 2))

_FACT = (1, 2, 6, 24, 120)  # (k+1)! for k = 0..4


@dataclass(frozen=True)
class Annulus:
    """Normalized annulus with inner radius ``r`` and outer radius 1.

    ``r`` may be a float, an ``mpf`` or a decimal string; strings keep full
    precision when the annulus is used in extended mode.
    """

    r: object

    def __post_init__(self):
        try:
            value = float(self.r)
        except (TypeError, ValueError) as exc:
            raise DomainError(f"inner radius must be a real number, got {self.r!r}") from exc
        if not 0.0 < value < 1.0 or math.isnan(value):
            raise DomainError(f"inner radius must satisfy 0 < r < 1, got {self.r!r}")

    def radius(self, ctx):
        return to_real(ctx, self.r)

    def contains(self, z) -> bool:
        a = abs(complex(z))
        return float(self.r) < a < 1.0

    def check_point(self, ctx, z):
        """Return ``|z|^2`` in ``ctx`` after checking ``r < |z| < 1``."""
        t = abs(z) ** 2
        r = self.radius(ctx)
        if not r * r < t < 1:
            raise DomainError(f"point {complex(z)!r} is not inside the annulus r={self.r}")
        return t


@dataclass(frozen=True)
class TruncationPolicy:
    """Truncation rule for the series in ``j``.

    ``tolerance`` is an absolute bound on the tail of every jet entry;
    ``None`` means ``10**-(digits+1)`` for the active precision.
    """

    tolerance: float | None = None
    max_terms: int = 100_000

    def __post_init__(self):
        if self.tolerance is not None and not float(self.tolerance) > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance!r}")
        if int(self.max_terms) < 1:
            raise ValueError(f"max_terms must be at least 1, got {self.max_terms!r}")

    def resolve(self, ctx):
        if self.tolerance is None:
            return to_real(ctx, 10) ** (-(digits_of(ctx) + 1))
        return to_real(ctx, self.tolerance)


@dataclass(frozen=True)
class KernelJet:
    """Kernel value and its Wirtinger derivatives up to order (2, 2).

    Attribute names spell the derivative: ``K1`` is one holomorphic
    derivative, ``Kb`` one antiholomorphic, ``K11b`` two holomorphic and one
    antiholomorphic, and so on.
    """

    r: object
    z: object
    K: object
    K1: object
    Kb: object
    K11: object
    Kbb: object
    K1b: object
    K11b: object
    K1bb: object
    K11bb: object
    terms: int
    tail_bound: object
    condition: object
    digits: int = STANDARD_DIGITS
    radial: tuple = field(default=(), repr=False)

    _NAMES = {
        (0, 0): "K", (1, 0): "K1", (0, 1): "Kb", (2, 0): "K11", (0, 2): "Kbb",
        (1, 1): "K1b", (2, 1): "K11b", (1, 2): "K1bb", (2, 2): "K11bb",
    }

    def entry(self, a: int, b: int):
        try:
            return getattr(self, self._NAMES[(a, b)])
        except KeyError:
            raise KeyError(f"no jet entry for multi-index ({a}, {b})") from None

    def __getitem__(self, ab):
        return self.entry(*ab)

    def as_dict(self):
        return {ab: self.entry(*ab) for ab in JET_INDICES}


def radial_derivatives(ctx, r, t, tolerance, max_terms):
    """Sum ``F^(k)(t)`` for ``k = 0..4``.

    Returns ``(F, terms, tails)`` where ``tails[k]`` bounds what was left
    out of ``F[k]``. ``tolerance`` is compared against the jet-entry bounds
    built from ``tails``, so the caller gets every entry within it.
    """
    pi = ctx.pi
    r2 = r * r
    L = 2 * ctx.log(r)
    sqrt_t = ctx.sqrt(t)

    # singular part -1/(pi L t), differentiated in closed form
    inv_t = 1 / t
    sing = -inv_t / (pi * L)
    F = []
    for k in range(5):
        F.append(sing)
        sing = sing * (-(k + 1)) * inv_t

    S = [0] * 5
    a = r2          # r^(2j+2)
    b = to_real(ctx, 1)  # r^(2j)
    tail_den1 = 1 - r2
    tail_den2 = [1 - r2 ** (k + 1) for k in range(5)]
    tails = [ctx.inf] * 5
    for j in range(max_terms):
        d1 = 1 / (t - a)
        d2 = 1 / (1 - b * t)
        p1 = a * d1 * d1
        p2 = b * d2 * d2
        for k in range(5):
            S[k] += (p1 if k % 2 == 0 else -p1) + p2
            p1 *= (k + 2) * d1
            p2 *= (k + 2) * b * d2
        a *= r2
        b *= r2
        # tails of the j >= N part, both sums dominated geometrically
        e1 = 1 / (t - a)
        e2 = 1 / (1 - b * t)
        q1 = a * e1 * e1 / tail_den1
        q2 = b * e2 * e2
        for k in range(5):
            tails[k] = (_FACT[k] * q1 + _FACT[k] * q2 / tail_den2[k]) / pi
            q1 *= e1
            q2 *= b * e2
        if max(_entry_bounds(tails, t, sqrt_t)) < tolerance:
            break
    else:
        bound = max(_entry_bounds(tails, t, sqrt_t))
        raise TruncationError(
            f"series tail {float(bound):.3g} still above tolerance {float(tolerance):.3g} "
            f"after {max_terms} terms",
            achievable=bound,
        )
    F = [F[k] + S[k] / pi for k in range(5)]
    return F, j + 1, tails


def _entry_bounds(T, t, rho):
    """Tail bounds on the nine entries from the radial tail bounds ``T``."""
    return (
        T[0],
        rho * T[1],
        t * T[2],
        T[1] + t * T[2],
        rho * (2 * T[2] + t * T[3]),
        2 * T[2] + 4 * t * T[3] + t * t * T[4],
    )


def kernel_jet(annulus: Annulus, z, policy: TruncationPolicy | None = None,
               digits: int = STANDARD_DIGITS) -> KernelJet:
    """Kernel value and derivative jet of ``P_r`` at ``z``."""
    policy = policy or TruncationPolicy()
    ctx = get_context(digits)
    z = to_complex(ctx, z)
    t = annulus.check_point(ctx, z)
    r = annulus.radius(ctx)
    F, terms, tails = radial_derivatives(ctx, r, t, policy.resolve(ctx), policy.max_terms)
    F0, F1, F2, F3, F4 = F
    zb = z.conjugate()
    m2 = 2 * F2 + t * F3
    K = F0
    K1b = F1 + t * F2
    K11bb = 2 * F2 + 4 * t * F3 + t * t * F4
    condition = max(1 / (1 - t), t / (t - r * r)) ** 6
    return KernelJet(
        r=annulus.r,
        z=z,
        K=K,
        K1=zb * F1,
        Kb=z * F1,
        K11=zb * zb * F2,
        Kbb=z * z * F2,
        K1b=K1b,
        K11b=zb * m2,
        K1bb=z * m2,
        K11bb=K11bb,
        terms=terms,
        tail_bound=max(_entry_bounds(tails, t, ctx.sqrt(t))),
        condition=condition,
        digits=digits_of(ctx),
        radial=tuple(F),
    )


def log_basis_norm(ctx, n: int, r):
    """``log`` of the squared L2 norm of ``z^n`` on ``P_r``, overflow free."""
    m = 2 * n + 2
    log_r = ctx.log(r)
    log_2pi = ctx.log(2 * ctx.pi)
    if m == 0:
        return log_2pi + ctx.log(-log_r)
    if m > 0:
        return log_2pi + ctx.log(-expm1(ctx, m * log_r)) - ctx.log(m)
    return log_2pi + m * log_r + ctx.log(-expm1(ctx, -m * log_r)) - ctx.log(-m)


def basis_norm(n: int, annulus: Annulus, digits: int = STANDARD_DIGITS):
    """``∫_{P_r} |z|^(2n) dA``: ``2π(1 - r^(2n+2))/(2n+2)``, or ``2π log(1/r)`` for n = -1."""
    ctx = get_context(digits)
    r = annulus.radius(ctx)
    n = int(n)
    m = 2 * n + 2
    if m == 0:
        return 2 * ctx.pi * -ctx.log(r)
    return 2 * ctx.pi * -expm1(ctx, m * ctx.log(r)) / m


class OracleValue(NamedTuple):
    value: object
    tail: object
    n_range: int


def _check_inside(annulus, ctx, *points):
    for p in points:
        annulus.check_point(ctx, p)


def basis_kernel_oracle(annulus: Annulus, z, w, n_range: int | None = None,
                        digits: int = STANDARD_DIGITS, max_range: int = 200_000) -> OracleValue:
    """Kernel ``K(z, conj w)`` as the truncated sum ``Σ_{|n|<=N} (z w̄)^n / ||z^n||^2``.

    Without ``n_range`` the half-width grows until the tail estimate drops
    below ``10**-(digits+1)`` relative to the partial sum.
    """
    ctx = get_context(digits)
    z = to_complex(ctx, z)
    w = to_complex(ctx, w)
    _check_inside(annulus, ctx, z, w)
    if n_range is not None and int(n_range) < 1:
        raise ValueError(f"n_range must be a positive integer, got {n_range!r}")
    r = annulus.radius(ctx)
    p = z * w.conjugate()
    log_p = ctx.log(p)
    x = abs(p)
    y = r * r / x

    def term(n):
        return ctx.exp(n * log_p - log_basis_norm(ctx, n, r))

    rel = to_real(ctx, 10) ** (-(digits_of(ctx) + 1))
    total = term(0)
    M = 0
    while True:
        M += 1
        total += term(M) + term(-M)
        tail = _oracle_tail(ctx, M, x, y, r)
        if n_range is not None:
            if M >= int(n_range):
                break
        elif tail < rel * abs(total) or M >= max_range:
            break
    return OracleValue(total, tail, M)


def basis_jet_oracle(annulus: Annulus, z, a: int, b: int, n_range: int,
                     digits: int = STANDARD_DIGITS):
    """Derivative ``∂_z^a ∂_w̄^b K(z, w̄)`` at ``w = z`` from the Laurent basis.

    The phase ``e^{i(b-a)θ}`` is common to every term, so the sum itself is
    real; it is accumulated in log-magnitude form to avoid overflow.
    """
    ctx = get_context(digits)
    z = to_complex(ctx, z)
    _check_inside(annulus, ctx, z)
    r = annulus.radius(ctx)
    log_rho = ctx.log(abs(z))
    total = 0
    for n in range(-int(n_range), int(n_range) + 1):
        coef = _falling(n, a) * _falling(n, b)
        if coef == 0:
            continue
        total += coef * ctx.exp((2 * n - a - b) * log_rho - log_basis_norm(ctx, n, r))
    phase = (z / abs(z)) ** (b - a) if a != b else 1
    return total * phase


def _falling(n, k):
    out = 1
    for i in range(k):
        out *= n - i
    return out


def _oracle_tail(ctx, M, x, y, r):
    """Tail of the |n| > M part for |p| = x and r^2/|p| = y (geometric bound)."""
    pi2 = 2 * ctx.pi
    q_pos = x * (M + 3) / (M + 2)
    q_neg = y * (M + 2) / (M + 1)
    if q_pos >= 1 or q_neg >= 1:
        return ctx.inf
    n = M + 1
    t_pos = x ** n * (2 * n + 2) / (pi2 * (1 - r ** (2 * n + 2)))
    t_neg = (2 * n - 2) / pi2 * y ** n / (r * r * (1 - r ** (2 * n - 2)))
    return t_pos / (1 - q_pos) + t_neg / (1 - q_neg)
