"""Curvature from the extremal problems J0, J1, J2.

Over the orthonormal Laurent basis ``e_n = z^n / ||z^n||`` of ``P_r`` a
holomorphic function with unit norm is a unit coefficient vector ``c``, and
``f(z0)``, ``f'(z0)``, ``f''(z0)`` are inner products of ``c`` with the
evaluation vectors ``v``, ``w``, ``u``. Each constrained supremum is then a
squared distance:

    J0 = |v|^2
    J1 = |w - P_v w|^2
    J2 = |u - P_{v,w} u|^2

and the curvature is ``2 - J0 J2 / J1^2``. Truncating to ``|n| <= N``
gives a lower bound for each ``J`` that increases with ``N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._precision import STANDARD_DIGITS, digits_of, get_context, is_extended, to_complex
from .exceptions import DegenerateConstraintError, DomainError
from .kernel import Annulus, log_basis_norm

__all__ = [
    "ExtremalResult",
    "default_half_width",
    "evaluation_vectors",
    "extremal_j",
    "extremal_problems",
    "curvature_extremal",
]

MAX_HALF_WIDTH = 5000


@dataclass(frozen=True)
class ExtremalResult:
    j0: object
    j1: object
    j2: object
    basis_half_width: int
    residual_estimate: float

    @property
    def curvature(self):
        return 2 - self.j0 * self.j2 / self.j1**2


def default_half_width(annulus: Annulus, z0, digits: int = STANDARD_DIGITS) -> int:
    """Smallest N with ``(N+1)^4 q^(2N) < eps (1 - q)^4``, ``q = max(|z0|, r/|z0|)``.

    ``1 - q`` is the relative distance to the nearer boundary circle and the
    ``(N+1)^4`` factor covers the second-derivative weights; capped at 5000.
    """
    rho = abs(complex(z0))
    q = max(rho, float(annulus.r) / rho)
    eps = 1e-14 if digits <= STANDARD_DIGITS else 10.0 ** -(digits - 2)
    target = math.log(eps) + 4 * math.log1p(-q)
    step = 2 * math.log(q)
    n = 3
    while n < MAX_HALF_WIDTH and 4 * math.log(n + 1) + n * step >= target:
        n += 1
    return n


def evaluation_vectors(ctx, annulus: Annulus, z0, N: int):
    """``(v, w, u)``: values, first and second derivatives of ``e_n`` at ``z0``."""
    r = annulus.radius(ctx)
    log_z = ctx.log(z0)
    v, w, u = [], [], []
    for n in range(-N, N + 1):
        half = log_basis_norm(ctx, n, r) / 2
        v.append(ctx.exp(n * log_z - half))
        w.append(n * ctx.exp((n - 1) * log_z - half))
        u.append(n * (n - 1) * ctx.exp((n - 2) * log_z - half))
    return v, w, u


def _dot(a, b):
    return sum(x * y.conjugate() for x, y in zip(a, b))


def _norm2(a):
    return sum(abs(x) ** 2 for x in a)


def _remove(a, q):
    """``a`` minus its component along the unit vector ``q``."""
    c = _dot(a, q)
    return [x - c * y for x, y in zip(a, q)]


def _unit(a, n2):
    s = n2 ** 0.5
    return [x / s for x in a]


def _residual(annulus, z0, N, order):
    rho = abs(complex(z0))
    r = float(annulus.r)
    out = 0.0
    for q, base in ((rho, rho), (r / rho, r / rho)):
        ratio = q**2 * ((N + 2) / (N + 1)) ** (2 * order + 1)
        if ratio >= 1:
            return math.inf
        out += (N + 1) ** (2 * order + 1) * base ** (2 * N) / (1 - ratio)
    return out / (rho ** (2 * order))


def extremal_problems(annulus: Annulus, z0, basis_half_width: int | None = None,
                      digits: int = STANDARD_DIGITS) -> ExtremalResult:
    """Solve all three problems on the basis ``|n| <= N`` by Gram-Schmidt."""
    ctx = get_context(digits)
    z0 = to_complex(ctx, z0)
    annulus.check_point(ctx, z0)
    N = basis_half_width or default_half_width(annulus, z0, digits_of(ctx))
    if N < 3:
        raise DegenerateConstraintError(f"basis half-width {N} too small; need at least 3")
    v, w, u = evaluation_vectors(ctx, annulus, z0, N)
    j0 = _norm2(v)
    q1 = _unit(v, j0)
    w1 = _remove(w, q1)
    j1 = _norm2(w1)
    # relative cancellation floor for a meaningful projection
    floor = (1e-13 if not is_extended(ctx) else 10 ** -(digits_of(ctx) - 3)) * _norm2(w)
    if not j1 > floor:
        raise DegenerateConstraintError(f"first-derivative constraint is degenerate at z0={complex(z0)!r}")
    q2 = _unit(w1, j1)
    # modified Gram-Schmidt, one direction at a time
    u1 = _remove(_remove(u, q1), q2)
    j2 = _norm2(u1)
    if not j2 > 0:
        raise DegenerateConstraintError(f"second-derivative constraint is degenerate at z0={complex(z0)!r}")
    return ExtremalResult(j0, j1, j2, N, _residual(annulus, z0, N, 2))


def extremal_j(order: int, annulus: Annulus, z0, basis_half_width: int | None = None,
               digits: int = STANDARD_DIGITS):
    """``J_order`` for ``order`` in 0, 1, 2."""
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order!r}")
    if basis_half_width is not None and basis_half_width < order + 1:
        raise DegenerateConstraintError(
            f"basis half-width {basis_half_width} cannot satisfy {order} constraint(s)"
        )
    if order < 2 and basis_half_width is not None and basis_half_width < 3:
        ctx = get_context(digits)
        z = to_complex(ctx, z0)
        annulus.check_point(ctx, z)
        v, w, _ = evaluation_vectors(ctx, annulus, z, basis_half_width)
        j0 = _norm2(v)
        return j0 if order == 0 else _norm2(_remove(w, _unit(v, j0)))
    res = extremal_problems(annulus, z0, basis_half_width, digits)
    return (res.j0, res.j1, res.j2)[order]


def curvature_extremal(annulus: Annulus, z0, basis_half_width: int | None = None,
                       digits: int = STANDARD_DIGITS):
    """Curvature ``2 - J0 J2 / J1^2``."""
    res = extremal_problems(annulus, z0, basis_half_width, digits)
    for name, value in (("J0", res.j0), ("J1", res.j1), ("J2", res.j2)):
        if not value > 0:
            raise DomainError(f"{name} is not positive ({value}); basis too small")
    return res.curvature
