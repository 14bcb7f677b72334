"""Arithmetic contexts shared by every numerical routine.

Two modes exist. Up to 16 digits the engine runs on ``mpmath.fp`` (plain
Python floats and complexes); above that it runs on a private
``mpmath.MPContext`` with ``dps`` set to the requested digit count. All
series code is written against the context interface so it is generic over
both.
"""

from __future__ import annotations

import math
from functools import lru_cache

import mpmath

STANDARD_DIGITS = 16
EXTENDED_MIN_DIGITS = 50


@lru_cache(maxsize=None)
def get_context(digits: int = STANDARD_DIGITS):
    """Return the arithmetic context for ``digits`` significant digits.

    Contexts are created once and never mutated afterwards, so they can be
    shared between threads.
    """
    digits = int(digits)
    if digits < 1:
        raise ValueError(f"precision digits must be positive, got {digits}")
    if digits <= STANDARD_DIGITS:
        return mpmath.fp
    ctx = mpmath.MPContext()
    ctx.dps = digits
    return ctx


def is_extended(ctx) -> bool:
    return ctx is not mpmath.fp


def epsilon(ctx):
    """Unit roundoff of ``ctx`` as a context real."""
    if not is_extended(ctx):
        return 2.220446049250313e-16
    return ctx.mpf(2) ** (-ctx.prec)


def digits_of(ctx) -> int:
    return ctx.dps if is_extended(ctx) else STANDARD_DIGITS


def to_real(ctx, x):
    """Convert ``x`` (float, int, str or mpf) to a context real."""
    if is_extended(ctx):
        return ctx.mpf(x)
    if isinstance(x, str):
        return float(x)
    return float(x)


def to_complex(ctx, z):
    if is_extended(ctx):
        if isinstance(z, str):
            return ctx.mpc(ctx.mpmathify(z.replace(" ", "")))
        return ctx.mpc(z)
    if isinstance(z, str):
        return complex(z.replace(" ", ""))
    return complex(z)


def format_number(ctx, x) -> str:
    """Round-trip text for a context real (``repr`` for floats)."""
    if is_extended(ctx):
        return mpmath.nstr(x, ctx.dps, min_fixed=-3, max_fixed=3)
    return repr(float(x))


def expm1(ctx, x):
    # fp.expm1 is only accurate to ~1e-8 relative for tiny arguments
    if is_extended(ctx):
        return ctx.expm1(x)
    return math.expm1(x)
