"""Closed-form worst-case and rms relative errors of the number systems.

Logarithms are natural unless the name says otherwise.  ``R`` is the range in
bits and ``w`` the word length; the logarithmic system with the same ``R``
and ``w`` is the yardstick, hence the ratios ``f1`` (worst case) and ``f2``
(rms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .numsys import RoundingMode

LN2 = math.log(2.0)


@dataclass(frozen=True)
class TheoryRow:
    k: int
    p: int
    beta: int
    f1: float
    f2: float


def _check_kp(k: int, p: int) -> None:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if p not in (1, 2):
        raise ValueError(f"p must be 1 or 2, got {p}")
    if p == 2 and k != 1:
        raise ValueError("p=2 requires k=1")


def eps_worst(k: int, u: int, mode: RoundingMode | str = RoundingMode.RSTAR) -> float:
    """Largest relative representation error; truncating rules double it."""
    if not u >= k >= 1:
        raise ValueError(f"need u >= k >= 1, got k={k}, u={u}")
    eps = math.ldexp(1.0, k - u - 1)
    if RoundingMode.parse(mode) is not RoundingMode.RSTAR:
        # truncation and von Neumann rounding can both miss by a whole ulp
        eps *= 2.0
    return eps


def eps_log(a: int) -> float:
    """Worst relative error of a logarithmic system, ``2**(1/(2a)) - 1``."""
    return math.expm1(LN2 / (2 * a))


def eps0(R: float, w: int) -> float:
    if R <= 0 or w <= 0:
        raise ValueError("R and w must be positive")
    return R * math.ldexp(1.0, -w) * LN2


def delta0(R: float, w: int) -> float:
    return eps0(R, w) / math.sqrt(3.0)


def delta_rms(k: int, u: int) -> float:
    if not u >= k >= 1:
        raise ValueError(f"need u >= k >= 1, got k={k}, u={u}")
    return math.ldexp(1.0, -u) * math.sqrt((4.0**k - 1.0) / (24.0 * k * LN2))


def f1(k: int, p: int) -> float:
    _check_kp(k, p)
    return 2.0**k / (k * p * LN2)


def f2(k: int, p: int) -> float:
    _check_kp(k, p)
    return math.sqrt((4.0**k - 1.0) / (2.0 * p * p * (k * LN2) ** 3))


def delta_density(k: int, u: int, delta: float) -> float:
    """Density of the relative error for log-uniformly distributed reals."""
    if not u >= k >= 1:
        raise ValueError(f"need u >= k >= 1, got k={k}, u={u}")
    a = abs(delta)
    lo = math.ldexp(1.0, -u - 1)
    hi = math.ldexp(1.0, k - u - 1)
    if a < lo:
        return math.ldexp(1.0, u) * (1.0 - math.ldexp(1.0, -k)) / (k * LN2)
    if a < hi:
        return (0.5 / a - math.ldexp(1.0, u - k)) / (k * LN2)
    return 0.0


def delta_cdf(k: int, u: int, delta: float) -> float:
    """Distribution function belonging to :func:`delta_density`."""
    a = abs(delta)
    lo = math.ldexp(1.0, -u - 1)
    hi = math.ldexp(1.0, k - u - 1)
    c = k * LN2
    if a < lo:
        half = a * math.ldexp(1.0, u) * (1.0 - math.ldexp(1.0, -k)) / c
    elif a < hi:
        half = ((1.0 - math.ldexp(1.0, -k)) / 2.0
                + 0.5 * math.log(a / lo) - math.ldexp(1.0, u - k) * (a - lo)) / c
    else:
        half = 0.5
    return 0.5 + half if delta >= 0 else 0.5 - half


def ratio_table() -> list[TheoryRow]:
    rows = [TheoryRow(1, 2, 2, f1(1, 2), f2(1, 2))]
    rows += [TheoryRow(k, 1, 1 << k, f1(k, 1), f2(k, 1)) for k in range(1, 9)]
    return rows


def product_error_bound(n: int, eps: float, quadratic: bool = False) -> float:
    """First-order bound ``n*eps`` on the error of an ``n``-step product.

    ``quadratic=True`` adds the ``(n*eps)**2`` term the first-order bound drops,
    which makes it rigorous whenever ``n*eps <= 1``.
    """
    if n < 1 or eps <= 0:
        raise ValueError("need n >= 1 and eps > 0")
    bound = n * eps
    if quadratic:
        bound += bound * bound
    return bound


def sig3(x: float) -> str:
    """Three significant figures, the way the tables print them."""
    return f"{x:.3g}"
