"""Reference arithmetic standing in for exact real arithmetic.

Reference reals are ``numpy.longdouble`` values.  On the supported platforms
(x86-64 extended precision, or IEEE quad) the significand carries at least 64
bits and every basic operation is correctly rounded by the hardware / libm,
which is more than enough to round any result into a system with a fraction
of at most 25 bits without a visible double-rounding effect.

All functions accept scalars or arrays and broadcast like numpy ufuncs.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

REF = np.longdouble

_FINFO = np.finfo(REF)
#: number of significand bits carried by a reference real (incl. leading bit)
REF_PRECISION = int(_FINFO.nmant) + 1

if REF_PRECISION < 64:  # pragma: no cover - platform guard
    raise ImportError(
        f"numpy.longdouble has only {REF_PRECISION} significand bits on this "
        "platform; radixlab needs at least 64"
    )

#: decimal digits needed for lossless decimal round trips
REF_DIGITS = int(np.ceil(REF_PRECISION * np.log10(2.0))) + 1


class DivideByZero(ArithmeticError):
    pass


class DomainError(ArithmeticError):
    pass


def ref(x) -> np.ndarray | np.longdouble:
    """Convert ``x`` to a reference real without losing information.

    Accepts Python ints and floats, numpy numbers/arrays, decimal strings and
    :class:`fractions.Fraction` (rounded once, to nearest).
    """
    if isinstance(x, Fraction):
        return _from_fraction(x)
    if isinstance(x, str):
        return REF(x)
    if isinstance(x, int):
        return REF(x)
    if np.ndim(x) == 0:
        return REF(x)
    return np.asarray(x, dtype=REF)


def _from_fraction(q: Fraction) -> np.longdouble:
    if q == 0:
        return REF(0)
    sign = -1 if q < 0 else 1
    num, den = abs(q.numerator), q.denominator
    # scale so the integer quotient carries REF_PRECISION + 2 bits
    shift = REF_PRECISION + 2 - (num.bit_length() - den.bit_length())
    if shift >= 0:
        quo, rem = divmod(num << shift, den)
    else:
        quo, rem = divmod(num, den << -shift)
    extra = quo.bit_length() - REF_PRECISION
    if extra > 0:
        low = quo & ((1 << extra) - 1)
        quo >>= extra
        shift -= extra
        half = 1 << (extra - 1)
        if low > half or (low == half and (rem or quo & 1)):
            quo += 1
    return REF(sign) * np.ldexp(REF(quo), -shift)


def ref_add(a, b):
    return np.add(ref(a), ref(b))


def ref_sub(a, b):
    return np.subtract(ref(a), ref(b))


def ref_mul(a, b):
    return np.multiply(ref(a), ref(b))


def ref_div(a, b):
    a, b = ref(a), ref(b)
    if np.any(b == 0):
        raise DivideByZero("reference division by zero")
    return np.divide(a, b)


def ref_sqrt(a):
    a = ref(a)
    if np.any(a < 0):
        raise DomainError("square root of a negative reference real")
    return np.sqrt(a)


def ref_log2(a):
    """Base-2 logarithm, faithfully rounded at reference precision."""
    a = ref(a)
    if np.any(a <= 0):
        raise DomainError("log2 of a non-positive reference real")
    return np.log2(a)


def ref_exp2(a):
    return np.exp2(ref(a))


def ref_format(x, digits: int = REF_DIGITS) -> str:
    """Scientific decimal string with ``digits`` significant digits."""
    return np.format_float_scientific(REF(x), precision=digits - 1, unique=False)


def ref_parse(text: str) -> np.longdouble:
    return REF(text.strip())


def as_fraction(x) -> Fraction:
    """Exact rational value of a finite reference real."""
    num, den = REF(x).as_integer_ratio()
    return Fraction(num, den)
