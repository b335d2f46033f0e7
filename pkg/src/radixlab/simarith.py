"""Simulated arithmetic: compute in reference precision, then round once.

An arithmetic context owns the representation of its values:

* :class:`FpContext` -- reference reals that are exactly representable in a
  :class:`~radixlab.numsys.SystemSpec`;
* :class:`LogContext` -- signed integer codes of a logarithmic system;
* :class:`RefContext` -- reference reals, no rounding at all.

Every operation accepts scalars or numpy arrays (elementwise).  Scalars take
an exact integer rounding route, arrays the vectorised one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numsys
from .numsys import LogSystemSpec, SystemSpec
from .refarith import REF, DivideByZero, DomainError

__all__ = [
    "ArithContext", "FpContext", "LogContext", "RefContext", "context_for",
    "sim_add", "sim_sub", "sim_mul", "sim_div", "sim_sqrt",
    "sim_abs", "sim_neg", "sim_cmp",
]


def _any(mask) -> bool:
    return bool(mask.any()) if isinstance(mask, np.ndarray) else bool(mask)


class ArithContext:
    """Common surface of the three context kinds."""

    name: str = ""

    # representation -------------------------------------------------------
    def round(self, x):
        raise NotImplementedError

    def value(self, v):
        raise NotImplementedError

    def const(self, x):
        return self.round(REF(x))

    @property
    def zero(self):
        return self.const(0)

    # arithmetic -------------------------------------------------------------
    def add(self, a, b):
        return self.round(self.value(a) + self.value(b))

    def sub(self, a, b):
        return self.round(self.value(a) - self.value(b))

    def mul(self, a, b):
        return self.round(self.value(a) * self.value(b))

    def div(self, a, b):
        vb = self.value(b)
        if _any(vb == 0):
            raise DivideByZero(f"division by zero in {self.name or type(self).__name__}")
        return self.round(self.value(a) / vb)

    def sqrt(self, a):
        va = self.value(a)
        if _any(va < 0):
            raise DomainError("square root of a negative value")
        return self.round(np.sqrt(va))

    # exact operations on represented values ---------------------------------
    def abs(self, a):
        return np.abs(a)

    def neg(self, a):
        return -a

    def lt(self, a, b):
        return a < b

    def is_zero(self, a):
        return a == 0


@dataclass(frozen=True, eq=False)
class FpContext(ArithContext):
    spec: SystemSpec
    name: str = ""

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", self.spec.name or str(self.spec))

    def round(self, x):
        if isinstance(x, np.ndarray) and x.ndim:
            return numsys.round_ref(self.spec, x)
        return _round_scalar(self.spec, x)

    def value(self, v):
        return v


def _round_scalar(spec: SystemSpec, x) -> np.longdouble:
    if isinstance(x, np.ndarray):
        x = x[()]
    try:
        num, den = x.as_integer_ratio()
    except (OverflowError, ValueError):
        raise DomainError("cannot round a non-finite value") from None
    sign, e, F = numsys._round_parts(spec, num, den)
    shift = spec.k * e - spec.u
    if -1000 < shift < 1000:
        # power of two held exactly by a double; the product is exact
        return REF(sign * F) * (2.0 ** shift)
    return np.ldexp(REF(sign * F), shift)


def _log_round_scalar(spec: LogSystemSpec, x) -> int:
    x = REF(x)
    if x == 0:
        return 0
    if not np.isfinite(x):
        raise DomainError("cannot round a non-finite value")
    lam = int(np.rint(REF(spec.a) * np.log2(abs(x)) + REF(spec.b)))
    if lam > spec.lam_max:
        raise numsys.Overflow(f"|x| above f_max of {spec}")
    if lam < 1:
        raise numsys.Underflow(f"|x| below f_min of {spec}")
    return -lam if x < 0 else lam


def _log_value_scalar(spec: LogSystemSpec, lam: int) -> np.longdouble:
    if lam == 0:
        return REF(0)
    mag = np.exp2(REF(abs(lam) - spec.b) / REF(spec.a))
    return -mag if lam < 0 else mag


@dataclass(frozen=True, eq=False)
class LogContext(ArithContext):
    """Values are signed codes; ordering of codes is ordering of values."""

    spec: LogSystemSpec
    name: str = ""

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", self.spec.name or str(self.spec))

    def round(self, x):
        if isinstance(x, np.ndarray) and x.ndim:
            return numsys.log_round(self.spec, x)
        return _log_round_scalar(self.spec, x)

    def value(self, v):
        if isinstance(v, np.ndarray) and v.ndim:
            return numsys.log_value(self.spec, v)
        return _log_value_scalar(self.spec, int(v))

    def abs(self, a):
        return np.abs(a) if isinstance(a, np.ndarray) else abs(a)


@dataclass(frozen=True, eq=False)
class RefContext(ArithContext):
    name: str = "ref"

    def round(self, x):
        if isinstance(x, np.ndarray) and x.ndim:
            return np.asarray(x, dtype=REF)
        return REF(x)

    def value(self, v):
        return v


def context_for(spec, name: str = "") -> ArithContext:
    if isinstance(spec, SystemSpec):
        return FpContext(spec, name or spec.name)
    if isinstance(spec, LogSystemSpec):
        return LogContext(spec, name or spec.name)
    if spec is None:
        return RefContext()
    raise TypeError(f"no arithmetic context for {spec!r}")


def sim_add(ctx: ArithContext, a, b):
    return ctx.add(a, b)


def sim_sub(ctx: ArithContext, a, b):
    return ctx.sub(a, b)


def sim_mul(ctx: ArithContext, a, b):
    return ctx.mul(a, b)


def sim_div(ctx: ArithContext, a, b):
    return ctx.div(a, b)


def sim_sqrt(ctx: ArithContext, a):
    return ctx.sqrt(a)


def sim_abs(ctx: ArithContext, a):
    return ctx.abs(a)


def sim_neg(ctx: ArithContext, a):
    return ctx.neg(a)


def sim_cmp(ctx: ArithContext, a, b) -> int:
    """-1, 0 or +1 as ``a`` is below, equal to or above ``b`` (scalars)."""
    if ctx.lt(a, b):
        return -1
    if ctx.lt(b, a):
        return 1
    return 0
