"""Floating-point number systems with base 2**k, and the logarithmic system.

A nonzero value of a :class:`SystemSpec` is ``sign * F * 2**(k*e - u)`` with an
integer significand ``2**(u-k) <= F < 2**u`` (at least one of the leading ``k``
fraction bits set) and an exponent ``e_min < e <= e_max``.

Two rounding routes are provided and kept deliberately independent:

* :func:`round_ref` works on whole numpy arrays of reference reals with
  ``frexp``/``ldexp``/``floor`` and is what the simulations use;
* :func:`fl` decomposes a single value exactly with Python integers and
  returns a structured :class:`FpValue`.

The test-suite checks each route against the other.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .refarith import REF, DomainError, as_fraction

__all__ = [
    "RoundingMode", "SystemSpec", "FpValue", "LogSystemSpec", "LogValue",
    "InvalidSpec", "Overflow", "Underflow",
    "make_system", "standard_systems", "system_by_name", "parse_system",
    "value_of", "fl", "round_ref", "f_max", "f_min", "range_bits",
    "fl_log", "log_round", "log_value", "log_f_max", "log_f_min", "log_range",
]


class InvalidSpec(ValueError):
    """A system description violates one of its structural constraints."""


class Overflow(ArithmeticError):
    pass


class Underflow(ArithmeticError):
    pass


class RoundingMode(str, enum.Enum):
    RSTAR = "rstar"
    TRUNCATE = "trunc"              # toward zero
    TRUNCATE_DOWN = "floor"         # toward -infinity
    VON_NEUMANN = "vonneumann"

    @classmethod
    def parse(cls, text: "str | RoundingMode") -> "RoundingMode":
        if isinstance(text, cls):
            return text
        key = text.strip().lower()
        aliases = {
            "rstar": cls.RSTAR, "r*": cls.RSTAR, "round": cls.RSTAR,
            "trunc": cls.TRUNCATE, "truncate": cls.TRUNCATE, "chop": cls.TRUNCATE,
            "floor": cls.TRUNCATE_DOWN, "down": cls.TRUNCATE_DOWN,
            "vonneumann": cls.VON_NEUMANN, "vn": cls.VON_NEUMANN, "jam": cls.VON_NEUMANN,
        }
        try:
            return aliases[key]
        except KeyError:
            raise InvalidSpec(f"unknown rounding mode {text!r}") from None


@dataclass(frozen=True)
class SystemSpec:
    k: int
    u: int
    p: int = 1
    e_min: int = -256
    e_max: int = 256
    mode: RoundingMode = RoundingMode.RSTAR
    w: int | None = None
    #: von Neumann rounding leaves exactly representable results alone
    vn_exact: bool = True
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "mode", RoundingMode.parse(self.mode))
        if self.k < 1:
            raise InvalidSpec(f"k must be positive, got {self.k}")
        if self.u < self.k:
            raise InvalidSpec(f"need u >= k, got u={self.u}, k={self.k}")
        if self.p not in (1, 2):
            raise InvalidSpec(f"p must be 1 or 2, got {self.p}")
        if self.p == 2 and self.k != 1:
            raise InvalidSpec("implicit first bit (p=2) requires base 2 (k=1)")
        if self.e_min >= self.e_max:
            raise InvalidSpec(f"need e_min < e_max, got {self.e_min} >= {self.e_max}")
        if self.w is not None:
            if self.w < 1:
                raise InvalidSpec(f"word length must be positive, got {self.w}")
            if self.word_bits > self.w:
                raise InvalidSpec(
                    f"word budget exceeded: {self.word_bits} bits needed, w={self.w}"
                )

    @property
    def beta(self) -> int:
        return 1 << self.k

    @property
    def word_bits(self) -> int:
        """Bits needed for fraction, sign and exponent."""
        exp_bits = (self.e_max - self.e_min - 1).bit_length()
        return self.u - (self.p - 1) + 1 + exp_bits

    @property
    def nominal_range(self) -> int:
        return self.k * (self.e_max - self.e_min)

    def with_mode(self, mode: RoundingMode | str, name: str = "") -> "SystemSpec":
        return replace(self, mode=RoundingMode.parse(mode), name=name or self.name)

    def __str__(self) -> str:
        text = (f"k={self.k},u={self.u},p={self.p},emin={self.e_min},"
                f"emax={self.e_max},mode={self.mode.value}")
        if self.w is not None:
            text += f",w={self.w}"
        return text


@dataclass(frozen=True)
class FpValue:
    """``sign * F * 2**(k*e - u)``; ``F == 0`` is the zero of the system."""

    spec: SystemSpec
    sign: int
    e: int
    F: int

    def __post_init__(self):
        if self.F == 0:
            return
        s = self.spec
        if self.sign not in (-1, 1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if not (1 << (s.u - s.k)) <= self.F < (1 << s.u):
            raise ValueError(f"significand {self.F} not normalized for u={s.u}, k={s.k}")
        if not s.e_min < self.e <= s.e_max:
            raise ValueError(f"exponent {self.e} outside ({s.e_min}, {s.e_max}]")

    @property
    def is_zero(self) -> bool:
        return self.F == 0

    def __neg__(self) -> "FpValue":
        if self.F == 0:
            return self
        return FpValue(self.spec, -self.sign, self.e, self.F)

    def as_fraction(self) -> Fraction:
        s = self.spec
        shift = s.k * self.e - s.u
        mag = Fraction(self.F) * (Fraction(2) ** shift)
        return mag if self.sign > 0 else -mag


def zero(spec: SystemSpec) -> FpValue:
    return FpValue(spec, 1, 0, 0)


def make_system(k: int, u: int, p: int, e_min: int, e_max: int,
                mode: RoundingMode | str = RoundingMode.RSTAR,
                w: int | None = None, name: str = "") -> SystemSpec:
    return SystemSpec(k=k, u=u, p=p, e_min=e_min, e_max=e_max,
                      mode=RoundingMode.parse(mode), w=w, name=name)


def value_of(v: FpValue) -> np.longdouble:
    if v.F == 0:
        return REF(0)
    s = v.spec
    return REF(v.sign) * np.ldexp(REF(v.F), s.k * v.e - s.u)


def f_max(spec: SystemSpec) -> np.longdouble:
    return np.ldexp(REF((1 << spec.u) - 1), spec.k * spec.e_max - spec.u)


def f_min(spec: SystemSpec) -> np.longdouble:
    return np.ldexp(REF(1), spec.k * spec.e_min)


def range_bits(spec: SystemSpec, exact: bool = False):
    """Range ``log2(f_max/f_min)``.

    The nominal value ``k*(e_max - e_min)`` drops the ``1 - 2**-u`` factor of
    ``f_max``; ``exact=True`` keeps it.
    """
    if not exact:
        return spec.nominal_range
    return REF(spec.nominal_range) + np.log2(REF(1) - np.ldexp(REF(1), -spec.u))


# -- rounding ---------------------------------------------------------------

def _round_parts(spec: SystemSpec, num: int, den: int) -> tuple[int, int, int]:
    """Round the exact rational ``num/den`` into ``spec``; return (sign, e, F)."""
    if num == 0:
        return 1, 0, 0
    sign = -1 if num < 0 else 1
    num = abs(num)
    k, u = spec.k, spec.u
    # binary exponent ex with 2**(ex-1) <= x < 2**ex
    ex = num.bit_length() - den.bit_length()
    if ex >= 0:
        ge = num >= (den << ex)
    else:
        ge = (num << -ex) >= den
    if ge:
        ex += 1
    e = -((-ex) // k)
    if e <= spec.e_min:
        raise Underflow(f"|x| below f_min of {spec}")
    shift = u - k * e
    if shift >= 0:
        num <<= shift
    else:
        den <<= -shift
    F, rem = divmod(num, den)
    mode = spec.mode
    if mode is RoundingMode.RSTAR:
        twice = 2 * rem
        if twice > den or (twice == den and F % 2 == 0):
            F += 1
    elif mode is RoundingMode.TRUNCATE_DOWN:
        if sign < 0 and rem:
            F += 1
    elif mode is RoundingMode.VON_NEUMANN:
        if rem or not spec.vn_exact:
            F |= 1
    if F >= (1 << u):
        F >>= k
        e += 1
    if e > spec.e_max:
        raise Overflow(f"|x| above f_max of {spec}")
    return sign, e, F


def fl(spec: SystemSpec, x) -> FpValue:
    """Round one reference real (or exact rational) into ``spec``."""
    if isinstance(x, Fraction):
        num, den = x.numerator, x.denominator
    elif isinstance(x, int):
        num, den = x, 1
    else:
        x = REF(x)
        if not np.isfinite(x):
            raise DomainError("cannot round a non-finite value")
        num, den = x.as_integer_ratio()
    sign, e, F = _round_parts(spec, num, den)
    return FpValue(spec, sign, e, F)


def round_ref(spec: SystemSpec, x):
    """Vectorised rounding: returns reference reals exactly representable in ``spec``."""
    x = np.asarray(x, dtype=REF)
    if not np.all(np.isfinite(x)):
        raise DomainError("cannot round a non-finite value")
    k, u = spec.k, spec.u
    ax = np.abs(x)
    nz = ax != 0
    _, ex = np.frexp(ax)
    e = -((-ex) // k)
    if np.any(nz & (e <= spec.e_min)):
        raise Underflow(f"|x| below f_min of {spec}")
    scaled = np.ldexp(ax, u - k * e)
    F = np.floor(scaled)
    r = scaled - F
    mode = spec.mode
    if mode is RoundingMode.RSTAR:
        F = F + ((r > 0.5) | ((r == 0.5) & (np.fmod(F, 2) == 0)))
    elif mode is RoundingMode.TRUNCATE_DOWN:
        F = F + ((x < 0) & (r > 0))
    elif mode is RoundingMode.VON_NEUMANN:
        jam = nz if not spec.vn_exact else (r > 0)
        F = np.where(jam & (np.fmod(F, 2) == 0), F + 1, F)
    carry = F >= np.ldexp(REF(1), u)
    if np.any(carry):
        F = np.where(carry, np.ldexp(F, -k), F)
        e = e + carry
    if np.any(nz & (e > spec.e_max)):
        raise Overflow(f"|x| above f_max of {spec}")
    out = np.ldexp(F, k * e - u)
    out = np.where(x < 0, -out, out)
    if out.ndim == 0:
        return out[()]
    return out


def decompose(spec: SystemSpec, x) -> FpValue:
    """Structured form of a value already representable in ``spec``."""
    v = fl(spec, x)
    if value_of(v) != REF(x):
        raise ValueError(f"{x!r} is not representable in {spec}")
    return v


# -- logarithmic system -----------------------------------------------------

@dataclass(frozen=True)
class LogSystemSpec:
    """Nonzero values ``+-2**((lam - b)/a)`` for integer codes ``1 <= lam < 2**(w-1)``."""

    a: int
    b: int
    w: int = 32
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.a < 1:
            raise InvalidSpec(f"a must be positive, got {self.a}")
        if self.w < 2:
            raise InvalidSpec(f"word length too small: {self.w}")
        if not 1 <= self.b <= self.lam_max:
            raise InvalidSpec(f"need 1 <= b <= 2**(w-1)-1, got b={self.b}")

    @property
    def lam_max(self) -> int:
        return (1 << (self.w - 1)) - 1

    def __str__(self) -> str:
        return f"log:a={self.a},b={self.b},w={self.w}"


@dataclass(frozen=True)
class LogValue:
    spec: LogSystemSpec
    lam: int

    @property
    def is_zero(self) -> bool:
        return self.lam == 0


def log_round(lspec: LogSystemSpec, x):
    """Vectorised encoding: nearest code (ties to even), signed like ``x``."""
    x = np.asarray(x, dtype=REF)
    if not np.all(np.isfinite(x)):
        raise DomainError("cannot round a non-finite value")
    ax = np.abs(x)
    nz = ax != 0
    with np.errstate(divide="ignore"):
        t = REF(lspec.a) * np.log2(np.where(nz, ax, REF(1))) + REF(lspec.b)
    lam = np.rint(t)
    if np.any(nz & (lam > lspec.lam_max)):
        raise Overflow(f"|x| above f_max of {lspec}")
    if np.any(nz & (lam < 1)):
        raise Underflow(f"|x| below f_min of {lspec}")
    lam = np.where(nz, lam, 0).astype(np.int64)
    lam = np.where(x < 0, -lam, lam)
    if lam.ndim == 0:
        return int(lam)
    return lam


def log_value(lspec: LogSystemSpec, lam):
    """Reference value of code(s) ``lam``."""
    lam = np.asarray(lam, dtype=np.int64)
    mag = np.exp2((REF(1) * (np.abs(lam) - lspec.b)) / REF(lspec.a))
    out = np.where(lam == 0, REF(0), np.where(lam < 0, -mag, mag))
    if out.ndim == 0:
        return out[()]
    return out


def fl_log(lspec: LogSystemSpec, x) -> LogValue:
    return LogValue(lspec, log_round(lspec, REF(x)))


def log_f_max(lspec: LogSystemSpec) -> np.longdouble:
    return np.exp2(REF(lspec.lam_max - lspec.b) / REF(lspec.a))


def log_f_min(lspec: LogSystemSpec) -> np.longdouble:
    return np.exp2(REF(1 - lspec.b) / REF(lspec.a))


def log_range(lspec: LogSystemSpec) -> np.longdouble:
    return REF(lspec.lam_max - 1) / REF(lspec.a)


# -- catalogue and textual syntax -------------------------------------------

#: systems of the comparison study: word length 32, range 512 bits
_STANDARD = (
    ("S1", dict(k=1, u=23, p=2)),
    ("S2", dict(k=2, u=23, p=1)),
    ("S3", dict(k=1, u=22, p=1)),
    ("S4", dict(k=4, u=24, p=1)),
    ("S4T", dict(k=4, u=24, p=1, mode=RoundingMode.TRUNCATE)),
    ("S5", dict(k=8, u=25, p=1)),
)


def _symmetric_range(k: int) -> tuple[int, int]:
    if 256 % k:
        raise InvalidSpec(f"default exponent range needs k | 256, got k={k}")
    return -256 // k, 256 // k


def standard_systems() -> list[tuple[str, SystemSpec | LogSystemSpec]]:
    systems: list[tuple[str, SystemSpec | LogSystemSpec]] = [
        ("S0", LogSystemSpec(a=1 << 22, b=1 << 30, w=32, name="S0")),
    ]
    for name, params in _STANDARD:
        lo, hi = _symmetric_range(params["k"])
        systems.append((name, SystemSpec(e_min=lo, e_max=hi, w=32, name=name, **params)))
    return systems


def system_by_name(name: str) -> SystemSpec | LogSystemSpec:
    for key, spec in standard_systems():
        if key.upper() == name.strip().upper():
            return spec
    raise InvalidSpec(f"unknown system name {name!r}")


_KV = re.compile(r"^\s*([A-Za-z_]+)\s*=\s*([^,;]+?)\s*$")


def _pairs(text: str) -> dict[str, str]:
    out = {}
    for part in text.split(","):
        if not part.strip():
            continue
        m = _KV.match(part)
        if not m:
            raise InvalidSpec(f"malformed system parameter {part!r}")
        out[m.group(1).lower()] = m.group(2)
    return out


def parse_system(text: str) -> SystemSpec | LogSystemSpec:
    """Parse ``S4``, ``k=4,u=24,p=1,emin=-64,emax=64,mode=rstar`` or ``log:a=..,b=..,w=..``."""
    text = text.strip()
    if "=" not in text:
        return system_by_name(text)
    try:
        if text.lower().startswith("log:"):
            kv = _pairs(text[4:])
            unknown = set(kv) - {"a", "b", "w"}
            if unknown:
                raise InvalidSpec(f"unknown log-system parameters {sorted(unknown)}")
            return LogSystemSpec(a=int(kv["a"]), b=int(kv["b"]), w=int(kv.get("w", 32)),
                                 name=text)
        kv = _pairs(text)
        unknown = set(kv) - {"k", "u", "p", "emin", "emax", "mode", "w", "vnexact"}
        if unknown:
            raise InvalidSpec(f"unknown system parameters {sorted(unknown)}")
        k = int(kv["k"])
        if "emin" in kv or "emax" in kv:
            lo, hi = int(kv["emin"]), int(kv["emax"])
        else:
            lo, hi = _symmetric_range(k)
        return SystemSpec(
            k=k, u=int(kv["u"]), p=int(kv.get("p", 1)), e_min=lo, e_max=hi,
            mode=RoundingMode.parse(kv.get("mode", "rstar")),
            w=int(kv["w"]) if "w" in kv else None,
            vn_exact=kv.get("vnexact", "1").lower() not in ("0", "false", "no"),
            name=text,
        )
    except KeyError as exc:
        raise InvalidSpec(f"missing system parameter {exc.args[0]!r} in {text!r}") from None
    except ValueError as exc:
        if isinstance(exc, InvalidSpec):
            raise
        raise InvalidSpec(f"bad value in {text!r}: {exc}") from None


def split_system_list(text: str) -> list[str]:
    """Split a comma list whose items may themselves be comma-separated specs."""
    items: list[str] = []
    for chunk in text.split(";"):
        for tok in chunk.split(","):
            tok = tok.strip()
            if not tok:
                continue
            low = tok.lower()
            if "=" not in tok or low.startswith("log:") or low.startswith("k="):
                items.append(tok)
            elif items and "=" in items[-1]:
                items[-1] += "," + tok
            else:
                raise InvalidSpec(f"dangling system parameter {tok!r}")
    return items


def spec_value_exact(spec: SystemSpec, x) -> bool:
    """True when reference real ``x`` is exactly representable in ``spec``."""
    try:
        v = fl(spec, x)
    except (Overflow, Underflow):
        return False
    return v.as_fraction() == as_fraction(x)
