"""Brute-force oracles over small floating-point systems."""

from __future__ import annotations


import numpy as np

from radixlab.numsys import RoundingMode, SystemSpec

MODES = list(RoundingMode)


def small_specs(u_max: int = 8, k_max: int = 4, e_min: int = -3, e_max: int = 2):
    """Every (k, u, p) with u <= u_max, on a short exponent range."""
    out = []
    for k in range(1, k_max + 1):
        for u in range(k, u_max + 1):
            for p in ((1, 2) if k == 1 else (1,)):
                out.append(SystemSpec(k=k, u=u, p=p, e_min=e_min, e_max=e_max))
    return out


def all_values(spec: SystemSpec) -> np.ndarray:
    """All representable values (both signs and zero), ascending.

    Small systems only: every value is an exact double.
    """
    F = np.arange(1 << (spec.u - spec.k), 1 << spec.u, dtype=np.float64)
    pos = np.concatenate([np.ldexp(F, spec.k * e - spec.u)
                          for e in range(spec.e_min + 1, spec.e_max + 1)])
    return np.concatenate([-pos[::-1], [0.0], pos])


def grid(spec: SystemSpec, sub: int = 8, signed: bool = True) -> np.ndarray:
    """Points every ulp/sub across all binades but the top one.

    Contains every representable value of those binades, every exact tie and
    points in between; rounding never overflows.
    """
    pts = []
    for e in range(spec.e_min + 1, spec.e_max):
        j = np.arange(sub << (spec.u - spec.k), sub << spec.u, dtype=np.float64)
        pts.append(np.ldexp(j, spec.k * e - spec.u - int(np.log2(sub))))
    # the first point of the top binade closes the last gap
    pts.append([np.ldexp(1.0, spec.k * (spec.e_max - 1))])
    x = np.concatenate(pts)
    return np.concatenate([-x[::-1], x]) if signed else x


def binade_ties(spec: SystemSpec, e: int) -> np.ndarray:
    """Exact midpoints between neighbours whose lower member lies in binade ``e``."""
    F = np.arange(1 << (spec.u - spec.k), 1 << spec.u, dtype=np.float64)
    return np.ldexp(2 * F + 1, spec.k * e - spec.u - 1)

