"""Seedable per-trial random streams and the experiment data distributions.

The generator is SplitMix64 (Steele, Lea & Flood 2014): a 64-bit Weyl
sequence with increment ``0x9E3779B97F4A7C15`` followed by the "mix13" output
function; period 2**64.  A stream's initial state is derived from the triple
``(master_seed, experiment_tag, trial_index)``:

    tag_hash = first 8 bytes (little endian) of BLAKE2b(tag)
    base     = mix64(mix64(master_seed) ^ tag_hash)
    state    = mix64(base + (trial_index + 1) * GAMMA)      (mod 2**64)

so different trial indices of one experiment get distinct initial states.
A :class:`RngStream` may hold a whole array of states (one per trial); every
draw then advances each trial's stream once, which keeps a trial's sample
path independent of how trials are batched or distributed over workers.
"""

from __future__ import annotations

import hashlib

import numpy as np

GENERATOR = "splitmix64"

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _mix64(z):
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def tag_hash(tag: str) -> int:
    return int.from_bytes(hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest(), "little")


class RngStream:
    """SplitMix64 state(s).  Single owner; not thread safe."""

    __slots__ = ("state",)

    def __init__(self, state):
        self.state = np.array(state, dtype=np.uint64)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.state.shape

    def next_u64(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            self.state = self.state + GAMMA
        return _mix64(self.state)

    def take(self, index) -> "RngStream":
        """Independent copy of the streams at ``index`` (continues their sequences)."""
        return RngStream(self.state[index].copy())


def substream(master_seed: int, experiment_tag: str, trial_index) -> RngStream:
    """Stream(s) for the given trial index (int or integer array)."""
    seed = np.uint64(int(master_seed) & _MASK64)
    base = _mix64(_mix64(seed) ^ np.uint64(tag_hash(experiment_tag)))
    idx = np.asarray(trial_index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = _mix64(base + (idx + np.uint64(1)) * GAMMA)
    return RngStream(state)


def uniform01(stream: RngStream) -> np.ndarray:
    """Uniform on [0, 1) with 53 random bits."""
    return (stream.next_u64() >> np.uint64(11)).astype(np.float64) * 2.0**-53


def uniform_sym(stream: RngStream, Z) -> np.ndarray:
    """Uniform on [-Z, Z]."""
    return np.asarray(Z, dtype=np.float64) * (2.0 * uniform01(stream) - 1.0)


def uniform_pos(stream: RngStream, Z) -> np.ndarray:
    """Uniform on [0, Z]."""
    return np.asarray(Z, dtype=np.float64) * uniform01(stream)


def scale_from_z(z):
    """``256**z``: a scale whose binary exponent is uniform on [0, 8]."""
    return np.exp2(8.0 * np.asarray(z, dtype=np.float64))


def scale_factor(stream: RngStream) -> np.ndarray:
    return scale_from_z(uniform01(stream))


def log_uniform(stream: RngStream, lo_exp: float, hi_exp: float) -> np.ndarray:
    """``2**t`` with ``t`` uniform on [lo_exp, hi_exp)."""
    return np.exp2(lo_exp + (hi_exp - lo_exp) * uniform01(stream))


def random_sign(stream: RngStream) -> np.ndarray:
    return np.where(stream.next_u64() >> np.uint64(63), -1.0, 1.0)
