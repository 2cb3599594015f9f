"""Counter-based labels: a pure function of (seed, key, layer, trial).

Every label is ``mix(key ^ stream(seed, layer, trial))`` where ``mix`` is the
SplitMix64 finalizer applied twice.  No state is carried between calls, so a
label never depends on which other labels were drawn, on patch size, or on
worker scheduling.
"""
from __future__ import annotations

import hashlib

import numpy as np

RNG_ID = "splitmix64-counter/1"

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1
_TO_UNIT = 2.0 ** -53


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _M1
    z = z ^ (z >> np.uint64(27))
    z = z * _M2
    return z ^ (z >> np.uint64(31))


def _mix_int(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_key(seed: int, layer: int, trial: int) -> int:
    z = _mix_int(int(seed) + _GOLDEN)
    z = _mix_int(z ^ (int(layer) * _GOLDEN + 0x632BE59BD9B4E019))
    return _mix_int(z ^ (int(trial) * _GOLDEN + 0x8CB92BA72F3D8DD7))


def structural_key(obj) -> int:
    """Stable 64-bit key of a structural description (tuples of ints/strings)."""
    return int.from_bytes(hashlib.blake2b(repr(obj).encode(), digest_size=8).digest(), "little")


def label_bits(keys: np.ndarray, seed: int, layer: int, trial: int) -> np.ndarray:
    """Raw 64-bit labels for an array of uint64 keys."""
    s = np.uint64(stream_key(seed, layer, trial))
    with np.errstate(over="ignore"):
        return _mix_array(_mix_array(np.asarray(keys, dtype=np.uint64) ^ s) + np.uint64(_GOLDEN))


def to_unit(bits: np.ndarray) -> np.ndarray:
    """Map raw labels into [0, 1) using the top 53 bits (order-preserving up to ties)."""
    return (bits >> np.uint64(11)).astype(np.float64) * _TO_UNIT


def seeded_label(master_seed: int, edge_key: int, layer: int, trial: int) -> float:
    """One label in [0, 1)."""
    bits = label_bits(np.array([edge_key], dtype=np.uint64), master_seed, layer, trial)
    return float(to_unit(bits)[0])
