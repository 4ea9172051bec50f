"""Deterministic, order-independent random streams.

Every draw is a pure function of (master_seed, purpose, entity, date,
draw index).  Nothing is sequential: consuming a draw never changes any
other draw, so simulations that branch differently (e.g. under different
constraint modes) still see identical randomness for the events they
share.  This is what makes mode comparisons under one seed meaningful.

The generator is a keyed 64-bit mixing hash (splitmix-style finalizer,
two absorption rounds).  It is implemented twice with identical
semantics: a scalar path on Python ints and a vectorized path on uint64
numpy arrays.  Both are exercised against each other in the test suite.
"""

from __future__ import annotations

import datetime as dt
import hashlib
from typing import Union

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_C_DATE = 0x9E3779B97F4A7C15
_C_ENTITY = 0xD1342543DE82EF95
_C_INDEX = 0xDA942042E4DD58B5
_INV_2_53 = 2.0 ** -53

_M1_U = np.uint64(_M1)
_M2_U = np.uint64(_M2)
_C_ENTITY_U = np.uint64(_C_ENTITY)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)

DateLike = Union[dt.date, int]

#: Canonical purpose families.  Streams may qualify these with a suffix,
#: e.g. "incidence:measles", to keep draws for distinct diseases apart.
PURPOSES = ("incidence", "progression", "seeking", "consumables", "treatment", "demography")


def _ordinal(date: DateLike) -> int:
    return date.toordinal() if isinstance(date, dt.date) else int(date)


def _mix(h: int) -> int:
    h ^= h >> 30
    h = (h * _M1) & _MASK64
    h ^= h >> 27
    h = (h * _M2) & _MASK64
    return h ^ (h >> 31)


def _mix_arr(h: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        h ^= h >> _S30
        h *= _M1_U
        h ^= h >> _S27
        h *= _M2_U
        h ^= h >> _S31
    return h


def _purpose_code(purpose: str) -> int:
    digest = hashlib.blake2b(purpose.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def stable_code(label: str) -> int:
    """Platform-stable 64-bit code for a string label.

    Used wherever a label has to act as a draw index (e.g. consumable
    item names); the built-in hash() is salted per process and would
    break reproducibility.
    """
    return _purpose_code(label)


class RngStream:
    """One purpose-labelled stream under a master seed.

    A stream never holds mutable state; it only caches the derived key.
    """

    __slots__ = ("master_seed", "purpose", "_key")

    def __init__(self, master_seed: int, purpose: str):
        self.master_seed = master_seed & _MASK64
        self.purpose = purpose
        self._key = _mix(_mix(self.master_seed ^ _C_DATE) ^ _purpose_code(purpose))

    def _base(self, date: DateLike) -> int:
        return _mix(self._key ^ ((_ordinal(date) * _C_DATE) & _MASK64))

    def uniform(self, entity: int, date: DateLike, index: int = 0) -> float:
        """Uniform in [0, 1) for one (entity, date, draw index)."""
        h = self._base(date)
        h ^= (entity * _C_ENTITY) & _MASK64
        h ^= (index * _C_INDEX) & _MASK64
        return (_mix(h) >> 11) * _INV_2_53

    def uniforms(self, n: int, date: DateLike, index: int = 0) -> np.ndarray:
        """Uniforms for entities 0..n-1 on one date (entity i at slot i)."""
        return self.uniforms_for(np.arange(n, dtype=np.uint64), date, index)

    def uniforms_for(self, entities: np.ndarray, date: DateLike, index: int = 0) -> np.ndarray:
        """Uniforms for an explicit array of entity ids on one date."""
        h = entities.astype(np.uint64, copy=True)
        with np.errstate(over="ignore"):
            h *= _C_ENTITY_U
            h ^= np.uint64(self._base(date) ^ ((index * _C_INDEX) & _MASK64))
        h = _mix_arr(h)
        return (h >> _S11) * _INV_2_53


def draw_uniform(stream: RngStream, entity: int, date: DateLike, index: int = 0) -> float:
    """Draw from a fully keyed stream; identical keys always give identical values."""
    return stream.uniform(entity, date, index)


class RngRegistry:
    """Per-run factory handing out cached streams by purpose label."""

    __slots__ = ("master_seed", "_streams")

    def __init__(self, master_seed: int):
        if not 0 <= master_seed < 2 ** 64:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
        self.master_seed = master_seed
        self._streams: dict[str, RngStream] = {}

    def stream(self, purpose: str) -> RngStream:
        s = self._streams.get(purpose)
        if s is None:
            s = self._streams[purpose] = RngStream(self.master_seed, purpose)
        return s
