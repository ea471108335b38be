"""Blind-pair identification and per-pair coverability classes."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Iterable

import numpy as np

from .environment import Environment, Obstacle, cell_center, segments_hit_any, within
from .errors import InvalidDevice, PairOutOfRange, ValidationError


class DevicePair(NamedTuple):
    """Unordered device pair, stored with the smaller cell id first."""

    u: int
    v: int

    @classmethod
    def of(cls, a: int, b: int) -> "DevicePair":
        a, b = int(a), int(b)
        if a == b:
            raise InvalidDevice(f"pair endpoints coincide: ({a}, {b})")
        return cls(a, b) if a < b else cls(b, a)


class PairClass(enum.Enum):
    DIRECT = "Direct"
    SINGLE_COVERABLE = "SingleCoverable"
    DOUBLE_ONLY = "DoubleOnly"
    TOTALLY_BLIND = "TotallyBlind"


@dataclass(frozen=True)
class BlindPairSet:
    pairs: tuple  # canonical order
    per_obstacle: dict  # obstacle id -> frozenset of DevicePair

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __contains__(self, pair):
        return pair in self._members

    @cached_property
    def _members(self):
        return frozenset(self.pairs)


def canonical_pairs(pairs: Iterable) -> list[DevicePair]:
    """Canonicalise, de-duplicate and sort pairs by (min, max) cell id."""
    return sorted({DevicePair.of(*p) for p in pairs})


def validate_pairs(env: Environment, pairs: Iterable, r: float) -> list[DevicePair]:
    out = canonical_pairs(pairs)
    for p in out:
        for c in p:
            if not env.is_free(c):
                raise InvalidDevice(f"device cell {c} of pair {tuple(p)} is blocked")
        if not within(cell_center(env, p.u), cell_center(env, p.v), r):
            raise PairOutOfRange(f"pair {tuple(p)} is farther apart than r={r}")
    return out


def bbox_candidates(obstacle: Obstacle, pairs: Iterable, env: Environment, r: float) -> list[DevicePair]:
    """Pairs whose endpoints both lie in the obstacle bbox inflated by ``r``."""
    if not r > 0:
        raise ValidationError("coverage radius must be positive")
    x0, x1, y0, y1 = obstacle.bbox
    out = []
    for p in pairs:
        pts = (cell_center(env, p[0]), cell_center(env, p[1]))
        if all(x0 - r <= q.x <= x1 + r and y0 - r <= q.y <= y1 + r for q in pts):
            out.append(p)
    return out


def identify_blind_pairs(env: Environment, pairs: Iterable, r: float) -> BlindPairSet:
    """Per-obstacle bbox filter followed by exact outline intersection tests."""
    pairs = validate_pairs(env, pairs, r)
    found = set()
    per_obstacle = {}
    for obs in env.obstacles:
        cand = bbox_candidates(obs, pairs, env, r)
        hits = set()
        if cand:
            a = np.array([_lattice(env, p.u) for p in cand], dtype=np.int64)
            b = np.array([_lattice(env, p.v) for p in cand], dtype=np.int64)
            mask = segments_hit_any(a, b, obs.lattice)
            hits = {p for p, m in zip(cand, mask) if m}
        per_obstacle[obs.id] = frozenset(hits)
        found |= hits
    return BlindPairSet(tuple(sorted(found)), per_obstacle)


def _lattice(env: Environment, cell: int) -> tuple[int, int]:
    r, k = env.grid.row_col(cell)
    return 2 * (k - 1), 2 * (r - 1)


def classify_pair(env: Environment, pair, r: float) -> PairClass:
    """Direct, single-coverable, double-only or totally blind."""
    (pair,) = validate_pairs(env, [pair], r)
    A = env.los_matrix(r)
    idx = env.free_index
    u, v = idx[pair.u], idx[pair.v]
    if A[u, v]:
        return PairClass.DIRECT
    if np.any(A[u] & A[v]):
        return PairClass.SINGLE_COVERABLE
    # chains u -> z_i -> z_j -> v with z_i != z_j
    mid = A.astype(np.int64)
    np.fill_diagonal(mid, 0)
    reach = A[u].astype(np.int64) @ mid
    if np.any((reach > 0) & A[v]):
        return PairClass.DOUBLE_ONLY
    return PairClass.TOTALLY_BLIND
