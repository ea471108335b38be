"""Set-cover structure over free cells: LoS indicators, single and double cover sets."""

from __future__ import annotations

import numpy as np

from .blind_pairs import BlindPairSet, DevicePair
from .environment import Environment, Point, cell_center, has_los
from .errors import InvalidReflector, InvalidReflectorPair


class CoverageTables:
    """Boolean membership tables for one (environment, blind pairs, radius).

    Pairs are rows, free cells are columns (in ``env.free_cells`` order).
    ``single[b, z]`` says blind pair ``b`` is visible via cell ``z``.  Double
    reflection masks are computed on request, never fully materialised.
    """

    def __init__(self, env: Environment, blind, r: float):
        self.env = env
        self.r = float(r)
        self.pairs = tuple(blind)
        self.A = env.los_matrix(r)
        idx = env.free_index
        self.u = np.array([idx[p.u] for p in self.pairs], dtype=np.intp)
        self.v = np.array([idx[p.v] for p in self.pairs], dtype=np.intp)
        self.Au = self.A[self.u]  # (|B|, p): u -> z
        self.Av = self.A[self.v]  # (|B|, p): z -> v
        self.single = self.Au & self.Av
        self._coverable = None

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    def col(self, cell: int) -> int:
        if not self.env.is_free(cell):
            raise InvalidReflector(f"cell {cell} is blocked")
        return self.env.free_index[cell]

    def chain(self, i: int, j: int) -> np.ndarray:
        """Pairs reachable by a two-reflector chain between columns ``i`` and ``j``.

        Either orientation counts: u -> i -> j -> v or u -> j -> i -> v.
        """
        if i == j or not self.A[i, j]:
            return np.zeros(self.n_pairs, dtype=bool)
        return (self.Au[:, i] & self.Av[:, j]) | (self.Au[:, j] & self.Av[:, i])

    def chain_with(self, s: int) -> np.ndarray:
        """(|B|, p) mask: pairs reachable by chaining column ``s`` with each column."""
        link = self.A[s].copy()
        link[s] = False
        out = (self.Au[:, s, None] & self.Av) | (self.Au & self.Av[:, s, None])
        out &= link[None, :]
        return out

    def double(self, i: int, j: int) -> np.ndarray:
        """D_ij mask: chain-coverable pairs not covered by i or j alone."""
        return self.chain(i, j) & ~self.single[:, i] & ~self.single[:, j]

    def combined(self, i: int, j: int) -> np.ndarray:
        return self.single[:, i] | self.single[:, j] | self.chain(i, j)

    @property
    def coverable(self) -> np.ndarray:
        """Mask of pairs coverable by some single or double reflection."""
        if self._coverable is None:
            cov = self.single.any(axis=1)
            mid = self.A.astype(np.int64)
            np.fill_diagonal(mid, 0)
            reach = self.Au.astype(np.int64) @ mid  # u -> z_i -> z_j counts
            cov |= ((reach > 0) & self.Av).any(axis=1)
            self._coverable = cov
        return self._coverable

    def to_pairs(self, mask) -> frozenset:
        return frozenset(p for p, m in zip(self.pairs, mask) if m)


def _location(env, loc):
    if isinstance(loc, (int, np.integer)) and not isinstance(loc, bool):
        return cell_center(env, loc)
    return Point(*loc)


def los_indicator(env: Environment, i, j, r: float) -> int:
    """1 iff locations ``i`` and ``j`` (cell ids or points) are within ``r`` with LoS."""
    return int(has_los(env, _location(env, i), _location(env, j), r))


def _blind_tuple(B) -> tuple:
    if isinstance(B, BlindPairSet):
        return B.pairs
    return tuple(sorted(DevicePair.of(*p) for p in B))


def single_cover_set(env: Environment, i: int, B, r: float) -> frozenset:
    t = CoverageTables(env, _blind_tuple(B), r)
    return t.to_pairs(t.single[:, t.col(i)])


def double_cover_set(env: Environment, i: int, j: int, B, r: float) -> frozenset:
    if i == j:
        raise InvalidReflectorPair(f"double reflection needs two distinct cells, got {i} twice")
    t = CoverageTables(env, _blind_tuple(B), r)
    return t.to_pairs(t.double(t.col(i), t.col(j)))


def combined_cover(env: Environment, i: int, j: int, B, r: float) -> frozenset:
    if i == j:
        raise InvalidReflectorPair(f"double reflection needs two distinct cells, got {i} twice")
    t = CoverageTables(env, _blind_tuple(B), r)
    return t.to_pairs(t.combined(t.col(i), t.col(j)))


def coverable_universe(env: Environment, B, r: float) -> tuple:
    """Blind pairs that are not totally blind, in canonical order."""
    t = CoverageTables(env, _blind_tuple(B), r)
    return tuple(p for p, m in zip(t.pairs, t.coverable) if m)
