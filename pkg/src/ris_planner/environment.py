"""Grid world geometry: cells, obstacle outlines and line-of-sight tests.

Cells are numbered 1..rows*cols row-major from the top-left.  The centre of
cell 1 is the origin, x grows to the right and y grows downward, one grid
unit is ``cell_size`` metres.

Intersection tests are exact.  Internally every obstacle outline lives on a
"doubled" integer lattice (cell centres at even coordinates, cell corners at
odd ones) so tangencies at obstacle corners are detected without any
epsilon.  Closed sets are used throughout: grazing a corner blocks LoS.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Iterable

import numpy as np

from .errors import InvalidCell, InvalidGrid, InvalidReflector, ValidationError

_SNAP_DENOMINATOR = 10**9
_CHUNK = 1 << 21


@dataclass(frozen=True)
class GridSpec:
    rows: int
    cols: int
    cell_size: float = 1.0

    def __post_init__(self):
        for name in ("rows", "cols"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise InvalidGrid(f"{name} must be an integer, got {value!r}")
            if value < 1:
                raise InvalidGrid(f"{name} must be >= 1, got {value}")
        cs = self.cell_size
        if not (isinstance(cs, (int, float)) and math.isfinite(cs) and cs > 0):
            raise InvalidGrid(f"cell_size must be a positive number, got {cs!r}")

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    def row_col(self, cell: int) -> tuple[int, int]:
        """1-based (row, col) of ``cell``."""
        if isinstance(cell, bool) or not isinstance(cell, (int, np.integer)):
            raise InvalidCell(f"cell id must be an integer, got {cell!r}")
        if not 1 <= cell <= self.n_cells:
            raise InvalidCell(f"cell {cell} outside 1..{self.n_cells}")
        r, k = divmod(int(cell) - 1, self.cols)
        return r + 1, k + 1

    def cell_at(self, row: int, col: int) -> int:
        return (row - 1) * self.cols + col


class Point(NamedTuple):
    x: float
    y: float


class Segment(NamedTuple):
    a: Point
    b: Point


@dataclass(frozen=True, eq=False)
class Obstacle:
    id: int
    cells: frozenset
    boundary: tuple
    bbox: tuple  # (x_min, x_max, y_min, y_max) in metres
    lattice: np.ndarray = field(repr=False)  # (k, 4) int64 doubled-lattice segments


@dataclass(frozen=True, eq=False)
class Environment:
    grid: GridSpec
    obstacles: tuple
    free_cells: tuple
    blocked_cells: frozenset
    _los_cache: dict = field(default_factory=dict, repr=False)

    @cached_property
    def free_index(self) -> dict:
        """Map from free cell id to its position in ``free_cells``."""
        return {c: i for i, c in enumerate(self.free_cells)}

    @cached_property
    def lattice_segments(self) -> np.ndarray:
        if not self.obstacles:
            return np.zeros((0, 4), dtype=np.int64)
        return np.concatenate([o.lattice for o in self.obstacles])

    @cached_property
    def free_centers(self) -> np.ndarray:
        """(p, 2) float array of free-cell centres in metres."""
        return np.array([cell_center(self, c) for c in self.free_cells], dtype=float).reshape(-1, 2)

    @cached_property
    def free_lattice(self) -> np.ndarray:
        pts = [_cell_lattice(self.grid, c) for c in self.free_cells]
        return np.array(pts, dtype=np.int64).reshape(-1, 2)

    def is_free(self, cell: int) -> bool:
        self.grid.row_col(cell)
        return cell not in self.blocked_cells

    def center(self, cell: int) -> Point:
        return cell_center(self, cell)

    def los_matrix(self, r: float) -> np.ndarray:
        """Symmetric (p, p) boolean LoS indicator between free-cell centres.

        Entry (i, j) is true iff the centres are within ``r`` metres and
        their connecting segment touches no obstacle outline.  The diagonal
        is true.  Results are cached per radius.
        """
        key = float(r)
        cached = self._los_cache.get(key)
        if cached is not None:
            return cached
        if not r > 0:
            raise ValidationError("coverage radius must be positive")
        p = len(self.free_cells)
        out = np.zeros((p, p), dtype=bool)
        iu, ju = np.triu_indices(p, k=1)
        c = self.free_centers
        dx = c[iu, 0] - c[ju, 0]
        dy = c[iu, 1] - c[ju, 1]
        near = dx * dx + dy * dy <= key * key
        iu, ju = iu[near], ju[near]
        lat = self.free_lattice
        blocked = segments_hit_any(lat[iu], lat[ju], self.lattice_segments)
        iu, ju = iu[~blocked], ju[~blocked]
        out[iu, ju] = True
        out[ju, iu] = True
        np.fill_diagonal(out, True)
        out.setflags(write=False)
        self._los_cache[key] = out
        return out


def _cell_lattice(grid: GridSpec, cell: int) -> tuple[int, int]:
    r, k = grid.row_col(cell)
    return 2 * (k - 1), 2 * (r - 1)


def cell_center(env: Environment | GridSpec, c: int) -> Point:
    """Centre of cell ``c`` in metres."""
    grid = env.grid if isinstance(env, Environment) else env
    r, k = grid.row_col(c)
    return Point((k - 1) * grid.cell_size, (r - 1) * grid.cell_size)


def _components(grid: GridSpec, cells: Iterable[int]) -> list[list[int]]:
    remaining = set(cells)
    comps = []
    for start in sorted(remaining):
        if start not in remaining:
            continue
        remaining.discard(start)
        comp, queue = [start], deque([start])
        while queue:
            r, k = grid.row_col(queue.popleft())
            for dr, dk in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                rr, kk = r + dr, k + dk
                if 1 <= rr <= grid.rows and 1 <= kk <= grid.cols:
                    nb = grid.cell_at(rr, kk)
                    if nb in remaining:
                        remaining.discard(nb)
                        comp.append(nb)
                        queue.append(nb)
        comps.append(sorted(comp))
    return comps


def _merge_runs(runs: dict) -> list[tuple[int, int, int]]:
    merged = []
    for fixed, spans in sorted(runs.items()):
        spans.sort()
        lo, hi = spans[0]
        for a, b in spans[1:]:
            if a == hi:
                hi = b
            else:
                merged.append((fixed, lo, hi))
                lo, hi = a, b
        merged.append((fixed, lo, hi))
    return merged


def _outline(grid: GridSpec, cells: list[int]) -> np.ndarray:
    """Outline of the union of cell squares as maximal straight segments."""
    count: dict = {}
    for c in cells:
        x, y = _cell_lattice(grid, c)
        for edge in (
            (x - 1, y - 1, x + 1, y - 1),
            (x - 1, y + 1, x + 1, y + 1),
            (x - 1, y - 1, x - 1, y + 1),
            (x + 1, y - 1, x + 1, y + 1),
        ):
            count[edge] = count.get(edge, 0) + 1
    horiz: dict = {}
    vert: dict = {}
    for (x1, y1, x2, y2), n in count.items():
        if n != 1:
            continue  # shared internal edge
        if y1 == y2:
            horiz.setdefault(y1, []).append((x1, x2))
        else:
            vert.setdefault(x1, []).append((y1, y2))
    segs = [(lo, y, hi, y) for y, lo, hi in _merge_runs(horiz)]
    segs += [(x, lo, x, hi) for x, lo, hi in _merge_runs(vert)]
    return np.array(segs, dtype=np.int64).reshape(-1, 4)


def build_environment(grid: GridSpec, obstacle_cells: Iterable[int]) -> Environment:
    """Group obstacle cells into 4-connected obstacles and derive free cells."""
    if not isinstance(grid, GridSpec):
        raise InvalidGrid("grid must be a GridSpec")
    blocked = set()
    for c in obstacle_cells:
        grid.row_col(c)
        blocked.add(int(c))
    half = grid.cell_size / 2
    obstacles = []
    for oid, comp in enumerate(_components(grid, blocked), start=1):
        lat = _outline(grid, comp)
        lat.setflags(write=False)
        boundary = tuple(
            Segment(Point(x1 * half, y1 * half), Point(x2 * half, y2 * half))
            for x1, y1, x2, y2 in lat.tolist()
        )
        xs = np.concatenate([lat[:, 0], lat[:, 2]]) * half
        ys = np.concatenate([lat[:, 1], lat[:, 3]]) * half
        bbox = (float(xs.min()), float(xs.max()), float(ys.min()), float(ys.max()))
        obstacles.append(Obstacle(oid, frozenset(comp), boundary, bbox, lat))
    free = tuple(c for c in range(1, grid.n_cells + 1) if c not in blocked)
    return Environment(grid, tuple(obstacles), free, frozenset(blocked))


# -- predicates ---------------------------------------------------------------

def _orient(ax, ay, bx, by, cx, cy):
    d = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (d > 0) - (d < 0)


def _closed_intersect(p1, p2, q1, q2) -> bool:
    o1 = _orient(*p1, *p2, *q1)
    o2 = _orient(*p1, *p2, *q2)
    o3 = _orient(*q1, *q2, *p1)
    o4 = _orient(*q1, *q2, *p2)
    if o1 == o2 == o3 == o4 == 0:
        return (
            min(p1[0], p2[0]) <= max(q1[0], q2[0])
            and min(q1[0], q2[0]) <= max(p1[0], p2[0])
            and min(p1[1], p2[1]) <= max(q1[1], q2[1])
            and min(q1[1], q2[1]) <= max(p1[1], p2[1])
        )
    return o1 * o2 <= 0 and o3 * o4 <= 0


def segments_intersect(s1: Segment, s2: Segment) -> bool:
    """True iff the closed segments share at least one point (exact)."""
    p1, p2, q1, q2 = (
        (Fraction(pt[0]), Fraction(pt[1])) for pt in (s1[0], s1[1], s2[0], s2[1])
    )
    return _closed_intersect(p1, p2, q1, q2)


def segments_hit_any(p1: np.ndarray, p2: np.ndarray, segs: np.ndarray) -> np.ndarray:
    """For integer segments p1[i]-p2[i], whether each touches any of ``segs``.

    Vectorised closed-intersection test over integer coordinates; exact as
    long as coordinates stay far below 2**31.
    """
    m = len(p1)
    hit = np.zeros(m, dtype=bool)
    if m == 0 or len(segs) == 0:
        return hit
    q1 = segs[None, :, 0:2]
    q2 = segs[None, :, 2:4]
    step = max(1, _CHUNK // len(segs))
    for s in range(0, m, step):
        a = p1[s:s + step, None, :]
        b = p2[s:s + step, None, :]
        o1 = _orient_np(a, b, q1)
        o2 = _orient_np(a, b, q2)
        o3 = _orient_np(q1, q2, a)
        o4 = _orient_np(q1, q2, b)
        general = (o1 * o2 <= 0) & (o3 * o4 <= 0)
        coll = (o1 == 0) & (o2 == 0) & (o3 == 0) & (o4 == 0)
        if coll.any():
            overlap = (
                (np.minimum(a[..., 0], b[..., 0]) <= np.maximum(q1[..., 0], q2[..., 0]))
                & (np.minimum(q1[..., 0], q2[..., 0]) <= np.maximum(a[..., 0], b[..., 0]))
                & (np.minimum(a[..., 1], b[..., 1]) <= np.maximum(q1[..., 1], q2[..., 1]))
                & (np.minimum(q1[..., 1], q2[..., 1]) <= np.maximum(a[..., 1], b[..., 1]))
            )
            general &= ~coll | overlap
        hit[s:s + step] = general.any(axis=1)
    return hit


def _orient_np(a, b, c):
    d = (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])
    return np.sign(d)


def _snap(env: Environment, pt) -> tuple[Fraction, Fraction]:
    cs = Fraction(env.grid.cell_size)
    return tuple(
        (2 * Fraction(v) / cs).limit_denominator(_SNAP_DENOMINATOR) for v in (pt[0], pt[1])
    )


def within(u, v, r: float) -> bool:
    dx = u[0] - v[0]
    dy = u[1] - v[1]
    return dx * dx + dy * dy <= r * r


def has_los(env: Environment, u, v, r: float, obstacles=None) -> bool:
    """Direct LoS between points ``u`` and ``v`` (metres) within radius ``r``.

    ``obstacles`` restricts the test to a subset of outlines.
    """
    if not r > 0:
        raise ValidationError("coverage radius must be positive")
    if not within(u, v, r):
        return False
    a, b = _snap(env, u), _snap(env, v)
    for obs in env.obstacles if obstacles is None else obstacles:
        for x1, y1, x2, y2 in obs.lattice.tolist():
            if _closed_intersect(a, b, (x1, y1), (x2, y2)):
                return False
    return True


def visible_via(env: Environment, u, v, z: int, r: float) -> bool:
    """Whether a reflector at the centre of free cell ``z`` links ``u`` and ``v``."""
    if not env.is_free(z):
        raise InvalidReflector(f"cell {z} is blocked")
    c = cell_center(env, z)
    return has_los(env, u, c, r) and has_los(env, c, v, r)
