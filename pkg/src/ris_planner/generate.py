"""Seeded random scenarios: small rectangular obstacles and in-range device pairs."""

from __future__ import annotations

import numpy as np

from .blind_pairs import DevicePair
from .environment import GridSpec
from .errors import GenerationFailed, ValidationError
from .scenario import ChannelConfig, RisShape, Scenario

# (height, width) of every rectangle with 1 to 4 cells
SHAPES = ((1, 1), (1, 2), (2, 1), (1, 3), (3, 1), (2, 2), (1, 4), (4, 1))


def _streams(seed: int):
    obstacles, pairs = np.random.SeedSequence(int(seed) % 2**64).spawn(2)
    return np.random.default_rng(obstacles), np.random.default_rng(pairs)


def place_obstacles(grid: GridSpec, n_obstacles: int, rng: np.random.Generator,
                    attempts: int = 200) -> list[set]:
    """Non-touching rectangles, placed one after another from ``rng``.

    Rectangles never share an edge, so each one is its own 4-connected
    obstacle.  The first k rectangles do not depend on how many follow.
    """
    taken = np.zeros((grid.rows + 2, grid.cols + 2), dtype=bool)  # padded
    out = []
    for _ in range(n_obstacles):
        for _ in range(attempts):
            h, w = SHAPES[rng.integers(len(SHAPES))]
            if h > grid.rows or w > grid.cols:
                continue
            r0 = int(rng.integers(grid.rows - h + 1))
            c0 = int(rng.integers(grid.cols - w + 1))
            # the block plus its 4-neighbourhood must be clear
            halo = taken[r0:r0 + h + 2, c0 + 1:c0 + w + 1].any() or taken[r0 + 1:r0 + h + 1, c0:c0 + w + 2].any()
            if halo:
                continue
            taken[r0 + 1:r0 + h + 1, c0 + 1:c0 + w + 1] = True
            out.append({grid.cell_at(r0 + 1 + i, c0 + 1 + j) for i in range(h) for j in range(w)})
            break
        else:
            raise GenerationFailed(f"could not place obstacle {len(out) + 1} of {n_obstacles}")
    return out


def candidate_pairs(grid: GridSpec, r: float) -> np.ndarray:
    """(m, 2) array of all cell pairs u < v whose centres are within ``r``."""
    n = grid.n_cells
    idx = np.arange(n)
    xy = np.stack([(idx % grid.cols) * grid.cell_size, (idx // grid.cols) * grid.cell_size], axis=1)
    iu, iv = np.triu_indices(n, k=1)
    d2 = ((xy[iu] - xy[iv]) ** 2).sum(axis=1)
    keep = d2 <= r * r
    return np.stack([iu[keep] + 1, iv[keep] + 1], axis=1)


def sample_pairs(grid: GridSpec, blocked: set, n_pairs: int, r: float, rng: np.random.Generator) -> list:
    """``n_pairs`` distinct free pairs within ``r``, uniformly at random.

    Every in-range cell pair gets an i.i.d. priority from ``rng`` and the
    lowest-priority free pairs win.  Priorities ignore the obstacles, so
    adding obstacles or pairs perturbs the sample as little as possible.
    """
    cand = candidate_pairs(grid, r)
    prio = rng.random(len(cand))
    order = np.argsort(prio, kind="stable")
    blocked_mask = np.zeros(grid.n_cells + 1, dtype=bool)
    blocked_mask[list(blocked)] = True
    free = ~(blocked_mask[cand[order, 0]] | blocked_mask[cand[order, 1]])
    chosen = cand[order[free]][:n_pairs]
    if len(chosen) < n_pairs:
        raise GenerationFailed(f"only {len(chosen)} free in-range pairs available, {n_pairs} requested")
    return [DevicePair(int(u), int(v)) for u, v in chosen]


def generate_scenario(grid: GridSpec, n_obstacles: int, n_devices: int, r: float, seed: int,
                      ris: RisShape = RisShape(), channel: ChannelConfig = ChannelConfig(),
                      t_threshold=None, pair_radius=None, retries: int = 10) -> Scenario:
    """Random scenario, deterministic under ``seed``.

    ``n_devices`` counts device pairs.  Obstacles and pairs use separate
    random streams derived from ``seed``.  ``pair_radius`` (default ``r``)
    bounds pair distances, which lets callers keep one pair population while
    varying ``r`` upwards.
    """
    if n_obstacles < 0 or n_devices < 0:
        raise ValidationError("counts must be >= 0")
    if not r > 0:
        raise ValidationError("coverage radius must be positive")
    pair_radius = r if pair_radius is None else pair_radius
    if pair_radius > r:
        raise ValidationError("pair_radius must not exceed r")
    orng, prng = _streams(seed)
    last = None
    for _ in range(retries):
        try:
            blocks = place_obstacles(grid, n_obstacles, orng)
            blocked = set().union(*blocks)
            pairs = sample_pairs(grid, blocked, n_devices, pair_radius, prng)
        except GenerationFailed as e:
            last = e
            continue
        sc = Scenario(grid, tuple(sorted(blocked)), tuple(pairs), float(r), ris, channel, t_threshold, int(seed))
        return sc.validate()
    raise GenerationFailed(f"gave up after {retries} attempts: {last}")
