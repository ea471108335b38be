import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ris_planner.blind_pairs import identify_blind_pairs
from ris_planner.environment import GridSpec
from ris_planner.errors import GenerationFailed, ValidationError
from ris_planner.generate import candidate_pairs, generate_scenario, place_obstacles, sample_pairs

GRID = GridSpec(12, 12, 10.0)


def test_same_seed_same_scenario():
    a = generate_scenario(GRID, 8, 20, 40.0, seed=5)
    assert a == generate_scenario(GRID, 8, 20, 40.0, seed=5)
    assert a != generate_scenario(GRID, 8, 20, 40.0, seed=6)


def test_no_obstacles_no_blind_pairs():
    sc = generate_scenario(GRID, 0, 30, 40.0, seed=1)
    assert sc.obstacle_cells == ()
    assert identify_blind_pairs(sc.env, sc.device_pairs, sc.coverage_radius_m).pairs == ()


@pytest.mark.parametrize("seed", range(100))
def test_pairs_within_radius(seed):
    r = 35.0
    sc = generate_scenario(GRID, 10, 25, r, seed=seed)
    assert len(sc.device_pairs) == 25 and len(set(sc.device_pairs)) == 25
    blocked = set(sc.obstacle_cells)
    for p in sc.device_pairs:
        assert p.u not in blocked and p.v not in blocked
        assert math.dist(sc.env.center(p.u), sc.env.center(p.v)) <= r


def test_obstacles_are_separate_rectangles():
    rng = np.random.default_rng(0)
    blocks = place_obstacles(GRID, 15, rng)
    assert len(blocks) == 15
    for b in blocks:
        rows = {GRID.row_col(c)[0] for c in b}
        cols = {GRID.row_col(c)[1] for c in b}
        assert len(b) == len(rows) * len(cols) <= 4
    sc = generate_scenario(GRID, 15, 5, 30.0, seed=0)
    assert len(sc.env.obstacles) == 15


def test_obstacle_sequence_is_nested():
    a = generate_scenario(GRID, 4, 10, 30.0, seed=9)
    b = generate_scenario(GRID, 8, 10, 30.0, seed=9)
    assert set(a.obstacle_cells) <= set(b.obstacle_cells)


def test_candidate_pairs_brute_force():
    g = GridSpec(4, 5, 2.0)
    got = {tuple(x) for x in candidate_pairs(g, 4.5).tolist()}
    want = set()
    for u in range(1, 21):
        for v in range(u + 1, 21):
            (ru, cu), (rv, cv) = g.row_col(u), g.row_col(v)
            if math.hypot(ru - rv, cu - cv) * 2.0 <= 4.5:
                want.add((u, v))
    assert got == want


def test_infeasible_requests():
    with pytest.raises(GenerationFailed):
        generate_scenario(GridSpec(2, 2), 0, 10, 5.0, seed=0)
    with pytest.raises(GenerationFailed):
        generate_scenario(GridSpec(3, 3), 9, 1, 5.0, seed=0, retries=2)
    with pytest.raises(ValidationError):
        generate_scenario(GRID, 1, 1, 10.0, seed=0, pair_radius=20.0)
    with pytest.raises(ValidationError):
        generate_scenario(GRID, -1, 1, 10.0, seed=0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**63), st.integers(1, 30))
def test_pair_sampler_prefix_property(seed, n):
    # asking for more pairs extends the list rather than redrawing it
    rng1, rng2 = np.random.default_rng(seed), np.random.default_rng(seed)
    a = sample_pairs(GRID, {5, 6}, n, 30.0, rng1)
    b = sample_pairs(GRID, {5, 6}, n + 5, 30.0, rng2)
    assert b[:n] == a
