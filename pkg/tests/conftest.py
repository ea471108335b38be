import itertools

import numpy as np
import pytest
from shapely.geometry import LineString, Point as SPoint, box
from shapely.ops import unary_union

from ris_planner.blind_pairs import identify_blind_pairs
from ris_planner.environment import GridSpec, build_environment, within

GOLDEN_OBSTACLES = {3, 10, 14}
GOLDEN_R = 10.0
# the blind pairs listed for the bundled 4x4 world
GOLDEN_BLIND = [
    (1, 4), (1, 8), (1, 11), (1, 15), (1, 16), (2, 4), (2, 7), (2, 8), (2, 13), (2, 12), (2, 15),
    (4, 5), (4, 6), (4, 7), (4, 9), (4, 13), (5, 12), (5, 11), (5, 15), (5, 16), (6, 9), (6, 11),
    (6, 13), (6, 15), (6, 16), (7, 9), (7, 13), (8, 9), (8, 13), (9, 11), (9, 12), (9, 15), (9, 16),
    (11, 13), (12, 13), (13, 15), (13, 16),
]
GOLDEN_SINGLE_UNCOVERABLE = {(4, 9), (4, 13), (9, 15), (11, 13), (12, 13), (13, 15), (13, 16)}


@pytest.fixture(scope="session")
def golden_env():
    return build_environment(GridSpec(4, 4), GOLDEN_OBSTACLES)


@pytest.fixture(scope="session")
def golden_pairs(golden_env):
    return list(itertools.combinations(golden_env.free_cells, 2))


@pytest.fixture(scope="session")
def golden_blind(golden_env, golden_pairs):
    return identify_blind_pairs(golden_env, golden_pairs, GOLDEN_R)


# -- independent geometry oracle (shapely, closed sets) --------------------------

def shapely_obstacles(env):
    g, cs = env.grid, env.grid.cell_size
    boxes = []
    for c in env.blocked_cells:
        r, k = g.row_col(c)
        x, y = (k - 1) * cs, (r - 1) * cs
        boxes.append(box(x - cs / 2, y - cs / 2, x + cs / 2, y + cs / 2))
    return unary_union(boxes) if boxes else None


def oracle_los(env, u, v, r, shape=None):
    """Closed-segment LoS between two points, checked with shapely."""
    if not within(u, v, r):
        return False
    shape = shapely_obstacles(env) if shape is None else shape
    if shape is None:
        return True
    geom = SPoint(u) if tuple(u) == tuple(v) else LineString([u, v])
    return not geom.intersects(shape)


def random_world(rng, shapes=((4, 4), (4, 5), (5, 5), (3, 6)), max_free=16):
    """Random obstacle set with at most ``max_free`` free cells."""
    while True:
        rows, cols = shapes[rng.integers(len(shapes))]
        n = rows * cols
        lo = max(2, n - max_free)
        k = int(rng.integers(lo, lo + 4))
        obs = set(rng.choice(np.arange(1, n + 1), size=min(k, n - 2), replace=False).tolist())
        env = build_environment(GridSpec(rows, cols), obs)
        if len(env.free_cells) <= max_free:
            return env


def corpus(n=200, seed=0, max_blind=30):
    """Seeded (env, blind pairs, r) instances with <= 16 free cells and <= 30 blind pairs."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        env = random_world(rng)
        r = float(rng.choice([2.0, 3.0, 10.0]))
        pairs = [p for p in itertools.combinations(env.free_cells, 2)
                 if within(env.center(p[0]), env.center(p[1]), r)]
        blind = list(identify_blind_pairs(env, pairs, r).pairs)
        if len(blind) > max_blind:
            keep = sorted(rng.choice(len(blind), max_blind, replace=False).tolist())
            blind = [blind[i] for i in keep]
        if blind:
            out.append((env, blind, r))
    return out


# -- acceptance reporting: one PASS/FAIL line per criterion ----------------------

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    ids = [m.args[0] for m in getattr(report, "criterion_marks", [])]
    for n in ids:
        _CRITERIA.setdefault(n, []).append((report.nodeid.split("::")[-1], report.passed))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rep.criterion_marks = list(item.iter_markers("criterion"))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        parts = _CRITERIA[n]
        ok = all(p for _, p in parts)
        failed = [name for name, p in parts if not p]
        tail = f" (failed: {', '.join(failed)})" if failed else ""
        tr.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}{tail}")
