"""RIS placement: greedy candidate-location search, exact oracle and baselines."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .blind_pairs import DevicePair
from .coverage import CoverageTables, _blind_tuple
from .environment import Environment
from .errors import InstanceTooLarge, InvalidBudget


@dataclass(frozen=True)
class DeployBudget:
    max_ris: Optional[int] = None

    def __post_init__(self):
        if self.max_ris is not None and (isinstance(self.max_ris, bool) or self.max_ris < 1):
            raise InvalidBudget(f"max_ris must be a positive integer, got {self.max_ris!r}")


@dataclass(frozen=True)
class DeploymentPlan:
    """Ordered RIS cells with the coverage trace that produced them.

    ``gains[k]`` are the pairs newly covered by ``selected[k]`` and
    ``remainder_trace[k]`` the pairs still uncovered after it.
    """

    selected: tuple
    gains: tuple
    remainder_trace: tuple
    uncovered: tuple
    blind: tuple

    @property
    def covered(self) -> frozenset:
        return frozenset(p for g in self.gains for p in g)

    def to_dict(self) -> dict:
        return {
            "selected": list(self.selected),
            "gains": [[list(p) for p in g] for g in self.gains],
            "remainder_trace": [[list(p) for p in rem] for rem in self.remainder_trace],
            "uncovered": [list(p) for p in self.uncovered],
            "blind": [list(p) for p in self.blind],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeploymentPlan":
        def pairs(xs):
            return tuple(DevicePair.of(*p) for p in xs)

        return cls(
            selected=tuple(int(c) for c in d["selected"]),
            gains=tuple(pairs(g) for g in d["gains"]),
            remainder_trace=tuple(pairs(rem) for rem in d["remainder_trace"]),
            uncovered=pairs(d["uncovered"]),
            blind=pairs(d["blind"]),
        )


def _plan(tables: CoverageTables, selected, masks) -> DeploymentPlan:
    pairs = tables.pairs
    rem = np.ones(len(pairs), dtype=bool)
    gains, trace = [], []
    for m in masks:
        new = rem & m
        gains.append(tuple(p for p, x in zip(pairs, new) if x))
        rem &= ~new
        trace.append(tuple(p for p, x in zip(pairs, rem) if x))
    uncovered = tuple(p for p, x in zip(pairs, rem) if x)
    cells = tuple(tables.env.free_cells[c] for c in selected)
    return DeploymentPlan(cells, tuple(gains), tuple(trace), uncovered, pairs)


def _greedy(tables: CoverageTables, budget: Optional[DeployBudget], allow_double: bool):
    limit = budget.max_ris if budget is not None and budget.max_ris is not None else None
    n, p = tables.single.shape
    rem = np.ones(n, dtype=bool)
    taken = np.zeros(p, dtype=bool)
    reach = tables.single.copy()  # what each candidate would cover now
    selected, masks = [], []
    while rem.any() and (limit is None or len(selected) < limit):
        gain = (reach & rem[:, None]).sum(axis=0)
        gain[taken] = -1
        best = int(np.argmax(gain))  # first maximum = lowest cell id
        if gain[best] <= 0:
            break  # remainder unchanged: stop
        selected.append(best)
        masks.append(reach[:, best].copy())
        rem &= ~reach[:, best]
        taken[best] = True
        if allow_double:
            reach |= tables.chain_with(best)
    return selected, masks


def greedy_deploy(env: Environment, B, r: float, budget: Optional[DeployBudget] = None,
                  allow_double: bool = True) -> DeploymentPlan:
    """Greedy candidate-location placement.

    The first cell maximises single-reflection coverage.  Every later cell
    maximises the pairs it newly serves either alone or by chaining with an
    already selected cell.  Stops when everything is covered, when no cell
    adds coverage, or when the budget is spent.  Ties go to the lowest cell.
    """
    tables = CoverageTables(env, _blind_tuple(B), r)
    selected, masks = _greedy(tables, budget, allow_double)
    return _plan(tables, selected, masks)


def greedy_single_only(env: Environment, B, r: float, budget: Optional[DeployBudget] = None) -> DeploymentPlan:
    return greedy_deploy(env, B, r, budget, allow_double=False)


def plan_from_selection(env: Environment, B, r: float, cells, allow_double: bool = True) -> DeploymentPlan:
    """Coverage trace of a fixed cell sequence (each cell may chain with earlier ones)."""
    tables = CoverageTables(env, _blind_tuple(B), r)
    cols = [tables.col(c) for c in cells]
    masks, seen = [], []
    for c in cols:
        m = tables.single[:, c].copy()
        if allow_double:
            for s in seen:
                m |= tables.chain(s, c)
        masks.append(m)
        seen.append(c)
    return _plan(tables, cols, masks)


def exact_deploy(env: Environment, B, r: float, cell_limit: int = 20) -> DeploymentPlan:
    """Minimum-cardinality placement covering every coverable blind pair.

    Exhaustive enumeration in increasing subset size with lexicographic
    order, so the first hit is the lexicographically smallest optimum.
    """
    p = len(env.free_cells)
    if p > cell_limit:
        raise InstanceTooLarge(f"{p} free cells exceed the exact-search limit {cell_limit}")
    tables = CoverageTables(env, _blind_tuple(B), r)
    bits = [1 << k for k in range(tables.n_pairs)]

    def to_int(mask):
        return sum(b for b, m in zip(bits, mask) if m)

    target = to_int(tables.coverable)
    single = [to_int(tables.single[:, c]) for c in range(p)]
    chain = {}
    for i, j in itertools.combinations(range(p), 2):
        m = to_int(tables.chain(i, j))
        if m:
            chain[i, j] = m
    best = None
    for k in range(p + 1):
        for combo in itertools.combinations(range(p), k):
            got = 0
            for c in combo:
                got |= single[c]
            if got & target != target:
                for i, j in itertools.combinations(combo, 2):
                    got |= chain.get((i, j), 0)
            if got & target == target:
                best = combo
                break
        if best is not None:
            break
    return plan_from_selection(env, tables.pairs, r, [env.free_cells[c] for c in best])


def random_deploy(env: Environment, B, r: float, count: int, seed: int) -> DeploymentPlan:
    """Uniformly random cells (seeded), evaluated with single reflection only."""
    p = len(env.free_cells)
    if count < 0 or count > p:
        raise InvalidBudget(f"cannot place {count} RIS on {p} free cells")
    rng = np.random.default_rng(seed)
    picks = sorted(rng.choice(p, size=count, replace=False).tolist())
    return plan_from_selection(env, B, r, [env.free_cells[c] for c in picks], allow_double=False)


def random_saturating_deploy(env: Environment, B, r: float, seed: int) -> DeploymentPlan:
    """Random cells added one at a time until single-reflection coverage saturates."""
    tables = CoverageTables(env, _blind_tuple(B), r)
    reachable = tables.single.any(axis=1)
    order = np.random.default_rng(seed).permutation(len(env.free_cells))
    got = np.zeros(tables.n_pairs, dtype=bool)
    picks = []
    for c in order:
        if np.array_equal(got, reachable):
            break
        picks.append(int(c))
        got |= tables.single[:, c]
    return plan_from_selection(env, tables.pairs, r, [env.free_cells[c] for c in picks], allow_double=False)


def coverage_report(plan: DeploymentPlan, B=None) -> dict:
    blind = plan.blind if B is None else _blind_tuple(B)
    prefix, total = [], 0
    for g in plan.gains:
        total += len(g)
        prefix.append(total)
    return {
        "blind": len(blind),
        "n_ris": len(plan.selected),
        "covered": len(blind) - len(plan.uncovered),
        "uncovered": len(plan.uncovered),
        "step_gains": [len(g) for g in plan.gains],
        "prefix_covered": prefix,
    }
