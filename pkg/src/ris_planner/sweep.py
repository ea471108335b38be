"""Experiment sweeps: one generated world per (value, trial), CSV rows out."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .blind_pairs import identify_blind_pairs
from .channel import ChannelBank
from .deploy import exact_deploy, greedy_deploy, greedy_single_only, random_saturating_deploy
from .environment import GridSpec
from .errors import RisPlannerError, ValidationError
from .generate import generate_scenario
from .group_select import candidate_sets, select_batch, select_group
from .scenario import RisShape, Scenario

VARIABLES = ("coverage_radius", "device_count", "obstacle_count", "elements_per_group", "grid_size")
BASELINES = ("greedy", "single_only", "random", "exact")
COLUMNS = ("sweep_var", "value", "trial", "n_ris", "covered", "unserved", "sum_throughput_bps",
           "mean_energy_j", "mean_eff_bpj", "runtime_ms", "error")
PARAM_COLUMNS = ("grid_rows", "grid_cols", "cell_size", "n_obstacles", "n_devices", "radius",
                 "ris_rows", "ris_cols", "subgroups", "mode", "max_hops", "allow_double", "baseline",
                 "exclusive", "seed")
METRICS = ("n_ris", "covered", "unserved", "sum_throughput_bps", "mean_energy_j", "mean_eff_bpj", "runtime_ms")


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    trials: int = 20
    allow_double: bool = True
    gbs: bool = True
    max_hops: int = 2
    baseline: str = "greedy"
    exclusive: bool = False  # one pair per subgroup across the world
    n_obstacles: Optional[int] = None  # None: count from the base scenario
    n_devices: Optional[int] = None  # None: pair count of the base scenario
    timing: bool = False  # fill runtime_ms (makes output non-reproducible)

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ValidationError(f"unknown sweep variable {self.variable!r}; expected one of {VARIABLES}")
        if not self.values:
            raise ValidationError("values must be non-empty")
        if isinstance(self.trials, bool) or self.trials < 1:
            raise ValidationError("trials must be >= 1")
        if self.max_hops not in (1, 2, 3):
            raise ValidationError("max_hops must be 1, 2 or 3")
        if self.baseline not in BASELINES:
            raise ValidationError(f"unknown baseline {self.baseline!r}; expected one of {BASELINES}")
        object.__setattr__(self, "values", tuple(self.values))

    @property
    def mode(self) -> str:
        return "gbs" if self.gbs else "ngbs"

    @property
    def hop_limit(self) -> int:
        return self.max_hops if self.allow_double else 1


def derive_seed(*parts: int) -> int:
    """64-bit seed from integer parts (order matters)."""
    ss = np.random.SeedSequence([int(p) % 2**64 for p in parts])
    return int(ss.generate_state(1, np.uint64)[0])


def _subgroup_grid(ris: RisShape) -> tuple[int, int]:
    side = math.isqrt(ris.rows * ris.cols // ris.subgroups)
    return ris.rows // side, ris.cols // side


def world_settings(spec: SweepSpec, base: Scenario, value) -> dict:
    """Generator arguments for one sweep value."""
    n_obs = spec.n_obstacles if spec.n_obstacles is not None else len(base.env.obstacles)
    n_dev = spec.n_devices if spec.n_devices is not None else len(base.device_pairs)
    s = dict(grid=base.grid, n_obstacles=n_obs, n_devices=n_dev, r=base.coverage_radius_m,
             ris=base.ris, pair_radius=None)
    var = spec.variable
    if var == "coverage_radius":
        s["r"] = float(value)
        s["pair_radius"] = float(min(spec.values))  # one pair population for every radius
    elif var == "device_count":
        s["n_devices"] = int(value)
    elif var == "obstacle_count":
        s["n_obstacles"] = int(value)
    elif var == "elements_per_group":
        a, b = _subgroup_grid(base.ris)
        ng = int(value)
        s["ris"] = RisShape(a * ng, b * ng, a * b)
    elif var == "grid_size":
        side = base.grid.rows * base.grid.cell_size  # fixed physical area, finer cells
        s["grid"] = GridSpec(int(value), int(value), side / int(value))
    return s


def _deploy(spec: SweepSpec, sc: Scenario, blind, seed: int):
    r = sc.coverage_radius_m
    if spec.baseline == "greedy":
        return greedy_deploy(sc.env, blind, r, allow_double=spec.allow_double)
    if spec.baseline == "single_only":
        return greedy_single_only(sc.env, blind, r)
    if spec.baseline == "random":
        return random_saturating_deploy(sc.env, blind, r, seed)
    return exact_deploy(sc.env, blind, r)


def evaluate_world(spec: SweepSpec, sc: Scenario, channel_seed: int, deploy_seed: int) -> dict:
    """Deploy, select routes and aggregate link metrics for one scenario."""
    env, r = sc.env, sc.coverage_radius_m
    blind = identify_blind_pairs(env, sc.device_pairs, r)
    plan = _deploy(spec, sc, blind, deploy_seed)
    bank = ChannelBank(env, plan.selected, sc.ris_spec, sc.params, channel_seed, spec.mode)
    t_th = sc.threshold
    blocked = [p for p in sc.device_pairs if p in blind]
    cands = {p: candidate_sets(env, p, plan, sc.ris_spec, r, spec.mode, spec.hop_limit) for p in blocked}
    if spec.exclusive:
        sels = select_batch(blocked, cands, bank, t_th)
    else:
        sels = {p: select_group(p, cands[p], bank, t_th=t_th) for p in blocked}
    total, unserved, energies, effs = 0.0, 0, [], []
    for p in sc.device_pairs:
        if p in blind:
            s = sels[p]
            if not s.served:
                unserved += 1
                continue
            total += s.evaluation.throughput
            energies.append(s.evaluation.energy)
            effs.append(s.evaluation.efficiency)
        else:
            ev = bank.direct(p.u, p.v)
            if ev.throughput >= t_th and ev.throughput > 0:
                total += ev.throughput
            else:
                unserved += 1
    return {
        "n_ris": len(plan.selected),
        "covered": len(plan.covered),
        "unserved": unserved,
        "sum_throughput_bps": total,
        "mean_energy_j": float(np.mean(energies)) if energies else None,
        "mean_eff_bpj": float(np.mean(effs)) if effs else None,
    }


def _params_row(spec: SweepSpec, s: dict, seed: int) -> dict:
    g = s["grid"]
    n_obs, n_dev = s["n_obstacles"], s["n_devices"]
    return {
        "grid_rows": g.rows, "grid_cols": g.cols, "cell_size": g.cell_size,
        "n_obstacles": n_obs, "n_devices": n_dev, "radius": s["r"],
        "ris_rows": s["ris"].rows, "ris_cols": s["ris"].cols, "subgroups": s["ris"].subgroups,
        "mode": spec.mode, "max_hops": spec.hop_limit, "allow_double": spec.allow_double,
        "baseline": spec.baseline, "exclusive": spec.exclusive, "seed": seed,
    }


def run_sweep(spec: SweepSpec, base: Scenario) -> list[dict]:
    """Rows for every (value, trial) followed by one ``mean`` row per value.

    Trial k of every value uses the same world, channel and baseline seeds
    (derived from the base seed and k), so values are compared on common
    random numbers.
    """
    rows = []
    for value in spec.values:
        settings = world_settings(spec, base, value)
        per_value = []
        for trial in range(spec.trials):
            world_seed = derive_seed(base.seed, trial, 0)
            row = {"sweep_var": spec.variable, "value": value, "trial": trial}
            row.update(_params_row(spec, settings, world_seed))
            t0 = time.perf_counter()
            try:
                sc = generate_scenario(settings["grid"], settings["n_obstacles"], settings["n_devices"],
                                       settings["r"], world_seed, ris=settings["ris"], channel=base.channel,
                                       t_threshold=base.t_threshold, pair_radius=settings["pair_radius"])
                row.update(evaluate_world(spec, sc, derive_seed(base.seed, trial, 1),
                                          derive_seed(base.seed, trial, 2)))
                row["error"] = ""
            except RisPlannerError as e:
                row.update({m: None for m in METRICS})
                row["error"] = f"{type(e).__name__}: {e}"
            row["runtime_ms"] = (time.perf_counter() - t0) * 1e3 if spec.timing else None
            per_value.append(row)
        rows.extend(per_value)
        rows.append(_mean_row(spec, value, settings, per_value))
    return rows


def _mean_row(spec, value, settings, per_value) -> dict:
    row = {"sweep_var": spec.variable, "value": value, "trial": "mean"}
    row.update(_params_row(spec, settings, None))
    ok = [r for r in per_value if not r["error"]]
    for m in METRICS:
        xs = [r[m] for r in ok if r[m] is not None]
        row[m] = float(np.mean(xs)) if xs else None
    failed = len(per_value) - len(ok)
    row["error"] = f"{failed} trials failed" if failed else ""
    return row


def aggregate(rows, column: str) -> list:
    """(value, mean) pairs of ``column`` taken from the ``mean`` rows."""
    return [(r["value"], r[column]) for r in rows if r["trial"] == "mean"]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = COLUMNS + PARAM_COLUMNS
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in header])
    return buf.getvalue()


def write_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(rows_to_csv(rows))
