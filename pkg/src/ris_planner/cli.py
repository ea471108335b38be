"""Command line: deploy, select, sweep, example."""

from __future__ import annotations

import argparse
import json
import sys

from . import sweep as sw
from .blind_pairs import identify_blind_pairs
from .channel import ChannelBank
from .deploy import (DeployBudget, DeploymentPlan, coverage_report, exact_deploy, greedy_deploy,
                     greedy_single_only, random_deploy, random_saturating_deploy)
from .errors import RisPlannerError, ValidationError
from .group_select import candidate_sets, select_batch
from .scenario import bundled_example, load_scenario, seed_override


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _scenario(path):
    return seed_override(load_scenario(path))


def cmd_deploy(args) -> int:
    sc = _scenario(args.scenario)
    env, r = sc.env, sc.coverage_radius_m
    blind = identify_blind_pairs(env, sc.device_pairs, r)
    budget = DeployBudget(args.max_ris)
    if args.baseline == "greedy":
        plan = greedy_deploy(env, blind, r, budget)
    elif args.baseline == "single-only":
        plan = greedy_single_only(env, blind, r, budget)
    elif args.baseline == "random":
        if args.max_ris is None:
            plan = random_saturating_deploy(env, blind, r, sc.seed)
        else:
            plan = random_deploy(env, blind, r, args.max_ris, sc.seed)
    else:
        if args.max_ris is not None:
            raise ValidationError("--max-ris does not apply to the exact baseline")
        plan = exact_deploy(env, blind, r)
    doc = {"baseline": args.baseline, "report": coverage_report(plan), "plan": plan.to_dict()}
    _emit(_dump(doc), args.out)
    return 0


def _load_plan(path) -> DeploymentPlan:
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
        return DeploymentPlan.from_dict(doc.get("plan", doc))
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise ValidationError(f"cannot read plan file {path}: {e}") from e


def cmd_select(args) -> int:
    sc = _scenario(args.scenario)
    plan = _load_plan(args.plan)
    env, r = sc.env, sc.coverage_radius_m
    for c in plan.selected:
        if not env.is_free(c):
            raise ValidationError(f"plan places a RIS on blocked cell {c}")
    mode = "ngbs" if args.ngbs else "gbs"
    t_th = sc.threshold if args.t_th is None else args.t_th
    bank = ChannelBank(env, plan.selected, sc.ris_spec, sc.params, sc.seed, mode)
    pairs = list(plan.blind)
    cands = {p: candidate_sets(env, p, plan, sc.ris_spec, r, mode, args.max_hops) for p in pairs}
    sels = select_batch(pairs, cands, bank, t_th, exclusive=args.exclusive)
    rows = []
    for p in pairs:
        s = sels[p]
        row = {"pair": list(p), "mode": s.mode, "route": None, "ris_cells": None}
        if s.served:
            row["route"] = [[plan.selected[x.ris], x.subgroup] for x in s.chosen]
            row["ris_cells"] = [plan.selected[x.ris] for x in s.chosen]
            e = s.evaluation
            row.update(snr=e.snr, throughput_bps=e.throughput, energy_j=e.energy, efficiency_bpj=e.efficiency)
        rows.append(row)
    doc = {"mode": mode, "t_threshold": t_th, "selections": rows}
    _emit(_dump(doc), args.out)
    return 0


def _parse_values(text: str) -> tuple:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(int(tok))
        except ValueError:
            try:
                out.append(float(tok))
            except ValueError:
                raise ValidationError(f"bad sweep value {tok!r}") from None
    return tuple(out)


def cmd_sweep(args) -> int:
    sc = _scenario(args.scenario)
    spec = sw.SweepSpec(
        variable=args.var, values=_parse_values(args.values), trials=args.trials,
        allow_double=not args.single_only, gbs=not args.ngbs, max_hops=args.max_hops,
        baseline=args.baseline.replace("-", "_"), exclusive=args.exclusive,
        n_obstacles=args.n_obstacles, n_devices=args.n_devices, timing=args.timing,
    )
    rows = sw.run_sweep(spec, sc)
    _emit(sw.rows_to_csv(rows), args.out)
    return 0


def cmd_example(args) -> int:
    _emit(bundled_example(args.name), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ris-planner", description="RIS deployment and subgroup selection")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("deploy", help="place RISs for a scenario")
    d.add_argument("--scenario", required=True)
    d.add_argument("--baseline", choices=("greedy", "single-only", "random", "exact"), default="greedy")
    d.add_argument("--max-ris", type=int)
    d.add_argument("--out")
    d.set_defaults(fn=cmd_deploy)

    s = sub.add_parser("select", help="pick subgroups for every blind pair of a plan")
    s.add_argument("--scenario", required=True)
    s.add_argument("--plan", required=True)
    s.add_argument("--t-th", type=float, help="throughput threshold in bits/s")
    s.add_argument("--ngbs", action="store_true", help="drive whole RISs instead of subgroups")
    s.add_argument("--max-hops", type=int, choices=(1, 2, 3), default=2)
    s.add_argument("--shared", dest="exclusive", action="store_false",
                   help="let several pairs use the same subgroup")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_select)

    w = sub.add_parser("sweep", help="run an experiment sweep to CSV")
    w.add_argument("--scenario", required=True)
    w.add_argument("--var", required=True, choices=sw.VARIABLES)
    w.add_argument("--values", required=True, help="comma separated")
    w.add_argument("--trials", type=int, default=20)
    w.add_argument("--baseline", choices=("greedy", "single-only", "random", "exact"), default="greedy")
    w.add_argument("--single-only", action="store_true", help="disable double reflection")
    w.add_argument("--ngbs", action="store_true")
    w.add_argument("--max-hops", type=int, choices=(1, 2, 3), default=2)
    w.add_argument("--exclusive", action="store_true", help="one pair per subgroup")
    w.add_argument("--n-obstacles", type=int)
    w.add_argument("--n-devices", type=int)
    w.add_argument("--timing", action="store_true", help="record runtime_ms (output no longer reproducible)")
    w.add_argument("--out", required=True)
    w.set_defaults(fn=cmd_sweep)

    e = sub.add_parser("example", help="print a bundled scenario")
    e.add_argument("--name", default="4x4")
    e.add_argument("--out")
    e.set_defaults(fn=cmd_example)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except RisPlannerError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001 - last-resort exit code
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
