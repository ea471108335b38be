"""Energy-efficient subgroup selection for blind pairs over a deployed plan."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .blind_pairs import DevicePair
from .channel import ChannelBank, ChannelParams, LinkEvaluation, RisSpec, evaluate, path_snr
from .environment import Environment
from .errors import InvalidConfiguration, ValidationError

MODES = {1: "Single", 2: "Double", 3: "Triple"}


class SubgroupRef(NamedTuple):
    ris: int  # index into the plan's RIS list
    subgroup: int  # 1-based


@dataclass(frozen=True)
class CandidateSets:
    """Visible RIS chains per hop count; each chain admits every subgroup combination.

    ``chains[k]`` lists k-tuples of RIS indices in lexicographic order.  The
    ``singles``/``doubles``/``triples`` views expand them into subgroup routes.
    """

    chains: dict = field(default_factory=dict)
    n_units: int = 1

    def routes(self, hops: int) -> tuple:
        units = range(1, self.n_units + 1)
        out = []
        for chain in self.chains.get(hops, ()):
            for subs in itertools.product(units, repeat=hops):
                out.append(tuple(SubgroupRef(i, s) for i, s in zip(chain, subs)))
        return tuple(sorted(out))

    @property
    def singles(self) -> tuple:
        return tuple(r[0] for r in self.routes(1))

    @property
    def doubles(self) -> tuple:
        return self.routes(2)

    @property
    def triples(self) -> tuple:
        return self.routes(3)

    def __bool__(self):
        return any(self.chains.values())


@dataclass(frozen=True)
class Selection:
    mode: str  # Single | Double | Triple | Infeasible
    chosen: Optional[tuple] = None  # tuple of SubgroupRef along the route
    evaluation: Optional[LinkEvaluation] = None

    @property
    def served(self) -> bool:
        return self.mode != "Infeasible"


INFEASIBLE = Selection("Infeasible")


def _ris_cells(plan) -> tuple:
    return tuple(getattr(plan, "selected", plan))


def candidate_sets(env: Environment, pair, plan, ris_spec: RisSpec, r: float,
                   mode: str = "gbs", max_hops: int = 2) -> CandidateSets:
    """RIS chains that give ``pair`` an indirect LoS through the plan.

    Visibility is taken at RIS cell centres, so all subgroups of a visible RIS
    are candidates.
    """
    if max_hops not in (1, 2, 3):
        raise ValidationError(f"max_hops must be 1, 2 or 3, got {max_hops}")
    pair = DevicePair.of(*pair)
    cells = _ris_cells(plan)
    A = env.los_matrix(r)
    idx = env.free_index
    u, v = idx[pair.u], idx[pair.v]
    if A[u, v]:
        raise ValidationError(f"pair {tuple(pair)} has direct LoS")
    cols = np.array([idx[c] for c in cells], dtype=np.intp)
    R = A[np.ix_(cols, cols)].copy() if len(cols) else np.zeros((0, 0), bool)
    np.fill_diagonal(R, False)
    # a RIS on an endpoint's own cell would give a zero-length hop
    usable = np.array([c not in pair for c in cells], dtype=bool)
    first = (A[u, cols] & usable) if len(cols) else np.zeros(0, bool)
    last = (A[cols, v] & usable) if len(cols) else np.zeros(0, bool)
    R &= usable[:, None] & usable[None, :]
    chains = {1: tuple((i,) for i in np.flatnonzero(first & last).tolist())}
    if max_hops >= 2:
        chains[2] = tuple((i, j) for i in np.flatnonzero(first).tolist()
                          for j in np.flatnonzero(R[i] & last).tolist())
    if max_hops >= 3:
        chains[3] = tuple((i, j, k) for i in np.flatnonzero(first).tolist()
                          for j in np.flatnonzero(R[i]).tolist()
                          for k in np.flatnonzero(R[j] & last).tolist() if k != i)
    return CandidateSets(chains, ris_spec.units(mode)[0])


# -- evaluation ------------------------------------------------------------------------

def chain_metrics(pair, chain: Sequence[int], bank: ChannelBank):
    """(snr, throughput, energy, efficiency) arrays over every subgroup combination.

    Each array has one axis per reflector, indexed by 0-based subgroup.
    """
    pair = DevicePair.of(*pair)
    p = bank.params
    gains = bank.chain_gains(pair.u, chain, pair.v)
    snr = path_snr(1.0, bank.hop_distances(pair.u, chain, pair.v), p) * gains
    t = p.bandwidth_hz * np.log2(1.0 + snr)
    power = p.tx_power + len(chain) * bank.unit_power
    bits = p.packets * p.bits_per_packet
    with np.errstate(divide="ignore"):
        energy = np.where(t > 0, bits * power / np.where(t > 0, t, 1.0), np.inf)
    eff = np.where(t > 0, t ** 2 / (bits * power), 0.0)
    return snr, t, energy, eff


def _route(chain, sub) -> tuple:
    return tuple(SubgroupRef(i, int(s) + 1) for i, s in zip(chain, sub))


def evaluate_route(pair, route, bank: ChannelBank) -> LinkEvaluation:
    route = (route,) if isinstance(route, SubgroupRef) else tuple(route)
    m = chain_metrics(pair, [s.ris for s in route], bank)
    k = tuple(s.subgroup - 1 for s in route)
    return LinkEvaluation(*(float(a[k]) for a in m))


def _feasible(pair, candidates: CandidateSets, bank: ChannelBank, t_th: float):
    """Yield (hops, route, evaluation) for every feasible route."""
    for hops in sorted(candidates.chains):
        for chain in candidates.chains[hops]:
            snr, t, e, eff = chain_metrics(pair, chain, bank)
            for sub in np.argwhere((t >= t_th) & (t > 0)):
                k = tuple(sub)
                yield hops, _route(chain, k), LinkEvaluation(
                    float(snr[k]), float(t[k]), float(e[k]), float(eff[k]))


def _best(pair, candidates: CandidateSets, bank: ChannelBank, t_th: float):
    """Max-efficiency feasible route; ties go to fewer hops, then lexicographic order."""
    best = None  # (eff, hops, route, evaluation)
    for hops in sorted(candidates.chains):
        for chain in candidates.chains[hops]:
            snr, t, e, eff = chain_metrics(pair, chain, bank)
            ok = (t >= t_th) & (t > 0)
            if not ok.any():
                continue
            top = eff[ok].max()
            if best is not None and (top < best[0] or (top == best[0] and hops > best[1])):
                continue
            k = tuple(np.argwhere(ok & (eff == top))[0])  # C order: smallest subgroups
            route = _route(chain, k)
            if best is None or top > best[0] or hops < best[1] or route < best[2]:
                best = (top, hops, route,
                        LinkEvaluation(float(snr[k]), float(t[k]), float(e[k]), float(eff[k])))
    return best


def select_group(pair, candidates: CandidateSets, channels: ChannelBank,
                 params: Optional[ChannelParams] = None, t_th: Optional[float] = None) -> Selection:
    """Most energy-efficient feasible route for one pair (single wins ties)."""
    if params is not None and params != channels.params:
        raise ValidationError("params differ from the channel bank's parameters")
    params = channels.params
    t_th = params.default_threshold if t_th is None else t_th
    if t_th < 0:
        raise ValidationError("t_th must be >= 0")
    best = _best(pair, candidates, channels, t_th)
    if best is None:
        return INFEASIBLE
    _, hops, route, ev = best
    return Selection(MODES[hops], route, ev)


def select_batch(pairs, candidates: dict, channels: ChannelBank, t_th: Optional[float] = None,
                 exclusive: bool = True) -> dict:
    """Select routes for many pairs.

    With ``exclusive`` each subgroup serves at most one pair: pairs are served
    in descending order of their best efficiency and take their best route
    whose subgroups are all still free.
    """
    t_th = channels.params.default_threshold if t_th is None else t_th
    pairs = [DevicePair.of(*p) for p in pairs]
    if not exclusive:
        return {p: select_group(p, candidates[p], channels, t_th=t_th) for p in pairs}
    ranked = {}
    for pair in pairs:
        opts = [(-ev.efficiency, hops, route, ev)
                for hops, route, ev in _feasible(pair, candidates[pair], channels, t_th)]
        opts.sort(key=lambda o: o[:3])
        ranked[pair] = opts
    order = sorted((p for p in pairs if ranked[p]), key=lambda p: (ranked[p][0][0], p))
    used, out = set(), {p: INFEASIBLE for p in pairs}
    for pair in order:
        for _, hops, route, ev in ranked[pair]:
            if not used.intersection(route):
                used.update(route)
                out[pair] = Selection(MODES[hops], route, ev)
                break
    return {p: out[p] for p in pairs}


# -- proposition predicates ----------------------------------------------------------------

@dataclass(frozen=True)
class PathGeometry:
    """Inputs that fix one route's efficiency: hop distances, |cascade|^2, phase powers."""

    distances: tuple
    gain: float
    phase_powers: tuple

    def evaluate(self, params: ChannelParams) -> LinkEvaluation:
        return evaluate(self.gain, self.distances, self.phase_powers, params)


def prop1_margin(single: PathGeometry, double: PathGeometry, params: ChannelParams) -> float:
    """E_eff(single) - E_eff(double), written as the sum of two nonnegative terms."""
    t_s = single.evaluate(params).throughput
    t_d = double.evaluate(params).throughput
    p_l = single.phase_powers[0]
    p_m = double.phase_powers[1]
    base = params.tx_power + p_l
    total = base + p_m
    bf = params.packets * params.bits_per_packet
    return (base * (t_s ** 2 - t_d ** 2) + p_m * t_s ** 2) / (bf * total * base)


def prop1_configuration_check(single: PathGeometry, double: PathGeometry, params: ChannelParams) -> bool:
    """Single reflection beats a double route that reuses its first subgroup.

    Preconditions: all hop distances > 1, shared first hop (distance and
    subgroup power), identical cascade magnitude, the triangle inequality
    d(R_i, v) <= d(R_i, R_j) + d(R_j, v), and rho_L <= 2**-alpha.  The last
    one is what makes the path-loss step valid for hops just above 1 m.
    """
    if len(single.distances) != 2 or len(double.distances) != 3:
        raise InvalidConfiguration("expected a 2-hop single and a 3-hop double route")
    if min(single.distances + double.distances) <= 1:
        raise InvalidConfiguration("all hop distances must exceed 1 m")
    if not math.isclose(single.distances[0], double.distances[0], rel_tol=1e-12):
        raise InvalidConfiguration("routes must share the first hop")
    if not math.isclose(single.phase_powers[0], double.phase_powers[0], rel_tol=1e-12, abs_tol=0.0):
        raise InvalidConfiguration("routes must share the first subgroup")
    if not math.isclose(single.gain, double.gain, rel_tol=1e-12):
        raise InvalidConfiguration("routes must have identical cascade magnitude")
    if single.distances[1] > (double.distances[1] + double.distances[2]) * (1 + 1e-12):
        raise InvalidConfiguration("triangle inequality violated")
    if params.pathloss_1m > 2.0 ** -params.pathloss_exponent:
        raise InvalidConfiguration("rho_L must not exceed 2**-alpha")
    return prop1_margin(single, double, params) >= 0


def prop2_conditions(single: PathGeometry, double: PathGeometry, params: ChannelParams) -> bool:
    """Conditions under which a double route is claimed to beat a single one.

    (i) single-route power does not exceed the double-route power, (ii)
    rho_L * d(u, R_s) * d(R_s, v) >= product of the double hop distances, and
    the double cascade gain is at least the single one.
    """
    p = params.tx_power
    cond_i = p + sum(single.phase_powers) <= p + sum(double.phase_powers)
    cond_ii = params.pathloss_1m * math.prod(single.distances) >= math.prod(double.distances)
    gain_ok = double.gain >= single.gain
    return bool(cond_i and cond_ii and gain_ok)
