"""Slow, obviously-correct reference implementations used only by tests."""

import itertools

from ris_planner.blind_pairs import DevicePair

from conftest import oracle_los, shapely_obstacles


class SetOracle:
    """Pure-Python coverage sets built from shapely visibility."""

    def __init__(self, env, blind, r):
        self.env, self.r = env, r
        self.blind = [DevicePair.of(*p) for p in blind]
        shape = shapely_obstacles(env)
        f = env.free_cells
        self.los = {}
        for a in f:
            for b in f:
                self.los[a, b] = a == b or oracle_los(env, env.center(a), env.center(b), r, shape)
        self.S = {z: {p for p in self.blind if self.los[p.u, z] and self.los[z, p.v]} for z in f}

    def chain(self, i, j):
        if i == j or not self.los[i, j]:
            return set()
        L = self.los
        return {p for p in self.blind
                if (L[p.u, i] and L[j, p.v]) or (L[p.u, j] and L[i, p.v])}

    def D(self, i, j):
        return self.chain(i, j) - self.S[i] - self.S[j]

    def Z(self, i, j):
        return self.S[i] | self.S[j] | self.D(i, j)

    def covered_by(self, cells, allow_double=True):
        got = set()
        for c in cells:
            got |= self.S[c]
        if allow_double:
            for i, j in itertools.combinations(cells, 2):
                got |= self.chain(i, j)
        return got

    def universe(self):
        f = self.env.free_cells
        return self.covered_by(f)

    def greedy(self, allow_double=True, budget=None):
        rem = set(self.blind)
        chosen = []
        while rem and (budget is None or len(chosen) < budget):
            best, gain = None, 0
            for z in self.env.free_cells:
                if z in chosen:
                    continue
                cov = set(self.S[z])
                if allow_double and chosen:
                    for s in chosen:
                        cov |= self.chain(s, z)
                g = len(cov & rem)
                if g > gain:
                    best, gain = z, g
            if best is None:
                break
            cov = set(self.S[best])
            if allow_double:
                for s in chosen:
                    cov |= self.chain(s, best)
            rem -= cov
            chosen.append(best)
        return chosen, rem

    def exact_size(self):
        U = self.universe()
        f = self.env.free_cells
        for k in range(len(f) + 1):
            for combo in itertools.combinations(f, k):
                if U <= self.covered_by(combo):
                    return k, combo
