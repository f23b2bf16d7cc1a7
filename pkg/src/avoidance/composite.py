"""Two-walker cluster couplings on n = a*b vertices, looped or not.

The vertex set splits into b clusters of size a (cluster j holds the
vertices [j*a, (j+1)*a)).  The leader usually jumps into the follower's
cluster, sometimes moves within her own; the follower then moves inside
his cluster unless the leader just joined it, in which case he flees to
a uniformly random vertex of a uniformly random empty cluster.  At the
leader's turn the two walkers always occupy distinct clusters.

A minimum-entropy variant endows each cluster with a directed cycle:
the leader's jump lands deterministically on the site after the
follower's, her within-cluster moves are uniform nonzero cyclic shifts,
and the follower copies her shift, which costs the Markov property.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import BadFactors
from .graphs import complete, complete_looped
from .process import CouplingProcess, State

_SWITCHED = "switched"


def _check_factors(a, b):
    if a < 2 or b < 2:
        raise BadFactors(f"cluster coupling needs a, b >= 2, got a={a}, b={b}")


class Composite(CouplingProcess):
    def __init__(self, a: int, b: int, looped: bool):
        _check_factors(a, b)
        self.a, self.b, self.looped = a, b, looped
        n = a * b
        graph = complete_looped(n) if looped else complete(n)
        super().__init__(graph, 2, markovian=True, waves=False,
                         min_entropy=(a == 2 and not looped),
                         memory_depth=0)

    def cluster(self, v):
        return v // self.a

    def cluster_vertices(self, c):
        return range(c * self.a, (c + 1) * self.a)

    def _initial(self):
        n, a = self.graph.n, self.a
        p = Fraction(1, n * (n - a))
        return {
            State((x, y), 0, None): p
            for x in range(n) for y in range(n)
            if self.cluster(x) != self.cluster(y)
        }

    def switch_prob(self):
        a, b = self.a, self.b
        if self.looped:
            return Fraction(b - 1, b)
        return Fraction(a * (b - 1), a * b - 1)

    def _step(self, state):
        x, y = state.positions
        a, b = self.a, self.b
        out = {}
        if state.turn == 0:
            sw = self.switch_prob()
            per = sw / (a - 1)
            for v in self.cluster_vertices(self.cluster(y)):
                if v != y:
                    out[State((v, y), 1, None)] = per
            if self.looped:
                per_own = (1 - sw) / a
                own = self.cluster_vertices(self.cluster(x))
            else:
                per_own = (1 - sw) / (a - 1)
                own = [v for v in self.cluster_vertices(self.cluster(x))
                       if v != x]
            for v in own:
                out[State((v, y), 1, None)] = per_own
            return out
        if self.cluster(x) == self.cluster(y):
            # the leader moved in; flee to an empty cluster
            per = Fraction(1, (b - 1) * a)
            for c in range(b):
                if c != self.cluster(y):
                    for v in self.cluster_vertices(c):
                        out[State((x, v), 0, None)] = per
            return out
        if self.looped:
            per = Fraction(1, a)
            targets = self.cluster_vertices(self.cluster(y))
        else:
            per = Fraction(1, a - 1)
            targets = [v for v in self.cluster_vertices(self.cluster(y))
                       if v != y]
        for v in targets:
            out[State((x, v), 0, None)] = per
        return out

    def descriptor(self):
        return {"kind": "composite", "a": self.a, "b": self.b,
                "looped": self.looped}


class CompositeMinEntropy(CouplingProcess):
    """Directed-cycle variant; one fresh choice per round."""

    def __init__(self, a: int, b: int):
        _check_factors(a, b)
        self.a, self.b = a, b
        super().__init__(complete(a * b), 2, markovian=False, waves=False,
                         min_entropy=True, memory_depth=1)

    def cluster(self, v):
        return v // self.a

    def shift(self, v, delta):
        base = self.cluster(v) * self.a
        return base + (v - base + delta) % self.a

    def _initial(self):
        n, a = self.graph.n, self.a
        p = Fraction(1, n * (n - a))
        return {
            State((x, y), 0, None): p
            for x in range(n) for y in range(n)
            if self.cluster(x) != self.cluster(y)
        }

    def _step(self, state):
        x, y = state.positions
        a, b = self.a, self.b
        out = {}
        if state.turn == 0:
            n1 = a * b - 1
            out[State((self.shift(y, 1), y), 1, _SWITCHED)] = (
                Fraction(a * (b - 1), n1))
            for delta in range(1, a):
                out[State((self.shift(x, delta), y), 1, delta)] = (
                    Fraction(1, n1))
            return out
        if state.aux == _SWITCHED:
            per = Fraction(1, (b - 1) * a)
            for c in range(b):
                if c != self.cluster(y):
                    for v in self.cluster_vertices(c):
                        out[State((x, v), 0, None)] = per
            return out
        return {State((x, self.shift(y, state.aux)), 0, None): Fraction(1)}

    def cluster_vertices(self, c):
        return range(c * self.a, (c + 1) * self.a)

    def descriptor(self):
        return {"kind": "composite_min_entropy", "a": self.a, "b": self.b}


def build_composite(a: int, b: int, looped: bool = False) -> Composite:
    """Markovian two-walker coupling on n = a*b vertices (a, b >= 2)."""
    return Composite(a, b, looped)


def build_composite_min_entropy(a: int, b: int) -> CompositeMinEntropy:
    """Minimum-entropy, non-Markovian cluster coupling (unlooped only)."""
    return CompositeMinEntropy(a, b)
