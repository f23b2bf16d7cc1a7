"""Turn-taking coupled Bernoulli sequences and the monotonicity lift.

From any coupling on a looped complete graph, watching a single marked
vertex yields k turn-taking Bernoulli(1/n) sequences of which no two are
ever 1 together (a "1-avoidance" family).  Thinning with independent
per-turn coins lowers the rate; a 1-avoidance Bernoulli(1/(n+1)) family
drives the lift that turns a coupling on a looped n-vertex graph into
one on n+1 vertices, by parking a walker on the new vertex exactly while
its Bernoulli value is 1.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct
from typing import NamedTuple

from .errors import BadParam, BadThin
from .graphs import LOOPED, complete_looped
from .process import CouplingProcess, State, dadd


class BState(NamedTuple):
    """Bernoulli machine state: current values, whose turn, source state."""

    values: tuple
    turn: int
    src: State


class BernoulliProcess:
    """Base for exact 1-avoidance Bernoulli machines."""

    def __init__(self, k: int, p: Fraction):
        self.k = k
        self.p = Fraction(p)
        self._initial_cache = None
        self._step_cache = {}

    def initial(self):
        if self._initial_cache is None:
            self._initial_cache = self._initial()
        return self._initial_cache

    def step(self, state):
        dist = self._step_cache.get(state)
        if dist is None:
            dist = self._step(state)
            self._step_cache[state] = dist
        return dist

    def _initial(self):
        raise NotImplementedError

    def _step(self, state):
        raise NotImplementedError


class ExtractedBernoulli(BernoulliProcess):
    """Value of walker j is the indicator that walker j sits on vertex v."""

    def __init__(self, source: CouplingProcess, v: int = 1):
        if source.graph.mode != LOOPED:
            raise BadParam("extraction needs a coupling on a looped graph")
        if not 0 <= v < source.graph.n:
            raise BadParam(f"vertex {v} out of range")
        super().__init__(source.k, Fraction(1, source.graph.n))
        self.source = source
        self.v = v

    def _values(self, src_state):
        return tuple(int(pos == self.v) for pos in src_state.positions)

    def _initial(self):
        return {
            BState(self._values(s), 0, s): pr
            for s, pr in self.source.initial().items()
        }

    def _step(self, state):
        out = {}
        turn = state.turn
        nxt = (turn + 1) % self.k
        for succ, pr in self.source.step(state.src).items():
            value = int(succ.positions[turn] == self.v)
            values = state.values[:turn] + (value,) + state.values[turn + 1:]
            dadd(out, BState(values, nxt, succ), pr)
        return out

    def descriptor(self):
        return {"kind": "bernoulli_extract", "v": self.v,
                "source": self.source.descriptor()}


class ThinnedBernoulli(BernoulliProcess):
    """Keep a source 1 only when an independent per-turn coin lands heads."""

    def __init__(self, source: BernoulliProcess, q):
        q = Fraction(q)
        if q > source.p:
            raise BadThin(f"cannot thin rate {source.p} up to {q}")
        if q <= 0:
            raise BadThin("thinned rate must be positive")
        super().__init__(source.k, q)
        self.source = source
        self.heads = q / source.p

    def _initial(self):
        # fresh coins decide the initial values of walkers currently at 1
        out = {}
        heads = self.heads
        for src_state, pr in self.source.initial().items():
            ones = [j for j, val in enumerate(src_state.values) if val]
            for outcome in iproduct((1, 0), repeat=len(ones)):
                w = pr
                for o in outcome:
                    w *= heads if o else 1 - heads
                if not w:
                    continue
                values = [0] * self.k
                for j, o in zip(ones, outcome):
                    values[j] = o
                dadd(out, BState(tuple(values), src_state.turn, src_state), w)
        return out

    def _step(self, state):
        out = {}
        turn = state.turn
        nxt = (turn + 1) % self.k
        heads = self.heads
        for succ, pr in self.source.step(state.src).items():
            src_value = succ.values[turn]
            for value, w in ((1, heads), (0, 1 - heads)) if src_value else ((0, Fraction(1)),):
                if not w:
                    continue
                values = (state.values[:turn] + (value,)
                          + state.values[turn + 1:])
                dadd(out, BState(values, nxt, succ), pr * w)
        return out

    def descriptor(self):
        return {"kind": "bernoulli_thin", "q": str(self.p),
                "source": self.source.descriptor()}


def bernoulli_extract(process: CouplingProcess, v: int = 1):
    """1-avoidance Bernoulli(1/n) family watched off a looped coupling."""
    return ExtractedBernoulli(process, v)


def bernoulli_thin(source: BernoulliProcess, q):
    """Thin a 1-avoidance Bernoulli(p) family down to rate q <= p."""
    if Fraction(q) == source.p:
        return source
    return ThinnedBernoulli(source, q)


def bernoulli_values_from_log(log, v: int):
    """Per-walker indicator series [walker at v] from a trajectory log."""
    return {j: (log.walker_series(j) == v).astype(int)
            for j in range(log.k)}


class LiftedProcess(CouplingProcess):
    """Coupling on n+1 looped vertices built from one on n plus a
    1-avoidance Bernoulli(1/(n+1)) family: a walker sits on the new
    vertex exactly while its Bernoulli value is 1."""

    def __init__(self, base: CouplingProcess, bern: BernoulliProcess):
        if base.graph.mode != LOOPED:
            raise BadParam("lift needs a coupling on a looped graph")
        n = base.graph.n
        if bern.p != Fraction(1, n + 1):
            raise BadParam(
                f"lift needs a Bernoulli(1/{n + 1}) family, got {bern.p}")
        if bern.k != base.k:
            raise BadParam("walker counts differ between base and Bernoulli")
        self.base = base
        self.bern = bern
        self.new_vertex = n
        super().__init__(complete_looped(n + 1), base.k, markovian=False,
                         waves=False, min_entropy=False, memory_depth=1)

    def _positions(self, base_state, bern_state):
        nv = self.new_vertex
        return tuple(
            nv if val else pos
            for pos, val in zip(base_state.positions, bern_state.values)
        )

    def _initial(self):
        out = {}
        for bs, pb in self.base.initial().items():
            for vs, pv in self.bern.initial().items():
                out[State(self._positions(bs, vs), 0, (bs, vs))] = pb * pv
        return out

    def _step(self, state):
        bs, vs = state.aux
        turn = state.turn
        nxt = (turn + 1) % self.k
        out = {}
        for bsucc, pb in self.base.step(bs).items():
            for vsucc, pv in self.bern.step(vs).items():
                pos = (self.new_vertex if vsucc.values[turn]
                       else bsucc.positions[turn])
                positions = (state.positions[:turn] + (pos,)
                             + state.positions[turn + 1:])
                dadd(out, State(positions, nxt, (bsucc, vsucc)), pb * pv)
        return out

    def descriptor(self):
        return {"kind": "lift", "base": self.base.descriptor(),
                "bern": self.bern.descriptor()}


def lift(base: CouplingProcess, bern: BernoulliProcess = None,
         v: int = 1) -> LiftedProcess:
    """Lift a looped-graph coupling from n to n+1 vertices.

    Without an explicit Bernoulli family, extraction at vertex ``v`` from
    an independent copy of the base, thinned to rate 1/(n+1), is used.
    """
    if bern is None:
        n = base.graph.n
        bern = bernoulli_thin(bernoulli_extract(base, v), Fraction(1, n + 1))
    return LiftedProcess(base, bern)
