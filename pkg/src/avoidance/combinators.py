"""Combinators that build larger couplings out of smaller ones.

``product``: couplings of r walkers on m looped vertices and s walkers
on n looped vertices combine into a coupling on the m*n-vertex looped
graph whose walkers are pairs (i, j) moving in lexicographic order, the
pair tracking (X_i, Y_j).  Any k pairs with r+s-1 <= k <= r*s may be
kept; keeping every (i, 0) and (0, j) preserves the Markov property.

``sum_couplings``: couplings for k walkers on m and on n vertices (same
loop mode) combine on m+n vertices split into two clusters.  All walkers
share a cluster whenever walker 0 is about to move; walker 0 either
moves within the cluster by its coupling (everyone follows suit) or
switches, landing uniformly in the other cluster, after which each
subsequent walker is placed by sequentially conditioning the destination
coupling's stationary start-of-round configuration law on the walkers
already placed.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import BadKeep, BadParam, KMismatch, LoopMismatch
from .graphs import LOOPED, UNLOOPED, complete, complete_looped
from .process import CouplingProcess, State, dadd


def _multi_step(process, state, count):
    """Distribution after ``count`` consecutive turns of a sub-machine."""
    dist = {state: Fraction(1)}
    for _ in range(count):
        nxt = {}
        for st, pr in dist.items():
            for succ, ps in process.step(st).items():
                dadd(nxt, succ, pr * ps)
        dist = nxt
    return dist


class ProductProcess(CouplingProcess):
    def __init__(self, x: CouplingProcess, y: CouplingProcess, keep=None):
        for side in (x, y):
            if side.graph.mode != LOOPED:
                raise BadParam("product needs couplings on looped graphs")
        r, s = x.k, y.k
        if keep is None:
            keep = [(i, j) for i in range(r) for j in range(s)]
        keep = sorted(set((int(i), int(j)) for i, j in keep))
        if any(not (0 <= i < r and 0 <= j < s) for i, j in keep):
            raise BadKeep(f"pair out of range in {keep}")
        if not r + s - 1 <= len(keep) <= r * s:
            raise BadKeep(
                f"need between {r + s - 1} and {r * s} pairs, got {len(keep)}")
        self.x, self.y = x, y
        self.keep = tuple(keep)
        mandatory = {(i, 0) for i in range(r)} | {(0, j) for j in range(s)}
        markovian = x.markovian and y.markovian and mandatory <= set(keep)
        k = len(keep)
        super().__init__(
            complete_looped(x.graph.n * y.graph.n), k,
            markovian=markovian, waves=x.waves and y.waves,
            min_entropy=x.min_entropy and y.min_entropy,
            memory_depth=max(x.memory_depth, y.memory_depth))
        # how many sub-turns each side must have completed after each turn
        self._xpost, self._ypost = [], []
        xc = yc = 0
        for t, (i, j) in enumerate(self.keep):
            xc, yc = max(xc, i + 1), max(yc, j + 1)
            if t == k - 1:
                xc, yc = r, s
            self._xpost.append(xc)
            self._ypost.append(yc)

    def vertex(self, xv, yv):
        return xv * self.y.graph.n + yv

    def split_vertex(self, v):
        return divmod(v, self.y.graph.n)

    def _positions(self, xs, ys):
        return tuple(self.vertex(xs.positions[i], ys.positions[j])
                     for i, j in self.keep)

    def _initial(self):
        out = {}
        for xs, px in self.x.initial().items():
            for ys, py in self.y.initial().items():
                out[State(self._positions(xs, ys), 0, (xs, ys))] = px * py
        return out

    def _step(self, state):
        turn = state.turn
        i, j = self.keep[turn]
        xs, ys = state.aux
        xpre = self._xpost[turn - 1] if turn else 0
        ypre = self._ypost[turn - 1] if turn else 0
        xdist = _multi_step(self.x, xs, self._xpost[turn] - xpre)
        ydist = _multi_step(self.y, ys, self._ypost[turn] - ypre)
        nxt = (turn + 1) % self.k
        out = {}
        for xsucc, px in xdist.items():
            for ysucc, py in ydist.items():
                dest = self.vertex(xsucc.positions[i], ysucc.positions[j])
                positions = (state.positions[:turn] + (dest,)
                             + state.positions[turn + 1:])
                dadd(out, State(positions, nxt, (xsucc, ysucc)), px * py)
        return out

    def turn0_state_conditional(self, prefix):
        prefix = tuple(prefix)
        xpins, ypins = {}, {}
        for (i, j), v in zip(self.keep, prefix):
            xv, yv = self.split_vertex(v)
            if xpins.setdefault(i, xv) != xv or ypins.setdefault(j, yv) != yv:
                raise ValueError(f"inconsistent placement prefix {prefix}")
        xpref = _pins_as_prefix(xpins)
        ypref = _pins_as_prefix(ypins)
        if xpref is None or ypref is None:
            return super().turn0_state_conditional(prefix)
        out = {}
        for xs, px in self.x.turn0_state_conditional(xpref).items():
            for ys, py in self.y.turn0_state_conditional(ypref).items():
                st = State(self._positions(xs, ys), 0, (xs, ys))
                dadd(out, st, px * py)
        return out

    def descriptor(self):
        return {"kind": "product", "left": self.x.descriptor(),
                "right": self.y.descriptor(),
                "keep": [list(p) for p in self.keep]}


def _pins_as_prefix(pins):
    """Pins {index: value} as a positional prefix, or None if gapped."""
    if set(pins) != set(range(len(pins))):
        return None
    return tuple(pins[i] for i in range(len(pins)))


def product(x: CouplingProcess, y: CouplingProcess, keep=None) -> ProductProcess:
    """Pairwise product coupling on the looped m*n-vertex graph."""
    return ProductProcess(x, y, keep)


_IN = "in"
_SWITCH = "switch"


class SumProcess(CouplingProcess):
    def __init__(self, left: CouplingProcess, right: CouplingProcess):
        if left.k != right.k:
            raise KMismatch(
                f"walker counts differ: {left.k} vs {right.k}")
        mode = left.graph.mode
        if mode != right.graph.mode or mode not in (UNLOOPED, LOOPED):
            raise LoopMismatch(
                f"loop modes differ or unsupported: "
                f"{left.graph.mode} vs {right.graph.mode}")
        self.left, self.right = left, right
        self.sizes = (left.graph.n, right.graph.n)
        n = sum(self.sizes)
        graph = complete_looped(n) if mode == LOOPED else complete(n)
        super().__init__(
            graph, left.k,
            markovian=left.markovian and right.markovian,
            waves=left.waves and right.waves and mode == LOOPED,
            min_entropy=False,
            memory_depth=max(left.memory_depth, right.memory_depth))

    def side_process(self, side):
        return self.left if side == 0 else self.right

    def offset(self, side):
        return 0 if side == 0 else self.sizes[0]

    def side_of(self, v):
        return 0 if v < self.sizes[0] else 1

    def switch_prob(self, side):
        other = self.sizes[1 - side]
        total = self.graph.n
        if self.graph.mode == LOOPED:
            return Fraction(other, total)
        return Fraction(other, total - 1)

    def _wrap(self, side, sub_state):
        off = self.offset(side)
        return State(tuple(p + off for p in sub_state.positions),
                     sub_state.turn, (_IN, side, sub_state))

    def _initial(self):
        out = {}
        n = self.graph.n
        for side in (0, 1):
            w = Fraction(self.sizes[side], n)
            for sub, pr in self.side_process(side).initial().items():
                out[self._wrap(side, sub)] = w * pr
        return out

    def _step(self, state):
        tag = state.aux[0]
        turn = state.turn
        if tag == _IN:
            _, side, sub = state.aux
            proc = self.side_process(side)
            off = self.offset(side)
            out = {}
            stay_scale = Fraction(1)
            if turn == 0:
                sw = self.switch_prob(side)
                stay_scale = 1 - sw
                dest = 1 - side
                doff = self.offset(dest)
                per = sw / self.sizes[dest]
                for v in range(self.sizes[dest]):
                    absv = v + doff
                    if self.k == 1:
                        for fin, pf in self.side_process(
                                dest).turn0_state_conditional((v,)).items():
                            dadd(out, self._wrap(dest, fin), per * pf)
                    else:
                        positions = (absv,) + state.positions[1:]
                        out[State(positions, 1, (_SWITCH, dest))] = per
            for sub_succ, pr in proc.step(sub).items():
                dadd(out, self._wrap(side, sub_succ), stay_scale * pr)
            return out
        # mid-round of a switch: place walker ``turn`` in the destination
        _, dest = state.aux
        proc = self.side_process(dest)
        doff = self.offset(dest)
        prefix = tuple(v - doff for v in state.positions[:turn])
        out = {}
        if turn == self.k - 1:
            for fin, pf in proc.turn0_state_conditional(prefix).items():
                dadd(out, self._wrap(dest, fin), pf)
            return out
        nxt = turn + 1
        for v, pf in proc.placement_marginal(prefix).items():
            positions = (state.positions[:turn] + (v + doff,)
                         + state.positions[turn + 1:])
            dadd(out, State(positions, nxt, (_SWITCH, dest)), pf)
        return out

    def turn0_state_conditional(self, prefix):
        prefix = tuple(prefix)
        if not prefix:
            return self.stationary_turn0()
        side, local = self._localize(prefix)
        return {
            self._wrap(side, sub): pr
            for sub, pr in self.side_process(
                side).turn0_state_conditional(local).items()
        }

    def placement_marginal(self, prefix):
        prefix = tuple(prefix)
        if not prefix:
            n = self.graph.n
            return {v: Fraction(1, n) for v in range(n)}
        side, local = self._localize(prefix)
        off = self.offset(side)
        return {
            v + off: pr
            for v, pr in self.side_process(
                side).placement_marginal(local).items()
        }

    def _localize(self, prefix):
        side = self.side_of(prefix[0])
        off = self.offset(side)
        local = tuple(v - off for v in prefix)
        if any(not 0 <= v < self.sizes[side] for v in local):
            raise ValueError(f"prefix {prefix} straddles the clusters")
        return side, local

    def descriptor(self):
        return {"kind": "sum", "left": self.left.descriptor(),
                "right": self.right.descriptor()}


def sum_couplings(left: CouplingProcess, right: CouplingProcess) -> SumProcess:
    """Cluster-sum coupling on m+n vertices from k-walker couplings on
    m and on n vertices with the same loop mode."""
    return SumProcess(left, right)
