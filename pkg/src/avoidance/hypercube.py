"""Minimum-entropy Markovian couplings of up to 2^d walkers.

Walkers are indexed by the vertices of a d-dimensional hypercube.  Given
the position of walker 0 and d fair signs e_0..e_{d-1} (one per cube
axis), walker j sits at

    pos(j) = pos(0) + sum over set bits i of j of e_i * 2^i   (mod n)

and the round advances by moving walker 0 to pos(omega) + 2^d + delta
for a fresh fair bit delta (omega = 2^d - 1 is the top walker).  Each
walker's per-round increment is uniform on [1, 2^(d+1)], which is the
simple-walk kernel on three graphs:

* n = 2^(d+1) + 1, unlooped ("unlooped_plus1");
* n = 2^(d+1), looped, where an increment of n is a stay ("looped_pow2");
* n = 2^(d+1) + 1, looped, with an extra all-rest wave of probability
  1/n prepended to each round ("looped_plus1").

Any subset of walkers containing 0 and omega may be kept; a sign not
revealed by any kept walker is drawn fresh at its first use within the
round, which preserves the joint law.  Signs already revealed are
decoded from the positions of walkers that have moved, so states need
no memory beyond positions, the turn, and the resting flag.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import product as iproduct

from .errors import BadWalkerSet, NotWaves
from .graphs import complete, complete_looped
from .process import CouplingProcess, State

UNLOOPED_PLUS1 = "unlooped_plus1"
LOOPED_POW2 = "looped_pow2"
LOOPED_PLUS1 = "looped_plus1"

VARIANTS = (UNLOOPED_PLUS1, LOOPED_POW2, LOOPED_PLUS1)


@dataclass(frozen=True)
class HypercubeParams:
    d: int
    variant: str
    walkers: tuple[int, ...] = None

    def __post_init__(self):
        if self.d < 1:
            raise BadWalkerSet("dimension must be at least 1")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        omega = (1 << self.d) - 1
        walkers = self.walkers
        if walkers is None:
            walkers = tuple(range(1 << self.d))
        else:
            walkers = tuple(sorted(set(walkers)))
        object.__setattr__(self, "walkers", walkers)
        if 0 not in walkers or omega not in walkers:
            raise BadWalkerSet(
                f"walker set must contain 0 and {omega}: {walkers}")
        if any(not 0 <= w <= omega for w in walkers):
            raise BadWalkerSet(f"walker index out of range: {walkers}")

    @property
    def omega(self):
        return (1 << self.d) - 1

    @property
    def n(self):
        base = 1 << (self.d + 1)
        return base if self.variant == LOOPED_POW2 else base + 1


def _support(j):
    """Set-bit indices of walker index j."""
    out, i = [], 0
    while j:
        if j & 1:
            out.append(i)
        j >>= 1
        i += 1
    return out


def _decode_signs(value, support):
    """Recover the signs from sum over support of sign_i * 2^i."""
    signs = {}
    for i in sorted(support, reverse=True):
        if value > 0:
            signs[i] = 1
            value -= 1 << i
        else:
            signs[i] = -1
            value += 1 << i
    if value != 0:
        raise ValueError("offset is not a signed power sum over the support")
    return signs


class HypercubeProcess(CouplingProcess):
    def __init__(self, params: HypercubeParams):
        self.params = params
        d = params.d
        n = params.n
        self.d = d
        self.n = n
        self.wid = params.walkers
        full = len(self.wid) == (1 << d)
        powers = {1 << i for i in range(d)}
        kept = set(self.wid)
        # Markovian when every sign is revealed by a kept power-of-two
        # walker, or when only power-of-two walkers were kept; other
        # subsets are flagged conservatively.
        markovian = powers <= kept or kept - {0, params.omega} <= powers
        waves = params.variant == LOOPED_PLUS1
        self.rest_prob = Fraction(1, n) if waves else Fraction(0)
        graph = (complete(n) if params.variant == UNLOOPED_PLUS1
                 else complete_looped(n))
        super().__init__(graph, len(self.wid), markovian=markovian,
                         waves=waves, min_entropy=full, memory_depth=0)
        self._supports = [_support(w) for w in self.wid]

    def _positions_for(self, x0, signs):
        n = self.n
        return tuple(
            (x0 + sum(signs[i] * (1 << i) for i in supp)) % n
            for supp in self._supports
        )

    def _initial(self):
        d, n = self.d, self.n
        out = {}
        w = Fraction(1, n * (1 << d))
        for x0 in range(n):
            for signs in iproduct((1, -1), repeat=d):
                key = State(self._positions_for(x0, signs), 0, False)
                out[key] = out.get(key, 0) + w
        return out

    def _known_signs(self, positions, turn):
        """Signs of the current round revealed by walkers that have moved."""
        known = {}
        x0 = positions[0]
        n = self.n
        half = n // 2
        for m in range(1, turn):
            supp = self._supports[m]
            off = (positions[m] - x0) % n
            val = off if off <= half else off - n
            known.update(_decode_signs(val, supp))
        return known

    def _step(self, state):
        positions, turn, resting = state
        k = self.k
        n = self.n
        nxt = (turn + 1) % k
        nxt_resting = resting if nxt != 0 else False
        if resting:
            return {State(positions, nxt, nxt_resting): Fraction(1)}
        if turn == 0:
            out = {}
            rest = self.rest_prob
            if rest:
                out[State(positions, nxt, nxt != 0)] = rest
            flip = (1 - rest) / 2
            x_top = positions[-1]
            for delta in (0, 1):
                x0n = (x_top + (1 << self.d) + delta) % n
                key = State((x0n,) + positions[1:], nxt, False)
                out[key] = out.get(key, 0) + flip
            return out
        known = self._known_signs(positions, turn)
        supp = self._supports[turn]
        x0n = positions[0]
        base = x0n + sum(known[i] * (1 << i) for i in supp if i in known)
        free = [i for i in supp if i not in known]
        w = Fraction(1, 1 << len(free))
        out = {}
        for signs in iproduct((1, -1), repeat=len(free)):
            dest = (base + sum(s * (1 << i) for s, i in zip(signs, free))) % n
            key = State(
                positions[:turn] + (dest,) + positions[turn + 1:],
                nxt, nxt_resting)
            out[key] = w
        return out

    def _signs_from_prefix(self, prefix):
        x0 = prefix[0]
        n, half = self.n, self.n // 2
        known = {}
        for m in range(1, len(prefix)):
            off = (prefix[m] - x0) % n
            val = off if off <= half else off - n
            known.update(_decode_signs(val, self._supports[m]))
        return known

    def turn0_state_conditional(self, prefix):
        """Analytic conditional: pin walkers 0..t-1, leave the rest uniform."""
        prefix = tuple(prefix)
        if not prefix:
            return self.stationary_turn0()
        known = self._signs_from_prefix(prefix)
        free = [i for i in range(self.d) if i not in known]
        w = Fraction(1, 1 << len(free))
        out = {}
        for assignment in iproduct((1, -1), repeat=len(free)):
            signs = dict(known)
            signs.update(zip(free, assignment))
            positions = self._positions_for(prefix[0], signs)
            if positions[:len(prefix)] != prefix:
                raise ValueError(f"inconsistent placement prefix {prefix}")
            key = State(positions, 0, False)
            out[key] = out.get(key, 0) + w
        return out

    def placement_marginal(self, prefix):
        prefix = tuple(prefix)
        if not prefix:
            return {v: Fraction(1, self.n) for v in range(self.n)}
        known = self._signs_from_prefix(prefix)
        supp = self._supports[len(prefix)]
        base = prefix[0] + sum(known[i] * (1 << i)
                               for i in supp if i in known)
        free = [i for i in supp if i not in known]
        w = Fraction(1, 1 << len(free))
        out = {}
        for assignment in iproduct((1, -1), repeat=len(free)):
            v = (base + sum(s * (1 << i)
                            for s, i in zip(assignment, free))) % self.n
            out[v] = w
        return out

    def descriptor(self):
        return {"kind": "hypercube", "d": self.d,
                "variant": self.params.variant, "walkers": list(self.wid)}


def build_hypercube(params: HypercubeParams) -> HypercubeProcess:
    """Build the coupling for the given dimension, variant, and walker set."""
    return HypercubeProcess(params)


def reduce_walkers(process: HypercubeProcess, keep) -> HypercubeProcess:
    """Restrict to a subset of walkers; same joint law on the kept ones.

    The Markov flag is recomputed conservatively: it stays set only for
    the full set or when every kept index besides 0 and the top walker
    is a power of two.
    """
    if not isinstance(process, HypercubeProcess):
        raise BadWalkerSet("walker reduction applies to hypercube couplings")
    keep = tuple(sorted(set(keep)))
    current = set(process.wid)
    if not set(keep) <= current:
        raise BadWalkerSet(f"{keep} is not a subset of {process.wid}")
    return build_hypercube(replace(process.params, walkers=keep))


class WaveStripped(CouplingProcess):
    """A waves coupling conditioned on its moving rounds.

    Distribution transform: at the start of each round, drop the
    successors in which the lead walker stays, renormalize, and keep
    every mid-round distribution; the graph loses its loops.
    """

    def __init__(self, inner: CouplingProcess):
        if not inner.waves or not inner.graph.is_looped:
            raise NotWaves(
                "wave stripping needs a looped coupling that stays in waves")
        self.inner = inner
        super().__init__(complete(inner.graph.n), inner.k,
                         markovian=inner.markovian, waves=False,
                         min_entropy=inner.min_entropy,
                         memory_depth=inner.memory_depth)

    def _initial(self):
        return self.inner.initial()

    def _step(self, state):
        dist = self.inner.step(state)
        if state.turn != 0:
            return dist
        mover = state.positions[0]
        kept = {s: p for s, p in dist.items() if s.positions[0] != mover}
        total = sum(kept.values())
        if total == 1:
            return kept
        if not kept:
            raise NotWaves("round never moves; cannot condition on moving")
        return {s: p / total for s, p in kept.items()}

    def turn0_state_conditional(self, prefix):
        # rest rounds do not change the start-of-round law
        return self.inner.turn0_state_conditional(prefix)

    def descriptor(self):
        return {"kind": "wave_strip", "inner": self.inner.descriptor()}


def wave_strip(process: CouplingProcess) -> WaveStripped:
    """Remove the all-rest rounds of a waves coupling on a looped graph."""
    return WaveStripped(process)
