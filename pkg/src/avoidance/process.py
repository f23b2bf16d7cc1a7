"""The coupling-process contract: exact distribution machines plus simulation.

A coupling of k walkers is represented as a finite-state machine whose
states carry the walker positions, the index of the next walker to move,
and whatever bounded auxiliary memory the construction needs.  Each state
maps to an exact successor distribution in which exactly the turn-walker
has moved.  Simulation, exact verification, and statistical verification
all derive from the same machine, so the simulated law and the checked
law cannot drift apart.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, NamedTuple

import numpy as np

from .errors import CollisionError, StateSpaceTooLarge
from .graphs import GraphSpec


class State(NamedTuple):
    """One machine state: positions by walker index, whose turn, memory."""

    positions: tuple
    turn: int
    aux: Any


class Move(NamedTuple):
    walker: int
    frm: int
    to: int


def dadd(dist: dict, key, p):
    if p:
        dist[key] = dist.get(key, 0) + p


def dist_total(dist: dict):
    total = 0
    for p in dist.values():
        total = p + total
    return total


def assert_unit(dist: dict, what="distribution"):
    total = dist_total(dist)
    if total != 1:
        raise AssertionError(f"{what} sums to {total}, not 1")


class CouplingProcess:
    """Abstract k-walker avoidance-coupling machine.

    Subclasses implement ``_initial`` and ``_step``; this base supplies
    caching, sampling tables, and generic hooks used by the combinators
    (stationary configuration law at the start of a round, and its
    conditionals given a prefix of placed walkers).
    """

    #: every shipped construction starts in its round-chain stationary law
    initial_is_stationary = True

    def __init__(self, graph: GraphSpec, k: int, *, markovian: bool,
                 waves: bool, min_entropy: bool, memory_depth: int):
        self.graph = graph
        self.k = k
        self.markovian = markovian
        self.waves = waves
        self.min_entropy = min_entropy
        self.memory_depth = memory_depth
        self._initial_cache = None
        self._step_cache: dict[State, dict] = {}
        self._tables: dict[State, tuple] = {}
        self._initial_table = None
        self._stationary_cache = None

    # -- machine definition -------------------------------------------------

    def _initial(self) -> dict:
        raise NotImplementedError

    def _step(self, state: State) -> dict:
        raise NotImplementedError

    def initial(self) -> dict:
        if self._initial_cache is None:
            self._initial_cache = self._initial()
        return self._initial_cache

    def step(self, state: State) -> dict:
        """Exact successor distribution.  Treat the result as read-only."""
        dist = self._step_cache.get(state)
        if dist is None:
            dist = self._step(state)
            self._step_cache[state] = dist
        return dist

    def descriptor(self) -> dict:
        """Plan-style description of this construction."""
        raise NotImplementedError

    @property
    def flags(self) -> dict:
        return {
            "markovian": self.markovian,
            "waves": self.waves,
            "min_entropy": self.min_entropy,
            "memory_depth": self.memory_depth,
        }

    # -- stationary-configuration hooks (used by the cluster-sum) -----------

    def stationary_turn0(self) -> dict:
        """Exact law over start-of-round states under stationarity."""
        if self.initial_is_stationary:
            return self.initial()
        if self._stationary_cache is None:
            from .stationary import stationary_round_distribution

            self._stationary_cache = stationary_round_distribution(self)
        return self._stationary_cache

    def turn0_state_conditional(self, prefix: tuple) -> dict:
        """Stationary start-of-round states, given the first walkers' positions.

        ``prefix`` pins positions of walkers 0..len(prefix)-1.  The default
        filters the materialized stationary law; structured processes
        override this with an analytic computation.
        """
        law = self.stationary_turn0()
        out = {}
        t = len(prefix)
        for st, p in law.items():
            if st.positions[:t] == tuple(prefix):
                dadd(out, st, p)
        total = dist_total(out)
        if not total:
            raise ValueError(f"no stationary state matches prefix {prefix}")
        if total != 1:
            out = {s: p / total for s, p in out.items()}
        return out

    def placement_marginal(self, prefix: tuple) -> dict:
        """Law of the next walker's position under the stationary
        start-of-round configuration law, given the placed prefix."""
        out = {}
        t = len(prefix)
        for st, p in self.turn0_state_conditional(prefix).items():
            dadd(out, st.positions[t], p)
        return out

    # -- sampling ------------------------------------------------------------

    def _table_for(self, state: State):
        tab = self._tables.get(state)
        if tab is None:
            dist = self.step(state)
            succs = list(dist.keys())
            cum, acc = [], 0.0
            for s in succs:
                acc += float(dist[s])
                cum.append(acc)
            cum[-1] = 1.0
            tab = (succs, cum)
            self._tables[state] = tab
        return tab

    def sample_initial(self, rng) -> State:
        if self._initial_table is None:
            dist = self.initial()
            states = list(dist.keys())
            cum, acc = [], 0.0
            for s in states:
                acc += float(dist[s])
                cum.append(acc)
            cum[-1] = 1.0
            self._initial_table = (states, cum)
        states, cum = self._initial_table
        return states[bisect_right(cum, rng.random())]

    def sample_step(self, state: State, rng) -> State:
        succs, cum = self._table_for(state)
        return succs[bisect_right(cum, rng.random())]


class SingleWalker(CouplingProcess):
    """One walker following the graph kernel; the trivial 1-walker coupling."""

    def __init__(self, graph: GraphSpec):
        super().__init__(graph, 1, markovian=True, waves=graph.is_looped,
                         min_entropy=True, memory_depth=0)

    def _initial(self):
        p = Fraction(1, self.graph.n)
        return {State((v,), 0, None): p for v in range(self.graph.n)}

    def _step(self, state):
        return {
            State((u,), 0, None): p
            for u, p in self.graph.kernel(state.positions[0]).items()
        }

    def turn0_state_conditional(self, prefix):
        if len(prefix) == 0:
            return self.stationary_turn0()
        return {State(tuple(prefix), 0, None): Fraction(1)}

    def descriptor(self):
        return {"kind": "single", "n": self.graph.n, "mode": self.graph.mode}


def build_single_walker(graph: GraphSpec) -> SingleWalker:
    return SingleWalker(graph)


# -- simulation ---------------------------------------------------------------


def advance_turn(process: CouplingProcess, state: State, rng):
    """Sample one turn.  Returns (successor state, move record).

    Raises CollisionError if the sampled destination is occupied by
    another walker; unreachable for correct constructions.
    """
    turn = state.turn
    succ = process.sample_step(state, rng)
    frm = state.positions[turn]
    to = succ.positions[turn]
    for i, pos in enumerate(state.positions):
        if i != turn and pos == to:
            raise CollisionError(turn, frm, to, state.positions)
    return succ, Move(turn, frm, to)


@dataclass
class TrajectoryLog:
    """Round-by-round record of a simulated coupling.

    Positions are stored compactly: the initial configuration plus each
    walker's position after its move in every round.  Walker j's position
    before round t is ``moves_to[t-1, j]`` (or the initial position).
    """

    n: int
    loop_mode: str
    k: int
    seed: int
    construction: str
    initial_positions: np.ndarray
    moves_to: np.ndarray
    rest_wave: np.ndarray

    @property
    def rounds(self) -> int:
        return int(self.moves_to.shape[0])

    def positions_before(self, t: int) -> np.ndarray:
        if t == 0:
            return self.initial_positions
        return self.moves_to[t - 1]

    def moves(self, t: int):
        before = self.positions_before(t)
        return [Move(j, int(before[j]), int(self.moves_to[t, j]))
                for j in range(self.k)]

    def walker_series(self, j: int) -> np.ndarray:
        """Positions of walker j at times 0..rounds (its own clock)."""
        return np.concatenate(
            [[self.initial_positions[j]], self.moves_to[:, j]]
        ).astype(np.int64)

    def to_jsonl(self, fh):
        header = {"n": self.n, "loop_mode": self.loop_mode, "k": self.k,
                  "seed": self.seed, "construction": self.construction}
        fh.write(json.dumps(header) + "\n")
        for t in range(self.rounds):
            before = self.positions_before(t)
            rec = {
                "t": t,
                "positions": [int(v) for v in before],
                "moves": [
                    {"walker": j, "from": int(before[j]),
                     "to": int(self.moves_to[t, j])}
                    for j in range(self.k)
                ],
                "rest_wave": bool(self.rest_wave[t]),
            }
            fh.write(json.dumps(rec) + "\n")

    def write_jsonl(self, path):
        with open(path, "w") as fh:
            self.to_jsonl(fh)

    @classmethod
    def from_jsonl(cls, fh):
        header = json.loads(fh.readline())
        rows, rests, initial = [], [], None
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if initial is None:
                initial = rec["positions"]
            rows.append([m["to"] for m in sorted(rec["moves"],
                                                 key=lambda m: m["walker"])])
            rests.append(rec["rest_wave"])
        k = header["k"]
        if initial is None:
            initial = [0] * k
        return cls(
            n=header["n"], loop_mode=header["loop_mode"], k=k,
            seed=header["seed"], construction=header["construction"],
            initial_positions=np.asarray(initial, dtype=np.int32),
            moves_to=np.asarray(rows, dtype=np.int32).reshape(len(rows), k),
            rest_wave=np.asarray(rests, dtype=bool),
        )

    @classmethod
    def read_jsonl(cls, path):
        with open(path) as fh:
            return cls.from_jsonl(fh)


def run(process: CouplingProcess, rounds: int, seed: int) -> TrajectoryLog:
    """Simulate ``rounds`` full rounds from the shipped initial law.

    Deterministic for a fixed seed within this implementation.
    """
    if rounds < 0:
        raise ValueError("rounds must be nonnegative")
    rng = np.random.default_rng(seed)
    k = process.k
    state = process.sample_initial(rng)
    initial = np.asarray(state.positions, dtype=np.int32)
    moves_to = np.empty((rounds, k), dtype=np.int32)
    rest = np.empty(rounds, dtype=bool)
    sample = process.sample_step
    tables = process._table_for
    for t in range(rounds):
        before = state.positions
        all_rest = True
        for turn in range(k):
            succs, cum = tables(state)
            succ = succs[bisect_right(cum, rng.random())]
            to = succ.positions[turn]
            pos = state.positions
            for i in range(k):
                if i != turn and pos[i] == to:
                    raise CollisionError(turn, pos[turn], to, pos)
            if to != before[turn]:
                all_rest = False
            moves_to[t, turn] = to
            state = succ
        rest[t] = all_rest
    return TrajectoryLog(
        n=process.graph.n, loop_mode=process.graph.loop_label, k=k,
        seed=seed, construction=json.dumps(process.descriptor()),
        initial_positions=initial, moves_to=moves_to, rest_wave=rest,
    )


# -- exhaustive exploration ---------------------------------------------------


def enumerate_states(process: CouplingProcess, max_states: int = 200_000):
    """All states reachable from the initial support, breadth first."""
    seen = list(process.initial().keys())
    seen_set = set(seen)
    i = 0
    while i < len(seen):
        state = seen[i]
        i += 1
        for succ in process.step(state):
            if succ not in seen_set:
                seen_set.add(succ)
                seen.append(succ)
                if len(seen) > max_states:
                    raise StateSpaceTooLarge(
                        f"more than {max_states} reachable states")
    return seen


def audit_avoidance(process: CouplingProcess, max_states: int = 200_000):
    """Check every reachable transition: unit mass, turn cycling, mover-only
    movement, and no positive-probability move onto an occupied vertex.

    Returns the number of states audited; raises on any violation.
    """
    states = enumerate_states(process, max_states)
    k = process.k
    for state in states:
        dist = process.step(state)
        assert_unit(dist, f"step({state})")
        turn = state.turn
        for succ, p in dist.items():
            if succ.turn != (turn + 1) % k:
                raise AssertionError(f"turn did not advance at {state}")
            for i in range(k):
                if i != turn and succ.positions[i] != state.positions[i]:
                    raise AssertionError(
                        f"walker {i} moved during walker {turn}'s turn")
            to = succ.positions[turn]
            for i in range(k):
                if i != turn and state.positions[i] == to:
                    raise CollisionError(turn, state.positions[turn], to,
                                         state.positions)
    return len(states)


def audit_waves(process: CouplingProcess, max_states: int = 200_000):
    """Check the wave discipline on every reachable round.

    Whenever walker 0 stays, all later walkers in the round must stay;
    whenever walker 0 moves, all must move.  Returns audited state count.
    """
    states = enumerate_states(process, max_states)
    k = process.k
    for state in states:
        if state.turn == 0:
            for succ, _ in process.step(state).items():
                resting = succ.positions[0] == state.positions[0]
                _audit_wave_tail(process, succ, resting)
    return len(states)


def _audit_wave_tail(process, state, resting):
    while state.turn != 0:
        turn = state.turn
        for succ in process.step(state):
            stayed = succ.positions[turn] == state.positions[turn]
            if stayed != resting:
                raise AssertionError(
                    f"wave discipline broken at {state}: walker {turn} "
                    f"{'stayed' if stayed else 'moved'} in a "
                    f"{'rest' if resting else 'moving'} round")
        # all successors agree with the discipline; following any one
        # suffices to audit the remaining turns of this round
        state = next(iter(process.step(state)))


def machine_equal(p: CouplingProcess, q: CouplingProcess,
                  max_states: int = 200_000) -> bool:
    """Exact state-by-state equality of two distribution machines."""
    if p.graph != q.graph or p.k != q.k:
        return False
    if p.initial() != q.initial():
        return False
    states_p = enumerate_states(p, max_states)
    states_q = set(enumerate_states(q, max_states))
    if set(states_p) != states_q:
        return False
    return all(p.step(s) == q.step(s) for s in states_p)
