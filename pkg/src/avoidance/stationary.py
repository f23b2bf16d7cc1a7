"""Exact stationary analysis of the joint round chain.

One round = k consecutive turns starting at walker 0.  The round chain
runs on the start-of-round states; its stationary law is what the
cluster-sum samples from and what faithfulness conditioning assumes.
Every shipped construction starts in a stationary law by construction;
the exact solver here exists to verify that and to serve hand-built
machines with small state spaces (dense rational elimination, practical
up to a few hundred states).
"""

from __future__ import annotations

from fractions import Fraction

from .process import CouplingProcess, dadd, enumerate_states


def round_step(process: CouplingProcess, dist):
    """Advance an exact distribution over states by one full round."""
    for _ in range(process.k):
        nxt = {}
        for state, pr in dist.items():
            for succ, ps in process.step(state).items():
                dadd(nxt, succ, pr * ps)
        dist = nxt
    return dist


def round_transition(process: CouplingProcess, max_states: int = 200_000):
    """Round-chain transition law from every reachable start-of-round state."""
    states0 = [s for s in enumerate_states(process, max_states) if s.turn == 0]
    return {s: round_step(process, {s: Fraction(1)}) for s in states0}


def stationary_round_distribution(process: CouplingProcess,
                                  max_states: int = 200_000):
    """Exact stationary law of the round chain, by rational elimination."""
    trans = round_transition(process, max_states)
    states = sorted(trans.keys())
    index = {s: i for i, s in enumerate(states)}
    m = len(states)
    # rows: columns of (R - I) transposed, then the normalization row
    a = [[Fraction(0)] * (m + 1) for _ in range(m)]
    for s, row in trans.items():
        j = index[s]
        a[j][j] -= 1
        for succ, p in row.items():
            a[index[succ]][j] += p
    a[m - 1] = [Fraction(1)] * m + [Fraction(1)]
    # dense Gaussian elimination, exact
    for col in range(m):
        pivot = next(r for r in range(col, m) if a[r][col] != 0)
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(m):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [vr - f * vc for vr, vc in zip(a[r], a[col])]
    return {states[i]: a[i][m] for i in range(m) if a[i][m] != 0}


def initial_is_round_invariant(process: CouplingProcess,
                               max_states: int = 200_000) -> bool:
    """Does one full round map the shipped initial law to itself, exactly?"""
    init = process.initial()
    after = round_step(process, init)
    return after == init


def reversed_round_law(process: CouplingProcess, max_states: int = 200_000):
    """Time-reversed round-chain law under the shipped (stationary) initial.

    Returns {state: {predecessor-ish state: probability}} where the entry
    at (x, y) is P(round ends at x | started at y) reweighted by the
    stationary law, i.e. the transition law of the reversed chain.
    """
    pi = process.stationary_turn0()
    trans = round_transition(process, max_states)
    rev = {s: {} for s in trans}
    for y, row in trans.items():
        for x, p in row.items():
            if pi.get(y, 0) and p:
                dadd(rev[x], y, pi[y] * p / pi[x])
    return rev
