"""Exact and statistical verification of coupling properties.

Exact checks enumerate the distribution machine and use rational (or
quadratic-surd) arithmetic only; statistical checks run on trajectory
logs with explicit test statistics and significance levels.  Every check
returns a VerificationReport; exact verdicts never compare floats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
from scipy import stats as sps

from .errors import EmptyLog, StateSpaceTooLarge
from .exactnum import EntropyValue, SqrtExt, entropy_of_dist, sqrt_exact
from .graphs import GraphSpec, target_kernel
from .process import (CouplingProcess, TrajectoryLog, dadd, dist_total,
                      enumerate_states, run)


@dataclass
class VerificationReport:
    name: str
    mode: str  # "exact" or "statistical"
    verdict: str  # "PASS" or "FAIL"
    witness: Any = None
    numbers: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict == "PASS"

    def to_dict(self):
        return {
            "check": self.name,
            "mode": self.mode,
            "verdict": self.verdict,
            "witness": encode_value(self.witness),
            "numbers": encode_value(self.numbers),
            "params": encode_value(self.params),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def encode_value(v):
    """JSON-safe encoding; exact rationals become {num, den} pairs."""
    if isinstance(v, Fraction):
        return {"num": v.numerator, "den": v.denominator}
    if isinstance(v, SqrtExt):
        return {"a": encode_value(v.a), "b": encode_value(v.b),
                "sqrt_of": v.d}
    if isinstance(v, EntropyValue):
        return {"log2_terms": [[encode_value(k), encode_value(c)]
                               for k, c in sorted(v.terms.items(),
                                                  key=lambda kv: str(kv[0]))],
                "float": float(v)}
    if isinstance(v, dict):
        return {str(k): encode_value(val) for k, val in v.items()}
    if isinstance(v, (list, tuple)):
        return [encode_value(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if hasattr(v, "_fields") and hasattr(v, "positions"):  # State
        return {"positions": list(v.positions), "turn": v.turn,
                "aux": repr(v.aux)}
    return v


def exit_code(reports):
    """0 if every report passed, else 1 (errors are exceptions: 2)."""
    return 0 if all(r.passed for r in reports) else 1


# -- collision audit ----------------------------------------------------------


def check_collisions(log: TrajectoryLog) -> VerificationReport:
    """No move may land on a vertex occupied at the instant of the move."""
    k, rounds = log.k, log.rounds
    witness = None
    collisions = 0
    for j in range(k):
        dest = log.moves_to[:, j]
        for i in range(k):
            if i == j:
                continue
            if i < j:
                other = log.moves_to[:, i]  # i already moved this round
            else:
                other = np.concatenate(
                    [[log.initial_positions[i]], log.moves_to[:-1, i]])
            hits = np.nonzero(dest == other)[0]
            if hits.size:
                collisions += int(hits.size)
                t = int(hits[0])
                if witness is None or (t, j) < (witness["t"], witness["walker"]):
                    witness = {"t": t, "walker": j,
                               "to": int(dest[t]), "occupied_by": i}
    return VerificationReport(
        "collisions", "exact", "PASS" if collisions == 0 else "FAIL",
        witness=witness,
        numbers={"collisions": collisions, "rounds": rounds},
    )


# -- exact faithfulness -------------------------------------------------------


def check_faithfulness_exact(process: CouplingProcess, depth: int = 4,
                             max_support: int = 2_000_000
                             ) -> VerificationReport:
    """Conditional law of each walker's next step given its own history of
    length <= depth equals the single-walker kernel, exactly; the initial
    marginal of every walker must be uniform."""
    g, k = process.graph, process.k
    init = process.initial()
    uniform = Fraction(1, g.n)
    for j in range(k):
        marg = {}
        for s, p in init.items():
            dadd(marg, s.positions[j], p)
        if len(marg) != g.n or any(p != uniform for p in marg.values()):
            return VerificationReport(
                "faithfulness-exact", "exact", "FAIL",
                witness={"walker": j, "initial_marginal": marg},
                params={"depth": depth})
    for j in range(k):
        rep = _faithful_one_walker(process, j, depth, max_support)
        if rep is not None:
            return rep
    return VerificationReport(
        "faithfulness-exact", "exact", "PASS",
        params={"depth": depth, "walkers": k, "n": g.n})


def _faithful_one_walker(process, j, depth, max_support):
    g, k = process.graph, process.k
    cur = {}
    for s, p in process.initial().items():
        hist = (s.positions[j],)
        cur.setdefault(hist, {})
        dadd(cur[hist], s, p)
    for _ in range(depth):
        for turn in range(k):
            new = {}
            conds = {} if turn == j else None
            size = 0
            for hist, states in cur.items():
                for s, pr in states.items():
                    for succ, ps in process.step(s).items():
                        w = pr * ps
                        if not w:
                            continue
                        if turn == j:
                            v = succ.positions[j]
                            dadd(conds.setdefault(hist, {}), v, w)
                            nh = hist + (v,)
                        else:
                            nh = hist
                        sub = new.setdefault(nh, {})
                        dadd(sub, succ, w)
                        size += 1
            if size > max_support:
                raise StateSpaceTooLarge(
                    f"faithfulness propagation support exceeds {max_support}")
            if turn == j:
                for hist, cond in conds.items():
                    total = dist_total(cond)
                    law = {v: p / total for v, p in cond.items()}
                    kernel = target_kernel(g, hist[-1])
                    if law != kernel:
                        return VerificationReport(
                            "faithfulness-exact", "exact", "FAIL",
                            witness={"walker": j, "history": list(hist),
                                     "expected": kernel, "actual": law},
                            params={"depth": depth})
            cur = new
    return None


# -- empirical faithfulness ---------------------------------------------------


def _increment_kernel(log: TrajectoryLog):
    n = log.n
    mode = log.loop_mode
    if mode == "unlooped":
        return {d: Fraction(1, n - 1) for d in range(1, n)}
    if mode == "looped":
        return {d: Fraction(1, n) for d in range(n)}
    if mode.startswith("hold(") and mode.endswith(")"):
        s = Fraction(mode[5:-1])
        out = {1: (1 - s) / 2, 2: (1 - s) / 2}
        if s:
            out[0] = s
        return out
    raise ValueError(f"unknown loop mode {mode!r}")


def check_faithfulness_empirical(log: TrajectoryLog, alpha: float = 1e-3
                                 ) -> VerificationReport:
    """Per-walker chi-square of step increments against the kernel, plus a
    lag-1 independence test; Bonferroni-corrected across walkers."""
    if log.rounds == 0:
        raise EmptyLog("cannot test an empty trajectory")
    kernel = _increment_kernel(log)
    classes = sorted(kernel)
    cutoff = alpha / log.k
    details, worst = {}, None
    verdict = "PASS"
    for j in range(log.k):
        series = log.walker_series(j)
        inc = (series[1:] - series[:-1]) % log.n
        counts = np.array([(inc == c).sum() for c in classes], dtype=float)
        expected = np.array([float(kernel[c]) for c in classes]) * inc.size
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        p_fit = float(sps.chi2.sf(chi2, len(classes) - 1))
        table = np.zeros((len(classes), len(classes)))
        idx = {c: i for i, c in enumerate(classes)}
        a = np.array([idx[c] for c in inc[:-1]])
        b = np.array([idx[c] for c in inc[1:]])
        np.add.at(table, (a, b), 1)
        keep = table.sum(axis=1) > 0
        tab = table[keep][:, table.sum(axis=0) > 0]
        if min(tab.shape) > 1:
            chi2_ind, p_ind, _, _ = sps.chi2_contingency(tab,
                                                         correction=False)
        else:
            chi2_ind, p_ind = 0.0, 1.0
        details[j] = {"chi2_fit": chi2, "p_fit": p_fit,
                      "chi2_lag1": float(chi2_ind), "p_lag1": float(p_ind),
                      "steps": int(inc.size)}
        if p_fit <= cutoff or p_ind <= cutoff:
            verdict = "FAIL"
            if worst is None:
                worst = {"walker": j, **details[j]}
    return VerificationReport(
        "faithfulness-empirical", "statistical", verdict, witness=worst,
        numbers={"per_walker": details},
        params={"alpha": alpha, "bonferroni_cutoff": cutoff,
                "classes": classes})


# -- Markov property ----------------------------------------------------------


def _move_law(process, state):
    out = {}
    for succ, p in process.step(state).items():
        dadd(out, succ.positions[state.turn], p)
    return out


def check_markov(process: CouplingProcess, depth: int = None,
                 max_states: int = 200_000) -> VerificationReport:
    """The mover's conditional law must coincide across every reachable
    state sharing (positions, turn); a distinguishing pair is a witness.

    The full reachable closure is checked, which subsumes any history
    depth; ``depth`` is recorded in the report for context only.
    """
    states = enumerate_states(process, max_states)
    groups = {}
    for s in states:
        groups.setdefault((s.positions, s.turn), []).append(s)
    compared = 0
    for (positions, turn), members in groups.items():
        if len(members) == 1:
            continue
        ref = _move_law(process, members[0])
        for other in members[1:]:
            law = _move_law(process, other)
            compared += 1
            if law != ref:
                return VerificationReport(
                    "markov", "exact", "FAIL",
                    witness={"positions": list(positions), "turn": turn,
                             "state_a": members[0], "state_b": other,
                             "law_a": ref, "law_b": law},
                    numbers={"states": len(states)},
                    params={"depth": depth})
    return VerificationReport(
        "markov", "exact", "PASS",
        numbers={"states": len(states), "aux_comparisons": compared},
        params={"depth": depth})


# -- entropy ------------------------------------------------------------------


def single_walker_entropy(graph: GraphSpec) -> EntropyValue:
    """Per-step entropy of one walker on the graph (vertex-transitive)."""
    return entropy_of_dist(graph.kernel(0).values())


def entropy_rate(process: CouplingProcess, max_support: int = 200_000,
                 fallback_rounds: int = 50_000, seed: int = 0
                 ) -> VerificationReport:
    """Expected Shannon entropy of the joint per-round choice under the
    stationary law, in bits per round, with an exact minimum-entropy
    verdict (equality with the single-walker step entropy).

    Falls back to empirical bit metering along a simulated trajectory
    when the exact propagation would exceed ``max_support`` states.
    """
    single = single_walker_entropy(process.graph)
    try:
        total = EntropyValue()
        cur = process.stationary_turn0()
        for _ in range(process.k):
            nxt = {}
            for s, pr in cur.items():
                d = process.step(s)
                total = total + entropy_of_dist(d.values()).scaled(pr)
                for succ, ps in d.items():
                    dadd(nxt, succ, pr * ps)
                if len(nxt) > max_support:
                    raise StateSpaceTooLarge("entropy propagation too large")
            cur = nxt
        cmp = total.compare(single)
        return VerificationReport(
            "entropy", "exact",
            "PASS" if cmp == 0 else "FAIL",
            numbers={"bits_per_round": total,
                     "bits_per_round_float": float(total),
                     "single_walker_bits": single,
                     "single_walker_bits_float": float(single),
                     "comparison": {-1: "less", 0: "equal", 1: "greater"}[cmp]},
            params={"mode": "exact"})
    except StateSpaceTooLarge:
        rate = entropy_rate_empirical(process, fallback_rounds, seed)
        diff = abs(rate - float(single))
        return VerificationReport(
            "entropy", "statistical",
            "PASS" if diff < 1e-6 else "FAIL",
            numbers={"bits_per_round_float": rate,
                     "single_walker_bits_float": float(single)},
            params={"mode": "empirical", "rounds": fallback_rounds,
                    "seed": seed})


def entropy_rate_empirical(process: CouplingProcess, rounds: int,
                           seed: int = 0) -> float:
    """Average per-round entropy of the visited step distributions."""
    rng = np.random.default_rng(seed)
    state = process.sample_initial(rng)
    total = 0.0
    for _ in range(rounds * process.k):
        dist = process.step(state)
        total += float(entropy_of_dist(dist.values()))
        state = process.sample_step(state, rng)
    return total / rounds


# -- repeat-return event statistics -------------------------------------------


def leave_return_vs_stay(n: int):
    """The quantities behind the (n-1)-walker obstruction on n looped
    vertices: P(leave and return) = (n-1)/n^2 per walker versus the stay
    probability 1/n, and whether 2(n-1)/n^2 exceeds 1/n."""
    lhs = Fraction(2 * (n - 1), n * n)
    rhs = Fraction(1, n)
    return {"two_leave_return": lhs, "stay": rhs, "strict": lhs > rhs}


def event_stats(log: TrajectoryLog, sigmas: float = 4.0
                ) -> VerificationReport:
    """Per-walker estimates of P(same position at t-1 and t+1, different
    at t) and P(same position at t-1 and t), compared with (n-1)/n^2 and
    1/n within a binomial tolerance."""
    if log.loop_mode != "looped":
        raise ValueError("event statistics are defined on looped graphs")
    if log.rounds < 3:
        raise EmptyLog("need at least 3 rounds")
    n = log.n
    pa = Fraction(n - 1, n * n)
    pb = Fraction(1, n)
    verdict = "PASS"
    per_walker = {}
    witness = None
    for j in range(log.k):
        x = log.walker_series(j)
        same1 = x[1:] == x[:-1]
        nb = int(same1.size)
        b_hat = float(same1.sum()) / nb
        ret = (x[2:] == x[:-2]) & (x[1:-1] != x[:-2])
        na = int(ret.size)
        a_hat = float(ret.sum()) / na
        tol_a = sigmas * float(pa * (1 - pa) / na) ** 0.5
        tol_b = sigmas * float(pb * (1 - pb) / nb) ** 0.5
        ok = abs(a_hat - float(pa)) <= tol_a and abs(b_hat - float(pb)) <= tol_b
        per_walker[j] = {"p_leave_return": a_hat, "p_stay": b_hat,
                         "tol_leave_return": tol_a, "tol_stay": tol_b,
                         "samples": na}
        if not ok:
            verdict = "FAIL"
            witness = witness or {"walker": j, **per_walker[j]}
    return VerificationReport(
        "event-stats", "statistical", verdict, witness=witness,
        numbers={"per_walker": per_walker,
                 "expected_leave_return": pa, "expected_stay": pb,
                 "inequality": leave_return_vs_stay(n)},
        params={"sigmas": sigmas, "n": n})


# -- feasibility of the held-triangle Markovian family -------------------------


def k3_markov_feasibility(s) -> VerificationReport:
    """Solve the hold-table constraints for two Markovian walkers on the
    held triangle: the two hold probabilities must agree and satisfy
    x*(1-x) = (1-s)/2, which has real roots exactly when s >= 1/2."""
    s = Fraction(s)
    if not 0 <= s < 1:
        raise ValueError("hold probability must lie in [0, 1)")
    disc = 2 * s - 1
    if disc < 0:
        return VerificationReport(
            "k3-markov-feasibility", "exact", "PASS",
            numbers={"s": s, "feasible": False,
                     "constraint": "x*(1-x) = (1-s)/2 has no real roots"},
            params={})
    root = sqrt_exact(disc)
    p_hi = (1 + root) / 2
    p_lo = (1 - root) / 2
    return VerificationReport(
        "k3-markov-feasibility", "exact", "PASS",
        numbers={"s": s, "feasible": True, "roots": [p_hi, p_lo],
                 "roots_float": [float(p_hi), float(p_lo)]},
        params={})


def k3_markov_threshold(tol: float = 1e-6) -> float:
    """Bisection for the smallest s admitting the Markovian hold table."""
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if Fraction(mid) >= Fraction(1, 2):
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


# -- continuous-time turn-taking ------------------------------------------------


def continuous_time_check(process: CouplingProcess, rounds: int, seed: int,
                          alpha: float = 1e-3, mean_tol: float = 0.02
                          ) -> VerificationReport:
    """Wrap a simulated trajectory with Gamma(1/k, 1) inter-turn waits and
    test each walker's inter-move times against Exponential(mean 1)."""
    log = run(process, rounds, seed)  # raises on any collision
    k = process.k
    rng = np.random.default_rng(seed + 1)
    waits = rng.gamma(1.0 / k, 1.0, size=rounds * k)
    times = np.cumsum(waits)
    verdict = "PASS"
    per_walker = {}
    witness = None
    for j in range(k):
        move_times = times[j::k]
        gaps = np.diff(move_times)
        if j == 0:
            gaps = np.concatenate([[move_times[0]], gaps])
        ks = sps.kstest(gaps, "expon")
        mean = float(gaps.mean())
        ok = ks.pvalue > alpha and abs(mean - 1.0) <= mean_tol
        per_walker[j] = {"ks_p": float(ks.pvalue), "mean": mean,
                         "moves": int(gaps.size)}
        if not ok:
            verdict = "FAIL"
            witness = witness or {"walker": j, **per_walker[j]}
    return VerificationReport(
        "continuous-time", "statistical", verdict, witness=witness,
        numbers={"per_walker": per_walker},
        params={"alpha": alpha, "mean_tol": mean_tol, "rounds": rounds,
                "seed": seed, "collisions": 0})


# -- 1-avoidance Bernoulli checks ----------------------------------------------


def check_bernoulli_iid(bern, depth: int = 4) -> VerificationReport:
    """Each walker's value sequence must be i.i.d. Bernoulli(p), exactly."""
    k, p = bern.k, bern.p
    init = bern.initial()
    for j in range(k):
        marg = {}
        for s, pr in init.items():
            dadd(marg, s.values[j], pr)
        if marg.get(1, 0) != p:
            return VerificationReport(
                "bernoulli-iid", "exact", "FAIL",
                witness={"walker": j, "initial_rate": marg.get(1, 0),
                         "expected": p},
                params={"depth": depth})
    for j in range(k):
        cur = {}
        for s, pr in init.items():
            hist = (s.values[j],)
            dadd(cur.setdefault(hist, {}), s, pr)
        for _ in range(depth):
            for turn in range(k):
                new = {}
                conds = {} if turn == j else None
                for hist, states in cur.items():
                    for s, pr in states.items():
                        for succ, ps in bern.step(s).items():
                            w = pr * ps
                            if turn == j:
                                v = succ.values[j]
                                dadd(conds.setdefault(hist, {}), v, w)
                                nh = hist + (v,)
                            else:
                                nh = hist
                            dadd(new.setdefault(nh, {}), succ, w)
                if turn == j:
                    for hist, cond in conds.items():
                        total = dist_total(cond)
                        rate = cond.get(1, 0) / total
                        if rate != p:
                            return VerificationReport(
                                "bernoulli-iid", "exact", "FAIL",
                                witness={"walker": j, "history": list(hist),
                                         "rate": rate, "expected": p},
                                params={"depth": depth})
                cur = new
    return VerificationReport("bernoulli-iid", "exact", "PASS",
                              numbers={"rate": p},
                              params={"depth": depth, "walkers": k})


def check_no_simultaneous_ones(bern, max_states: int = 200_000
                               ) -> VerificationReport:
    """Exhaustively: no reachable state has two walkers at value 1."""
    states = enumerate_states(bern, max_states)
    for s in states:
        if sum(s.values) > 1:
            return VerificationReport(
                "bernoulli-1-avoidance", "exact", "FAIL",
                witness={"values": list(s.values), "turn": s.turn})
    return VerificationReport(
        "bernoulli-1-avoidance", "exact", "PASS",
        numbers={"states": len(states)})
