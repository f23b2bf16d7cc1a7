"""Collision-avoiding couplings of random walkers on complete graphs.

Couplings are exact finite-state distribution machines: states carry
walker positions, the turn, and bounded memory; each state exposes an
exact successor law in which only the turn-walker moves.  Simulation and
verification both derive from the machines, so every property claimed
for a construction can be checked exactly at desk scale.
"""

from .graphs import GraphSpec, complete, complete_looped, target_kernel, \
    three_with_hold
from .process import (CouplingProcess, Move, State, TrajectoryLog,
                      advance_turn, audit_avoidance, audit_waves,
                      build_single_walker, enumerate_states, machine_equal,
                      run)
from .k3 import build_k3_markovian, build_k3_nonmarkovian
from .composite import build_composite, build_composite_min_entropy
from .hypercube import (HypercubeParams, LOOPED_PLUS1, LOOPED_POW2,
                        UNLOOPED_PLUS1, build_hypercube, reduce_walkers,
                        wave_strip)
from .bernoulli import (BernoulliProcess, bernoulli_extract, bernoulli_thin,
                        bernoulli_values_from_log, lift)
from .combinators import product, sum_couplings
from .planner import (Plan, evaluate, guaranteed_walkers, hamming_bound,
                      max_walkers, plan_for, plan_looped, plan_unlooped)
from .stationary import (initial_is_round_invariant, reversed_round_law,
                         round_transition, stationary_round_distribution)
from .verifier import (VerificationReport, check_bernoulli_iid,
                       check_collisions, check_faithfulness_empirical,
                       check_faithfulness_exact, check_markov,
                       check_no_simultaneous_ones, continuous_time_check,
                       entropy_rate, event_stats, exit_code,
                       k3_markov_feasibility, k3_markov_threshold,
                       leave_return_vs_stay, single_walker_entropy)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "GraphSpec", "complete", "complete_looped", "three_with_hold",
    "target_kernel",
    "CouplingProcess", "State", "Move", "TrajectoryLog", "advance_turn",
    "run", "enumerate_states", "audit_avoidance", "audit_waves",
    "machine_equal", "build_single_walker",
    "build_k3_nonmarkovian", "build_k3_markovian",
    "build_composite", "build_composite_min_entropy",
    "HypercubeParams", "UNLOOPED_PLUS1", "LOOPED_POW2", "LOOPED_PLUS1",
    "build_hypercube", "reduce_walkers", "wave_strip",
    "BernoulliProcess", "bernoulli_extract", "bernoulli_thin",
    "bernoulli_values_from_log", "lift",
    "product", "sum_couplings",
    "Plan", "plan_looped", "plan_unlooped", "plan_for", "max_walkers",
    "hamming_bound", "guaranteed_walkers", "evaluate",
    "stationary_round_distribution", "round_transition",
    "initial_is_round_invariant", "reversed_round_law",
    "VerificationReport", "check_collisions", "check_faithfulness_exact",
    "check_faithfulness_empirical", "check_markov", "entropy_rate",
    "event_stats", "k3_markov_feasibility", "k3_markov_threshold",
    "continuous_time_check", "check_bernoulli_iid",
    "check_no_simultaneous_ones", "leave_return_vs_stay",
    "single_walker_entropy", "exit_code", "errors",
]
