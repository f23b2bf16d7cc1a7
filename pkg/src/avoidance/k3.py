"""Two-walker couplings on the looped triangle with hold probability s.

Two families:

* a non-Markovian coupling for any s >= 1/3: before each round both
  walkers jointly rest with probability r = (3s-1)/2, and otherwise the
  ordered pair of positions jumps uniformly among the collision-free
  pairs other than the current one;
* a Markovian coupling for any s >= 1/2: the mover holds with a
  probability p or 1-p that depends on the cyclic orientation of the
  two occupied vertices, where p*(1-p) = (1-s)/2.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import InfeasibleS
from .exactnum import SqrtExt, sqrt_exact
from .graphs import three_with_hold
from .process import CouplingProcess, State

_REST = "rest"
_STAYED = "stayed"
_MOVED = "moved"


def _third(a, b):
    return 3 - a - b


def _uniform_distinct_pairs():
    p = Fraction(1, 6)
    return {
        State((a, b), 0, None): p
        for a in range(3) for b in range(3) if a != b
    }


class K3NonMarkovian(CouplingProcess):
    """Joint-rest-then-jump coupling; the follower remembers whether the
    leader just held, which is exactly the non-Markovian memory."""

    def __init__(self, s):
        s = Fraction(s)
        if not Fraction(1, 3) <= s < 1:
            raise InfeasibleS(
                f"no avoidance coupling on the held triangle for s={s} < 1/3")
        self.s = s
        self.rest_prob = (3 * s - 1) / 2
        super().__init__(three_with_hold(s), 2, markovian=False, waves=False,
                         min_entropy=(s == Fraction(1, 3)), memory_depth=1)

    def _initial(self):
        return _uniform_distinct_pairs()

    def _step(self, state):
        a, b = state.positions
        if state.turn == 0:
            r = self.rest_prob
            c = _third(a, b)
            out = {}
            if r:
                out[State((a, b), 1, _REST)] = r
            out[State((a, b), 1, _STAYED)] = (1 - r) * Fraction(1, 3)
            out[State((c, b), 1, _MOVED)] = (1 - r) * Fraction(2, 3)
            return out
        free = _third(a, b)
        if state.aux == _REST:
            return {State((a, b), 0, None): Fraction(1)}
        if state.aux == _STAYED:
            # the follower may not hold right after the leader held
            return {State((a, free), 0, None): Fraction(1)}
        half = Fraction(1, 2)
        return {State((a, b), 0, None): half,
                State((a, free), 0, None): half}

    def descriptor(self):
        return {"kind": "k3_nonmarkovian", "s": str(self.s)}


class K3Markovian(CouplingProcess):
    """Hold-table coupling: mover at u with the other walker at v holds
    with probability p if v is the cyclic successor of u, else 1-p."""

    def __init__(self, s, root="upper"):
        s = Fraction(s)
        if not Fraction(1, 2) <= s < 1:
            raise InfeasibleS(
                f"no Markovian avoidance coupling on the held triangle for "
                f"s={s} < 1/2")
        self.s = s
        disc = sqrt_exact(2 * s - 1)
        if root == "upper":
            self.p = (1 + disc) / 2
        elif root == "lower":
            self.p = (1 - disc) / 2
        else:
            raise ValueError("root must be 'upper' or 'lower'")
        super().__init__(three_with_hold(s), 2, markovian=True, waves=False,
                         min_entropy=False, memory_depth=0)

    def hold_prob(self, a, b):
        """Holding probability in configuration (a, b), either mover.

        The table is oriented by the configuration, not by who moves:
        whoever's turn it is holds with probability p when walker 1 sits
        on the cyclic successor of walker 0, else with 1-p.
        """
        return self.p if b == (a + 1) % 3 else 1 - self.p

    def _initial(self):
        # stationary pair law: each walker uniform, the partner at the
        # mover's cyclic successor with probability p (uniform iff p=1/2)
        p = self.p
        out = {}
        for a in range(3):
            out[State((a, (a + 1) % 3), 0, None)] = p / 3
            out[State((a, (a + 2) % 3), 0, None)] = (1 - p) / 3
        return out

    def _step(self, state):
        a, b = state.positions
        hold = self.hold_prob(a, b)
        free = _third(a, b)
        nxt = (state.turn + 1) % 2
        out = {State((a, b), nxt, None): hold}
        moved = (free, b) if state.turn == 0 else (a, free)
        out[State(moved, nxt, None)] = 1 - hold
        return out

    def descriptor(self):
        return {"kind": "k3_markovian", "s": str(self.s)}


def build_k3_nonmarkovian(s) -> K3NonMarkovian:
    """Non-Markovian two-walker coupling on the held triangle, s >= 1/3."""
    return K3NonMarkovian(s)


def build_k3_markovian(s, root="upper") -> K3Markovian:
    """Markovian two-walker coupling on the held triangle, s >= 1/2.

    Both roots of x*(1-x) = (1-s)/2 give valid hold tables; ``root``
    selects which one parametrizes the machine.
    """
    return K3Markovian(s, root=root)
