"""Complete-graph walk specifications and the single-walker step kernel."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

UNLOOPED = "unlooped"
LOOPED = "looped"
HOLD = "hold"


@dataclass(frozen=True)
class GraphSpec:
    """State space and step law of one walker.

    mode "unlooped": uniform over the n-1 other vertices.
    mode "looped":   one unit self-loop per vertex, uniform over all n.
    mode "hold":     n == 3 only; stay with probability s, each other
                     vertex with (1-s)/2.
    """

    n: int
    mode: str
    s: Fraction | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 vertices")
        if self.mode not in (UNLOOPED, LOOPED, HOLD):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == HOLD:
            if self.n != 3:
                raise ValueError("hold mode is defined for n == 3 only")
            s = self.s
            if s is None or not (0 <= s < 1):
                raise ValueError("hold probability must lie in [0, 1)")
        elif self.s is not None:
            raise ValueError("hold probability only applies to hold mode")

    @property
    def is_looped(self):
        return self.mode != UNLOOPED

    @property
    def loop_label(self):
        if self.mode == HOLD:
            return f"hold({self.s})"
        return self.mode

    def kernel(self, v: int) -> dict[int, Fraction]:
        """Exact step distribution of a single walker at vertex v."""
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} out of range [0, {self.n})")
        if self.mode == UNLOOPED:
            p = Fraction(1, self.n - 1)
            return {u: p for u in range(self.n) if u != v}
        if self.mode == LOOPED:
            p = Fraction(1, self.n)
            return {u: p for u in range(self.n)}
        s = Fraction(self.s)
        move = (1 - s) / 2
        out = {u: move for u in range(3) if u != v}
        if s:
            out[v] = s
        return out


def complete(n: int) -> GraphSpec:
    """K_n without loops."""
    return GraphSpec(n, UNLOOPED)


def complete_looped(n: int) -> GraphSpec:
    """K_n with one self-loop per vertex (stay probability 1/n)."""
    return GraphSpec(n, LOOPED)


def three_with_hold(s) -> GraphSpec:
    """The 3-vertex graph with stay probability s."""
    return GraphSpec(3, HOLD, Fraction(s))


def target_kernel(g: GraphSpec, v: int) -> dict[int, Fraction]:
    """Single-walker step law from v, as exact rationals."""
    return g.kernel(v)
