"""Exception types shared across the package."""


class AvoidanceError(Exception):
    """Base class for all package errors."""


class CollisionError(AvoidanceError):
    """A sampled move landed on an occupied vertex.

    Unreachable for the shipped constructions; exists to catch bugs in
    hand-built processes.
    """

    def __init__(self, walker, frm, to, positions):
        self.walker = walker
        self.frm = frm
        self.to = to
        self.positions = tuple(positions)
        super().__init__(
            f"walker {walker} moved {frm}->{to} onto an occupied vertex "
            f"(positions {self.positions})"
        )


class InfeasibleS(AvoidanceError):
    """Hold probability below the feasibility threshold of the family."""


class BadFactors(AvoidanceError):
    """Cluster construction needs both factors at least 2."""


class BadWalkerSet(AvoidanceError):
    """Walker subset missing 0 or the top walker, or out of range."""


class NotWaves(AvoidanceError):
    """Wave stripping applied to a process that does not stay in waves."""


class BadKeep(AvoidanceError):
    """Product keep-set violates the size bounds."""


class KMismatch(AvoidanceError):
    """Sum inputs disagree on walker count."""


class LoopMismatch(AvoidanceError):
    """Sum inputs disagree on loop mode."""


class BadParam(AvoidanceError):
    """Combinator input parameter outside its contract."""


class BadThin(AvoidanceError):
    """Thinning target rate exceeds the source rate."""


class EmptyLog(AvoidanceError):
    """Statistical check invoked on a log with no rounds."""


class StateSpaceTooLarge(AvoidanceError):
    """Exact enumeration would exceed the configured state bound."""


class InfeasibleWithMethod(AvoidanceError):
    """The implemented constructions produce no plan for this target.

    Not a nonexistence proof: only the methods shipped here were tried.
    """
