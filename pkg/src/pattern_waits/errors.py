"""Exception hierarchy.

Every domain failure derives from :class:`PatternWaitsError` so the CLI can
map it to exit code 1 with a single ``except``.
"""

from __future__ import annotations


class PatternWaitsError(Exception):
    """Base class for all domain errors."""


class ValidationError(PatternWaitsError, ValueError):
    """Malformed alphabet, pattern, chain or instance file."""


class SubpatternViolation(PatternWaitsError):
    """One pattern occurs as a contiguous block inside another."""

    def __init__(self, inner: str, outer: str):
        self.inner = inner
        self.outer = outer
        super().__init__(f"SubpatternViolation: {inner!r} occurs inside {outer!r}")


class ZeroPathViolation(PatternWaitsError):
    """A pattern contains a transition with zero probability."""

    def __init__(self, pattern: str, position: int):
        self.pattern = pattern
        self.position = position
        super().__init__(
            f"ZeroPathViolation: pattern {pattern!r} has a zero transition "
            f"into position {position}"
        )


class TauMayBeInfinite(PatternWaitsError):
    """Some reachable state can never lead to a pattern occurrence."""

    def __init__(self, witness_state):
        self.witness_state = witness_state
        super().__init__(
            f"TauMayBeInfinite: reachable state {witness_state!r} cannot reach any pattern"
        )


class DivisorZero(PatternWaitsError):
    pass


class NotIID(PatternWaitsError):
    pass


class ZeroMass(PatternWaitsError):
    pass


class SingularAtZ(PatternWaitsError):
    """The linear system is singular at the requested evaluation point."""

    def __init__(self, z):
        self.z = z
        super().__init__(f"SingularAtZ: system matrix is singular at z = {z}")


class WrongShape(PatternWaitsError):
    pass


class HeadsDiffer(PatternWaitsError):
    pass


class NotIrreducible(PatternWaitsError):
    pass


class SingularFundamental(PatternWaitsError):
    """``I - Q`` is singular: a reachable transient class never absorbs."""


class StepCapExceeded(PatternWaitsError):
    def __init__(self, trial: int, cap: int):
        self.trial = trial
        self.cap = cap
        super().__init__(f"StepCapExceeded: trial {trial} ran {cap} steps without a match")


class BadSpec(PatternWaitsError, ValueError):
    pass


class NoCandidates(PatternWaitsError):
    pass
