"""Exception types shared across the package."""


class EscapeLabError(Exception):
    """Base class for computation errors raised by escape_lab."""


class ValidationError(EscapeLabError, ValueError):
    """A parameter block or function description is malformed."""


class PreconditionError(EscapeLabError, ValueError):
    """An operation was called outside the regime it is defined for."""


class NonConvergentProduct(EscapeLabError):
    """The product tail bound cannot be met within the configured term budget."""


class NearZero(EscapeLabError):
    """The evaluation point is too close to a zero for log|f| to be reliable."""


class OverflowDomain(EscapeLabError):
    """Direct sampling overflowed; the log-domain path must be used."""


class AtZero(EscapeLabError):
    """The requested radius coincides with a zero radius of f."""

    def __init__(self, r, zero_radius):
        super().__init__(f"radius {r!r} coincides with zero radius {zero_radius!r}")
        self.r = r
        self.zero_radius = zero_radius
        self.logm = float("-inf")


class InsufficientGrowth(EscapeLabError):
    pass


class MissingPairs(EscapeLabError):
    pass


class NoCandidate(EscapeLabError):
    """No companion radius gave a positive margin at step ``n``.

    The partially built certificate (``verified=False``) is attached.
    """

    def __init__(self, n, certificate=None):
        super().__init__(f"no admissible companion radius at step {n}")
        self.n = n
        self.certificate = certificate


class SurroundFailure(EscapeLabError):
    def __init__(self, n, which, family=None):
        super().__init__(f"surrounding condition {which} fails at n={n}")
        self.n = n
        self.which = which
        self.family = family


class MeshExhausted(EscapeLabError):
    pass


class LadderOverflow(UserWarning):
    """The iterated maximum-modulus ladder left the representable log range."""


class BranchCutWarning(UserWarning):
    pass
