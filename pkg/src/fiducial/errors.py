"""Exception types.

Two families matter to callers: :class:`DomainError` for invalid inputs
(configuration problems) and :class:`NumericalFailure` for algorithms that
ran but could not deliver a trustworthy answer.
"""


class FiducialError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FiducialError, ValueError):
    """An argument lies outside the domain of the operation."""


class EmptySample(DomainError):
    pass


class NotSimple(DomainError):
    """The fiducial equation had no solution for some Monte Carlo draw."""


class NonOrthonormalBasis(DomainError):
    pass


class ZeroDensity(DomainError):
    pass


class NumericalFailure(FiducialError, ArithmeticError):
    """An iterative or Monte Carlo procedure failed."""


class NoSignChange(NumericalFailure):
    pass


class NoConvergence(NumericalFailure):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class BracketFailure(NumericalFailure):
    pass


class RejectionStall(NumericalFailure):
    pass


class NonFiniteNormalization(NumericalFailure):
    pass


class AllRejected(NumericalFailure):
    pass
