"""Semantic exception hierarchy shared by all modules."""


class HarmonicTrialsError(Exception):
    """Base class for package-specific errors."""


class DomainError(HarmonicTrialsError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class LimitExceededError(HarmonicTrialsError, ValueError):
    """Requested table or evaluation size beyond the configured limit."""


class DivergenceError(HarmonicTrialsError, ArithmeticError):
    """Series evaluated at a parameter point where it diverges."""


class NonconvergenceError(HarmonicTrialsError, RuntimeError):
    """Iteration cap reached before the requested tolerance."""


class InternalConsistencyError(HarmonicTrialsError, RuntimeError):
    """A computed quantity violates an invariant it must satisfy by construction."""


class InfiniteMomentError(DomainError):
    """Requested moment does not exist for the given parameters."""


class InfeasibleMomentsError(DomainError):
    """Empirical moments outside the feasible region of the model family."""


class InsufficientDataError(DomainError):
    """Too little data for the requested estimator."""


class NotPositiveRecurrentError(DomainError):
    """Invariant measure requested for a chain that has none."""


class SingularSystemError(HarmonicTrialsError, RuntimeError):
    """Linear system that must be regular turned out singular (construction bug)."""
