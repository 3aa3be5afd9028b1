"""Exception hierarchy shared by all model and solver modules.

Three families matter to callers: validation problems with model
parameters (``ParameterError`` and friends), numerical failures
(``NumericsError`` subclasses), and infeasible calibration targets.
The CLI maps them to distinct exit codes.
"""


class MarketDynError(Exception):
    """Base class for all library errors."""


class ParameterError(MarketDynError, ValueError):
    """A model parameter violates its documented constraints."""


class DomainError(MarketDynError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NeverReachedError(DomainError):
    """The requested market share is never reached from the given start.

    Raised e.g. for imitator-only kernels started at zero share: the
    share stays zero forever, so no finite time maps to u > 0.
    """


class InitiationError(ParameterError):
    """A game case lacks the seed population it needs to start.

    Player-driven adoption needs P(0) > 0 and quitter-driven churn
    needs Q(0) > 0; without them the dynamics stay frozen.
    """


class NumericsError(MarketDynError):
    """Base class for numerical-method failures."""


class IntegrationDivergedError(NumericsError):
    """The ODE state became non-finite during integration."""

    def __init__(self, message: str, last_valid_time: float):
        super().__init__(message)
        self.last_valid_time = last_valid_time


class AccuracyNotReachedError(NumericsError):
    """Adaptive quadrature hit its subdivision limit.

    The best available estimate is attached so callers can decide
    whether to accept it anyway.
    """

    def __init__(self, message: str, best_estimate: float):
        super().__init__(message)
        self.best_estimate = best_estimate


class BracketInvalidError(NumericsError, ValueError):
    """A root bracket does not enclose a sign change."""


class SingularMatrixError(NumericsError):
    """A linear system has no usable pivot (matrix singular to working precision)."""


class DegenerateMarketError(MarketDynError):
    """The churn balance system is singular.

    Happens when two or more suppliers lose no customers at all; the
    asymptotic shares then depend on the initial state and must be
    obtained from the dynamic path instead.
    """


class InfeasibleMarketError(MarketDynError):
    """No admissible fixed point exists for the given market parameters."""


class InconsistentSpecError(MarketDynError):
    """A churn specification admits no equilibrium of the requested kind."""


class IntegrationInvariantError(NumericsError):
    """A trajectory violated a structural invariant (shares negative,
    total share above one, or churn flows not summing to zero); usually
    a sign of a mis-specified churn structure."""


class CalibrationInfeasibleError(MarketDynError):
    """Calibration targets violate a feasibility bound of the model."""


class ScenarioValidationError(MarketDynError):
    """A scenario document failed validation.

    Carries the full list of field-level issues.
    """

    def __init__(self, issues):
        self.issues = list(issues)
        lines = "; ".join(str(i) for i in self.issues)
        super().__init__(f"invalid scenario: {lines}")
