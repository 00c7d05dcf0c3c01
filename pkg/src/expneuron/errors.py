"""Exception hierarchy.

Everything raised on purpose by the library derives from :class:`ExpNeuronError`,
which the CLI maps to exit code 2.
"""


class ExpNeuronError(Exception):
    """Base class for domain, validity and numerical-guard errors."""


class InvalidInputError(ExpNeuronError, ValueError):
    """Non-finite or otherwise malformed input."""


class OverflowGuardError(ExpNeuronError, ArithmeticError):
    """An exponent argument exceeded the safe double-precision bound."""

    def __init__(self, argument: float):
        super().__init__(f"exp argument {argument!r} exceeds the overflow guard")
        self.argument = argument


class DomainViolationError(ExpNeuronError, ValueError):
    """A state lies outside the region where a map variant is defined."""


class ValidityError(ExpNeuronError, ValueError):
    """Parameters violate an existence inequality.

    ``inequality`` names which side failed.
    """

    def __init__(self, message: str, inequality: str):
        super().__init__(message)
        self.inequality = inequality


class DegenerateThresholdError(ExpNeuronError, ValueError):
    """The period-doubling threshold is missing or sits at an excluded value."""


class ParameterRangeError(ExpNeuronError, ValueError):
    """A parameter is outside the range an analysis is defined on."""


class ResonanceError(ExpNeuronError, ValueError):
    """Strong resonance: the Neimark-Sacker normal form does not apply."""


class NoCycleFoundError(ExpNeuronError, RuntimeError):
    """Newton search did not produce a nontrivial period-2 cycle."""


class BudgetExceededError(ExpNeuronError, ValueError):
    """A simulation request exceeds the configured step budget."""


class ConsistencyError(ExpNeuronError, ArithmeticError):
    """Two routes to the same quantity disagree beyond tolerance."""
