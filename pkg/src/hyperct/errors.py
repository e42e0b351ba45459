"""Exception hierarchy shared by every hyperct module."""


class HyperCTError(Exception):
    """Base class for all library errors."""


class NonConvergence(HyperCTError):
    """A quadrature, series or lattice sum did not reach its tolerance."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InvalidDecay(HyperCTError, ValueError):
    pass


class DimensionTooLarge(HyperCTError, ValueError):
    pass


class DimensionMismatch(HyperCTError, ValueError):
    pass


class OutOfStrip(HyperCTError, ValueError):
    pass


class NearSingularity(HyperCTError, ValueError):
    pass


class ModulusTooClose(HyperCTError, ValueError):
    pass


class ModularPointInvalid(HyperCTError, ValueError):
    pass


class UnsupportedFamily(HyperCTError, ValueError):
    pass


class UnsupportedCombination(HyperCTError, ValueError):
    pass


class ZeroVector(HyperCTError, ValueError):
    pass


class NotARoot(HyperCTError, ValueError):
    pass


class IntegralityViolation(HyperCTError, ValueError):
    pass


class ParameterDomainError(HyperCTError, ValueError):
    """Parameters lie outside a required open domain.

    ``violations`` lists the names of the violated conditions so callers can
    report exactly which inequality failed.
    """

    domain = "parameter domain"

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(f"not in {self.domain}: " + "; ".join(self.violations))


class NotInS(ParameterDomainError):
    domain = "S"


class NotInSPrime(ParameterDomainError):
    domain = "S'"


class NotInSBC(ParameterDomainError):
    domain = "S_BC"
