"""Exception hierarchy shared by the library and the command line."""

from typing import Any, List, Optional


class SymkernelError(Exception):
    """Base class for every error raised by symkernel"""

    category = "error"


class CatalogError(SymkernelError, ValueError):
    """Unknown or malformed catalog label"""

    category = "catalog"


class StructuralError(SymkernelError, ValueError):
    """Root data that violates a structural invariant"""

    category = "structural"


class DomainError(SymkernelError, ValueError):
    """Argument outside the domain of an operation"""

    category = "domain"


class ModelError(SymkernelError, ValueError):
    """Point or group element that does not live on its model"""

    category = "model"


class HypothesisViolation(SymkernelError, ValueError):
    """Envelope evaluated outside the hypothesis d(x,o) >= 2"""

    category = "hypothesis"


class UsageError(SymkernelError, ValueError):
    category = "usage"


class ComputationError(SymkernelError, RuntimeError):
    category = "computation"


class QuadratureError(ComputationError):
    """Quadrature that did not reach its tolerance within budget"""

    category = "quadrature"

    def __init__(self, message: str, partial: float, abserr: float):
        super().__init__(message)
        self.partial = partial
        self.abserr = abserr


class EstimationError(ComputationError):
    category = "estimation"


class TruncationError(ComputationError):
    """Orbit enumeration hit the sample cap; carries what was found"""

    category = "truncation"

    def __init__(self, message: str, partial: Optional[List[Any]] = None):
        super().__init__(message)
        self.partial = partial if partial is not None else []


class BaselineFailure(ComputationError):
    """A validation ratio left its frozen acceptance interval"""

    category = "baseline"
