"""
Exception hierarchy.

Every error carries an optional context (module, operation, t) so the CLI can
report where a failure happened. The three families map to exit codes.
"""
from typing import Any, Dict, Optional


class ShiftFloquetError(ValueError):
    """Base class for all package errors."""
    exit_code = 3

    def __init__(self, message: str, *, module: Optional[str] = None,
                 operation: Optional[str] = None, t: Optional[float] = None,
                 **details: Any):
        super().__init__(message)
        self.message = message
        self.module = module
        self.operation = operation
        self.t = t
        self.details = details

    @property
    def context(self) -> Dict[str, Any]:
        ctx = {'module': self.module, 'operation': self.operation, 't': self.t}
        ctx.update(self.details)
        return {k: v for k, v in ctx.items() if v is not None}

    def with_context(self, **context: Any) -> 'ShiftFloquetError':
        """Fill in context fields that are still empty; returns self."""
        for key in ('module', 'operation', 't'):
            if key in context and getattr(self, key) is None:
                setattr(self, key, context.pop(key))
        for key, value in context.items():
            self.details.setdefault(key, value)
        return self

    def __str__(self):
        ctx = self.context
        if not ctx:
            return self.message
        rendered = ', '.join(f'{k}={v}' for k, v in ctx.items())
        return f'{self.message} [{rendered}]'


class ConfigError(ShiftFloquetError):
    exit_code = 1


class PeriodicityError(ShiftFloquetError):
    exit_code = 2


class NumericalError(ShiftFloquetError):
    exit_code = 3


# timescale
class PointNotInScale(NumericalError):
    pass


class WindowEdge(NumericalError):
    pass


class NonFiniteValue(NumericalError):
    pass


class ReversedBounds(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class InvalidWindow(ConfigError):
    pass


# shifts
class OutOfDomain(NumericalError):
    pass


class IterationCapExceeded(NumericalError):
    pass


class PeriodicityViolation(PeriodicityError):
    def __init__(self, message: str, violations=None, **kwargs):
        super().__init__(message, **kwargs)
        self.violations = list(violations or [])


# hilger / transition
class RegressivityViolation(NumericalError):
    pass


class OmegaOutOfStrip(NumericalError):
    pass


class IntegrationFailure(NumericalError):
    pass


# matpow
class SingularMatrix(NumericalError):
    pass


class ClusteringAmbiguous(NumericalError):
    pass


# floquet
class DegenerateMultiplier(NumericalError):
    pass


class RootFindFailure(NumericalError):
    def __init__(self, message: str, residual: Optional[float] = None, **kwargs):
        super().__init__(message, residual=residual, **kwargs)
        self.residual = residual


class ResonantSystem(NumericalError):
    pass


# stability
class EmptyHorizon(NumericalError):
    pass


# reports
class IoError(ConfigError):
    """Report or sample file could not be written."""


# expression DSL
class ExpressionError(ShiftFloquetError):
    """Mixin base for DSL errors."""


class ExprSyntaxError(ExpressionError, ConfigError):
    def __init__(self, message: str, position: int, expected: str = '', **kwargs):
        super().__init__(message, position=position, expected=expected or None, **kwargs)
        self.position = position
        self.expected = expected


class UnknownFunction(ExpressionError, ConfigError):
    pass


class UnboundVariable(ExpressionError, ConfigError):
    pass


class DomainError(ExpressionError, NumericalError):
    pass
