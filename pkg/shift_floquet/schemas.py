"""
Pydantic schemas for analysis configs and reports.
"""
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from . import SCHEMA_VERSION, settings
from .errors import ExpressionError
from .exprdsl import parse

TimeScaleKind = Literal[
    'real', 'integer', 'q_scale', 'geometric_union', 'sqrt_naturals',
    'signed_squares', 'logistic', 'explicit',
]
ShiftKind = Literal['additive', 'multiplicative', 'sqrt', 'signed_squares', 'logistic', 'custom']


def _check_expression(src: str) -> str:
    try:
        parse(src)
    except ExpressionError as e:
        raise ValueError(f'invalid expression {src!r}: {e}') from e
    return src


class TimeScaleConfig(BaseModel):
    """Schema for the time scale window."""
    model_config = ConfigDict(extra='forbid')

    kind: TimeScaleKind
    params: Dict[str, float] = {}
    window: Optional[Tuple[float, float]] = None
    cells: Optional[List[List[float]]] = None

    @model_validator(mode='after')
    def check_extent(self):
        if self.kind == 'explicit':
            if not self.cells:
                raise ValueError('explicit time scales need "cells"')
        elif self.window is None:
            raise ValueError(f'{self.kind} time scales need "window": [t_min, t_max]')
        if self.window is not None and not self.window[0] < self.window[1]:
            raise ValueError('window must satisfy t_min < t_max')
        return self


class ShiftConfig(BaseModel):
    """Schema for the shift operators."""
    model_config = ConfigDict(extra='forbid')

    kind: ShiftKind
    T: float
    t0: Optional[float] = None
    params: Dict[str, float] = {}
    forward: Optional[str] = None
    backward: Optional[str] = None

    @field_validator('forward', 'backward')
    @classmethod
    def clean_expression(cls, value):
        return None if value is None else _check_expression(value)

    @model_validator(mode='after')
    def check_custom(self):
        if self.kind == 'custom' and (self.forward is None or self.backward is None or self.t0 is None):
            raise ValueError('custom shifts need "forward", "backward" and "t0"')
        return self


class BuiltinMatrix(BaseModel):
    model_config = ConfigDict(extra='forbid')

    builtin: str
    params: Dict[str, float] = {}


class SystemConfig(BaseModel):
    """Schema for x^delta = A(t) x + F(t)."""
    model_config = ConfigDict(extra='forbid')

    n: int = Field(gt=0)
    A: Union[List[List[str]], BuiltinMatrix]
    F: Optional[List[str]] = None
    x0: Optional[List[float]] = None
    params: Dict[str, float] = {}

    @field_validator('A')
    @classmethod
    def clean_A(cls, value):
        if isinstance(value, list):
            for row in value:
                for entry in row:
                    _check_expression(entry)
        return value

    @field_validator('F')
    @classmethod
    def clean_F(cls, value):
        if value is not None:
            for entry in value:
                _check_expression(entry)
        return value

    @model_validator(mode='after')
    def check_shapes(self):
        if isinstance(self.A, list):
            if len(self.A) != self.n or any(len(row) != self.n for row in self.A):
                raise ValueError(f'A must be a {self.n}x{self.n} array of expressions')
        if self.F is not None and len(self.F) != self.n:
            raise ValueError(f'F must have {self.n} entries, got {len(self.F)}')
        if self.x0 is not None and len(self.x0) != self.n:
            raise ValueError(f'x0 must have {self.n} entries, got {len(self.x0)}')
        return self


class ToleranceConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    quadrature: float = Field(default_factory=lambda: settings.QUAD_RTOL, gt=0)
    ode: float = Field(default_factory=lambda: settings.ODE_RTOL, gt=0)
    eigen: float = Field(default_factory=lambda: settings.CLUSTER_RTOL, gt=0)
    resonance: float = Field(default_factory=lambda: settings.RESONANCE_TOL, gt=0)
    eps_tol: float = Field(default_factory=lambda: settings.EPS_TOL, ge=0)
    epsilon: float = Field(default=0.0, ge=0)
    periodicity: float = Field(default_factory=lambda: settings.PERIODICITY_RTOL, gt=0)


class AnalysisOptions(BaseModel):
    model_config = ConfigDict(extra='forbid')

    horizon: Optional[float] = None
    t_max: Optional[float] = None
    samples: int = Field(default=50, gt=0)
    verify_samples: int = Field(default=200, gt=0)
    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    report_path: Optional[str] = None
    samples_path: Optional[str] = None


class AnalysisConfig(BaseModel):
    """Complete analysis configuration; only timescale, shifts and system are required."""
    model_config = ConfigDict(extra='forbid')

    timescale: TimeScaleConfig
    shifts: ShiftConfig
    system: SystemConfig
    analysis: AnalysisOptions = Field(default_factory=AnalysisOptions)
    outputs: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode='after')
    def check_ordering(self):
        t0 = self.shifts.t0
        if t0 is not None and not self.shifts.T > t0:
            raise ValueError(f'T={self.shifts.T} must exceed t0={t0}')
        if t0 is not None and self.analysis.horizon is not None and self.analysis.horizon < t0:
            raise ValueError(f'horizon H={self.analysis.horizon} precedes t0={t0}')
        window = self.timescale.window
        if window is not None and t0 is not None and not window[0] <= t0 <= window[1]:
            raise ValueError(f't0={t0} lies outside the window {list(window)}')
        return self


# report

class MatrixPayload(BaseModel):
    real: List[List[float]]
    imag: List[List[float]]


class ComplexValue(BaseModel):
    real: float
    imag: float


class ViolationPayload(BaseModel):
    check: str
    t: float
    s: Optional[float] = None
    detail: str = ''


class PeriodicityBlock(BaseModel):
    scale_passed: bool
    A_passed: bool
    F_passed: Optional[bool] = None
    checked: int
    violations: List[ViolationPayload] = []


class ExponentPayload(BaseModel):
    multiplier: ComplexValue
    exponent: ComplexValue
    strip_violations: List[float] = []


class PeriodicSolutionPayload(BaseModel):
    exists: bool
    x0: Optional[List[ComplexValue]] = None
    residual: Optional[float] = None


class InitialValuePayload(BaseModel):
    """Trajectory of the configured initial state over one period."""
    x0: List[float]
    x_t1: List[ComplexValue]
    change_of_variables_residual: float


class FloquetBlock(BaseModel):
    t0: float
    t1: float
    T: float
    monodromy: MatrixPayload
    multipliers: List[ComplexValue]
    exponents: List[ExponentPayload]
    periodic_solution: PeriodicSolutionPayload
    nonhomogeneous_x0: Optional[List[ComplexValue]] = None
    nonhomogeneous_residual: Optional[float] = None
    decomposition_residuals: Dict[str, float]
    initial_value: Optional[InitialValuePayload] = None


class MultiplicityRow(BaseModel):
    multiplier: ComplexValue
    algebraic: int
    geometric: int


class StabilityBlock(BaseModel):
    horizon: Tuple[float, float]
    t: List[float]
    lambda_ratio: List[float]
    re_mu: List[List[float]]
    inf_statistic: List[float]
    eps_statistic: List[float]
    multiplicities: List[MultiplicityRow]
    theta_inv: float
    regressivity_passed: bool
    verdict_theorem: str
    verdict_corollary: str
    notes: List[str] = []


class AnalysisReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    timescale: str
    shifts: str
    n: int
    periodicity: PeriodicityBlock
    floquet: FloquetBlock
    stability: StabilityBlock
    notes: List[str] = []
