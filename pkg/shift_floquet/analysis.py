"""
Analysis pipeline: config -> window, shifts, system -> periodicity checks ->
Floquet decomposition -> periodic solutions -> stability report.
"""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from . import settings
from .errors import ConfigError, InvalidWindow, PeriodicityViolation, ResonantSystem
from .floquet import (
    FloquetDecomposition,
    change_of_variables_residual,
    decompose,
    decomposition_residuals,
    homogeneous_periodic_solution,
    nonhomogeneous_periodic_state,
    periodic_state_residual,
)
from .schemas import (
    AnalysisConfig,
    AnalysisReport,
    ComplexValue,
    ExponentPayload,
    FloquetBlock,
    InitialValuePayload,
    MatrixPayload,
    MultiplicityRow,
    PeriodicityBlock,
    PeriodicSolutionPayload,
    StabilityBlock,
    ViolationPayload,
)
from .shifts import PeriodicityReport, ShiftSystem, build_shift_system, verify_periodicity
from .stability import StabilityReport, classify
from .timescale import (
    TimeScaleWindow,
    geometric_union_window,
    integer_window,
    logistic_window,
    q_scale_window,
    real_window,
    signed_squares_window,
    sqrt_naturals_window,
)
from .transition import MatrixFunction, variation_of_constants

logger = logging.getLogger(__name__)

# ToleranceConfig field -> settings constant
TOLERANCE_SETTINGS = {
    'quadrature': 'QUAD_RTOL',
    'ode': 'ODE_RTOL',
    'eigen': 'CLUSTER_RTOL',
    'resonance': 'RESONANCE_TOL',
    'eps_tol': 'EPS_TOL',
    'periodicity': 'PERIODICITY_RTOL',
}


def load_config(path, overrides: Optional[Dict[str, float]] = None) -> AnalysisConfig:
    """Read and validate a JSON config; ``overrides`` replace single tolerance entries."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding='utf-8'))
    except OSError as e:
        raise ConfigError(f'cannot read config {path}: {e}') from e
    except json.JSONDecodeError as e:
        raise ConfigError(f'config {path} is not valid JSON: {e}') from e
    return parse_config(raw, overrides)


def parse_config(raw: dict, overrides: Optional[Dict[str, float]] = None) -> AnalysisConfig:
    try:
        cfg = AnalysisConfig.model_validate(raw)
        if overrides:
            tolerances = cfg.analysis.tolerances.model_dump()
            unknown = sorted(set(overrides) - set(tolerances))
            if unknown:
                raise ConfigError(f'unknown tolerance(s) {unknown}; choose from {sorted(tolerances)}')
            tolerances.update(overrides)
            raw = cfg.model_dump()
            raw['analysis']['tolerances'] = tolerances
            cfg = AnalysisConfig.model_validate(raw)
    except ValidationError as e:
        messages = '; '.join(
            f'{".".join(str(part) for part in err["loc"]) or "config"}: {err["msg"]}'
            for err in e.errors()
        )
        raise ConfigError(f'invalid config: {messages}') from e
    return cfg


def build_window(cfg: AnalysisConfig) -> TimeScaleWindow:
    ts_cfg = cfg.timescale
    params = ts_cfg.params
    kind = ts_cfg.kind
    points = _build_point_window(cfg)
    if points is not None:
        return points
    if kind == 'explicit':
        return TimeScaleWindow.from_cells(ts_cfg.cells, params=params)
    lo, hi = ts_cfg.window
    if kind == 'real':
        return real_window(lo, hi)
    if kind == 'integer':
        step = params.get('h', 1.0)
        return integer_window(lo, lo + step * math.floor((hi - lo) / step + 1e-9), step)
    q = _required(params, 'q', kind)
    if kind == 'q_scale':
        return q_scale_window(q, lo, hi)
    if kind == 'geometric_union':
        c = _required(params, 'c', kind)
        k_min = math.ceil(math.log(lo) / math.log(q) - 1e-9)
        k_max = math.floor(math.log(hi / c) / math.log(q) + 1e-9)
        return geometric_union_window(q, c, k_min, k_max)
    raise InvalidWindow(f'unknown time scale kind {kind!r}')


def _required(params: Dict[str, float], name: str, kind: str) -> float:
    if name not in params:
        raise InvalidWindow(f'{kind} time scales need the parameter {name!r}')
    return params[name]


def _build_point_window(cfg: AnalysisConfig) -> Optional[TimeScaleWindow]:
    kind = cfg.timescale.kind
    if kind not in ('sqrt_naturals', 'signed_squares', 'logistic'):
        return None
    lo, hi = cfg.timescale.window
    if kind == 'sqrt_naturals':
        if lo < 0:
            raise InvalidWindow('sqrt_naturals windows start at t >= 0')
        return sqrt_naturals_window(math.ceil(lo * lo - 1e-9), math.floor(hi * hi + 1e-9))
    if kind == 'signed_squares':
        return signed_squares_window(math.floor(math.sqrt(max(abs(lo), abs(hi))) + 1e-9))
    q = _required(cfg.timescale.params, 'q', kind)
    if not 0 < lo < hi < 1:
        raise InvalidWindow('logistic windows lie inside (0, 1)')
    k_min = math.ceil(math.log(lo / (1 - lo)) / math.log(q) - 1e-9)
    k_max = math.floor(math.log(hi / (1 - hi)) / math.log(q) + 1e-9)
    return logistic_window(q, k_min, k_max)


def _complex(z) -> ComplexValue:
    z = complex(z)
    return ComplexValue(real=z.real, imag=z.imag)


def _matrix(M) -> MatrixPayload:
    M = np.asarray(M, dtype=complex)
    return MatrixPayload(real=M.real.tolist(), imag=M.imag.tolist())


@dataclass
class VerificationOutcome:
    scale: PeriodicityReport
    axioms: PeriodicityReport
    A: PeriodicityReport
    F: Optional[PeriodicityReport] = None

    @property
    def hard_passed(self) -> bool:
        return self.scale.passed and self.axioms.passed and self.A.passed

    @property
    def reports(self) -> List[PeriodicityReport]:
        return [r for r in (self.scale, self.axioms, self.A, self.F) if r is not None]

    @property
    def checked(self) -> int:
        return sum(r.checked for r in self.reports)

    def violations(self, hard_only: bool = False):
        reports = [self.scale, self.axioms, self.A] if hard_only else self.reports
        return [v for r in reports for v in r.violations]

    def block(self) -> PeriodicityBlock:
        return PeriodicityBlock(
            scale_passed=self.scale.passed and self.axioms.passed,
            A_passed=self.A.passed,
            F_passed=None if self.F is None else self.F.passed,
            checked=self.checked,
            violations=[ViolationPayload(**v.as_dict()) for v in self.violations()],
        )


@dataclass
class AnalysisResult:
    report: AnalysisReport
    window: TimeScaleWindow
    shifts: ShiftSystem
    decomposition: FloquetDecomposition
    stability: StabilityReport
    notes: List[str] = field(default_factory=list)


class FloquetAnalyzer:
    """Runs the full analysis for one validated config."""

    def __init__(self, cfg: AnalysisConfig):
        self.cfg = cfg
        self.tolerances = cfg.analysis.tolerances
        self.params = {**cfg.timescale.params, **cfg.shifts.params, **cfg.system.params}
        self.window = build_window(cfg)
        self.shifts = self._build_shifts()
        self.A, self.F = self._build_system()
        logger.info(f'analyzer ready: {self.window!r}, shifts {self.shifts.name} '
                    f'(t0={self.shifts.t0:g}, T={self.shifts.T:g})')

    def _build_shifts(self) -> ShiftSystem:
        sc = self.cfg.shifts
        sys = build_shift_system(sc.kind, sc.T, sc.t0, self.params, sc.forward, sc.backward)
        if not self.window.contains(sys.t0):
            raise InvalidWindow(f't0={sys.t0} is not a point of {self.window!r}')
        return sys

    def _build_system(self) -> Tuple[MatrixFunction, Optional[MatrixFunction]]:
        sc = self.cfg.system
        if isinstance(sc.A, list):
            A = MatrixFunction.from_expressions(sc.A, self.params)
        else:
            A = MatrixFunction.builtin(sc.A.builtin, sc.n, {**self.params, **sc.A.params})
        F = MatrixFunction.from_expressions(sc.F, self.params) if sc.F is not None else None
        return A, F

    def settings_overrides(self) -> Dict[str, float]:
        return {name: getattr(self.tolerances, key) for key, name in TOLERANCE_SETTINGS.items()}

    def verify(self) -> VerificationOutcome:
        """Periodicity checks of the scale, the shift axioms, A and (if present) F."""
        with settings.override(**self.settings_overrides()):
            return self._verify()

    def _verify(self) -> VerificationOutcome:
        ts, sys = self.window, self.shifts
        count = self.cfg.analysis.verify_samples
        points = ts.sample_points(ts.t_min, ts.t_max, count, interior=False)
        forward = [t for t in points if t >= sys.t0]
        pairs = [(s, t) for s in forward[:8] for t in forward[:: max(1, len(forward) // 8)]]
        outcome = VerificationOutcome(
            scale=verify_periodicity(sys, ts, mode='scale', samples=points),
            axioms=verify_periodicity(sys, ts, mode='axioms', samples=forward + pairs),
            A=verify_periodicity(sys, ts, self.A, mode='delta_function', samples=points),
        )
        if self.F is not None:
            outcome.F = verify_periodicity(sys, ts, self.F, mode='delta_function', samples=points)
        return outcome

    def run(self) -> AnalysisResult:
        with settings.override(**self.settings_overrides()):
            return self._run()

    def _run(self) -> AnalysisResult:
        cfg, tol = self.cfg, self.tolerances
        ts, sys = self.window, self.shifts
        notes: List[str] = []

        outcome = self._verify()
        if not outcome.hard_passed:
            violations = outcome.violations(hard_only=True)
            logger.error(f'periodicity verification failed with {len(violations)} violation(s)')
            raise PeriodicityViolation(
                f'{ts.name} window with {sys.name} shifts is not periodic for this system: '
                f'{violations[0].check} at t={violations[0].t:g}',
                violations=[v.as_dict() for v in violations],
                module='analysis', operation='run_analysis',
            )
        if outcome.F is not None and not outcome.F.passed:
            notes.append(f'F fails delta-periodicity at {len(outcome.F.violations)} sample(s); '
                         f'the nonhomogeneous periodic state is reported without that guarantee')

        t1 = sys.period_end()
        if t1 > ts.t_max:
            raise InvalidWindow(f'window ends at {ts.t_max:g} before one period t1={t1:g}')
        A = self.A.certify(ts, sys.t0, t1)
        dec = decompose(A, ts, sys, tol=tol.ode)
        residuals = decomposition_residuals(dec)
        periodic = homogeneous_periodic_solution(dec, tol=tol.resonance)

        nh_x0 = nh_residual = None
        if self.F is not None:
            try:
                x0 = nonhomogeneous_periodic_state(A, self.F, ts, sys, tol=tol.resonance)
            except ResonantSystem as e:
                notes.append(str(e))
            else:
                nh_x0 = [_complex(v) for v in x0]
                nh_residual = periodic_state_residual(A, self.F, ts, sys, x0)

        initial_value = None
        if cfg.system.x0 is not None:
            x_t1 = variation_of_constants(A, self.F, ts, t1, sys.t0, cfg.system.x0, tol=tol.ode)
            initial_value = InitialValuePayload(
                x0=cfg.system.x0,
                x_t1=[_complex(v) for v in x_t1],
                change_of_variables_residual=change_of_variables_residual(dec, cfg.system.x0),
            )

        horizon = (cfg.analysis.horizon if cfg.analysis.horizon is not None else sys.t0,
                   cfg.analysis.t_max if cfg.analysis.t_max is not None else ts.t_max)
        stability = classify(dec, ts, sys, horizon, eps_tol=tol.eps_tol,
                             sample_count=cfg.analysis.samples, epsilon=tol.epsilon,
                             modulus_tol=tol.resonance)

        floquet_block = FloquetBlock(
            t0=sys.t0,
            t1=t1,
            T=sys.T,
            monodromy=_matrix(dec.monodromy),
            multipliers=[_complex(lam) for lam in dec.multipliers],
            exponents=[
                ExponentPayload(multiplier=_complex(e.multiplier), exponent=_complex(e.base),
                                strip_violations=e.strip_violations(ts, sys.t0, t1))
                for e in dec.exponents
            ],
            periodic_solution=PeriodicSolutionPayload(
                exists=periodic.exists,
                x0=None if periodic.x0 is None else [_complex(v) for v in periodic.x0],
                residual=periodic.residual,
            ),
            nonhomogeneous_x0=nh_x0,
            nonhomogeneous_residual=nh_residual,
            decomposition_residuals=residuals,
            initial_value=initial_value,
        )
        stability_block = StabilityBlock(
            horizon=stability.horizon,
            t=stability.samples,
            lambda_ratio=stability.lambda_ratio,
            re_mu=[track.re_mu for track in stability.tracks],
            inf_statistic=[track.inf_statistic for track in stability.tracks],
            eps_statistic=[track.eps_statistic for track in stability.tracks],
            multiplicities=[
                MultiplicityRow(multiplier=_complex(track.multiplier),
                                algebraic=track.algebraic, geometric=track.geometric)
                for track in stability.tracks
            ],
            theta_inv=stability.regressivity.theta_inv,
            regressivity_passed=stability.regressivity.passed,
            verdict_theorem=stability.verdict_theorem.value,
            verdict_corollary=stability.verdict_corollary.value,
            notes=stability.notes,
        )
        report = AnalysisReport(
            timescale=repr(ts),
            shifts=sys.name,
            n=A.n,
            periodicity=outcome.block(),
            floquet=floquet_block,
            stability=stability_block,
            notes=notes,
        )
        logger.info(f'analysis finished: multipliers {np.round(dec.multipliers, 9).tolist()}, '
                    f'verdict {stability.verdict_theorem.value}')
        return AnalysisResult(report=report, window=ts, shifts=sys, decomposition=dec,
                              stability=stability, notes=notes)


def run_analysis(cfg: AnalysisConfig) -> AnalysisResult:
    return FloquetAnalyzer(cfg).run()
