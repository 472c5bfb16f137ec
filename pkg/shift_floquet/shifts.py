"""
Shift operators and periodicity in shifts.

A ShiftSystem bundles the forward/backward shifts delta_plus(s, t) and
delta_minus(s, t), their domains, the initial point t0 (the identity of the
shifts) and the period T. Theta(t) turns the shift structure into the
additive clock used by the Floquet decomposition.
"""
import bisect
import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit, logit

from . import settings
from .errors import (
    ConfigError,
    DomainError,
    IterationCapExceeded,
    OutOfDomain,
    ShiftFloquetError,
)
from .exprdsl import CompiledExpr
from .timescale import TimeScaleWindow, delta_derivative, delta_integral, right_derivative, snap_tol

logger = logging.getLogger(__name__)

PLUS = '+'
MINUS = '-'

ShiftMap = Callable[[float, float], float]


def _always(s, t):
    return True


@dataclass(frozen=True)
class ShiftSystem:
    """Shift operators with initial point ``t0`` and period ``T``.

    ``d_*`` fields are analytic partial derivatives used on dense cells; when
    absent the module differentiates numerically along the time scale.
    """
    t0: float
    T: float
    forward: ShiftMap
    backward: ShiftMap
    domain_fwd: Callable[[float, float], bool] = _always
    domain_bwd: Callable[[float, float], bool] = _always
    name: str = 'custom'
    d_forward_dt: Optional[ShiftMap] = None
    d_backward_dt: Optional[ShiftMap] = None
    d_backward_ds: Optional[ShiftMap] = None
    analytic_shift_dderiv: Optional[Callable[[float, float], float]] = None
    analytic_theta_deriv: Optional[Callable[[float], float]] = None
    iteration_cap: int = field(default_factory=lambda: settings.THETA_ITER_CAP)
    _theta_table: 'ThetaTable' = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, '_theta_table', ThetaTable(self))

    @property
    def theta_table(self) -> 'ThetaTable':
        return self._theta_table

    def apply(self, direction: str, s: float, t: float) -> float:
        return shift(self, direction, s, t)

    def period_end(self) -> float:
        """t1 = delta_plus(T, t0)."""
        return shift(self, PLUS, self.T, self.t0)


def shift(sys: ShiftSystem, direction: str, s: float, t: float) -> float:
    """delta_plus(s, t) or delta_minus(s, t)."""
    if direction == PLUS:
        domain, fn = sys.domain_fwd, sys.forward
    elif direction == MINUS:
        domain, fn = sys.domain_bwd, sys.backward
    else:
        raise ValueError(f'direction must be {PLUS!r} or {MINUS!r}, got {direction!r}')
    if not domain(s, t):
        raise OutOfDomain(f'({s!r}, {t!r}) outside the domain of delta{direction}',
                          module='shifts', operation='shift', t=t)
    try:
        return float(fn(s, t))
    except DomainError as e:
        raise OutOfDomain(f'delta{direction}({s!r}, {t!r}) undefined: {e}',
                          module='shifts', operation='shift', t=t) from e
    except (ValueError, ZeroDivisionError) as e:
        if isinstance(e, ShiftFloquetError):
            raise
        raise OutOfDomain(f'delta{direction}({s!r}, {t!r}) undefined: {e}',
                          module='shifts', operation='shift', t=t) from e


def iterate_shift(sys: ShiftSystem, direction: str, T: float, k: int, t: float) -> float:
    """k-fold composition of delta(T, .) applied to ``t``."""
    if k < 0:
        raise ValueError(f'k must be nonnegative, got {k}')
    value = t
    for step in range(k):
        try:
            value = shift(sys, direction, T, value)
        except OutOfDomain as e:
            raise e.with_context(operation='iterate_shift', step=step)
    return value


class ThetaTable:
    """Append-only cache of anchors delta_plus^(k)(T, t0) and cumulative increments."""

    def __init__(self, sys: ShiftSystem):
        self.sys = sys
        self.anchors: List[float] = [sys.t0]
        self.partial_sums: List[float] = [0.0]
        self._lock = threading.Lock()

    def extend_to(self, t: float) -> None:
        tol = snap_tol(t)
        with self._lock:
            while self.anchors[-1] < t - tol:
                k = len(self.anchors)
                if k > self.sys.iteration_cap:
                    raise IterationCapExceeded(
                        f'm(t) exceeds the iteration cap {self.sys.iteration_cap}',
                        module='shifts', operation='theta', t=t,
                    )
                prev = self.anchors[-1]
                nxt = shift(self.sys, PLUS, self.sys.T, prev)
                if not nxt > prev:
                    raise OutOfDomain(f'shift anchors stopped increasing at {prev!r}',
                                      module='shifts', operation='theta', t=t)
                increment = shift(self.sys, MINUS, prev, nxt)
                self.anchors.append(nxt)
                self.partial_sums.append(self.partial_sums[-1] + increment)

    def m(self, t: float) -> int:
        """Smallest k with anchor_k >= t (snap applied)."""
        self.extend_to(t)
        return bisect.bisect_left(self.anchors, t - snap_tol(t))

    def anchor(self, k: int) -> float:
        while len(self.anchors) <= k:
            self.extend_to(shift(self.sys, PLUS, self.sys.T, self.anchors[-1]))
        return self.anchors[k]

    def is_anchor(self, t: float) -> bool:
        k = self.m(t)
        return abs(self.anchors[k] - t) <= snap_tol(t)


def m_index(sys: ShiftSystem, t: float) -> int:
    return sys.theta_table.m(t)


def g_term(sys: ShiftSystem, t: float) -> float:
    table = sys.theta_table
    k = table.m(t)
    if abs(table.anchors[k] - t) <= snap_tol(t):
        return 0.0
    return -shift(sys, MINUS, t, table.anchors[k])


def theta(sys: ShiftSystem, ts: Optional[TimeScaleWindow], t: float) -> float:
    """Theta(t) = sum of anchor increments up to m(t) plus G(t)."""
    if t < sys.t0 - snap_tol(sys.t0):
        raise OutOfDomain(f'theta needs t >= t0={sys.t0}, got {t!r}',
                          module='shifts', operation='theta', t=t)
    table = sys.theta_table
    k = table.m(t)
    return table.partial_sums[k] + g_term(sys, t)


def theta_derivative(sys: ShiftSystem, ts: TimeScaleWindow, t: float) -> float:
    """Right derivative of Theta at a right-dense point."""
    if sys.analytic_theta_deriv is not None:
        return float(sys.analytic_theta_deriv(t))
    if sys.d_backward_ds is not None:
        table = sys.theta_table
        k = table.m(t)
        if abs(table.anchors[k] - t) <= snap_tol(t):
            k += 1
            table.anchor(k)
        return -float(sys.d_backward_ds(t, table.anchors[k]))
    return float(right_derivative(lambda x: theta(sys, ts, x), ts, t))


def shift_delta_derivative(sys: ShiftSystem, ts: TimeScaleWindow, T: float, t: float,
                           direction: str = PLUS) -> float:
    """Delta derivative of t -> delta(T, t)."""
    info = ts.interior_jump(t, operation='shift_delta_derivative')
    if info.scattered:
        return (shift(sys, direction, T, info.sigma) - shift(sys, direction, T, t)) / info.mu
    if direction == PLUS and sys.analytic_shift_dderiv is not None:
        return float(sys.analytic_shift_dderiv(T, t))
    partial = sys.d_forward_dt if direction == PLUS else sys.d_backward_dt
    if partial is not None:
        return float(partial(T, t))
    return float(delta_derivative(lambda x: shift(sys, direction, T, x), ts, t))


# builtin catalog

IDENTITY_POINTS = {
    'additive': 0.0,
    'multiplicative': 1.0,
    'sqrt': 0.0,
    'signed_squares': 0.0,
    'logistic': 0.5,
}


def additive_shifts(T: float, t0: float = 0.0) -> ShiftSystem:
    return ShiftSystem(
        t0=t0, T=T, name='additive',
        forward=lambda s, t: t + s,
        backward=lambda s, t: t - s,
        domain_fwd=lambda s, t: s >= t0 - snap_tol(s),
        domain_bwd=lambda s, t: s >= t0 - snap_tol(s),
        d_forward_dt=lambda s, t: 1.0,
        d_backward_dt=lambda s, t: 1.0,
        d_backward_ds=lambda s, t: -1.0,
        analytic_theta_deriv=lambda t: 1.0,
    )


def multiplicative_shifts(T: float, t0: float = 1.0) -> ShiftSystem:
    """delta_plus(s, t) = s t for t > 0 and t / s for t < 0 (moves right in both cases)."""

    def forward(s, t):
        return s * t if t > 0 else t / s

    def backward(s, t):
        return t / s if t > 0 else s * t

    def d_backward_ds(s, t):
        return -t / (s * s) if t > 0 else t

    return ShiftSystem(
        t0=t0, T=T, name='multiplicative',
        forward=forward,
        backward=backward,
        domain_fwd=lambda s, t: s >= 1 - snap_tol(s) and t != 0,
        domain_bwd=lambda s, t: s >= 1 - snap_tol(s) and t != 0,
        d_forward_dt=lambda s, t: s if t > 0 else 1.0 / s,
        d_backward_dt=lambda s, t: 1.0 / s if t > 0 else s,
        d_backward_ds=d_backward_ds,
    )


def sqrt_shifts(T: float, t0: float = 0.0) -> ShiftSystem:
    """delta(s, t) = (t^2 +- s^2)^(1/2) on nonnegative time scales."""
    return ShiftSystem(
        t0=t0, T=T, name='sqrt',
        forward=lambda s, t: math.sqrt(t * t + s * s),
        backward=lambda s, t: math.sqrt(t * t - s * s),
        domain_fwd=lambda s, t: s >= 0 and t >= 0,
        domain_bwd=lambda s, t: 0 <= s <= t + snap_tol(t),
        d_forward_dt=lambda s, t: t / math.sqrt(t * t + s * s),
        d_backward_dt=lambda s, t: t / math.sqrt(t * t - s * s),
        d_backward_ds=lambda s, t: -s / math.sqrt(t * t - s * s),
    )


def _signed_root(t):
    return math.copysign(math.sqrt(abs(t)), t)


def _signed_square(u):
    return math.copysign(u * u, u)


def signed_squares_shifts(T: float, t0: float = 0.0) -> ShiftSystem:
    """Shifts on {+-n^2}: delta(s, t) = sgn(u) u^2 with u = sgn(t) sqrt|t| +- sqrt(s)."""

    def forward(s, t):
        return _signed_square(_signed_root(t) + math.sqrt(s))

    def backward(s, t):
        return _signed_square(_signed_root(t) - math.sqrt(s))

    return ShiftSystem(
        t0=t0, T=T, name='signed_squares',
        forward=forward,
        backward=backward,
        domain_fwd=lambda s, t: s >= 0,
        domain_bwd=lambda s, t: s >= 0,
        d_forward_dt=lambda s, t: abs(_signed_root(t) + math.sqrt(s)) / math.sqrt(abs(t)),
        d_backward_dt=lambda s, t: abs(_signed_root(t) - math.sqrt(s)) / math.sqrt(abs(t)),
        d_backward_ds=lambda s, t: -abs(_signed_root(t) - math.sqrt(s)) / math.sqrt(s),
    )


def logistic_shifts(T: float, t0: float = 0.5) -> ShiftSystem:
    """Shifts on {q^k / (1 + q^k)}: logit(delta(s, t)) = logit(t) +- logit(s)."""

    def forward(s, t):
        return float(expit(logit(t) + logit(s)))

    def backward(s, t):
        return float(expit(logit(t) - logit(s)))

    def in_unit(s, t):
        return 0 < s < 1 and 0 < t < 1

    def d_backward_ds(s, t):
        r = backward(s, t)
        return -r * (1 - r) / (s * (1 - s))

    return ShiftSystem(
        t0=t0, T=T, name='logistic',
        forward=forward,
        backward=backward,
        domain_fwd=in_unit,
        domain_bwd=in_unit,
        d_forward_dt=lambda s, t: forward(s, t) * (1 - forward(s, t)) / (t * (1 - t)),
        d_backward_dt=lambda s, t: backward(s, t) * (1 - backward(s, t)) / (t * (1 - t)),
        d_backward_ds=d_backward_ds,
    )


def custom_shifts(T: float, t0: float, forward_expr: str, backward_expr: str,
                  params: Optional[Dict[str, float]] = None) -> ShiftSystem:
    """Shifts given as expressions in (s, t); derivatives are taken numerically."""
    fwd = CompiledExpr(forward_expr, params)
    bwd = CompiledExpr(backward_expr, params)
    return ShiftSystem(
        t0=t0, T=T, name='custom',
        forward=lambda s, t: fwd(t, s=s),
        backward=lambda s, t: bwd(t, s=s),
    )


_BUILDERS = {
    'additive': additive_shifts,
    'multiplicative': multiplicative_shifts,
    'sqrt': sqrt_shifts,
    'signed_squares': signed_squares_shifts,
    'logistic': logistic_shifts,
}


def build_shift_system(kind: str, T: float, t0: Optional[float] = None,
                       params: Optional[Dict[str, float]] = None,
                       forward: Optional[str] = None,
                       backward: Optional[str] = None) -> ShiftSystem:
    """Construct a ShiftSystem from a config-style description."""
    if kind == 'custom':
        if forward is None or backward is None or t0 is None:
            raise ConfigError('custom shifts need forward, backward and t0')
        sys = custom_shifts(T, t0, forward, backward, params)
    elif kind in _BUILDERS:
        identity = IDENTITY_POINTS[kind]
        if t0 is not None and abs(t0 - identity) > snap_tol(identity):
            raise ConfigError(
                f'{kind} shifts have initial point {identity}; t0={t0} is not their identity'
            )
        sys = _BUILDERS[kind](T, identity)
    else:
        raise ConfigError(f'unknown shift kind {kind!r}')
    if not T > sys.t0:
        raise ConfigError(f'period T={T} must exceed t0={sys.t0}')
    return sys


# periodicity verification

@dataclass(frozen=True)
class Violation:
    check: str
    t: float
    s: Optional[float] = None
    detail: str = ''

    def as_dict(self) -> Dict[str, object]:
        return {'check': self.check, 't': self.t, 's': self.s, 'detail': self.detail}


@dataclass
class PeriodicityReport:
    mode: str
    checked: int = 0
    violations: List[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def add(self, check: str, t: float, s: Optional[float] = None, detail: str = ''):
        self.violations.append(Violation(check, float(t), None if s is None else float(s), detail))


def _close(a, b, rtol) -> bool:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
    return bool(np.max(np.abs(a - b), initial=0.0) <= rtol * scale)


def _try_shift(sys, direction, s, t):
    try:
        return shift(sys, direction, s, t)
    except OutOfDomain:
        return None


def _in_range(ts: TimeScaleWindow, t: float) -> bool:
    return ts.t_min - snap_tol(t) <= t <= ts.t_max + snap_tol(t)


def verify_periodicity(sys: ShiftSystem, ts: TimeScaleWindow, f: Optional[Callable] = None,
                       mode: str = 'scale', samples: Sequence[Union[float, Tuple[float, float]]] = (),
                       rtol: Optional[float] = None) -> PeriodicityReport:
    """Check periodicity in shifts at the given samples; violations are returned, not raised."""
    rtol = settings.PERIODICITY_RTOL if rtol is None else rtol
    report = PeriodicityReport(mode=mode)
    points = [float(p) for p in samples if not isinstance(p, (tuple, list))]
    pairs = [(float(p[0]), float(p[1])) for p in samples if isinstance(p, (tuple, list))]
    if mode == 'scale':
        _check_scale(sys, ts, points, report)
    elif mode == 'axioms':
        _check_axioms(sys, points, pairs, report, rtol)
    elif mode in ('function', 'delta_function'):
        if f is None:
            raise ConfigError(f'mode {mode!r} needs a function to check')
        _check_function(sys, ts, f, points, report, rtol, weighted=(mode == 'delta_function'))
    else:
        raise ConfigError(f'unknown verification mode {mode!r}')
    if report.violations:
        logger.info(f'periodicity check {mode!r}: {len(report.violations)} violation(s) '
                    f'out of {report.checked} checks')
    return report


def _check_scale(sys, ts, points, report):
    T = sys.T
    for t in points:
        for direction in (PLUS, MINUS):
            shifted = _try_shift(sys, direction, T, t)
            if shifted is None or not _in_range(ts, shifted):
                continue
            report.checked += 1
            if not ts.contains(shifted):
                report.add(f'delta{direction}(T,t) in scale', t, T,
                           f'delta{direction}(T, {t!r}) = {shifted!r} is not a point of the scale')
        # sigma commutes with the forward shift
        if ts.is_window_max(t):
            continue
        shifted = _try_shift(sys, PLUS, T, t)
        if shifted is None or not ts.contains(shifted) or ts.is_window_max(shifted):
            continue
        info = ts.jump_info(t)
        lhs = _try_shift(sys, PLUS, T, info.sigma)
        if lhs is None or not _in_range(ts, lhs):
            continue
        report.checked += 1
        rhs = ts.sigma(shifted)
        if abs(lhs - rhs) > 1e3 * snap_tol(rhs):
            report.add('sigma commutation', t, T,
                       f'delta+(T, sigma(t)) = {lhs!r} but sigma(delta+(T, t)) = {rhs!r}')


def _check_axioms(sys, points, pairs, report, rtol):
    t0, T = sys.t0, sys.T
    ordered = sorted(set(points))
    s_values = [p for p in ordered if p >= t0] or [T]

    def expect(check, ok, t, s=None, detail=''):
        report.checked += 1
        if not ok:
            report.add(check, t, s, detail)

    # monotone in t
    for t_a, t_b in zip(ordered, ordered[1:]):
        for direction in (PLUS, MINUS):
            u = _try_shift(sys, direction, T, t_a)
            v = _try_shift(sys, direction, T, t_b)
            if u is not None and v is not None:
                expect(f'delta{direction} increasing in t', u < v, t_a, T, f'{u!r} >= {v!r}')
    # monotone in s
    for idx, (s_a, s_b) in enumerate(zip(s_values, s_values[1:])):
        u = ordered[idx % len(ordered)]
        a, b = _try_shift(sys, PLUS, s_a, u), _try_shift(sys, PLUS, s_b, u)
        if a is not None and b is not None:
            expect('delta+ increasing in s', a <= b, u, s_a)
        a, b = _try_shift(sys, MINUS, s_a, u), _try_shift(sys, MINUS, s_b, u)
        if a is not None and b is not None:
            expect('delta- decreasing in s', a >= b, u, s_a)

    for idx, t in enumerate(ordered):
        # identity element
        value = _try_shift(sys, PLUS, t0, t)
        if value is not None:
            expect('delta+(t0,t) = t', _close(value, t, rtol), t, t0)
        value = _try_shift(sys, MINUS, t0, t)
        if value is not None:
            expect('delta-(t0,t) = t', _close(value, t, rtol), t, t0)
        if t >= t0:
            value = _try_shift(sys, PLUS, t, t0)
            if value is not None:
                expect('delta+(t,t0) = t', _close(value, t, rtol), t, t)
            value = _try_shift(sys, MINUS, t, t)
            if value is not None:
                expect('delta-(t,t) = t0', _close(value, t0, rtol), t, t)
        # round trips with s = T and with a second sample
        s_other = s_values[idx % len(s_values)]
        for s in (T, s_other):
            forward = _try_shift(sys, PLUS, s, t)
            if forward is not None:
                back = _try_shift(sys, MINUS, s, forward)
                if back is not None:
                    expect('delta-(s, delta+(s,t)) = t', _close(back, t, rtol), t, s)
            backward = _try_shift(sys, MINUS, s, t)
            if backward is not None:
                fwd = _try_shift(sys, PLUS, s, backward)
                if fwd is not None:
                    expect('delta+(s, delta-(s,t)) = t', _close(fwd, t, rtol), t, s)
        # commutation of the two shifts
        u = s_values[(idx + 1) % len(s_values)]
        inner = _try_shift(sys, PLUS, T, t)
        left = None if inner is None else _try_shift(sys, MINUS, u, inner)
        inner = _try_shift(sys, MINUS, u, t)
        right = None if inner is None else _try_shift(sys, PLUS, T, inner)
        if left is not None and right is not None:
            expect('delta-(u, delta+(s,t)) = delta+(s, delta-(u,t))', _close(left, right, rtol), t, u)
        # symmetry of the forward shift on [t0, inf)
        if t >= t0:
            a, b = _try_shift(sys, PLUS, u, t), _try_shift(sys, PLUS, t, u)
            if a is not None and b is not None:
                expect('delta+(u,t) = delta+(t,u)', _close(a, b, rtol), t, u)

    for s, t in pairs:
        forward = _try_shift(sys, PLUS, s, t)
        if forward is not None:
            back = _try_shift(sys, MINUS, s, forward)
            if back is not None:
                expect('delta-(s, delta+(s,t)) = t', _close(back, t, rtol), t, s)


def _check_function(sys, ts, f, points, report, rtol, weighted):
    T = sys.T
    for t in points:
        if not ts.contains(t) or (weighted and ts.is_window_max(t)):
            continue
        for direction in (PLUS, MINUS):
            shifted = _try_shift(sys, direction, T, t)
            if shifted is None or not ts.contains(shifted):
                continue
            try:
                lhs = np.asarray(f(shifted))
                if weighted:
                    lhs = lhs * shift_delta_derivative(sys, ts, T, t, direction)
                rhs = np.asarray(f(t))
            except ShiftFloquetError as e:
                report.checked += 1
                report.add(f'f(delta{direction}(T,t)) evaluation', t, T, str(e))
                continue
            report.checked += 1
            if not _close(lhs, rhs, rtol):
                label = 'delta-periodic' if weighted else 'periodic'
                report.add(f'{label} under delta{direction}', t, T,
                           f'max deviation {float(np.max(np.abs(lhs - rhs))):.3e}')


def periodic_integral_gap(f: Callable, sys: ShiftSystem, ts: TimeScaleWindow, t: float,
                          direction: str = PLUS, tol: Optional[float] = None) -> float:
    """|int_{t0}^{t} f - int_{delta(T,t0)}^{delta(T,t)} f| for a delta-periodic f."""
    base = delta_integral(f, ts, sys.t0, t, tol)
    lo = shift(sys, direction, sys.T, sys.t0)
    hi = shift(sys, direction, sys.T, t)
    moved = delta_integral(f, ts, lo, hi, tol)
    return float(np.max(np.abs(np.asarray(base) - np.asarray(moved))))
