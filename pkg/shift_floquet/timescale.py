"""
Bounded windows of a time scale.

A window is an ordered list of closed cells; a degenerate cell (lo == hi) is
an isolated point. The module provides the jump operators, graininess, the
delta derivative and the delta integral over such windows, plus the sample
grids and node chains the higher layers build on.
"""
import bisect
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from . import settings
from .errors import (
    InvalidWindow,
    NonFiniteValue,
    PointNotInScale,
    QuadratureFailure,
    ReversedBounds,
    WindowEdge,
)

logger = logging.getLogger(__name__)

RIGHT_DENSE = 'right-dense'
RIGHT_SCATTERED = 'right-scattered'
WINDOW_MAX = 'window-max'


@dataclass(frozen=True)
class TimeCell:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise InvalidWindow(f'cell lower bound {self.lo} exceeds upper bound {self.hi}')

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class JumpInfo:
    sigma: float
    mu: float
    kind: str
    at_edge: bool = False

    @property
    def scattered(self) -> bool:
        return self.kind == RIGHT_SCATTERED


def snap_tol(t: float, snap: float = None) -> float:
    """Absolute snapping radius around ``t``."""
    return (settings.SNAP_TOL if snap is None else snap) * max(1.0, abs(t))


@dataclass(frozen=True)
class TimeScaleWindow:
    """Finite, ordered cell list representing a window [t_min, t_max] of a time scale."""
    cells: Tuple[TimeCell, ...]
    name: str = 'explicit'
    params: Dict[str, float] = field(default_factory=dict, compare=False)
    snap: float = field(default=None, compare=False)

    def __post_init__(self):
        if not self.cells:
            raise InvalidWindow('time scale window must contain at least one cell')
        for left, right in zip(self.cells, self.cells[1:]):
            if not left.hi < right.lo:
                raise InvalidWindow(
                    f'cells must be disjoint and increasing: [{left.lo}, {left.hi}] '
                    f'then [{right.lo}, {right.hi}]'
                )
        object.__setattr__(self, 'cells', tuple(self.cells))
        object.__setattr__(self, '_los', [c.lo for c in self.cells])

    # construction helpers

    @classmethod
    def from_cells(cls, cells: Iterable[Sequence[float]], name: str = 'explicit',
                   params: Optional[Dict[str, float]] = None) -> 'TimeScaleWindow':
        built = []
        for cell in cells:
            if len(cell) == 1:
                built.append(TimeCell(float(cell[0]), float(cell[0])))
            else:
                built.append(TimeCell(float(cell[0]), float(cell[1])))
        return cls(tuple(built), name=name, params=dict(params or {}))

    @classmethod
    def from_points(cls, points: Iterable[float], name: str = 'discrete',
                    params: Optional[Dict[str, float]] = None) -> 'TimeScaleWindow':
        pts = sorted(set(float(p) for p in points))
        return cls(tuple(TimeCell(p, p) for p in pts), name=name, params=dict(params or {}))

    # basic geometry

    @property
    def t_min(self) -> float:
        return self.cells[0].lo

    @property
    def t_max(self) -> float:
        return self.cells[-1].hi

    @property
    def is_discrete(self) -> bool:
        return all(c.is_point for c in self.cells)

    def _tol(self, t: float) -> float:
        return snap_tol(t, self.snap)

    def locate(self, t: float) -> Optional[int]:
        """Index of the cell containing ``t`` (boundary snapping applied) or None."""
        tol = self._tol(t)
        i = bisect.bisect_right(self._los, t + tol) - 1
        if i < 0:
            return None
        cell = self.cells[i]
        if cell.lo - tol <= t <= cell.hi + tol:
            return i
        return None

    def contains(self, t: float) -> bool:
        return self.locate(t) is not None

    def snap_point(self, t: float) -> float:
        """Snap ``t`` onto a cell endpoint when within tolerance."""
        i = self.locate(t)
        if i is None:
            raise PointNotInScale(f'{t!r} is not in window {self.name}', module='timescale', t=t)
        cell = self.cells[i]
        tol = self._tol(t)
        if abs(t - cell.lo) <= tol:
            return cell.lo
        if abs(t - cell.hi) <= tol:
            return cell.hi
        return t

    def is_window_max(self, t: float) -> bool:
        return abs(t - self.t_max) <= self._tol(t)

    # jump operators

    def jump_info(self, t: float) -> JumpInfo:
        """sigma, mu and the right classification at ``t``."""
        i = self.locate(t)
        if i is None:
            raise PointNotInScale(f'{t!r} is not in window {self.name}',
                                  module='timescale', operation='jump_info', t=t)
        cell = self.cells[i]
        tol = self._tol(t)
        if self.is_window_max(t):
            return JumpInfo(self.t_max, 0.0, WINDOW_MAX, at_edge=True)
        if abs(t - cell.hi) <= tol:
            sigma = self.cells[i + 1].lo
            return JumpInfo(sigma, sigma - cell.hi, RIGHT_SCATTERED)
        return JumpInfo(t, 0.0, RIGHT_DENSE)

    def sigma(self, t: float) -> float:
        return self.jump_info(t).sigma

    def mu(self, t: float) -> float:
        return self.jump_info(t).mu

    def rho(self, t: float) -> float:
        """Backward jump; clamped to the window minimum."""
        i = self.locate(t)
        if i is None:
            raise PointNotInScale(f'{t!r} is not in window {self.name}',
                                  module='timescale', operation='rho', t=t)
        cell = self.cells[i]
        if i > 0 and abs(t - cell.lo) <= self._tol(t):
            return self.cells[i - 1].hi
        return t

    def interior_jump(self, t: float, operation: str = 'jump') -> JumpInfo:
        """jump_info that rejects the window maximum."""
        info = self.jump_info(t)
        if info.at_edge:
            raise WindowEdge(f'{t!r} is the window maximum', module='timescale',
                             operation=operation, t=t)
        return info

    # pieces between two points

    def pieces(self, a: float, b: float) -> List[Tuple[str, float, float]]:
        """Decompose [a, b) into ('dense', lo, hi) segments and ('jump', s, sigma(s)) steps."""
        if a > b + self._tol(b):
            raise ReversedBounds(f'lower bound {a!r} exceeds upper bound {b!r}',
                                 module='timescale', operation='pieces')
        ia = self.locate(a)
        ib = self.locate(b)
        if ia is None:
            raise PointNotInScale(f'{a!r} is not in window {self.name}', module='timescale', t=a)
        if ib is None:
            raise PointNotInScale(f'{b!r} is not in window {self.name}', module='timescale', t=b)
        a = self.snap_point(a)
        b = self.snap_point(b)
        out = []
        for i in range(ia, ib + 1):
            cell = self.cells[i]
            lo = a if i == ia else cell.lo
            hi = b if i == ib else cell.hi
            if hi > lo:
                out.append(('dense', lo, hi))
            if i < ib:
                out.append(('jump', cell.hi, self.cells[i + 1].lo))
        return out

    def scattered_points(self, a: float, b: float) -> List[float]:
        return [s for kind, s, _ in self.pieces(a, b) if kind == 'jump']

    def dense_length(self, a: float, b: float) -> float:
        return sum(hi - lo for kind, lo, hi in self.pieces(a, b) if kind == 'dense')

    # sampling

    def sample_points(self, a: float, b: float, count: int, interior: bool = True,
                      scattered_cap: Optional[int] = None) -> List[float]:
        """Deterministic grid on [a, b]: every scattered point (up to a cap) plus uniform dense points.

        The result is thinned to ``count`` points by evenly spaced index selection and
        always starts at ``a``. With ``interior`` the window maximum is dropped.
        """
        cap = settings.SAMPLE_SCATTERED_CAP if scattered_cap is None else scattered_cap
        a = self.snap_point(a)
        b = self.snap_point(b)
        candidates = {a}
        total_dense = self.dense_length(a, b)
        scattered = 0
        for kind, lo, hi in self.pieces(a, b):
            if kind == 'jump':
                if scattered < cap:
                    candidates.add(lo)
                    candidates.add(hi)
                    scattered += 1
            else:
                n = max(2, int(math.ceil(count * (hi - lo) / total_dense)) + 1)
                candidates.update(float(x) for x in np.linspace(lo, hi, n))
        candidates.add(b)
        pts = sorted(candidates)
        if interior:
            pts = [p for p in pts if not self.is_window_max(p)]
        if len(pts) > count:
            idx = np.unique(np.round(np.linspace(0, len(pts) - 1, count)).astype(int))
            pts = [pts[i] for i in idx]
        return pts

    def __repr__(self):
        return f'TimeScaleWindow({self.name}, [{self.t_min}, {self.t_max}], {len(self.cells)} cells)'


# builders

def real_window(t_min: float, t_max: float) -> TimeScaleWindow:
    return TimeScaleWindow((TimeCell(float(t_min), float(t_max)),), name='real')


def integer_window(t_min: int, t_max: int, step: float = 1.0) -> TimeScaleWindow:
    n = int(round((t_max - t_min) / step))
    return TimeScaleWindow.from_points((t_min + k * step for k in range(n + 1)),
                                       name='integer', params={'h': step})


def q_scale_window(q: float, t_min: float, t_max: float) -> TimeScaleWindow:
    """Window of q^Z (positive part) between t_min and t_max."""
    if q <= 1:
        raise InvalidWindow(f'q must exceed 1, got {q}')
    lo = math.ceil(math.log(t_min) / math.log(q) - 1e-9)
    hi = math.floor(math.log(t_max) / math.log(q) + 1e-9)
    return TimeScaleWindow.from_points((q ** k for k in range(lo, hi + 1)),
                                       name='q_scale', params={'q': q})


def geometric_union_window(q: float, c: float, k_min: int, k_max: int) -> TimeScaleWindow:
    """Union of [q^k, c q^k] for k_min <= k <= k_max."""
    if not 1 < c < q:
        raise InvalidWindow(f'geometric union needs 1 < c < q, got c={c}, q={q}')
    cells = tuple(TimeCell(q ** k, c * q ** k) for k in range(k_min, k_max + 1))
    return TimeScaleWindow(cells, name='geometric_union', params={'q': q, 'c': c})


def sqrt_naturals_window(n_min: int, n_max: int) -> TimeScaleWindow:
    return TimeScaleWindow.from_points((math.sqrt(n) for n in range(n_min, n_max + 1)),
                                       name='sqrt_naturals')


def signed_squares_window(n_max: int) -> TimeScaleWindow:
    """{-n^2, ..., -1, 0, 1, ..., n^2}."""
    pts = [float(k * k) for k in range(n_max + 1)]
    return TimeScaleWindow.from_points([-p for p in pts] + pts, name='signed_squares')


def logistic_window(q: float, k_min: int, k_max: int) -> TimeScaleWindow:
    """{q^k / (1 + q^k)} for k_min <= k <= k_max."""
    if q <= 1:
        raise InvalidWindow(f'q must exceed 1, got {q}')
    return TimeScaleWindow.from_points(
        (q ** k / (1 + q ** k) for k in range(k_min, k_max + 1)),
        name='logistic', params={'q': q},
    )


def _finite(value, t):
    arr = np.asarray(value)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f'non-finite value at t={t!r}', module='timescale', t=t)
    return value


def delta_derivative(f: Callable, ts: TimeScaleWindow, t: float, h: Optional[float] = None):
    """Delta derivative of ``f`` at ``t``.

    Exact difference quotient at right-scattered points, otherwise a
    finite difference that stays inside the dense cell.
    """
    info = ts.interior_jump(t, operation='delta_derivative')
    if info.scattered:
        return (_finite(f(info.sigma), info.sigma) - _finite(f(t), t)) / info.mu
    h = 1e-6 * max(1.0, abs(t)) if h is None else h
    cell = ts.cells[ts.locate(t)]
    if t - h >= cell.lo and t + h <= cell.hi:
        return (_finite(f(t + h), t) - _finite(f(t - h), t)) / (2 * h)
    if t + 2 * h <= cell.hi:
        return (-3 * np.asarray(_finite(f(t), t)) + 4 * np.asarray(f(t + h))
                - np.asarray(f(t + 2 * h))) / (2 * h)
    return (3 * np.asarray(_finite(f(t), t)) - 4 * np.asarray(f(t - h))
            + np.asarray(f(t - 2 * h))) / (2 * h)


def right_derivative(f: Callable, ts: TimeScaleWindow, t: float, h: Optional[float] = None):
    """One-sided forward difference at a right-dense point (used where f has kinks)."""
    info = ts.interior_jump(t, operation='right_derivative')
    if info.scattered:
        return (f(info.sigma) - f(t)) / info.mu
    cell = ts.cells[ts.locate(t)]
    h = 1e-6 * max(1.0, abs(t)) if h is None else h
    h = min(h, (cell.hi - t) / 2)
    return (-3 * np.asarray(f(t)) + 4 * np.asarray(f(t + h)) - np.asarray(f(t + 2 * h))) / (2 * h)


def dense_quadrature(f: Callable, lo: float, hi: float, tol: Optional[float] = None):
    """Adaptive quadrature of a scalar- or array-valued (possibly complex) integrand."""
    tol = settings.QUAD_RTOL if tol is None else tol
    midpoint = np.asarray(f(0.5 * (lo + hi)))
    is_complex = np.iscomplexobj(midpoint)

    def stacked(x):
        value = np.asarray(f(x))
        if is_complex:
            return np.concatenate([value.real.ravel(), value.imag.ravel()])
        return value.ravel().astype(float)

    result, err, info = integrate.quad_vec(
        stacked, lo, hi, epsrel=tol, epsabs=tol * 1e-2,
        limit=max(50, settings.QUAD_EVAL_BUDGET // 21), full_output=True,
    )
    if not info.success:
        raise QuadratureFailure(
            f'quadrature on [{lo}, {hi}] did not reach tol {tol} (err={err:.3g})',
            module='timescale', operation='delta_integral',
        )
    if is_complex:
        half = result.size // 2
        result = result[:half] + 1j * result[half:]
    if midpoint.ndim == 0:
        return result[0]
    return result.reshape(midpoint.shape)


def delta_integral(f: Callable, ts: TimeScaleWindow, a: float, b: float,
                   tol: Optional[float] = None, dense_f: Optional[Callable] = None):
    """Delta integral of ``f`` over [a, b).

    Scattered points contribute mu(s) f(s) exactly; dense segments use
    adaptive quadrature of ``dense_f`` (defaults to ``f``).
    """
    if a > b + ts._tol(b):
        raise ReversedBounds(f'lower bound {a!r} exceeds upper bound {b!r}',
                             module='timescale', operation='delta_integral')
    dense_f = f if dense_f is None else dense_f
    total = 0.0
    for kind, lo, hi in ts.pieces(a, b):
        if kind == 'jump':
            total = total + (hi - lo) * np.asarray(_finite(f(lo), lo))
        else:
            total = total + dense_quadrature(dense_f, lo, hi, tol)
    if np.ndim(total) == 0:
        return total.item() if hasattr(total, 'item') else total
    return total


@dataclass
class NodeChain:
    """Ordered nodes covering [a, b] with per-interval kind (jump or dense)."""
    nodes: np.ndarray
    jump: np.ndarray  # jump[i] is True when nodes[i] -> nodes[i+1] is a scattered step

    def cumulative(self, values: np.ndarray) -> np.ndarray:
        """Cumulative delta integral of node values (first axis), zero at the first node."""
        values = np.asarray(values)
        out = np.zeros_like(values, dtype=np.result_type(values, float))
        i = 0
        n = len(self.nodes)
        while i < n - 1:
            if self.jump[i]:
                out[i + 1] = out[i] + (self.nodes[i + 1] - self.nodes[i]) * values[i]
                i += 1
                continue
            j = i
            while j < n - 1 and not self.jump[j]:
                j += 1
            seg = _cumulative_simpson(values[i:j + 1], self.nodes[i:j + 1])
            out[i:j + 1] = out[i] + seg
            i = j
        return out


def _cumulative_simpson(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    if len(x) < 3:
        return integrate.cumulative_trapezoid(y, x=x, axis=0, initial=0)
    if np.iscomplexobj(y):
        return (integrate.cumulative_simpson(y.real, x=x, axis=0, initial=0)
                + 1j * integrate.cumulative_simpson(y.imag, x=x, axis=0, initial=0))
    return integrate.cumulative_simpson(y, x=x, axis=0, initial=0)


def node_chain(ts: TimeScaleWindow, a: float, b: float, tol: Optional[float] = None) -> NodeChain:
    """Node chain for cumulative integration; dense spacing scales like tol**(1/4)."""
    tol = settings.QUAD_RTOL if tol is None else tol
    per_unit = tol ** -0.25
    nodes = [ts.snap_point(a)]
    jumps = []
    for kind, lo, hi in ts.pieces(a, b):
        if kind == 'jump':
            nodes.append(hi)
            jumps.append(True)
        else:
            count = int(min(8193, max(65, math.ceil((hi - lo) * per_unit))))
            count += 1 - count % 2
            grid = np.linspace(lo, hi, count)[1:]
            nodes.extend(grid.tolist())
            jumps.extend([False] * len(grid))
    return NodeChain(np.asarray(nodes, dtype=float), np.asarray(jumps, dtype=bool))
