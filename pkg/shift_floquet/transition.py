"""
Transition matrices of x^delta = A(t) x on hybrid windows.

Scattered points propagate exactly through I + mu A; dense cells integrate
the matrix ODE Y' = A Y with an embedded Runge-Kutta pair. The nonhomogeneous
problem is solved on the augmented system [[A, F], [0, 0]].
"""
import logging
import threading
from bisect import bisect_right
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from . import settings
from .errors import ConfigError, IntegrationFailure, NonFiniteValue, RegressivityViolation, ReversedBounds
from .exprdsl import CompiledExpr
from .timescale import TimeScaleWindow, node_chain, snap_tol

logger = logging.getLogger(__name__)

# Diagonal entries for the builtin catalog; off-diagonal entries are zero.
BUILTIN_ENTRIES: Dict[str, str] = {
    'zero': '0',
    'inverse_t': '1/t',
    'scaled_inverse_t': 'a/t',
    'cosine_log': '(1/t)*cos(pi*ln(t)/ln(q))',
}


@dataclass(frozen=True)
class MatrixFunction:
    """t -> complex array of fixed shape (n x n matrices, or length-n vectors)."""
    evaluator: Callable[[float], np.ndarray]
    shape: Tuple[int, ...]
    label: str = ''
    certified_horizon: Optional[Tuple[float, float]] = None

    @property
    def n(self) -> int:
        return self.shape[0]

    def __call__(self, t: float) -> np.ndarray:
        value = np.asarray(self.evaluator(t), dtype=complex).reshape(self.shape)
        if not np.all(np.isfinite(value)):
            raise NonFiniteValue(f'{self.label or "matrix function"} is not finite at t={t!r}',
                                 module='transition', t=t)
        return value

    @classmethod
    def from_expressions(cls, entries: Sequence, params: Optional[Dict[str, float]] = None
                         ) -> 'MatrixFunction':
        """Build from a list of DSL strings (vector) or a list of rows (matrix)."""
        if entries and isinstance(entries[0], (list, tuple)):
            compiled = [[CompiledExpr(src, params) for src in row] for row in entries]
            shape = (len(compiled), len(compiled[0]))

            def evaluator(t):
                return np.array([[f(t) for f in row] for row in compiled], dtype=float)

            label = 'A(t)'
        else:
            compiled = [CompiledExpr(src, params) for src in entries]
            shape = (len(compiled),)

            def evaluator(t):
                return np.array([f(t) for f in compiled], dtype=float)

            label = 'F(t)'
        return cls(evaluator, shape, label=label)

    @classmethod
    def constant(cls, matrix) -> 'MatrixFunction':
        value = np.asarray(matrix, dtype=complex)
        return cls(lambda t: value, value.shape, label='constant')

    @classmethod
    def builtin(cls, name: str, n: int, params: Optional[Dict[str, float]] = None
                ) -> 'MatrixFunction':
        if name not in BUILTIN_ENTRIES:
            raise ConfigError(f'unknown builtin system {name!r}; choose from {sorted(BUILTIN_ENTRIES)}')
        entry = BUILTIN_ENTRIES[name]
        rows = [[entry if i == j else '0' for j in range(n)] for i in range(n)]
        fn = cls.from_expressions(rows, params)
        return replace(fn, label=name)

    def certify(self, ts: TimeScaleWindow, a: float, b: float,
                tol: Optional[float] = None) -> 'MatrixFunction':
        """Verify det(I + mu A) != 0 at every scattered point of [a, b)."""
        tol = settings.REGRESSIVITY_TOL if tol is None else tol
        identity = np.eye(self.n)
        for s in ts.scattered_points(a, b):
            mu = ts.mu(s)
            if abs(np.linalg.det(identity + mu * self(s))) <= tol:
                raise RegressivityViolation(f'I + mu A is singular at t={s!r}',
                                            module='transition', operation='certify', t=s)
        return replace(self, certified_horizon=(a, b))


def augmented(A: MatrixFunction, F: MatrixFunction) -> MatrixFunction:
    """[[A, F], [0, 0]] so that the affine flow acts on (x, 1)."""
    n = A.n

    def evaluator(t):
        out = np.zeros((n + 1, n + 1), dtype=complex)
        out[:n, :n] = A(t)
        out[:n, n] = F(t)
        return out

    return MatrixFunction(evaluator, (n + 1, n + 1), label='[A F; 0 0]')


@dataclass
class Propagation:
    """Per-piece factors between two points; their time-ordered product is Phi."""
    breakpoints: List[float]
    factors: List[np.ndarray]
    kinds: List[str]

    def product(self, n: int) -> np.ndarray:
        out = np.eye(n, dtype=complex)
        for factor in self.factors:
            out = factor @ out
        return out


def _dense_flow(A: MatrixFunction, lo: float, hi: float, Y0: np.ndarray,
                rtol: float, atol: float) -> np.ndarray:
    n = Y0.shape[0]

    def rhs(tau, y):
        return (A(tau) @ y.reshape(n, -1)).ravel()

    sol = solve_ivp(rhs, (lo, hi), Y0.astype(complex).ravel(), method='RK45',
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationFailure(f'dense flow on [{lo}, {hi}] failed: {sol.message}',
                                 module='transition', operation='transition_matrix', t=lo)
    return sol.y[:, -1].reshape(Y0.shape)


def _jump_factor(A: MatrixFunction, s: float, mu: float, tol: float) -> np.ndarray:
    factor = np.eye(A.n, dtype=complex) + mu * A(s)
    if abs(np.linalg.det(factor)) <= tol:
        raise RegressivityViolation(f'I + mu A is singular at t={s!r}',
                                    module='transition', operation='transition_matrix', t=s)
    return factor


def build_propagation(A: MatrixFunction, ts: TimeScaleWindow, t0: float, t: float,
                      rtol: Optional[float] = None, atol: Optional[float] = None) -> Propagation:
    rtol = settings.ODE_RTOL if rtol is None else rtol
    atol = settings.ODE_ATOL if atol is None else atol
    breakpoints, factors, kinds = [ts.snap_point(t0)], [], []
    identity = np.eye(A.n, dtype=complex)
    for kind, lo, hi in ts.pieces(t0, t):
        if kind == 'jump':
            factors.append(_jump_factor(A, lo, hi - lo, settings.REGRESSIVITY_TOL))
        else:
            factors.append(_dense_flow(A, lo, hi, identity, rtol, atol))
        kinds.append(kind)
        breakpoints.append(hi)
    return Propagation(breakpoints, factors, kinds)


def transition_matrix(A: MatrixFunction, ts: TimeScaleWindow, t: float, t0: float,
                      tol: Optional[float] = None) -> np.ndarray:
    """Phi_A(t, t0); backward transitions invert the forward product."""
    if t < t0 - snap_tol(t0):
        return np.linalg.inv(transition_matrix(A, ts, t0, t, tol))
    return build_propagation(A, ts, t0, t, rtol=tol).product(A.n)


def propagate_matrix(A: MatrixFunction, ts: TimeScaleWindow, t0: float, t: float,
                     Y0, tol: Optional[float] = None) -> np.ndarray:
    """Solution of Y^delta = A Y with Y(t0) = Y0, integrated directly from Y0."""
    rtol = settings.ODE_RTOL if tol is None else tol
    Y = np.asarray(Y0, dtype=complex)
    for kind, lo, hi in ts.pieces(t0, t):
        if kind == 'jump':
            Y = _jump_factor(A, lo, hi - lo, settings.REGRESSIVITY_TOL) @ Y
        else:
            Y = _dense_flow(A, lo, hi, Y, rtol, settings.ODE_ATOL)
    return Y


class TransitionCache:
    """Phi_A(t, t0) for t >= t0, reusing the nearest cached breakpoint below t."""

    def __init__(self, A: MatrixFunction, ts: TimeScaleWindow, t0: float,
                 tol: Optional[float] = None):
        self.A = A
        self.ts = ts
        self.t0 = ts.snap_point(t0)
        self.tol = tol
        self._keys: List[float] = [self.t0]
        self._values: List[np.ndarray] = [np.eye(A.n, dtype=complex)]
        self._lock = threading.Lock()

    def at(self, t: float) -> np.ndarray:
        t = self.ts.snap_point(t)
        if t < self.t0:
            return np.linalg.inv(transition_matrix(self.A, self.ts, self.t0, t, self.tol))
        with self._lock:
            i = bisect_right(self._keys, t) - 1
            key, base = self._keys[i], self._values[i]
        if key == t:
            return base.copy()
        value = transition_matrix(self.A, self.ts, t, key, self.tol) @ base
        with self._lock:
            i = bisect_right(self._keys, t)
            if i == 0 or self._keys[i - 1] != t:
                self._keys.insert(i, t)
                self._values.insert(i, value)
        return value.copy()


def peano_baker(A: MatrixFunction, ts: TimeScaleWindow, t: float, t0: float,
                order: int, tol: Optional[float] = None) -> np.ndarray:
    """Truncated series I + int A + int A int A + ... evaluated on a node chain."""
    n = A.n
    identity = np.eye(n, dtype=complex)
    if order <= 0 or abs(t - t0) <= snap_tol(t0):
        return identity
    if t < t0:
        return np.linalg.inv(peano_baker(A, ts, t0, t, order, tol))
    chain = node_chain(ts, t0, t, tol)
    a_nodes = np.stack([A(x) for x in chain.nodes])
    term = np.broadcast_to(identity, a_nodes.shape)
    total = identity.copy()
    for _ in range(order):
        term = chain.cumulative(np.einsum('kij,kjl->kil', a_nodes, term))
        total = total + term[-1]
    return total


def variation_of_constants(A: MatrixFunction, F: Optional[MatrixFunction], ts: TimeScaleWindow,
                           t: float, t0: float, x0, tol: Optional[float] = None) -> np.ndarray:
    """y(t) = Phi(t, t0) x0 + int_[t0, t) Phi(t, sigma(s)) F(s) delta-s."""
    if t < t0 - snap_tol(t0):
        raise ReversedBounds(f't={t!r} precedes t0={t0!r}', module='transition',
                             operation='variation_of_constants')
    x0 = np.asarray(x0, dtype=complex)
    if F is None:
        return transition_matrix(A, ts, t, t0, tol) @ x0
    state = np.append(x0, 1.0)
    Phi_aug = transition_matrix(augmented(A, F), ts, t, t0, tol)
    return (Phi_aug @ state)[:A.n]
