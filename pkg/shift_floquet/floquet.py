"""
Floquet decomposition for systems periodic in shifts.

With M = Phi_A(delta_plus(T, t0), t0) the monodromy matrix,

    e_R(t, t0) = M^(Theta(t) / T),    L(t) = Phi_A(t, t0) e_R(t, t0)^-1

gives Phi_A(t, t0) = L(t) e_R(t, t0) with L periodic in shifts.
"""
import cmath
import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import linalg, optimize

from . import settings
from .errors import (
    DegenerateMultiplier,
    RegressivityViolation,
    ResonantSystem,
    RootFindFailure,
)
from .hilger import circle_plus, hilger_imaginary, omega_in_strip
from .matpow import SpectralData, matrix_log, real_power, spectral_decompose
from .shifts import PLUS, ShiftSystem, shift, theta, theta_derivative
from .timescale import TimeScaleWindow
from .transition import (
    MatrixFunction,
    TransitionCache,
    propagate_matrix,
    transition_matrix,
    variation_of_constants,
)

logger = logging.getLogger(__name__)

EXPONENT_RTOL = 1e-9


@dataclass(frozen=True)
class FloquetExponent:
    """gamma = gamma0 (+) i-circle(omega), omega = 2 pi k / (t1 - t0)."""
    multiplier: complex
    base: complex
    omega: float
    branch: int

    def value(self, mu: float) -> complex:
        if self.omega == 0:
            return self.base
        return circle_plus(self.base, hilger_imaginary(self.omega, mu, strict=False), mu)

    def exp(self, ts: TimeScaleWindow, t: float, s: float) -> complex:
        """e_gamma(t, s); gamma is constant on dense cells, so no quadrature is needed."""
        if t < s:
            return 1.0 / self.exp(ts, s, t)
        total = 0j
        for kind, lo, hi in ts.pieces(s, t):
            if kind == 'jump':
                total += cmath.log(1 + (hi - lo) * self.value(hi - lo))
            else:
                total += self.value(0.0) * (hi - lo)
        return cmath.exp(total)

    def strip_violations(self, ts: TimeScaleWindow, a: float, b: float) -> List[float]:
        """Scattered points where omega leaves (-pi/mu, pi/mu]."""
        return [s for kind, s, nxt in ts.pieces(a, b)
                if kind == 'jump' and not omega_in_strip(self.omega, nxt - s)]


def exponent_from_multiplier(lam: complex, sys: ShiftSystem, ts: TimeScaleWindow,
                             k: int = 0) -> FloquetExponent:
    """Constant gamma0 with e_gamma0(t1, t0) = lam, shifted to branch k."""
    lam = complex(lam)
    if abs(lam) <= settings.SNAP_TOL:
        raise DegenerateMultiplier(f'multiplier {lam!r} is zero', module='floquet',
                                   operation='exponent_from_multiplier')
    t0, t1 = sys.t0, sys.period_end()
    pieces = ts.pieces(t0, t1)
    mus = np.array([hi - lo for kind, lo, hi in pieces if kind == 'jump'], dtype=float)
    dense = sum(hi - lo for kind, lo, hi in pieces if kind == 'dense')
    target = cmath.log(lam)

    def g(gamma, level=1.0):
        return sum(cmath.log(1 + mu * gamma) for mu in mus) + gamma * dense - level * target

    def g_prime(gamma, level=1.0):
        return sum(mu / (1 + mu * gamma) for mu in mus) + dense

    if len(mus) == 0:
        gamma0 = target / dense
    elif len(mus) == 1 and dense == 0:
        gamma0 = (lam - 1) / mus[0]
    else:
        guess = (lam - 1) / (t1 - t0)
        try:
            gamma0 = complex(optimize.newton(g, guess, fprime=g_prime, tol=1e-15,
                                                  rtol=1e-13, maxiter=100))
        except (RuntimeError, ZeroDivisionError, OverflowError):
            logger.debug(f'newton failed for multiplier {lam!r}; continuing along the phase')
            gamma0 = _continuation_root(g, g_prime)
    for mu in mus:
        if abs(1 + mu * gamma0) <= settings.SNAP_TOL:
            raise RegressivityViolation(f'1 + mu gamma0 vanishes for gamma0={gamma0!r}',
                                        module='floquet', operation='exponent_from_multiplier')
    residual = abs(cmath.exp(g(gamma0) + target) - lam)
    if residual > EXPONENT_RTOL * abs(lam):
        raise RootFindFailure(f'exponent for multiplier {lam!r} did not converge',
                              residual=residual, module='floquet',
                              operation='exponent_from_multiplier')
    return FloquetExponent(multiplier=lam, base=gamma0,
                           omega=2 * math.pi * k / (t1 - t0), branch=k)


def _continuation_root(g, g_prime, steps: int = 64) -> complex:
    gamma = 0j
    for level in np.linspace(0.0, 1.0, steps + 1)[1:]:
        try:
            gamma = complex(optimize.newton(g, gamma, fprime=g_prime, args=(level,),
                                            tol=1e-15, rtol=1e-13, maxiter=50))
        except (RuntimeError, ZeroDivisionError, OverflowError) as e:
            raise RootFindFailure(f'continuation stalled at level {level:.3f}: {e}',
                                  module='floquet', operation='exponent_from_multiplier')
    return gamma


def monodromy(A: MatrixFunction, ts: TimeScaleWindow, sys: ShiftSystem,
              tol: Optional[float] = None):
    """(M, multipliers) with M = Phi_A(delta_plus(T, t0), t0)."""
    M = transition_matrix(A, ts, sys.period_end(), sys.t0, tol)
    eigs = linalg.eigvals(M)
    if np.min(np.abs(eigs)) <= settings.SNAP_TOL:
        raise DegenerateMultiplier(f'monodromy has a multiplier of modulus {np.min(np.abs(eigs)):.3e}',
                                   module='floquet', operation='monodromy')
    return M, spectral_decompose(M).multipliers


def monodromy_from_fundamental(A: MatrixFunction, ts: TimeScaleWindow, sys: ShiftSystem,
                               psi0, tol: Optional[float] = None) -> np.ndarray:
    """Psi(t1) Psi(t0)^-1 for the fundamental matrix with Psi(t0) = psi0."""
    psi0 = np.asarray(psi0, dtype=complex)
    psi1 = propagate_matrix(A, ts, sys.t0, sys.period_end(), psi0, tol)
    return psi1 @ np.linalg.inv(psi0)


@dataclass
class FloquetDecomposition:
    A: MatrixFunction
    ts: TimeScaleWindow
    sys: ShiftSystem
    monodromy: np.ndarray
    spectral: SpectralData
    exponents: List[FloquetExponent]
    tol: Optional[float] = None
    _phi_cache: TransitionCache = field(default=None, init=False, repr=False)
    _log_m: Optional[np.ndarray] = field(default=None, init=False, repr=False)
    _inverse_cache: Dict[float, np.ndarray] = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        self._phi_cache = TransitionCache(self.A, self.ts, self.sys.t0, self.tol)

    @property
    def T(self) -> float:
        return self.sys.T

    @property
    def t0(self) -> float:
        return self.sys.t0

    @property
    def t1(self) -> float:
        return self.sys.period_end()

    @property
    def multipliers(self) -> np.ndarray:
        return self.spectral.multipliers

    @property
    def log_monodromy(self) -> np.ndarray:
        if self._log_m is None:
            self._log_m = matrix_log(self.monodromy, self.spectral)
        return self._log_m

    def theta(self, t: float) -> float:
        return theta(self.sys, self.ts, t)

    def phi(self, t: float) -> np.ndarray:
        return self._phi_cache.at(t)

    def power(self, r: complex) -> np.ndarray:
        return real_power(self.monodromy, r, self.spectral)

    def e_R(self, t: float) -> np.ndarray:
        return self.power(self.theta(t) / self.T)

    def e_R_inverse(self, t: float) -> np.ndarray:
        key = self.ts.snap_point(t)
        with self._lock:
            cached = self._inverse_cache.get(key)
        if cached is None:
            cached = self.power(-self.theta(key) / self.T)
            with self._lock:
                self._inverse_cache[key] = cached
        return cached

    def R(self, t: float) -> np.ndarray:
        return floquet_R(self, self.ts, t)

    def L(self, t: float) -> np.ndarray:
        return self.phi(t) @ self.e_R_inverse(t)


def decompose(A: MatrixFunction, ts: TimeScaleWindow, sys: ShiftSystem,
              tol: Optional[float] = None) -> FloquetDecomposition:
    M, _ = monodromy(A, ts, sys, tol)
    spectral = spectral_decompose(M)
    exponents = [exponent_from_multiplier(lam, sys, ts, 0) for lam in spectral.eigenvalues]
    logger.info(f'monodromy multipliers: {np.round(spectral.multipliers, 12).tolist()}')
    return FloquetDecomposition(A=A, ts=ts, sys=sys, monodromy=M, spectral=spectral,
                                exponents=exponents, tol=tol)


def floquet_R(dec: FloquetDecomposition, ts: TimeScaleWindow, t: float) -> np.ndarray:
    info = ts.interior_jump(t, operation='floquet_R')
    if info.scattered:
        step = (dec.theta(info.sigma) - dec.theta(t)) / dec.T
        return (dec.power(step) - np.eye(dec.spectral.n)) / info.mu
    return (theta_derivative(dec.sys, ts, t) / dec.T) * dec.log_monodromy


def floquet_exponential(dec: FloquetDecomposition, ts: TimeScaleWindow, t: float) -> np.ndarray:
    return dec.e_R(t)


def lyapunov_factor(dec: FloquetDecomposition, A: MatrixFunction, ts: TimeScaleWindow,
                    t: float) -> np.ndarray:
    return dec.L(t)


def period_samples(dec: FloquetDecomposition, count: int = 16) -> List[float]:
    """Samples t >= t0 whose forward period shift stays in the window."""
    ts, sys = dec.ts, dec.sys
    out = []
    for t in ts.sample_points(sys.t0, ts.t_max, count, interior=False):
        shifted = shift(sys, PLUS, sys.T, t)
        if shifted <= ts.t_max and ts.contains(shifted):
            out.append(t)
    return out


@dataclass(frozen=True)
class PeriodicSolution:
    exists: bool
    x0: Optional[np.ndarray] = None
    residual: Optional[float] = None


def _unit_eigenvector(M: np.ndarray, lam: complex) -> np.ndarray:
    _, _, vh = linalg.svd(M - lam * np.eye(M.shape[0]))
    vec = vh[-1].conj()
    return vec / np.linalg.norm(vec)


def homogeneous_periodic_solution(dec: FloquetDecomposition, tol: Optional[float] = None,
                                  samples: Optional[Sequence[float]] = None) -> PeriodicSolution:
    tol = settings.RESONANCE_TOL if tol is None else tol
    hits = [lam for lam in dec.spectral.eigenvalues if abs(lam - 1) < tol]
    if not hits:
        return PeriodicSolution(exists=False)
    z0 = _unit_eigenvector(dec.monodromy, hits[0])
    x0 = dec.L(dec.t0) @ z0
    samples = period_samples(dec) if samples is None else samples
    residual = 0.0
    for t in samples:
        shifted = shift(dec.sys, PLUS, dec.T, t)
        residual = max(residual, float(np.linalg.norm(dec.phi(shifted) @ x0 - dec.phi(t) @ x0)))
    return PeriodicSolution(exists=True, x0=x0, residual=residual)


def nonhomogeneous_periodic_state(A: MatrixFunction, F: MatrixFunction, ts: TimeScaleWindow,
                                  sys: ShiftSystem, tol: Optional[float] = None) -> np.ndarray:
    """x0 = (I - M)^-1 int_[t0, t1) Phi(t1, sigma(s)) F(s) delta-s."""
    tol = settings.RESONANCE_TOL if tol is None else tol
    t0, t1 = sys.t0, sys.period_end()
    M = transition_matrix(A, ts, t1, t0)
    gap = np.eye(A.n) - M
    if abs(np.linalg.det(gap)) < tol:
        raise ResonantSystem('I - M is singular; a homogeneous periodic solution exists',
                             module='floquet', operation='nonhomogeneous_periodic_state')
    forced = variation_of_constants(A, F, ts, t1, t0, np.zeros(A.n))
    return np.linalg.solve(gap, forced)


def periodic_state_residual(A: MatrixFunction, F: MatrixFunction, ts: TimeScaleWindow,
                            sys: ShiftSystem, x0) -> float:
    x1 = variation_of_constants(A, F, ts, sys.period_end(), sys.t0, x0)
    return float(np.linalg.norm(x1 - np.asarray(x0)))


def _cluster_index(dec: FloquetDecomposition, lam: complex) -> int:
    return int(np.argmin(np.abs(dec.spectral.eigenvalues - lam)))


def bloch_exp(dec: FloquetDecomposition, index: int, t: float) -> complex:
    """e_gamma_i(t, t0) along the eigenvalue path of R: lambda_i^(Theta(t) / T)."""
    return cmath.exp(dec.theta(t) / dec.T * dec.spectral.logs[index])


def bloch_solution(dec: FloquetDecomposition, lam: complex, ts: TimeScaleWindow, t: float,
                   u=None) -> np.ndarray:
    """x(t) = e_gamma(t, t0) L(t) u with x(delta_plus(T, t)) = lam x(t)."""
    index = _cluster_index(dec, lam)
    if u is None:
        u = _unit_eigenvector(dec.monodromy, dec.spectral.eigenvalues[index])
    return bloch_exp(dec, index, t) * (dec.L(t) @ np.asarray(u, dtype=complex))


def decomposition_residuals(dec: FloquetDecomposition,
                            samples: Optional[Sequence[float]] = None) -> Dict[str, float]:
    samples = period_samples(dec) if samples is None else samples
    worst_split = 0.0
    worst_period = 0.0
    for t in samples:
        L_t = dec.L(t)
        worst_split = max(worst_split, float(np.linalg.norm(dec.phi(t) - L_t @ dec.e_R(t))))
        shifted = shift(dec.sys, PLUS, dec.T, t)
        if dec.ts.contains(shifted):
            worst_period = max(worst_period, float(np.linalg.norm(dec.L(shifted) - L_t)))
    monodromy_gap = float(np.linalg.norm(dec.e_R(dec.t1) - dec.monodromy))
    return {
        'max_phi_minus_L_eR': worst_split,
        'max_L_periodicity': worst_period,
        'monodromy_gap': monodromy_gap,
    }


def change_of_variables_residual(dec: FloquetDecomposition, x0,
                                 samples: Optional[Sequence[float]] = None) -> float:
    """max |(z(sigma) - z(t)) / mu - R(t) z(t)| over scattered samples, z = L^-1 x."""
    x0 = np.asarray(x0, dtype=complex)
    samples = period_samples(dec) if samples is None else samples
    worst = 0.0
    for t in samples:
        if dec.ts.is_window_max(t):
            continue
        info = dec.ts.jump_info(t)
        if not info.scattered:
            continue
        z_t = np.linalg.solve(dec.L(t), dec.phi(t) @ x0)
        z_s = np.linalg.solve(dec.L(info.sigma), dec.phi(info.sigma) @ x0)
        gap = (z_s - z_t) / info.mu - dec.R(t) @ z_t
        worst = max(worst, float(np.linalg.norm(gap)))
    return worst
