"""
Scalar exponential and Hilger complex-plane helpers.
"""
import cmath
import logging
import math
from typing import Callable, List, Optional

from . import settings
from .errors import ConfigError, OmegaOutOfStrip, RegressivityViolation
from .shifts import PLUS, ShiftSystem, iterate_shift
from .timescale import TimeScaleWindow, dense_quadrature

logger = logging.getLogger(__name__)


def cylinder(z: complex, mu: float) -> complex:
    """Cylinder transform Log(1 + mu z) / mu, with the mu -> 0 limit z."""
    if mu == 0:
        return complex(z)
    return cmath.log(1 + mu * z) / mu


def _check_regressive(a: complex, mu: float, operation: str):
    if mu > 0 and abs(1 + mu * a) <= settings.SNAP_TOL:
        raise RegressivityViolation(f'1 + mu*{a!r} vanishes at mu={mu!r}',
                                    module='hilger', operation=operation)


def circle_plus(a: complex, b: complex, mu: float) -> complex:
    return a + b + mu * a * b


def circle_negate(a: complex, mu: float) -> complex:
    _check_regressive(a, mu, 'circle_negate')
    return -a / (1 + mu * a)


def circle_minus(a: complex, b: complex, mu: float) -> complex:
    return circle_plus(a, circle_negate(b, mu), mu)


def circle_ops(a: complex, b: Optional[complex], mu: float, op: str) -> complex:
    """Dispatch for plus, minus and negate."""
    _check_regressive(a, mu, op)
    if op == 'negate':
        return circle_negate(a, mu)
    _check_regressive(b, mu, op)
    if op == 'plus':
        return circle_plus(a, b, mu)
    if op == 'minus':
        return circle_minus(a, b, mu)
    raise ConfigError(f'unknown circle operation {op!r}')


def re_mu(z: complex, mu: float) -> float:
    """Hilger real part."""
    if mu == 0:
        return complex(z).real
    return (abs(1 + mu * z) - 1) / mu


def im_mu(z: complex, mu: float) -> float:
    """Hilger imaginary part Arg(1 + mu z) / mu."""
    if mu == 0:
        return complex(z).imag
    return cmath.phase(1 + mu * z) / mu


def omega_in_strip(omega: float, mu: float) -> bool:
    if mu == 0:
        return True
    return -math.pi / mu < omega <= math.pi / mu


def hilger_imaginary(omega: float, mu: float, strict: bool = True) -> complex:
    """i-circle omega = (exp(i omega mu) - 1) / mu; i omega when mu = 0."""
    if strict and not omega_in_strip(omega, mu):
        raise OmegaOutOfStrip(f'omega={omega!r} outside (-pi/mu, pi/mu] for mu={mu!r}',
                              module='hilger', operation='hilger_imaginary')
    if mu == 0:
        return 1j * omega
    return (cmath.exp(1j * omega * mu) - 1) / mu


def in_hilger_circle(z: complex, mu: float) -> bool:
    return re_mu(z, mu) < 0


def is_uniformly_regressive(z: complex, mu: float, theta_bound: float) -> bool:
    """True when 1/theta_bound <= |1 + mu z|."""
    return 1.0 / theta_bound <= abs(1 + mu * z)


def hilger_checks(z: complex, mu: float, mode: str, omega: Optional[float] = None,
                  theta_bound: Optional[float] = None):
    if mode == 'imaginary':
        if omega is None:
            raise ConfigError('imaginary mode needs omega')
        return hilger_imaginary(omega, mu)
    if mode == 'circle':
        return in_hilger_circle(z, mu)
    if mode == 'uniform_regressive':
        if theta_bound is None:
            raise ConfigError('uniform_regressive mode needs theta_bound')
        return is_uniformly_regressive(z, mu, theta_bound)
    raise ConfigError(f'unknown hilger check {mode!r}')


def scalar_exp(p: Callable[[float], complex], ts: TimeScaleWindow, t: float, s: float,
               tol: Optional[float] = None, branch_cut_points: Optional[List[float]] = None) -> complex:
    """e_p(t, s) on the window.

    Scattered points contribute Log(1 + mu p) exactly; dense segments
    integrate p directly. Points where 1 + mu p lies on the negative real
    axis are accepted and appended to ``branch_cut_points`` when given.
    """
    if t < s:
        return 1.0 / scalar_exp(p, ts, s, t, tol, branch_cut_points)
    exponent = 0j
    for kind, lo, hi in ts.pieces(s, t):
        if kind == 'jump':
            mu = hi - lo
            factor = 1 + mu * complex(p(lo))
            if abs(factor) <= settings.SNAP_TOL:
                raise RegressivityViolation(f'1 + mu p vanishes at t={lo!r}',
                                            module='hilger', operation='scalar_exp', t=lo)
            if factor.real < 0 and abs(factor.imag) <= settings.SNAP_TOL * abs(factor):
                logger.warning(f'1 + mu p = {factor!r} on the branch cut at t={lo!r}')
                if branch_cut_points is not None:
                    branch_cut_points.append(lo)
            exponent += cmath.log(factor)
        else:
            exponent += complex(dense_quadrature(lambda x: complex(p(x)), lo, hi, tol))
    return cmath.exp(exponent)


def constant_exp(gamma: complex, ts: TimeScaleWindow, t: float, s: float) -> complex:
    """e_gamma(t, s) for constant gamma without quadrature."""
    if t < s:
        return 1.0 / constant_exp(gamma, ts, s, t)
    exponent = 0j
    for kind, lo, hi in ts.pieces(s, t):
        if kind == 'jump':
            exponent += cmath.log(1 + (hi - lo) * gamma)
        else:
            exponent += gamma * (hi - lo)
    return cmath.exp(exponent)


def hilger_shift_periodic(sys: ShiftSystem, ts: TimeScaleWindow, samples, k: int = 1,
                          tol: float = 1e-9) -> List[float]:
    """Points where (delta_plus^(k)(T, t) - t) / (delta_plus^(k)(T, t0) - t0) is not an integer.

    At the returned points exp of the Hilger-imaginary exponent
    i-circle(2 pi / (t1 - t0)) fails to be periodic in shifts.
    """
    denom = iterate_shift(sys, PLUS, sys.T, k, sys.t0) - sys.t0
    bad = []
    for t in samples:
        ratio = (iterate_shift(sys, PLUS, sys.T, k, t) - t) / denom
        if abs(ratio - round(ratio)) > tol * max(1.0, abs(ratio)):
            bad.append(float(t))
    return bad
