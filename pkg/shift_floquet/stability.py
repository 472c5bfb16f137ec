"""
Stability of the zero solution from the Floquet data.

Two classifiers run side by side: the eigenvalue-path conditions on a
sampled horizon [H, t_max], and the multiplier-modulus test on the
monodromy matrix. Both produce finite-horizon numerical verdicts.
"""
import cmath
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import settings
from .errors import EmptyHorizon
from .floquet import FloquetDecomposition
from .hilger import re_mu
from .matpow import geometric_multiplicity
from .shifts import ShiftSystem, theta, theta_derivative
from .timescale import TimeScaleWindow, node_chain, snap_tol

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    EXPONENTIALLY_STABLE = 'ExponentiallyStable'
    ASYMPTOTICALLY_STABLE = 'AsymptoticallyStable'
    STABLE = 'Stable'
    UNSTABLE = 'Unstable'
    INCONCLUSIVE = 'Inconclusive'


def lambda_ratio(sys: ShiftSystem, ts: TimeScaleWindow, t: float) -> float:
    """Growth rate of Theta: (Theta(sigma) - Theta(t)) / mu, or Theta'(t) at dense points."""
    info = ts.interior_jump(t, operation='lambda_ratio')
    if info.scattered:
        return (theta(sys, ts, info.sigma) - theta(sys, ts, t)) / info.mu
    return theta_derivative(sys, ts, t)


def monomial_h(sys: ShiftSystem, ts: TimeScaleWindow, k: int, t: float, t0: float,
               tol: Optional[float] = None) -> float:
    """h_0 = 1, h_{k+1}(t, t0) = int_[t0, t) lambda_ratio(s) h_k(s, t0) delta-s."""
    if k == 0:
        return 1.0
    if abs(t - t0) <= snap_tol(t0):
        return 0.0
    chain = node_chain(ts, t0, t, tol)
    nodes = chain.nodes
    ratios = np.empty(len(nodes))
    for i, x in enumerate(nodes):
        if i < len(nodes) - 1 and chain.jump[i]:
            ratios[i] = (theta(sys, ts, nodes[i + 1]) - theta(sys, ts, x)) / (nodes[i + 1] - x)
        elif i == len(nodes) - 1 and chain.jump[-1]:
            ratios[i] = 0.0
        else:
            ratios[i] = theta_derivative(sys, ts, x)
    h = np.ones(len(nodes))
    for _ in range(k):
        h = chain.cumulative(ratios * h)
    return float(h[-1])


def _path_value(log_lam: complex, step: Optional[float], mu: float, dense_rate: Optional[float],
                T: float) -> complex:
    if mu > 0:
        return (cmath.exp(step / T * log_lam) - 1) / mu
    return dense_rate / T * log_lam


def eigenvalue_paths(dec: FloquetDecomposition, ts: TimeScaleWindow, t: float,
                     distinct: bool = False) -> List[complex]:
    """gamma_i(t) for every multiplier (repeated by multiplicity unless ``distinct``)."""
    info = ts.interior_jump(t, operation='eigenvalue_paths')
    if info.scattered:
        step = dec.theta(info.sigma) - dec.theta(t)
        rate = None
    else:
        step = None
        rate = theta_derivative(dec.sys, ts, t)
    logs = dec.spectral.logs
    if not distinct:
        logs = np.repeat(logs, dec.spectral.multiplicities)
    return [_path_value(log_lam, step, info.mu, rate, dec.T) for log_lam in logs]


@dataclass(frozen=True)
class RegressivityCertificate:
    theta_inv: float
    passed: bool
    worst: float


def uniform_regressivity_certificate(dec: FloquetDecomposition, ts: TimeScaleWindow,
                                     samples: Sequence[float], tol: float = 1e-12
                                     ) -> RegressivityCertificate:
    """Check |1 + mu gamma_i| >= min(1, min |lambda_i|) - tol at every sample."""
    theta_inv = min(1.0, float(np.min(np.abs(dec.spectral.eigenvalues)))) - tol
    worst = np.inf
    for t in samples:
        if ts.is_window_max(t):
            continue
        mu = ts.mu(t)
        for gamma in eigenvalue_paths(dec, ts, t, distinct=True):
            worst = min(worst, abs(1 + mu * gamma))
    passed = bool(worst >= theta_inv)
    return RegressivityCertificate(theta_inv=theta_inv, passed=passed, worst=float(worst))


@dataclass
class EigenTrack:
    multiplier: complex
    algebraic: int
    geometric: int
    gamma: List[complex] = field(default_factory=list)
    re_mu: List[float] = field(default_factory=list)
    inf_statistic: float = np.inf
    eps_statistic: float = np.inf

    @property
    def defective(self) -> bool:
        return self.geometric < self.algebraic


@dataclass
class StabilityReport:
    horizon: Tuple[float, float]
    samples: List[float]
    lambda_ratio: List[float]
    tracks: List[EigenTrack]
    verdict_theorem: Verdict
    verdict_corollary: Verdict
    regressivity: RegressivityCertificate
    notes: List[str] = field(default_factory=list)

    @property
    def inf_statistic(self) -> float:
        return min(track.inf_statistic for track in self.tracks)


def _theorem_verdict(tracks: List[EigenTrack], eps_tol: float, epsilon: float,
                     notes: List[str]) -> Verdict:
    for track in tracks:
        if all(value > eps_tol for value in track.re_mu):
            return Verdict.UNSTABLE
    inf_all = min(track.inf_statistic for track in tracks)
    if inf_all > eps_tol:
        if epsilon > 0:
            if all(track.eps_statistic >= epsilon for track in tracks):
                return Verdict.EXPONENTIALLY_STABLE
            notes.append(f'epsilon condition -Re_mu(gamma) >= {epsilon:g} fails on the horizon; '
                         f'minimum observed {min(t.eps_statistic for t in tracks):.6g}')
        return Verdict.ASYMPTOTICALLY_STABLE
    if inf_all >= -eps_tol:
        marginal = [track for track in tracks if track.inf_statistic <= eps_tol]
        for track in marginal:
            if not all(abs(value) <= eps_tol for value in track.re_mu):
                notes.append(f'Re_mu(gamma) for multiplier {track.multiplier:.6g} is neither '
                             f'uniformly negative nor uniformly zero on the horizon')
                return Verdict.INCONCLUSIVE
        if any(track.defective for track in marginal):
            return Verdict.UNSTABLE
        return Verdict.STABLE
    worst = min(tracks, key=lambda track: track.inf_statistic)
    notes.append(f'Re_mu(gamma) for multiplier {worst.multiplier:.6g} is positive on part of the '
                 f'horizon (infimum statistic {worst.inf_statistic:.6g})')
    return Verdict.UNSTABLE


def _corollary_verdict(tracks: List[EigenTrack], tol: float) -> Verdict:
    moduli = [abs(track.multiplier) for track in tracks]
    if any(m > 1 + tol for m in moduli):
        return Verdict.UNSTABLE
    if all(m < 1 - tol for m in moduli):
        return Verdict.EXPONENTIALLY_STABLE
    unit = [track for track in tracks if abs(track.multiplier) >= 1 - tol]
    if any(track.defective for track in unit):
        return Verdict.UNSTABLE
    return Verdict.STABLE


def classify(dec: FloquetDecomposition, ts: TimeScaleWindow, sys: ShiftSystem,
             horizon: Tuple[float, float], eps_tol: Optional[float] = None,
             sample_count: int = 50, epsilon: float = 0.0,
             modulus_tol: Optional[float] = None) -> StabilityReport:
    eps_tol = settings.EPS_TOL if eps_tol is None else eps_tol
    modulus_tol = settings.RESONANCE_TOL if modulus_tol is None else modulus_tol
    H, t_max = horizon
    if H < sys.t0 - snap_tol(sys.t0) or H >= t_max:
        raise EmptyHorizon(f'horizon [{H}, {t_max}] is empty or starts before t0={sys.t0}',
                           module='stability', operation='classify')
    samples = [t for t in ts.sample_points(H, t_max, sample_count) if not ts.is_window_max(t)]
    if not samples:
        raise EmptyHorizon(f'no interior samples in [{H}, {t_max}]',
                           module='stability', operation='classify')

    spectral = dec.spectral
    tracks = [
        EigenTrack(multiplier=complex(lam), algebraic=m,
                   geometric=geometric_multiplicity(spectral.matrix, lam))
        for lam, m in zip(spectral.eigenvalues, spectral.multiplicities)
    ]
    ratios = []
    for t in samples:
        ratio = lambda_ratio(sys, ts, t)
        mu = ts.mu(t)
        ratios.append(ratio)
        for track, gamma in zip(tracks, eigenvalue_paths(dec, ts, t, distinct=True)):
            value = re_mu(gamma, mu)
            track.gamma.append(gamma)
            track.re_mu.append(value)
            track.inf_statistic = min(track.inf_statistic, -value / ratio)
            track.eps_statistic = min(track.eps_statistic, -value)

    notes = [f'finite-horizon numerical verdicts on [{H:g}, {t_max:g}] from {len(samples)} samples']
    verdict_theorem = _theorem_verdict(tracks, eps_tol, epsilon, notes)
    verdict_corollary = _corollary_verdict(tracks, modulus_tol)
    if verdict_theorem != verdict_corollary:
        notes.append(f'classifiers disagree: theorem conditions give {verdict_theorem.value}, '
                     f'multiplier moduli give {verdict_corollary.value}')
    certificate = uniform_regressivity_certificate(dec, ts, samples)
    if not certificate.passed:
        notes.append(f'uniform regressivity bound {certificate.theta_inv:.6g} not met '
                     f'(worst |1 + mu gamma| = {certificate.worst:.6g})')
    logger.info(f'stability: theorem={verdict_theorem.value}, corollary={verdict_corollary.value}')
    return StabilityReport(
        horizon=(H, t_max),
        samples=samples,
        lambda_ratio=ratios,
        tracks=tracks,
        verdict_theorem=verdict_theorem,
        verdict_corollary=verdict_corollary,
        regressivity=certificate,
        notes=notes,
    )


def decay_track(dec: FloquetDecomposition, ts: TimeScaleWindow, k: int, index: int,
                samples: Sequence[float], tol: Optional[float] = None) -> List[float]:
    """h_k(t, t0) e_{Re_mu gamma_i}(t, t0) at the samples; the exponential is |lambda_i|^(Theta/T)."""
    modulus = abs(dec.spectral.eigenvalues[index])
    out = []
    for t in samples:
        h = monomial_h(dec.sys, ts, k, t, dec.t0, tol)
        out.append(h * modulus ** (dec.theta(t) / dec.T))
    return out
