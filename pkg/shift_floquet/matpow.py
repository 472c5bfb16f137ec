"""
Real and complex powers of a nonsingular matrix through spectral projections.

For eigenvalue clusters lambda_i with algebraic multiplicity m_i and
projections P_i, with N_i = (M - lambda_i I) / lambda_i:

    M^r = sum_i lambda_i^r P_i sum_{j < m_i} binom(r, j) N_i^j

where binom(r, j) is the falling factorial r (r-1) ... (r-j+1) / j! and
lambda_i^r uses the principal logarithm.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.special import comb

from . import settings
from .errors import ClusteringAmbiguous, SingularMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectralData:
    matrix: np.ndarray
    eigenvalues: np.ndarray           # one representative per cluster
    multiplicities: Tuple[int, ...]
    projections: Tuple[np.ndarray, ...]
    logs: np.ndarray                  # principal Log of each representative
    terms: Tuple[Tuple[np.ndarray, ...], ...]  # terms[i][j] = P_i N_i^j

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def multipliers(self) -> np.ndarray:
        """Cluster representatives repeated by algebraic multiplicity."""
        return np.repeat(self.eigenvalues, self.multiplicities)

    def geometric_multiplicities(self) -> List[int]:
        return [geometric_multiplicity(self.matrix, lam) for lam in self.eigenvalues]


def _norm(M: np.ndarray) -> float:
    return max(float(np.linalg.norm(M, 2)), np.finfo(float).tiny)


def _sine(u: np.ndarray, v: np.ndarray) -> float:
    """Sine of the angle between two eigenvectors."""
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    return float(np.linalg.norm(v - np.vdot(u, v) * u))


def cluster_eigenvalues(eigs: np.ndarray, norm: float, strict: bool = False,
                        vectors: Optional[np.ndarray] = None) -> List[List[int]]:
    """Single-linkage grouping of eigenvalue indices.

    Values within the cluster tolerance always merge. Pairs inside the wider
    ambiguity radius are ambiguous: they merge only when their eigenvectors
    (columns of ``vectors``) are nearly parallel, as in a split Jordan block,
    and are kept apart otherwise. ``strict`` raises on any
    ambiguous pair.
    """
    cluster_tol = settings.CLUSTER_RTOL * norm
    ambiguity_tol = max(settings.AMBIGUITY_RTOL * norm, cluster_tol)
    n = len(eigs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            gap = abs(eigs[i] - eigs[j])
            if gap <= cluster_tol:
                parent[find(i)] = find(j)
                continue
            if gap > ambiguity_tol:
                continue
            if strict:
                raise ClusteringAmbiguous(
                    f'eigenvalues {eigs[i]} and {eigs[j]} are separated by {gap:.3e}, '
                    f'inside the ambiguity radius {ambiguity_tol:.3e}',
                    module='matpow', operation='spectral_decompose',
                )
            if vectors is not None and _sine(vectors[:, i], vectors[:, j]) <= settings.ALIGNMENT_TOL:
                logger.debug(f'merging eigenvalues {eigs[i]} and {eigs[j]} (gap {gap:.3e}) '
                             f'with parallel eigenvectors into one cluster')
                parent[find(i)] = find(j)
            else:
                logger.warning(f'eigenvalues {eigs[i]} and {eigs[j]} are only {gap:.3e} apart; '
                               f'kept as separate clusters')
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: (eigs[g[0]].real, eigs[g[0]].imag))


def _inverse_taylor(lam_i: complex, others: List[Tuple[complex, int]], order: int) -> np.ndarray:
    """Taylor coefficients at lam_i of prod_j (lambda - lam_j)^(-m_j), up to degree order-1."""
    coeffs = np.zeros(order, dtype=complex)
    coeffs[0] = 1.0
    for lam_j, m_j in others:
        d = lam_i - lam_j
        series = np.array(
            [(-1) ** k * comb(m_j + k - 1, k, exact=True) / d ** k for k in range(order)],
            dtype=complex,
        ) / d ** m_j
        coeffs = np.convolve(coeffs, series)[:order]
    return coeffs


def spectral_decompose(M, strict: bool = False, snap: Optional[float] = None) -> SpectralData:
    """Cluster eigenvalues and build the spectral projections via partial fractions."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    snap = settings.SNAP_TOL if snap is None else snap
    det = np.linalg.det(M)
    if abs(det) <= snap:
        raise SingularMatrix(f'|det M| = {abs(det):.3e} is not above {snap:.1e}',
                             module='matpow', operation='spectral_decompose')
    norm = _norm(M)
    eigs, vectors = linalg.eig(M)
    clusters = cluster_eigenvalues(eigs, norm, strict=strict, vectors=vectors)
    reps = np.array([eigs[g].mean() for g in clusters], dtype=complex)
    mults = tuple(len(g) for g in clusters)
    if np.any(np.abs(reps) <= snap):
        raise SingularMatrix('zero eigenvalue', module='matpow', operation='spectral_decompose')

    identity = np.eye(n, dtype=complex)
    shifted = [M - lam * identity for lam in reps]
    projections = []
    for i, (lam_i, m_i) in enumerate(zip(reps, mults)):
        others = [(reps[j], mults[j]) for j in range(len(reps)) if j != i]
        coeffs = _inverse_taylor(lam_i, others, m_i)
        a_of_m = np.zeros_like(M)
        power = identity
        for c in coeffs:
            a_of_m = a_of_m + c * power
            power = power @ shifted[i]
        b_of_m = identity
        for j, (_, m_j) in enumerate(others):
            k = j if j < i else j + 1
            b_of_m = b_of_m @ np.linalg.matrix_power(shifted[k], m_j)
        projections.append(a_of_m @ b_of_m)

    terms = []
    for i, (lam_i, m_i) in enumerate(zip(reps, mults)):
        nilpotent = shifted[i] / lam_i
        row = [projections[i]]
        for _ in range(1, m_i):
            row.append(row[-1] @ nilpotent)
        terms.append(tuple(row))

    return SpectralData(
        matrix=M,
        eigenvalues=reps,
        multiplicities=mults,
        projections=tuple(projections),
        logs=np.log(reps),
        terms=tuple(terms),
    )


def falling_binomial(r: complex, j: int) -> complex:
    """r (r-1) ... (r-j+1) / j!"""
    value = 1.0 + 0j
    for k in range(j):
        value *= (r - k) / (k + 1)
    return value


def real_power(M, r: complex, spectral: Optional[SpectralData] = None) -> np.ndarray:
    """M^r on the principal branch; r may be any real or complex number."""
    M = np.asarray(M, dtype=complex)
    if r == 0:
        return np.eye(M.shape[0], dtype=complex)
    if r == 1:
        return M.copy()
    spectral = spectral_decompose(M) if spectral is None else spectral
    out = np.zeros_like(M)
    for log_lam, row in zip(spectral.logs, spectral.terms):
        inner = sum(falling_binomial(r, j) * term for j, term in enumerate(row))
        out = out + np.exp(r * log_lam) * inner
    return out


def matrix_log(M, spectral: Optional[SpectralData] = None) -> np.ndarray:
    """Principal logarithm sum_i P_i [Log lambda_i + sum_j (-1)^(j+1) N_i^j / j]."""
    spectral = spectral_decompose(M) if spectral is None else spectral
    out = np.zeros((spectral.n, spectral.n), dtype=complex)
    for log_lam, row in zip(spectral.logs, spectral.terms):
        out = out + log_lam * row[0]
        for j in range(1, len(row)):
            out = out + ((-1) ** (j + 1) / j) * row[j]
    return out


def geometric_multiplicity(M, lam: complex, rtol: Optional[float] = None) -> int:
    """n - rank(M - lam I) with a rank tolerance relative to ||M||."""
    M = np.asarray(M, dtype=complex)
    rtol = settings.RANK_RTOL if rtol is None else rtol
    tol = rtol * _norm(M)
    rank = np.linalg.matrix_rank(M - lam * np.eye(M.shape[0]), tol=tol)
    return M.shape[0] - int(rank)
