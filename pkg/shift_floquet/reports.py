"""
Report output: the JSON analysis report and the CSV sample tracks.
"""
import csv
import logging
from pathlib import Path
from typing import List, Optional

import numpy as np

from .analysis import AnalysisResult
from .errors import IoError
from .hilger import re_mu
from .schemas import AnalysisReport
from .stability import eigenvalue_paths, lambda_ratio

logger = logging.getLogger(__name__)

MATRIX_TRACKS = ('phi', 'e_R', 'L')


def write_report(report: AnalysisReport, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(report.model_dump_json(indent=2), encoding='utf-8')
    except OSError as e:
        raise IoError(f'cannot write report {path}: {e}', module='reports',
                      operation='write_report') from e
    logger.info(f'report written to {path}')
    return path


def sample_header(n: int, eigen_count: int) -> List[str]:
    header = ['t', 'sigma', 'mu', 'theta']
    for name in MATRIX_TRACKS:
        for i in range(n):
            for j in range(n):
                header += [f'{name}_{i}{j}_re', f'{name}_{i}{j}_im']
    header += [f're_mu_{k}' for k in range(eigen_count)]
    header.append('lambda_ratio')
    return header


def _fmt(x: float) -> str:
    return f'{float(x):.17g}'


def sample_rows(result: AnalysisResult, count: Optional[int] = None) -> List[List[str]]:
    """One row per sample t in [t0, t_max), ascending."""
    dec, ts, sys = result.decomposition, result.window, result.shifts
    count = len(result.stability.samples) if count is None else count
    rows = []
    for t in ts.sample_points(sys.t0, ts.t_max, count):
        info = ts.jump_info(t)
        row = [_fmt(t), _fmt(info.sigma), _fmt(info.mu), _fmt(dec.theta(t))]
        for M in (dec.phi(t), dec.e_R(t), dec.L(t)):
            for z in np.asarray(M, dtype=complex).ravel():
                row += [_fmt(z.real), _fmt(z.imag)]
        row += [_fmt(re_mu(gamma, info.mu)) for gamma in eigenvalue_paths(dec, ts, t, distinct=True)]
        row.append(_fmt(lambda_ratio(sys, ts, t)))
        rows.append(row)
    if len(rows) < count:
        logger.warning(f'{ts.name} has only {len(rows)} points in [{sys.t0:g}, {ts.t_max:g}); '
                       f'{count} samples requested')
    return rows


def emit_samples(result: AnalysisResult, path, count: Optional[int] = None) -> Path:
    """Write the sample tracks as RFC 4180 CSV."""
    path = Path(path)
    dec = result.decomposition
    header = sample_header(dec.spectral.n, len(dec.spectral.eigenvalues))
    rows = sample_rows(result, count)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\r\n')
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise IoError(f'cannot write samples {path}: {e}', module='reports',
                      operation='emit_samples') from e
    logger.info(f'{len(rows)} sample rows written to {path}')
    return path
