"""
Runtime settings for shift_floquet.

Values are read from the environment (optionally via a .env file) with
defaults that reproduce the documented tolerances.
"""
import logging.config
import os
import sys
from contextlib import contextmanager
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables from .env file
load_dotenv(BASE_DIR / '.env')

ENV_PREFIX = 'SHIFT_FLOQUET_'


def _env_float(name, default):
    return float(os.getenv(ENV_PREFIX + name, default))


def _env_int(name, default):
    return int(float(os.getenv(ENV_PREFIX + name, default)))


# Membership / boundary snapping (absolute, scaled by max(1, |t|))
SNAP_TOL = _env_float('SNAP_TOL', 1e-12)

# Dense quadrature
QUAD_RTOL = _env_float('QUAD_RTOL', 1e-10)
QUAD_EVAL_BUDGET = _env_int('QUAD_EVAL_BUDGET', 2 ** 20)

# Dense-segment matrix ODE
ODE_RTOL = _env_float('ODE_RTOL', 1e-10)
ODE_ATOL = _env_float('ODE_ATOL', 1e-12)

# |det(I + mu A)| must exceed this at scattered points
REGRESSIVITY_TOL = _env_float('REGRESSIVITY_TOL', 1e-12)

# Spectral clustering
CLUSTER_RTOL = _env_float('CLUSTER_RTOL', 1e-8)
AMBIGUITY_RTOL = _env_float('AMBIGUITY_RTOL', 1e-4)
ALIGNMENT_TOL = _env_float('ALIGNMENT_TOL', 1e-3)
RANK_RTOL = _env_float('RANK_RTOL', 1e-10)

# Floquet / stability
RESONANCE_TOL = _env_float('RESONANCE_TOL', 1e-8)
EPS_TOL = _env_float('EPS_TOL', 1e-9)
PERIODICITY_RTOL = _env_float('PERIODICITY_RTOL', 1e-10)
THETA_ITER_CAP = _env_int('THETA_ITER_CAP', 10 ** 6)
SAMPLE_SCATTERED_CAP = _env_int('SAMPLE_SCATTERED_CAP', 10 ** 4)

LOG_LEVEL = os.getenv(ENV_PREFIX + 'LOG_LEVEL', 'INFO')

# Logging configuration
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'INFO',
    },
    'loggers': {
        'shift_floquet': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}


def configure_logging(level=None):
    """Apply LOGGING, optionally overriding the package logger level."""
    config = dict(LOGGING)
    if level is not None:
        config['loggers'] = {
            'shift_floquet': dict(LOGGING['loggers']['shift_floquet'], level=level),
        }
    logging.config.dictConfig(config)


@contextmanager
def override(**values):
    """Temporarily replace module-level settings, e.g. ``override(ODE_RTOL=1e-8)``."""
    module = sys.modules[__name__]
    unknown = [name for name in values if not hasattr(module, name)]
    if unknown:
        raise AttributeError(f'unknown settings: {", ".join(sorted(unknown))}')
    saved = {name: getattr(module, name) for name in values}
    for name, value in values.items():
        setattr(module, name, value)
    try:
        yield
    finally:
        for name, value in saved.items():
            setattr(module, name, value)
