"""
Shared fixtures: the worked time scales, shift systems and systems.
"""
import json
import logging

import numpy as np
import pytest

from shift_floquet.shifts import additive_shifts, multiplicative_shifts
from shift_floquet.timescale import (
    geometric_union_window,
    integer_window,
    q_scale_window,
    real_window,
)
from shift_floquet.transition import MatrixFunction


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def qz():
    """2^Z between 1 and 4096."""
    return q_scale_window(2.0, 1.0, 4096.0)


@pytest.fixture
def qz_shifts():
    return multiplicative_shifts(2.0)


@pytest.fixture
def geometric():
    """Union of [3^k, 2 3^k] for k = 0..4."""
    return geometric_union_window(3.0, 2.0, 0, 4)


@pytest.fixture
def geometric_shifts():
    return multiplicative_shifts(3.0)


@pytest.fixture
def reals():
    return real_window(1.0, 256.0)


@pytest.fixture
def integers():
    return integer_window(0, 20)


@pytest.fixture
def integer_shifts():
    return additive_shifts(1.0)


@pytest.fixture
def inverse_t():
    return MatrixFunction.from_expressions([['1/t', '0'], ['0', '1/t']])


@pytest.fixture
def example_config():
    """Factory for the 2^Z example config; keyword arguments replace top-level blocks."""
    def build(**overrides):
        cfg = {
            'timescale': {'kind': 'q_scale', 'params': {'q': 2}, 'window': [1, 4096]},
            'shifts': {'kind': 'multiplicative', 't0': 1, 'T': 2},
            'system': {'n': 2, 'A': [['1/t', '0'], ['0', '1/t']]},
            'analysis': {'samples': 12},
        }
        cfg.update(overrides)
        return cfg
    return build


@pytest.fixture
def write_config(tmp_path):
    def write(cfg, name='config.json'):
        path = tmp_path / name
        path.write_text(json.dumps(cfg), encoding='utf-8')
        return path
    return write


@pytest.fixture
def package_log(caplog):
    """caplog attached to the package logger, which does not propagate once configured."""
    logger = logging.getLogger('shift_floquet')
    logger.addHandler(caplog.handler)
    caplog.set_level(logging.DEBUG, logger='shift_floquet')
    yield caplog
    logger.removeHandler(caplog.handler)
