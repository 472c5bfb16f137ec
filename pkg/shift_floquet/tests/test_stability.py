import math

import numpy as np
import pytest

from shift_floquet.errors import EmptyHorizon
from shift_floquet.floquet import decompose
from shift_floquet.shifts import additive_shifts
from shift_floquet.stability import (
    EigenTrack,
    Verdict,
    _theorem_verdict,
    classify,
    decay_track,
    eigenvalue_paths,
    lambda_ratio,
    monomial_h,
    uniform_regressivity_certificate,
)
from shift_floquet.timescale import real_window
from shift_floquet.transition import MatrixFunction


@pytest.fixture
def half_decay(qz, qz_shifts):
    A = MatrixFunction.from_expressions([['-(1/2)/t']])
    return decompose(A, qz, qz_shifts)


class TestGrowthRate:

    def test_lambda_ratio(self, qz, qz_shifts):
        assert lambda_ratio(qz_shifts, qz, 4.0) == pytest.approx(0.5)

    def test_lambda_ratio_additive(self, integers, integer_shifts):
        assert lambda_ratio(integer_shifts, integers, 3.0) == pytest.approx(1.0)

    def test_monomials_q_scale(self, qz, qz_shifts):
        assert monomial_h(qz_shifts, qz, 0, 8.0, 1.0) == 1.0
        assert monomial_h(qz_shifts, qz, 1, 8.0, 1.0) == pytest.approx(6.0)
        assert monomial_h(qz_shifts, qz, 2, 4.0, 1.0) == pytest.approx(4.0)
        assert monomial_h(qz_shifts, qz, 1, 1.0, 1.0) == 0.0

    def test_monomials_real_line(self):
        ts = real_window(0.0, 4.0)
        assert monomial_h(additive_shifts(1.0), ts, 2, 2.0, 0.0) == pytest.approx(2.0, rel=1e-9)


class TestEigenvaluePaths:

    def test_half_decay(self, qz, half_decay):
        for t in [1.0, 8.0, 64.0]:
            (gamma,) = eigenvalue_paths(half_decay, qz, t)
            assert gamma == pytest.approx(-1.0 / (2 * t))

    def test_repeated_by_multiplicity(self, qz, qz_shifts, inverse_t):
        dec = decompose(inverse_t, qz, qz_shifts)
        assert len(eigenvalue_paths(dec, qz, 4.0)) == 2
        assert len(eigenvalue_paths(dec, qz, 4.0, distinct=True)) == 1

    def test_certificate(self, qz, half_decay):
        certificate = uniform_regressivity_certificate(half_decay, qz, [1.0, 2.0, 4.0, 8.0])
        assert certificate.passed
        assert certificate.worst == pytest.approx(0.5)


class TestClassify:

    def test_growing_system(self, qz, qz_shifts, inverse_t):
        dec = decompose(inverse_t, qz, qz_shifts)
        report = classify(dec, qz, qz_shifts, (1.0, 4096.0))
        assert report.verdict_theorem == Verdict.UNSTABLE
        assert report.verdict_corollary == Verdict.UNSTABLE

    def test_half_decay(self, qz, qz_shifts, half_decay):
        report = classify(half_decay, qz, qz_shifts, (1.0, 4096.0), epsilon=0.01)
        assert report.verdict_corollary == Verdict.EXPONENTIALLY_STABLE
        assert report.verdict_theorem == Verdict.ASYMPTOTICALLY_STABLE
        assert report.inf_statistic == pytest.approx(0.25, abs=1e-9)
        for t, value in zip(report.samples, report.tracks[0].re_mu):
            assert value == pytest.approx(-1.0 / (2 * t))
        assert any('classifiers disagree' in note for note in report.notes)

    def test_half_decay_without_epsilon(self, qz, qz_shifts, half_decay):
        report = classify(half_decay, qz, qz_shifts, (1.0, 4096.0))
        assert report.verdict_theorem == Verdict.ASYMPTOTICALLY_STABLE

    def test_verdict_strings(self):
        assert Verdict.EXPONENTIALLY_STABLE.value == 'ExponentiallyStable'
        assert Verdict('Inconclusive') is Verdict.INCONCLUSIVE

    def test_empty_horizon(self, qz, qz_shifts, half_decay):
        with pytest.raises(EmptyHorizon):
            classify(half_decay, qz, qz_shifts, (4096.0, 4096.0))
        with pytest.raises(EmptyHorizon):
            classify(half_decay, qz, qz_shifts, (0.5, 4096.0))

    def test_defective_unit_multiplier(self, integers, integer_shifts):
        A = MatrixFunction.constant([[0.0, 1.0], [0.0, 0.0]])
        dec = decompose(A, integers, integer_shifts)
        report = classify(dec, integers, integer_shifts, (0.0, 20.0))
        assert report.verdict_theorem == Verdict.UNSTABLE
        assert report.verdict_corollary == Verdict.UNSTABLE

    def test_rotation_is_stable(self, integers, integer_shifts):
        # I + A is a rotation by 90 degrees
        A = MatrixFunction.constant([[-1.0, -1.0], [1.0, -1.0]])
        dec = decompose(A, integers, integer_shifts)
        report = classify(dec, integers, integer_shifts, (0.0, 20.0))
        assert report.verdict_corollary == Verdict.STABLE
        assert report.verdict_theorem == Verdict.STABLE

    def test_similarity_invariance(self, rng, integers, integer_shifts):
        C = np.diag([-0.5, -0.3])
        S = np.array([[1.0, 0.4], [0.2, 1.5]]) + 0.1 * rng.standard_normal((2, 2))
        similar = S @ C @ np.linalg.inv(S)
        verdicts = set()
        for matrix in (C, similar):
            dec = decompose(MatrixFunction.constant(matrix), integers, integer_shifts)
            report = classify(dec, integers, integer_shifts, (0.0, 20.0))
            verdicts.add(report.verdict_corollary)
        assert verdicts == {Verdict.EXPONENTIALLY_STABLE}

    def test_nearly_degenerate_multipliers_are_stable(self):
        ts = real_window(0.0, 16.0)
        sys = additive_shifts(1.0)
        A = MatrixFunction.constant(np.diag([0.0, math.log(1.0 - 5e-5)]))
        report = classify(decompose(A, ts, sys), ts, sys, (0.0, 16.0))
        assert [track.algebraic for track in report.tracks] == [1, 1]
        assert report.verdict_theorem == Verdict.STABLE
        assert report.verdict_corollary == Verdict.STABLE

    def test_partially_positive_rate_is_unstable(self):
        track = EigenTrack(multiplier=1.5, algebraic=1, geometric=1, re_mu=[0.0, 0.2],
                           inf_statistic=-0.2, eps_statistic=-0.2)
        notes = []
        assert _theorem_verdict([track], 1e-9, 0.0, notes) == Verdict.UNSTABLE
        assert any('positive on part of the horizon' in note for note in notes)


class TestDecayTrack:

    def test_first_monomial(self, qz, half_decay):
        values = decay_track(half_decay, qz, 1, 0, [4.0, 8.0, 16.0, 32.0])
        np.testing.assert_allclose(values, [1.0, 0.75, 0.5, 0.3125], rtol=1e-12)
