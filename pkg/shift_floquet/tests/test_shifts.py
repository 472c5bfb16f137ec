import math
from dataclasses import replace

import pytest

from shift_floquet.errors import ConfigError, IterationCapExceeded, OutOfDomain
from shift_floquet.shifts import (
    MINUS,
    PLUS,
    additive_shifts,
    build_shift_system,
    custom_shifts,
    iterate_shift,
    logistic_shifts,
    m_index,
    multiplicative_shifts,
    periodic_integral_gap,
    shift,
    shift_delta_derivative,
    signed_squares_shifts,
    sqrt_shifts,
    theta,
    theta_derivative,
    verify_periodicity,
)
from shift_floquet.timescale import (
    TimeScaleWindow,
    geometric_union_window,
    integer_window,
    logistic_window,
    q_scale_window,
    real_window,
    signed_squares_window,
    sqrt_naturals_window,
)


class TestShiftOperators:

    def test_multiplicative(self, qz_shifts):
        assert shift(qz_shifts, PLUS, 2.0, 4.0) == 8.0
        assert shift(qz_shifts, MINUS, 2.0, 8.0) == 4.0
        assert qz_shifts.period_end() == 2.0

    def test_multiplicative_domain(self, qz_shifts):
        with pytest.raises(OutOfDomain):
            shift(qz_shifts, PLUS, 0.5, 2.0)

    def test_sqrt_backward_domain(self):
        sys = sqrt_shifts(1.0)
        assert shift(sys, PLUS, 3.0, 4.0) == pytest.approx(5.0)
        with pytest.raises(OutOfDomain):
            shift(sys, MINUS, 5.0, 4.0)

    def test_signed_squares(self):
        sys = signed_squares_shifts(1.0)
        assert shift(sys, PLUS, 1.0, 4.0) == pytest.approx(9.0)
        assert shift(sys, PLUS, 1.0, -4.0) == pytest.approx(-1.0)
        assert shift(sys, MINUS, 1.0, 1.0) == pytest.approx(0.0)
        assert sys.period_end() == pytest.approx(1.0)

    def test_logistic(self):
        sys = logistic_shifts(2 / 3)
        assert shift(sys, PLUS, 2 / 3, 2 / 3) == pytest.approx(4 / 5)
        assert shift(sys, MINUS, 2 / 3, 4 / 5) == pytest.approx(2 / 3)

    def test_custom_matches_multiplicative(self, qz):
        sys = custom_shifts(2.0, 1.0, 't*s', 't/s')
        assert shift(sys, PLUS, 2.0, 4.0) == pytest.approx(8.0)
        assert theta(sys, qz, 8.0) == pytest.approx(6.0)

    def test_custom_undefined_point(self):
        sys = custom_shifts(2.0, 1.0, 't*s', 'ln(t)/s')
        with pytest.raises(OutOfDomain):
            shift(sys, MINUS, 2.0, -1.0)

    def test_iterate(self, qz_shifts):
        assert iterate_shift(qz_shifts, PLUS, 2.0, 3, 1.0) == 8.0
        assert iterate_shift(qz_shifts, PLUS, 2.0, 0, 5.0) == 5.0


class TestBuild:

    def test_default_identity(self):
        assert build_shift_system('multiplicative', 2.0).t0 == 1.0
        assert build_shift_system('additive', 3.0, 0.0).t0 == 0.0

    def test_wrong_identity(self):
        with pytest.raises(ConfigError):
            build_shift_system('multiplicative', 2.0, t0=2.0)

    def test_period_must_exceed_t0(self):
        with pytest.raises(ConfigError):
            build_shift_system('multiplicative', 0.5)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            build_shift_system('spiral', 2.0)

    def test_custom_needs_expressions(self):
        with pytest.raises(ConfigError):
            build_shift_system('custom', 2.0, 1.0, forward='t*s')


class TestTheta:

    def test_q_scale_values(self, qz_shifts, qz):
        assert theta(qz_shifts, qz, 1.0) == 0.0
        assert theta(qz_shifts, qz, 4.0) == pytest.approx(4.0)
        assert theta(qz_shifts, qz, 8.0) == pytest.approx(6.0)

    def test_hybrid_values(self, geometric_shifts, geometric):
        assert theta(geometric_shifts, geometric, 3.0) == pytest.approx(3.0)
        assert theta(geometric_shifts, geometric, 4.0) == pytest.approx(3.75)
        assert theta(geometric_shifts, geometric, 9.0) == pytest.approx(6.0)

    def test_additive_is_identity(self):
        assert theta(additive_shifts(2.0), None, 5.0) == pytest.approx(5.0)

    def test_m_index(self, geometric_shifts):
        assert m_index(geometric_shifts, 1.0) == 0
        assert m_index(geometric_shifts, 2.0) == 1
        assert m_index(geometric_shifts, 3.0) == 1
        assert m_index(geometric_shifts, 4.0) == 2

    def test_dense_derivative(self, geometric_shifts, geometric):
        assert theta_derivative(geometric_shifts, geometric, math.sqrt(3.0)) == pytest.approx(1.0)
        # at an anchor the next anchor governs
        assert theta_derivative(geometric_shifts, geometric, 3.0) == pytest.approx(1.0)

    def test_numeric_derivative_for_custom(self, geometric):
        sys = custom_shifts(3.0, 1.0, 't*s', 't/s')
        assert theta_derivative(sys, geometric, math.sqrt(3.0)) == pytest.approx(1.0, rel=1e-6)

    def test_before_t0(self, qz_shifts, qz):
        with pytest.raises(OutOfDomain):
            theta(qz_shifts, qz, 0.5)

    def test_iteration_cap(self, qz_shifts):
        capped = replace(qz_shifts, iteration_cap=3)
        with pytest.raises(IterationCapExceeded):
            theta(capped, None, 100.0)

    def test_shift_delta_derivative(self, qz_shifts, qz, geometric_shifts, geometric):
        assert shift_delta_derivative(qz_shifts, qz, 2.0, 4.0) == pytest.approx(2.0)
        assert shift_delta_derivative(geometric_shifts, geometric, 3.0, 1.5) == pytest.approx(3.0)
        assert shift_delta_derivative(qz_shifts, qz, 2.0, 4.0, MINUS) == pytest.approx(0.5)


class TestVerification:

    def test_q_scale_is_periodic(self, qz_shifts, qz):
        samples = qz.sample_points(qz.t_min, qz.t_max, 50, interior=False)
        assert verify_periodicity(qz_shifts, qz, mode='scale', samples=samples).passed

    def test_hybrid_is_periodic(self, geometric_shifts, geometric):
        samples = geometric.sample_points(1.0, 162.0, 80, interior=False)
        report = verify_periodicity(geometric_shifts, geometric, mode='scale', samples=samples)
        assert report.passed
        assert report.checked > 0

    def test_gap_scale_is_not_periodic(self):
        ts = TimeScaleWindow.from_cells([[-8, 0], [1, 8]])
        samples = ts.sample_points(-8.0, 8.0, 200, interior=False)
        report = verify_periodicity(additive_shifts(2.0), ts, mode='scale', samples=samples)
        assert not report.passed
        assert any(v.check == 'delta+(T,t) in scale' for v in report.violations)

    def test_axioms(self, qz_shifts, qz):
        points = qz.sample_points(1.0, 4096.0, 20, interior=False)
        pairs = [(2.0, 4.0), (8.0, 16.0)]
        report = verify_periodicity(qz_shifts, qz, mode='axioms', samples=points + pairs)
        assert report.passed, report.violations

    def test_axioms_catch_broken_inverse(self, qz):
        sys = custom_shifts(2.0, 1.0, 't*s', 't/s + 1')
        points = qz.sample_points(1.0, 64.0, 10, interior=False)
        assert not verify_periodicity(sys, qz, mode='axioms', samples=points).passed

    def test_delta_periodic_function(self, qz_shifts, qz):
        samples = qz.sample_points(1.0, 4096.0, 20, interior=False)
        report = verify_periodicity(qz_shifts, qz, lambda t: 1.0 / t, mode='delta_function',
                                    samples=samples)
        assert report.passed
        report = verify_periodicity(qz_shifts, qz, lambda t: t, mode='delta_function',
                                    samples=samples)
        assert not report.passed

    def test_periodic_function(self, qz_shifts, qz):
        samples = qz.sample_points(1.0, 4096.0, 20, interior=False)
        assert verify_periodicity(qz_shifts, qz, lambda t: 7.0, mode='function',
                                  samples=samples).passed

    def test_function_mode_needs_function(self, qz_shifts, qz):
        with pytest.raises(ConfigError):
            verify_periodicity(qz_shifts, qz, mode='function', samples=[1.0])

    def test_unknown_mode(self, qz_shifts, qz):
        with pytest.raises(ConfigError):
            verify_periodicity(qz_shifts, qz, mode='bogus')

    def test_periodic_integral_gap(self, qz_shifts, qz):
        assert periodic_integral_gap(lambda t: 1.0 / t, qz_shifts, qz, 8.0) == pytest.approx(0.0, abs=1e-12)


BUILTIN_PAIRS = {
    'real-additive': (lambda: real_window(0.0, 1000.0), lambda: additive_shifts(1.5)),
    'integer-additive': (lambda: integer_window(-500, 500), lambda: additive_shifts(3.0)),
    'q_scale-multiplicative': (lambda: q_scale_window(2.0, 2.0 ** -500, 2.0 ** 500),
                               lambda: multiplicative_shifts(2.0)),
    'geometric_union-multiplicative': (lambda: geometric_union_window(3.0, 2.0, 0, 6),
                                       lambda: multiplicative_shifts(3.0)),
    'sqrt_naturals-sqrt': (lambda: sqrt_naturals_window(0, 1000), lambda: sqrt_shifts(1.0)),
    'signed_squares': (lambda: signed_squares_window(500), lambda: signed_squares_shifts(1.0)),
    'logistic': (lambda: logistic_window(2.0 ** 0.05, -500, 500),
                 lambda: logistic_shifts(2.0 ** 0.05 / (1 + 2.0 ** 0.05))),
}


class TestBuiltinPairs:

    @pytest.fixture(params=sorted(BUILTIN_PAIRS))
    def pair(self, request):
        make_window, make_shifts = BUILTIN_PAIRS[request.param]
        ts = make_window()
        samples = ts.sample_points(ts.t_min, ts.t_max, 1000, interior=False)
        return ts, make_shifts(), samples

    def test_enough_samples(self, pair):
        _, _, samples = pair
        assert len(samples) >= 900

    def test_scale_is_periodic(self, pair):
        ts, sys, samples = pair
        report = verify_periodicity(sys, ts, mode='scale', samples=samples)
        assert report.passed, report.violations[:5]
        assert report.checked > len(samples) // 2

    def test_axioms_hold(self, pair):
        ts, sys, samples = pair
        report = verify_periodicity(sys, ts, mode='axioms', samples=samples)
        assert report.passed, report.violations[:5]
        assert report.checked > 0

    def test_constant_is_periodic(self, pair):
        ts, sys, samples = pair
        assert verify_periodicity(sys, ts, lambda t: 2.5, mode='function', samples=samples).passed
