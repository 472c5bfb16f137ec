import cmath
import math

import numpy as np
import pytest

from shift_floquet.errors import DegenerateMultiplier, ResonantSystem, WindowEdge
from shift_floquet.floquet import (
    bloch_exp,
    bloch_solution,
    change_of_variables_residual,
    decompose,
    decomposition_residuals,
    exponent_from_multiplier,
    floquet_R,
    homogeneous_periodic_solution,
    monodromy,
    monodromy_from_fundamental,
    nonhomogeneous_periodic_state,
    periodic_state_residual,
)
from shift_floquet.hilger import constant_exp
from shift_floquet.shifts import PLUS, additive_shifts, multiplicative_shifts, shift
from shift_floquet.stability import eigenvalue_paths
from shift_floquet.timescale import real_window
from shift_floquet.transition import MatrixFunction


@pytest.fixture
def qz_decomposition(qz, qz_shifts, inverse_t):
    return decompose(inverse_t, qz, qz_shifts)


@pytest.fixture
def cosine_decomposition(reals):
    A = MatrixFunction.builtin('cosine_log', 2, {'q': 2.0})
    return decompose(A, reals, multiplicative_shifts(4.0))


@pytest.fixture
def coupled_hybrid(geometric, geometric_shifts):
    A = MatrixFunction.from_expressions([['1/t', '0.2/t'], ['-0.1/t', '0.5/t']])
    return decompose(A, geometric, geometric_shifts)


class TestMonodromy:

    def test_q_scale(self, qz, qz_shifts, inverse_t):
        M, multipliers = monodromy(inverse_t, qz, qz_shifts)
        np.testing.assert_allclose(M, 2.0 * np.eye(2))
        np.testing.assert_allclose(multipliers, [2.0, 2.0])

    def test_hybrid(self, geometric, geometric_shifts, inverse_t):
        M, _ = monodromy(inverse_t, geometric, geometric_shifts)
        np.testing.assert_allclose(M, 3.0 * np.eye(2), rtol=1e-6)

    def test_from_fundamental_matrix(self, qz, qz_shifts, inverse_t):
        psi0 = np.array([[2.0, 1.0], [0.0, 1.0]])
        M = monodromy_from_fundamental(inverse_t, qz, qz_shifts, psi0)
        np.testing.assert_allclose(M, 2.0 * np.eye(2), atol=1e-12)


class TestDecomposition:

    def test_q_scale_factors(self, qz_decomposition):
        for t in [1.0, 2.0, 4.0, 8.0]:
            np.testing.assert_allclose(qz_decomposition.R(t), np.eye(2) / t, atol=1e-12)
            np.testing.assert_allclose(qz_decomposition.L(t), np.eye(2), atol=1e-12)

    def test_q_scale_exponential(self, qz_decomposition):
        np.testing.assert_allclose(qz_decomposition.e_R(8.0), 8.0 * np.eye(2), atol=1e-12)
        np.testing.assert_allclose(qz_decomposition.e_R(qz_decomposition.t1),
                                   qz_decomposition.monodromy, atol=1e-12)

    def test_hybrid_factors(self, geometric, geometric_shifts, inverse_t):
        dec = decompose(inverse_t, geometric, geometric_shifts)
        np.testing.assert_allclose(dec.e_R(4.0), 3.0 ** 1.25 * np.eye(2), rtol=1e-6)
        np.testing.assert_allclose(dec.R(math.sqrt(3.0)), math.log(3.0) / 3.0 * np.eye(2),
                                   rtol=1e-6)
        # Theta climbs by T/2 across the jump 2 -> 3
        np.testing.assert_allclose(dec.R(2.0), (math.sqrt(3.0) - 1.0) * np.eye(2), rtol=1e-6)

    def test_R_at_window_max(self, qz, qz_decomposition):
        with pytest.raises(WindowEdge):
            floquet_R(qz_decomposition, qz, 4096.0)

    def test_residuals(self, qz_decomposition):
        residuals = decomposition_residuals(qz_decomposition)
        assert residuals['max_phi_minus_L_eR'] < 1e-8
        assert residuals['max_L_periodicity'] < 1e-8
        assert residuals['monodromy_gap'] < 1e-10

    def test_hybrid_residuals(self, geometric, geometric_shifts, inverse_t):
        dec = decompose(inverse_t, geometric, geometric_shifts)
        residuals = decomposition_residuals(dec, [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 10.0])
        assert residuals['max_phi_minus_L_eR'] < 1e-6
        assert residuals['max_L_periodicity'] < 1e-6

    def test_change_of_variables(self, qz_decomposition):
        assert change_of_variables_residual(qz_decomposition, [1.0, 2.0]) < 1e-10

    def test_cosine_monodromy_is_identity(self, cosine_decomposition):
        np.testing.assert_allclose(cosine_decomposition.monodromy, np.eye(2), atol=1e-8)

    def test_cosine_L_equals_phi(self, cosine_decomposition):
        samples = cosine_decomposition.ts.sample_points(1.0, 256.0, 20)
        assert len(samples) == 20
        for t in samples:
            np.testing.assert_allclose(cosine_decomposition.L(t), cosine_decomposition.phi(t),
                                       atol=1e-8)


class TestExponents:

    def test_q_scale(self, qz, qz_shifts):
        assert exponent_from_multiplier(2.0, qz_shifts, qz).base == pytest.approx(1.0)

    def test_real_line(self, reals):
        gamma = exponent_from_multiplier(math.e, multiplicative_shifts(4.0), reals)
        assert gamma.base == pytest.approx(1.0 / 3.0)

    def test_hybrid(self, geometric, geometric_shifts):
        gamma = exponent_from_multiplier(3.0, geometric_shifts, geometric)
        assert constant_exp(gamma.base, geometric, 3.0, 1.0) == pytest.approx(3.0, rel=1e-9)
        assert gamma.exp(geometric, 3.0, 1.0) == pytest.approx(3.0, rel=1e-9)

    def test_negative_multiplier(self, qz, qz_shifts):
        gamma = exponent_from_multiplier(-1.0, qz_shifts, qz)
        assert gamma.base == pytest.approx(-2.0)
        assert gamma.exp(qz, 2.0, 1.0) == pytest.approx(-1.0)

    def test_zero_multiplier(self, qz, qz_shifts):
        with pytest.raises(DegenerateMultiplier):
            exponent_from_multiplier(0.0, qz_shifts, qz)

    def test_branch_leaves_strip(self, qz, qz_shifts):
        gamma = exponent_from_multiplier(2.0, qz_shifts, qz, k=1)
        assert gamma.omega == pytest.approx(2 * math.pi)
        assert gamma.strip_violations(qz, 1.0, 2.0) == [1.0]

    def test_complex_multiplier(self, reals):
        lam = cmath.exp(0.3 + 0.4j)
        gamma = exponent_from_multiplier(lam, multiplicative_shifts(4.0), reals)
        assert gamma.exp(reals, 4.0, 1.0) == pytest.approx(lam, rel=1e-9)


class TestPeriodicSolutions:

    def test_none_without_unit_multiplier(self, qz_decomposition):
        assert not homogeneous_periodic_solution(qz_decomposition).exists

    def test_cosine_has_one(self, cosine_decomposition):
        solution = homogeneous_periodic_solution(cosine_decomposition)
        assert solution.exists
        assert solution.residual < 1e-6

    def test_forced_state(self, qz, qz_shifts, inverse_t):
        F = MatrixFunction.from_expressions(['1/t', '1/t'])
        x0 = nonhomogeneous_periodic_state(inverse_t, F, qz, qz_shifts)
        np.testing.assert_allclose(x0, [-1.0, -1.0], atol=1e-10)
        assert periodic_state_residual(inverse_t, F, qz, qz_shifts, x0) < 1e-10

    def test_resonant(self, qz, qz_shifts):
        zero = MatrixFunction.builtin('zero', 2)
        F = MatrixFunction.from_expressions(['1', '0'])
        with pytest.raises(ResonantSystem):
            nonhomogeneous_periodic_state(zero, F, qz, qz_shifts)


class TestBlochSolutions:

    def test_multiplier_ratio(self, qz, qz_shifts, qz_decomposition):
        for t in [4.0, 8.0]:
            later = shift(qz_shifts, PLUS, 2.0, t)
            x_t = bloch_solution(qz_decomposition, 2.0, qz, t)
            x_later = bloch_solution(qz_decomposition, 2.0, qz, later)
            np.testing.assert_allclose(x_later, 2.0 * x_t, atol=1e-12)

    def test_solves_the_system(self, qz, qz_decomposition):
        u = np.array([1.0, 0.0])
        x1 = bloch_solution(qz_decomposition, 2.0, qz, 1.0, u)
        x8 = bloch_solution(qz_decomposition, 2.0, qz, 8.0, u)
        np.testing.assert_allclose(x8, qz_decomposition.phi(8.0) @ x1, atol=1e-12)


class TestRandomDiagonalSystems:

    def test_decomposition_holds(self, rng, qz, qz_shifts):
        for _ in range(20):
            c = rng.uniform(-0.5, 2.0, size=2)
            A = MatrixFunction.from_expressions([['a/t', '0'], ['0', 'b/t']],
                                                {'a': c[0], 'b': c[1]})
            dec = decompose(A, qz, qz_shifts)
            samples = [1.0, 2.0, 4.0, 8.0, 16.0]
            residuals = decomposition_residuals(dec, samples)
            assert residuals['max_phi_minus_L_eR'] < 1e-8
            assert residuals['max_L_periodicity'] < 1e-8
            np.testing.assert_allclose(np.sort(dec.multipliers.real), np.sort(1.0 + c), atol=1e-7)
            for lam in dec.spectral.eigenvalues:
                for k in range(-2, 3):
                    gamma = exponent_from_multiplier(lam, qz_shifts, qz, k=k)
                    assert abs(gamma.exp(qz, 2.0, 1.0) - lam) < 1e-9
                for t in [2.0, 8.0]:
                    x_t = bloch_solution(dec, lam, qz, t)
                    x_later = bloch_solution(dec, lam, qz, 2.0 * t)
                    assert np.linalg.norm(x_later - lam * x_t) < 1e-8


def _sorted(values):
    return np.array(sorted(np.asarray(values, dtype=complex), key=lambda z: (z.real, z.imag)))


class TestMonodromyUniqueness:

    def test_any_fundamental_matrix(self, rng, geometric, geometric_shifts, coupled_hybrid):
        for _ in range(20):
            Q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
            psi0 = Q @ np.diag(rng.uniform(1.0, 2.0, size=2))
            M = monodromy_from_fundamental(coupled_hybrid.A, geometric, geometric_shifts, psi0)
            np.testing.assert_allclose(M, coupled_hybrid.monodromy, rtol=1e-7, atol=1e-9)


class TestSpectralMapping:

    @pytest.mark.parametrize('name', ['qz_decomposition', 'coupled_hybrid', 'cosine_decomposition'])
    def test_eigenvalues_of_e_R(self, request, name):
        dec = request.getfixturevalue(name)
        spectral = dec.spectral
        for t in dec.ts.sample_points(dec.t0, dec.ts.t_max, 20):
            paths = np.repeat([bloch_exp(dec, i, t) for i in range(len(spectral.eigenvalues))],
                              spectral.multiplicities)
            np.testing.assert_allclose(_sorted(np.linalg.eigvals(dec.e_R(t))), _sorted(paths),
                                       atol=1e-7)

    def test_constant_exponents_reach_the_multipliers(self, coupled_hybrid):
        dec = coupled_hybrid
        for gamma in dec.exponents:
            assert abs(gamma.exp(dec.ts, dec.t1, dec.t0) - gamma.multiplier) < 1e-9

    @pytest.mark.parametrize('name', ['qz_decomposition', 'coupled_hybrid'])
    def test_eigenvalues_of_R(self, request, name):
        dec = request.getfixturevalue(name)
        for t in dec.ts.sample_points(dec.t0, dec.ts.t_max, 20):
            np.testing.assert_allclose(_sorted(np.linalg.eigvals(dec.R(t))),
                                       _sorted(eigenvalue_paths(dec, dec.ts, t)), atol=1e-7)


class TestBlochIndependence:

    def test_full_rank(self, coupled_hybrid):
        dec = coupled_hybrid
        assert len(dec.spectral.eigenvalues) == 2
        for t in [1.0, 1.5, 3.0, 9.0, 27.0]:
            X = np.column_stack([bloch_solution(dec, lam, dec.ts, t) for lam in dec.spectral.eigenvalues])
            assert np.linalg.matrix_rank(X) == 2


class TestNearlyDegenerateMultipliers:
    """Distinct multipliers 5e-5 apart keep their own clusters."""

    @pytest.fixture
    def dec(self):
        A = MatrixFunction.constant(np.diag([0.0, math.log(1.0 - 5e-5)]))
        return decompose(A, real_window(0.0, 16.0), additive_shifts(1.0))

    def test_multipliers_stay_apart(self, dec):
        assert dec.spectral.multiplicities == (1, 1)
        np.testing.assert_allclose(_sorted(dec.spectral.eigenvalues), [1.0 - 5e-5, 1.0], rtol=1e-9)

    def test_unit_multiplier_gives_a_periodic_solution(self, dec):
        solution = homogeneous_periodic_solution(dec)
        assert solution.exists
        assert solution.residual < 1e-8

    def test_powers(self, dec):
        np.testing.assert_allclose(dec.e_R(10.0), np.diag([1.0, (1.0 - 5e-5) ** 10]), atol=1e-9)
