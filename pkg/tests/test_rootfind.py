import math

import numpy as np
import pytest

from foldtrace.errors import NoConvergence, SingularJacobian, SingularMatrix
from foldtrace.geometry import cbrt
from foldtrace.rootfind import (
    ScalarSolveConfig,
    VectorSolveConfig,
    dense_solve,
    fd_jacobian,
    solve_scalar,
    solve_vector,
)


class TestSolveScalar:
    def test_known_quadratic_root(self):
        root = solve_scalar(lambda x: x * x - 4.0, 3.0)
        assert abs(root - 2.0) < 1e-9

    def test_no_real_root_raises(self):
        with pytest.raises(NoConvergence) as info:
            solve_scalar(lambda x: x * x + 1.0, 1.0)
        assert info.value.last_iterate is not None
        assert info.value.residual is not None

    def test_astroid_slice_closed_form(self):
        # f(0.5, y) = 0 rearranges to y = (1 - 0.5^(2/3))^(3/2)
        expected = (1.0 - 0.5 ** (2.0 / 3.0)) ** 1.5
        root = solve_scalar(lambda y: 0.5 ** (2.0 / 3.0) + abs(y) ** (2.0 / 3.0) - 1.0, 0.6)
        assert abs(root - expected) < 1e-9

    def test_cusp_tangential_root(self):
        # |y|^(2/3) has a root at zero with unbounded derivative; the
        # relative finite-difference step is what makes this converge.
        cfg = ScalarSolveConfig(tol=1e-10, max_iter=60)
        root = solve_scalar(lambda y: cbrt(y) ** 2, 5.46e-4, cfg)
        assert abs(root) < 1e-14

    def test_cancellation_prone_residual(self):
        # x^2 + 1 - 1 quantizes to identical doubles under a tiny fd step
        root = solve_scalar(lambda x: x * x + 1.0 - 1.0, 0.31225)
        assert abs(root) <= 1e-5

    def test_bracket_confines_root(self):
        with pytest.raises(NoConvergence):
            solve_scalar(lambda x: x - 10.0, 0.0, bracket=(-1.0, 1.0))

    def test_bisection_rescue_on_sign_change(self):
        # steep kink defeats Newton; endpoint probing finds the bracket
        def g(x):
            return math.copysign(abs(x - 0.3) ** 0.2, x - 0.3)

        root = solve_scalar(g, 0.0, ScalarSolveConfig(tol=1e-6, max_iter=50), bracket=(-1.0, 1.0))
        assert abs(root - 0.3) < 1e-6

    def test_analytic_derivative_used(self):
        calls = {"n": 0}

        def dg(x):
            calls["n"] += 1
            return 2.0 * x

        root = solve_scalar(lambda x: x * x - 9.0, 5.0, dg=dg)
        assert abs(root - 3.0) < 1e-9
        assert calls["n"] > 0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ScalarSolveConfig(tol=-1.0)
        with pytest.raises(ValueError):
            ScalarSolveConfig(max_iter=0)


class TestDenseSolve:
    def test_identity(self):
        b = np.array([3.0, -1.0, 2.5])
        x = dense_solve(np.eye(3), b)
        assert np.array_equal(x, b)

    def test_diagonal(self):
        x = dense_solve(np.array([[2.0, 0.0], [0.0, 4.0]]), np.array([2.0, 4.0]))
        assert np.allclose(x, [1.0, 1.0], atol=1e-14)

    def test_recovers_known_solution_50x50(self):
        rng = np.random.default_rng(7)
        A = np.eye(50) + 0.1 * rng.standard_normal((50, 50))
        x_true = rng.standard_normal(50)
        x = dense_solve(A, A @ x_true)
        assert np.max(np.abs(x - x_true)) < 1e-9

    def test_residual_bound(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            A = np.eye(20) + 0.2 * rng.standard_normal((20, 20))
            b = rng.standard_normal(20)
            x = dense_solve(A, b)
            norm_a = np.max(np.sum(np.abs(A), axis=1))
            bound = 1e-10 * (norm_a * np.max(np.abs(x)) + np.max(np.abs(b)))
            assert np.max(np.abs(A @ x - b)) <= bound

    def test_singular_matrix(self):
        with pytest.raises(SingularMatrix):
            dense_solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 1.0]))

    def test_shape_checks(self):
        with pytest.raises(ValueError):
            dense_solve(np.ones((2, 3)), np.ones(2))
        with pytest.raises(ValueError):
            dense_solve(np.full((2, 2), np.nan), np.ones(2))


class TestSolveVector:
    def test_circle_line_intersection(self):
        def F(v):
            x, y = v
            return np.array([x * x + y * y - 1.0, x - y])

        x = solve_vector(F, np.array([1.0, 0.0]))
        assert np.allclose(x, [math.sqrt(0.5), math.sqrt(0.5)], atol=1e-10)

    def test_linear_system_one_iteration(self):
        rng = np.random.default_rng(3)
        A = np.eye(4) + 0.3 * rng.standard_normal((4, 4))
        b = rng.standard_normal(4)
        iterations = []
        x = solve_vector(lambda v: A @ v - b, np.zeros(4), jac=lambda _v: A,
                         callback=lambda k, _x, _f: iterations.append(k))
        assert np.max(np.abs(A @ x - b)) < 1e-11
        assert iterations[-1] == 1  # Newton is exact on affine residuals

    def test_returned_iterate_satisfies_tolerance(self):
        cfg = VectorSolveConfig(tol=1e-12)

        def F(v):
            return np.array([math.exp(v[0]) - 2.0, v[1] ** 3 - 8.0])

        x = solve_vector(F, np.array([0.0, 1.5]), cfg)
        assert np.max(np.abs(F(x))) <= cfg.tol

    def test_no_convergence_carries_diagnostics(self):
        cfg = VectorSolveConfig(tol=1e-14, max_iter=3)
        with pytest.raises(NoConvergence) as info:
            solve_vector(lambda v: np.array([math.cos(v[0]) + 2.0]), np.array([0.5]), cfg)
        assert info.value.last_iterate is not None

    def test_singular_jacobian(self):
        def F(v):
            return np.array([v[0] + v[1], v[0] + v[1]])

        with pytest.raises(SingularJacobian):
            solve_vector(F, np.array([1.0, 2.0]))

    def test_fd_jacobian_matches_analytic(self):
        rng = np.random.default_rng(5)

        def F(v):
            return np.array([v[0] ** 2 + v[1], math.sin(v[0]) + v[1] ** 3])

        for _ in range(5):
            v = rng.uniform(0.5, 1.5, size=2)
            J_true = np.array([
                [2.0 * v[0], 1.0],
                [math.cos(v[0]), 3.0 * v[1] ** 2],
            ])
            J_fd = fd_jacobian(F, v)
            assert np.max(np.abs(J_fd - J_true)) < 1e-6
