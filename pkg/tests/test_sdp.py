import numpy as np
import pytest

from conicstab.certify import build_containment_system
from conicstab.errors import DimensionError
from conicstab.linalg import min_eigenvalue
from conicstab.model import MatrixPencil, lorentz_pencil, psd_pencil
from conicstab.sdp import (FEASIBLE, INFEASIBLE, SdpProblem, SolverOptions, feasibility,
                           find_interior_direction, lmi_maximize, solve, verify_ray)

from conftest import random_psd


def scalar_problem(rhs):
    return SdpProblem(A=np.ones((1, 1, 1)), b=np.array([rhs]))


def test_scalar_feasible():
    sol = solve(scalar_problem(1.0))
    assert sol.status == FEASIBLE
    assert np.isclose(sol.X[0, 0], 1.0)


def test_scalar_infeasible_carries_ray():
    sol = solve(scalar_problem(-1.0))
    assert sol.status == INFEASIBLE
    ray = sol.ray
    assert ray is not None and ray.tau > 0 and ray.b_dot_y < 0
    tau, bdy = verify_ray(scalar_problem(-1.0), ray.y)
    assert tau > 0 and bdy < 0


def test_empty_interior_is_feasible_not_strict():
    sol = feasibility(scalar_problem(0.0))
    assert sol.status == FEASIBLE
    assert abs(sol.margin) <= 1e-7


def test_problem_validation():
    with pytest.raises(DimensionError):
        SdpProblem(A=np.zeros((0, 2, 2)), b=np.zeros(0))


def test_lmi_maximize_simple():
    # maximize y subject to 1 - y >= 0 and 2 + y >= 0
    F0 = np.diag([1.0, 2.0])
    F1 = np.diag([-1.0, 1.0])
    res = lmi_maximize(np.array([1.0]), F0, np.array([F1]))
    assert np.isclose(res.objective, 1.0, atol=1e-7)


def test_unique_choi_matrix_for_psd_identity():
    K = psd_pencil(2)
    sol = feasibility(build_containment_system(K, K.pencil.coeffs, 1))
    expected = np.array([[1.0, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]])
    assert sol.status == FEASIBLE
    assert np.max(np.abs(sol.X - expected)) <= 1e-6


def test_g_system_feasible_with_trace_cap():
    K = psd_pencil(2)
    A = np.array([[[4.0, 1], [1, 8]], [[0, 4], [4, 0]], [[2, 0], [0, 4]]])
    prob = build_containment_system(K, A, 1)
    sol = feasibility(prob, trace_cap=100)
    assert sol.status == FEASIBLE and sol.margin > 0
    C = np.array([[4.0, 1, 0, 2], [1, 8, 2, 0], [0, 2, 2, 0], [2, 0, 0, 4]])
    assert np.max(np.abs(prob.residual(C, None))) <= 1e-12


def test_lorentz_pair_infeasible_both_signs():
    L = lorentz_pencil(3)
    target = np.array([[[1.0, 0], [0, -1]], [[0, 1], [1, 0]], [[1, 0], [0, 1]]])
    for sigma in (1, -1):
        prob = build_containment_system(L, target, sigma)
        sol = feasibility(prob)
        assert sol.status == INFEASIBLE
        tau, bdy = verify_ray(prob, sol.ray.y)
        assert tau > 0 and bdy < 0


def test_feasible_solutions_reverify(rng):
    for _ in range(10):
        X0 = random_psd(rng, 4)
        A = rng.standard_normal((5, 4, 4))
        A = A + A.transpose(0, 2, 1)
        b = np.einsum("kij,ij->k", A, X0)
        prob = SdpProblem(A=A, b=b)
        sol = feasibility(prob)
        assert sol.status == FEASIBLE
        assert min_eigenvalue(sol.X) >= -1e-8
        assert np.max(np.abs(prob.residual(sol.X, None))) <= 1e-8 * (1 + np.abs(b).max())


def test_deterministic():
    K = psd_pencil(2)
    prob = build_containment_system(K, K.pencil.coeffs, 1)
    a, b = feasibility(prob), feasibility(prob)
    assert np.array_equal(a.X, b.X) and a.iterations == b.iterations


def test_find_interior_direction():
    e, margin = find_interior_direction(psd_pencil(2).pencil.coeffs)
    assert np.allclose(e, [1, 0, 1], atol=1e-6) and np.isclose(margin, 1, atol=1e-6)
    A = np.array([[[4.0, 1], [1, 8]], [[0, 4], [4, 0]], [[2, 0], [0, 4]]])
    e, margin = find_interior_direction(A)
    assert margin > 0 and min_eigenvalue(np.tensordot(e, A, axes=1)) > 0
    assert np.isclose(min_eigenvalue(A[2]), 2)
    e, margin = find_interior_direction(np.array([np.diag([1.0, -1.0])]))
    assert margin <= 1e-7


def test_find_interior_direction_hermitian():
    A = np.array([[[2.0, 1j], [-1j, 2.0]], [[1.0, 0], [0, -1.0]]])
    e, margin = find_interior_direction(A)
    assert margin > 1e-7
    assert min_eigenvalue(np.tensordot(e, A, axes=1)) > 0


def test_options_iteration_cap():
    K = psd_pencil(2)
    sol = feasibility(build_containment_system(K, K.pencil.coeffs, 1), options=SolverOptions(max_iter=1))
    assert sol.iterations <= 1
