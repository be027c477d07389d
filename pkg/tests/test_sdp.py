"""Tests for the conic-program wrapper."""
from __future__ import annotations

import cvxpy as cp
import numpy as np
import pytest

from corrcap import sdp
from corrcap.errors import SolverFailure


def eigenvalue_pair(matrix: np.ndarray) -> sdp.ConicProgram:
    """Largest-eigenvalue program with its hand-built dual.

    Primal: max tr(rho M) over unit-trace PSD rho. Dual: min y such that
    y I - M is PSD. Both optima equal the top eigenvalue of M.
    """
    dim = matrix.shape[0]
    mat = cp.Parameter((dim, dim), hermitian=True, name="mat")
    mat.value = matrix

    y = cp.Variable(name="y")
    dual = sdp.ConicProgram(
        name="eigenvalue-dual",
        problem=cp.Problem(
            cp.Minimize(y), [y * np.eye(dim) - mat >> 0]
        ),
        variables={"y": y},
        parameters={"mat": mat},
    )

    rho = cp.Variable((dim, dim), hermitian=True, name="rho")
    problem = cp.Problem(
        cp.Maximize(cp.real(cp.trace(rho @ mat))),
        [rho >> 0, cp.trace(rho) == 1],
    )
    return sdp.ConicProgram(
        name="eigenvalue",
        problem=problem,
        variables={"rho": rho},
        parameters={"mat": mat},
        dual=dual,
    )


def test_eigenvalue_program_real():
    program = eigenvalue_pair(np.diag([1.0, 3.0, 2.0]).astype(complex))
    solution = sdp.solve(program)
    assert solution.status == "optimal"
    assert abs(solution.value - 3.0) < 1e-7
    assert solution.dual_value is not None
    assert abs(solution.dual_value - 3.0) < 1e-6
    assert solution.gap is not None and solution.gap < 1e-6
    assert solution.iterations is not None and solution.iterations >= 1
    rho = solution.variables["rho"]
    assert abs(np.trace(rho) - 1.0) < 1e-7
    assert abs(rho[1, 1] - 1.0) < 1e-5


def test_eigenvalue_program_complex():
    matrix = np.array([[1.0, 1.0j], [-1.0j, 1.0]], dtype=complex)
    solution = sdp.solve(eigenvalue_pair(matrix))
    assert solution.status == "optimal"
    assert abs(solution.value - 2.0) < 1e-7


def test_parameter_reuse():
    program = eigenvalue_pair(np.diag([1.0, 3.0, 2.0]).astype(complex))
    first = sdp.solve(program)
    program.parameters["mat"].value = np.diag([5.0, 0.0, 0.0]).astype(complex)
    second = sdp.solve(program)
    assert abs(first.value - 3.0) < 1e-6
    assert abs(second.value - 5.0) < 1e-6
    assert second.gap is not None and second.gap < 1e-6


def test_covering_program():
    target = np.diag([1.0, 0.0]).astype(complex)
    x = cp.Variable((2, 2), hermitian=True, name="x")
    primal = cp.Problem(
        cp.Minimize(cp.real(cp.trace(x))), [x >> 0, x - target >> 0]
    )
    z = cp.Variable((2, 2), hermitian=True, name="z")
    dual = cp.Problem(
        cp.Maximize(cp.real(cp.trace(z @ target))),
        [z >> 0, np.eye(2) - z >> 0],
    )
    program = sdp.ConicProgram(
        name="covering",
        problem=primal,
        variables={"x": x},
        parameters={},
        dual=sdp.ConicProgram(
            name="covering-dual", problem=dual, variables={"z": z}, parameters={}
        ),
    )
    solution = sdp.solve(program)
    assert solution.status == "optimal"
    assert abs(solution.value - 1.0) < 1e-7
    assert solution.gap is not None and solution.gap < 1e-6


def test_no_dual_means_no_gap():
    x = cp.Variable(name="x")
    program = sdp.ConicProgram(
        name="plain",
        problem=cp.Problem(cp.Minimize(cp.square(x - 2.0))),
        variables={"x": x},
        parameters={},
    )
    solution = sdp.solve(program)
    assert solution.status == "optimal"
    assert solution.gap is None
    assert solution.dual_value is None
    assert abs(solution.variables["x"] - 2.0) < 1e-5


def test_infeasible_status():
    rho = cp.Variable((2, 2), hermitian=True, name="rho")
    program = sdp.ConicProgram(
        name="bad",
        problem=cp.Problem(
            cp.Minimize(cp.real(cp.trace(rho))),
            [rho >> 0, cp.trace(rho) == -1.0],
        ),
        variables={"rho": rho},
        parameters={},
    )
    solution = sdp.solve(program)
    assert solution.status == "infeasible"
    assert solution.variables == {}


def test_unbounded_status():
    x = cp.Variable(name="x")
    program = sdp.ConicProgram(
        name="unbounded",
        problem=cp.Problem(cp.Minimize(x)),
        variables={"x": x},
        parameters={},
    )
    solution = sdp.solve(program)
    assert solution.status == "unbounded"


def test_violation_downgrades_status():
    x = cp.Variable(name="x")
    program = sdp.ConicProgram(
        name="checked",
        problem=cp.Problem(cp.Minimize(cp.square(x))),
        variables={"x": x},
        parameters={},
        violation=lambda variables: 1.0,
    )
    solution = sdp.solve(program)
    assert solution.status == "inaccurate"
    assert solution.max_violation == 1.0


def test_gap_downgrades_status():
    x = cp.Variable(name="x")
    y = cp.Variable(name="y")
    wrong_dual = sdp.ConicProgram(
        name="wrong-dual",
        problem=cp.Problem(cp.Maximize(0.0 * y + 2.9), [y >= 0]),
        variables={"y": y},
        parameters={},
    )
    program = sdp.ConicProgram(
        name="gapped",
        problem=cp.Problem(cp.Minimize(cp.square(x) + 3.0)),
        variables={"x": x},
        parameters={},
        dual=wrong_dual,
    )
    solution = sdp.solve(program)
    assert solution.status == "inaccurate"
    assert solution.gap is not None and abs(solution.gap - 0.1) < 1e-4


def test_solver_failure_is_runtime_error():
    assert issubclass(SolverFailure, RuntimeError)
