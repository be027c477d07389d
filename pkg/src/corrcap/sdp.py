"""Thin conic-solver wrapper with explicit dual certification.

Rather than trusting solver-reported dual variables (whose scaling and
conjugation conventions vary across solvers and cone embeddings), each
program may carry an explicitly modeled dual program over the same
parameters. The reported duality gap is then the difference of two
independently solved objective values. A result is certified only when
both sides report optimality, both variable snapshots pass their
independent feasibility checks, and the gap closes below tolerance.
A failed certification triggers a repair pass: solvers not yet
consulted get a second opinion on the dual (a solver occasionally
labels a degenerate solution optimal while its objective is several
digits short, and only the explicit gap can expose that), and the
primal is re-solved only when two solvers corroborate the dual value
while the primal stands apart. If no attempted pair certifies, the
best available pair is returned with the status downgraded to
``"inaccurate"`` instead of silently reporting an uncertified number.

Each problem object is reserved for a single solver backend. Solving a
cvxpy problem with a second backend discards the first backend's cached
reduction, and a rebuilt reduction produces problem data a few parts in
``1e10`` away from the parameter-update path, so values would otherwise
depend on which solvers happened to touch the problem earlier. Programs
that provide a ``clone_factory`` get an independent clone per non-primary
solver instead; programs without one accept the small history dependence.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import cvxpy as cp
import numpy as np

from .constants import FEASIBILITY_TOL, GAP_TOL
from .errors import SolverFailure

_STATUS_MAP = {
    cp.OPTIMAL: "optimal",
    cp.OPTIMAL_INACCURATE: "inaccurate",
    cp.INFEASIBLE: "infeasible",
    cp.INFEASIBLE_INACCURATE: "inaccurate",
    cp.UNBOUNDED: "unbounded",
    cp.UNBOUNDED_INACCURATE: "inaccurate",
}


@dataclass
class ConicProgram:
    """A cvxpy problem with named variables, parameters, and optional dual.

    ``parameters`` are shared between a primal and its dual so a single
    assignment drives both solves. ``violation`` may hold an independent
    feasibility check evaluated on the extracted variable values; it returns
    the largest constraint residual.
    """

    name: str
    problem: cp.Problem
    variables: dict[str, cp.Variable]
    parameters: dict[str, cp.Parameter]
    dual: "ConicProgram | None" = None
    violation: Callable[[dict[str, np.ndarray]], float] | None = field(default=None)
    # per-solver keyword arguments, keyed by cvxpy solver name; the set used
    # for a solver's first solve of a problem sticks for its re-solves, so
    # there is exactly one set per solver, not one per occasion
    solver_options: dict[str, dict] = field(default_factory=dict)
    # builds an independent copy of this program (same structure, own
    # parameter objects) dedicated to the named solver; see module docstring
    clone_factory: Callable[[str], "ConicProgram"] | None = None
    clones: dict[str, "ConicProgram"] = field(default_factory=dict)


@dataclass(frozen=True)
class SdpSolution:
    """Outcome of one certified solve."""

    value: float
    variables: dict
    status: str
    gap: float | None = None
    dual_value: float | None = None
    iterations: int | None = None
    max_violation: float | None = None
    solver: str | None = None
    dual_variables: dict | None = None
    dual_solver: str | None = None


DEFAULT_SOLVERS = (cp.CLARABEL, cp.SCS)


def _run(problem: cp.Problem, solver: str, name: str, options: dict) -> str:
    try:
        with warnings.catch_warnings():
            # An inaccurate status is handled by the repair pass and the
            # downgrade logic in solve(); cvxpy's warning is redundant here.
            warnings.filterwarnings(
                "ignore", message="Solution may be inaccurate"
            )
            problem.solve(solver=solver, **options)
    except (cp.error.SolverError, ValueError) as exc:
        # some solver backends reject degenerate canonical forms with a
        # bare ValueError instead of cvxpy's SolverError
        raise SolverFailure(f"solver failed on program {name!r}: {exc}") from exc
    status = problem.status
    if status not in _STATUS_MAP:
        raise SolverFailure(f"program {name!r} ended with solver status {status!r}")
    return _STATUS_MAP[status]


@dataclass(frozen=True)
class _Attempt:
    """One solver's answer to one program, snapshotted immediately.

    Snapshots matter because a later solve of the same cvxpy problem
    overwrites the variable values in place.
    """

    status: str
    solver: str
    value: float
    variables: dict
    iterations: int | None
    violation: float | None


def _extract(var: cp.Variable):
    value = var.value
    if value is None:
        return None
    if np.isscalar(value):
        return float(value)
    return np.array(value)


def _attempt(program: ConicProgram, solver: str, options: dict) -> _Attempt:
    status = _run(program.problem, solver, program.name, options)
    if status in ("infeasible", "unbounded"):
        return _Attempt(
            status, solver, float(program.problem.value), {}, None, None
        )
    variables = {name: _extract(var) for name, var in program.variables.items()}
    stats = program.problem.solver_stats
    iterations = getattr(stats, "num_iters", None) if stats is not None else None
    violation = None
    if program.violation is not None:
        violation = float(program.violation(variables))
    return _Attempt(
        status,
        solver,
        float(program.problem.value),
        variables,
        iterations,
        violation,
    )


def _stream(program: ConicProgram, solver: str, primary: str) -> ConicProgram:
    """The problem object dedicated to one solver.

    The primary solver works on the program itself; any other solver gets a
    clone built on first use (when the program provides a factory), with the
    parameter values copied over before every solve. This keeps each cvxpy
    problem's solve history single-solver, which keeps every solve on the
    reproducible parameter-update path.
    """
    if solver == primary or program.clone_factory is None:
        return program
    clone = program.clones.get(solver)
    if clone is None:
        clone = program.clone_factory(solver)
        program.clones[solver] = clone
    for name, parameter in clone.parameters.items():
        parameter.value = program.parameters[name].value
    return clone


def _first_pass(
    program: ConicProgram,
    solvers: tuple[str, ...],
    options_by_solver: dict[str, dict],
) -> tuple[list[_Attempt], set[str], SolverFailure | None]:
    """Try solvers in order until one returns a definitive status.

    An inaccurate answer is kept while later solvers get a chance to do
    better; hard failures are recorded so only genuinely untried solvers
    are consulted again during certification repair.
    """
    attempts: list[_Attempt] = []
    tried: set[str] = set()
    failure: SolverFailure | None = None
    for solver in solvers:
        tried.add(solver)
        try:
            attempt = _attempt(
                _stream(program, solver, solvers[0]),
                solver,
                options_by_solver.get(solver, {}),
            )
        except SolverFailure as exc:
            failure = exc
            continue
        attempts.append(attempt)
        if attempt.status in ("optimal", "infeasible", "unbounded"):
            break
    return attempts, tried, failure


def _feasible(attempt: _Attempt) -> bool:
    return attempt.violation is None or attempt.violation <= FEASIBILITY_TOL


def _certified(primal: _Attempt, dual: _Attempt) -> bool:
    return (
        primal.status == "optimal"
        and dual.status == "optimal"
        and _feasible(primal)
        and _feasible(dual)
        and abs(primal.value - dual.value) <= GAP_TOL
    )


_QUALITY = {"optimal": 0, "inaccurate": 1}


def _best_pair(primals: list[_Attempt], duals: list[_Attempt]):
    """Pick the attempt pair that makes the strongest certificate.

    Any feasible primal/dual pair with a small gap certifies the value by
    weak duality from both sides, no matter which solver produced which
    half. A certifying pair therefore beats everything; among the rest,
    feasibility ranks first (an infeasible side certifies nothing), then
    the gap itself, then solver-reported optimality.
    """
    candidates = [(p, d) for p in primals for d in duals]
    if not candidates:
        return None

    def key(pair):
        primal, dual = pair
        gap = abs(primal.value - dual.value)
        return (
            not _certified(primal, dual),
            (not _feasible(primal)) + (not _feasible(dual)),
            gap,
            _QUALITY[primal.status] + _QUALITY[dual.status],
        )

    return min(candidates, key=key)


def _corroborated(duals: list[_Attempt]) -> bool:
    """Whether two solvers independently agree on the dual value.

    When they do and the primal still stands apart, the primal is the
    side worth re-solving; when they disagree, the instance itself is
    ill-conditioned and no side can be blamed.
    """
    for i, first in enumerate(duals):
        for second in duals[i + 1 :]:
            if (
                first.solver != second.solver
                and _feasible(first)
                and _feasible(second)
                and abs(first.value - second.value) <= GAP_TOL
            ):
                return True
    return False


def _best_single(attempts: list[_Attempt]) -> _Attempt:
    return min(
        attempts, key=lambda a: ((not _feasible(a)), _QUALITY[a.status])
    )


def solve(
    program: ConicProgram, solvers: tuple[str, ...] = DEFAULT_SOLVERS
) -> SdpSolution:
    """Solve a program and, when present, its dual; certify the result.

    The returned status is ``"optimal"`` only for a fully certified pair:
    both sides solver-optimal and feasible under their independent checks,
    with a primal/dual gap below the gap tolerance. Anything less is
    reported as ``"inaccurate"`` along with the best pair found.
    """
    primal_attempts, primal_tried, failure = _first_pass(
        program, solvers, program.solver_options
    )
    if not primal_attempts:
        if failure is not None:
            raise failure
        raise SolverFailure(f"no solver was attempted for program {program.name!r}")
    last = primal_attempts[-1]
    if last.status in ("infeasible", "unbounded"):
        return SdpSolution(
            value=last.value, variables={}, status=last.status, solver=last.solver
        )

    if program.dual is None:
        chosen = _best_single(primal_attempts)
        status = chosen.status if _feasible(chosen) else "inaccurate"
        return SdpSolution(
            value=chosen.value,
            variables=chosen.variables,
            status=status,
            iterations=chosen.iterations,
            max_violation=chosen.violation,
            solver=chosen.solver,
        )

    dual_options = program.dual.solver_options or program.solver_options
    dual_attempts, dual_tried, _ = _first_pass(program.dual, solvers, dual_options)

    def usable(attempts: list[_Attempt]) -> list[_Attempt]:
        return [a for a in attempts if a.status in ("optimal", "inaccurate")]

    def repair(side: ConicProgram, attempts, tried, options) -> bool:
        """Second opinions from untried solvers; True once a pair certifies."""
        nonlocal best
        for solver in solvers:
            if solver in tried:
                continue
            tried.add(solver)
            try:
                attempts.append(
                    _attempt(
                        _stream(side, solver, solvers[0]),
                        solver,
                        options.get(solver, {}),
                    )
                )
            except SolverFailure:
                continue
            best = _best_pair(primal_attempts, usable(dual_attempts))
            if best is not None and _certified(*best):
                return True
        return False

    best = _best_pair(primal_attempts, usable(dual_attempts))
    if best is None or not _certified(*best):
        # Certification repair, dual side first: it is the smaller program
        # here and the observed culprit (a solver can label a degenerate
        # dual optimal several digits short). The primal is re-solved only
        # when two solvers corroborate the dual value while the primal
        # stands apart, which is real evidence that the primal is the
        # short side; when the duals disagree, the instance itself is too
        # ill-conditioned for a certificate and more solving is waste.
        certified = repair(
            program.dual, dual_attempts, dual_tried, dual_options
        )
        if (
            not certified
            and (best is None or abs(best[0].value - best[1].value) > GAP_TOL)
            and _corroborated(usable(dual_attempts))
        ):
            repair(program, primal_attempts, primal_tried, program.solver_options)

    if best is None:
        chosen = _best_single(primal_attempts)
        return SdpSolution(
            value=chosen.value,
            variables=chosen.variables,
            status="inaccurate",
            iterations=chosen.iterations,
            max_violation=chosen.violation,
            solver=chosen.solver,
        )

    primal, dual = best
    return SdpSolution(
        value=primal.value,
        variables=primal.variables,
        status="optimal" if _certified(primal, dual) else "inaccurate",
        gap=abs(primal.value - dual.value),
        dual_value=dual.value,
        iterations=primal.iterations,
        max_violation=primal.violation,
        solver=primal.solver,
        dual_variables=dual.variables,
        dual_solver=dual.solver,
    )
