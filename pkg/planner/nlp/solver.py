"""
Gradient-based solvers for the transcribed problem.

interior-point: scipy trust-constr (barrier method with sparse constraint Jacobian).
augmented-lagrangian: Powell-Hestenes-Rockafellar outer loop with L-BFGS-B inner solves.
"""

import logging
import time
from typing import Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, NonlinearConstraint, minimize

from planner.model import Trajectory
from planner.nlp.transcription import NlpProblem
from planner.schema import SolveStats, SolverOptions

logger = logging.getLogger(__name__)

MAX_OUTER = 100
INNER_MAX_ITER = 100  # per outer iteration
PENALTY_START = 10.0
PENALTY_MAX = 1e8


class _BestIterate:
    """Least-violating iterate seen so far, ties broken by objective"""

    def __init__(self, problem: NlpProblem):
        self.problem = problem
        self.x: Optional[np.ndarray] = None
        self.key = (np.inf, np.inf)

    def offer(self, x: np.ndarray) -> None:
        violation, _ = self.problem.max_violation(x)
        key = (violation, self.problem.objective(x))
        if key < self.key:
            self.key = key
            self.x = np.array(x, copy=True)


def _stats(problem: NlpProblem, x: np.ndarray, method: str, status: str, iterations: int,
           optimality: float, started: float, options: SolverOptions, stationary: bool) -> SolveStats:
    violation, worst = problem.max_violation(x)
    converged = violation <= options.feasibility_tol and stationary
    if converged:
        status = "converged"
    elif status == "converged":
        status = "not_converged"
    return SolveStats(
        method=method,
        status=status,
        iterations=iterations,
        max_violation=violation,
        objective=problem.objective(x),
        optimality=float(optimality),
        wall_time=time.perf_counter() - started,
        converged=converged,
        worst_block=worst if violation > 0 else None,
    )


def _interior_point(problem: NlpProblem, options: SolverOptions, started: float) -> Tuple[np.ndarray, SolveStats]:
    best = _BestIterate(problem)
    zero_hessian = sparse.csr_matrix((problem.variable_count, problem.variable_count))

    def callback(xk, state):
        best.offer(xk)
        return False

    constraint = NonlinearConstraint(
        problem.constraints,
        problem.constraint_lower(),
        problem.constraint_upper(),
        jac=problem.jacobian,
        # constraint curvature is dropped; the Lagrangian Hessian is the objective Hessian
        hess=lambda x, v: zero_hessian,
    )
    result = minimize(
        problem.objective,
        problem.x0,
        method="trust-constr",
        jac=problem.objective_gradient,
        hess=problem.objective_hessian,
        constraints=[constraint],
        bounds=Bounds(problem.lower_bounds, problem.upper_bounds),
        callback=callback,
        options={
            "maxiter": options.max_iterations,
            "gtol": options.stationarity_tol,
            "xtol": 1e-10,
            "verbose": 0,
        },
    )
    best.offer(result.x)
    x = best.x
    stationary = result.optimality <= options.stationarity_tol
    status = {0: "max_iterations", 2: "step_too_small"}.get(result.status, "converged")
    logger.info("trust-constr finished: %s (%d iterations)", result.message, result.nit)
    return x, _stats(problem, x, "interior-point", status, result.nit, result.optimality,
                     started, options, stationary)


def _augmented_lagrangian(problem: NlpProblem, options: SolverOptions, started: float) -> Tuple[np.ndarray, SolveStats]:
    lower, upper = problem.constraint_lower(), problem.constraint_upper()
    bounds = Bounds(problem.lower_bounds, problem.upper_bounds)
    multipliers = np.zeros(problem.row_count)
    penalty = PENALTY_START
    x = problem.x0.copy()
    best = _BestIterate(problem)
    iterations = 0
    previous = np.inf
    status = "not_converged"
    optimality = np.inf

    for outer in range(MAX_OUTER):
        lam, rho = multipliers.copy(), penalty

        def merit(x):
            shifted = problem.constraints(x) + lam / rho
            excess = shifted - np.clip(shifted, lower, upper)
            value = problem.objective(x) + 0.5 * rho * excess @ excess - lam @ lam / (2.0 * rho)
            grad = problem.objective_gradient(x) + rho * (problem.jacobian(x).T @ excess)
            return value, grad

        inner = minimize(
            merit, x, jac=True, method="L-BFGS-B", bounds=bounds,
            options={
                "maxiter": max(1, min(INNER_MAX_ITER, options.max_iterations - iterations)),
                "gtol": 0.1 * options.stationarity_tol,
            },
        )
        iterations += inner.nit
        x = inner.x
        best.offer(x)

        values = problem.constraints(x)
        shifted = values + lam / rho
        multipliers = rho * (shifted - np.clip(shifted, lower, upper))
        optimality = float(np.max(np.abs(problem.objective_gradient(x) + problem.jacobian(x).T @ multipliers)))
        violation, worst = problem.max_violation(x)
        logger.debug("outer %d: violation %.3e (%s), optimality %.3e, rho %.1e",
                     outer, violation, worst, optimality, rho)

        if violation <= options.feasibility_tol and optimality <= options.stationarity_tol:
            status = "converged"
            break
        if "ABNORMAL" in str(inner.message).upper() and violation > options.feasibility_tol:
            status = "line_search_failure"
            break
        if iterations >= options.max_iterations:
            status = "max_iterations"
            break
        if violation > 0.25 * previous:
            penalty = min(penalty * 10.0, PENALTY_MAX)
        previous = violation

    x = x if status == "converged" else best.x
    stationary = status == "converged"
    return x, _stats(problem, x, "augmented-lagrangian", status, iterations, optimality,
                     started, options, stationary)


def solve(problem: NlpProblem, options: Optional[SolverOptions] = None) -> Tuple[Trajectory, SolveStats]:
    """Solve from problem.x0; the best iterate is returned even without convergence"""
    options = options or SolverOptions()
    started = time.perf_counter()

    violation, _ = problem.max_violation(problem.x0)
    gradient = float(np.max(np.abs(problem.objective_gradient(problem.x0)), initial=0.0))
    if violation <= options.feasibility_tol and gradient <= options.stationarity_tol:
        logger.info("Initial guess is feasible and stationary; no iterations needed")
        stats = _stats(problem, problem.x0, options.method, "converged", 0, gradient,
                       started, options, True)
        return problem.to_trajectory(problem.x0), stats

    if options.method == "augmented-lagrangian":
        x, stats = _augmented_lagrangian(problem, options, started)
    else:
        x, stats = _interior_point(problem, options, started)

    logger.info(
        "%s: %s after %d iterations, max violation %.2e, %.1f s",
        stats.method, stats.status, stats.iterations, stats.max_violation, stats.wall_time,
    )
    return problem.to_trajectory(x), stats
