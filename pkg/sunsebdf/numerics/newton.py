"""Newton iteration with dense LU solves, shared by the starter and the BDF steps."""

from typing import Callable
import logging
import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .exceptions import SolverFailure, StepFailure
from .problem import OdeProblem, SolverOptions

logger = logging.getLogger(__name__)

_FD_STEP = float(np.sqrt(np.finfo(np.float64).eps))


def forward_difference_jacobian(problem: OdeProblem, t: float, v: np.ndarray) -> np.ndarray:
    """∂f/∂v by forward differences with step sqrt(eps)·(1 + |v_j|) per column."""
    f0 = problem.f(t, v)
    J = np.empty((f0.size, v.size))
    for j in range(v.size):
        h = _FD_STEP * (1.0 + abs(v[j]))
        shifted = v.copy()
        shifted[j] += h
        J[:, j] = (problem.f(t, shifted) - f0) / h
    return J


def rhs_jacobian(problem: OdeProblem, t: float, v: np.ndarray) -> np.ndarray:
    if problem.jacobian is not None:
        return np.atleast_2d(np.asarray(problem.jacobian(t, v), dtype=np.float64))
    return forward_difference_jacobian(problem, t, v)


def _factor(matrix: np.ndarray):
    with warnings.catch_warnings():
        warnings.simplefilter("error", LinAlgWarning)
        try:
            lu = lu_factor(matrix)
        except (LinAlgWarning, ValueError) as exc:
            raise SolverFailure(f"singular Newton matrix: {exc}") from exc
    if not np.all(np.diag(lu[0]) != 0):
        raise SolverFailure("singular Newton matrix")
    return lu


def newton_solve(
    residual: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    guess: np.ndarray,
    options: SolverOptions,
) -> tuple[np.ndarray, int]:
    """Solves residual(y) = 0 by full Newton iteration.

    After each correction the next one is computed; the solve stops when that next correction
    is below atol + rtol·|y| in the max norm, and it is applied without being counted. A linear
    residual therefore finishes in exactly one iteration.

    Args:
        residual (Callable[[np.ndarray], np.ndarray]): G(y).
        jacobian (Callable[[np.ndarray], np.ndarray]): dG/dy.
        guess (np.ndarray): Starting iterate.
        options (SolverOptions): Tolerances and the iteration budget.

    Returns:
        `tuple[np.ndarray, int]` - the solution and the number of iterations spent.

    Raises:
        SolverFailure: A Newton matrix was singular.
        StepFailure: The budget ran out or the iterates stopped being finite.
    """
    y = np.array(guess, dtype=np.float64)
    delta = lu_solve(_factor(jacobian(y)), -residual(y))
    for it in range(1, options.max_iter + 1):
        y = y + delta
        if not np.all(np.isfinite(y)):
            err = StepFailure("Newton iterates diverged")
            err.iterations = it
            raise err
        delta = lu_solve(_factor(jacobian(y)), -residual(y))
        if np.max(np.abs(delta)) <= options.atol + options.rtol * np.max(np.abs(y)):
            return y + delta, it
    err = StepFailure(f"Newton did not converge in {options.max_iter} iterations")
    err.iterations = options.max_iter
    raise err
