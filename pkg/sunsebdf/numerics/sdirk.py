"""Singly diagonally implicit Runge-Kutta steps, used to start the multistep schemes."""

from dataclasses import dataclass
import logging

import numpy as np

from .constants import SDIRK_GAMMA, SDIRK_TABLEAU_ID
from .newton import newton_solve, rhs_jacobian
from .problem import OdeProblem, SolverOptions

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tableau:
    """A lower-triangular Butcher tableau with a constant diagonal.

    `BT[i]` lists the coefficients a_{i,0}..a_{i,i} of stage i, the last one being the diagonal.
    """

    name: str
    order: int
    BT: dict[int, tuple[float, ...]]
    weights: tuple[float, ...]
    eval_stages: tuple[float, ...]

    @property
    def stages(self) -> int:
        return len(self.BT)

    @property
    def diagonal(self) -> float:
        return self.BT[0][0]


# two stages, third order, A-stable
SDIRK3 = Tableau(
    name=SDIRK_TABLEAU_ID,
    order=3,
    BT={
        0: (SDIRK_GAMMA,),
        1: (1.0 - 2.0 * SDIRK_GAMMA, SDIRK_GAMMA),
    },
    weights=(0.5, 0.5),
    eval_stages=(SDIRK_GAMMA, 1.0 - SDIRK_GAMMA),
)


def sdirk_step(
    problem: OdeProblem,
    t: float,
    v: np.ndarray,
    h: float,
    options: SolverOptions,
    tableau: Tableau = SDIRK3,
) -> tuple[np.ndarray, int]:
    """Advances v from t to t + h.

    Each stage Y_i = v + h Σ_{l<i} a_{il} F_l + h a_ii f(t + c_i h, Y_i) is solved by Newton,
    starting from v.

    Returns:
        `tuple[np.ndarray, int]` - the new value and the Newton iterations summed over stages.

    Raises:
        SolverFailure: A stage matrix I - h a_ii J was singular.
        StepFailure: A stage solve did not converge.
    """
    slopes: list[np.ndarray] = []
    total = 0
    eye = np.eye(v.size)
    for i in range(tableau.stages):
        row = tableau.BT[i]
        ti = t + tableau.eval_stages[i] * h
        known = v.copy()
        for l, F in enumerate(slopes):
            known += h * row[l] * F
        diag = h * row[-1]

        def residual(y, known=known, ti=ti, diag=diag):
            return y - known - diag * problem.f(ti, y)

        def jacobian(y, ti=ti, diag=diag):
            return eye - diag * rhs_jacobian(problem, ti, y)

        Y, its = newton_solve(residual, jacobian, v, options)
        total += its
        slopes.append(problem.f(ti, Y))
    v_new = v.copy()
    for b, F in zip(tableau.weights, slopes):
        v_new += h * b * F
    logger.debug("sdirk step t=%.6g h=%.3g newton=%d", t, h, total)
    return v_new, total
