from typing import Sequence
import logging
import math
import warnings

import numpy as np

from .numerics.exceptions import (
    InvalidArgument,
    SolverFailure,
    StarterFailure,
    StepFailure,
    UnsupportedOrder,
    RatioWarning,
)
from .numerics.kernels import SUPPORTED_ORDERS, KernelTable, abs_row_and_column_sums, build_doc_table, build_kernel_table
from .numerics.mesh import TimeMesh
from .numerics.newton import newton_solve, rhs_jacobian
from .numerics.problem import OdeProblem, PerturbationRun, SolverOptions, Trajectory
from .numerics.sdirk import SDIRK3, Tableau, sdirk_step
from .stability.thresholds import threshold_roots

logger = logging.getLogger(__name__)


class Integrator:
    """A variable-step BDF-k integrator for one problem.

    BDF-k needs k starting values; v^1..v^{k-1} come from the two-stage SDIRK starter and the
    remaining levels from the BDF formula D_k v^n = f(t_n, v^n). This class is the base class of
    `PerturbedIntegrator`, which adds a forcing ε^n to the right-hand side.
    """

    def __init__(
        self,
        problem: OdeProblem,
        order: int,
        options: SolverOptions | None = None,
        tableau: Tableau = SDIRK3,
    ):
        """Creates an instance of `Integrator`.

        Args:
            problem (OdeProblem): The initial value problem.
            order (int): k, 1, 2 or 3.
            options (SolverOptions | None, optional): Newton settings. Defaults to `SolverOptions()`.
            tableau (Tableau, optional): The starter. Defaults to the two-stage third order SDIRK.

        Raises:
            UnsupportedOrder: Raised if `order` is not 1, 2 or 3.
        """
        if order not in SUPPORTED_ORDERS:
            err = UnsupportedOrder(f"BDF{order} is not provided, use 1, 2 or 3")
            err.order = order
            raise err
        self.problem = problem
        self.order = order
        self.options = options or SolverOptions()
        self.tableau = tableau

    def _forcing(self, n: int) -> np.ndarray | float:
        "ε^n, zero for the plain scheme."
        return 0.0

    def _check_mesh(self, mesh: TimeMesh):
        if mesh.N < self.order:
            raise InvalidArgument(f"BDF{self.order} needs at least {self.order} steps")
        if not math.isclose(mesh.horizon, self.problem.horizon, rel_tol=1e-12):
            raise InvalidArgument(
                f"mesh ends at {mesh.horizon}, the problem at {self.problem.horizon}"
            )
        if self.order == 3:
            r3 = threshold_roots().r3
            over = int(np.count_nonzero(mesh.ratios[2:] >= r3))
            if over:
                warnings.warn(
                    RatioWarning(f"{over} step ratios reach R3 = {r3:.6f}, BDF3 is not certified"),
                    stacklevel=3,
                )

    def sdirk3_start(self, mesh: TimeMesh) -> tuple[np.ndarray, list[int]]:
        """Computes v^1..v^{k-1} with the SDIRK starter on the first k-1 mesh intervals.

        Returns:
            `tuple[np.ndarray, list[int]]` - an array of shape (k-1, d) and the Newton
            iterations spent on each starter step.

        Raises:
            StarterFailure: A stage solve failed; `.step` holds the level being computed.
        """
        values = np.empty((self.order - 1, self.problem.dim))
        counts = []
        v = self.problem.v0.copy()
        for n in range(1, self.order):
            try:
                v, its = sdirk_step(
                    self.problem,
                    float(mesh.nodes[n - 1]),
                    v,
                    float(mesh.steps[n]),
                    self.options,
                    self.tableau,
                )
            except (StepFailure, SolverFailure) as exc:
                err = StarterFailure(f"starter failed at level {n}: {exc.args[0]}")
                err.step = n
                raise err from exc
            values[n - 1] = v
            counts.append(its)
        return values, counts

    def bdf_step(
        self, table: KernelTable, n: int, history: np.ndarray
    ) -> tuple[np.ndarray, int]:
        """Solves (d_0/τ_n)(v^n - v^{n-1}) + Σ_{l>=1} d_l ∂_τv^{n-l} = f(t_n, v^n) + ε^n.

        Args:
            table (KernelTable): Kernels of the mesh being integrated.
            n (int): The level, k <= n <= N.
            history (np.ndarray): v^{n-k}..v^{n-1}, shape (k, d).

        Returns:
            `tuple[np.ndarray, int]` - v^n and the Newton iterations spent.

        Raises:
            StepFailure: Newton ran out of iterations; `.step` is n.
            SolverFailure: The Newton matrix (d_0/τ_n)I - J was singular; `.step` is n.
        """
        return bdf_step(self.problem, table, n, history, self.options, self._forcing(n))

    def integrate(self, mesh: TimeMesh) -> Trajectory:
        """Integrates over the whole mesh.

        Raises:
            InvalidArgument: The mesh is too short or ends at another horizon.
            StarterFailure: Raised if the starter failed.
            StepFailure: Raised if a BDF step did not converge.
            SolverFailure: Raised on a singular Newton matrix.
        """
        self._check_mesh(mesh)
        k = self.order
        table = build_kernel_table(k, mesh)
        values = np.empty((mesh.N + 1, self.problem.dim))
        iterations = np.zeros(mesh.N + 1, dtype=np.int64)
        values[0] = self.problem.v0
        start, counts = self.sdirk3_start(mesh)
        values[1:k] = start
        iterations[1:k] = counts
        for n in range(k, mesh.N + 1):
            values[n], iterations[n] = self.bdf_step(table, n, values[n - k : n])
        logger.debug(
            "BDF%d on %s mesh N=%d: %d Newton iterations", k, mesh.family, mesh.N, iterations.sum()
        )
        starter = {"tableau": self.tableau.name, "steps": k - 1, "iterations": counts}
        return Trajectory(mesh, k, values, iterations, starter)


class PerturbedIntegrator(Integrator):
    """An `Integrator` solving D_k v̄^n = f(t_n, v̄^n) + ε^n for n >= k.

    The starting values are the unperturbed ones; ε only enters the BDF levels.
    """

    def __init__(
        self,
        problem: OdeProblem,
        order: int,
        epsilon: np.ndarray,
        options: SolverOptions | None = None,
        tableau: Tableau = SDIRK3,
    ):
        """Creates an instance of `PerturbedIntegrator`.

        Args:
            epsilon (np.ndarray): ε^n at index n, shape (N+1,) or (N+1, d).
        """
        super().__init__(problem, order, options, tableau)
        self.epsilon = np.asarray(epsilon, dtype=np.float64)

    def _forcing(self, n: int):
        return self.epsilon[n]

    def integrate(self, mesh: TimeMesh) -> Trajectory:
        if self.epsilon.shape[0] != mesh.N + 1:
            raise InvalidArgument(
                f"expected {mesh.N + 1} perturbations, got {self.epsilon.shape[0]}"
            )
        return super().integrate(mesh)


def sdirk3_start(
    problem: OdeProblem, mesh: TimeMesh, k: int, options: SolverOptions | None = None
) -> np.ndarray:
    """v^1..v^{k-1} from the SDIRK starter, k in 2, 3."""
    if k not in (2, 3):
        err = UnsupportedOrder(f"the starter serves BDF2 and BDF3, not BDF{k}")
        err.order = k
        raise err
    if mesh.N < k - 1:
        raise InvalidArgument(f"the starter needs {k - 1} steps")
    values, _ = Integrator(problem, k, options).sdirk3_start(mesh)
    return values


def bdf_step(
    problem: OdeProblem,
    table: KernelTable,
    n: int,
    history: np.ndarray,
    options: SolverOptions | None = None,
    forcing: np.ndarray | float = 0.0,
) -> tuple[np.ndarray, int]:
    """One variable-step BDF-k step; see `Integrator.bdf_step`.

    The predictor is v^{n-1}.
    """
    options = options or SolverOptions()
    k, mesh = table.order, table.mesh
    if not k <= n <= mesh.N:
        raise InvalidArgument(f"n must lie in {k}..{mesh.N}, got {n}")
    hist = np.atleast_2d(np.asarray(history, dtype=np.float64))
    if hist.shape[0] != k:
        raise InvalidArgument(f"BDF{k} needs {k} history values, got {hist.shape[0]}")
    tau = mesh.steps
    # Σ_{l>=1} d_l ∂_τ v^{n-l}, hist[i] holds v^{n-k+i}
    known = np.zeros(hist.shape[1])
    for l in range(1, k):
        m = n - l
        known += table.band[n, l] * (hist[k - l] - hist[k - l - 1]) / tau[m]
    lead = table.band[n, 0] / tau[n]
    t_n = float(mesh.nodes[n])
    v_prev = hist[-1]
    eye = np.eye(hist.shape[1])

    def residual(y):
        return lead * (y - v_prev) + known - problem.f(t_n, y) - forcing

    def jacobian(y):
        return lead * eye - rhs_jacobian(problem, t_n, y)

    try:
        return newton_solve(residual, jacobian, v_prev, options)
    except (StepFailure, SolverFailure) as err:
        err.step = n
        raise


def integrate(
    problem: OdeProblem, mesh: TimeMesh, k: int, options: SolverOptions | None = None
) -> Trajectory:
    return Integrator(problem, k, options).integrate(mesh)


def max_error(traj: Trajectory, exact) -> float:
    """e(N) = max_{1<=n<=N} |v(t_n) - v^n| in the max norm over components."""
    ref = np.array([np.atleast_1d(exact(float(t))) for t in traj.mesh.nodes[1:]])
    return float(np.abs(ref - traj.values[1:]).max())


def convergence_order(e_coarse: float, e_fine: float, tau_coarse: float, tau_fine: float) -> float:
    """log(e_coarse/e_fine) / log(tau_coarse/tau_fine).

    Raises:
        InvalidArgument: An input is not positive or the two steps coincide.
    """
    if min(e_coarse, e_fine, tau_coarse, tau_fine) <= 0:
        raise InvalidArgument("errors and steps must be positive")
    if tau_coarse == tau_fine:
        raise InvalidArgument("the two levels have the same step")
    return math.log(e_coarse / e_fine) / math.log(tau_coarse / tau_fine)


def _as_epsilon(epsilon, mesh: TimeMesh, k: int, dim: int) -> np.ndarray:
    eps = np.asarray(epsilon, dtype=np.float64)
    if eps.ndim == 0:
        eps = np.full(mesh.N + 1, float(eps))
    if eps.shape[0] != mesh.N + 1:
        raise InvalidArgument(f"expected {mesh.N + 1} perturbations, got {eps.shape[0]}")
    if eps.ndim == 2 and eps.shape[1] != dim:
        raise InvalidArgument(f"perturbations must have {dim} components")
    eps = eps.copy()
    eps[:k] = 0.0
    return eps


def _bdf2_bound(mesh: TimeMesh, L: float, v_tilde: np.ndarray, eps_abs: np.ndarray) -> np.ndarray:
    tau = mesh.max_step
    t = mesh.nodes
    start = v_tilde[1] + 2 * tau * v_tilde[1] / mesh.steps[1]
    bound = np.full(mesh.N + 1, np.nan)
    for n in range(2, mesh.N + 1):
        bound[n] = 2 * math.exp(4 * L * t[n - 1]) * (start + 2 * t[n] * eps_abs[2 : n + 1].max())
    return bound


def _bdf3_bound(
    mesh: TimeMesh, L: float, c3: float, v_tilde: np.ndarray, eps_abs: np.ndarray
) -> np.ndarray:
    tau = mesh.max_step
    t = mesh.nodes
    dv1 = v_tilde[1] / mesh.steps[1]
    dv2 = abs(v_tilde[2] - v_tilde[1]) / mesh.steps[2]
    start = v_tilde[2] + 5 * c3 * tau * dv2 + 2 * c3 * tau * dv1
    bound = np.full(mesh.N + 1, np.nan)
    for n in range(3, mesh.N + 1):
        bound[n] = (
            2
            * math.exp(4 * c3 * L * t[n - 1])
            * (start + 2 * c3 * t[n] * eps_abs[3 : n + 1].max())
        )
    return bound


def perturbed_run(
    problem: OdeProblem,
    mesh: TimeMesh,
    k: int,
    epsilon: Sequence | np.ndarray | float,
    options: SolverOptions | None = None,
) -> PerturbationRun:
    """Integrates the plain and the perturbed scheme and compares them with the stability bound.

    For k = 2 the bound is 2exp(4L t_{n-1})(|ṽ^1| + 2τ|∂_τṽ^1| + 2t_n max_{2<=i<=n}|ε^i|), valid
    when τ <= 1/(4L). For k = 3 the same shape is reported with the constant replaced by the
    larger absolute DOC row/column sum of the mesh. No bound is reported for k = 1.

    Args:
        problem (OdeProblem): Needs a Lipschitz constant when k > 1.
        mesh (TimeMesh): The mesh both runs share.
        k (int): The BDF order.
        epsilon (Sequence | np.ndarray | float): ε^n indexed by n, or one value for every level.
            Entries below k are ignored.
        options (SolverOptions | None, optional): Newton settings.

    Raises:
        InvalidArgument: Raised on a missing Lipschitz constant or a wrongly sized ε.
    """
    if k > 1 and problem.lipschitz is None:
        raise InvalidArgument("the stability bound needs the Lipschitz constant of f")
    eps = _as_epsilon(epsilon, mesh, k, problem.dim)
    base = Integrator(problem, k, options).integrate(mesh)
    perturbed = PerturbedIntegrator(problem, k, eps, options).integrate(mesh)
    v_tilde = np.abs(perturbed.values - base.values).max(axis=1)
    eps_abs = np.abs(eps).reshape(mesh.N + 1, -1).max(axis=1)
    c3 = None
    match k:
        case 2:
            if mesh.max_step > 1 / (4 * problem.lipschitz):
                logger.warning(
                    "max step %.3g exceeds 1/(4L) = %.3g, the BDF2 bound is not guaranteed",
                    mesh.max_step,
                    1 / (4 * problem.lipschitz),
                )
            bound = _bdf2_bound(mesh, problem.lipschitz, v_tilde, eps_abs)
        case 3:
            doc = build_doc_table(build_kernel_table(3, mesh))
            c3 = max(abs_row_and_column_sums(doc))
            bound = _bdf3_bound(mesh, problem.lipschitz, c3, v_tilde, eps_abs)
        case _:
            bound = np.full(mesh.N + 1, np.nan)
    logger.debug("perturbed run BDF%d N=%d: max |v~| = %.3e", k, mesh.N, v_tilde.max())
    return PerturbationRun(base, perturbed, eps, v_tilde, bound, c3)
