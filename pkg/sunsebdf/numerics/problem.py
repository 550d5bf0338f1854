"""Value types shared by the integrators: the problem, solver options and run results."""

from dataclasses import dataclass, field
from typing import Any, Callable, TextIO
import csv
import math

import numpy as np

from .constants import MODEL_HORIZON, MODEL_LIPSCHITZ, NEWTON_ATOL, NEWTON_MAX_ITER, NEWTON_RTOL
from .exceptions import InvalidArgument
from .mesh import TimeMesh

Rhs = Callable[[float, np.ndarray], np.ndarray]
Jacobian = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class OdeProblem:
    """An initial value problem v' = f(t, v), v(0) = v0 on (0, T]."""

    rhs: Rhs
    """f(t, v), returning an array shaped like v."""
    v0: np.ndarray
    horizon: float
    jacobian: Jacobian | None = None
    """∂f/∂v, shape (d, d). Forward differences are used when absent."""
    lipschitz: float | None = None
    """L_f, only read by the perturbation bounds."""
    exact: Callable[[float], np.ndarray] | None = None
    name: str = "ode"

    def __post_init__(self):
        v0 = np.atleast_1d(np.asarray(self.v0, dtype=np.float64)).copy()
        if v0.ndim != 1:
            raise InvalidArgument("v0 must be a scalar or a 1d array")
        v0.flags.writeable = False
        object.__setattr__(self, "v0", v0)
        if self.horizon <= 0:
            raise InvalidArgument("the horizon must be positive")
        if self.lipschitz is not None and self.lipschitz <= 0:
            raise InvalidArgument("the Lipschitz constant must be positive")

    @property
    def dim(self) -> int:
        return self.v0.size

    def f(self, t: float, v: np.ndarray) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.rhs(t, v), dtype=np.float64))


@dataclass(frozen=True)
class SolverOptions:
    """Newton settings used by every implicit solve."""

    atol: float = NEWTON_ATOL
    rtol: float = NEWTON_RTOL
    max_iter: int = NEWTON_MAX_ITER

    def as_dict(self) -> dict[str, Any]:
        return {"atol": self.atol, "rtol": self.rtol, "max_iter": self.max_iter}


@dataclass(frozen=True, eq=False)
class Trajectory:
    """The numerical solution on every mesh node."""

    mesh: TimeMesh
    order: int
    values: np.ndarray
    """Shape (N+1, d)."""
    iterations: np.ndarray
    """Newton iterations spent at each level (summed over stages for starter levels)."""
    starter: dict[str, Any] = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.mesh.nodes

    def to_csv(self, out: TextIO):
        """Writes `n,t_n,v_1..v_d` rows."""
        w = csv.writer(out, lineterminator="\n")
        d = self.values.shape[1]
        w.writerow(["n", "t_n"] + [f"v_{i + 1}" for i in range(d)])
        for n, (t, v) in enumerate(zip(self.mesh.nodes, self.values)):
            w.writerow([n, f"{t:.17g}"] + [f"{x:.17g}" for x in v])


@dataclass(frozen=True, eq=False)
class PerturbationRun:
    """An unperturbed and a perturbed run sharing their starting values."""

    base: Trajectory
    perturbed: Trajectory
    epsilon: np.ndarray
    """ε^n at index n (zero below the order)."""
    difference: np.ndarray
    """|v̄^n - v^n| in the max norm, indexed by n."""
    bound: np.ndarray
    """The stability bound at each level, NaN where it is not defined."""
    c3_surrogate: float | None = None
    """Empirical DOC row/column sum used in place of C_3 (BDF3 only)."""

    @property
    def max_difference(self) -> float:
        return float(self.difference.max())

    @property
    def bound_holds(self) -> bool:
        defined = ~np.isnan(self.bound)
        return bool(np.all(self.difference[defined] <= self.bound[defined]))

    def to_csv(self, out: TextIO):
        """Writes `n,t_n,vtilde_abs,bound` rows."""
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["n", "t_n", "vtilde_abs", "bound"])
        for n, t in enumerate(self.base.mesh.nodes):
            b = self.bound[n]
            w.writerow(
                [n, f"{t:.17g}", f"{self.difference[n]:.17g}", "" if np.isnan(b) else f"{b:.17g}"]
            )


def model_problem() -> OdeProblem:
    """v' = 2v - 3e^{-t}, v(0) = 1 on (0, 1], with the smooth solution e^{-t}."""
    return OdeProblem(
        rhs=lambda t, v: 2.0 * v - 3.0 * math.exp(-t),
        v0=np.array([1.0]),
        horizon=MODEL_HORIZON,
        jacobian=lambda t, v: np.array([[2.0]]),
        lipschitz=MODEL_LIPSCHITZ,
        exact=lambda t: np.array([math.exp(-t)]),
        name="model",
    )
