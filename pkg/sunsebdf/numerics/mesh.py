"""Nonuniform time grids and their step-ratio statistics.

Every array on a `TimeMesh` is indexed by the time level `k`, so `steps[k]` is
τ_k and `ratios[k]` is r_k. Slot 0 of `steps` and slots 0 and 1 of `ratios`
hold zeros (r_1 := 0)."""

from dataclasses import dataclass, field
from typing import Any, TextIO
import csv
import logging

import numpy as np

from .constants import PRNG_NAME, RANDOM_RETRY_BUDGET, RELATIVE_CHECK
from .exceptions import CapUnsatisfiable, InvalidArgument

logger = logging.getLogger(__name__)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class TimeMesh:
    """A time grid 0 = t_0 < t_1 < ... < t_N = T, with its steps and adjacent step ratios."""

    nodes: np.ndarray
    """t_0..t_N."""
    steps: np.ndarray
    """τ_k = t_k - t_{k-1} at index k; index 0 is unused and zero."""
    ratios: np.ndarray
    """r_k = τ_k/τ_{k-1} at index k >= 2; indices 0 and 1 are zero."""
    family: str = "custom"
    """How the mesh was built (uniform, graded, random, ratio-pattern, custom)."""
    provenance: dict[str, Any] = field(default_factory=dict)
    """Parameters needed to rebuild the mesh bit for bit (seed, generator, gamma...)."""

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "steps", _frozen(self.steps))
        object.__setattr__(self, "ratios", _frozen(self.ratios))
        if self.nodes.ndim != 1 or self.nodes.size < 2:
            raise InvalidArgument("a mesh needs at least two nodes")
        if self.steps.shape != self.nodes.shape or self.ratios.shape != self.nodes.shape:
            raise InvalidArgument("nodes, steps and ratios must share the shape (N+1,)")
        if not np.all(self.steps[1:] > 0):
            raise InvalidArgument("time steps must be strictly positive")
        if self.ratios[1] != 0.0:
            raise InvalidArgument("r_1 must be 0")
        if self.N >= 2:
            implied = self.steps[2:] / self.steps[1:-1]
            if not np.allclose(self.ratios[2:], implied, rtol=RELATIVE_CHECK, atol=0.0):
                raise InvalidArgument("step ratios disagree with the steps")

    @classmethod
    def from_steps(
        cls,
        steps: np.ndarray,
        family: str = "custom",
        provenance: dict[str, Any] | None = None,
    ) -> "TimeMesh":
        """Builds a mesh out of the step sizes τ_1..τ_N (the nodes are their cumulative sums)."""
        tau = np.asarray(steps, dtype=np.float64)
        if tau.ndim != 1 or tau.size < 1:
            raise InvalidArgument("steps must be a non-empty 1d sequence")
        if not np.all(tau > 0):
            raise InvalidArgument("time steps must be strictly positive")
        padded = np.concatenate(([0.0], tau))
        nodes = np.concatenate(([0.0], np.cumsum(tau)))
        ratios = np.zeros_like(padded)
        ratios[2:] = padded[2:] / padded[1:-1]
        return cls(nodes, padded, ratios, family, dict(provenance or {}))

    @property
    def N(self) -> int:
        """The number of steps."""
        return self.nodes.size - 1

    @property
    def horizon(self) -> float:
        return float(self.nodes[-1])

    @property
    def max_step(self) -> float:
        """τ, the largest step."""
        return float(self.steps[1:].max())

    @property
    def max_ratio(self) -> float:
        return float(self.ratios.max())

    def same_grid(self, other: "TimeMesh") -> bool:
        return self is other or (
            self.N == other.N and np.array_equal(self.steps, other.steps)
        )


@dataclass(frozen=True)
class MeshStats:
    """The step-ratio columns of the convergence tables."""

    max_step: float
    """τ."""
    max_ratio: float
    """r_max."""
    first_step_ratio: float
    """τ/τ_1."""
    violation_count: int
    """N_1, the number of ratios at or above the threshold."""
    threshold: float


def build_uniform(N: int, T: float) -> TimeMesh:
    """Builds the uniform mesh with N steps of size T/N.

    Raises:
        InvalidArgument: N or T is not positive.
    """
    if N < 1 or T <= 0:
        raise InvalidArgument(f"uniform mesh needs N >= 1 and T > 0, got N={N}, T={T}")
    k = np.arange(N + 1, dtype=np.float64)
    steps = np.full(N + 1, T / N)
    steps[0] = 0.0
    ratios = np.ones(N + 1)
    ratios[:2] = 0.0
    return TimeMesh(T * k / N, steps, ratios, "uniform", {"N": N, "T": T})


def build_graded(N: int, T: float, gamma: float) -> TimeMesh:
    """Builds the graded mesh t_k = T(k/N)^gamma.

    Steps and ratios are formed from the differences k^gamma - (k-1)^gamma before any
    scaling, so integer gammas give r_2 = 2^gamma - 1 with no rounding.

    Args:
        N (int): Number of steps, at least 2.
        T (float): Horizon.
        gamma (float): Grading exponent, at least 1. gamma = 1 is the uniform mesh.

    Raises:
        InvalidArgument: Raised on N < 2, T <= 0 or gamma < 1.
    """
    if N < 2 or T <= 0:
        raise InvalidArgument(f"graded mesh needs N >= 2 and T > 0, got N={N}, T={T}")
    if gamma < 1:
        raise InvalidArgument(f"gamma must be >= 1, got {gamma}")
    k = np.arange(N + 1, dtype=np.float64)
    powers = k**gamma
    diffs = np.zeros(N + 1)
    diffs[1:] = powers[1:] - powers[:-1]
    ratios = np.zeros(N + 1)
    ratios[2:] = diffs[2:] / diffs[1:-1]
    scale = T / float(N) ** gamma
    nodes = T * (k / N) ** gamma
    nodes[-1] = T
    return TimeMesh(
        nodes, diffs * scale, ratios, "graded", {"N": N, "T": T, "gamma": gamma}
    )


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def _open_unit(rng: np.random.Generator, size: int) -> np.ndarray:
    # uniform on the open interval (0, 1); random() can return exactly 0
    eps = rng.random(size)
    while not np.all(eps > 0):
        eps = np.where(eps > 0, eps, rng.random(size))
    return eps


def build_random(
    N: int,
    T: float,
    seed: int,
    ratio_cap: float | None = None,
    max_retries: int = RANDOM_RETRY_BUDGET,
) -> TimeMesh:
    """Builds a random mesh with steps τ_k = T·ε_k/Σε, ε_k uniform on (0, 1).

    With a `ratio_cap`, the whole mesh is redrawn until every ratio is below the cap.
    Single ratios are never clipped, so the ε distribution stays untouched. The chance that a
    full redraw succeeds shrinks geometrically with N; for large capped meshes use
    `build_ratio_pattern` instead.

    Args:
        N (int): Number of steps, at least 2.
        T (float): Horizon.
        seed (int): 64-bit seed for the PCG64 generator.
        ratio_cap (float | None, optional): Strict upper bound for every r_k. Defaults to None.
        max_retries (int, optional): Redraw budget when a cap is given. Defaults to 10 000.

    Raises:
        InvalidArgument: Raised on N < 2, T <= 0 or a non-positive cap.
        CapUnsatisfiable: Raised when no draw within the budget respects the cap.
    """
    if N < 2 or T <= 0:
        raise InvalidArgument(f"random mesh needs N >= 2 and T > 0, got N={N}, T={T}")
    if ratio_cap is not None and ratio_cap <= 0:
        raise InvalidArgument(f"ratio cap must be positive, got {ratio_cap}")
    rng = _generator(seed)
    attempts = 0
    while True:
        attempts += 1
        eps = _open_unit(rng, N)
        if ratio_cap is None or np.all(eps[1:] / eps[:-1] < ratio_cap):
            break
        if attempts >= max_retries:
            err = CapUnsatisfiable(
                f"no random mesh with N={N} and all ratios < {ratio_cap} in {attempts} draws"
            )
            err.retries = attempts
            raise err
    if attempts > 1:
        logger.debug("random mesh N=%d seed=%d accepted after %d draws", N, seed, attempts)
    steps = T * eps / eps.sum()
    provenance = {
        "N": N,
        "T": T,
        "seed": seed,
        "prng": PRNG_NAME,
        "ratio_cap": ratio_cap,
        "draws": attempts,
    }
    return TimeMesh.from_steps(steps, "random", provenance)


def build_ratio_pattern(N: int, T: float, scale: float, seed: int) -> TimeMesh:
    """Builds a mesh whose ratios are drawn directly: r_k = scale·ε_k for 2 <= k <= N.

    τ_1 is free and fixed afterwards by normalising the total length to T. With `scale` set to
    a cap, every ratio lies strictly below that cap.

    Raises:
        InvalidArgument: Raised on N < 2, T <= 0 or scale <= 0.
    """
    if N < 2 or T <= 0:
        raise InvalidArgument(f"ratio pattern needs N >= 2 and T > 0, got N={N}, T={T}")
    if scale <= 0:
        raise InvalidArgument(f"scale must be positive, got {scale}")
    rng = _generator(seed)
    r = scale * _open_unit(rng, N - 1)
    # work in log space, long products of small ratios underflow otherwise
    log_tau = np.concatenate(([0.0], np.cumsum(np.log(r))))
    tau = np.exp(log_tau - log_tau.max())
    tau *= T / tau.sum()
    provenance = {"N": N, "T": T, "seed": seed, "prng": PRNG_NAME, "scale": scale}
    return TimeMesh.from_steps(tau, "ratio-pattern", provenance)


def stats(mesh: TimeMesh, threshold: float) -> MeshStats:
    """Collects τ, r_max, τ/τ_1 and the count of ratios at or above `threshold`."""
    tau = mesh.max_step
    return MeshStats(
        max_step=tau,
        max_ratio=mesh.max_ratio,
        first_step_ratio=tau / float(mesh.steps[1]),
        violation_count=int(np.count_nonzero(mesh.ratios[2:] >= threshold)),
        threshold=threshold,
    )


def to_csv(mesh: TimeMesh, out: TextIO):
    """Writes the mesh as `k,t_k,tau_k,r_k` rows with 17 significant digits."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["k", "t_k", "tau_k", "r_k"])
    for k in range(mesh.N + 1):
        w.writerow(
            [
                k,
                f"{mesh.nodes[k]:.17g}",
                f"{mesh.steps[k]:.17g}" if k else "",
                f"{mesh.ratios[k]:.17g}" if k else "",
            ]
        )
