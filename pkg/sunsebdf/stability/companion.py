"""Companion matrices of the BDF3 DOC recurrence and their elliptic norms.

With α = -d_1/d_0 and β = d_2/d_0, the rescaled DOC kernels obey the two-term recurrence
driven by A = ((α, -β), (1, 0)). Its norm after the similarity transform by
H = ((μ, μ̄), (1, 1)) decides whether the kernels decay."""

from dataclasses import dataclass
import logging
import math

import numpy as np

from ..numerics.constants import MU_STAR
from ..numerics.exceptions import InvalidArgument

logger = logging.getLogger(__name__)


def _ratios(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(x < 0) or np.any(y < 0):
        raise InvalidArgument("step ratios must be nonnegative")
    return x, y


def _scalar(a: np.ndarray):
    return a[()] if a.ndim == 0 else a


def _q(x, y):
    return 3 * x * x * y + 4 * x * y + 2 * x + y + 1


def alpha(x, y):
    """α(x, y) = -d_1(x, y)/d_0(x, y) in its closed rational form; works on arrays."""
    x, y = _ratios(x, y)
    num = x * (x * x * y * y + 4 * x * y * y + 3 * y * y + 2 * x * y + 3 * y + 1)
    return _scalar(num / ((y + 1) * _q(x, y)))


def beta(x, y):
    """β(x, y) = d_2(x, y)/d_0(x, y) in its closed rational form; works on arrays."""
    x, y = _ratios(x, y)
    return _scalar(x * (x + 1) ** 2 * y * y / ((y + 1) * _q(x, y)))


def alpha_partials(x, y) -> tuple:
    """(∂α/∂x, ∂α/∂y); both are positive on the open quadrant."""
    x, y = _ratios(x, y)
    q2 = _q(x, y) ** 2
    dx = (
        (x + 1) ** 2 * (3 * x * x + 2 * x + 3) * y**3
        + 2 * (2 * x**3 + 5 * x * x + 6 * x + 3) * y * y
        + (x + 2) ** 2 * y
        + 1
    ) / ((y + 1) * q2)
    dy = x * (x + 1) ** 2 * (x * y + y + 1) * (3 * x * y + 3 * y + 1) / ((y + 1) ** 2 * q2)
    return _scalar(dx), _scalar(dy)


def beta_partials(x, y) -> tuple:
    """(∂β/∂x, ∂β/∂y); both are positive on the open quadrant."""
    x, y = _ratios(x, y)
    q2 = _q(x, y) ** 2
    dx = (
        (x + 1)
        * y
        * y
        * (3 * x**3 * y + 5 * x * x * y + 4 * x * x + 3 * x * y + 3 * x + y + 1)
        / ((y + 1) * q2)
    )
    dy = x * (x + 1) ** 2 * y * (3 * x * x * y + 6 * x * y + 4 * x + 2 * y + 2) / ((y + 1) ** 2 * q2)
    return _scalar(dx), _scalar(dy)


def g_function(x, y):
    """g(x, y) = (2α² + 3β² - 4αβ - 2α + 2β)/(x(x+1)) as a rational function valid at x = 0.

    g < 0 on (0, R_3)², which is what makes the μ* = 1/2 + i/2 norm a contraction there.
    """
    x, y = _ratios(x, y)
    q = _q(x, y)
    num = (
        (x + 1) ** 2 * (x * x + x - 4) * y**4
        - 2 * (4 * x * x + 11 * x + 7) * y**3
        - 2 * (2 * x * x + 10 * x + 9) * y * y
        - 2 * (3 * x + 5) * y
        - 2
    )
    return _scalar(num / ((y + 1) ** 2 * q * q))


@dataclass(frozen=True)
class Companion2x2:
    """The companion matrix ((α, -β), (1, 0))."""

    alpha: float
    beta: float

    @classmethod
    def from_ratios(cls, x: float, y: float) -> "Companion2x2":
        """A_m for the ratios x = r_m and y = r_{m-1}."""
        return cls(float(alpha(x, y)), float(beta(x, y)))

    def matrix(self) -> np.ndarray:
        return np.array([[self.alpha, -self.beta], [1.0, 0.0]])


@dataclass(frozen=True)
class HNormConfig:
    """The transform H = ((μ, μ̄), (1, 1)) of the elliptic norm ‖A‖_H = ‖H⁻¹AH‖_∞."""

    mu: complex = MU_STAR

    def __post_init__(self):
        object.__setattr__(self, "mu", complex(self.mu))
        if self.mu.imag == 0:
            raise InvalidArgument(f"μ must have a nonzero imaginary part, got {self.mu}")

    @property
    def H(self) -> np.ndarray:
        return np.array([[self.mu, self.mu.conjugate()], [1.0, 1.0]], dtype=np.complex128)

    @property
    def H_inv(self) -> np.ndarray:
        return np.linalg.inv(self.H)

    @property
    def h_inf(self) -> float:
        """‖H‖_∞."""
        return float(np.abs(self.H).sum(axis=1).max())

    @property
    def h_inv_inf(self) -> float:
        """‖H⁻¹‖_∞."""
        return float(np.abs(self.H_inv).sum(axis=1).max())


def _mu(mu) -> complex:
    if isinstance(mu, HNormConfig):
        return mu.mu
    return HNormConfig(mu).mu


def h_norm(A: Companion2x2, mu: complex | HNormConfig = MU_STAR) -> float:
    """‖A‖_H = |μ²-αμ+β|/|μ-μ̄| + sqrt(β + |μ²-αμ+β|²/|μ-μ̄|²).

    Raises:
        InvalidArgument: μ is real.
    """
    m = _mu(mu)
    w = abs(m * m - A.alpha * m + A.beta) / abs(m - m.conjugate())
    return w + math.sqrt(A.beta + w * w)


def h_norm_direct(A: Companion2x2, mu: complex | HNormConfig = MU_STAR) -> float:
    """‖H⁻¹AH‖_∞ computed from the matrices, the oracle for `h_norm`."""
    cfg = mu if isinstance(mu, HNormConfig) else HNormConfig(mu)
    B = cfg.H_inv @ A.matrix() @ cfg.H
    return float(np.linalg.norm(B, np.inf))


def h0_norm(A: Companion2x2) -> float:
    """max{α, 1 - α + 2β}, the norm after the lower-triangular transform H_0 = ((1, 0), (1, 1))."""
    return max(A.alpha, 1.0 - A.alpha + 2.0 * A.beta)


def eigen_moduli(A: Companion2x2) -> tuple[float, float]:
    """Moduli of the roots of λ² - αλ + β = 0, larger first."""
    roots = np.roots([1.0, -A.alpha, A.beta])
    mods = sorted((float(abs(r)) for r in roots), reverse=True)
    if len(mods) == 1:
        mods.append(0.0)
    return mods[0], mods[1]


def disk_condition(mu: complex, x: float, y: float) -> float:
    """Signed distance of μ inside the disk 𝔇(x, y).

    𝔇(x, y) has centre α/2 + (i/2)sqrt((1+β)² - α²) and radius (1-β)/2; the margin is positive
    exactly when μ lies strictly inside.
    """
    a = float(alpha(x, y))
    b = float(beta(x, y))
    # (1+β)² > α² on (0, R̂_3)²; clamped beyond it
    centre = complex(a / 2, math.sqrt(max((1 + b) ** 2 - a * a, 0.0)) / 2)
    return (1 - b) / 2 - abs(complex(mu) - centre)
