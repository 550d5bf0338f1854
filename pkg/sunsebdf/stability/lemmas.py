"""Grid verification of the inequalities behind the BDF3 stability analysis.

Open regions are sampled on a uniform grid kept `INTERIOR_MARGIN` away from their boundary.
Each check reports its smallest margin; a margin is positive when the inequality holds."""

from dataclasses import dataclass
from typing import Callable, TextIO
import csv
import logging
import math

import numpy as np

from ..numerics.constants import DEFAULT_GRID_STEP, INTERIOR_MARGIN
from ..numerics.exceptions import InvalidArgument
from ..numerics.kernels import d_coeff
from .companion import alpha, alpha_partials, beta, beta_partials, g_function
from .thresholds import threshold_roots

logger = logging.getLogger(__name__)

_CHUNK = 256


@dataclass(frozen=True)
class LemmaMargin:
    lemma: str
    worst_margin: float
    x_at_worst: float
    y_at_worst: float
    grid_step: float

    @property
    def holds(self) -> bool:
        return self.worst_margin > 0


@dataclass(frozen=True)
class LemmaReport:
    """One `LemmaMargin` per checked statement."""

    margins: tuple[LemmaMargin, ...]
    grid_step: float

    @property
    def passed(self) -> bool:
        return all(m.holds for m in self.margins)

    def __getitem__(self, lemma: str) -> LemmaMargin:
        for m in self.margins:
            if m.lemma == lemma:
                return m
        raise KeyError(lemma)

    def to_csv(self, out: TextIO):
        """Writes `lemma,worst_margin,x_at_worst,y_at_worst,grid_step` rows."""
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["lemma", "worst_margin", "x_at_worst", "y_at_worst", "grid_step"])
        for m in self.margins:
            w.writerow(
                [m.lemma, f"{m.worst_margin:.17g}", f"{m.x_at_worst:.17g}", f"{m.y_at_worst:.17g}", m.grid_step]
            )


def interior_grid(high: float, step: float) -> np.ndarray:
    """Points of (0, high) spaced at most `step` apart, `INTERIOR_MARGIN` off both ends."""
    n = math.ceil((high - 2 * INTERIOR_MARGIN) / step) + 1
    return np.linspace(INTERIOR_MARGIN, high - INTERIOR_MARGIN, n)


def scan_minimum(
    margin: Callable[[np.ndarray, np.ndarray], np.ndarray], grid: np.ndarray
) -> tuple[float, float, float]:
    """Minimises margin(x, y) over grid × grid, a block of rows at a time.

    Returns:
        `tuple[float, float, float]` - the minimum and the (x, y) where it occurs.
    """
    best = (math.inf, math.nan, math.nan)
    Y = grid[np.newaxis, :]
    for start in range(0, grid.size, _CHUNK):
        X = grid[start : start + _CHUNK, np.newaxis]
        vals = margin(X, Y)
        i, j = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[i, j] < best[0]:
            best = (float(vals[i, j]), float(X[i, 0]), float(grid[j]))
    return best


def _ordering(x, y):
    # 0 < β < α < 1 + β
    a, b = alpha(x, y), beta(x, y)
    return np.minimum(np.minimum(b, a - b), 1 + b - a)


def _beta_below_one(x, y):
    return 1 - beta(x, y)


def _g_negative(x, y):
    return -g_function(x, y)


def _partials(x, y):
    ax, ay = alpha_partials(x, y)
    bx, by = beta_partials(x, y)
    return np.minimum(np.minimum(ax, ay), np.minimum(bx, by))


def _forward_differences(x, y, h):
    def step_up(fn):
        base = fn(x, y)
        return np.minimum(fn(x + h, y) - base, fn(x, y + h) - base)

    checks = [
        step_up(alpha),
        step_up(beta),
        step_up(lambda a, b: d_coeff(0, a, b)),
        step_up(lambda a, b: -d_coeff(1, a, b)),
        step_up(lambda a, b: d_coeff(2, a, b)),
    ]
    return np.minimum.reduce(checks)


def verify_lemmas(grid_step: float = DEFAULT_GRID_STEP) -> LemmaReport:
    """Checks the coefficient inequalities on grids.

    - `ordering`: 0 < β < α < 1 + β on (0, R̂_3)².
    - `beta-below-one`: β < 1 on (0, R̂_3)², tight at the (R̂_3, R̂_3) corner.
    - `g-negative`: g < 0 on (0, R_3)², tight at the (R_3, R_3) corner.
    - `monotone-partials`: the closed-form partials of α and β are positive on (0, R̂_3)².
    - `monotone-differences`: α, β, d_0, |d_1| and d_2 do not decrease along forward grid
      steps on (0, R̂_3)², reported as the smallest increment.

    Raises:
        InvalidArgument: `grid_step` is outside (0, 0.1].
    """
    if not 0 < grid_step <= 0.1:
        raise InvalidArgument(f"grid_step must lie in (0, 0.1], got {grid_step}")
    roots = threshold_roots()
    wide = interior_grid(roots.r3_hat, grid_step)
    narrow = interior_grid(roots.r3, grid_step)
    checks = [
        ("ordering", _ordering, wide),
        ("beta-below-one", _beta_below_one, wide),
        ("g-negative", _g_negative, narrow),
        ("monotone-partials", _partials, wide),
        ("monotone-differences", lambda x, y: _forward_differences(x, y, grid_step), wide[:-1]),
    ]
    margins = []
    for name, fn, grid in checks:
        worst, x, y = scan_minimum(fn, grid)
        logger.debug("%s: worst margin %.3e at (%.4f, %.4f)", name, worst, x, y)
        margins.append(LemmaMargin(name, worst, x, y, grid_step))
    return LemmaReport(tuple(margins), grid_step)
