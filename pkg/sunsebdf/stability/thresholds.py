"""Step-ratio thresholds as positive roots of fixed polynomials."""

from dataclasses import dataclass
from functools import cache
from typing import Sequence
import logging
import math

import numpy as np
from scipy.optimize import bisect

from ..numerics.constants import (
    R3_HAT_POLY,
    R3_POLY,
    R3_TILDE_POLY,
    R30_POLY,
    ROOT_SCAN_HIGH,
    ROOT_SCAN_LOW,
    ROOT_SCAN_STEP,
    ROOT_XTOL,
)
from ..numerics.exceptions import BracketFailure
from .companion import alpha, beta

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ThresholdRoots:
    """The ratio thresholds of the BDF3 analysis."""

    r3: float
    """R_3 ≈ 2.553: BDF3 DOC kernels decay while every ratio stays below it."""
    r3_hat: float
    """R̂_3 ≈ 3.4405: β < 1 on (0, R̂_3)²."""
    r30: float
    """R_{3,0} ≈ 1.839: the H_0 norm is a contraction below it."""
    r3_tilde: tuple[float, float]
    """The two positive roots of the tangency polynomial, larger first."""
    tangential_point: complex
    """Lower intersection of ∂𝔇(0,0) and ∂𝔇(R̃_3, R̃_3) at R̃_3 rounded to four decimals."""
    contact_point: complex
    """The point of ∂𝔇(0,0) on the line towards the centre of 𝔇(R̃_3, R̃_3), at the exact root."""
    residuals: dict[str, float]
    """|p(R)| for each root."""


def positive_roots(
    coeffs: Sequence[float],
    low: float = ROOT_SCAN_LOW,
    high: float = ROOT_SCAN_HIGH,
    step: float = ROOT_SCAN_STEP,
) -> list[float]:
    """Finds the roots of a polynomial in [low, high] by a sign-change scan and bisection.

    Args:
        coeffs (Sequence[float]): Coefficients, highest degree first.
        low (float, optional): Scan start. Defaults to 0.01.
        high (float, optional): Scan end. Defaults to 10.
        step (float, optional): Scan spacing. Defaults to 0.01.

    Returns:
        `list[float]` - the roots in increasing order.
    """
    p = np.asarray(coeffs, dtype=np.float64)
    grid = np.arange(round((high - low) / step) + 1) * step + low
    vals = np.polyval(p, grid)
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0:
            logger.debug("bracket [%.2f, %.2f] for %s", a, b, list(coeffs))
            roots.append(bisect(lambda r: np.polyval(p, r), a, b, xtol=ROOT_XTOL))
    return roots


def _single_root(name: str, coeffs) -> float:
    roots = positive_roots(coeffs)
    if len(roots) != 1:
        raise BracketFailure(f"{name}: expected one root in the scan window, found {len(roots)}")
    return roots[0]


def _disk(r: float) -> tuple[complex, float]:
    a, b = float(alpha(r, r)), float(beta(r, r))
    return complex(a / 2, math.sqrt((1 + b) ** 2 - a * a) / 2), (1 - b) / 2


def _lower_intersection(c1: complex, r1: float, c2: complex, r2: float) -> complex:
    d = abs(c2 - c1)
    u = (c2 - c1) / d
    a = (d * d + r1 * r1 - r2 * r2) / (2 * d)
    h = math.sqrt(max(r1 * r1 - a * a, 0.0))
    base = c1 + a * u
    p, q = base + h * 1j * u, base - h * 1j * u
    return p if p.imag < q.imag else q


@cache
def threshold_roots() -> ThresholdRoots:
    """Solves the four threshold polynomials.

    Raises:
        BracketFailure: A polynomial did not show the expected number of sign changes.
    """
    r3 = _single_root("R3", R3_POLY)
    r3_hat = _single_root("R3 hat", R3_HAT_POLY)
    r30 = _single_root("R3,0", R30_POLY)
    tilde = positive_roots(R3_TILDE_POLY)
    if len(tilde) != 2:
        raise BracketFailure(f"R3 tilde: expected two roots, found {len(tilde)}")
    tilde_pair = (max(tilde), min(tilde))

    c0, r0 = complex(0.0, 0.5), 0.5
    c_round, rad_round = _disk(round(tilde_pair[0], 4))
    c_exact, _ = _disk(tilde_pair[0])
    tangential = _lower_intersection(c0, r0, c_round, rad_round)
    contact = c0 + r0 * (c_exact - c0) / abs(c_exact - c0)

    residuals = {
        "R3": abs(float(np.polyval(R3_POLY, r3))),
        "R3_hat": abs(float(np.polyval(R3_HAT_POLY, r3_hat))),
        "R30": abs(float(np.polyval(R30_POLY, r30))),
        "R3_tilde_1": abs(float(np.polyval(R3_TILDE_POLY, tilde_pair[0]))),
        "R3_tilde_2": abs(float(np.polyval(R3_TILDE_POLY, tilde_pair[1]))),
    }
    logger.debug("threshold roots R3=%.12f R3hat=%.12f R30=%.12f", r3, r3_hat, r30)
    return ThresholdRoots(r3, r3_hat, r30, tilde_pair, tangential, contact, residuals)


def format_complex(z: complex) -> str:
    """Formats a complex number as `a+bi` with four decimals."""
    return f"{z.real:.4f}{'+' if z.imag >= 0 else '-'}{abs(z.imag):.4f}i"
