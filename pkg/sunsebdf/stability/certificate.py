"""Decay certificates for BDF3 DOC kernels on a given mesh."""

from dataclasses import dataclass
from typing import TextIO
import csv
import logging
import warnings

import numpy as np

from ..numerics.constants import MU_STAR
from ..numerics.exceptions import InvalidArgument, MeshMismatch, RatioWarning, UnsupportedOrder
from ..numerics.kernels import DocTable
from ..numerics.mesh import TimeMesh
from .companion import Companion2x2, HNormConfig, alpha, beta, h_norm
from .thresholds import threshold_roots

logger = logging.getLogger(__name__)

_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class StabilityCertificate:
    """Whether |ϑ^{(3,n)}_{n-j}| <= c_R δ^{n-j-1} was confirmed on one mesh.

    Arrays are indexed like the mesh levels; entries below 3 are unused and zero.
    """

    mesh: TimeMesh
    mu: complex
    alphas: np.ndarray
    betas: np.ndarray
    hnorms: np.ndarray
    """‖A_i‖_H at index i."""
    delta: float
    """max_i ‖A_i‖_H."""
    delta_index: int
    """The level i attaining δ."""
    c_r: float
    """‖H‖_∞‖H⁻¹‖_∞ max(1, α(R_3, R_3))."""
    bound_holds: bool
    violation: tuple[int, int] | None
    """The first (n, j) breaking the envelope, if any."""

    @property
    def passed(self) -> bool:
        return self.delta < 1 and self.bound_holds

    @property
    def offending_index(self) -> int | None:
        """δ's index when δ >= 1, else the row of the first envelope violation."""
        if self.delta >= 1:
            return self.delta_index
        if self.violation is not None:
            return self.violation[0]
        return None

    def to_csv(self, out: TextIO):
        """Writes `i,r_i,r_im1,alpha,beta,hnorm` rows and a summary row with δ, c_R and the verdict."""
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["i", "r_i", "r_im1", "alpha", "beta", "hnorm"])
        r = self.mesh.ratios
        for i in range(3, self.mesh.N + 1):
            w.writerow(
                [
                    i,
                    f"{r[i]:.17g}",
                    f"{r[i - 1]:.17g}",
                    f"{self.alphas[i]:.17g}",
                    f"{self.betas[i]:.17g}",
                    f"{self.hnorms[i]:.17g}",
                ]
            )
        w.writerow(
            [
                "summary",
                f"delta={self.delta:.17g}",
                f"c_R={self.c_r:.17g}",
                f"verdict={'pass' if self.passed else 'fail'}",
                f"offending={'' if self.offending_index is None else self.offending_index}",
                "",
            ]
        )


def decay_certificate(
    mesh: TimeMesh, doc: DocTable, mu: complex | HNormConfig = MU_STAR
) -> StabilityCertificate:
    """Bounds the BDF3 DOC kernels of `mesh` by a geometric envelope.

    δ is the largest elliptic norm of the companion matrices A_i = A(r_i, r_{i-1}), i >= 3, so
    it reflects the ratios actually present. A failing certificate is a result, not an error.

    Args:
        mesh (TimeMesh): The mesh, every ratio r_2..r_N positive.
        doc (DocTable): Its BDF3 DOC kernels.
        mu (complex | HNormConfig, optional): Transform parameter. Defaults to 1/2 + i/2.

    Raises:
        UnsupportedOrder: `doc` is not a BDF3 table.
        MeshMismatch: `doc` belongs to another mesh.
        InvalidArgument: A ratio is not positive.
    """
    if doc.order != 3:
        err = UnsupportedOrder("decay certificates are for BDF3 DOC kernels")
        err.order = doc.order
        raise err
    if not mesh.same_grid(doc.mesh):
        raise MeshMismatch("the DOC table was built on another mesh")
    N = mesh.N
    r = mesh.ratios
    if not np.all(r[2:] > 0):
        raise InvalidArgument("the certificate needs positive step ratios")
    cfg = mu if isinstance(mu, HNormConfig) else HNormConfig(mu)
    roots = threshold_roots()
    over = int(np.count_nonzero(r[2:] >= roots.r3))
    if over:
        warnings.warn(RatioWarning(f"{over} step ratios reach R3 = {roots.r3:.6f}"), stacklevel=2)

    alphas = np.zeros(N + 1)
    betas = np.zeros(N + 1)
    hnorms = np.zeros(N + 1)
    alphas[3:] = alpha(r[3:], r[2:-1])
    betas[3:] = beta(r[3:], r[2:-1])
    for i in range(3, N + 1):
        hnorms[i] = h_norm(Companion2x2(alphas[i], betas[i]), cfg)
    delta_index = int(np.argmax(hnorms[3:])) + 3 if N >= 3 else 3
    delta = float(hnorms[delta_index]) if N >= 3 else 0.0
    c_r = cfg.h_inf * cfg.h_inv_inf * max(1.0, float(alpha(roots.r3, roots.r3)))

    violation = None
    for j in range(3, N - 1):
        n = np.arange(j + 2, N + 1)
        envelope = c_r * delta ** (n - j - 1.0)
        bad = np.nonzero(np.abs(doc.theta[n, j]) > envelope * (1 + _SLACK))[0]
        if bad.size and (violation is None or n[bad[0]] < violation[0]):
            violation = (int(n[bad[0]]), j)
    cert = StabilityCertificate(
        mesh, cfg.mu, alphas, betas, hnorms, delta, delta_index, c_r, violation is None, violation
    )
    logger.debug(
        "certificate N=%d: delta=%.6f at %d, c_R=%.6f, %s",
        N,
        delta,
        delta_index,
        c_r,
        "pass" if cert.passed else "fail",
    )
    return cert
