"""BDF kernels d^{(k,n)}_j and their discrete orthogonal convolution (DOC) kernels.

`KernelTable.band[n, j]` holds d^{(k,n)}_j and `DocTable.theta[n, j]` holds ϑ^{(k,n)}_{n-j},
so both tables are indexed by time levels and the lower-triangular matrices D_k and Θ_k
are the blocks `[k:, k:]` of their dense forms."""

from dataclasses import dataclass
from typing import Sequence, TextIO
import csv
import logging
import math

import numpy as np

from .exceptions import InvalidArgument, MeshMismatch, UnsupportedOrder
from .mesh import TimeMesh

logger = logging.getLogger(__name__)

SUPPORTED_ORDERS = (1, 2, 3)


def d_coeff(nu: int, x, y):
    """Evaluates the variable-step BDF coefficient functions d_0, d_1 and d_2.

    Works elementwise on arrays. Zero ratios are allowed, d_nu(0, 0) gives the BDF1 weights
    and d_nu(x, 0) the BDF2 weights.

    Args:
        nu (int): Which function, 0, 1 or 2.
        x: The ratio r_n.
        y: The ratio r_{n-1}.

    Raises:
        InvalidArgument: Raised on a negative ratio or an unknown `nu`.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(x < 0) or np.any(y < 0):
        raise InvalidArgument("step ratios must be nonnegative")
    xy = x * y
    tail = xy / (1 + y + xy)
    d2 = x * y * y / (1 + y + xy) * (1 + x) / (1 + y)
    match nu:
        case 0:
            out = (1 + 2 * x) / (1 + x) + tail
        case 1:
            out = -x / (1 + x) - tail - d2
        case 2:
            out = d2
        case _:
            raise InvalidArgument(f"d_nu is defined for nu in 0, 1, 2, not {nu}")
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class KernelTable:
    """The banded BDF-k kernels of one mesh."""

    order: int
    band: np.ndarray
    """Shape (N+1, k). `band[n, j]` is d^{(k,n)}_j for n >= k; rows below k are zero."""
    mesh: TimeMesh

    @property
    def N(self) -> int:
        return self.mesh.N

    @property
    def leading(self) -> np.ndarray:
        """d^{(k,n)}_0 indexed by n."""
        return self.band[:, 0]

    def coefficient(self, n: int, j: int) -> float:
        """d^{(k,n)}_j, zero outside the band."""
        if j < 0 or j >= self.order or n < self.order:
            return 0.0
        return float(self.band[n, j])

    def to_dense(self) -> np.ndarray:
        """The (N-k+1)x(N-k+1) lower-triangular matrix D_k."""
        k, N = self.order, self.N
        m = N - k + 1
        D = np.zeros((m, m))
        for j in range(k):
            idx = np.arange(j, m)
            D[idx, idx - j] = self.band[k + j :, j]
        return D


@dataclass(frozen=True, eq=False)
class DocTable:
    """DOC kernels of one kernel table, with the rescaled kernels for k = 3."""

    order: int
    theta: np.ndarray
    """Shape (N+1, N+1). `theta[n, j]` is ϑ^{(k,n)}_{n-j} for k <= j <= n; zero elsewhere."""
    theta_hat: np.ndarray | None
    """ϑ^{(3,n)}_{n-j}·d^{(3,j)}_0 in the same layout, only for k = 3."""
    mesh: TimeMesh

    @property
    def N(self) -> int:
        return self.mesh.N

    def row(self, n: int) -> np.ndarray:
        """ϑ^{(k,n)}_{n-j} for j = k..n."""
        return self.theta[n, self.order : n + 1]

    def to_dense(self) -> np.ndarray:
        """The lower-triangular matrix Θ_k."""
        return self.theta[self.order :, self.order :].copy()


def build_kernel_table(k: int, mesh: TimeMesh) -> KernelTable:
    """Fills the BDF-k kernel band for every level k <= n <= N.

    Rows use d_j(0, 0) for k = 1, d_j(r_n, 0) for k = 2 and d_j(r_n, r_{n-1}) for k = 3.

    Raises:
        UnsupportedOrder: `k` is not 1, 2 or 3.
        InvalidArgument: the mesh has fewer than k steps.
    """
    if k not in SUPPORTED_ORDERS:
        err = UnsupportedOrder(f"BDF kernels are provided for k in 1, 2, 3, not {k}")
        err.order = k
        raise err
    N = mesh.N
    if N < k:
        raise InvalidArgument(f"BDF{k} needs at least {k} steps, the mesh has {N}")
    levels = np.arange(k, N + 1)
    x = mesh.ratios[levels] if k >= 2 else np.zeros(levels.size)
    y = mesh.ratios[levels - 1] if k == 3 else np.zeros(levels.size)
    band = np.zeros((N + 1, k))
    for j in range(k):
        band[k:, j] = d_coeff(j, x, y)
    band.flags.writeable = False
    return KernelTable(k, band, mesh)


def difference_quotients(mesh: TimeMesh, values) -> np.ndarray:
    """∂_τ v^j = (v^j - v^{j-1})/τ_j at index j; index 0 is zero."""
    v = np.asarray(values, dtype=np.float64)
    if v.shape[0] != mesh.N + 1:
        raise InvalidArgument(f"expected {mesh.N + 1} values, got {v.shape[0]}")
    dv = np.zeros_like(v)
    tau = mesh.steps[1:].reshape((-1,) + (1,) * (v.ndim - 1))
    dv[1:] = (v[1:] - v[:-1]) / tau
    return dv


def apply_bdf(table: KernelTable, values) -> np.ndarray:
    """Applies D_k to a sequence v^0..v^N.

    Args:
        table (KernelTable): The kernels of the mesh the values live on.
        values: Array of shape (N+1,) or (N+1, d).

    Returns:
        `np.ndarray` - D_k v^n for n = k..N, one row per level.
    """
    k, N = table.order, table.N
    dv = difference_quotients(table.mesh, values)
    out = np.zeros((N - k + 1,) + dv.shape[1:])
    shape = (-1,) + (1,) * (dv.ndim - 1)
    for j in range(k):
        out += table.band[k:, j].reshape(shape) * dv[k - j : N + 1 - j]
    return out


def build_doc_table(table: KernelTable) -> DocTable:
    """Runs the DOC recursion ϑ_0 = 1/d_0, ϑ^{(k,n)}_{n-j} = -(1/d^{(k,j)}_0) Σ_i ϑ^{(k,n)}_{n-i} d^{(k,i)}_{i-j}.

    Columns are filled from j = N down to k; each column is computed for every row at once,
    only the k-1 nonzero kernel entries of the band enter the sum.
    """
    k, N = table.order, table.N
    d0 = table.leading
    theta = np.zeros((N + 1, N + 1))
    for j in range(N, k - 1, -1):
        theta[j, j] = 1.0 / d0[j]
        if j == N:
            continue
        acc = np.zeros(N - j)
        for l in range(1, min(k, N - j + 1)):
            i = j + l
            acc += theta[j + 1 :, i] * table.band[i, l]
        theta[j + 1 :, j] = -acc / d0[j]
    theta_hat = None
    if k == 3:
        theta_hat = theta * d0[np.newaxis, :]
        theta_hat.flags.writeable = False
    theta.flags.writeable = False
    return DocTable(k, theta, theta_hat, table.mesh)


def _check_pair(kernel: KernelTable, doc: DocTable):
    if kernel.order != doc.order or not kernel.mesh.same_grid(doc.mesh):
        raise MeshMismatch("kernel and DOC tables belong to different meshes or orders")


def orthogonality_residuals(kernel: KernelTable, doc: DocTable) -> tuple[float, float]:
    """Returns (max|Θ_k D_k - I|, max|D_k Θ_k - I|)."""
    _check_pair(kernel, doc)
    D = kernel.to_dense()
    Theta = doc.to_dense()
    eye = np.eye(D.shape[0])
    return float(np.abs(Theta @ D - eye).max()), float(np.abs(D @ Theta - eye).max())


def verify_orthogonality(kernel: KernelTable, doc: DocTable) -> float:
    """The larger residual of the orthogonality and the mutual orthogonality identities.

    Raises:
        MeshMismatch: The tables were built on different meshes.
    """
    return max(orthogonality_residuals(kernel, doc))


def doc_sum_bdf2(doc: DocTable, n: int) -> float:
    """Σ_{j=2}^n ϑ^{(2,n)}_{n-j}, which equals 1 - Π_{i=2}^n r_i/(1+2r_i) < 1.

    Raises:
        UnsupportedOrder: The table is not a BDF2 table.
        InvalidArgument: n is outside 2..N.
    """
    if doc.order != 2:
        err = UnsupportedOrder("the summation identity holds for BDF2 DOC kernels only")
        err.order = doc.order
        raise err
    if not 2 <= n <= doc.N:
        raise InvalidArgument(f"n must lie in 2..{doc.N}, got {n}")
    return float(doc.theta[n, 2 : n + 1].sum())


def starting_effect(
    kernel: KernelTable, doc: DocTable, start_diffs: Sequence, n: int
) -> float | np.ndarray:
    """The starting term I_k^n[v] = Σ_{j<k} ∂_τv^j Σ_{i=k}^n ϑ^{(k,n)}_{n-i} d^{(k,i)}_{i-j}.

    Args:
        kernel (KernelTable): BDF kernels.
        doc (DocTable): DOC kernels on the same mesh.
        start_diffs (Sequence): ∂_τv^1..∂_τv^{k-1}, scalars or vectors.
        n (int): The level, k <= n <= N.
    """
    _check_pair(kernel, doc)
    k = kernel.order
    if not k <= n <= kernel.N:
        raise InvalidArgument(f"n must lie in {k}..{kernel.N}, got {n}")
    diffs = np.asarray(start_diffs, dtype=np.float64)
    if diffs.shape[:1] != (k - 1,):
        raise InvalidArgument(f"BDF{k} takes {k - 1} starting differences")
    total = np.zeros(diffs.shape[1:])
    for j in range(1, k):
        weight = 0.0
        for i in range(k, min(n, j + k - 1) + 1):
            weight += doc.theta[n, i] * kernel.band[i, i - j]
        total = total + weight * diffs[j - 1]
    return float(total) if total.ndim == 0 else total


def abs_row_and_column_sums(doc: DocTable) -> tuple[float, float]:
    """max_n Σ_j |ϑ^{(k,n)}_{n-j}| and max_i Σ_{j>=i} |ϑ^{(k,j)}_{j-i}|.

    Both are bounded by a constant independent of n when the BDF3 ratios stay below R_3;
    the larger of the two serves as an empirical value for that constant.
    """
    a = np.abs(doc.theta)
    return float(a.sum(axis=1).max()), float(a.sum(axis=0).max())


def bdf2_doc_product(mesh: TimeMesh) -> np.ndarray:
    """BDF2 DOC kernels from the product formula (1/d^{(2,j)}_0) Π_{i=j+1}^n r_i/(1+2r_i)."""
    N = mesh.N
    r = mesh.ratios
    d0 = d_coeff(0, r, 0.0)
    q = r / (1 + 2 * r)
    theta = np.zeros((N + 1, N + 1))
    for j in range(2, N + 1):
        theta[j, j] = 1.0 / d0[j]
        theta[j + 1 :, j] = np.cumprod(q[j + 1 :]) / d0[j]
    return theta


def uniform_bdf3_doc(N: int) -> np.ndarray:
    """BDF3 DOC kernels of a uniform mesh from the roots λ = (7 ± i√39)/22.

    ϑ^{(3,n)}_{n-j} = (11i/(d_0√39))(λ̄^{n-j+1} - λ^{n-j+1}) with d_0 = 11/6, in the
    `DocTable.theta` layout."""
    if N < 3:
        raise InvalidArgument("BDF3 needs at least 3 steps")
    root = complex(7.0, math.sqrt(39.0)) / 22.0
    d0 = 11.0 / 6.0
    lag = np.arange(N - 2)
    vals = (11j / (d0 * math.sqrt(39.0))) * (
        np.conj(root) ** (lag + 1) - root ** (lag + 1)
    )
    theta = np.zeros((N + 1, N + 1))
    for j in range(3, N + 1):
        theta[j:, j] = vals[: N + 1 - j].real
    return theta


def doc_to_csv(doc: DocTable, out: TextIO):
    """Writes `n,j,theta,theta_hat` rows for k <= j <= n; theta_hat is empty for k != 3."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "j", "theta", "theta_hat"])
    for n in range(doc.order, doc.N + 1):
        for j in range(doc.order, n + 1):
            hat = "" if doc.theta_hat is None else f"{doc.theta_hat[n, j]:.17g}"
            w.writerow([n, j, f"{doc.theta[n, j]:.17g}", hat])
