"""Polynomial evaluation matrices at the sample nodes.

Two constructions are provided: plain monomial columns, and columns
orthonormalized under a weighted inner product by an Arnoldi recurrence
on multiplication-by-x (stable even where the Vandermonde matrix is
hopelessly ill-conditioned).  The recurrence coefficients are kept so the
same polynomial basis can be re-evaluated at arbitrary points or expanded
back into monomial coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankBreakdown

# A recurrence norm this far below the pre-orthogonalization norm means the
# weighted nodes cannot support the next degree.
BREAKDOWN_RTOL = 1e-14

MONOMIAL = "monomial"
ARNOLDI = "arnoldi"


@dataclass(frozen=True)
class BasisMatrix:
    """Evaluation matrix of a degree-graded polynomial basis.

    entries[j, i] is the i-th basis polynomial at node j.  For the arnoldi
    kind, ``recurrence`` is the (deg+2) x (deg+1) upper-Hessenberg
    coefficient matrix that regenerates the columns: column 0 is the
    constant vector divided by recurrence[0, 0], and column k is
    (x * column_{k-1} - sum_j recurrence[j, k] * column_j) / recurrence[k, k].
    """

    entries: np.ndarray
    kind: str
    deg: int
    recurrence: np.ndarray | None = None

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.complex128)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        if self.recurrence is not None:
            rec = np.asarray(self.recurrence, dtype=np.complex128)
            rec.setflags(write=False)
            object.__setattr__(self, "recurrence", rec)

    @property
    def m(self) -> int:
        return self.entries.shape[0]


def build_monomial(nodes, deg: int) -> BasisMatrix:
    """Vandermonde matrix: entries[j, i] = nodes[j] ** i."""
    nodes = np.atleast_1d(np.asarray(nodes, dtype=np.complex128))
    if deg < 0:
        raise ValueError("deg must be nonnegative")
    return BasisMatrix(np.vander(nodes, deg + 1, increasing=True), MONOMIAL, deg)


def build_arnoldi(nodes, deg: int, weights) -> BasisMatrix:
    """Basis with columns orthonormal in the weighted inner product
    <u, v> = sum_j w_j * conj(u_j) * v_j.

    Requires at least deg+1 strictly positive weights; raises RankBreakdown
    when the recurrence norm collapses before deg+1 columns exist.
    """
    nodes = np.atleast_1d(np.asarray(nodes, dtype=np.complex128))
    w = np.atleast_1d(np.asarray(weights, dtype=np.float64))
    if deg < 0:
        raise ValueError("deg must be nonnegative")
    m = nodes.size
    if w.size != m:
        raise ValueError("weights length must match nodes")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    total = w.sum()
    if total <= 0:
        raise ValueError("weights must not all vanish")
    w = w / total
    if int(np.count_nonzero(w)) < deg + 1:
        raise RankBreakdown(
            f"{np.count_nonzero(w)} positive weights cannot support degree {deg}"
        )

    Q = np.zeros((m, deg + 1), dtype=np.complex128)
    H = np.zeros((deg + 2, deg + 1), dtype=np.complex128)

    def wnorm(v):
        return float(np.sqrt(np.real(np.vdot(v, w * v))))

    H[0, 0] = wnorm(np.ones(m))
    Q[:, 0] = 1.0 / H[0, 0]
    for k in range(1, deg + 1):
        v = nodes * Q[:, k - 1]
        scale = wnorm(v)
        for j in range(k):
            H[j, k] = np.vdot(Q[:, j], w * v)
            v = v - H[j, k] * Q[:, j]
        nrm = wnorm(v)
        if nrm <= BREAKDOWN_RTOL * scale or scale == 0.0:
            raise RankBreakdown(
                f"recurrence norm {nrm:.3e} under {BREAKDOWN_RTOL:g} * {scale:.3e} "
                f"at column {k}"
            )
        H[k, k] = nrm
        Q[:, k] = v / nrm
    return BasisMatrix(Q, ARNOLDI, deg, recurrence=H)


def evaluate_basis(basis: BasisMatrix, points) -> np.ndarray:
    """Evaluate the basis polynomials at new points (one row per point)."""
    points = np.atleast_1d(np.asarray(points, dtype=np.complex128))
    if basis.kind == MONOMIAL:
        return np.vander(points, basis.deg + 1, increasing=True)
    H = basis.recurrence
    E = np.zeros((points.size, basis.deg + 1), dtype=np.complex128)
    E[:, 0] = 1.0 / H[0, 0]
    for k in range(1, basis.deg + 1):
        v = points * E[:, k - 1]
        for j in range(k):
            v = v - H[j, k] * E[:, j]
        E[:, k] = v / H[k, k]
    return E


def monomial_coefficients(basis: BasisMatrix, coeffs) -> np.ndarray:
    """Expand a coefficient vector in this basis into monomial coordinates.

    For an arnoldi basis the recurrence is replayed in coefficient space;
    basis polynomial k has exact degree k, so the change of basis is
    triangular.
    """
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=np.complex128))
    if coeffs.size != basis.deg + 1:
        raise ValueError("coefficient length must be deg + 1")
    if basis.kind == MONOMIAL:
        return coeffs.copy()
    H = basis.recurrence
    n = basis.deg + 1
    # tri[k] holds the monomial coefficients of basis polynomial k
    tri = np.zeros((n, n), dtype=np.complex128)
    tri[0, 0] = 1.0 / H[0, 0]
    for k in range(1, n):
        v = np.zeros(n, dtype=np.complex128)
        v[1 : k + 1] = tri[k - 1, :k]  # multiply by x
        for j in range(k):
            v = v - H[j, k] * tri[j]
        tri[k] = v / H[k, k]
    return tri.T @ coeffs
