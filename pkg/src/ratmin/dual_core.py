"""Dual objective d2(w) and its certificate quantities.

For a weight vector w on the probability simplex, d2(w) is the minimum of
sum_j w_j |f_j q(x_j) - p(x_j)|^2 over numerator/denominator coefficient
pairs subject to sum_j w_j |q(x_j)|^2 = 1.  It equals the smallest
eigenvalue of a Hermitian positive semidefinite pencil (A_w, B_w); the
primary evaluation path reduces that pencil by thin QR factorizations of
the weighted basis matrices to a small Hermitian eigenproblem, while
``eval_dual_dense`` solves the full pencil directly and serves as an
independent cross-check.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .basis import BasisMatrix
from .errors import DegenerateDenominator, NotDifferentiable, SupportTooSmall
from .problem import SampleSet

logger = logging.getLogger("ratmin.dual_core")

# Smallest-eigenvalue gap below this (relative) means the gradient formula
# is unreliable.
SIMPLICITY_RTOL = 1e-8

# Denominator magnitudes below q_floor(q) are never divided by directly.
Q_FLOOR_ABS = 1e-300
Q_FLOOR_RTOL = 1e-14


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative weights renormalized to sum to one (the dual variable)."""

    w: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.w, dtype=np.float64))
        if w.ndim != 1:
            raise ValueError("weights must be one-dimensional")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        total = w.sum()
        if total <= 0:
            raise ValueError("weights must not all vanish")
        if abs(total - 1.0) > 1e-12:
            w = w / total
        else:
            w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @classmethod
    def uniform(cls, m: int) -> "WeightVector":
        return cls(np.full(m, 1.0 / m))

    @property
    def m(self) -> int:
        return self.w.size

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.w > 0.0)

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.w))


@dataclass(frozen=True)
class DualSolution:
    """Minimizing pair for d2(w) and the quantities certifying it.

    a, b are coefficient vectors in the bases used for the solve; p, q are
    their node values; residual_abs[j] = |f_j - p_j / q_j| with 0/0 read as
    zero.  eig_gap is the distance from d2 to the next eigenvalue of the
    reduced matrix, and ``simple`` records whether that gap clears the
    simplicity threshold.  a1_suspect marks near-vanishing denominator
    values; clamped marks a tiny negative eigenvalue clamped to zero.
    """

    d2: float
    a: np.ndarray
    b: np.ndarray
    p: np.ndarray
    q: np.ndarray
    residual_abs: np.ndarray
    eig_gap: float
    simple: bool
    a1_suspect: bool = False
    clamped: bool = False


def q_floor(q: np.ndarray) -> float:
    return Q_FLOOR_ABS + Q_FLOOR_RTOL * float(np.abs(q).max(initial=0.0))


def abs_residuals(values: np.ndarray, p: np.ndarray, q: np.ndarray):
    """Per-node |f - p/q| under the 0/0 -> 0 convention.

    Where |q| falls below the floor but |f q - p| does not, the residual is
    reported as |f q - p| / floor and the result is flagged suspect; exact
    or near-exact zeros are never divided by.
    """
    aq = np.abs(q)
    num = np.abs(values * q - p)
    guard = q_floor(q)
    r = np.zeros_like(aq)
    ok = aq >= guard
    r[ok] = num[ok] / aq[ok]
    bad = ~ok & (num >= guard)
    if np.any(bad):
        r[bad] = num[bad] / guard
    return r, bool(np.any(bad))


def assemble_pencil(samples: SampleSet, psi: BasisMatrix, phi: BasisMatrix,
                    w: WeightVector):
    """Hermitian pencil (A, B) whose smallest eigenvalue is d2(w).

    A = [-Psi, F*Phi]^H W [-Psi, F*Phi] and B = [0, Phi]^H W [0, Phi];
    both are symmetrized on output.
    """
    M = np.hstack([-psi.entries, samples.values[:, None] * phi.entries])
    WM = w.w[:, None] * M
    A = M.conj().T @ WM
    A = 0.5 * (A + A.conj().T)
    n1p = psi.entries.shape[1]
    n2p = phi.entries.shape[1]
    B = np.zeros((n1p + n2p, n1p + n2p), dtype=np.complex128)
    G = phi.entries.conj().T @ (w.w[:, None] * phi.entries)
    B[n1p:, n1p:] = 0.5 * (G + G.conj().T)
    return A, B


def _thin_qr(M: np.ndarray):
    """Rank-revealing thin QR: returns Q (m x r) and R (r x n) with M = Q R.

    A column is dropped when its pivoted diagonal magnitude falls below
    m * eps * (largest diagonal magnitude).
    """
    m, n = M.shape
    Q, R, piv = sla.qr(M, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return Q[:, :0], np.zeros((0, n), dtype=np.complex128)
    rank = int(np.sum(diag >= m * np.finfo(np.float64).eps * diag[0]))
    Rfull = np.zeros((rank, n), dtype=np.complex128)
    Rfull[:, piv] = R[:rank, :]
    return Q[:, :rank], Rfull


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude entry (lowest index on ties) is real
    and positive."""
    i = int(np.argmax(np.abs(v)))
    pivot = v[i]
    if pivot == 0:
        return v
    return v * (np.conj(pivot) / np.abs(pivot))


def _check_a2(psi: BasisMatrix, phi: BasisMatrix, w: WeightVector) -> None:
    need = max(psi.deg + 1, phi.deg + 1)
    if w.support_size < need:
        raise SupportTooSmall(
            f"{w.support_size} positive weights, need at least {need}"
        )


def eval_dual(samples: SampleSet, psi: BasisMatrix, phi: BasisMatrix,
              w: WeightVector) -> DualSolution:
    """Evaluate d2(w) through the reduced Hermitian eigenproblem.

    Thin QR factorizations sqrt(W) Phi = Q_q R_q and sqrt(W) Psi = Q_p R_p
    (with rank detection) reduce the pencil to the Hermitian matrix
    S_F - S_qp S_qp^H of size rank(sqrt(W) Phi), whose smallest eigenpair
    gives d2 and R_q b; then R_p a = S_qp^H R_q b.  Coefficients are
    recovered through the triangular factors (minimum-norm when rank
    deficient).
    """
    _check_a2(psi, phi, w)
    sw = np.sqrt(w.w)
    Qq, Rq = _thin_qr(sw[:, None] * phi.entries)
    if Qq.shape[1] == 0:
        raise DegenerateDenominator(
            "weighted denominator basis has rank zero; cannot normalize"
        )
    Qp, Rp = _thin_qr(sw[:, None] * psi.entries)

    f = samples.values
    SF = Qq.conj().T @ (np.abs(f)[:, None] ** 2 * Qq)
    Sqp = Qq.conj().T @ (np.conj(f)[:, None] * Qp)
    M = SF - Sqp @ Sqp.conj().T
    M = 0.5 * (M + M.conj().T)
    lam, vec = np.linalg.eigh(M)
    d2 = float(lam[0])
    clamped = d2 < 0.0
    if clamped:
        if d2 < -1e-12:
            logger.warning("smallest eigenvalue %.3e clamped to 0", d2)
        d2 = 0.0
    gap = float(lam[1] - lam[0]) if lam.size > 1 else np.inf
    y = _fix_phase(vec[:, 0])

    b = np.linalg.lstsq(Rq, y, rcond=None)[0]
    a = (np.linalg.lstsq(Rp, Sqp.conj().T @ y, rcond=None)[0]
         if Qp.shape[1] > 0 else np.zeros(psi.deg + 1, dtype=np.complex128))
    p = psi.entries @ a
    q = phi.entries @ b
    r, suspect = abs_residuals(f, p, q)
    return DualSolution(
        d2=d2, a=a, b=b, p=p, q=q, residual_abs=r,
        eig_gap=gap, simple=bool(gap > SIMPLICITY_RTOL * max(1.0, d2)),
        a1_suspect=suspect, clamped=clamped,
    )


def eval_dual_dense(samples: SampleSet, psi: BasisMatrix, phi: BasisMatrix,
                    w: WeightVector) -> DualSolution:
    """Evaluate d2(w) from the full pencil (A, B), deflating the nullspace
    of B (the infinite eigenvalues).

    Used as an independent cross-check of ``eval_dual``: the eigenvector is
    normalized as c^H B c = 1 and the smallest finite nonnegative
    eigenvalue is returned.
    """
    _check_a2(psi, phi, w)
    A, B = assemble_pencil(samples, psi, phi, w)
    lam, U = np.linalg.eigh(B)
    lam = np.clip(lam, 0.0, None)
    tol = B.shape[0] * np.finfo(np.float64).eps * (lam[-1] if lam.size else 0.0)
    keep = lam > tol
    rank = int(np.count_nonzero(keep))
    if rank == 0:
        raise DegenerateDenominator(
            "weighted denominator Gram matrix has rank zero; cannot normalize"
        )
    Y = U[:, keep] / np.sqrt(lam[keep])[None, :]   # range of B, scaled
    Un = U[:, ~keep]                               # nullspace of B
    T11 = Y.conj().T @ A @ Y
    T12 = Y.conj().T @ A @ Un
    T22 = Un.conj().T @ A @ Un
    T22inv = sla.pinvh(T22) if Un.shape[1] else np.zeros((0, 0))
    S = T11 - T12 @ T22inv @ T12.conj().T
    S = 0.5 * (S + S.conj().T)
    mu, V = np.linalg.eigh(S)
    d2 = float(mu[0])
    clamped = d2 < 0.0
    if clamped:
        d2 = 0.0
    gap = float(mu[1] - mu[0]) if mu.size > 1 else np.inf
    z = V[:, 0]
    c = Y @ z
    if Un.shape[1]:
        c = c - Un @ (T22inv @ (T12.conj().T @ z))
    n1p = psi.entries.shape[1]
    a = c[:n1p]
    b = c[n1p:]
    i = int(np.argmax(np.abs(b)))
    if np.abs(b[i]) > 0:
        phase = np.conj(b[i]) / np.abs(b[i])
        a = a * phase
        b = b * phase
    p = psi.entries @ a
    q = phi.entries @ b
    r, suspect = abs_residuals(samples.values, p, q)
    return DualSolution(
        d2=d2, a=a, b=b, p=p, q=q, residual_abs=r,
        eig_gap=gap, simple=bool(gap > SIMPLICITY_RTOL * max(1.0, d2)),
        a1_suspect=suspect, clamped=clamped,
    )


def gradient_d2(sol: DualSolution, w: WeightVector, samples: SampleSet,
                force: bool = False) -> np.ndarray:
    """Gradient of d2 with respect to the weights:
    entry j = |f_j q_j - p_j|^2 - d2 |q_j|^2.

    Valid only where d2 is a simple eigenvalue and all weights are strictly
    positive; ``force`` returns the formula value anyway (unreliable).
    """
    if not force:
        if not sol.simple:
            raise NotDifferentiable("smallest eigenvalue is not simple")
        if w.support_size < w.m:
            raise NotDifferentiable("weights on the simplex boundary")
    return (np.abs(samples.values * sol.q - sol.p) ** 2
            - sol.d2 * np.abs(sol.q) ** 2)


def optimality_residuals(sol: DualSolution, samples: SampleSet,
                         w: WeightVector, psi: BasisMatrix,
                         phi: BasisMatrix):
    """Scaled norms of the two stationarity conditions of the minimization:
    F q - p orthogonal to the numerator space and
    F^H (F q - p) - d2 q orthogonal to the denominator space, both in the
    weighted inner product.

    Each residual is divided by the product of the norms of its factors, so
    values are in [0, 1] and solver outputs should sit near roundoff.
    """
    f = samples.values
    sw = np.sqrt(w.w)
    e1 = f * sol.q - sol.p
    e2 = np.conj(f) * e1 - sol.d2 * sol.q

    def scaled(basis_entries, vec):
        num = float(np.linalg.norm(basis_entries.conj().T @ (w.w * vec)))
        den = (float(np.linalg.norm(sw[:, None] * basis_entries))
               * float(np.linalg.norm(sw * vec)))
        return num / den if den > 0 else 0.0

    return scaled(psi.entries, e1), scaled(phi.entries, e2)
