"""Measurement matrices and the dense linear-algebra kernels behind them."""

import logging
from dataclasses import dataclass

import numpy as np

from widthlab import rng
from widthlab.exceptions import DomainError

log = logging.getLogger(__name__)

TOL_KERNEL = 1e-8
TOL_ORTH = 1e-8
TOL_SYMMETRY = 1e-10


def as_matrix(A):
    """Validate ``A`` as a finite 2-d float array with at least one row and column."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[None, :]
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise DomainError(f"expected an m x N matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has non-finite entries")
    return A


def gaussian_matrix(m, N, seed):
    """m x N matrix with iid N(0, 1/m) entries, a pure function of (m, N, seed).

    Entries are laid out row-major from the Box-Muller stream keyed by
    ``(seed, "gaussian", m, N)``.
    """
    m, N = int(m), int(N)
    if m < 1 or N < 1:
        raise DomainError(f"need m, N >= 1, got {m}, {N}")
    g = rng.gaussians(seed, ("gaussian", m, N), m * N)
    return g.reshape(m, N) / np.sqrt(m)


def orthonormal_rows_matrix(m, N, seed):
    """sqrt(N/m) Q with Q the row-orthonormalized ``gaussian_matrix(m, N, seed)`` (m <= N).

    Rows are Gram-Schmidt orthonormalized in order (QR with R's diagonal made
    positive), so this is a uniformly random partial isometry scaled to unit
    average column norm.
    """
    m, N = int(m), int(N)
    if not 1 <= m <= N:
        raise DomainError(f"need 1 <= m <= N, got {m}, {N}")
    Q, R = np.linalg.qr(gaussian_matrix(m, N, seed).T)
    Q = Q * np.where(np.diag(R) < 0, -1.0, 1.0)
    return np.sqrt(N / m) * Q.T


MATRIX_ENSEMBLES = {
    "gaussian": gaussian_matrix,
    "orthonormal-rows": orthonormal_rows_matrix,
    "zero": lambda m, N, seed: np.zeros((int(m), int(N))),
}


def ensemble_matrix(ensemble, m, N, seed):
    try:
        return MATRIX_ENSEMBLES[ensemble](m, N, seed)
    except KeyError:
        raise DomainError(f"unknown matrix ensemble {ensemble!r}") from None


def zero_matrix(m, N):
    return np.zeros((int(m), int(N)))


def full_rank_gaussian(m, N, seed, max_attempts=16):
    """Gaussian matrix of rank min(m, N); reseeds (and logs) on rank loss."""
    for attempt in range(max_attempts):
        s = seed if attempt == 0 else rng.derive_seed(seed, "reseed", attempt)
        A = gaussian_matrix(m, N, s)
        if matrix_rank(A) == min(m, N):
            return A, s
        log.warning("gaussian_matrix(%d, %d, %d) rank deficient, reseeding", m, N, s)
    raise RuntimeError("could not draw a full rank gaussian matrix")


def rank_tolerance(A, singular_values):
    smax = singular_values[0] if singular_values.size else 0.0
    return A.shape[1] * np.finfo(float).eps * smax


def matrix_rank(A):
    A = as_matrix(A)
    sv = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(sv > rank_tolerance(A, sv))) if sv.size else 0


def kernel_basis(A):
    """Orthonormal basis of ker A as the columns of an N x k array.

    Rank is decided by the threshold N * eps * sigma_max.  Each column is
    signed so that its largest-magnitude entry is positive.
    """
    A = as_matrix(A)
    N = A.shape[1]
    _, sv, vt = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(sv > rank_tolerance(A, sv)))
    V = vt[rank:].T.copy()
    if V.shape[1]:
        pivots = np.argmax(np.abs(V), axis=0)
        V *= np.sign(V[pivots, np.arange(V.shape[1])])
    return V.reshape(N, N - rank)


def kernel_vector_on(A, support):
    """A unit vector of ker A supported on ``support`` (0-based), or None."""
    A = as_matrix(A)
    support = np.asarray(support, dtype=int)
    V = kernel_basis(A[:, support])
    if V.shape[1] == 0:
        return None
    v = np.zeros(A.shape[1])
    v[support] = V[:, 0]
    return v


@dataclass
class LeastSquaresResult:
    coef: np.ndarray
    residual: float
    rank_deficient: bool


def least_squares_on_support(A, y, support):
    """Minimize ||A_S z_S - y||_2 over z_S via an orthogonal factorization.

    Rank-deficient column subsets are flagged and the minimum-norm
    solution is returned.
    """
    A = as_matrix(A)
    y = np.asarray(y, dtype=float)
    support = np.asarray(support, dtype=int)
    if support.size > A.shape[0]:
        raise DomainError(f"|S| = {support.size} exceeds m = {A.shape[0]}")
    if support.size == 0:
        return LeastSquaresResult(np.zeros(0), float(np.linalg.norm(y)), False)
    As = A[:, support]
    coef, _, rank, _ = np.linalg.lstsq(As, y, rcond=None)
    residual = float(np.linalg.norm(As @ coef - y))
    return LeastSquaresResult(coef, residual, rank < support.size)


def symmetric_eig_extremes(G, tol=TOL_SYMMETRY):
    """(lambda_min, lambda_max) of a symmetric matrix."""
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {G.shape}")
    scale = max(1.0, float(np.max(np.abs(G))) if G.size else 1.0)
    if np.max(np.abs(G - G.T), initial=0.0) > tol * scale:
        raise DomainError("matrix is not symmetric")
    w = np.linalg.eigvalsh(0.5 * (G + G.T))
    return float(w[0]), float(w[-1])


def batched_gram_extremes(A, supports):
    """Extreme eigenvalues of A_S^T A_S for a stack of equal-size supports."""
    cols = A[:, supports]  # (m, n, s)
    gram = np.einsum("mni,mnj->nij", cols, cols)
    w = np.linalg.eigvalsh(gram)
    return w[:, 0], w[:, -1]
