"""Small dense real-matrix numerics: symmetric parts, extreme eigenvalues,
definiteness and Kronecker block structure.

Orders stay at most 3n with n small, so eigenvalues come from cyclic Jacobi
sweeps, which converge for every symmetric input.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionError

logger = logging.getLogger(__name__)

JACOBI_MAX_SWEEPS = 100
DEFINITENESS_BAND = 1e-12


@dataclass(frozen=True)
class SymMatrix:
    """Symmetric matrix; build it with sym_part, never from raw entries"""

    entries: NDArray[np.float64]

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    def quadratic_form(self, x: ArrayLike) -> float:
        v = np.asarray(x, dtype=float)
        return float(v @ self.entries @ v)


def as_square(M: ArrayLike) -> NDArray[np.float64]:
    """Return M as a finite float square matrix or raise DimensionError"""
    arr = np.atleast_2d(np.asarray(M, dtype=float))
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionError("matrix has non-finite entries")
    return arr


def sym_part(M: ArrayLike) -> SymMatrix:
    """(M + M^T) / 2; entries[i, j] and entries[j, i] are bit-identical"""
    arr = as_square(M)
    entries = (arr + arr.T) / 2.0
    entries.setflags(write=False)
    return SymMatrix(entries)


def jacobi_eigenvalues(S: SymMatrix) -> NDArray[np.float64]:
    """All eigenvalues of S, ascending, by cyclic Jacobi rotations"""
    a = np.array(S.entries, dtype=float)
    n = a.shape[0]
    if n == 1:
        return a[0].copy()

    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n)

    for sweep in range(JACOBI_MAX_SWEEPS):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
    else:
        logger.warning("Jacobi iteration hit %d sweeps", JACOBI_MAX_SWEEPS)

    return np.sort(np.diag(a))


def eig_extremes(S: SymMatrix) -> tuple[float, float]:
    """(lambda_min, lambda_max) of a symmetric matrix"""
    eigs = jacobi_eigenvalues(S)
    return float(eigs[0]), float(eigs[-1])


def spectral_norm(M: ArrayLike) -> float:
    """Induced 2-norm: sqrt(lambda_max(M^T M))"""
    arr = as_square(M)
    _, lam_max = eig_extremes(sym_part(arr.T @ arr))
    return float(np.sqrt(max(lam_max, 0.0)))


def definiteness_margin(S: SymMatrix) -> float:
    """Signed margin lambda_min(S); callers decide borderline cases"""
    return eig_extremes(S)[0]


def is_positive_definite(S: SymMatrix) -> bool:
    """True iff the Cholesky factorization succeeds with positive pivots"""
    try:
        L = np.linalg.cholesky(S.entries)
    except np.linalg.LinAlgError:
        return False
    return bool(np.all(np.diag(L) > 0.0))


def kron3_with_identity(C: ArrayLike, n: int) -> SymMatrix:
    """C (x) I_n: block (i, j) is C[i][j] * I_n"""
    if n < 1:
        raise DimensionError(f"identity order must be >= 1, got {n}")
    arr = as_square(C)
    if arr.shape != (3, 3):
        raise DimensionError(f"expected a 3x3 core, got shape {arr.shape}")
    return sym_part(np.kron(arr, np.eye(n)))
