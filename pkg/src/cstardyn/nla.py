"""Small dense/sparse linear algebra helpers used throughout the package."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

# below this Frobenius norm the Frobenius value itself is returned as the
# spectral norm of a sparse operator (it is an upper bound and exact enough
# for residual reporting at that scale)
_TINY_FROBENIUS = 1e-9

# sparse matrices up to this many entries are densified for exact norms
_DENSE_CUTOFF = 2_250_000


def frobenius(a) -> float:
    if sp.issparse(a):
        if a.nnz == 0:
            return 0.0
        return float(np.sqrt((abs(a.data) ** 2).sum()))
    return float(np.linalg.norm(np.asarray(a)))


def spectral_norm(a) -> float:
    """Largest singular value of a dense array or sparse matrix."""
    if sp.issparse(a):
        if a.nnz == 0:
            return 0.0
        f = frobenius(a)
        if f < _TINY_FROBENIUS:
            return f
        if a.shape[0] * a.shape[1] <= _DENSE_CUTOFF:
            return float(np.linalg.norm(a.toarray(), 2))
        return _power_norm(a.tocsr())
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def _power_norm(a, iters: int = 200, rtol: float = 1e-10) -> float:
    # deterministic start vector; adequate for the large-but-sparse regime
    n = a.shape[1]
    x = np.full(n, 1.0 / np.sqrt(n), dtype=complex)
    ah = a.conj().T
    sigma = 0.0
    for _ in range(iters):
        y = a @ x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        z = ah @ y
        nz = np.linalg.norm(z)
        new_sigma = nz / ny if ny else 0.0
        if abs(new_sigma - sigma) <= rtol * max(new_sigma, 1e-300):
            return float(new_sigma)
        sigma = new_sigma
        x = z / nz
    return float(sigma)


def singular_values(a: np.ndarray) -> np.ndarray:
    return np.linalg.svd(np.asarray(a), compute_uv=False)


def matrix_rank(a: np.ndarray, rtol: float) -> int:
    s = singular_values(a)
    if s.size == 0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def null_space(a: np.ndarray, rtol: float, floor: float = 0.0) -> np.ndarray:
    """Orthonormal rows spanning the right null space of ``a``.

    Singular values at or below ``rtol`` times the largest one count as
    zero; ``floor`` supplies an absolute reference scale so matrices that
    are numerically zero overall report a full null space.
    """
    a = np.asarray(a, dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.count_nonzero(s > rtol * max(smax, floor)))
    return vh[rank:].conj()


def polar_factor(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unitary factor of the polar decomposition ``a = u |a|`` plus singular values."""
    u, s, vh = np.linalg.svd(np.asarray(a, dtype=complex))
    return u @ vh, s
