"""Small dense linear-algebra helpers and the shared tolerance conventions."""

import numpy as np
import scipy.linalg

from .errors import ContractError, FactorizationError

EPS = np.finfo(float).eps

# Relative slack for positive-semidefiniteness: lambda_min >= -PSD_RTOL * ||A||_2.
PSD_RTOL = 1e-10


def as_matrix(a, name="matrix"):
    m = np.array(a, dtype=float, copy=True)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise ContractError(f"{name} must be two-dimensional, got shape {m.shape}")
    return m


def frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


def symmetrize(a):
    return 0.5 * (a + a.T)


def singular_values(b):
    if b.size == 0:
        return np.zeros(0)
    return scipy.linalg.svdvals(b)


def rank_tol(s, shape):
    """Numerical-rank threshold: max(rows, cols) * eps * sigma_max."""
    if s.size == 0:
        return 0.0
    return max(shape) * EPS * s[0]


def numerical_rank(b):
    s = singular_values(b)
    return int(np.sum(s > rank_tol(s, b.shape))) if s.size else 0


def nullity(b):
    """Rank deficiency ``min(rows, cols) - rank`` of a rectangular block."""
    return min(b.shape) - numerical_rank(b)


def has_full_column_rank(b):
    return numerical_rank(b) == b.shape[1]


def has_full_row_rank(b):
    return numerical_rank(b) == b.shape[0]


def eigvalsh(a):
    if a.size == 0:
        return np.zeros(0)
    return scipy.linalg.eigvalsh(symmetrize(a))


def is_zero(a):
    return not np.any(a)


def is_psd(a, rtol=PSD_RTOL):
    if a.size == 0 or is_zero(a):
        return True
    ev = eigvalsh(a)
    scale = max(abs(ev[0]), abs(ev[-1]))
    return ev[0] >= -rtol * scale


def is_pd(a):
    """Smallest eigenvalue above the numerical-rank threshold."""
    if a.size == 0:
        return True
    ev = eigvalsh(a)
    scale = max(abs(ev[0]), abs(ev[-1]))
    return ev[0] > max(a.shape) * EPS * scale and ev[0] > 0


class Cholesky:
    """Cholesky factor of an SPD block with solve helpers."""

    def __init__(self, a, name="block"):
        self.name = name
        self.n = a.shape[0]
        if self.n == 0:
            self._c = None
            return
        try:
            self._c = scipy.linalg.cho_factor(symmetrize(a), lower=True, check_finite=True)
        except np.linalg.LinAlgError as exc:
            raise FactorizationError(f"{name} is not symmetric positive definite", block=name) from exc

    def solve(self, b):
        if self.n == 0:
            return np.zeros_like(b, dtype=float)
        return scipy.linalg.cho_solve(self._c, b)


def spd_inverse_sqrt(a):
    """A^{-1/2} via the symmetric eigendecomposition (desk-scale only)."""
    w, v = scipy.linalg.eigh(symmetrize(a))
    if w.size and w[0] <= 0:
        raise FactorizationError("matrix is not positive definite; no inverse square root")
    return (v / np.sqrt(w)) @ v.T


def spd_sqrt(a):
    w, v = scipy.linalg.eigh(symmetrize(a))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def norm2(a):
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))
