"""Block-LDL factorizations of S^3 matrices, solves, and inertia.

Six variants are available:

* ``arrow_canonical``: the 3x3 block elimination of the arrow form,
  ``D = blkdiag(A1, -S1, -S2)``.
* ``tridiag_canonical``: the tridiagonal form, ``D = blkdiag(A1, -S1, S2)``.
* ``arrow_classical_first`` / ``arrow_classical_second``: the arrow form
  treated as a classical 2x2 saddle-point matrix, split after the first or
  after the second block.  The middle factor has a coupled 2x2 block.
* ``k_classical_first`` / ``k_classical_second``: the same for the
  permuted_k form.

Inverses of SPD blocks are applied through Cholesky solves.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _linalg as la
from .block_model import Layout, assemble_dense, permute_23
from .errors import FactorizationError, UnsupportedLayoutError

ZERO_BAND = 1e-10


class Variant(str, enum.Enum):
    ARROW_CANONICAL = "arrow_canonical"
    TRIDIAG_CANONICAL = "tridiag_canonical"
    ARROW_CLASSICAL_FIRST = "arrow_classical_first"
    ARROW_CLASSICAL_SECOND = "arrow_classical_second"
    K_CLASSICAL_FIRST = "k_classical_first"
    K_CLASSICAL_SECOND = "k_classical_second"


class Partitioning(str, enum.Enum):
    FIRST = "first"
    SECOND = "second"


@dataclass(frozen=True, eq=False)
class LdlFactorization:
    variant: Variant
    L: np.ndarray
    D: np.ndarray
    schur: dict
    M: np.ndarray
    sizes: tuple
    extra: dict = field(default_factory=dict)

    def reconstruct(self):
        return self.L @ self.D @ self.L.T

    def reconstruction_residual(self):
        """``||L D L^T - M||_F / ||M||_F``."""
        nrm = np.linalg.norm(self.M)
        return float(np.linalg.norm(self.reconstruct() - self.M) / (nrm if nrm else 1.0))

    @property
    def block_diagonal(self):
        return self.variant in (Variant.ARROW_CANONICAL, Variant.TRIDIAG_CANONICAL, Variant.K_CLASSICAL_FIRST)


@dataclass(frozen=True)
class Inertia:
    n_pos: int
    n_neg: int
    n_zero: int

    @classmethod
    def from_eigenvalues(cls, ev, band):
        return cls(int(np.sum(ev > band)), int(np.sum(ev < -band)), int(np.sum(np.abs(ev) <= band)))

    def as_tuple(self):
        return self.n_pos, self.n_neg, self.n_zero


def _blkdiag(*blocks):
    return scipy.linalg.block_diag(*blocks)


def _unit_lower(sizes, entries):
    """Assemble a unit block lower-triangular matrix from {(i, j): block}."""
    n = sum(sizes)
    L = np.eye(n)
    off = np.concatenate([[0], np.cumsum(sizes)])
    for (i, j), blk in entries.items():
        L[off[i]:off[i + 1], off[j]:off[j + 1]] = blk
    return L


def _require(sys, *layouts):
    if sys.layout not in layouts:
        names = " or ".join(l.value for l in layouts)
        raise UnsupportedLayoutError(f"expected layout {names}, got '{sys.layout.value}'")


def ldl_arrow(sys):
    """Canonical block-LDL of the arrow form."""
    _require(sys, Layout.ARROW)
    a1 = la.Cholesky(sys.A1, "A1")
    X1 = a1.solve(sys.B1.T)
    X2 = a1.solve(sys.B2.T)
    S1 = la.symmetrize(sys.A2 + sys.B1 @ X1)
    s1 = la.Cholesky(S1, "S1")
    C = sys.B2 @ X1
    L32 = s1.solve(C.T).T
    S2 = la.symmetrize(sys.A3 + sys.B2 @ X2 - L32 @ C.T)
    L = _unit_lower(sys.sizes, {(1, 0): X1.T, (2, 0): X2.T, (2, 1): L32})
    D = _blkdiag(sys.A1, -S1, -S2)
    return LdlFactorization(Variant.ARROW_CANONICAL, L, D, {"S1": S1, "S2": S2}, assemble_dense(sys), sys.sizes)


def ldl_tridiag(sys):
    """Canonical block-LDL of the tridiagonal form."""
    _require(sys, Layout.TRIDIAGONAL)
    a1 = la.Cholesky(sys.A1, "A1")
    X1 = a1.solve(sys.B1.T)
    S1 = la.symmetrize(sys.A2 + sys.B1 @ X1)
    s1 = la.Cholesky(S1, "S1")
    Y = s1.solve(sys.B2.T)
    S2 = la.symmetrize(sys.A3 + sys.B2 @ Y)
    L = _unit_lower(sys.sizes, {(1, 0): X1.T, (2, 1): -Y.T})
    D = _blkdiag(sys.A1, -S1, S2)
    return LdlFactorization(Variant.TRIDIAG_CANONICAL, L, D, {"S1": S1, "S2": S2}, assemble_dense(sys), sys.sizes)


def ldl_classical(sys, partitioning="first"):
    """Block-LDL from a classical 2x2 partitioning of an arrow or permuted_k system."""
    _require(sys, Layout.ARROW, Layout.PERMUTED_K)
    part = Partitioning(partitioning)
    M = assemble_dense(sys)
    a1 = la.Cholesky(sys.A1, "A1")
    n1, n2, n3 = sys.sizes
    if sys.layout is Layout.ARROW:
        X1 = a1.solve(sys.B1.T)
        X2 = a1.solve(sys.B2.T)
        if part is Partitioning.FIRST:
            S1 = la.symmetrize(sys.A2 + sys.B1 @ X1)
            S2 = la.symmetrize(sys.A3 + sys.B2 @ X2)
            L = _unit_lower(sys.sizes, {(1, 0): X1.T, (2, 0): X2.T})
            D = _blkdiag(sys.A1, np.block([[-S1, -sys.B1 @ X2], [-sys.B2 @ X1, -S2]]))
            return LdlFactorization(Variant.ARROW_CLASSICAL_FIRST, L, D, {"S1": S1, "S2": S2}, M, sys.sizes)
        S1 = la.symmetrize(sys.A2 + sys.B1 @ X1)
        s1 = la.Cholesky(S1, "S1")
        C = sys.B2 @ X1
        L32 = s1.solve(C.T).T
        L31 = X2.T - L32 @ X1.T
        S2 = la.symmetrize(sys.A3 + sys.B2 @ X2 - L32 @ C.T)
        L = _unit_lower(sys.sizes, {(2, 0): L31, (2, 1): L32})
        lead = np.block([[sys.A1, sys.B1.T], [sys.B1, -sys.A2]])
        D = _blkdiag(lead, -S2)
        return LdlFactorization(
            Variant.ARROW_CLASSICAL_SECOND, L, D, {"S1": S1, "S2": S2}, M, sys.sizes,
            extra={"L31": L31, "L32": L32},
        )
    X1 = a1.solve(sys.B1.T)
    if part is Partitioning.FIRST:
        a2 = la.Cholesky(sys.A2, "A2")
        X2 = a2.solve(sys.B2.T)
        S = la.symmetrize(sys.A3 + sys.B1 @ X1 + sys.B2 @ X2)
        L = _unit_lower(sys.sizes, {(2, 0): X1.T, (2, 1): X2.T})
        D = _blkdiag(sys.A1, sys.A2, -S)
        return LdlFactorization(Variant.K_CLASSICAL_FIRST, L, D, {"S": S}, M, sys.sizes)
    S = la.symmetrize(sys.A3 + sys.B1 @ X1)
    L = _unit_lower(sys.sizes, {(2, 0): X1.T})
    D = _blkdiag(sys.A1, np.block([[sys.A2, sys.B2.T], [sys.B2, -S]]))
    return LdlFactorization(Variant.K_CLASSICAL_SECOND, L, D, {"S": S}, M, sys.sizes)


def ldl(sys, variant=None):
    """Dispatch to a factorization by variant name; default is the layout's canonical one."""
    if variant is None:
        if sys.layout is Layout.ARROW:
            return ldl_arrow(sys)
        if sys.layout is Layout.TRIDIAGONAL:
            return ldl_tridiag(sys)
        return ldl_classical(sys, "first")
    v = Variant(variant)
    if v is Variant.ARROW_CANONICAL:
        return ldl_arrow(sys)
    if v is Variant.TRIDIAG_CANONICAL:
        return ldl_tridiag(sys)
    if v in (Variant.K_CLASSICAL_FIRST, Variant.K_CLASSICAL_SECOND) and sys.layout is Layout.TRIDIAGONAL:
        sys = permute_23(sys)
    part = "first" if v.value.endswith("first") else "second"
    return ldl_classical(sys, part)


def solve_with_ldl(f, rhs):
    """Solve ``M x = rhs`` through ``L``, ``D`` and ``L^T``."""
    rhs = np.asarray(rhs, dtype=float)
    y = scipy.linalg.solve_triangular(f.L, rhs, lower=True, unit_diagonal=True)
    with warnings.catch_warnings():
        # singularity is reported below as FactorizationError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(f.D, check_finite=True)
    u = np.abs(np.diag(lu))
    if u.size and u.min() <= f.D.shape[0] * la.EPS * max(u.max(), 1e-300):
        raise FactorizationError("middle factor D is singular")
    z = scipy.linalg.lu_solve((lu, piv), y)
    return scipy.linalg.solve_triangular(f.L.T, z, lower=False, unit_diagonal=True)


def inertia_of(sys_or_matrix):
    """Eigenvalue sign counts with a zero band of ``1e-10 * ||M||_2``."""
    M = sys_or_matrix if isinstance(sys_or_matrix, np.ndarray) else assemble_dense(sys_or_matrix)
    ev = la.eigvalsh(M)
    band = ZERO_BAND * (max(abs(ev[0]), abs(ev[-1])) if ev.size else 0.0)
    return Inertia.from_eigenvalues(ev, band)


def expected_inertia(sys):
    """Inertia a nonsingular system must have for its layout."""
    n1, n2, n3 = sys.sizes
    if sys.layout is Layout.ARROW:
        return Inertia(n1, n2 + n3, 0)
    if sys.layout is Layout.TRIDIAGONAL:
        return Inertia(n1 + n3, n2, 0)
    return Inertia(n1 + n2, n3, 0)


@dataclass(frozen=True)
class SchurDiagnostic:
    W_psd: bool
    S2_psd: bool
    S2_pd: bool
    nonsingular: bool
    lambda_min_W: float
    lambda_min_S2: float

    @property
    def consistent(self):
        """Second arrow Schur complement is definite exactly when the matrix is nonsingular."""
        return self.S2_pd == self.nonsingular


def schur_definiteness_diag(sys):
    """Check ``W = I - A1^{-1/2} B1' S1^{-1} B1 A1^{-1/2} >= 0`` and the definiteness of S2."""
    _require(sys, Layout.ARROW)
    f = ldl_arrow(sys)
    S1, S2 = f.schur["S1"], f.schur["S2"]
    R = la.spd_inverse_sqrt(sys.A1)
    G = sys.B1 @ R
    W = np.eye(sys.n1) - G.T @ la.Cholesky(S1, "S1").solve(G)
    ev_w = la.eigvalsh(W)
    ev_s = la.eigvalsh(S2)
    scale_s = max(abs(ev_s[0]), abs(ev_s[-1]), la.norm2(sys.A3), 1e-300)
    M = f.M
    nonsingular = inertia_of(M).n_zero == 0
    return SchurDiagnostic(
        W_psd=bool(ev_w[0] >= -la.PSD_RTOL * max(1.0, abs(ev_w[-1]))),
        S2_psd=bool(ev_s[0] >= -la.PSD_RTOL * scale_s),
        S2_pd=bool(ev_s[0] > ZERO_BAND * scale_s),
        nonsingular=bool(nonsingular),
        lambda_min_W=float(ev_w[0]),
        lambda_min_S2=float(ev_s[0]),
    )
