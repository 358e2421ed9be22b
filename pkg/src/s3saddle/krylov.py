"""Preconditioned MINRES and unrestarted right-preconditioned GMRES.

Both solvers take the matrix as a dense array, a
``scipy.sparse.linalg.LinearOperator`` or a :class:`BlockSystem3`, and the
preconditioner as a :class:`Preconditioner`, a callable applying ``P^{-1}``,
or None.  Convergence is declared on the true relative residual
``||b - M x|| / ||b||`` of the original system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .block_model import BlockSystem3, assemble_dense
from .errors import ContractError
from .precond import Preconditioner, apply_inverse

DEFAULT_TOL = 1e-8


@dataclass
class SolveStats:
    iterations: int
    relative_residual: float
    converged: bool
    residual_history: list = field(default_factory=list)
    status: str = "converged"
    method: str = ""


def _operator(A):
    if isinstance(A, BlockSystem3):
        A = assemble_dense(A)
    if isinstance(A, np.ndarray):
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ContractError(f"matrix must be square, got {A.shape}")
        return (lambda v: A @ v), A.shape[0]
    if isinstance(A, scipy.sparse.linalg.LinearOperator):
        return A.matvec, A.shape[0]
    raise ContractError(f"unsupported operator type {type(A).__name__}")


def _preconditioner(p, n):
    if p is None:
        return lambda v: v
    if isinstance(p, Preconditioner):
        if p.dim != n:
            raise ContractError(f"preconditioner dimension {p.dim} does not match system dimension {n}")
        return lambda v: apply_inverse(p, v)
    if isinstance(p, np.ndarray):
        lu = scipy.linalg.lu_factor(p)
        return lambda v: scipy.linalg.lu_solve(lu, v)
    if callable(p):
        return p
    raise ContractError(f"unsupported preconditioner type {type(p).__name__}")


def _prepare(A, rhs, maxit):
    matvec, n = _operator(A)
    b = np.asarray(rhs, dtype=float).ravel()
    if b.size != n:
        raise ContractError(f"rhs has length {b.size}, expected {n}")
    return matvec, n, b, (n if maxit is None else int(maxit))


def _true_rel(matvec, x, b, bnorm):
    return float(np.linalg.norm(b - matvec(x)) / bnorm)


def minres(A, p=None, rhs=None, tol=DEFAULT_TOL, maxit=None):
    """Preconditioned MINRES for symmetric ``A`` and SPD preconditioner ``P``.

    ``residual_history`` holds the ``P^{-1}``-norm of the residual relative to
    its initial value, which is nonincreasing.
    """
    if isinstance(p, Preconditioner) and not p.symmetric:
        raise ContractError(f"MINRES needs a symmetric positive definite preconditioner, got '{p.kind.value}'")
    matvec, n, b, maxit = _prepare(A, rhs, maxit)
    psolve = _preconditioner(p, n)
    x = np.zeros(n)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return x, SolveStats(0, 0.0, True, [0.0], "converged", "minres")
    v_old = np.zeros(n)
    v = b.copy()
    z = psolve(v)
    g2 = float(z @ v)
    if g2 <= 0:
        raise ContractError("preconditioner is not positive definite")
    gamma = math.sqrt(g2)
    gamma_old = 1.0
    eta = gamma
    eta0 = gamma
    s_old = s = 0.0
    c_old = c = 1.0
    w_old = np.zeros(n)
    w = np.zeros(n)
    aw_old = np.zeros(n)
    aw = np.zeros(n)
    r = b.copy()
    history = [1.0]
    status = "maxit"
    it = 0
    rel = 1.0
    while it < maxit:
        it += 1
        z = z / gamma
        az = matvec(z)
        delta = float(az @ z)
        v_new = az - (delta / gamma) * v - (gamma / gamma_old) * v_old
        z_new = psolve(v_new)
        g2 = float(z_new @ v_new)
        if g2 < -1e-14 * max(1.0, abs(delta)) * gamma ** 2:
            raise ContractError("preconditioner is not positive definite")
        gamma_new = math.sqrt(max(g2, 0.0))
        a0 = c * delta - c_old * s * gamma
        a1 = math.hypot(a0, gamma_new)
        a2 = s * delta + c_old * c * gamma
        a3 = s_old * gamma
        if a1 == 0:
            status = "breakdown"
            break
        c_new, s_new = a0 / a1, gamma_new / a1
        w_new = (z - a3 * w_old - a2 * w) / a1
        aw_new = (az - a3 * aw_old - a2 * aw) / a1
        x = x + c_new * eta * w_new
        r = r - c_new * eta * aw_new
        eta = -s_new * eta
        history.append(abs(eta) / eta0)
        rel = float(np.linalg.norm(r) / bnorm)
        if rel <= tol:
            rel = _true_rel(matvec, x, b, bnorm)
            if rel <= tol:
                status = "converged"
                break
        if gamma_new <= np.finfo(float).eps * eta0:
            rel = _true_rel(matvec, x, b, bnorm)
            status = "converged" if rel <= tol else "breakdown"
            break
        v_old, v = v, v_new
        z = z_new
        gamma_old, gamma = gamma, gamma_new
        c_old, c = c, c_new
        s_old, s = s, s_new
        w_old, w = w, w_new
        aw_old, aw = aw, aw_new
    rel = _true_rel(matvec, x, b, bnorm)
    converged = rel <= tol
    if status == "converged" and not converged:
        status = "breakdown"
    return x, SolveStats(it, rel, bool(converged), history, status, "minres")


def gmres(A, p=None, rhs=None, tol=DEFAULT_TOL, maxit=None):
    """Right-preconditioned GMRES without restarts.

    Solves ``A P^{-1} u = b`` and returns ``x = P^{-1} u``; the residual is that
    of the original system, so ``residual_history`` (relative 2-norms) is
    nonincreasing.
    """
    matvec, n, b, maxit = _prepare(A, rhs, maxit)
    psolve = _preconditioner(p, n)
    x0 = np.zeros(n)
    beta = np.linalg.norm(b)
    if beta == 0:
        return x0, SolveStats(0, 0.0, True, [0.0], "converged", "gmres")
    m = min(maxit, n)
    V = np.zeros((n, m + 1))
    Z = np.zeros((n, m))
    H = np.zeros((m + 1, m))
    cs = np.zeros(m)
    sn = np.zeros(m)
    g = np.zeros(m + 1)
    g[0] = beta
    V[:, 0] = b / beta
    history = [1.0]
    status = "maxit"
    x = x0
    it = 0
    done = 0  # columns of H already reduced to triangular form
    for j in range(m):
        it = j + 1
        Z[:, j] = psolve(V[:, j])
        w = matvec(Z[:, j])
        # two Gram-Schmidt passes keep the basis orthogonal at desk scale
        for _ in range(2):
            for i in range(j + 1):
                h = V[:, i] @ w
                H[i, j] += h
                w = w - h * V[:, i]
        hnext = np.linalg.norm(w)
        H[j + 1, j] = hnext
        for i in range(j):
            t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
            H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
            H[i, j] = t
        rho = math.hypot(H[j, j], H[j + 1, j])
        if rho == 0:
            status = "breakdown"
            break
        cs[j], sn[j] = H[j, j] / rho, H[j + 1, j] / rho
        H[j, j] = rho
        H[j + 1, j] = 0.0
        g[j + 1] = -sn[j] * g[j]
        g[j] = cs[j] * g[j]
        done = j + 1
        est = abs(g[j + 1]) / beta
        history.append(float(est))
        happy = hnext <= np.finfo(float).eps * beta
        if happy or est <= tol:
            x = x0 + Z[:, :done] @ scipy.linalg.solve_triangular(H[:done, :done], g[:done])
            if _true_rel(matvec, x, b, beta) <= tol:
                status = "converged"
                break
            if happy:
                status = "breakdown"
                break
        V[:, j + 1] = w / hnext
    if status != "converged" and done:
        x = x0 + Z[:, :done] @ scipy.linalg.solve_triangular(H[:done, :done], g[:done])
    rel = _true_rel(matvec, x, b, beta)
    converged = rel <= tol
    if converged:
        status = "converged"
    return x, SolveStats(it, rel, bool(converged), history, status, "gmres")
