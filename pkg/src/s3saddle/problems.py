"""Seeded instance generators for S^3 systems.

* :func:`gen_pdeco_1d`: distributed control of a 1D Poisson problem, tridiagonal.
* :func:`gen_lsq`: equality-constrained least squares, tridiagonal.
* :func:`gen_ipm_step`: one symmetrized interior-point step for a QP, arrow.
* :func:`gen_random`: generic S^3 systems with controllable zero blocks and
  planted rank deficiency of the off-diagonal blocks.
* :func:`gen_multi_saddle`: block-tridiagonal multiple saddle-point chains.

Every generator is a pure function of its arguments.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _linalg as la
from .block_model import BlockSystem3, Layout, MultiSaddleSystem, permute_23
from .errors import ContractError


class GeneratorKind(str, enum.Enum):
    PDECO_1D = "pdeco_1d"
    CONSTRAINED_LSQ = "constrained_lsq"
    IPM_STEP = "ipm_step"
    RANDOM_ARROW = "random_arrow"
    RANDOM_TRIDIAG = "random_tridiag"
    MULTI_SADDLE = "multi_saddle"


@dataclass(frozen=True)
class GeneratorSpec:
    kind: GeneratorKind
    sizes: tuple = ()
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", GeneratorKind(self.kind))
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))


def _second_difference(m):
    return 2.0 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)


def _mass(m, h):
    return (h / 6.0) * (4.0 * np.eye(m) + np.eye(m, k=1) + np.eye(m, k=-1))


def laplacian_1d(m):
    """Dirichlet finite-difference Laplacian on ``m`` interior nodes, scaled by ``1/h^2``."""
    h = 1.0 / (m + 1)
    return _second_difference(m) / h ** 2


def mass_1d(m):
    """Tridiagonal mass matrix with stencil ``(1, 4, 1) h / 6``."""
    return _mass(m, 1.0 / (m + 1))


def gen_pdeco_1d(m, beta):
    """Tridiagonal KKT system ``A1 = M, B1 = K, A2 = 0, B2 = M, A3 = beta M``.

    Unknowns are ordered (state, adjoint, control); ``K`` is the 1D Laplacian
    and ``M`` the mass matrix on ``m`` interior nodes.
    """
    m = int(m)
    if m < 2:
        raise ContractError(f"grid needs m >= 2, got {m}")
    if not beta > 0:
        raise ContractError(f"regularization beta must be positive, got {beta}")
    K, M = laplacian_1d(m), mass_1d(m)
    return BlockSystem3(
        A1=M, A2=np.zeros((m, m)), A3=beta * M, B1=K, B2=M,
        layout=Layout.TRIDIAGONAL, label=f"pdeco_1d m={m} beta={beta:g}",
    )


def _full_rank(rng, shape, max_tries=100):
    for _ in range(max_tries):
        a = rng.standard_normal(shape)
        if la.numerical_rank(a) == min(shape):
            return a
    raise ContractError(f"could not draw a full-rank {shape} matrix")


def gen_lsq(n, p, q, seed):
    """Tridiagonal system ``A1 = I_n, B1 = G', A2 = 0, B2 = E, A3 = 0``.

    ``G`` is ``n x p`` and ``E`` is ``q x p``, both random of full rank.
    """
    if not (n >= p >= q >= 1):
        raise ContractError(f"constrained least squares needs n >= p >= q >= 1, got {(n, p, q)}")
    rng = np.random.default_rng(seed)
    G = _full_rank(rng, (n, p))
    E = _full_rank(rng, (q, p))
    return BlockSystem3(
        A1=np.eye(n), A2=np.zeros((p, p)), A3=np.zeros((q, q)), B1=G.T, B2=E,
        layout=Layout.TRIDIAGONAL, label=f"lsq n={n} p={p} q={q} seed={seed}",
    )


def gen_ipm_step(n, m, seed, rho=1e-2, delta=1e-2, x=None, z=None):
    """Arrow system ``A1 = H + rho I, B1 = J, A2 = delta I, B2 = -Z^(1/2), A3 = X``.

    ``H = F F' + 0.1 I`` and ``J`` (``m x n``, full row rank) are random;
    ``x`` and ``z`` are the current primal and dual iterates (default ones).
    """
    if not (n >= m >= 1):
        raise ContractError(f"IPM step needs n >= m >= 1, got {(n, m)}")
    if rho < 0 or delta < 0:
        raise ContractError("regularization parameters rho, delta must be nonnegative")
    x = np.ones(n) if x is None else np.asarray(x, dtype=float).ravel()
    z = np.ones(n) if z is None else np.asarray(z, dtype=float).ravel()
    if x.size != n or z.size != n:
        raise ContractError(f"iterates x, z must have length {n}")
    if np.any(x <= 0) or np.any(z <= 0):
        raise ContractError("iterates x and z must be entrywise positive")
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((n, n)) / np.sqrt(n)
    H = F @ F.T + 0.1 * np.eye(n)
    J = _full_rank(rng, (m, n))
    return BlockSystem3(
        A1=H + rho * np.eye(n), A2=delta * np.eye(m), A3=np.diag(x), B1=J, B2=-np.diag(np.sqrt(z)),
        layout=Layout.ARROW, label=f"ipm n={n} m={m} seed={seed} rho={rho:g} delta={delta:g}",
    )


def _orthonormal(rng, n, r):
    q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return q[:, :r]


def planted_rank_matrix(rng, rows, cols, nullity=0, sv_range=(0.5, 2.0)):
    """Random ``rows x cols`` matrix of rank ``min(rows, cols) - nullity``.

    Nonzero singular values are drawn uniformly from ``sv_range``.
    """
    r = min(rows, cols) - int(nullity)
    if r < 0:
        raise ContractError(f"nullity {nullity} exceeds min(rows, cols) = {min(rows, cols)}")
    if r == 0:
        return np.zeros((rows, cols))
    U = _orthonormal(rng, rows, r)
    V = _orthonormal(rng, cols, r)
    s = rng.uniform(*sv_range, size=r)
    return (U * s) @ V.T


def random_spd(rng, n):
    F = rng.standard_normal((n, n))
    return F @ F.T / n + np.eye(n)


def random_psd(rng, n, rank=None, ev_range=(0.1, 2.0)):
    """Random PSD matrix of the given rank; nonzero eigenvalues in ``ev_range``."""
    r = n if rank is None else int(rank)
    if r == 0:
        return np.zeros((n, n))
    U = _orthonormal(rng, n, r)
    return (U * rng.uniform(*ev_range, size=r)) @ U.T


def gen_random(kind, n1, n2, n3, seed, a2_zero=False, a3_zero=False, b1_nullity=0, b2_nullity=0,
               a2_rank=None, a3_rank=None):
    """Random S^3 system of layout ``kind`` ("arrow", "tridiagonal" or "permuted_k").

    ``A1 = F F'/n1 + I``; ``A2``, ``A3`` are PSD of the given rank with nonzero
    eigenvalues in ``[0.1, 2]``, or zero; ``B1``, ``B2`` have singular values in ``[0.5, 2]`` with the requested
    number of them planted at zero.  For ``permuted_k`` the sizes and options
    refer to the tridiagonal system, which is then permuted.

    Size or zero-pattern combinations that are necessarily singular are rejected.
    """
    layout = Layout(kind)
    n1, n2, n3 = int(n1), int(n2), int(n3)
    if min(n1, n2, n3) < 1:
        raise ContractError(f"block sizes must be positive, got {(n1, n2, n3)}")
    if n1 < max(n2, n3):
        raise ContractError(f"A1 must be the largest block: n = {(n1, n2, n3)}")
    if layout is Layout.ARROW:
        if a2_zero and a3_zero and n1 < n2 + n3:
            raise ContractError("arrow with A2 = A3 = 0 needs n1 >= n2 + n3")
        if a2_zero and b1_nullity:
            raise ContractError("arrow with A2 = 0 and rank-deficient B1 is singular")
        if a3_zero and b2_nullity:
            raise ContractError("arrow with A3 = 0 and rank-deficient B2 is singular")
        b_shapes = ((n2, n1), (n3, n1))
    else:
        if a3_zero and not (n1 >= n2 >= n3):
            raise ContractError("tridiagonal with A3 = 0 needs n1 >= n2 >= n3")
        if a3_zero and b2_nullity:
            raise ContractError("tridiagonal with A3 = 0 and rank-deficient B2 is singular")
        if a2_zero and b1_nullity:
            raise ContractError("tridiagonal with A2 = 0 and rank-deficient B1 is singular")
        b_shapes = ((n2, n1), (n3, n2))
    rng = np.random.default_rng(seed)
    A1 = random_spd(rng, n1)
    A2 = np.zeros((n2, n2)) if a2_zero else random_psd(rng, n2, a2_rank)
    A3 = np.zeros((n3, n3)) if a3_zero else random_psd(rng, n3, a3_rank)
    B1 = planted_rank_matrix(rng, *b_shapes[0], nullity=b1_nullity)
    B2 = planted_rank_matrix(rng, *b_shapes[1], nullity=b2_nullity)
    sys = BlockSystem3(
        A1=A1, A2=A2, A3=A3, B1=B1, B2=B2,
        layout=Layout.ARROW if layout is Layout.ARROW else Layout.TRIDIAGONAL,
        label=f"random {layout.value} n={(n1, n2, n3)} seed={seed}",
    )
    return permute_23(sys) if layout is Layout.PERMUTED_K else sys


def gen_multi_saddle(n_blocks, sizes, seed):
    """Random chain with SPD ``H_i``, PSD ``R_i`` and full-rank couplings ``J_i``.

    ``sizes`` is one size per diagonal block, or a single int for all.
    """
    n_blocks = int(n_blocks)
    if n_blocks < 2:
        raise ContractError(f"need at least two diagonal blocks, got {n_blocks}")
    if np.isscalar(sizes):
        sizes = [int(sizes)] * n_blocks
    sizes = [int(s) for s in sizes]
    if len(sizes) != n_blocks or min(sizes) < 1:
        raise ContractError(f"need {n_blocks} positive block sizes, got {sizes}")
    rng = np.random.default_rng(seed)
    diag = []
    for i, n in enumerate(sizes):
        if i % 2 == 0:
            diag.append((1, random_spd(rng, n)))
        else:
            diag.append((-1, random_psd(rng, n)))
    off = [planted_rank_matrix(rng, sizes[i + 1], sizes[i]) for i in range(n_blocks - 1)]
    return MultiSaddleSystem(tuple(diag), tuple(off))


def generate(spec):
    """Dispatch a :class:`GeneratorSpec`."""
    k, s, p, seed = spec.kind, spec.sizes, dict(spec.params), spec.seed
    if k is GeneratorKind.PDECO_1D:
        m = s[0] if s else int(p.pop("m", 8))
        return gen_pdeco_1d(m, float(p.get("beta", 1e-2)))
    if k is GeneratorKind.CONSTRAINED_LSQ:
        return gen_lsq(*s, seed=seed)
    if k is GeneratorKind.IPM_STEP:
        n, m = s[:2]
        return gen_ipm_step(n, m, seed, rho=float(p.get("rho", 1e-2)), delta=float(p.get("delta", 1e-2)))
    if k in (GeneratorKind.RANDOM_ARROW, GeneratorKind.RANDOM_TRIDIAG):
        layout = p.pop("layout", "arrow" if k is GeneratorKind.RANDOM_ARROW else "tridiagonal")
        opts = {}
        for key in ("a2_zero", "a3_zero"):
            if key in p:
                opts[key] = _as_bool(p[key])
        for key in ("b1_nullity", "b2_nullity", "a2_rank", "a3_rank"):
            if key in p:
                opts[key] = int(p[key])
        return gen_random(layout, *s, seed=seed, **opts)
    return gen_multi_saddle(int(p.get("n_blocks", len(s))), list(s) if s else int(p.get("size", 1)), seed)


def _as_bool(v):
    if isinstance(v, str):
        if v.lower() in ("1", "true", "yes", "on"):
            return True
        if v.lower() in ("0", "false", "no", "off"):
            return False
        raise ContractError(f"expected a boolean, got '{v}'")
    return bool(v)
