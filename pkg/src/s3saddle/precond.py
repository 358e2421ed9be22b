"""Schur-complement preconditioners for S^3 systems and spectral verification.

Kinds (``S1``, ``S2`` denote Schur complements, ``X = A1^{-1}``)::

    pd1_arrow    blkdiag(A1, B1 X B1', B2 X B2')
    pd2_arrow    blkdiag(A1, S1_0, S2_0)      S1_0 = B1 X B1'
                                             S2_0 = B2 X B2' - B2 X B1' S1_0^{-1} B1 X B2'
    pt1_arrow    [[A1, B1', B2'], [0, -S1, -B1 X B2'], [0, 0, -S2]]          (= D L' of the arrow LDL)
    pt2_arrow    [[A1, B1', B2'], [0, -B1 X B1', -B1 X B2'], [0, 0, -(A3 + B2 X B2')]]
    pd_tri       blkdiag(A1, S1, S2)          S1 = A2 + B1 X B1', S2 = A3 + B2 S1^{-1} B2'
    pt_tri       [[A1, B1', 0], [0, -S1, B2'], [0, 0, S2]]                   (= D L' of the tridiagonal LDL)
    shift_split  (alpha I + M) / 2

Block-diagonal kinds are applied from the left, the others from the right.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _linalg as la
from .analysis import eig_sym
from .block_model import Layout, assemble_dense, block_slices
from .errors import ContractError, FactorizationError, UnsupportedLayoutError

PHI = (1 + math.sqrt(5)) / 2
PSI = (1 - math.sqrt(5)) / 2
HEPTAGON = tuple(2 * math.cos(k * math.pi / 7) for k in (1, 3, 5))  # roots of x^3 - x^2 - 2x + 1

CLUSTER_RADIUS = 1e-6
MATCH_TOL = 1e-8
IMAG_RTOL = 1e-8
MINPOLY_RTOL = 1e-8
MINPOLY_NONTRIVIAL = 1e-6


class Kind(str, enum.Enum):
    PD1_ARROW = "pd1_arrow"
    PD2_ARROW = "pd2_arrow"
    PT1_ARROW = "pt1_arrow"
    PT2_ARROW = "pt2_arrow"
    PD_TRI = "pd_tri"
    PT_TRI = "pt_tri"
    SHIFT_SPLIT = "shift_split"


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


DIAGONAL_KINDS = (Kind.PD1_ARROW, Kind.PD2_ARROW, Kind.PD_TRI)
TRIANGULAR_KINDS = (Kind.PT1_ARROW, Kind.PT2_ARROW, Kind.PT_TRI)
ARROW_KINDS = (Kind.PD1_ARROW, Kind.PD2_ARROW, Kind.PT1_ARROW, Kind.PT2_ARROW)
TRI_KINDS = (Kind.PD_TRI, Kind.PT_TRI)


@dataclass(frozen=True, eq=False)
class Preconditioner:
    """A built preconditioner.

    For block kinds ``blocks`` holds the diagonal blocks ``P11, P22, P33``
    (as stored, with sign) and, for triangular kinds, the upper blocks
    ``P12, P13, P23``.  Shift-splitting stores ``M`` and ``alpha``.
    """

    kind: Kind
    blocks: dict
    side: Side
    sizes: tuple
    _solvers: tuple = field(default=(), repr=False)
    _lu: object = field(default=None, repr=False)

    @property
    def dim(self):
        return sum(self.sizes)

    @property
    def symmetric(self):
        return self.kind in DIAGONAL_KINDS

    def matrix(self):
        """Assembled dense preconditioner."""
        if self.kind is Kind.SHIFT_SPLIT:
            return np.array(self.blocks["M"])
        n = self.dim
        P = np.zeros((n, n))
        s = block_slices(self.sizes)
        for i in range(3):
            P[s[i], s[i]] = self.blocks[f"P{i + 1}{i + 1}"]
            for j in range(i + 1, 3):
                key = f"P{i + 1}{j + 1}"
                if key in self.blocks:
                    P[s[i], s[j]] = self.blocks[key]
        return P


def _require(sys, kind):
    if kind in ARROW_KINDS and sys.layout is not Layout.ARROW:
        raise UnsupportedLayoutError(f"{kind.value} needs an arrow system, got '{sys.layout.value}'")
    if kind in TRI_KINDS and sys.layout is not Layout.TRIDIAGONAL:
        raise UnsupportedLayoutError(f"{kind.value} needs a tridiagonal system, got '{sys.layout.value}'")


def _make(kind, sys, diag, upper=None):
    """``diag`` is a list of (block, sign, name); sign -1 means the stored block is -S with S SPD."""
    blocks, solvers = {}, []
    for i, (blk, sign, name) in enumerate(diag):
        blk = la.symmetrize(blk)
        solvers.append((sign, la.Cholesky(blk, name)))
        blocks[f"P{i + 1}{i + 1}"] = sign * blk
    for key, blk in (upper or {}).items():
        blocks[key] = blk
    side = Side.LEFT if kind in DIAGONAL_KINDS else Side.RIGHT
    return Preconditioner(kind, blocks, side, sys.sizes, tuple(solvers))


def build(kind, sys, alpha=1.0):
    """Build a preconditioner of ``kind`` for ``sys``."""
    kind = Kind(kind)
    if kind is Kind.SHIFT_SPLIT:
        return build_shift_split(sys, alpha)
    _require(sys, kind)
    A1, A2, A3, B1, B2 = sys.A1, sys.A2, sys.A3, sys.B1, sys.B2
    a1 = la.Cholesky(A1, "A1")
    X1 = a1.solve(B1.T)
    if kind in ARROW_KINDS:
        X2 = a1.solve(B2.T)
        G11, G22, G21 = B1 @ X1, B2 @ X2, B2 @ X1
        if kind is Kind.PD1_ARROW:
            return _make(kind, sys, [(A1, 1, "A1"), (G11, 1, "B1 A1^-1 B1'"), (G22, 1, "B2 A1^-1 B2'")])
        if kind is Kind.PD2_ARROW:
            s10 = la.Cholesky(la.symmetrize(G11), "S1_0")
            S20 = G22 - G21 @ s10.solve(G21.T)
            return _make(kind, sys, [(A1, 1, "A1"), (G11, 1, "S1_0"), (S20, 1, "S2_0")])
        if kind is Kind.PT1_ARROW:
            S1 = la.symmetrize(A2 + G11)
            s1 = la.Cholesky(S1, "S1")
            S2 = A3 + G22 - G21 @ s1.solve(G21.T)
            return _make(kind, sys, [(A1, 1, "A1"), (S1, -1, "S1"), (S2, -1, "S2")],
                         {"P12": B1.T, "P13": B2.T, "P23": -G21.T})
        return _make(kind, sys, [(A1, 1, "A1"), (G11, -1, "B1 A1^-1 B1'"), (A3 + G22, -1, "A3 + B2 A1^-1 B2'")],
                     {"P12": B1.T, "P13": B2.T, "P23": -G21.T})
    S1 = la.symmetrize(A2 + B1 @ X1)
    s1 = la.Cholesky(S1, "S1")
    S2 = A3 + B2 @ s1.solve(B2.T)
    if kind is Kind.PD_TRI:
        return _make(kind, sys, [(A1, 1, "A1"), (S1, 1, "S1"), (S2, 1, "S2")])
    n1, _, n3 = sys.sizes
    return _make(kind, sys, [(A1, 1, "A1"), (S1, -1, "S1"), (S2, 1, "S2")],
                 {"P12": B1.T, "P13": np.zeros((n1, n3)), "P23": B2.T})


def build_shift_split(sys, alpha):
    """``M = (alpha I + K) / 2`` for the assembled system ``K``; ``K = M - N``."""
    alpha = float(alpha)
    if not alpha > 0 or not math.isfinite(alpha):
        raise ContractError(f"shift alpha must be positive, got {alpha}")
    K = assemble_dense(sys)
    n = K.shape[0]
    M = 0.5 * (alpha * np.eye(n) + K)
    N = 0.5 * (alpha * np.eye(n) - K)
    lu = scipy.linalg.lu_factor(M)
    return Preconditioner(Kind.SHIFT_SPLIT, {"M": M, "N": N, "alpha": alpha}, Side.RIGHT, sys.sizes, (), lu)


def apply_inverse(p, v):
    """``P^{-1} v`` by block solves (back substitution for triangular kinds)."""
    v = np.asarray(v, dtype=float)
    if p.kind is Kind.SHIFT_SPLIT:
        return scipy.linalg.lu_solve(p._lu, v)
    s = block_slices(p.sizes)
    out = np.empty_like(v)
    if p.kind in DIAGONAL_KINDS:
        for i, (sign, chol) in enumerate(p._solvers):
            out[s[i]] = sign * chol.solve(v[s[i]])
        return out
    for i in (2, 1, 0):
        r = v[s[i]].copy()
        for j in range(i + 1, 3):
            key = f"P{i + 1}{j + 1}"
            if key in p.blocks:
                r = r - p.blocks[key] @ out[s[j]]
        sign, chol = p._solvers[i]
        out[s[i]] = sign * chol.solve(r)
    return out


def identity_preconditioner(sizes):
    """Block-diagonal identity, handy for baselines."""
    blocks = {f"P{i + 1}{i + 1}": np.eye(n) for i, n in enumerate(sizes)}
    solvers = tuple((1, la.Cholesky(np.eye(n), "I")) for n in sizes)
    return Preconditioner(Kind.PD_TRI, blocks, Side.LEFT, tuple(sizes), solvers)


def _inverse_dense(p):
    if p.kind is Kind.SHIFT_SPLIT:
        return scipy.linalg.lu_solve(p._lu, np.eye(p.dim))
    return apply_inverse(p, np.eye(p.dim))


def preconditioned_operator(sys, p):
    """Dense ``P^{-1} M`` (left) or ``M P^{-1}`` (right)."""
    M = assemble_dense(sys)
    Pinv = _inverse_dense(p)
    return Pinv @ M if p.side is Side.LEFT else M @ Pinv


def preconditioned_eigenvalues(sys, p):
    """Raw, possibly complex, eigenvalues sorted by real part."""
    M = assemble_dense(sys)
    if p.symmetric:
        s = block_slices(p.sizes)
        R = np.zeros_like(M)
        for i in range(3):
            R[s[i], s[i]] = la.spd_inverse_sqrt(p.blocks[f"P{i + 1}{i + 1}"])
        return eig_sym(la.symmetrize(R @ M @ R)).astype(complex)
    E = preconditioned_operator(sys, p)
    z = scipy.linalg.eigvals(E)
    return z[np.lexsort((z.imag, z.real))]


def defect_imag_tol(E):
    """Imaginary-part slack for eigenvalues of a possibly defective operator.

    A Jordan block of size 3 spreads computed eigenvalues by about
    ``(eps ||E||)^(1/3)``, far above a fixed 1e-8; the minimal-polynomial
    norms carry the strict check instead.
    """
    return max(IMAG_RTOL, 10 * (la.EPS * max(1.0, np.linalg.norm(E))) ** (1 / 3))


def preconditioned_spectrum(sys, p, imag_tol=None):
    """Real eigenvalues of the preconditioned operator, sorted ascending.

    Imaginary parts are asserted below ``imag_tol * max(1, |lambda|_max)``
    before being discarded.  The default is ``1e-8`` for symmetric kinds and
    :func:`defect_imag_tol` otherwise.
    """
    z = preconditioned_eigenvalues(sys, p)
    if not p.symmetric:
        if imag_tol is None:
            imag_tol = defect_imag_tol(preconditioned_operator(sys, p))
        scale = max(1.0, float(np.max(np.abs(z))))
        worst = float(np.max(np.abs(z.imag), initial=0.0))
        if worst > imag_tol * scale:
            raise ContractError(f"preconditioned spectrum has imaginary parts up to {worst:.3e}")
    return np.sort(z.real)


# --------------------------------------------------------------------------
# Theorem verification


@dataclass
class SpectrumVerdict:
    theorem_id: str
    expected: list
    observed: list
    matched: bool
    detail: str
    applicable: bool = True
    max_violation: float = 0.0
    extras: dict = field(default_factory=dict)


def _inapplicable(theorem_id, reason):
    return SpectrumVerdict(theorem_id, [], [], False, f"theorem inapplicable: {reason}", applicable=False,
                           max_violation=float("nan"))


def gamma_star(sys):
    """Smallest nonzero generalized eigenvalue of ``(G, A1)``.

    ``G = B1' (B1 A1^{-1} B1')^{-1} B1 + B2' (B2 A1^{-1} B2')^{-1} B2``.  Since
    ``G`` has a kernel whenever ``n2 + n3 < n1``, the minimizing Rayleigh
    quotient is taken over the complement of ``ker(G)``.
    """
    A1, B1, B2 = sys.A1, sys.B1, sys.B2
    a1 = la.Cholesky(A1, "A1")
    G = np.zeros_like(A1)
    for B, name in ((B1, "B1 A1^-1 B1'"), (B2, "B2 A1^-1 B2'")):
        S = la.Cholesky(la.symmetrize(B @ a1.solve(B.T)), name)
        G += B.T @ S.solve(B)
    ev = scipy.linalg.eigh(la.symmetrize(G), la.symmetrize(A1), eigvals_only=True)
    nz = ev[ev > 1e-8 * max(1.0, ev[-1])]
    if nz.size == 0:
        raise ContractError("G has no nonzero generalized eigenvalue")
    return float(nz[0])


def _assign(observed, values, intervals, radius, tol):
    """Cluster eigenvalues onto exact values, then onto intervals.

    Returns per-value counts, per-interval counts, unassigned values and the
    largest distance from an interval among interval members.
    """
    vcount = [0] * len(values)
    icount = [0] * len(intervals)
    left = []
    for x in observed:
        d = [abs(x - v) for v in values]
        if d and min(d) <= radius:
            vcount[int(np.argmin(d))] += 1
            continue
        placed = False
        for k, (lo, hi, *_open) in enumerate(intervals):
            if lo - tol <= x <= hi + tol:
                icount[k] += 1
                placed = True
                break
        if not placed:
            left.append(float(x))
    return vcount, icount, left


def _interval_violation(x, intervals):
    return min(max(0.0, lo - x, x - hi) for lo, hi in intervals)


def _b_full_row_rank(sys, which=("B1", "B2")):
    return all(la.has_full_row_rank(getattr(sys, b)) for b in which)


def theorem_for(sys, kind):
    """Theorem identifier checked for ``(sys, kind)`` by :func:`verify_theorem`."""
    kind = Kind(kind)
    zero2, zero3 = la.is_zero(sys.A2), la.is_zero(sys.A3)
    if kind is Kind.PD_TRI:
        if zero2 and zero3:
            return "pdt_six_eigenvalues"
        if zero2:
            return "pdt_planted_nullity"
        return "pdt_intervals"
    return {
        Kind.PD1_ARROW: "pd1_gamma_intervals",
        Kind.PD2_ARROW: "pd2_unit_golden",
        Kind.PT1_ARROW: "pt1_minimal_polynomial",
        Kind.PT2_ARROW: "pt2_real_interval",
        Kind.PT_TRI: "ptt_minimal_polynomial",
        Kind.SHIFT_SPLIT: "none",
    }[kind]


THEOREMS = (
    "pdt_six_eigenvalues",
    "pdt_planted_nullity",
    "pdt_intervals",
    "pd1_gamma_intervals",
    "pd2_unit_golden",
    "pt1_minimal_polynomial",
    "pt2_real_interval",
    "ptt_minimal_polynomial",
)

_KIND_OF = {
    "pdt_six_eigenvalues": Kind.PD_TRI,
    "pdt_planted_nullity": Kind.PD_TRI,
    "pdt_intervals": Kind.PD_TRI,
    "pd1_gamma_intervals": Kind.PD1_ARROW,
    "pd2_unit_golden": Kind.PD2_ARROW,
    "pt1_minimal_polynomial": Kind.PT1_ARROW,
    "pt2_real_interval": Kind.PT2_ARROW,
    "ptt_minimal_polynomial": Kind.PT_TRI,
}


def verify_theorem(sys, p, theorem_id=None, tol=MATCH_TOL, radius=CLUSTER_RADIUS):
    """Compare the preconditioned spectrum with the structure a theorem predicts.

    The theorem defaults to :func:`theorem_for`; a different one may be
    requested when several apply (e.g. the interval bound also covers the
    zero-block special cases).  Unmet hypotheses yield an inapplicable verdict.
    """
    tid = theorem_id or theorem_for(sys, p.kind)
    if tid not in _KIND_OF:
        return _inapplicable(tid, f"no spectral theorem for preconditioner '{p.kind.value}'")
    if _KIND_OF[tid] is not p.kind:
        return _inapplicable(tid, f"theorem concerns '{_KIND_OF[tid].value}', got '{p.kind.value}'")
    try:
        return _VERIFIERS[tid](sys, p, tid, tol, radius)
    except (ContractError, FactorizationError) as exc:
        return SpectrumVerdict(tid, [], [], False, f"verification failed: {exc}", max_violation=float("inf"))


def _vlist(values, mults):
    return [{"value": float(v), "multiplicity": int(m)} for v, m in zip(values, mults)]


def _verify_six(sys, p, tid, tol, radius):
    n1, n2, n3 = sys.sizes
    if not (la.is_zero(sys.A2) and la.is_zero(sys.A3)):
        return _inapplicable(tid, "requires A2 = 0 and A3 = 0")
    if not (n1 >= n2 >= n3) or not _b_full_row_rank(sys):
        return _inapplicable(tid, "requires n1 >= n2 >= n3 and full row rank B1, B2")
    values = [1.0, PHI, PSI, *HEPTAGON]
    mults = [n1 - n2, n2 - n3, n2 - n3, n3, n3, n3]
    obs = preconditioned_spectrum(sys, p)
    expected_sorted = np.sort(np.repeat(values, mults))
    diff = np.abs(obs - expected_sorted)
    worst = float(diff.max(initial=0.0))
    vcount, _, left = _assign(obs, values, [], radius, tol)
    matched = worst <= tol and vcount == mults
    detail = f"max sorted deviation {worst:.3e}; cluster counts {vcount} vs {mults}"
    return SpectrumVerdict(tid, _vlist(values, mults), obs.tolist(), bool(matched), detail, max_violation=worst,
                           extras={"counts": vcount})


def _verify_planted(sys, p, tid, tol, radius):
    n1, n2, n3 = sys.sizes
    if not la.is_zero(sys.A2):
        return _inapplicable(tid, "requires A2 = 0")
    if not la.is_psd(sys.A3):
        return _inapplicable(tid, "requires A3 positive semidefinite")
    if not (n1 >= n2 >= n3) or not _b_full_row_rank(sys, ("B1",)):
        return _inapplicable(tid, "requires n1 >= n2 >= n3 and full row rank B1")
    k = la.nullity(sys.B2)
    values = [1.0, PHI, PSI]
    mults = [n1 - n2 + k, n2 - n3 + k, n2 - n3 + k]
    h1, h3, h5 = HEPTAGON
    intervals = [(h5, PSI, False, True), (h3, 1.0, False, True), (PHI, h1, True, False)]
    obs = preconditioned_spectrum(sys, p)
    vcount, icount, left = _assign(obs, values, intervals, radius, tol)
    want_i = [n3 - k] * 3
    worst = max((_interval_violation(x, [(lo, hi) for lo, hi, *_ in intervals]) for x in left), default=0.0)
    matched = vcount == mults and icount == want_i and not left
    expected = _vlist(values, mults) + [{"interval": [lo, hi], "count": n3 - k} for lo, hi, *_ in intervals]
    detail = f"nullity k={k}; value counts {vcount} vs {mults}; interval counts {icount} vs {want_i}; unassigned {len(left)}"
    return SpectrumVerdict(tid, expected, obs.tolist(), bool(matched), detail, max_violation=float(worst),
                           extras={"k": k, "value_counts": vcount, "interval_counts": icount})


def _verify_intervals(sys, p, tid, tol, radius):
    if not (la.is_psd(sys.A2) and la.is_psd(sys.A3)):
        return _inapplicable(tid, "requires A2, A3 positive semidefinite")
    intervals = [(-PHI, PSI), (HEPTAGON[1], HEPTAGON[0])]
    obs = preconditioned_spectrum(sys, p)
    worst = max((_interval_violation(x, intervals) for x in obs), default=0.0)
    matched = worst <= tol
    expected = [{"interval": list(iv), "count": None} for iv in intervals]
    return SpectrumVerdict(tid, expected, obs.tolist(), bool(matched), f"max violation {worst:.3e}",
                           max_violation=float(worst))


def _verify_pd1(sys, p, tid, tol, radius):
    if not (la.is_zero(sys.A2) and la.is_zero(sys.A3)):
        return _inapplicable(tid, "requires A2 = 0 and A3 = 0")
    if not _b_full_row_rank(sys):
        return _inapplicable(tid, "requires full row rank B1, B2")
    g = gamma_star(sys)
    neg_hi = (1 - math.sqrt(1 + 4 * g)) / 2
    pos_lo = (1 + math.sqrt(1 + 4 * g)) / 2
    obs = preconditioned_spectrum(sys, p)
    worst = 0.0
    for x in obs:
        if abs(x - 1.0) <= tol:
            continue
        if x < 1.0:
            v = max(0.0, x - neg_hi, -1.0 - x)
        else:
            v = max(0.0, pos_lo - x, x - 2.0)
        worst = max(worst, float(v))
    strict_ok = bool(np.all(obs > -1.0) and np.all(obs < 2.0))
    matched = strict_ok and worst <= tol
    expected = [{"interval": [-1.0, neg_hi], "count": None}, {"value": 1.0, "multiplicity": None},
                {"interval": [pos_lo, 2.0], "count": None}]
    return SpectrumVerdict(tid, expected, obs.tolist(), bool(matched),
                           f"gamma*={g:.6g}; max violation {worst:.3e}; strict ends {'ok' if strict_ok else 'violated'}",
                           max_violation=worst, extras={"gamma_star": g})


def _verify_pd2(sys, p, tid, tol, radius):
    n1, n2, n3 = sys.sizes
    if not (la.is_zero(sys.A2) and la.is_zero(sys.A3)):
        return _inapplicable(tid, "requires A2 = 0 and A3 = 0")
    if la.numerical_rank(np.vstack([sys.B1, sys.B2])) != n2 + n3:
        return _inapplicable(tid, "requires [B1; B2] of full row rank (A0 nonsingular)")
    a1 = la.Cholesky(sys.A1, "A1")
    coupling = sys.B2 @ a1.solve(sys.B1.T)
    golden_min = max(n2 - n3, n2 - la.numerical_rank(coupling), 0)
    units = n1 - (n2 + n3)
    obs = preconditioned_spectrum(sys, p)
    vcount, _, _ = _assign(obs, [1.0, PHI, PSI], [], radius, tol)
    devs = [abs(x - v) for x in obs for v in (1.0, PHI, PSI) if abs(x - v) <= radius]
    worst = float(max(devs, default=0.0))
    matched = vcount[0] == units and vcount[1] >= golden_min and vcount[2] >= golden_min and worst <= tol
    expected = [{"value": 1.0, "multiplicity": units},
                {"value": PHI, "multiplicity_at_least": golden_min},
                {"value": PSI, "multiplicity_at_least": golden_min}]
    detail = f"unit {vcount[0]} (want {units}); golden {vcount[1]}, {vcount[2]} (want >= {golden_min})"
    return SpectrumVerdict(tid, expected, obs.tolist(), bool(matched), detail, max_violation=worst,
                           extras={"counts": vcount})


def minimal_polynomial_norms(sys, p):
    """``(||E^2||_F, ||E^3||_F, ||M P^{-1}||_F)`` for ``E = M P^{-1} - I``."""
    E = preconditioned_operator(sys, p)
    F = E - np.eye(E.shape[0])
    F2 = F @ F
    return float(np.linalg.norm(F2)), float(np.linalg.norm(F2 @ F)), float(np.linalg.norm(E))


def _verify_minpoly(sys, p, tid, tol, radius):
    n2_norm, n3_norm, scale = minimal_polynomial_norms(sys, p)
    z = preconditioned_eigenvalues(sys, p)
    spread = float(np.max(np.abs(z - 1.0), initial=0.0))
    cube_ok = n3_norm <= MINPOLY_RTOL * scale
    square_nontrivial = n2_norm > MINPOLY_NONTRIVIAL * scale
    spread_ok = spread <= defect_imag_tol(preconditioned_operator(sys, p)) * max(1.0, float(np.max(np.abs(z))))
    matched = cube_ok and square_nontrivial and spread_ok
    detail = (f"||E^3||_F={n3_norm:.3e} (limit {MINPOLY_RTOL * scale:.3e}); ||E^2||_F={n2_norm:.3e} "
              f"(floor {MINPOLY_NONTRIVIAL * scale:.3e}); "
              f"max |lambda-1|={spread:.3e}")
    return SpectrumVerdict(tid, [{"value": 1.0, "multiplicity": sys.dim, "minimal_polynomial_degree": 3}],
                           np.sort(z.real).tolist(), bool(matched), detail, max_violation=n3_norm / scale,
                           extras={"E2_norm": n2_norm, "E3_norm": n3_norm, "operator_norm": scale,
                                   "eigenvalue_spread": spread})


def _verify_pt2(sys, p, tid, tol, radius):
    if not la.is_zero(sys.A2):
        return _inapplicable(tid, "requires A2 = 0")
    if not la.is_psd(sys.A3):
        return _inapplicable(tid, "requires A3 positive semidefinite")
    # only real parts are bounded; complex pairs are allowed
    obs = np.sort(preconditioned_eigenvalues(sys, p).real)
    worst = float(max((max(0.0, -x, x - 2.0) for x in obs), default=0.0))
    strict = bool(np.all(obs > 0.0) and np.all(obs < 2.0))
    matched = worst <= tol
    return SpectrumVerdict(tid, [{"interval": [0.0, 2.0], "count": sys.dim, "open": True}], obs.tolist(),
                           bool(matched), f"max violation {worst:.3e}; strictly inside: {strict}",
                           max_violation=worst, extras={"strictly_inside": strict})


_VERIFIERS = {
    "pdt_six_eigenvalues": _verify_six,
    "pdt_planted_nullity": _verify_planted,
    "pdt_intervals": _verify_intervals,
    "pd1_gamma_intervals": _verify_pd1,
    "pd2_unit_golden": _verify_pd2,
    "pt1_minimal_polynomial": _verify_minpoly,
    "pt2_real_interval": _verify_pt2,
    "ptt_minimal_polynomial": _verify_minpoly,
}
