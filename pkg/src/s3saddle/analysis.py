"""Spectral summaries, invertibility tests and eigenvalue bounds for S^3 systems.

Extremal bounds come from the R-matrix method: ``v' M v`` is bounded above by
``[|x_1|, ..., |x_k|] R+ [|x_1|, ..., |x_k|]'`` where ``R+`` is the small
symmetric matrix of block extremes (largest diagonal eigenvalues, largest
off-diagonal singular values), and below by the analogous ``R-``.  For three
blocks the characteristic polynomials of ``R+`` and ``R-`` are cubics whose
roots give the extremal bounds; interior bounds come from the regularized
classical saddle-point intervals.

Cubics used (``a, b, c`` are block eigenvalue extremes, ``s1, s2`` singular
value extremes)::

    arrow       p = charpoly(R_U),  R_U = [[mu1max, s1max, s2max], [s1max, -mu2min, 0], [s2max, 0, -mu3min]]
                q = charpoly(R_L),  R_L = [[mu1min, -s1max, -s2max], [-s1max, -mu2max, 0], [-s2max, 0, -mu3max]]
    tridiagonal r (interior positive bound)
                s = charpoly(R-),   R- = [[mu1min, -s1max, 0], [-s1max, -mu2max, -s2max], [0, -s2max, mu3min]]
                t = charpoly(R+),   R+ = [[mu1max, s1max, 0], [s1max, -mu2min, s2max], [0, s2max, mu3max]]

All polynomials are monic and stored as ``(1, c2, c1, c0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _linalg as la
from .block_model import Layout, assemble_dense, permute_23
from .errors import BoundInapplicableError, ContractError

SYMMETRY_RTOL = 1e-10
CUBIC_IMAG_RTOL = 1e-7
CONTAINMENT_TOL = 1e-8


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ContractError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    def distance(self, x):
        """Distance from ``x`` to the closed interval (0 inside)."""
        if x < self.lo:
            return self.lo - x
        if x > self.hi:
            return x - self.hi
        return 0.0

    def contains(self, x, tol=0.0):
        return self.distance(x) <= tol


@dataclass(frozen=True)
class SpectralSummary:
    """Extreme eigenvalues of A1, A2, A3 and extreme singular values of B1, B2.

    ``sig*_min`` is the smallest of ``min(rows, cols)`` singular values when
    the block is short and wide, and 0 when it has more rows than columns or
    is numerically rank deficient.  ``sig_stack_min`` is the same quantity for
    the stacked ``[B1; B2]`` of an arrow system (None otherwise).
    """

    mu1_min: float
    mu1_max: float
    mu2_min: float
    mu2_max: float
    mu3_min: float
    mu3_max: float
    sig1_min: float
    sig1_max: float
    sig2_min: float
    sig2_max: float
    sig_stack_min: float | None = None
    layout: Layout | None = None

    def __post_init__(self):
        for i in (1, 2, 3):
            lo, hi = getattr(self, f"mu{i}_min"), getattr(self, f"mu{i}_max")
            if not lo <= hi:
                raise ContractError(f"mu{i}_min > mu{i}_max")
        for i in (1, 2):
            lo, hi = getattr(self, f"sig{i}_min"), getattr(self, f"sig{i}_max")
            if not 0 <= lo <= hi:
                raise ContractError(f"sig{i} values must satisfy 0 <= min <= max")
        if self.layout is not None:
            object.__setattr__(self, "layout", Layout(self.layout))


def eig_sym(M):
    """Ascending eigenvalues of a symmetric matrix."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {M.shape}")
    scale = np.max(np.abs(M)) if M.size else 0.0
    if np.max(np.abs(M - M.T), initial=0.0) > SYMMETRY_RTOL * max(scale, 1e-300):
        raise ContractError("matrix is not symmetric")
    return la.eigvalsh(M)


def _sigma_extremes(b):
    s = la.singular_values(b)
    if s.size == 0:
        return 0.0, 0.0
    smax = float(s[0])
    if b.shape[0] > b.shape[1] or s[-1] <= la.rank_tol(s, b.shape):
        return 0.0, smax
    return float(s[-1]), smax


def spectral_summary(sys):
    """Block extremes of ``sys``; permuted_k systems are summarized in tridiagonal order."""
    if sys.layout is Layout.PERMUTED_K:
        sys = permute_23(sys)
    mus = []
    for a in (sys.A1, sys.A2, sys.A3):
        ev = eig_sym(a)
        mus += [float(ev[0]), float(ev[-1])]
    s1 = _sigma_extremes(sys.B1)
    s2 = _sigma_extremes(sys.B2)
    stack = None
    if sys.layout is Layout.ARROW:
        stack = _sigma_extremes(np.vstack([sys.B1, sys.B2]))[0]
    return SpectralSummary(*mus, s1[0], s1[1], s2[0], s2[1], sig_stack_min=stack, layout=sys.layout)


# --------------------------------------------------------------------------
# Invertibility


@dataclass(frozen=True)
class InvertibilityReport:
    layout: Layout
    conditions: dict
    verdict: bool
    notes: list = field(default_factory=list)


def _trivial_kernel_intersection(*blocks):
    """``ker(X1) ∩ ker(X2) ∩ ...`` is trivial iff the stacked matrix has full column rank."""
    return la.has_full_column_rank(np.vstack(blocks))


def check_necessary_invertibility(sys):
    """Kernel-intersection conditions every invertible system satisfies."""
    if sys.layout is Layout.PERMUTED_K:
        sys = permute_23(sys)
    A1, A2, A3, B1, B2 = sys.A1, sys.A2, sys.A3, sys.B1, sys.B2
    if sys.layout is Layout.ARROW:
        cond = {
            "ker_A1_B1_B2": _trivial_kernel_intersection(A1, B1, B2),
            "ker_B1T_A2": _trivial_kernel_intersection(B1.T, A2),
            "ker_B2T_A3": _trivial_kernel_intersection(B2.T, A3),
        }
    else:
        cond = {
            "ker_A1_B1": _trivial_kernel_intersection(A1, B1),
            "ker_B1T_A2_B2": _trivial_kernel_intersection(B1.T, A2, B2),
            "ker_B2T_A3": _trivial_kernel_intersection(B2.T, A3),
        }
    cond = {k: bool(v) for k, v in cond.items()}
    return InvertibilityReport(sys.layout, cond, all(cond.values()))


def check_sufficient_invertibility(sys):
    """Sufficient conditions for invertibility given SPD A1 and PSD A2, A3."""
    if sys.layout is Layout.PERMUTED_K:
        sys = permute_23(sys)
    notes = []
    n1, n2, n3 = sys.sizes
    b1_full = la.has_full_row_rank(sys.B1)
    b2_full = la.has_full_row_rank(sys.B2)
    base = la.is_pd(sys.A1) and la.is_psd(sys.A2) and la.is_psd(sys.A3)
    if not base:
        notes.append("requires A1 SPD and A2, A3 PSD")
    if sys.layout is Layout.ARROW:
        a3_pd = la.is_pd(sys.A3)
        stacked = la.numerical_rank(np.vstack([sys.B1, sys.B2])) == n2 + n3
        cond = {
            "B1_full_row_rank": b1_full,
            "B2_full_row_rank": b2_full,
            "A3_pd": a3_pd,
            "row_spaces_disjoint": stacked,
        }
        verdict = base and b1_full and b2_full and (a3_pd or stacked)
    else:
        chain = n1 >= n2 >= n3
        cond = {"B1_full_row_rank": b1_full, "B2_full_row_rank": b2_full, "dimension_chain": chain}
        verdict = base and b1_full and b2_full and chain
    cond = {k: bool(v) for k, v in cond.items()}
    return InvertibilityReport(sys.layout, cond, bool(verdict), notes)


# --------------------------------------------------------------------------
# Cubics and R-matrices


def _polyval(coeffs, x):
    return np.polyval(np.asarray(coeffs, dtype=float), x)


def cubic_roots(c3, c2, c1, c0, name="cubic"):
    """Three real roots, ascending, of ``c3 x^3 + c2 x^2 + c1 x + c0``.

    Companion-matrix eigenvalues followed by a Newton step.  Raises
    :class:`ContractError` if the roots are not all real.
    """
    if c3 == 0:
        raise ContractError(f"{name}: leading coefficient is zero")
    a2, a1, a0 = c2 / c3, c1 / c3, c0 / c3
    C = np.array([[-a2, -a1, -a0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    z = scipy.linalg.eigvals(C)
    scale = max(1.0, float(np.max(np.abs(z))))
    if np.max(np.abs(z.imag)) > CUBIC_IMAG_RTOL * scale:
        raise ContractError(f"{name} has a complex root pair: {z.tolist()}")
    coeffs = (1.0, a2, a1, a0)
    dcoeffs = (3.0, 2.0 * a2, a1)
    roots = []
    for x in np.sort(z.real):
        d = _polyval(dcoeffs, x)
        if d != 0:
            step = _polyval(coeffs, x) / d
            y = x - step
            if abs(_polyval(coeffs, y)) <= abs(_polyval(coeffs, x)):
                x = y
        roots.append(float(x))
    return sorted(roots)


def charpoly3(R):
    """Monic characteristic polynomial ``det(x I - R)`` of a 3x3 matrix."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    minors = (R[0, 0] * R[1, 1] - R[0, 1] * R[1, 0]
              + R[0, 0] * R[2, 2] - R[0, 2] * R[2, 0]
              + R[1, 1] * R[2, 2] - R[1, 2] * R[2, 1])
    return (1.0, float(-tr), float(minors), float(-np.linalg.det(R)))


def _arrow_cubic(a, b, c, s1, s2):
    """charpoly of [[a, ±s1, ±s2], [±s1, -b, 0], [±s2, 0, -c]] (sign of s irrelevant)."""
    return (
        1.0,
        -(a - b - c),
        -(a * (b + c) - b * c + s1 ** 2 + s2 ** 2),
        -(a * b * c + s1 ** 2 * c + s2 ** 2 * b),
    )


def _tridiag_cubic(a, b, c, s1, s2):
    """charpoly of [[a, ±s1, 0], [±s1, -b, ±s2], [0, ±s2, c]]."""
    return (
        1.0,
        -(a - b + c),
        a * c - a * b - b * c - s1 ** 2 - s2 ** 2,
        a * b * c + a * s2 ** 2 + s1 ** 2 * c,
    )


def poly_p(s):
    return _arrow_cubic(s.mu1_max, s.mu2_min, s.mu3_min, s.sig1_max, s.sig2_max)


def poly_q(s):
    return _arrow_cubic(s.mu1_min, s.mu2_max, s.mu3_max, s.sig1_max, s.sig2_max)


def poly_r(s):
    return (
        1.0,
        s.mu2_max - s.mu1_min,
        -(s.mu1_min * s.mu2_max + s.sig1_max ** 2 + s.sig2_min ** 2),
        s.mu1_min * s.sig2_min ** 2,
    )


def poly_s(s):
    return _tridiag_cubic(s.mu1_min, s.mu2_max, s.mu3_min, s.sig1_max, s.sig2_max)


def poly_t(s):
    return _tridiag_cubic(s.mu1_max, s.mu2_min, s.mu3_max, s.sig1_max, s.sig2_max)


def r_matrices(diag_min, diag_max, offdiag):
    """Reduced matrices ``R+`` and ``R-`` from per-block extremes.

    ``diag_min[i]``/``diag_max[i]`` are the extreme eigenvalues of the
    diagonal block ``M_ii`` and ``offdiag[i][j]`` the largest singular value of
    ``M_ij`` (only ``i != j`` is read; must be symmetric).
    """
    lo = np.asarray(diag_min, dtype=float)
    hi = np.asarray(diag_max, dtype=float)
    S = np.array(offdiag, dtype=float)
    k = lo.size
    if hi.size != k or S.shape != (k, k):
        raise ContractError("inconsistent R-matrix grid sizes")
    S = S.copy()
    np.fill_diagonal(S, 0.0)
    if np.any(S < 0) or not np.array_equal(S, S.T):
        raise ContractError("off-diagonal singular values must be symmetric and nonnegative")
    return np.diag(hi) + S, np.diag(lo) - S


def r_matrix_bounds(diag_min, diag_max, offdiag):
    """``(upper, lower) = (lambda_max(R+), lambda_min(R-))``."""
    Rp, Rm = r_matrices(diag_min, diag_max, offdiag)
    return float(la.eigvalsh(Rp)[-1]), float(la.eigvalsh(Rm)[0])


def block_grid(M, sizes):
    """Per-block extremes of a symmetric block matrix for :func:`r_matrix_bounds`."""
    s = [slice(a, b) for a, b in zip(np.cumsum([0, *sizes[:-1]]), np.cumsum(sizes))]
    k = len(sizes)
    lo, hi = np.zeros(k), np.zeros(k)
    off = np.zeros((k, k))
    for i in range(k):
        ev = eig_sym(M[s[i], s[i]])
        lo[i], hi[i] = ev[0], ev[-1]
        for j in range(k):
            if i != j:
                off[i, j] = la.norm2(M[s[i], s[j]])
    off = np.maximum(off, off.T)
    return lo, hi, off


def r_matrix_bounds_of(M, sizes):
    return r_matrix_bounds(*block_grid(M, sizes))


# --------------------------------------------------------------------------
# Bound reports


@dataclass
class BoundReport:
    negative_interval: Interval
    positive_interval: Interval
    exact_eigs: list | None = None
    polynomials: dict = field(default_factory=dict)
    contained: bool | None = None
    max_violation: float | None = None
    details: dict = field(default_factory=dict)


def classical_sp_bounds(muA, sigB, muC):
    """Eigenvalue intervals of ``[[A, B'], [B, -C]]`` from block extremes.

    ``muA``, ``sigB``, ``muC`` are :class:`Interval` s of the eigenvalues of A,
    singular values of B and eigenvalues of C.
    """
    if not muA.lo > 0:
        raise ContractError("requires mu_A^min > 0")
    if not sigB.lo > 0:
        raise ContractError("requires sigma_B^min > 0")
    if not muC.lo >= 0:
        raise ContractError("requires mu_C^min >= 0")
    a_lo, a_hi, s_lo, s_hi, c_hi = muA.lo, muA.hi, sigB.lo, sigB.hi, muC.hi
    neg = Interval(
        0.5 * (a_lo - c_hi - math.sqrt((a_lo + c_hi) ** 2 + 4 * s_hi ** 2)),
        0.5 * (a_hi - math.sqrt(a_hi ** 2 + 4 * s_lo ** 2)),
    )
    pos = Interval(a_lo, 0.5 * (a_hi + math.sqrt(a_hi ** 2 + 4 * s_hi ** 2)))
    return neg, pos


def _poly_entry(coeffs, roots):
    return {"coefficients": list(coeffs), "roots": list(roots)}


def _sign_pattern(roots, n_pos, n_neg, name, allow_zero=False):
    """Assert the root signs; with ``allow_zero`` the negative roots may be (numerically) zero."""
    zero = 1e-12 * max(1.0, max(abs(r) for r in roots)) if allow_zero else 0.0
    pos = sum(1 for r in roots if r > zero)
    neg = sum(1 for r in roots if r < -zero) if not allow_zero else len(roots) - pos
    if (pos, neg) != (n_pos, n_neg):
        kind = "nonpositive" if allow_zero else "negative"
        raise ContractError(f"{name} roots {roots} do not have {n_pos} positive and {n_neg} {kind}")


def arrow_bounds(summary):
    """Eigenvalue intervals for the arrow form.

    Extremal endpoints are the positive root of ``p`` and the most negative
    root of ``q``.  Interior endpoints apply the regularized classical
    intervals to the partition ``A1 | [B1; B2]``: the positive side starts at
    ``mu1_min`` and the negative side ends at
    ``(mu1_max - sqrt(mu1_max^2 + 4 sigma^2)) / 2`` where ``sigma`` is the
    smallest singular value of the stacked ``[B1; B2]``.
    """
    s = summary
    if s.layout not in (None, Layout.ARROW):
        raise ContractError("arrow_bounds needs an arrow summary")
    if s.sig1_min <= 0 or s.sig2_min <= 0:
        raise BoundInapplicableError("B1 and B2 must have full row rank")
    if s.sig_stack_min is None or s.sig_stack_min <= 0:
        raise BoundInapplicableError(
            "row spaces of B1 and B2 intersect (stacked [B1; B2] is rank deficient); "
            "the interior negative bound degenerates to 0"
        )
    p, q = poly_p(s), poly_q(s)
    pr, qr = cubic_roots(*p, name="p"), cubic_roots(*q, name="q")
    # singular A2 or A3 puts a root of p or q at 0
    _sign_pattern(pr, 1, 2, "p", allow_zero=True)
    _sign_pattern(qr, 1, 2, "q", allow_zero=True)
    p_plus, q_minus = pr[-1], qr[0]
    neg_hi = 0.5 * (s.mu1_max - math.sqrt(s.mu1_max ** 2 + 4 * s.sig_stack_min ** 2))
    sum_sq = 0.5 * (s.mu1_max - math.sqrt(s.mu1_max ** 2 + 4 * (s.sig1_min ** 2 + s.sig2_min ** 2)))
    return BoundReport(
        negative_interval=Interval(q_minus, neg_hi),
        positive_interval=Interval(s.mu1_min, p_plus),
        polynomials={"p": _poly_entry(p, pr), "q": _poly_entry(q, qr)},
        details={
            "p_plus": p_plus,
            "q_minus_min": q_minus,
            "sigma_stack_min": s.sig_stack_min,
            "negative_hi_sum_of_squares": sum_sq,
        },
    )


def tridiag_bounds(summary):
    """Eigenvalue intervals for the tridiagonal form.

    ``[s_minus, (mu1_max - sqrt(mu1_max^2 + 4 sig1_min^2)) / 2]`` and
    ``[r_plus_min, t_plus_max]`` where ``s_minus`` is the negative root of
    ``s = charpoly(R-)`` and ``t_plus_max`` the largest root of ``t = charpoly(R+)``.
    """
    s = summary
    if s.layout not in (None, Layout.TRIDIAGONAL):
        raise ContractError("tridiag_bounds needs a tridiagonal summary")
    if s.sig1_min <= 0:
        raise BoundInapplicableError("B1 must have full row rank")
    if s.sig2_min <= 0:
        raise BoundInapplicableError("B2 must have full row rank for the interior positive bound")
    polys = {"r": poly_r(s), "s": poly_s(s), "t": poly_t(s)}
    roots = {k: cubic_roots(*v, name=k) for k, v in polys.items()}
    for k, v in roots.items():
        _sign_pattern(v, 2, 1, k)
    s_minus = roots["s"][0]
    r_plus_min = roots["r"][1]
    t_plus_max = roots["t"][2]
    neg_hi = 0.5 * (s.mu1_max - math.sqrt(s.mu1_max ** 2 + 4 * s.sig1_min ** 2))
    return BoundReport(
        negative_interval=Interval(s_minus, neg_hi),
        positive_interval=Interval(r_plus_min, t_plus_max),
        polynomials={k: _poly_entry(polys[k], roots[k]) for k in polys},
        details={"s_minus": s_minus, "r_plus_min": r_plus_min, "t_plus_max": t_plus_max},
    )


def bounds_for(sys):
    """Summary and bound report for a system of any layout."""
    summ = spectral_summary(sys)
    if summ.layout is Layout.ARROW:
        return summ, arrow_bounds(summ)
    return summ, tridiag_bounds(summ)


def verify_containment(spectrum, report, tol=CONTAINMENT_TOL):
    """Mark ``report`` with whether every eigenvalue lies in the union of its intervals."""
    worst = 0.0
    for x in np.asarray(spectrum, dtype=float).ravel():
        d = min(report.negative_interval.distance(x), report.positive_interval.distance(x))
        worst = max(worst, d)
    report.max_violation = float(worst)
    report.contained = bool(worst <= tol)
    report.details["tolerance"] = float(tol)
    return report.contained


def spectrum_of(sys):
    return eig_sym(assemble_dense(sys))
