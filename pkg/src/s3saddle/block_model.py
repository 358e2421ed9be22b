"""Data model for symmetric double saddle-point (S^3) block systems.

A :class:`BlockSystem3` holds the five blocks ``A1, A2, A3, B1, B2`` and a
layout tag.  The layouts place the blocks as follows::

    arrow         tridiagonal        permuted_k
    [A1 B1' B2']  [A1  B1'  0 ]      [A1  0   B1']
    [B1 -A2  0 ]  [B1 -A2   B2']     [0   A2  B2']
    [B2  0 -A3 ]  [0   B2   A3]      [B1  B2 -A3 ]

``permuted_k`` is the symmetric block permutation of ``tridiagonal`` that
swaps the second and third block rows/columns; :func:`permute_23` converts
between the two.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _linalg as la
from .errors import ContractError, StructureError, UnsupportedLayoutError

BLOCK_NAMES = ("A1", "A2", "A3", "B1", "B2")


class Layout(str, enum.Enum):
    ARROW = "arrow"
    TRIDIAGONAL = "tridiagonal"
    PERMUTED_K = "permuted_k"


def _expected_b_shapes(layout, n1, n2, n3):
    if layout is Layout.ARROW:
        return (n2, n1), (n3, n1)
    if layout is Layout.TRIDIAGONAL:
        return (n2, n1), (n3, n2)
    return (n3, n1), (n3, n2)


@dataclass(frozen=True, eq=False)
class BlockSystem3:
    """Immutable 3x3 block data plus layout tag.

    Diagonal blocks are symmetrized on ingest.  Arrays are stored read-only.
    """

    A1: np.ndarray
    A2: np.ndarray
    A3: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    layout: Layout = Layout.TRIDIAGONAL
    label: str = ""

    def __post_init__(self):
        layout = Layout(self.layout)
        object.__setattr__(self, "layout", layout)
        blocks = {name: la.as_matrix(getattr(self, name), name) for name in BLOCK_NAMES}
        for name in ("A1", "A2", "A3"):
            a = blocks[name]
            if a.shape[0] != a.shape[1]:
                raise StructureError(f"{name} must be square, got {a.shape}", block=name)
            if a.shape[0] < 1:
                raise StructureError(f"{name} must be nonempty", block=name)
            blocks[name] = la.symmetrize(a)
        n1, n2, n3 = (blocks[k].shape[0] for k in ("A1", "A2", "A3"))
        for name, want in zip(("B1", "B2"), _expected_b_shapes(layout, n1, n2, n3)):
            got = blocks[name].shape
            if got != want:
                raise StructureError(
                    f"{name} has shape {got}, expected {want} for layout '{layout.value}' "
                    f"with (n1, n2, n3) = {(n1, n2, n3)}",
                    block=name,
                )
        for name, a in blocks.items():
            if not np.all(np.isfinite(a)):
                raise StructureError(f"{name} contains non-finite entries", block=name)
            object.__setattr__(self, name, la.frozen(a))

    @property
    def sizes(self):
        return self.A1.shape[0], self.A2.shape[0], self.A3.shape[0]

    @property
    def n1(self):
        return self.A1.shape[0]

    @property
    def n2(self):
        return self.A2.shape[0]

    @property
    def n3(self):
        return self.A3.shape[0]

    @property
    def dim(self):
        return sum(self.sizes)

    def blocks(self):
        return {name: getattr(self, name) for name in BLOCK_NAMES}

    def replace(self, **changes):
        kw = self.blocks()
        kw.update(layout=self.layout, label=self.label)
        kw.update(changes)
        return BlockSystem3(**kw)

    def offsets(self):
        n1, n2, n3 = self.sizes
        return (0, n1, n1 + n2, n1 + n2 + n3)

    def same_as(self, other):
        """Exact (bitwise) equality of blocks and layout."""
        return self.layout is other.layout and all(
            np.array_equal(getattr(self, k), getattr(other, k)) for k in BLOCK_NAMES
        )


def assemble_dense(sys):
    """Full symmetric matrix of ``sys`` with the sign placement of its layout."""
    n1, n2, n3 = sys.sizes
    z = np.zeros
    if sys.layout is Layout.ARROW:
        rows = [
            [sys.A1, sys.B1.T, sys.B2.T],
            [sys.B1, -sys.A2, z((n2, n3))],
            [sys.B2, z((n3, n2)), -sys.A3],
        ]
    elif sys.layout is Layout.TRIDIAGONAL:
        rows = [
            [sys.A1, sys.B1.T, z((n1, n3))],
            [sys.B1, -sys.A2, sys.B2.T],
            [z((n3, n1)), sys.B2, sys.A3],
        ]
    else:
        rows = [
            [sys.A1, z((n1, n2)), sys.B1.T],
            [z((n2, n1)), sys.A2, sys.B2.T],
            [sys.B1, sys.B2, -sys.A3],
        ]
    return np.block(rows)


def block_slices(sizes):
    out, start = [], 0
    for n in sizes:
        out.append(slice(start, start + n))
        start += n
    return out


# --------------------------------------------------------------------------
# Conditions


@dataclass(frozen=True)
class ConditionReport:
    c1_holds: bool
    c2_holds: bool
    c3_holds: bool
    b1_nullity: int
    b2_nullity: int
    dimension_ok: bool
    notes: list = field(default_factory=list)

    @property
    def all_hold(self):
        return self.c1_holds and self.c2_holds and self.c3_holds and self.dimension_ok


def _as_tridiagonal(sys):
    return permute_23(sys) if sys.layout is Layout.PERMUTED_K else sys


def check_conditions(sys, nullity_threshold=1):
    """Evaluate the S^3 membership conditions and the dimension restrictions.

    Never raises; failures are reported in the returned :class:`ConditionReport`.
    """
    notes = []
    n1, n2, n3 = sys.sizes
    size_ok = n1 >= max(n2, n3)
    a1_pd = la.is_pd(sys.A1)
    if not size_ok:
        notes.append(f"A1 is smaller than a trailing diagonal block: n = {sys.sizes}")
    if not a1_pd:
        notes.append("A1 is not positive definite")
    a2_psd, a3_psd = la.is_psd(sys.A2), la.is_psd(sys.A3)
    for name, ok in (("A2", a2_psd), ("A3", a3_psd)):
        if not ok:
            notes.append(f"{name} is not positive semidefinite")
    k1, k2 = la.nullity(sys.B1), la.nullity(sys.B2)
    c3 = k1 <= nullity_threshold and k2 <= nullity_threshold
    if not c3:
        notes.append(f"off-diagonal nullities ({k1}, {k2}) exceed threshold {nullity_threshold}")

    dimension_ok = True
    if sys.layout is Layout.ARROW:
        if la.is_zero(sys.A2) and la.is_zero(sys.A3) and n1 < n2 + n3:
            dimension_ok = False
            notes.append("A2 = A3 = 0 requires n1 >= n2 + n3")
    else:
        t = _as_tridiagonal(sys)
        m1, m2, m3 = t.sizes
        if la.is_zero(t.A3) and not (m1 >= m2 >= m3):
            dimension_ok = False
            notes.append("A3 = 0 (tridiagonal ordering) requires n1 >= n2 >= n3")

    return ConditionReport(
        c1_holds=bool(size_ok and a1_pd),
        c2_holds=bool(a2_psd and a3_psd),
        c3_holds=bool(c3),
        b1_nullity=int(k1),
        b2_nullity=int(k2),
        dimension_ok=bool(dimension_ok),
        notes=notes,
    )


# --------------------------------------------------------------------------
# Permutations and scalings


def permutation_23_indices(n1, n2, n3):
    """Index vector p with ``T[p][:, p]`` equal to the (2,3)-swapped matrix."""
    return np.concatenate([np.arange(n1), n1 + n2 + np.arange(n3), n1 + np.arange(n2)])


def permutation_matrix_23(n1, n2, n3):
    """Explicit permutation matrix P with ``P.T @ T @ P`` the (2,3)-swapped matrix."""
    p = permutation_23_indices(n1, n2, n3)
    n = n1 + n2 + n3
    P = np.zeros((n, n))
    P[p, np.arange(n)] = 1.0
    return P


def permute_23(sys):
    """Swap the second and third block rows/columns: tridiagonal <-> permuted_k."""
    if sys.layout is Layout.ARROW:
        raise UnsupportedLayoutError("permute_23 applies to tridiagonal or permuted_k layouts only")
    target = Layout.PERMUTED_K if sys.layout is Layout.TRIDIAGONAL else Layout.TRIDIAGONAL
    return BlockSystem3(
        A1=sys.A1, A2=sys.A3, A3=sys.A2, B1=sys.B1, B2=sys.B2.T, layout=target, label=sys.label
    )


@dataclass(frozen=True, eq=False)
class BlockMatrix3:
    """A raw, possibly nonsymmetric, 3x3 block matrix.

    Used for systems that are not (yet) in S^3 form, e.g. nonsymmetric
    formulations that only need classifying or rescaling.
    """

    matrix: np.ndarray
    sizes: tuple

    def __post_init__(self):
        m = la.as_matrix(self.matrix, "matrix")
        sizes = tuple(int(n) for n in self.sizes)
        if len(sizes) != 3 or min(sizes) < 1:
            raise StructureError(f"sizes must be three positive counts, got {sizes}")
        if m.shape != (sum(sizes), sum(sizes)):
            raise StructureError(f"matrix shape {m.shape} does not match sizes {sizes}")
        object.__setattr__(self, "matrix", la.frozen(m))
        object.__setattr__(self, "sizes", sizes)

    def block(self, i, j):
        s = block_slices(self.sizes)
        return self.matrix[s[i], s[j]]


@dataclass(frozen=True)
class Classification:
    pattern: str  # "arrow", "tridiagonal", "permuted_k" or "none"
    symmetric: bool
    in_s3: bool
    conditions: ConditionReport | None
    notes: list = field(default_factory=list)


def _zero_pattern(bm):
    z = [[not np.any(bm.block(i, j)) for j in range(3)] for i in range(3)]
    if z[1][2] and z[2][1]:
        return "arrow"
    if z[0][2] and z[2][0]:
        return "tridiagonal"
    if z[0][1] and z[1][0]:
        return "permuted_k"
    return "none"


def to_block_system(bm, layout=None, label=""):
    """Read the blocks of a symmetric :class:`BlockMatrix3` in a given layout.

    Raises :class:`StructureError` when the matrix is not symmetric or the zero
    pattern does not match.
    """
    m = bm.matrix
    if not np.array_equal(m, m.T):
        raise StructureError("matrix is not symmetric; nonsymmetric forms are classification-only")
    pattern = _zero_pattern(bm)
    layout = Layout(layout) if layout is not None else None
    if layout is None:
        if pattern == "none":
            raise StructureError("zero pattern matches no S^3 layout")
        layout = Layout(pattern)
    b = bm.block
    if layout is Layout.ARROW:
        if np.any(b(1, 2)):
            raise StructureError("arrow layout requires a zero (2,3) block", block="B2")
        kw = dict(A1=b(0, 0), A2=-b(1, 1), A3=-b(2, 2), B1=b(1, 0), B2=b(2, 0))
    elif layout is Layout.TRIDIAGONAL:
        if np.any(b(0, 2)):
            raise StructureError("tridiagonal layout requires a zero (1,3) block", block="B2")
        kw = dict(A1=b(0, 0), A2=-b(1, 1), A3=b(2, 2), B1=b(1, 0), B2=b(2, 1))
    else:
        if np.any(b(0, 1)):
            raise StructureError("permuted_k layout requires a zero (1,2) block", block="B2")
        kw = dict(A1=b(0, 0), A2=b(1, 1), A3=-b(2, 2), B1=b(2, 0), B2=b(2, 1))
    return BlockSystem3(layout=layout, label=label, **kw)


def classify_dense(bm, nullity_threshold=1):
    """Classify a raw 3x3 block matrix, which may be nonsymmetric.

    Nonsymmetric inputs get a zero-pattern verdict only; symmetric inputs
    whose pattern matches a layout are additionally checked for S^3 membership.
    """
    m = bm.matrix
    symmetric = bool(np.array_equal(m, m.T))
    pattern = _zero_pattern(bm)
    notes = []
    if not symmetric:
        notes.append("nonsymmetric: pattern classification only")
        return Classification(pattern, False, False, None, notes)
    if pattern == "none":
        notes.append("zero pattern matches no S^3 layout")
        return Classification(pattern, True, False, None, notes)
    report = check_conditions(to_block_system(bm, pattern), nullity_threshold)
    nonsingular = np.linalg.matrix_rank(m) == m.shape[0]
    if not nonsingular:
        notes.append("matrix is singular")
    return Classification(pattern, True, bool(report.all_hold and nonsingular), report, notes)


def _check_scales(scales):
    out = []
    for d in scales:
        d = float(d)
        if d == 0.0 or not np.isfinite(d):
            raise ContractError(f"block scales must be finite and nonzero, got {d}")
        out.append(d)
    return out


def block_scale(sys, d1, d2, d3, layout=None):
    """Right-multiply by ``blockdiag(d1 I, d2 I, d3 I)``.

    Accepts a :class:`BlockSystem3` or :class:`BlockMatrix3`.  If the scaled
    matrix is symmetric and matches an S^3 zero pattern the result is returned
    as a :class:`BlockSystem3` (in ``layout`` if given, else the input layout
    or the detected one); otherwise a :class:`BlockMatrix3` is returned.
    """
    scales = _check_scales((d1, d2, d3))
    if isinstance(sys, BlockSystem3):
        bm = BlockMatrix3(assemble_dense(sys), sys.sizes)
        layout = layout or sys.layout
        label = sys.label
    else:
        bm, label = sys, ""
    col = np.concatenate([np.full(n, d) for n, d in zip(bm.sizes, scales)])
    out = BlockMatrix3(bm.matrix * col[None, :], bm.sizes)
    if np.array_equal(out.matrix, out.matrix.T) and _zero_pattern(out) != "none":
        try:
            return to_block_system(out, layout, label=label)
        except StructureError:
            if layout is None:
                raise
            return to_block_system(out, None, label=label)
    return out


# --------------------------------------------------------------------------
# Multiple saddle-point systems


@dataclass(frozen=True, eq=False)
class MultiSaddleSystem:
    """Block-tridiagonal multiple saddle-point data.

    ``diag_blocks`` lists ``(sign, block)`` in tridiagonal order, with sign +1
    for primal blocks H_i and -1 for regularization blocks R_i, alternating
    and starting with +1.  ``off_blocks[i]`` couples diagonal block ``i+1``
    (rows) to diagonal block ``i`` (columns).
    """

    diag_blocks: tuple
    off_blocks: tuple

    def __post_init__(self):
        diag = []
        for i, (sign, block) in enumerate(self.diag_blocks):
            sign = int(sign)
            want = 1 if i % 2 == 0 else -1
            if sign != want:
                raise StructureError(f"diagonal block {i + 1} must have sign {want:+d}, got {sign:+d}")
            a = la.as_matrix(block, f"diag block {i + 1}")
            if a.shape[0] != a.shape[1] or a.shape[0] < 1:
                raise StructureError(f"diagonal block {i + 1} must be square and nonempty", block=i)
            diag.append((sign, la.frozen(la.symmetrize(a))))
        if len(diag) < 2:
            raise StructureError("a multiple saddle-point system needs at least two diagonal blocks")
        if len(self.off_blocks) != len(diag) - 1:
            raise StructureError(f"expected {len(diag) - 1} off-diagonal blocks, got {len(self.off_blocks)}")
        off = []
        for i, j in enumerate(self.off_blocks):
            j = la.as_matrix(j, f"J{i + 1}")
            want = (diag[i + 1][1].shape[0], diag[i][1].shape[0])
            if j.shape != want:
                raise StructureError(f"J{i + 1} has shape {j.shape}, expected {want}", block=f"J{i + 1}")
            off.append(la.frozen(j))
        object.__setattr__(self, "diag_blocks", tuple(diag))
        object.__setattr__(self, "off_blocks", tuple(off))

    @property
    def n_blocks(self):
        return len(self.diag_blocks)

    @property
    def sizes(self):
        return tuple(b.shape[0] for _, b in self.diag_blocks)

    @property
    def n_primal(self):
        return (self.n_blocks + 1) // 2

    def classical_order(self):
        """0-based tridiagonal block indices listed in classical order (primal first)."""
        return list(range(0, self.n_blocks, 2)) + list(range(1, self.n_blocks, 2))

    def to_block_system(self, label=""):
        if self.n_blocks != 3:
            raise StructureError("only a 3-block chain maps to a BlockSystem3")
        (_, h1), (_, r1), (_, h2) = self.diag_blocks
        j1, j2 = self.off_blocks
        return BlockSystem3(A1=h1, A2=r1, A3=h2, B1=j1, B2=j2, layout=Layout.TRIDIAGONAL, label=label)

    @classmethod
    def from_block_system(cls, sys):
        t = _as_tridiagonal(sys)
        if t.layout is not Layout.TRIDIAGONAL:
            raise UnsupportedLayoutError("only tridiagonal-type systems are multiple saddle-point chains")
        return cls(((1, t.A1), (-1, t.A2), (1, t.A3)), (t.B1, t.B2))


def assemble_multi_tridiagonal(ms):
    sizes = ms.sizes
    s = block_slices(sizes)
    n = sum(sizes)
    M = np.zeros((n, n))
    for i, (sign, block) in enumerate(ms.diag_blocks):
        M[s[i], s[i]] = sign * block
    for i, j in enumerate(ms.off_blocks):
        M[s[i + 1], s[i]] = j
        M[s[i], s[i + 1]] = j.T
    return M


def _expand_block_perm(sizes, order):
    s = block_slices(sizes)
    return np.concatenate([np.arange(s[b].start, s[b].stop) for b in order])


def assemble_multi_classical(ms):
    """Classical saddle-point ordering: all primal blocks, then all constraint blocks.

    The leading block is ``blkdiag(H_1, H_2, ...)`` and the constraint matrix is
    block upper bidiagonal.
    """
    T = assemble_multi_tridiagonal(ms)
    p = _expand_block_perm(ms.sizes, ms.classical_order())
    return T[np.ix_(p, p)]


def red_black_permute(ms):
    """Apply the red-black block permutation to the classical ordering.

    Returns the 1-based block permutation ``sigma = (1, k+1, 2, k+2, ...)``
    and the permuted matrix, which is block tridiagonal (the tridiagonal
    assembly of ``ms``).
    """
    k = ms.n_primal
    nb = ms.n_blocks
    sigma = []
    for i in range(nb):
        sigma.append(i // 2 + 1 if i % 2 == 0 else k + i // 2 + 1)
    classical_sizes = [ms.sizes[b] for b in ms.classical_order()]
    K = assemble_multi_classical(ms)
    p = _expand_block_perm(classical_sizes, [q - 1 for q in sigma])
    return sigma, K[np.ix_(p, p)]


def block_bandwidth_violations(M, sizes, band=1):
    """List of (i, j) block pairs with ``|i - j| > band`` that are not exactly zero."""
    s = block_slices(sizes)
    bad = []
    for i in range(len(sizes)):
        for j in range(len(sizes)):
            if abs(i - j) > band and np.any(M[s[i], s[j]]):
                bad.append((i, j))
    return bad
