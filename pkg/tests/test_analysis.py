import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from s3saddle import (
    BoundInapplicableError,
    ContractError,
    Interval,
    SpectralSummary,
    arrow_bounds,
    assemble_dense,
    classical_sp_bounds,
    cubic_roots,
    eig_sym,
    r_matrix_bounds,
    spectral_summary,
    tridiag_bounds,
    verify_containment,
)
from s3saddle.analysis import (
    BoundReport,
    bounds_for,
    check_necessary_invertibility,
    check_sufficient_invertibility,
    charpoly3,
    poly_p,
    poly_q,
    poly_r,
    poly_s,
    poly_t,
    r_matrices,
    r_matrix_bounds_of,
)
from s3saddle.factor import expected_inertia
from s3saddle.problems import gen_pdeco_1d, gen_random

from conftest import arrow_sys, tri_sys

PHI, PSI = (1 + math.sqrt(5)) / 2, (1 - math.sqrt(5)) / 2
HEPT = sorted(2 * math.cos(k * math.pi / 7) for k in (1, 3, 5))


# eig_sym


def test_eig_sym_diagonal():
    assert np.array_equal(eig_sym(np.diag([3.0, 1.0, 2.0])), [1.0, 2.0, 3.0])


def test_eig_sym_swap():
    assert np.allclose(eig_sym([[0.0, 1.0], [1.0, 0.0]]), [-1.0, 1.0], atol=1e-15)


def test_eig_sym_reassembly_oracle(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((20, 20)))
    lam = np.sort(rng.uniform(-5, 5, 20))
    M = Q * lam @ Q.T
    M = 0.5 * (M + M.T)
    assert np.max(np.abs(eig_sym(M) - lam)) <= 1e-10 * np.abs(lam).max()


def test_eig_sym_rejects_nonsymmetric():
    with pytest.raises(ContractError):
        eig_sym([[1.0, 2.0], [0.0, 1.0]])


# spectral_summary


def test_summary_scaled_identity():
    s = tri_sys(2 * np.eye(2), [[1.0]], [[1.0]], [[1.0, 0.0]], [[1.0]])
    sm = spectral_summary(s)
    assert sm.mu1_min == sm.mu1_max == 2.0


def test_summary_singular_values_diagonal():
    s = tri_sys(np.eye(2), np.eye(2), [[1.0]], [[3.0, 0.0], [0.0, 4.0]], [[1.0, 0.0]])
    sm = spectral_summary(s)
    assert math.isclose(sm.sig1_min, 3.0) and math.isclose(sm.sig1_max, 4.0)


def test_summary_vs_svd_oracle():
    s = gen_random("arrow", 9, 4, 3, seed=3)
    sm = spectral_summary(s)
    for b, lo, hi in ((s.B1, sm.sig1_min, sm.sig1_max), (s.B2, sm.sig2_min, sm.sig2_max)):
        sv = np.linalg.svd(b, compute_uv=False)
        assert math.isclose(lo, sv[-1], rel_tol=1e-12) and math.isclose(hi, sv[0], rel_tol=1e-12)
    assert math.isclose(sm.sig_stack_min, np.linalg.svd(np.vstack([s.B1, s.B2]), compute_uv=False)[-1],
                        rel_tol=1e-12)


def test_summary_rank_deficient_reports_zero():
    s = gen_random("arrow", 9, 4, 3, seed=3, b2_nullity=1)
    assert spectral_summary(s).sig2_min == 0.0


# invertibility


def test_necessary_condition_one_with_spd_a1(orthogonal_arrow):
    r = check_necessary_invertibility(orthogonal_arrow)
    assert r.conditions["ker_A1_B1_B2"]


def test_necessary_condition_two_fails_with_zero_row():
    s = arrow_sys(np.eye(3), np.zeros((2, 2)), np.eye(1), [[1.0, 0, 0], [0, 0, 0]], [[0, 0, 1.0]])
    r = check_necessary_invertibility(s)
    assert not r.conditions["ker_B1T_A2"] and not r.verdict
    assert np.linalg.matrix_rank(assemble_dense(s)) < s.dim


def test_necessary_condition_three_fails_tridiagonal():
    B2 = np.array([[1.0, 1.0], [2.0, 2.0]])
    s = tri_sys(np.eye(3), np.eye(2), np.zeros((2, 2)), np.ones((2, 3)), B2)
    assert not check_necessary_invertibility(s).conditions["ker_B2T_A3"]


def test_sufficient_orthogonal_rows(orthogonal_arrow):
    r = check_sufficient_invertibility(orthogonal_arrow)
    assert r.conditions["row_spaces_disjoint"] and r.verdict


def test_sufficient_shared_range_rescued_by_spd_a3():
    B = np.array([[1.0, 0.0]])
    s = arrow_sys(np.eye(2), [[0.0]], [[0.0]], B, B)
    r = check_sufficient_invertibility(s)
    assert not r.conditions["row_spaces_disjoint"] and not r.verdict
    r = check_sufficient_invertibility(s.replace(A3=np.eye(1)))
    assert r.conditions["A3_pd"] and r.verdict


def test_sufficient_tridiagonal_chain_broken():
    s = tri_sys(np.eye(3), np.eye(1), np.eye(2), np.ones((1, 3)), np.ones((2, 1)))
    r = check_sufficient_invertibility(s)
    assert not r.conditions["dimension_chain"] and not r.verdict


# cubic roots


def test_cubic_heptagon_roots():
    r = cubic_roots(1, -1, -2, 1)
    assert np.allclose(r, HEPT, rtol=0, atol=1e-14)
    assert np.allclose(r, [-1.24698, 0.44504, 1.80194], atol=1e-5)


def test_cubic_trivial():
    assert np.allclose(cubic_roots(1, 0, -1, 0), [-1.0, 0.0, 1.0], atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3).filter(
    lambda r: min(abs(a - b) for i, a in enumerate(r) for b in r[i + 1:]) > 1e-3))
def test_cubic_plant_and_recover(roots):
    c = np.poly(roots)
    got = cubic_roots(*c)
    assert np.allclose(got, sorted(roots), rtol=0, atol=1e-10 * max(1.0, max(map(abs, roots))))
    scale = max(1.0, max(map(abs, c)))
    assert all(abs(np.polyval(c, x)) <= 1e-10 * scale * max(1.0, abs(x)) ** 3 for x in got)


def test_cubic_complex_pair_names_polynomial():
    with pytest.raises(ContractError, match="wobbly"):
        cubic_roots(1, 0, 1, 0, name="wobbly")


# R-matrix method


def test_r_matrix_single_block():
    assert r_matrix_bounds([-2.0], [3.0], [[0.0]]) == (3.0, -2.0)


def _random_summary(rng, arrow=True):
    mu = np.sort(rng.uniform(0.1, 5.0, (3, 2)), axis=1)
    sig = np.sort(rng.uniform(0.1, 5.0, (2, 2)), axis=1)
    vals = [*mu.ravel(), *sig.ravel()]
    return SpectralSummary(*vals, sig_stack_min=0.1 if arrow else None, layout="arrow" if arrow else "tridiagonal")


def _arrow_grid(s):
    off = np.array([[0, s.sig1_max, s.sig2_max], [s.sig1_max, 0, 0], [s.sig2_max, 0, 0]])
    return [s.mu1_min, -s.mu2_max, -s.mu3_max], [s.mu1_max, -s.mu2_min, -s.mu3_min], off


def _tri_grid(s):
    off = np.array([[0, s.sig1_max, 0], [s.sig1_max, 0, s.sig2_max], [0, s.sig2_max, 0]])
    return [s.mu1_min, -s.mu2_max, s.mu3_min], [s.mu1_max, -s.mu2_min, s.mu3_max], off


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_r_matrix_matches_arrow_polynomials(seed):
    s = _random_summary(np.random.default_rng(seed))
    upper, lower = r_matrix_bounds(*_arrow_grid(s))
    p, q = cubic_roots(*poly_p(s)), cubic_roots(*poly_q(s))
    assert abs(upper - p[-1]) <= 1e-10 * max(1.0, abs(upper))
    assert abs(lower - q[0]) <= 1e-10 * max(1.0, abs(lower))
    Rp, Rm = r_matrices(*_arrow_grid(s))
    assert np.allclose(charpoly3(Rp), poly_p(s)) and np.allclose(charpoly3(Rm), poly_q(s))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_r_matrix_matches_tridiagonal_polynomials(seed):
    s = _random_summary(np.random.default_rng(seed), arrow=False)
    Rp, Rm = r_matrices(*_tri_grid(s))
    assert np.allclose(charpoly3(Rp), poly_t(s)) and np.allclose(charpoly3(Rm), poly_s(s))


@pytest.mark.parametrize("layout", ["arrow", "tridiagonal"])
def test_r_matrix_exact_for_scalar_blocks(layout):
    rng = np.random.default_rng(4)
    for _ in range(10):
        a1, a2, a3 = rng.uniform(0.1, 3, 3)
        b1, b2 = rng.uniform(-3, 3, 2)
        s = BlockSystem3_(layout, a1, a2, a3, b1, b2)
        M = assemble_dense(s)
        ev = np.linalg.eigvalsh(M)
        upper, lower = r_matrix_bounds_of(M, s.sizes)
        assert abs(upper - ev[-1]) <= 1e-10 and abs(lower - ev[0]) <= 1e-10


def BlockSystem3_(layout, a1, a2, a3, b1, b2):
    f = arrow_sys if layout == "arrow" else tri_sys
    return f([[a1]], [[a2]], [[a3]], [[b1]], [[b2]])


def test_r_matrix_rejects_asymmetric_grid():
    with pytest.raises(ContractError):
        r_matrices([0, 0], [1, 1], [[0, 1], [2, 0]])


# classical saddle-point bounds


def test_classical_unit_blocks():
    neg, pos = classical_sp_bounds(Interval(1, 1), Interval(1, 1), Interval(0, 0))
    assert math.isclose(neg.lo, PSI) and math.isclose(neg.hi, PSI)
    assert pos.lo == 1.0 and math.isclose(pos.hi, PHI)


def test_classical_unregularized_form():
    a, b, s0, s1 = 0.5, 3.0, 0.2, 2.0
    neg, pos = classical_sp_bounds(Interval(a, b), Interval(s0, s1), Interval(0, 0))
    assert math.isclose(neg.lo, 0.5 * (a - math.sqrt(a * a + 4 * s1 * s1)))
    assert math.isclose(neg.hi, 0.5 * (b - math.sqrt(b * b + 4 * s0 * s0)))
    assert math.isclose(pos.hi, 0.5 * (b + math.sqrt(b * b + 4 * s1 * s1)))


def test_classical_random_containment():
    rng = np.random.default_rng(2)
    for _ in range(20):
        F = rng.standard_normal((6, 6))
        A = F @ F.T / 6 + 0.5 * np.eye(6)
        B = rng.standard_normal((3, 6))
        G = rng.standard_normal((3, 2))
        C = G @ G.T
        M = np.block([[A, B.T], [B, -C]])
        ea, ec, sb = np.linalg.eigvalsh(A), np.linalg.eigvalsh(C), np.linalg.svd(B, compute_uv=False)
        neg, pos = classical_sp_bounds(Interval(ea[0], ea[-1]), Interval(sb[-1], sb[0]),
                                       Interval(max(ec[0], 0.0), ec[-1]))
        tol = 1e-10 * np.linalg.norm(M, 2)
        assert all(neg.contains(x, tol) or pos.contains(x, tol) for x in np.linalg.eigvalsh(M))


def test_classical_rejects_bad_ranges():
    with pytest.raises(ContractError):
        classical_sp_bounds(Interval(0, 1), Interval(1, 1), Interval(0, 0))
    with pytest.raises(ContractError):
        classical_sp_bounds(Interval(1, 1), Interval(0, 1), Interval(0, 0))


# arrow bounds


def test_arrow_bounds_scalar_range_violation():
    one = np.ones((1, 1))
    s = arrow_sys(one, np.zeros((1, 1)), np.zeros((1, 1)), one, one)
    with pytest.raises(BoundInapplicableError):
        arrow_bounds(spectral_summary(s))


def test_arrow_bounds_orthogonal_rows(orthogonal_arrow):
    sm = spectral_summary(orthogonal_arrow)
    rep = arrow_bounds(sm)
    assert np.allclose(rep.polynomials["p"]["coefficients"], [1, -1, -2, 0])
    ev = eig_sym(assemble_dense(orthogonal_arrow))
    assert np.allclose(ev, [PSI, PSI, PHI, PHI])
    assert verify_containment(ev, rep, 1e-12)


def test_published_arrow_endpoint_counterexample(orthogonal_arrow):
    # the root of sum-of-squares endpoint (-1 here) lies left of the eigenvalue (1 - sqrt 5)/2
    rep = arrow_bounds(spectral_summary(orthogonal_arrow))
    published_hi = rep.details["negative_hi_sum_of_squares"]
    assert math.isclose(published_hi, -1.0)
    assert PSI > published_hi + 0.1
    assert math.isclose(rep.negative_interval.hi, PSI)


def test_arrow_bounds_sign_patterns():
    for seed in range(10):
        _, rep = bounds_for(gen_random("arrow", 12, 4, 5, seed=seed))
        for name in ("p", "q"):
            r = rep.polynomials[name]["roots"]
            assert sum(x > 0 for x in r) == 1 and sum(x <= 0 for x in r) == 2


@pytest.mark.parametrize("seed", range(30))
def test_arrow_bounds_random_containment(seed):
    s = gen_random("arrow", 12, 4, 5, seed=seed)
    M = assemble_dense(s)
    _, rep = bounds_for(s)
    ev = eig_sym(M)
    assert verify_containment(ev, rep, 1e-10 * np.linalg.norm(M, 2)), rep.max_violation
    assert int(np.sum(ev < 0)) == expected_inertia(s).n_neg
    assert all(rep.negative_interval.contains(x, 1e-10 * np.linalg.norm(M, 2)) for x in ev[ev < 0])


# tridiagonal bounds


def test_r_polynomial_unit_summary():
    sm = SpectralSummary(1, 1, 0, 0, 0, 0, 1, 1, 1, 1)
    assert np.allclose(poly_r(sm), [1, -1, -2, 1])
    assert np.allclose(cubic_roots(*poly_r(sm)), HEPT, atol=1e-14)


def test_tridiag_bounds_pdeco():
    s = gen_pdeco_1d(8, 1e-2)
    M = assemble_dense(s)
    _, rep = bounds_for(s)
    assert verify_containment(eig_sym(M), rep, 1e-10 * np.linalg.norm(M, 2))


def test_tridiag_bounds_sign_patterns():
    for seed in range(10):
        _, rep = bounds_for(gen_random("tridiagonal", 12, 7, 4, seed=seed))
        for name in ("r", "s", "t"):
            r = rep.polynomials[name]["roots"]
            assert sum(x > 0 for x in r) == 2 and sum(x < 0 for x in r) == 1


@pytest.mark.parametrize("seed", range(30))
def test_tridiag_bounds_random_containment(seed):
    s = gen_random("tridiagonal", 12, 7, 4, seed=seed)
    M = assemble_dense(s)
    _, rep = bounds_for(s)
    ev = eig_sym(M)
    assert verify_containment(ev, rep, 1e-10 * np.linalg.norm(M, 2)), rep.max_violation
    assert int(np.sum(ev < 0)) == expected_inertia(s).n_neg


def test_tridiag_bounds_need_full_rank_b1():
    s = gen_random("tridiagonal", 8, 4, 2, seed=0, b1_nullity=1)
    with pytest.raises(BoundInapplicableError):
        tridiag_bounds(spectral_summary(s))


def test_ipm_stack_is_tall_so_arrow_bounds_inapplicable():
    from s3saddle.problems import gen_ipm_step

    with pytest.raises(BoundInapplicableError):
        bounds_for(gen_ipm_step(10, 4, seed=0))


# containment


def _report(neg, pos):
    return BoundReport(Interval(*neg), Interval(*pos))


def test_containment_closed_endpoints():
    rep = _report((-2, -1), (1, 3))
    assert verify_containment([-2, -1, 1, 3], rep, 0.0) and rep.max_violation == 0.0


def test_containment_tolerance_semantics():
    rep = _report((-2, -1), (1, 3))
    assert verify_containment([3 + 1e-9], rep, 1e-8)


def test_containment_planted_violation():
    rep = _report((-2, -1), (1, 3))
    assert not verify_containment([0.5, -1.0, 3.1], rep, 1e-8)
    assert math.isclose(rep.max_violation, 0.5)
    rep2 = _report((-2, -1), (1, 3))
    verify_containment([3.1], rep2, 1e-8)
    assert math.isclose(rep2.max_violation, 0.1) and not rep2.contained
