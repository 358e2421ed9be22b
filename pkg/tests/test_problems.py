import numpy as np
import pytest

from s3saddle import (
    BoundInapplicableError,
    ContractError,
    assemble_dense,
    check_conditions,
    red_black_permute,
)
from s3saddle.analysis import bounds_for, r_matrix_bounds_of
from s3saddle.block_model import assemble_multi_classical, block_slices
from s3saddle.factor import expected_inertia, inertia_of, ldl_tridiag, solve_with_ldl
from s3saddle.io import save_manifest
from s3saddle.problems import (
    GeneratorSpec,
    gen_ipm_step,
    gen_lsq,
    gen_multi_saddle,
    gen_pdeco_1d,
    gen_random,
    generate,
    laplacian_1d,
    mass_1d,
)


# PDE-constrained optimization


def test_pdeco_stencils_m2():
    h = 1 / 3
    assert np.allclose(laplacian_1d(2), np.array([[2, -1], [-1, 2]]) / h ** 2, rtol=1e-15)
    assert np.allclose(mass_1d(2), np.array([[4, 1], [1, 4]]) * h / 6, rtol=1e-15)


def test_pdeco_m8_nonsingular_inertia():
    s = gen_pdeco_1d(8, 1e-2)
    assert inertia_of(s) == expected_inertia(s)
    assert expected_inertia(s).as_tuple() == (16, 8, 0)
    assert check_conditions(s).all_hold


@pytest.mark.parametrize("beta", [1.0, 1e2, 1e4])
def test_pdeco_second_schur_dominated_by_regularization(beta):
    s = gen_pdeco_1d(8, beta)
    S2 = ldl_tridiag(s).schur["S2"]
    lam_r = np.linalg.eigvalsh(mass_1d(8))[0]
    assert np.linalg.eigvalsh(S2)[0] >= beta * lam_r * (1 - 1e-10)


def test_pdeco_rejects_bad_input():
    with pytest.raises(ContractError):
        gen_pdeco_1d(1, 1.0)
    with pytest.raises(ContractError):
        gen_pdeco_1d(4, 0.0)


# constrained least squares


def test_lsq_shapes():
    s = gen_lsq(5, 3, 2, seed=0)
    assert s.B1.shape == (3, 5) and s.B2.shape == (2, 3)
    r = check_conditions(s)
    assert r.all_hold and r.dimension_ok


def test_lsq_solution_satisfies_block_equations(rng):
    n, p, q = 8, 5, 3
    s = gen_lsq(n, p, q, seed=1)
    G, E = s.B1.T, s.B2
    rhs = rng.standard_normal(n + p + q)
    z = solve_with_ldl(ldl_tridiag(s), rhs)
    r, y, lam = z[:n], z[n:n + p], z[n + p:]
    assert np.allclose(r + G @ y, rhs[:n], atol=1e-10)
    assert np.allclose(G.T @ r + E.T @ lam, rhs[n:n + p], atol=1e-10)
    assert np.allclose(E @ y, rhs[n + p:], atol=1e-10)


def test_lsq_square_constraint_block():
    s = gen_lsq(6, 3, 3, seed=2)
    f = ldl_tridiag(s)
    assert f.reconstruction_residual() <= 1e-12
    assert inertia_of(s).n_zero == 0


def test_lsq_rejects_impossible_sizes():
    with pytest.raises(ContractError):
        gen_lsq(3, 4, 2, seed=0)


# interior-point step


def test_ipm_unit_iterates():
    s = gen_ipm_step(4, 2, seed=0)
    assert np.array_equal(s.B2, -np.eye(4)) and np.array_equal(s.A3, np.eye(4))
    assert check_conditions(s).all_hold


def test_ipm_unregularized_is_invertible():
    s = gen_ipm_step(6, 3, seed=1, rho=0.0, delta=0.0)
    assert inertia_of(s) == expected_inertia(s)


def test_ipm_rejects_nonpositive_iterates():
    with pytest.raises(ContractError):
        gen_ipm_step(3, 1, seed=0, x=[1.0, 0.0, 1.0])
    with pytest.raises(ContractError):
        gen_ipm_step(3, 1, seed=0, z=[1.0, -1.0, 1.0])


@pytest.mark.parametrize("seed", range(5))
def test_ipm_spectrum_within_outer_bounds(seed):
    s = gen_ipm_step(10, 4, seed=seed, x=np.linspace(0.5, 2, 10), z=np.linspace(2, 0.1, 10))
    M = assemble_dense(s)
    with pytest.raises(BoundInapplicableError):
        bounds_for(s)
    upper, lower = r_matrix_bounds_of(M, s.sizes)
    ev = np.linalg.eigvalsh(M)
    tol = 1e-10 * np.linalg.norm(M, 2)
    assert ev[0] >= lower - tol and ev[-1] <= upper + tol


# random systems


def test_random_rejects_dimension_violation():
    with pytest.raises(ContractError):
        gen_random("arrow", 4, 3, 2, seed=0, a2_zero=True, a3_zero=True)


def test_random_planted_nullity():
    s = gen_random("tridiagonal", 10, 6, 4, seed=0, b2_nullity=1)
    r = check_conditions(s)
    assert r.b2_nullity == 1 and r.c3_holds
    sv = np.linalg.svd(s.B2, compute_uv=False)
    assert int(np.sum(sv <= max(s.B2.shape) * np.finfo(float).eps * sv[0])) == 1


@pytest.mark.parametrize("layout", ["arrow", "tridiagonal", "permuted_k"])
def test_random_deterministic_per_seed(layout, tmp_path):
    a = gen_random(layout, 7, 3, 2, seed=42)
    b = gen_random(layout, 7, 3, 2, seed=42)
    assert a.same_as(b)
    pa = save_manifest(a, tmp_path / "a")
    pb = save_manifest(b, tmp_path / "b")
    assert pa.read_bytes() == pb.read_bytes()
    for k in ("A1", "B2"):
        assert (tmp_path / "a" / f"system_{k}.mtx").read_bytes() == (tmp_path / "b" / f"system_{k}.mtx").read_bytes()


def test_random_seeds_differ():
    assert not gen_random("arrow", 7, 3, 2, seed=1).same_as(gen_random("arrow", 7, 3, 2, seed=2))


@pytest.mark.parametrize(
    "spec",
    [
        GeneratorSpec("pdeco_1d", (8,), {"beta": 0.01}),
        GeneratorSpec("constrained_lsq", (10, 6, 3), seed=3),
        GeneratorSpec("ipm_step", (10, 4), seed=3),
        GeneratorSpec("random_arrow", (12, 4, 5), seed=3),
        GeneratorSpec("random_arrow", (20, 6, 5), {"a2_zero": True, "a3_zero": True}, seed=3),
        GeneratorSpec("random_tridiag", (20, 12, 6), seed=3),
        GeneratorSpec("random_tridiag", (40, 25, 10), {"a2_zero": "true", "b2_nullity": 1}, seed=3),
        GeneratorSpec("random_tridiag", (9, 5, 3), {"layout": "permuted_k"}, seed=3),
    ],
)
def test_generators_pass_conditions(spec):
    s = generate(spec)
    assert check_conditions(s).all_hold
    assert inertia_of(s) == expected_inertia(s)


# multiple saddle-point chains


def test_multi_three_blocks_maps_to_tridiagonal():
    ms = gen_multi_saddle(3, [5, 3, 2], seed=0)
    s = ms.to_block_system()
    _, M = red_black_permute(ms)
    assert np.array_equal(M, assemble_dense(s))


def test_multi_twelve_classical_pattern():
    ms = gen_multi_saddle(12, [3, 2, 3, 2, 2, 2, 3, 1, 2, 1, 1, 1], seed=1)
    K = assemble_multi_classical(ms)
    order = ms.classical_order()
    sizes = [ms.sizes[b] for b in order]
    s = block_slices(sizes)
    k = ms.n_primal
    for i in range(12):
        for j in range(12):
            nz = bool(np.any(K[s[i], s[j]]))
            if i < k and j < k or i >= k and j >= k:
                assert nz == (i == j) or (i == j and i >= k)  # block diagonal H and R
            elif i >= k:
                c = i - k  # constraint block c couples primal c and c + 1
                assert nz == (j in (c, c + 1))


def test_multi_two_blocks_sign_pattern():
    ms = gen_multi_saddle(2, [3, 2], seed=0)
    _, M = red_black_permute(ms)
    assert [sign for sign, _ in ms.diag_blocks] == [1, -1]
    assert np.all(np.linalg.eigvalsh(M[:3, :3]) > 0) and np.all(np.linalg.eigvalsh(M[3:, 3:]) <= 1e-12)


def test_multi_rejects_bad_chain():
    with pytest.raises(ContractError):
        gen_multi_saddle(1, [3], seed=0)
    with pytest.raises(ContractError):
        gen_multi_saddle(3, [3, 2], seed=0)
