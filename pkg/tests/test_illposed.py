import numpy as np
import pytest

from iew.fredholm import eig_decompose
from iew.illposed import (
    NoisyData,
    best_rank_error,
    operator_norm,
    seeded_noise,
    solve_first_kind,
    svalue_decompose,
    truncated_matrix,
)
from iew.quadrature import (
    DiscreteOperator,
    assemble_nystrom,
    build_interval_rule,
    kernel_const,
    kernel_exp_abs,
)


def exp_abs_op(n=64):
    rule = build_interval_rule("gauss_legendre", n, -1.0, 1.0)
    return assemble_nystrom(kernel_exp_abs(), rule)


def rank_one_op(n=24):
    rule = build_interval_rule("gauss_legendre", n, 0.0, 1.0)
    phi = np.sin(np.pi * rule.nodes)
    phi = phi / rule.norm(phi)
    return DiscreteOperator(rule=rule, matrix=np.outer(phi, phi * rule.weights)), phi


# ---------------------------------------------------------------------------
# s-value decomposition
# ---------------------------------------------------------------------------
def test_zero_operator_decomposition():
    rule = build_interval_rule("gauss_legendre", 16, 0.0, 1.0)
    dec = svalue_decompose(assemble_nystrom(kernel_const(0.0), rule))
    assert dec.rank == 0
    assert np.max(dec.s) == 0.0


def test_rank_one_svalues():
    op, _ = rank_one_op()
    dec = svalue_decompose(op)
    assert dec.s[0] == pytest.approx(1.0, abs=1e-12)
    assert np.max(dec.s[1:]) < 1e-12
    assert dec.rank == 1


def test_reconstruction_identity_on_random_vectors():
    op = exp_abs_op()
    dec = svalue_decompose(op)
    rng = np.random.default_rng(0)
    for _ in range(10):
        u = rng.standard_normal(op.n)
        np.testing.assert_allclose(dec.apply(u), op.apply(u), atol=1e-10)


def test_selfadjoint_svalues_match_eigenvalues():
    op = exp_abs_op(256)
    s = svalue_decompose(op).s
    lam = eig_decompose(op).eigenvalues
    np.testing.assert_allclose(s, lam, atol=1e-10)   # positive selfadjoint case
    j = np.arange(10, 41)
    slope = np.polyfit(np.log(j), np.log(s[9:40]), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.15)


# ---------------------------------------------------------------------------
# best rank-j approximation
# ---------------------------------------------------------------------------
def test_best_rank_zero_is_operator_norm():
    op = exp_abs_op()
    dec = svalue_decompose(op)
    assert best_rank_error(dec, 0) == pytest.approx(operator_norm(op.matrix, op.rule),
                                                    rel=1e-12)


def test_rank_one_truncation_exhausts_operator():
    op, _ = rank_one_op()
    dec = svalue_decompose(op)
    assert best_rank_error(dec, 1) == 0.0


def test_truncation_achieves_best_error_and_random_competitors_lose():
    op = exp_abs_op(48)
    dec = svalue_decompose(op)
    j = 3
    target = best_rank_error(dec, j)
    achieved = operator_norm(op.matrix - truncated_matrix(dec, j), op.rule)
    assert achieved == pytest.approx(target, abs=1e-12)

    rng = np.random.default_rng(7)
    w = op.rule.weights
    for _ in range(100):
        left = rng.standard_normal((op.n, j))
        right = rng.standard_normal((j, op.n))
        competitor = left @ (right * w[None, :])
        # best-fit scaling of the competitor cannot beat the truncation
        err = operator_norm(op.matrix - competitor, op.rule)
        assert err >= target - 1e-10


# ---------------------------------------------------------------------------
# regularized first-kind solves
# ---------------------------------------------------------------------------
def test_exact_data_full_truncation_recovers():
    op = exp_abs_op(64)
    u_star = np.sin(np.pi * op.rule.nodes) + 0.5
    f = op.apply(u_star)
    sol = solve_first_kind(op, NoisyData(f_delta=f, delta=0.0), "tsvd", truncation=op.n)
    assert op.rule.norm(sol.u_delta - u_star) <= 1e-6


def test_noise_dominates_flag():
    op = exp_abs_op(32)
    f = 1e-6 * seeded_noise(op.rule, 1.0, seed=1)
    sol = solve_first_kind(op, NoisyData(f_delta=f, delta=1.0), "tsvd")
    assert sol.noise_dominates
    assert np.all(sol.u_delta == 0)


def test_seeded_noise_norm_and_determinism():
    rule = build_interval_rule("gauss_legendre", 40, -1.0, 1.0)
    xi1 = seeded_noise(rule, 0.37, seed=5)
    xi2 = seeded_noise(rule, 0.37, seed=5)
    np.testing.assert_array_equal(xi1, xi2)
    assert rule.norm(xi1) == pytest.approx(0.37, rel=1e-13)


@pytest.mark.parametrize("method", ["tsvd", "tikhonov"])
def test_delta_ladder_errors_decrease(method):
    op = exp_abs_op(64)
    u_star = np.cos(np.pi * op.rule.nodes)
    f = op.apply(u_star)
    errors = []
    for delta in (1e-1, 1e-2, 1e-3):
        f_delta = f + seeded_noise(op.rule, delta, seed=7)
        sol = solve_first_kind(op, NoisyData(f_delta=f_delta, delta=delta), method)
        errors.append(op.rule.norm(sol.u_delta - u_star))
    assert errors[0] > errors[1] > errors[2]


def test_tikhonov_discrepancy_principle():
    op = exp_abs_op(64)
    u_star = np.cos(np.pi * op.rule.nodes)
    f = op.apply(u_star)
    delta = 1e-2
    f_delta = f + seeded_noise(op.rule, delta, seed=3)
    sol = solve_first_kind(op, NoisyData(f_delta=f_delta, delta=delta), "tikhonov")
    assert sol.principle_satisfied
    assert sol.discrepancy <= 1.5 * delta


def test_tikhonov_solves_normal_equations():
    op = exp_abs_op(48)
    u_star = np.cos(np.pi * op.rule.nodes)
    f = op.apply(u_star)
    delta = 1e-2
    f_delta = f + seeded_noise(op.rule, delta, seed=9)
    sol = solve_first_kind(op, NoisyData(f_delta=f_delta, delta=delta), "tikhonov")
    M = op.matrix
    Mstar = op.adjoint_matrix()
    alpha = sol.parameter
    lhs = (Mstar @ M + alpha * np.eye(op.n)) @ sol.u_delta
    rhs = Mstar @ f_delta
    assert op.rule.norm(lhs - rhs) <= 1e-10 * op.rule.norm(rhs)


def test_delta_validation():
    with pytest.raises(ValueError):
        NoisyData(f_delta=np.ones(4), delta=-0.1)
