import numpy as np
import pytest

from iew.quadrature import (
    ConfigurationError,
    assemble_nystrom,
    build_circle_rule,
    build_interval_rule,
    build_sphere_rule,
    kernel_const,
    kernel_exp_abs,
    kernel_helmholtz_g,
    kernel_laplace_g,
    kernel_tabulated,
    make_kernel,
)


# ---------------------------------------------------------------------------
# interval rules
# ---------------------------------------------------------------------------
def test_trapezoid_integrates_linear_exactly():
    rule = build_interval_rule("trapezoid", 11, 0.0, 1.0)
    assert rule.integrate(rule.nodes) == pytest.approx(0.5, abs=1e-14)


def test_gauss2_exact_through_cubics():
    rule = build_interval_rule("gauss_legendre", 2, -1.0, 1.0)
    assert abs(rule.integrate(rule.nodes**3)) < 1e-14


def test_trapezoid_two_nodes_definition():
    rule = build_interval_rule("trapezoid", 2, 0.0, 2.0)
    np.testing.assert_allclose(rule.nodes, [0.0, 2.0])
    np.testing.assert_allclose(rule.weights, [1.0, 1.0])


@pytest.mark.parametrize("kind", ["trapezoid", "gauss_legendre"])
def test_interval_rule_weight_sum_and_positivity(kind):
    rule = build_interval_rule(kind, 17, -2.0, 5.0)
    assert np.all(rule.weights > 0)
    assert rule.weights.sum() == pytest.approx(7.0, rel=1e-13)


def test_interval_rule_argument_errors():
    with pytest.raises(ValueError):
        build_interval_rule("trapezoid", 1, 0.0, 1.0)
    with pytest.raises(ValueError):
        build_interval_rule("trapezoid", 5, 1.0, 0.0)
    with pytest.raises(ValueError):
        build_interval_rule("simpson", 5, 0.0, 1.0)


def test_refinement_decreases_error_on_exp():
    exact = np.e - 1.0
    trap_errors = []
    gauss_errors = []
    for n in (8, 16, 32):
        t = build_interval_rule("trapezoid", n, 0.0, 1.0)
        g = build_interval_rule("gauss_legendre", n, 0.0, 1.0)
        trap_errors.append(abs(t.integrate(np.exp(t.nodes)) - exact))
        gauss_errors.append(abs(g.integrate(np.exp(g.nodes)) - exact))
    assert trap_errors[0] > trap_errors[1] > trap_errors[2]
    # Gauss is already at machine precision for n = 8; allow rounding ties
    assert gauss_errors[2] <= gauss_errors[0] + 5e-16


# ---------------------------------------------------------------------------
# circle rule
# ---------------------------------------------------------------------------
def test_circle_rule_orthogonality_and_measure():
    rule = build_circle_rule(8)
    assert abs(rule.integrate(np.exp(1j * rule.nodes))) < 1e-14
    assert rule.integrate(np.ones(8)) == pytest.approx(2.0 * np.pi, rel=1e-14)


def test_circle_rule_cos_squared():
    rule = build_circle_rule(16)
    assert rule.integrate(np.cos(rule.nodes) ** 2) == pytest.approx(np.pi, abs=1e-13)


def test_circle_rule_rejects_odd_or_tiny():
    with pytest.raises(ValueError):
        build_circle_rule(7)
    with pytest.raises(ValueError):
        build_circle_rule(2)


# ---------------------------------------------------------------------------
# sphere rule
# ---------------------------------------------------------------------------
def test_sphere_rule_total_weight():
    rule = build_sphere_rule(16, 32, 1.0)
    assert rule.weights.sum() == pytest.approx(4.0 * np.pi, abs=1e-10)


def test_sphere_normals_integrate_to_zero():
    rule = build_sphere_rule(8, 16, 2.0, center=(1.0, -1.0, 0.5))
    flux = (rule.weights[:, None] * rule.normals).sum(axis=0)
    assert np.max(np.abs(flux)) < 1e-12


def test_sphere_rule_rejects_bad_radius():
    with pytest.raises(ValueError):
        build_sphere_rule(16, 32, 0.0)


def test_single_layer_on_own_sphere():
    # int_S |s - t|^{-1} dt = 4 pi a for s on the sphere of radius a
    a = 1.0
    rule = build_sphere_rule(16, 32, a)
    op = assemble_nystrom(kernel_laplace_g(), rule, singular_correction=True)
    # kernel is 1/(4 pi r): multiply back by 4 pi; probe an equatorial node
    i = rule.n // 2
    value = 4.0 * np.pi * np.sum(op.matrix[i])
    assert value == pytest.approx(4.0 * np.pi * a, rel=0.01)


# ---------------------------------------------------------------------------
# kernels and assembly
# ---------------------------------------------------------------------------
def test_zero_kernel_gives_zero_matrix():
    rule = build_interval_rule("gauss_legendre", 12, 0.0, 1.0)
    op = assemble_nystrom(kernel_const(0.0), rule)
    assert np.all(op.matrix == 0)


def test_const_kernel_row_sums():
    rule = build_interval_rule("gauss_legendre", 20, 0.0, 1.0)
    c = 0.7
    op = assemble_nystrom(kernel_const(c), rule)
    np.testing.assert_allclose(op.matrix.sum(axis=1), c, rtol=1e-13)


def test_exp_abs_weighted_symmetry():
    rule = build_interval_rule("gauss_legendre", 16, -1.0, 1.0)
    op = assemble_nystrom(kernel_exp_abs(), rule)
    M, w = op.matrix, rule.weights
    np.testing.assert_allclose(M / w[None, :], (M / w[None, :]).T, atol=1e-14)


def test_nystrom_times_one_reproduces_rowwise_quadrature():
    rule = build_interval_rule("trapezoid", 25, 0.0, 2.0)
    op = assemble_nystrom(kernel_exp_abs(), rule)
    ones = np.ones(rule.n)
    expected = np.array([rule.integrate(np.exp(-np.abs(x - rule.nodes)))
                         for x in rule.nodes])
    np.testing.assert_allclose(op.apply(ones), expected, rtol=1e-12)


def test_singular_kernel_requires_correction():
    rule = build_sphere_rule(8, 16, 1.0)
    with pytest.raises(ConfigurationError):
        assemble_nystrom(kernel_laplace_g(), rule)
    op = assemble_nystrom(kernel_helmholtz_g(0.5), rule, singular_correction=True)
    assert np.all(np.isfinite(op.matrix))


def test_tabulated_kernel_interpolates_and_rejects_extrapolation():
    x = np.linspace(0.0, 1.0, 21)
    vals = np.add.outer(x, 2.0 * x)           # bilinear data is interpolated exactly
    kern = kernel_tabulated(x, x, vals)
    assert kern.eval(0.37, 0.61) == pytest.approx(0.37 + 1.22, abs=1e-12)
    with pytest.raises(ValueError):
        kern.eval(1.5, 0.5)


def test_make_kernel_catalog():
    assert make_kernel("const", c=2.0).eval(0.1, 0.9) == pytest.approx(2.0)
    assert make_kernel("sin_diff").eval(1.0, 0.25) == pytest.approx(np.sin(0.75))
    with pytest.raises(ValueError):
        make_kernel("mystery")
