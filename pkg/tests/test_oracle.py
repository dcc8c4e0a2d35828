"""Quadrature and Monte Carlo oracles: known closed forms and self-checks."""

import math

import numpy as np
import pytest
from scipy import stats

from divknn import oracle
from divknn.errors import ConfigError, IntegrationError

# Values derivable by hand for the check pairs used throughout the
# test suite. For N(0,1) vs N(1,1) at alpha = 1/2 the power integral is
# exp(-(mu1-mu2)^2/8) and the divergence is (mu1-mu2)^2/4.
GAUSS_SHIFT_INTEGRAL = math.exp(-0.125)
GAUSS_SHIFT_RENYI = 0.25

# integral of (p-q)^2 for the same pair: (1 - exp(-1/4)) / sqrt(pi);
# quadrature agrees to all printed digits
L2SQ_GAUSS_SHIFT = 0.12479829408003389


def test_density_normalization():
    for p in (
        oracle.Gaussian1D(0.0, 1.0),
        oracle.Gaussian1D(-3.0, 0.25),
        oracle.Uniform1D(-1.0, 4.0),
        oracle.Beta1D(0.7, 2.5),
        oracle.Gaussian2D(),
        oracle.Gaussian2D((1.0, -1.0), ((2.0, 0.3), (0.3, 0.5))),
    ):
        assert math.isclose(oracle.density_mass(p), 1.0, rel_tol=1e-8)


def test_gaussian1d_pdf_matches_scipy():
    p = oracle.Gaussian1D(0.7, 1.3)
    xs = np.linspace(-4.0, 5.0, 17)
    assert np.allclose(p.pdf(xs), stats.norm.pdf(xs, 0.7, 1.3), rtol=1e-13)


def test_uniform_pdf_is_indicator():
    p = oracle.Uniform1D(1.0, 3.0)
    assert p.pdf(np.array([0.0, 2.0, 5.0])).tolist() == [0.0, 0.5, 0.0]


def test_alpha_integral_gauss_shift():
    got = oracle.true_alpha_integral(
        oracle.Gaussian1D(0, 1), oracle.Gaussian1D(1, 1), 0.5)
    assert math.isclose(got, GAUSS_SHIFT_INTEGRAL, rel_tol=1e-9)


def test_renyi_gauss_shift():
    got = oracle.true_renyi(oracle.Gaussian1D(0, 1), oracle.Gaussian1D(1, 1), 0.5)
    assert math.isclose(got, GAUSS_SHIFT_RENYI, rel_tol=1e-9)


def test_renyi_general_alpha_gaussian_closed_form():
    # R_alpha between N(0,1) and N(m,1): alpha * m^2 / 2
    for alpha in (0.2, 0.8):
        got = oracle.true_renyi(oracle.Gaussian1D(0, 1),
                                oracle.Gaussian1D(2, 1), alpha)
        assert math.isclose(got, alpha * 4.0 / 2.0, rel_tol=1e-8)


def test_alpha_integral_uniform_half_overlap():
    got = oracle.true_alpha_integral(
        oracle.Uniform1D(0, 1), oracle.Uniform1D(0.5, 1.5), 0.5)
    assert math.isclose(got, 0.5, rel_tol=1e-10)


def test_alpha_integral_self_is_one():
    for p in (oracle.Uniform1D(0, 2), oracle.Beta1D(2, 3), oracle.Gaussian2D()):
        for alpha in (0.2, 0.5, 1.5):
            assert math.isclose(oracle.true_alpha_integral(p, p, alpha),
                                1.0, rel_tol=1e-8)


def test_l2_known_values():
    got = oracle.true_l2_squared(oracle.Gaussian1D(0, 1), oracle.Gaussian1D(1, 1))
    assert math.isclose(got, L2SQ_GAUSS_SHIFT, rel_tol=1e-9)
    closed = (1.0 - math.exp(-0.25)) / math.sqrt(math.pi)
    assert math.isclose(got, closed, rel_tol=1e-10)


def test_l2_disjoint_uniforms():
    got = oracle.true_l2(oracle.Uniform1D(0, 1), oracle.Uniform1D(1, 2))
    assert math.isclose(got, math.sqrt(2.0), rel_tol=1e-10)


def test_l2_self_is_zero():
    assert oracle.true_l2(oracle.Beta1D(2, 2), oracle.Beta1D(2, 2)) < 1e-8


def test_l2_2d_gaussian_pair():
    p = oracle.Gaussian2D((0.0, 0.0))
    q = oracle.Gaussian2D((1.0, 0.0))
    got = oracle.true_l2_squared(p, q)
    closed = (1.0 - math.exp(-0.25)) / (2.0 * math.pi)
    assert math.isclose(got, closed, rel_tol=1e-9)


def test_disjoint_supports():
    p, q = oracle.Uniform1D(0, 1), oracle.Uniform1D(2, 3)
    assert oracle.true_alpha_integral(p, q, 0.5) == 0.0
    assert oracle.true_renyi(p, q, 0.5) == math.inf


def test_unbounded_power_diverges():
    # alpha > 1 weights q by a negative power; q vanishing on part of
    # p's support makes the integral infinite
    with pytest.raises(IntegrationError):
        oracle.true_alpha_integral(oracle.Gaussian1D(0, 1),
                                   oracle.Uniform1D(0, 1), 1.5)


# ---------------------------------------------------------------------------
# Erlang moments.

def test_erlang_moment_trivial_orders():
    for k, lam in ((3, 2.0), (7, 0.5)):
        assert oracle.erlang_moment(k, lam, 0.0) == 1.0
        assert math.isclose(oracle.erlang_moment(k, lam, 1.0), k / lam,
                            rel_tol=1e-12)


def test_erlang_moment_negative_order():
    # E[T^-1] = lam / (k-1)
    assert math.isclose(oracle.erlang_moment(4, 2.0, -1.0), 2.0 / 3.0,
                        rel_tol=1e-12)


def test_erlang_moment_domain():
    with pytest.raises(ConfigError):
        oracle.erlang_moment(2, 1.0, -2.0)
    with pytest.raises(ConfigError):
        oracle.erlang_moment(3, 0.0, 0.5)


def test_empirical_erlang_moment_converges():
    for k, g in ((5, -1.0), (20, 0.5)):
        ana = oracle.erlang_moment(k, 2.0, g)
        emp = oracle.empirical_erlang_moment(k, 2.0, g, 100_000, seed=0)
        assert abs(emp - ana) / ana < 0.02


def test_empirical_knn_moment_matches_erlang_limit():
    # the rescaled k-th neighbor volume statistic converges in law to
    # Erlang(k, rate = density at the query point)
    cases = [
        (oracle.Gaussian1D(0, 1), 0.3, 5, -1.0),
        (oracle.Uniform1D(0, 1), 0.4, 3, 0.5),
    ]
    for dens, x, k, g in cases:
        ana = oracle.erlang_moment(k, dens.pdf(x), g)
        emp = oracle.empirical_knn_moment(dens, x, k, g,
                                          n_points=500, n_reps=100_000, seed=1)
        assert abs(emp - ana) / abs(ana) < 0.02


def test_empirical_knn_moment_validation():
    with pytest.raises(ConfigError):
        oracle.empirical_knn_moment(oracle.Gaussian2D(), 0.0, 3, 0.5,
                                    n_points=50, n_reps=10, seed=0)
    with pytest.raises(ConfigError):
        oracle.empirical_knn_moment(oracle.Gaussian1D(0, 1), 0.0, 9, 0.5,
                                    n_points=9, n_reps=10, seed=0)


# ---------------------------------------------------------------------------
# The bundled check table.

def test_standard_checks_all_pass():
    checks = oracle.standard_checks(seed=0)
    failed = [c for c in checks if not c.passed]
    assert not failed, "\n".join(f"{c.name}: {c.detail}" for c in failed)
    # table covers normalizations, self integrals, known pairs,
    # closed-form cross-checks, and the finite-variance Erlang grid
    assert len(checks) == 58
    assert sum("erlang" in c.name for c in checks) == 11
