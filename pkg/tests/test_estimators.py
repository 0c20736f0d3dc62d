import numpy as np
import pytest

from conftest import constant_problem, counting_problem
from saddlescape.errors import CapabilityError, ConfigurationError
from saddlescape.estimators import (
    ZoConfig,
    estimate_sgc_rho,
    fo_gradient,
    grad_minibatch_trials,
    hess_minibatch_trials,
    so_hessian,
    zo_gradient,
    zo_hessian,
)
from saddlescape.problems import (
    make_additive_noise_variant,
    make_multiplicative_saddle,
)
from saddlescape.seeds import SeedStream


def test_zo_config_validation():
    with pytest.raises(ConfigurationError):
        ZoConfig(nu=0.0)
    with pytest.raises(ConfigurationError):
        ZoConfig(nu=-1e-3)
    with pytest.raises(ConfigurationError):
        ZoConfig(nu=1e-13)  # below the cancellation floor
    with pytest.raises(ConfigurationError):
        ZoConfig(nu=0.1, n1=0)


# ---------------------------------------------------------------------------
# first-order gradient

def test_fo_gradient_deterministic_arm(quad_saddle_2d):
    x = np.array([0.4, -0.9])
    est = fo_gradient(quad_saddle_2d, x, 1, SeedStream(0))
    assert np.array_equal(est.g, quad_saddle_2d.exact_grad(x))
    assert est.oracle_calls == 1


def test_fo_gradient_requires_oracle():
    with pytest.raises(CapabilityError):
        fo_gradient(constant_problem(3), np.zeros(3), 4, SeedStream(0))


def test_fo_gradient_zero_at_stationary_point():
    # strong growth: zero true gradient forces zero sample gradient a.s.
    p = make_multiplicative_saddle(d=4, neg_count=1, rho=2.0, quartic_coeff=0.0)
    for seed in range(32):
        est = fo_gradient(p, np.zeros(4), 3, SeedStream(seed))
        assert np.all(est.g == 0.0)


def test_variance_contraction_lemma():
    # E||mean of n1 sampled grads - grad f||^2 <= ((rho-1)/n1) ||grad f||^2,
    # with equality for the two-point multiplier law
    rho = 2.0
    p = make_multiplicative_saddle(d=10, neg_count=1, rho=rho, quartic_coeff=0.0)
    rng = np.random.default_rng(123)
    for k in range(10):
        x = rng.standard_normal(10)
        gf2 = np.linalg.norm(p.exact_grad(x)) ** 2
        for n1 in (1, 4, 16):
            trials = grad_minibatch_trials(p, x, n1, 20_000, SeedStream(1000 + k).child(n1))
            err2 = ((trials - p.exact_grad(x)) ** 2).sum(axis=1)
            se = err2.std(ddof=1) / np.sqrt(len(err2))
            bound = (rho - 1.0) / n1 * gf2
            # the two-point law attains the bound with equality; allow rounding
            assert err2.mean() <= bound * (1 + 1e-12) + 3 * se


def test_fo_variance_quarter_example():
    # rho=2, n1=4: relative minibatch variance is exactly 0.25
    p = make_multiplicative_saddle(d=3, neg_count=1, rho=2.0, quartic_coeff=0.0)
    x = np.array([1.0, 0.5, -0.5])
    gf2 = np.linalg.norm(p.exact_grad(x)) ** 2
    trials = grad_minibatch_trials(p, x, 4, 100_000, SeedStream(5))
    err2 = ((trials - p.exact_grad(x)) ** 2).sum(axis=1)
    se = err2.std(ddof=1) / np.sqrt(len(err2))
    assert abs(err2.mean() - 0.25 * gf2) <= 3 * se


def test_trials_helper_matches_estimator():
    p = make_multiplicative_saddle(d=3, neg_count=1, rho=2.0, quartic_coeff=0.01)
    x = np.array([0.2, 1.0, -0.7])
    stream = SeedStream(77)
    trials = grad_minibatch_trials(p, x, 8, 5, stream)
    for k in range(5):
        est = fo_gradient(p, x, 8, stream.child("trial", k))
        assert np.array_equal(est.g, trials[k])


# ---------------------------------------------------------------------------
# zeroth-order gradient

def test_zo_gradient_constant_function_is_zero():
    p = constant_problem(4)
    est = zo_gradient(p, np.ones(4), ZoConfig(nu=0.05, n1=64), SeedStream(3))
    assert np.all(est.g == 0.0)
    assert est.oracle_calls == 128


def test_zo_gradient_unbiased_for_quadratics():
    # smoothing leaves quadratics' gradients untouched: grad f_nu == grad f
    p = make_multiplicative_saddle(d=5, neg_count=2, rho=1.0, quartic_coeff=0.0)
    x = np.linspace(-1, 1, 5)
    batches = np.stack([
        zo_gradient(p, x, ZoConfig(nu=1e-3, n1=2_000), SeedStream(10).child(k)).g
        for k in range(50)
    ])
    mean = batches.mean(axis=0)
    se = batches.std(axis=0, ddof=1) / np.sqrt(len(batches))
    assert np.all(np.abs(mean - p.exact_grad(x)) <= 3 * se + 1e-9)


def test_zo_gradient_smoothing_bias_bound():
    # || E g - grad f || <= (nu/2) L_G (d+3)^{3/2} on the quartic arm
    d, nu = 6, 0.05
    p = make_multiplicative_saddle(d=d, neg_count=1, rho=1.0, quartic_coeff=0.01)
    x = 0.4 * np.ones(d)
    batches = np.stack([
        zo_gradient(p, x, ZoConfig(nu=nu, n1=4_000), SeedStream(21).child(k)).g
        for k in range(40)
    ])
    mean = batches.mean(axis=0)
    se_norm = np.linalg.norm(batches.std(axis=0, ddof=1)) / np.sqrt(len(batches))
    bound = 0.5 * nu * p.meta.L_G * (d + 3) ** 1.5
    assert np.linalg.norm(mean - p.exact_grad(x)) <= bound + 3 * se_norm


def test_zo_gradient_second_moment_bound():
    # E||g - grad f||^2 <= ((rho'-1)/n1)||grad f||^2 + 1.5 nu^2 L_G(F)^2 (d+3)^3
    d, nu, rho, n1 = 4, 1e-3, 2.0, 8
    p = make_multiplicative_saddle(d=d, neg_count=1, rho=rho, quartic_coeff=0.0)
    x = np.array([0.8, -0.3, 0.5, 1.1])
    gf = p.exact_grad(x)
    sq = []
    for k in range(400):
        est = zo_gradient(p, x, ZoConfig(nu=nu, n1=n1), SeedStream(31).child(k))
        sq.append(np.linalg.norm(est.g - gf) ** 2)
    sq = np.array(sq)
    rho_prime = 1.0 + 4.0 * (d + 5) * rho
    lip_sample = rho * p.meta.L_G  # a.s. gradient-Lipschitz constant of xi * f
    bound = (rho_prime - 1.0) / n1 * np.linalg.norm(gf) ** 2 + 1.5 * nu**2 * lip_sample**2 * (d + 3) ** 3
    assert sq.mean() + 3 * sq.std(ddof=1) / np.sqrt(len(sq)) <= bound


# ---------------------------------------------------------------------------
# Hessian estimators

def test_so_hessian_deterministic_arm(quad_saddle_2d):
    est = so_hessian(quad_saddle_2d, np.array([1.0, 2.0]), 3, SeedStream(0))
    assert np.array_equal(est.H, quad_saddle_2d.exact_hess([1.0, 2.0]))
    assert est.oracle_calls == 3


def test_so_hessian_requires_oracle():
    with pytest.raises(CapabilityError):
        so_hessian(constant_problem(2), np.zeros(2), 2, SeedStream(0))


def test_so_hessian_variance_bound():
    # E||H - hess f||_F^2 <= sigma2^2 / n2 with sigma2^2 = (rho-1)||A||_F^2
    rho, d, n2 = 2.0, 5, 10
    p = make_multiplicative_saddle(d=d, neg_count=2, rho=rho, quartic_coeff=0.0)
    x = np.linspace(0.1, 1.0, d)
    hf = p.exact_hess(x)
    trials = hess_minibatch_trials(p, x, n2, 4_000, SeedStream(12))
    err2 = ((trials - hf) ** 2).sum(axis=(1, 2))
    se = err2.std(ddof=1) / np.sqrt(len(err2))
    assert p.meta.sigma2**2 == pytest.approx((rho - 1.0) * d)
    assert err2.mean() <= p.meta.sigma2**2 / n2 + 3 * se


def test_so_hessian_error_scales_inverse_sqrt_n2():
    p = make_multiplicative_saddle(d=5, neg_count=1, rho=2.0, quartic_coeff=0.0)
    x = np.linspace(0.2, 1.2, 5)
    hf = p.exact_hess(x)
    sizes = (100, 1_000, 10_000)
    rms = []
    for n2 in sizes:
        trials = hess_minibatch_trials(p, x, n2, 80, SeedStream(40).child(n2))
        rms.append(np.sqrt(((trials - hf) ** 2).sum(axis=(1, 2)).mean()))
    slope = np.polyfit(np.log(sizes), np.log(rms), 1)[0]
    assert abs(slope + 0.5) < 0.1


def test_zo_hessian_constant_function_is_zero():
    p = constant_problem(3)
    est = zo_hessian(p, np.zeros(3), ZoConfig(nu=0.1, n2=32), SeedStream(1))
    assert np.all(est.H == 0.0)
    assert est.oracle_calls == 96


def test_zo_hessian_stein_identity_on_quadratic():
    # E[ (u'Au/2) (uu' - I) ] = A for symmetric A
    p = make_multiplicative_saddle(d=4, neg_count=2, rho=1.0, quartic_coeff=0.0)
    x = np.zeros(4)  # curvature term is exact at the origin for quadratics
    A = p.exact_hess(x)
    batches = np.stack([
        zo_hessian(p, x, ZoConfig(nu=1e-2, n2=4_000), SeedStream(3).child(k)).H
        for k in range(40)
    ])
    mean = batches.mean(axis=0)
    se = batches.std(axis=0, ddof=1) / np.sqrt(len(batches))
    assert np.all(np.abs(mean - A) <= 3 * se + 1e-9)
    assert np.array_equal(mean, mean.T)


def test_zo_hessian_operator_error_bound():
    # E||H - hess f||^2 <= 128(1+2log 2d)(d+16)^4 L_G^2/(3 n2) + 3 L_H^2 (d+16)^5 nu^2
    d, nu, n2 = 3, 1e-3, 50
    p = make_multiplicative_saddle(d=d, neg_count=1, rho=1.0, quartic_coeff=0.0)
    x = np.array([0.5, -0.2, 0.9])
    hf = p.exact_hess(x)
    sq = []
    for k in range(300):
        est = zo_hessian(p, x, ZoConfig(nu=nu, n2=n2), SeedStream(8).child(k))
        sq.append(np.linalg.norm(est.H - hf, 2) ** 2)
    sq = np.array(sq)
    lip = p.meta.L_G
    bound = 128.0 * (1 + 2 * np.log(2 * d)) * (d + 16) ** 4 * lip**2 / (3 * n2)
    bound += 3.0 * p.meta.L_H**2 * (d + 16) ** 5 * nu**2
    assert sq.mean() + 3 * sq.std(ddof=1) / np.sqrt(len(sq)) <= bound


# ---------------------------------------------------------------------------
# growth-constant estimation

def test_rho_estimate_deterministic_arm_is_exactly_one(quad_saddle_2d):
    est = estimate_sgc_rho(quad_saddle_2d, [np.array([1.0, 1.0])], 1_000, SeedStream(0))
    assert est.rho_hat == 1.0 and est.stderr == 0.0


def test_rho_estimate_recovers_three():
    p = make_multiplicative_saddle(d=6, neg_count=2, rho=3.0, quartic_coeff=0.0)
    rng = np.random.default_rng(2)
    points = [rng.standard_normal(6) for _ in range(5)]
    est = estimate_sgc_rho(p, points, 100_000, SeedStream(17))
    assert 2.9 <= est.rho_hat <= 3.1


def test_rho_estimate_diverges_without_strong_growth():
    base = make_multiplicative_saddle(d=5, neg_count=1, rho=1.0, quartic_coeff=0.01)
    p = make_additive_noise_variant(base, 0.5)
    x = 1e-2 * np.ones(5)  # nearly stationary
    gf2 = np.linalg.norm(p.exact_grad(x)) ** 2
    est = estimate_sgc_rho(p, [x], 50_000, SeedStream(9))
    predicted = 1.0 + 0.25 * 5 / gf2  # sigma^2 d / ||grad f||^2
    assert est.rho_hat > 100.0
    assert est.rho_hat == pytest.approx(predicted, rel=0.1)


def test_rho_estimate_preconditions(quad_saddle_2d):
    with pytest.raises(ConfigurationError):
        estimate_sgc_rho(quad_saddle_2d, [np.zeros(2)], 1_000, SeedStream(0))
    with pytest.raises(ConfigurationError):
        estimate_sgc_rho(quad_saddle_2d, [np.ones(2)], 999, SeedStream(0))


# ---------------------------------------------------------------------------
# oracle-call accounting and Gaussian moments

def test_oracle_call_accounting():
    base = make_multiplicative_saddle(d=4, neg_count=1, rho=2.0, quartic_coeff=0.01)
    x = 0.5 * np.ones(4)

    p, counter = counting_problem(base)
    est = fo_gradient(p, x, 7, SeedStream(0))
    assert est.oracle_calls == 7 == counter.grad

    p, counter = counting_problem(base)
    est = zo_gradient(p, x, ZoConfig(nu=0.1, n1=5), SeedStream(0))
    assert est.oracle_calls == 10 == counter.value

    p, counter = counting_problem(base)
    est = so_hessian(p, x, 6, SeedStream(0))
    assert est.oracle_calls == 6 == counter.hess

    p, counter = counting_problem(base)
    est = zo_hessian(p, x, ZoConfig(nu=0.1, n2=4), SeedStream(0))
    assert est.oracle_calls == 12 == counter.value


def test_gaussian_norm_moment_bound():
    # E||u||^k <= (d+k)^{k/2} for standard normal u
    for d in (2, 10):
        u = SeedStream(99).child(d).rng().standard_normal((200_000, d))
        norms = np.linalg.norm(u, axis=1)
        for k in (1, 2, 3, 4):
            assert (norms**k).mean() <= (d + k) ** (k / 2.0)


def test_paired_noise_seeds_across_modes():
    # fo and zo consume the same xi-seed block from a shared stream
    stream = SeedStream(123).child("step", 4)
    assert np.array_equal(stream.child("xi").seeds(6), stream.child("xi").seeds(6))
    p = make_multiplicative_saddle(d=3, neg_count=1, rho=2.0, quartic_coeff=0.0)
    a = zo_gradient(p, np.ones(3), ZoConfig(nu=0.01, n1=6), stream)
    b = zo_gradient(p, np.ones(3), ZoConfig(nu=0.01, n1=6), stream)
    assert np.array_equal(a.g, b.g)
