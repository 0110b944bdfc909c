import functools

import numpy as np
import pytest

from helpers import fixture
from nonsep_sl.domain import CharFn, CharKind, SignSequence
from nonsep_sl.errors import RadicandNegative, RootCountMismatch
from nonsep_sl.functions import (g_interpolate, g_samples, lambda_zeros, make_s_pi, nu_zeros,
                                 recover_functions, recover_gamma, s_pi_eval, s_prime_pi_eval, sin_over,
                                 v_minus_at_theta, v_minus_values, v_plus_eval)
from nonsep_sl.ode import integrate_fundamental
from nonsep_sl.parameters import recover_parameters

COS = CharFn(CharKind.ClosedForm, lambda lam: np.cos(np.pi * lam))
ZERO_G = CharFn(CharKind.ClosedForm, lambda lam: np.zeros_like(lam))


def setup_a_delta(lam):
    lam = np.asarray(lam, dtype=float)
    return 1.0 + lam * np.sin(np.pi * lam) + 0.25 * sin_over(lam) + lam * np.cos(np.pi * lam)


@functools.lru_cache(maxsize=None)
def pipeline(name, K=64):
    q, bp, fr = fixture(name, K)
    p, delta, sigma, theta = recover_parameters(fr.data.mu)
    fn = recover_functions(delta, sigma, theta, fr.data.sigma, p.alpha, p.beta, p.omega)
    return q, bp, fr, p, delta, sigma, fn


def test_v_plus_setup_a_closed_form():
    assert v_plus_eval(setup_a_delta, 0.5, 1.0, 0.0, COS, 1.5) == pytest.approx(-5 / 3, abs=1e-12)
    assert v_plus_eval(setup_a_delta, 0.5, 1.0, 0.0, COS, 0.5) == pytest.approx(1.0, abs=1e-12)


def test_v_plus_at_theta_is_delta_minus_two_omega():
    _, _, _, p, delta, _, fn = pipeline("sin")
    np.testing.assert_allclose(fn.v_plus_theta, delta(fn.aux.theta) - 2 * p.omega, atol=1e-8)


def test_v_minus_examples():
    assert v_minus_at_theta(-5 / 3, 0.5, 1, 2) == pytest.approx(-4 / 3, abs=1e-12)
    assert v_minus_at_theta(1.0, 0.5, 0, 1) == 0.0
    with pytest.raises(RadicandNegative):
        v_minus_at_theta(1.2, 0.7, 1, 1)


def test_v_minus_clamps_boundary_case():
    vm, clamped = v_minus_values([1.0 + 1e-8, -5 / 3], 0.5, SignSequence([1, 1]))
    assert clamped == [1]
    assert vm[0] == 0.0 and vm[1] == pytest.approx(-4 / 3)


def test_g_samples_vanish_for_free_problem():
    theta = np.array([0.5, 1.5])
    g = g_samples(theta, [1.0, -5 / 3], [0.0, -4 / 3], 0.5)
    np.testing.assert_allclose(g, 0.0, atol=1e-12)


def test_g_interpolate_examples():
    theta = np.arange(1, 33) - 0.5
    zero = g_interpolate(theta, np.zeros(32), COS)
    np.testing.assert_array_equal(zero(np.linspace(0, 8, 17)), 0.0)
    one = np.zeros(32)
    one[0] = 1.0
    g = g_interpolate(theta, one, COS)
    # 1.5 = theta_2 is a node, so the series returns the sample there
    assert g(1.5) == 0.0
    assert g(0.5) == pytest.approx(1.0, abs=1e-12)
    # at lam = 1: 2 cos(pi) theta_1 / ((1 - theta_1^2) (-pi sin(theta_1 pi))) = 4 / (3 pi)
    assert g(1.0) == pytest.approx(4 / (3 * np.pi), abs=1e-7)


def test_g_interpolation_fidelity_sin():
    q, bp, fr, _, _, _, fn = pipeline("sin")
    lam = np.linspace(0, 16, 321)
    s = integrate_fundamental(q, lam).s
    g_true = 2 * bp.omega**2 * (s - sin_over(lam))
    assert np.max(np.abs(fn.g(lam) - g_true)) <= 5e-2


def test_g_samples_decay_sin():
    g = pipeline("sin")[-1].g_theta
    q = g.size // 4
    assert np.sqrt(np.mean(g[-q:] ** 2)) < np.sqrt(np.mean(g[:q] ** 2))


def test_s_pi_examples():
    assert s_pi_eval(ZERO_G, 0.5, 1.5) == pytest.approx(-2 / 3, abs=1e-12)
    assert s_pi_eval(ZERO_G, 0.5, 0.0) == pytest.approx(np.pi, abs=1e-12)
    s = make_s_pi(ZERO_G, 0.5)
    assert s.is_even


def test_s_pi_vanishes_at_forward_dirichlet():
    _, _, fr, _, _, _, fn = pipeline("sin")
    assert np.max(np.abs(fn.s_pi(fr.aux.lambda_d[:16]))) <= 1e-2


def test_s_prime_examples():
    assert s_prime_pi_eval(COS, make_s_pi(ZERO_G, 0.5), 0.0, 1.0) == pytest.approx(-1.0, abs=1e-12)
    sig = CharFn(CharKind.ClosedForm, lambda lam: np.cos(np.pi * lam) + 0.3 * sin_over(lam))
    assert s_prime_pi_eval(sig, make_s_pi(ZERO_G, 0.5), 0.3, 1.0) == pytest.approx(-1.0, abs=1e-12)


def test_lambda_zeros_free():
    theta = np.arange(1, 21) - 0.5
    np.testing.assert_allclose(lambda_zeros(make_s_pi(ZERO_G, 0.5), 20, theta), np.arange(1, 21), atol=1e-8)


def test_lambda_zeros_bracket_failure():
    theta = np.arange(1, 21) - 0.5
    bad = CharFn(CharKind.ClosedForm, lambda lam: np.ones_like(lam))
    with pytest.raises(RootCountMismatch):
        lambda_zeros(bad, 20, theta)


def test_nu_zeros_closed_forms():
    n = np.arange(1, 21, dtype=float)
    np.testing.assert_allclose(nu_zeros(COS, 20, n), n - 0.5, atol=1e-10)
    c = 0.5
    sp = CharFn(CharKind.ClosedForm, lambda lam: np.cos(np.sqrt(lam**2 - c + 0j).real * np.pi))
    np.testing.assert_allclose(nu_zeros(sp, 20, np.sqrt(n**2 + c)), np.sqrt((n - 0.5) ** 2 + c), atol=1e-6)


def test_recover_gamma_synthetic():
    n = np.arange(1, 65, dtype=float)
    assert recover_gamma(n - 0.5, n) == 0.0
    theta = n - 0.5 + 1.3 / (n * np.pi)
    lam = n + 1.0 / (n * np.pi)
    assert recover_gamma(theta, lam) == pytest.approx(0.3, abs=1e-6)


def test_setup_a_pipeline_chain():
    _, _, _, _, _, _, fn = pipeline("A")
    n = np.arange(1, 65, dtype=float)
    np.testing.assert_allclose(fn.aux.lambda_d, n, atol=1e-2)
    np.testing.assert_allclose(fn.aux.nu, n - 0.5, atol=1e-2)
    assert abs(fn.gamma) <= 1e-2


def test_sin_pipeline_auxiliary_spectra():
    _, bp, fr, _, _, _, fn = pipeline("sin")
    half = 32
    np.testing.assert_allclose(fn.aux.lambda_d[:half], fr.aux.lambda_d[:half], atol=5e-2)
    np.testing.assert_allclose(fn.aux.nu[:half], fr.aux.nu[:half], atol=5e-2)
    assert fn.gamma == pytest.approx(bp.gamma, abs=5e-2)


@pytest.mark.parametrize("name", ["A", "sin", "sinadm", "c05"])
def test_pipeline_laws(name):
    _, bp, _, p, _, _, fn = pipeline(name)
    th = fn.aux.theta
    n = np.arange(1, th.size + 1)
    np.testing.assert_array_equal(np.sign(fn.s_pi(th)), (-1.0) ** (n + 1))
    lhs = fn.v_minus_theta**2 - fn.v_plus_theta**2
    np.testing.assert_allclose(lhs, -4 * p.omega**2, rtol=1e-6, atol=1e-6 * 4 * p.omega**2)
    lam = fn.aux.lambda_d
    assert np.all(th < lam) and np.all(lam[:-1] < th[1:])
    nu = fn.aux.nu
    assert np.all(nu**2 < lam**2) and np.all(lam[:-1] ** 2 < nu[1:] ** 2)


def test_recovered_functions_are_even():
    fn = pipeline("sin")[-1]
    lam = np.random.default_rng(2).uniform(0, 16, 100)
    for f in (fn.g, fn.s_pi, fn.s_prime_pi):
        v = f(lam)
        assert f.is_even
        np.testing.assert_allclose(f(-lam), v, atol=1e-10 * (1 + np.max(np.abs(v))))
