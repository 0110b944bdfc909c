"""Randomised invariants: serialisation, ODE identities, evenness, ordering, v identity."""
import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from nonsep_sl.domain import (BoundaryParams, Potential, SignSequence, SpectralData, TwoSidedSpectrum,
                              decode, encode)
from nonsep_sl.forward import forward
from nonsep_sl.functions import v_minus_values
from nonsep_sl.ode import eta_sigma, integrate_fundamental

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
small = st.floats(-2.0, 2.0, allow_nan=False)
coeffs = st.lists(st.floats(-1.0, 1.0, allow_nan=False), min_size=3, max_size=3)


def trig_q(c, n_nodes=101):
    return Potential.from_function(lambda x: c[0] + c[1] * np.cos(x) + c[2] * np.sin(2 * x), n_nodes)


@given(st.lists(finite, min_size=3, max_size=40))
def test_potential_roundtrip(values):
    q = Potential(np.array(values))
    assert decode(encode(q), Potential) == q


@given(small, small, small, small.filter(lambda w: abs(w) > 1e-3))
def test_boundary_roundtrip(alpha, beta, gamma, omega):
    if alpha == 0.0:
        alpha = 1.0
    bp = BoundaryParams(alpha, beta, gamma, omega)
    assert decode(encode(bp), BoundaryParams) == bp


@given(st.integers(1, 12), st.booleans(), st.lists(st.sampled_from([-1, 0, 1]), max_size=12),
       st.floats(-0.4, 0.4))
def test_spectral_roundtrip(K, complex_pair, signs, shift):
    k = np.arange(1, K + 1) + shift
    central = (complex(0.1, 0.3), complex(0.1, -0.3)) if complex_pair else (-0.2, 0.3)
    data = SpectralData(TwoSidedSpectrum(central[0], central[1], k, -k), SignSequence(signs))
    assert decode(encode(data), SpectralData) == data


@settings(max_examples=60, deadline=None)
@given(coeffs, st.floats(-30.0, 30.0), st.floats(-3.0, 3.0), st.floats(-2.0, 2.0))
def test_wronskian_and_eta_sigma_identity(c, lr, li, gamma):
    q = trig_q(c)
    lam = complex(lr, li)
    fv = integrate_fundamental(q, lam)
    scale = np.exp(2 * abs(li) * np.pi)
    assert abs(fv.wronskian - 1.0) <= 1e-8 * scale
    eta, sig = eta_sigma(fv, gamma)
    assert abs(fv.c * sig - fv.s * eta - 1.0) <= 1e-8 * scale * (1 + abs(gamma))


@settings(max_examples=40, deadline=None)
@given(coeffs, st.lists(st.floats(-40.0, 40.0), min_size=1, max_size=8))
def test_fundamental_is_even_in_lambda(c, lams):
    q = trig_q(c)
    lam = np.array(lams)
    a, b = integrate_fundamental(q, lam), integrate_fundamental(q, -lam)
    for name in ("c", "cp", "s", "sp"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


@settings(max_examples=4, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.floats(-0.3, 0.3), st.floats(0.5, 1.5), st.floats(-3.0, -2.0), st.floats(0.0, 0.4),
       st.floats(0.3, 0.8))
def test_forward_spectrum_is_ordered(amp, alpha, beta, gamma, omega):
    q = Potential.from_function(lambda x: amp * np.sin(x), 101)
    fr = forward(q, BoundaryParams(alpha, beta, gamma, omega), K=16)
    mu = fr.data.mu
    assert np.all(np.diff(mu.noncentral()) > 0)
    if mu.central_is_real:
        assert np.all(np.diff(mu.flattened()) > 0)
    assert np.all(np.diff(fr.aux.theta) > 0)
    assert np.all(np.diff(fr.aux.lambda_d) > 0) and np.all(np.diff(fr.aux.nu) > 0)


@given(st.lists(st.floats(1.0, 50.0), min_size=1, max_size=20), st.floats(0.05, 0.49),
       st.lists(st.sampled_from([-1, 1]), min_size=20, max_size=20))
def test_v_identity(vp_abs, omega, signs):
    vp = 2 * omega + np.array(vp_abs)
    vm, clamped = v_minus_values(vp, omega, SignSequence(signs))
    assert not clamped
    np.testing.assert_allclose(vp ** 2 - vm ** 2, 4 * omega ** 2, rtol=1e-9, atol=1e-12)
