"""Recovery of v+, v-, g, s(pi, lam), s'(pi, lam), gamma and the two auxiliary spectra.

Starting from delta and sigma (both reconstructed from {mu_k}) and the sign
sequence, the chain is

    v+(lam)      = delta(lam) - 2 omega - (alpha lam + beta) sigma(pi, lam)
    v-(theta_n)  = (-1)^{n+1} sigma_n sqrt(v+(theta_n)^2 - 4 omega^2)
    g(theta_n)   = v+(theta_n) - v-(theta_n) - 2 omega^2 sin(theta_n pi)/theta_n
    g(lam)       = 2 sigma(pi, lam) sum_n theta_n g(theta_n) / ((lam^2 - theta_n^2) sigma'(pi, theta_n))
    s(pi, lam)   = g(lam)/(2 omega^2) + sin(lam pi)/lam
    s'(pi, lam)  = sigma(pi, lam) - gamma s(pi, lam)

with gamma = pi lim n (theta_n - lambda_n + 1/2). Every recovered function is
only certified on the band |lam| <= N/4.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .domain import AuxSpectra, CharFn, CharKind, SignSequence
from .errors import FitDiverged, RadicandNegative, RootCountMismatch
from .ode import lambda_derivative_vec
from .parameters import tail_limit
from .roots import refine_brackets

log = logging.getLogger(__name__)

AT_NODE = 1e-9
SMALL_LAMBDA = 1e-4


def sin_over(lam):
    """sin(lam pi)/lam with its value pi at 0."""
    return np.pi * np.sinc(np.asarray(lam, dtype=float))


def clamp_tolerance(v_plus) -> np.ndarray:
    """Radicand clamping tolerance 1e-6 (1 + v+^2)."""
    return 1e-6 * (1.0 + np.asarray(v_plus, dtype=float) ** 2)


# --------------------------------------------------------------------------- #
# v+, v-, g samples
# --------------------------------------------------------------------------- #


def v_plus_eval(delta, omega: float, alpha: float, beta: float, sigma, lam):
    """v+(lam) = delta(lam) - 2 omega - (alpha lam + beta) sigma(pi, lam)."""
    lam = np.asarray(lam, dtype=float)
    return delta(lam) - 2.0 * omega - (alpha * lam + beta) * sigma(lam)


def v_minus_at_theta(v_plus_n: float, omega: float, sigma_n: int, n: int, tol_b: float | None = None) -> float:
    """v-(theta_n) = (-1)^{n+1} sigma_n sqrt(v+^2 - 4 omega^2), radicand clamped near 0.

    A negative radicand beyond ``tol_b`` means the data violate the margin
    condition, unless sigma_n = 0 where the product vanishes anyway.
    """
    r = v_plus_n * v_plus_n - 4.0 * omega * omega
    tol = float(clamp_tolerance(v_plus_n)) if tol_b is None else tol_b
    if r < -tol and sigma_n != 0:
        raise RadicandNegative(
            f"v+(theta_{n})^2 = {v_plus_n * v_plus_n:.6g} < 4 omega^2 = {4 * omega * omega:.6g}")
    if abs(r) <= tol and r != 0.0:
        log.debug("radicand at n=%d clamped (%.3g)", n, r)
    root = math.sqrt(max(r, 0.0)) if abs(r) > tol else 0.0
    return (-1.0) ** (n + 1) * sigma_n * root


def v_minus_values(v_plus, omega: float, signs: SignSequence) -> tuple[np.ndarray, list[int]]:
    """v-(theta_n) for n = 1..len(v_plus); also the indices where the radicand was clamped."""
    v_plus = np.asarray(v_plus, dtype=float)
    out = np.empty(v_plus.size)
    clamped = []
    for i, vp in enumerate(v_plus):
        n = i + 1
        sn = int(signs.signs[i]) if i < len(signs.signs) else 1
        r = vp * vp - 4.0 * omega * omega
        if abs(r) <= clamp_tolerance(vp) and r != 0.0:
            clamped.append(n)
        out[i] = v_minus_at_theta(float(vp), omega, sn, n)
    return out, clamped


def g_samples(theta, v_plus_at_theta, v_minus_at_theta, omega: float) -> np.ndarray:
    """g(theta_n) = v+ - v- - 2 omega^2 sin(theta_n pi)/theta_n."""
    theta = np.asarray(theta, dtype=float)
    return (np.asarray(v_plus_at_theta, dtype=float) - np.asarray(v_minus_at_theta, dtype=float)
            - 2.0 * omega * omega * sin_over(theta))


# --------------------------------------------------------------------------- #
# Interpolation of g
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class GInterpolant:
    """Weights of the cardinal series for g; callable."""

    theta: np.ndarray
    g_theta: np.ndarray
    weights: np.ndarray  # 2 theta_n g(theta_n) / sigma'(theta_n)
    sigma: object

    def terms(self, lam) -> np.ndarray:
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        den = lam[:, None] ** 2 - self.theta[None, :] ** 2
        den = np.where(den == 0.0, np.inf, den)
        return self.weights[None, :] / den

    def __call__(self, lam):
        lam_in = np.asarray(lam, dtype=float)
        lam = np.atleast_1d(lam_in)
        val = np.asarray(self.sigma(lam), dtype=float) * self.terms(lam).sum(axis=1)
        # exactly at a node the series is 0 * inf; return the sample
        d = np.abs(np.abs(lam)[:, None] - self.theta[None, :])
        hit = d <= AT_NODE * (1.0 + self.theta[None, :])
        if hit.any():
            rows, cols = np.nonzero(hit)
            val[rows] = self.g_theta[cols]
        return val.reshape(lam_in.shape)

    def truncation_estimate(self, lam) -> np.ndarray:
        """Magnitude of the last-quarter partial sum, a proxy for the omitted tail."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        N = self.theta.size
        q = max(1, N // 4)
        part = self.terms(lam)[:, N - q:].sum(axis=1)
        return np.abs(np.asarray(self.sigma(lam), dtype=float) * part)


def g_interpolate(theta, g_at_theta, sigma) -> CharFn:
    """g(lam) = 2 sigma(pi, lam) sum theta_n g(theta_n) / ((lam^2 - theta_n^2) sigma'(pi, theta_n))."""
    theta = np.asarray(theta, dtype=float)
    g_theta = np.asarray(g_at_theta, dtype=float)
    dsig = lambda_derivative_vec(sigma, theta)
    if np.any(dsig == 0.0):
        raise ValueError("sigma has a multiple zero among theta")
    interp = GInterpolant(theta, g_theta, 2.0 * theta * g_theta / dsig, sigma)
    return CharFn(CharKind.RecoveredS, interp, zeros=None,
                  params={"N": int(theta.size), "band": float(theta.size) / 4.0, "interpolant": interp},
                  reference="cardinal series over theta_n")


# --------------------------------------------------------------------------- #
# s, s', gamma and zeros
# --------------------------------------------------------------------------- #


def s_pi_eval(g, omega: float, lam):
    """s(pi, lam) = g(lam)/(2 omega^2) + sin(lam pi)/lam."""
    if omega == 0.0:
        raise ValueError("omega must be non-zero")
    lam = np.asarray(lam, dtype=float)
    return np.asarray(g(lam), dtype=float) / (2.0 * omega * omega) + sin_over(lam)


def make_s_pi(g, omega: float) -> CharFn:
    return CharFn(CharKind.RecoveredS, lambda lam: s_pi_eval(g, omega, lam), params={"omega": omega},
                  reference="g/(2 omega^2) + sin(lam pi)/lam")


def s_prime_pi_eval(sigma, s_pi, gamma: float, lam):
    """s'(pi, lam) = sigma(pi, lam) - gamma s(pi, lam)."""
    lam = np.asarray(lam, dtype=float)
    return np.asarray(sigma(lam), dtype=float) - gamma * np.asarray(s_pi(lam), dtype=float)


def make_s_prime_pi(sigma, s_pi, gamma: float) -> CharFn:
    return CharFn(CharKind.RecoveredSPrime, lambda lam: s_prime_pi_eval(sigma, s_pi, gamma, lam),
                  params={"gamma": gamma}, reference="sigma - gamma s")


def _zeros_in_brackets(f, lo, hi, what: str, xtol: float, samples: int = 16) -> np.ndarray:
    """Exactly one sign change per bracket (lo_i, hi_i) is required."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    t = np.linspace(0.0, 1.0, samples + 1)[1:-1]
    grid = lo[:, None] + (hi - lo)[:, None] * t[None, :]
    grid = np.concatenate([lo[:, None], grid, hi[:, None]], axis=1)
    v = np.asarray(f(grid.ravel()), dtype=float).reshape(grid.shape)
    s = np.sign(v)
    flips = s[:, :-1] * s[:, 1:] < 0
    count = flips.sum(axis=1)
    bad = np.nonzero(count != 1)[0]
    if bad.size:
        i = int(bad[0])
        raise RootCountMismatch(
            f"{what}: bracket {i + 1} ({lo[i]:.6g}, {hi[i]:.6g}) holds {int(count[i])} sign changes, expected 1")
    j = np.argmax(flips, axis=1)
    rows = np.arange(lo.size)
    return refine_brackets(f, grid[rows, j], grid[rows, j + 1], v[rows, j], v[rows, j + 1], xtol=xtol)


def lambda_zeros(s_pi, N: int, theta, xtol: float = 1e-12) -> np.ndarray:
    """Zeros lambda_1 < ... < lambda_N of s(pi, .), one in each (theta_n, theta_{n+1})."""
    if N < 4:
        raise ValueError("N must be at least 4")
    theta = np.asarray(theta, dtype=float)
    if theta.size < N:
        raise ValueError("need N values of theta")
    upper = np.append(theta[1:N], theta[N - 1] + 1.0)
    return _zeros_in_brackets(s_pi, theta[:N], upper, "dirichlet zeros", xtol)


def nu_zeros(s_prime_pi, N: int, lambda_d, xtol: float = 1e-12) -> np.ndarray:
    """Zeros nu_1 < ... < nu_N of s'(pi, .), one in each (lambda_{n-1}, lambda_n), lambda_0 = 0."""
    if N < 4:
        raise ValueError("N must be at least 4")
    lam = np.asarray(lambda_d, dtype=float)[:N]
    lower = np.concatenate([[0.0], lam[:-1]])
    return _zeros_in_brackets(s_prime_pi, lower, lam, "dirichlet-neumann zeros", xtol)


def recover_gamma(theta, lambda_d, tail_window: float = 0.5, n_max: int | None = None) -> float:
    """gamma = pi lim n (theta_n - lambda_n + 1/2), extrapolated with c0 + c1/n.

    ``n_max`` restricts the fit to the first n_max indices (the trusted band).
    """
    theta = np.asarray(theta, dtype=float)
    lam = np.asarray(lambda_d, dtype=float)
    m = min(theta.size, lam.size)
    if n_max is not None:
        m = min(m, n_max)
    if m < 16:
        raise FitDiverged("need at least 16 aligned values of theta and lambda")
    n = np.arange(1, m + 1, dtype=float)
    c0, _ = tail_limit(n, n * (theta[:m] - lam[:m] + 0.5), tail_window)
    return math.pi * c0


# --------------------------------------------------------------------------- #
# Orchestration
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class RecoveredFunctions:
    v_plus: CharFn
    g: CharFn
    s_pi: CharFn
    s_prime_pi: CharFn
    gamma: float
    aux: AuxSpectra
    v_plus_theta: np.ndarray = field(default_factory=lambda: np.empty(0))
    v_minus_theta: np.ndarray = field(default_factory=lambda: np.empty(0))
    g_theta: np.ndarray = field(default_factory=lambda: np.empty(0))
    clamped: tuple[int, ...] = ()


def recover_functions(delta, sigma, theta, signs: SignSequence, alpha: float, beta: float,
                      omega: float, tail_window: float = 0.5, xtol: float = 1e-12) -> RecoveredFunctions:
    """Steps 5-11: v+, v-, g, s, lambda_n, gamma, s', nu_n."""
    theta = np.asarray(theta, dtype=float)
    N = theta.size
    v_plus = CharFn(CharKind.ClosedForm, lambda lam: v_plus_eval(delta, omega, alpha, beta, sigma, lam),
                    params={"alpha": alpha, "beta": beta, "omega": omega}, reference="delta - 2 omega - (alpha lam + beta) sigma")
    vp = np.asarray(v_plus(theta), dtype=float)
    vm, clamped = v_minus_values(vp, omega, signs)
    gt = g_samples(theta, vp, vm, omega)
    g = g_interpolate(theta, gt, sigma)
    s_pi = make_s_pi(g, omega)
    lam_d = lambda_zeros(s_pi, N, theta, xtol)
    gamma = recover_gamma(theta, lam_d, tail_window, n_max=_band_count(N))
    s_prime = make_s_prime_pi(sigma, s_pi, gamma)
    nu = nu_zeros(s_prime, N, lam_d, xtol)
    return RecoveredFunctions(v_plus, g, s_pi, s_prime, gamma, AuxSpectra(theta, lam_d, nu),
                              vp, vm, gt, tuple(clamped))


def _band_count(N: int) -> int:
    return max(16, N // 2)
