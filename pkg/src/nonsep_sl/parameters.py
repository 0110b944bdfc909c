"""Recovery of a, alpha, omega, beta and of delta, sigma from the spectrum.

delta is evaluated as a ratio against a reference problem with q = 0, gamma = 0
and the fitted (alpha, omega, B), whose characteristic function is known in
closed form:

    delta(lam) = delta_ref(lam) * prod_k (mu_k - lam) / (mu_k^ref - lam).

Both products carry the same leading constant pi sqrt(1 + alpha^2), and since
mu_k - mu_k^ref = o(1/k) the discarded tail factors are close to one.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .domain import AsymptoticFit, CharFn, CharKind, TwoSidedSpectrum
from .errors import FitDiverged, InconsistentOmega
from .ode import lambda_derivative
from .roots import adaptive_scan

log = logging.getLogger(__name__)

SMALL_LAMBDA = 1e-4
TAIL_FACTOR = 40


# --------------------------------------------------------------------------- #
# Tail fits
# --------------------------------------------------------------------------- #


def tail_indices(K: int, tail_window: float = 0.5) -> np.ndarray:
    """Positive indices in the last ``tail_window`` fraction of 1..K."""
    start = max(1, int(math.ceil(K * (1.0 - tail_window))))
    return np.arange(start, K + 1)


def tail_limit(k, values, tail_window: float = 0.5) -> tuple[float, float]:
    """Extrapolate lim values_k by fitting c0 + c1/k over the last part of the data.

    Returns (c0, c1).
    """
    k = np.asarray(k, dtype=float)
    values = np.asarray(values, dtype=float)
    n = k.size
    if n < 4:
        raise FitDiverged("need at least 4 points for a tail extrapolation")
    keep = slice(n - max(4, int(math.ceil(n * tail_window))), n)
    M = np.column_stack([np.ones(n), 1.0 / k])[keep]
    coef, *_ = np.linalg.lstsq(M, values[keep], rcond=None)
    if not np.all(np.isfinite(coef)):
        raise FitDiverged("tail extrapolation produced non-finite coefficients")
    return float(coef[0]), float(coef[1])


def fit_asymptotics(mu: TwoSidedSpectrum, tail_window: float = 0.5, strict: bool = True,
                    nuisance: bool = True) -> AsymptoticFit:
    """Weighted least squares of mu_k = k + a + ((-1)^{k+1} A - B)/(k pi) on the tail.

    The window is |k| in [K (1 - tail_window), K] on both sides, weights k^2.
    With ``nuisance`` the design also carries 1/k^p and (-1)^{k+1}/k^p columns
    (p = 2, 3) so that the higher-order remainder does not leak into a, A, B;
    their coefficients are kept in ``fit.higher`` for the product tail. Residuals (the remainders tau_k / k against
    the three-term model) are returned for every k != 0 in index order
    -K .. -1, 1 .. K.
    """
    K = mu.K
    if K < 8:
        raise FitDiverged("at least 8 eigenvalues per side are needed for the asymptotic fit")
    k = mu.indices().astype(float)
    vals = mu.noncentral()
    alt = (-1.0) ** (k + 1)
    cols = [np.ones_like(k), alt / (k * np.pi), -1.0 / (k * np.pi)]
    if nuisance:
        cols += [1.0 / k**2, alt / k**2, 1.0 / k**3, alt / k**3]
    design = np.column_stack(cols)
    kt = tail_indices(K, tail_window)
    sel = np.isin(np.abs(k), kt)
    w = np.abs(k[sel])
    coef, *_ = np.linalg.lstsq(design[sel] * w[:, None], (vals[sel] - k[sel]) * w, rcond=None)
    if not np.all(np.isfinite(coef)):
        raise FitDiverged("asymptotic fit produced non-finite coefficients")
    a, A, B = (float(c) for c in coef[:3])
    resid = vals - k - design[:, :3] @ coef[:3]
    fit = AsymptoticFit(a, A, B, float("nan"), resid, (int(kt[0]), K), tuple(coef[3:]))
    if strict and not abs(a) < 0.5:
        raise FitDiverged(f"fitted a = {a:.6g} is outside (-1/2, 1/2)")
    return fit


def residual_decay(fit: AsymptoticFit) -> tuple[float, float]:
    """RMS of the remainder tau_k = |k| * residual_k over the first and last quarter of |k|."""
    K = fit.residuals.size // 2
    absk = np.concatenate([np.arange(K, 0, -1), np.arange(1, K + 1)])
    tau = fit.residuals * absk
    q = max(1, K // 4)
    first = tau[absk <= q]
    last = tau[absk > K - q]
    return float(np.sqrt(np.mean(first**2))), float(np.sqrt(np.mean(last**2)))


# --------------------------------------------------------------------------- #
# alpha, omega, beta
# --------------------------------------------------------------------------- #


def alpha_from_a(a: float) -> float:
    return -math.tan(math.pi * a)


def omega_limit(mu: TwoSidedSpectrum, alpha: float, tail_window: float = 0.5) -> float:
    """omega = (pi sqrt(1+alpha^2)/2) lim k (mu_{2k+1} - mu_{2k} - 1), extrapolated."""
    kmax = (mu.K - 1) // 2
    k = np.arange(1, kmax + 1)
    mp = mu.mu_pos
    vals = k * (mp[2 * k] - mp[2 * k - 1] - 1.0)  # mu_{2k+1} is mu_pos[2k]
    c0, _ = tail_limit(k, vals, tail_window)
    return 0.5 * math.pi * math.sqrt(1.0 + alpha * alpha) * c0


def recover_alpha_omega(fit: AsymptoticFit, mu: TwoSidedSpectrum | None = None,
                        tail_window: float = 0.5) -> tuple[float, float]:
    """alpha = -tan(pi a), omega = A sqrt(1 + alpha^2) / 2.

    With ``mu`` given, omega is cross-checked against the limit formula over
    consecutive odd/even eigenvalue gaps.
    """
    alpha = alpha_from_a(fit.a)
    omega = 0.5 * fit.A * math.sqrt(1.0 + alpha * alpha)
    if mu is not None:
        om2 = omega_limit(mu, alpha, tail_window)
        if abs(om2 - omega) > 5e-2 * (1.0 + abs(omega)):
            raise InconsistentOmega(f"omega from fit {omega:.6g} vs limit formula {om2:.6g}")
        log.debug("omega fit %.10g, limit %.10g", omega, om2)
    return alpha, omega


def beta_limit(mu: TwoSidedSpectrum, theta, a: float, tail_window: float = 0.5) -> float:
    """lim_k k (mu_{2k+1} - theta_{2k+1} - a - 1/2), extrapolated."""
    theta = np.asarray(theta, dtype=float)
    nmax = min(mu.K, theta.size)
    k = np.arange(1, (nmax - 1) // 2 + 1)
    if k.size < 4:
        raise FitDiverged("need more eigenvalues for the beta limit")
    vals = k * (mu.mu_pos[2 * k] - theta[2 * k] - a - 0.5)
    return tail_limit(k, vals, tail_window)[0]


def recover_beta(mu: TwoSidedSpectrum, theta, a: float, alpha: float, omega: float,
                 tail_window: float = 0.5) -> float:
    """beta from the odd-index gaps mu_{2k+1} - theta_{2k+1}.

    By the eigenvalue asymptotics the limit equals (A - B - Q - gamma)/(2 pi), so
    beta = 2 omega sqrt(1 + alpha^2) - 2 pi (1 + alpha^2) lim.
    """
    lim = beta_limit(mu, theta, a, tail_window)
    s = 1.0 + alpha * alpha
    return 2.0 * omega * math.sqrt(s) - 2.0 * math.pi * s * lim


# --------------------------------------------------------------------------- #
# delta as a product, sigma as its odd part
# --------------------------------------------------------------------------- #


def _sin_over(lam):
    """sin(pi lam)/lam, analytic at 0 (complex input allowed)."""
    return np.pi * np.sinc(lam)


def reference_delta(alpha: float, beta: float, omega: float):
    """Closed-form delta of q = 0, gamma = 0 with the given alpha, beta, omega."""

    def f(lam):
        lam = np.asarray(lam)
        return (2.0 * omega + lam * np.sin(np.pi * lam) + omega * omega * _sin_over(lam)
                + (alpha * lam + beta) * np.cos(np.pi * lam))

    return f


@dataclass(frozen=True)
class ProductModel:
    """Everything the product evaluator needs; kept for diagnostics."""

    mu: TwoSidedSpectrum
    mu_ref: TwoSidedSpectrum
    alpha: float
    omega_ref: float
    beta_ref: float


def _all_zeros(mu: TwoSidedSpectrum) -> np.ndarray:
    return np.concatenate([mu.mu_neg[::-1].astype(complex), mu.central, mu.mu_pos.astype(complex)])


def reference_spectrum(alpha: float, beta_ref: float, omega_ref: float, K: int, xtol: float = 1e-13):
    from .forward import label_two_sided

    a = -math.atan(alpha) / math.pi
    mu_ref, _ = label_two_sided(reference_delta(alpha, beta_ref, omega_ref), K, a, xtol=xtol)
    return mu_ref


def _tail_shift(fit: AsymptoticFit, fit_ref: AsymptoticFit, k: np.ndarray) -> np.ndarray:
    """Extrapolated mu_k - mu_k^ref from the higher-order fit coefficients."""
    if not fit.higher or len(fit.higher) != len(fit_ref.higher):
        return np.zeros(k.size)
    d = np.subtract(fit.higher, fit_ref.higher)
    alt = (-1.0) ** (k + 1)
    out = d[0] / k**2 + d[1] * alt / k**2
    if d.size >= 4:
        out += d[2] / k**3 + d[3] * alt / k**3
    return out


def make_product_delta(mu: TwoSidedSpectrum, alpha: float, omega_ref: float, beta_ref: float,
                       fit: AsymptoticFit | None = None, tail_factor: int = TAIL_FACTOR) -> CharFn:
    """delta(lam) from its zeros, regularised by a closed-form reference problem.

    With ``fit`` the factors K < |k| <= tail_factor * K are restored from the
    extrapolated eigenvalue shifts, which removes the leading truncation error.
    """
    K = mu.K
    mu_ref = reference_spectrum(alpha, beta_ref, omega_ref, K)
    z = _all_zeros(mu)
    zr = _all_zeros(mu_ref)
    dref = reference_delta(alpha, beta_ref, omega_ref)
    if fit is not None and tail_factor > 1:
        fit_ref = fit_asymptotics(mu_ref, tail_window=_window_fraction(fit), strict=False)
        kt = np.arange(K + 1, tail_factor * K + 1, dtype=float)
        kt = np.concatenate([kt, -kt])
        shift = _tail_shift(fit, fit_ref, kt)
        base = kt + fit.a
    else:
        shift = base = np.empty(0)

    def evaluate(lam):
        lam_in = np.asarray(lam, dtype=float)
        lam = np.atleast_1d(lam_in)
        ratio = np.prod((z[None, :] - lam[:, None]) / (zr[None, :] - lam[:, None]), axis=1).real
        if shift.size:
            ratio = ratio * np.exp(np.sum(np.log1p(shift[None, :] / (base[None, :] - lam[:, None])), axis=1))
        return (dref(lam) * ratio).reshape(lam_in.shape)

    model = ProductModel(mu, mu_ref, alpha, omega_ref, beta_ref)
    return CharFn(CharKind.ProductDelta, evaluate, zeros=mu.noncentral(),
                  params={"alpha": alpha, "omega_ref": omega_ref, "beta_ref": beta_ref, "K": K,
                          "tail_factor": tail_factor if shift.size else 1, "model": model},
                  reference=f"q=0, gamma=0, alpha={alpha:.17g}, beta={beta_ref:.17g}, omega={omega_ref:.17g}")


def _window_fraction(fit: AsymptoticFit) -> float:
    lo, K = fit.window
    return 1.0 - lo / K if K else 0.5


def delta_from_product(mu: TwoSidedSpectrum, alpha: float, fit: AsymptoticFit | None = None,
                       omega: float | None = None, beta_ref: float | None = None) -> CharFn:
    """delta(lam) = pi sqrt(1+alpha^2) (mu_-0 - lam)(mu_+0 - lam) prod_{k != 0} (mu_k - lam)/k.

    The reference problem takes omega and B from ``fit`` unless given; with
    neither available it falls back to omega from the spectrum and beta_ref = 0.
    """
    if fit is None:
        fit = fit_asymptotics(mu, strict=False)
    if omega is None:
        omega = 0.5 * fit.A * math.sqrt(1.0 + alpha * alpha)
    if beta_ref is None:
        beta_ref = fit.B * (1.0 + alpha * alpha)
    return make_product_delta(mu, alpha, omega, beta_ref, fit=fit)


def raw_product_delta(mu: TwoSidedSpectrum, alpha: float, lam) -> np.ndarray:
    """Plain truncation of the infinite product (slowly convergent; used as a check)."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    k = mu.indices().astype(float)
    nc = mu.noncentral()
    c = mu.central
    pair = ((c[0] - lam) * (c[1] - lam)).real
    prod = np.prod((nc[None, :] - lam[:, None]) / k[None, :], axis=1)
    return math.pi * math.sqrt(1.0 + alpha * alpha) * pair * prod


def delta_at_zero(mu: TwoSidedSpectrum, alpha: float) -> float:
    """pi sqrt(1+alpha^2) mu_-0 mu_+0 prod mu_k / k, truncated."""
    c = mu.central
    k = mu.indices().astype(float)
    return float(math.pi * math.sqrt(1.0 + alpha * alpha) * (c[0] * c[1]).real
                 * np.prod(mu.noncentral() / k))


def sigma_from_delta(delta: CharFn, alpha: float) -> CharFn:
    """sigma(pi, lam) = (delta(lam) - delta(-lam)) / (2 alpha lam), even by construction."""
    if alpha == 0.0:
        raise ValueError("alpha must be non-zero")
    d0 = lambda_derivative(lambda x: delta(x), 0.0) / alpha

    def evaluate(lam):
        lam = np.asarray(lam, dtype=float)
        small = np.abs(lam) <= SMALL_LAMBDA
        ls = np.where(small, 1.0, lam)
        both = delta(np.concatenate([ls, -ls])).reshape(2, -1)
        out = (both[0] - both[1]) / (2.0 * alpha * ls)
        return np.where(small, d0, out)

    return CharFn(CharKind.OddPartSigma, evaluate, params={"alpha": alpha}, reference=delta.reference)


def theta_from_sigma(sigma: CharFn, N: int, xtol: float = 1e-12) -> np.ndarray:
    """Positive zeros theta_1 < ... < theta_N of an even sigma."""
    if N < 4:
        raise ValueError("N must be at least 4")
    return adaptive_scan(sigma, 0.0, float(N), N, step=0.05, fine_region=(0.0, 1.5), fine_step=0.01,
                         xtol=xtol)


@dataclass(frozen=True)
class RecoveredParams:
    a: float
    alpha: float
    omega: float
    beta: float
    fit: AsymptoticFit
    omega_limit: float = float("nan")
    beta_limit: float = float("nan")


def recover_parameters(mu: TwoSidedSpectrum, N: int | None = None, tail_window: float = 0.5):
    """Steps 1-4: (RecoveredParams, delta CharFn, sigma CharFn, theta)."""
    N = mu.K if N is None else N
    fit = fit_asymptotics(mu, tail_window)
    alpha, omega = recover_alpha_omega(fit, mu, tail_window)
    delta = delta_from_product(mu, alpha, fit, omega)
    sigma = sigma_from_delta(delta, alpha)
    theta = theta_from_sigma(sigma, N)
    beta = recover_beta(mu, theta, fit.a, alpha, omega, tail_window)
    params = RecoveredParams(fit.a, alpha, omega, beta, fit,
                             omega_limit(mu, alpha, tail_window), beta_limit(mu, theta, fit.a, tail_window))
    return params, delta, sigma, theta


def with_Q(fit: AsymptoticFit, alpha: float, beta: float, gamma: float) -> AsymptoticFit:
    """Fill Q_est from B = beta/(1+alpha^2) - gamma - Q."""
    return replace(fit, Q_est=beta / (1.0 + alpha * alpha) - gamma - fit.B)

