"""Sufficient conditions for a sequence {mu_k}, {sigma_n} to be spectral data of problem P.

1. mu_k = k + a + ((-1)^{k+1} A - B)/(k pi) + tau_k/k with 0 < |a| < 1/2, omega != 0
   and a decaying remainder;
2. the zeros theta_n of delta(lam) - delta(-lam) interlace with the mu_k as
   ... <= theta_{-1} <= mu_{-0} < 0 < mu_{+0} <= theta_1 <= mu_1 <= theta_2 <= ...
   and are pairwise distinct;
3. b_n = |delta(theta_n) - 2 omega| - 2 |omega| >= 0;
4. sigma_n = 0 exactly when b_n = 0, and sigma_n = +1 from some index on.

delta is rebuilt from {mu_k} alone, so theta_n never comes from the caller.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import AsymptoticFit, SignSequence, SpectralData, TwoSidedSpectrum, dumps, fit_to_dict
from .errors import SpectralError
from .parameters import (alpha_from_a, delta_from_product, fit_asymptotics, residual_decay,
                         sigma_from_delta, theta_from_sigma)

TOL_A = 1e-6
TOL_CHAIN = 1e-9
TOL_B = 1e-6
TOL_OMEGA = 1e-8


@dataclass(frozen=True)
class AdmissibilityReport:
    cond1: dict
    cond2: dict
    cond3: dict
    cond4: dict
    verdict: bool
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        c1 = dict(self.cond1)
        if isinstance(c1.get("fit"), AsymptoticFit):
            c1["fit"] = fit_to_dict(c1["fit"])
        return {"verdict": self.verdict, "cond1": c1, "cond2": self.cond2, "cond3": self.cond3,
                "cond4": self.cond4, "diagnostics": self.diagnostics}

    def to_json(self) -> str:
        return dumps(self.to_dict(), indent=1)

    @property
    def failed(self) -> list[int]:
        return [i for i, c in enumerate((self.cond1, self.cond2, self.cond3, self.cond4), 1) if not c["pass"]]


def check_condition1(mu: TwoSidedSpectrum, tail_window: float = 0.5) -> dict:
    """Asymptotics: 0 < |a| < 1/2, omega != 0, RMS of tau_k smaller in the last quarter than the first."""
    if mu.K < 16:
        raise ValueError("condition 1 needs K >= 16")
    fit = fit_asymptotics(mu, tail_window, strict=False)
    a = fit.a
    out = {"pass": False, "fit": fit, "a": a, "reason": ""}
    if not abs(a) < 0.5:
        out["reason"] = f"|a| = {abs(a):.6g} is not below 1/2"
        return out
    if abs(a) <= TOL_A:
        out["reason"] = f"|a| = {abs(a):.3g} <= {TOL_A:g}: a = 0 is excluded (alpha would vanish)"
        return out
    alpha = alpha_from_a(a)
    omega = 0.5 * fit.A * math.sqrt(1.0 + alpha * alpha)
    out["omega"] = omega
    if abs(omega) <= TOL_OMEGA:
        out["reason"] = "fitted omega vanishes"
        return out
    first, last = residual_decay(fit)
    out["rms_first"], out["rms_last"] = first, last
    if not (last < first or last <= 1e-8):
        out["reason"] = f"remainder does not decay (RMS {first:.3g} -> {last:.3g})"
        return out
    out["pass"] = True
    return out


def _chain(mu: TwoSidedSpectrum, theta: np.ndarray):
    """Labelled ascending chain ... mu_{-1}, theta_{-1}, mu_{-0}, mu_{+0}, theta_1, mu_1, ..."""
    K = min(mu.K, theta.size)
    labels, vals = [], []
    for k in range(K, 0, -1):
        labels += [f"mu_-{k}", f"theta_-{k}"]
        vals += [float(mu.mu_neg[k - 1]), -float(theta[k - 1])]
    labels += ["mu_-0", "mu_+0"]
    vals += [float(np.real(mu.mu_neg0)), float(np.real(mu.mu_pos0))]
    for k in range(1, K + 1):
        labels += [f"theta_{k}", f"mu_{k}"]
        vals += [float(theta[k - 1]), float(mu.mu_pos[k - 1])]
    return labels, np.array(vals)


def check_condition2(mu: TwoSidedSpectrum, a: float, theta=None, delta=None, N: int | None = None) -> dict:
    """Interlacing of theta (zeros of the odd part of the product delta) with mu."""
    out = {"pass": False, "first_violation": None, "reason": "", "theta": None}
    if not mu.central_is_real:
        out["first_violation"] = ["mu_-0", "mu_+0"]
        out["reason"] = f"central pair is not real ({complex(mu.mu_pos0):.6g})"
        return out
    if not float(mu.mu_neg0) < 0.0:
        out["first_violation"] = ["mu_-0", "0"]
        out["reason"] = "mu_-0 < 0 fails"
        return out
    if not float(mu.mu_pos0) > 0.0:
        out["first_violation"] = ["0", "mu_+0"]
        out["reason"] = "0 < mu_+0 fails"
        return out
    if theta is None:
        alpha = alpha_from_a(a)
        try:
            delta = delta_from_product(mu, alpha) if delta is None else delta
            theta = theta_from_sigma(sigma_from_delta(delta, alpha), mu.K if N is None else N)
        except SpectralError as exc:
            out["reason"] = f"theta could not be formed: {exc}"
            return out
    theta = np.asarray(theta, dtype=float)
    out["theta"] = theta
    labels, vals = _chain(mu, theta)
    bad = np.nonzero(vals[:-1] > vals[1:] + TOL_CHAIN)[0]
    if bad.size:
        i = int(bad[0])
        out["first_violation"] = [labels[i], labels[i + 1]]
        out["reason"] = f"{labels[i]} = {vals[i]:.10g} > {labels[i + 1]} = {vals[i + 1]:.10g}"
        return out
    close = np.nonzero(np.diff(theta) <= TOL_CHAIN)[0]
    if close.size:
        n = int(close[0]) + 1
        out["first_violation"] = [f"theta_{n}", f"theta_{n + 1}"]
        out["reason"] = "theta values coincide"
        return out
    out["pass"] = True
    return out


def b_values(delta, theta, omega: float) -> np.ndarray:
    """b_n = |delta(theta_n) - 2 omega| - 2 |omega|."""
    d = np.asarray(delta(np.asarray(theta, dtype=float)), dtype=float)
    return np.abs(d - 2.0 * omega) - 2.0 * abs(omega)


def b_tolerance(delta, theta, err_est=0.0) -> np.ndarray:
    """Per-n tolerance 1e-6 (1 + |delta(theta_n)|) plus an estimate of the reconstruction error."""
    d = np.asarray(delta(np.asarray(theta, dtype=float)), dtype=float)
    return TOL_B * (1.0 + np.abs(d)) + np.asarray(err_est, dtype=float)


def check_condition3(delta, theta, omega: float, tol=None) -> dict:
    """b_n >= -tol_n for every n."""
    theta = np.asarray(theta, dtype=float)
    b = b_values(delta, theta, omega)
    tol = b_tolerance(delta, theta) if tol is None else np.broadcast_to(np.asarray(tol, dtype=float), b.shape)
    neg = np.nonzero(b < -tol)[0]
    out = {"pass": not neg.size, "b_values": b, "tolerance": tol,
           "first_negative": None if not neg.size else int(neg[0]) + 1}
    return out


def check_condition4(sigma: SignSequence, b, tol=None) -> dict:
    """sigma_n = 0 iff |b_n| <= tol; nonzero where b_n > tol; an all +1 suffix; N0 reported.

    Indices with b_n < -tol already violate condition 3 and are not judged here.
    """
    s = np.asarray(sigma.signs)
    b = np.asarray(b, dtype=float)
    m = min(s.size, b.size)
    s, b = s[:m], b[:m]
    tol = np.full(m, TOL_B) if tol is None else np.broadcast_to(np.asarray(tol, dtype=float), (b.size,))[:m]
    out = {"pass": False, "N0": None, "first_violation": None, "reason": ""}
    zero_b = np.abs(b) <= tol
    mismatch = np.nonzero(((s == 0) != zero_b) & (b >= -tol))[0]
    if mismatch.size:
        n = int(mismatch[0]) + 1
        out["first_violation"] = n
        out["reason"] = f"sigma_{n} = {int(s[n - 1])} while b_{n} = {b[n - 1]:.3g}"
        return out
    not_plus = np.nonzero(s != 1)[0]
    n0 = 1 if not not_plus.size else int(not_plus[-1]) + 2
    if n0 > m:
        out["reason"] = "no all +1 suffix within the available signs"
        return out
    out["N0"] = n0
    out["pass"] = True
    return out


def _error_estimate(mu: TwoSidedSpectrum, alpha: float, delta, theta) -> np.ndarray:
    """|delta_K - delta_{K/2}| at theta_n, an upper-bound proxy for the truncation error."""
    try:
        half = delta_from_product(mu.truncate(mu.K // 2), alpha)
        return np.abs(np.asarray(delta(theta)) - np.asarray(half(theta)))
    except SpectralError:
        return np.zeros(np.size(theta))


def check_all(data: SpectralData, tail_window: float = 0.5, N: int | None = None) -> AdmissibilityReport:
    """Conditions 1 to 4. Later checks still run when their inputs can be formed."""
    mu = data.mu
    N = len(data.sigma) if N is None else N
    c1 = check_condition1(mu, tail_window)
    fit = c1["fit"]
    diag: dict = {"convention": "(-1)^{n+1} in v- and g(theta_n)"}
    a = fit.a
    c2 = {"pass": False, "first_violation": None, "reason": "condition 1 failed; a unavailable"}
    c3 = {"pass": False, "b_values": [], "reason": "needs theta"}
    c4 = {"pass": False, "N0": None, "reason": "needs b_n"}
    if 0.0 < abs(a) < 0.5:
        alpha = alpha_from_a(a)
        omega = 0.5 * fit.A * math.sqrt(1.0 + alpha * alpha)
        try:
            delta = delta_from_product(mu, alpha, fit)
            theta = theta_from_sigma(sigma_from_delta(delta, alpha), N)
        except SpectralError as exc:
            c2["reason"] = f"theta could not be formed: {exc}"
        else:
            c2 = check_condition2(mu, a, theta=theta)
            tol = b_tolerance(delta, theta, _error_estimate(mu, alpha, delta, theta))
            c3 = check_condition3(delta, theta, omega, tol)
            c4 = check_condition4(data.sigma, c3["b_values"], tol)
            d0 = float(delta(0.0))
            diag["delta_at_0"] = d0
            diag["delta_at_0_negative"] = d0 < 0.0
    verdict = bool(c1["pass"] and c2["pass"] and c3["pass"] and c4["pass"])
    return AdmissibilityReport(c1, c2, c3, c4, verdict, diag)
