"""Forward oracle: spectral data of problem P from (q, alpha, beta, gamma, omega).

The characteristic function is

    delta(lam) = 2 omega - eta(pi, lam) + omega^2 s(pi, lam) + (alpha lam + beta) sigma(pi, lam)

with eta = c' + gamma c and sigma = s' + gamma s. Its zeros mu_k are found by a
sign-change scan of the real axis whose count is checked against the
asymptotic count 2K + 2 on [-K + a - 1/2, K + a + 1/2]. If exactly two zeros
are missing they form a complex-conjugate pair, which is located in the
complex plane and stored as the central pair (mu_{-0}, mu_{+0}).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .domain import (AuxSpectra, BoundaryParams, CharFn, CharKind, Potential, SignSequence,
                     SpectralData, TwoSidedSpectrum, validate_boundary, validate_spectral_data)
from .errors import RootCountMismatch
from .ode import DEFAULT_TOL, integrate_fundamental
from .roots import adaptive_scan, find_conjugate_pair

log = logging.getLogger(__name__)

TOL_SIGN = 1e-8
TOL_ROOT = 1e-12
NEAR_DOUBLE = 1e-6


def _fundamental(q: Potential, lam, lam_max: float, tol: float = DEFAULT_TOL):
    return integrate_fundamental(q, lam, tol=tol, lam_max=lam_max)


def delta_eval(q: Potential, bp: BoundaryParams, lam, lam_max: float = 70.0, tol: float = DEFAULT_TOL):
    """delta(lam) for scalar or array lam (complex allowed)."""
    fv = _fundamental(q, lam, lam_max, tol)
    al, be, ga, om = bp.as_tuple()
    lam = np.asarray(lam)
    return 2.0 * om - (fv.cp + ga * fv.c) + om * om * fv.s + (al * lam + be) * (fv.sp + ga * fv.s)


def label_two_sided(f, K: int, a: float, xtol: float = TOL_ROOT, central_box=None):
    """Find and index the zeros mu_{-K} .. mu_K of a real entire function f.

    ``f`` must accept real and complex arrays. Returns (TwoSidedSpectrum,
    diagnostics dict).
    """
    lo, hi = -K + a - 0.5, K + a + 0.5
    expected = 2 * K + 2
    roots = adaptive_scan(f, lo, hi, expected, step=0.05, fine_region=(-1.5, 1.5), fine_step=0.01,
                          xtol=xtol, allow_deficit=2)
    diag: dict = {"window": (lo, hi), "real_roots": int(roots.size), "complex_pair": None}
    if roots.size == expected:
        mu = TwoSidedSpectrum.from_flat(roots)
    else:
        box = central_box or ((-1.5 + a, 1.5 + a), (0.02, 3.0))
        z = find_conjugate_pair(f, re_range=box[0], im_range=box[1])
        below = int(np.sum(roots < z.real))
        if below != K:
            raise RootCountMismatch(
                f"non-real zero pair at {z:.6g} does not occupy the central slots (+-0); "
                f"{below} real zeros lie below it, expected {K}")
        diag["complex_pair"] = (z.real, z.imag)
        mu = TwoSidedSpectrum.from_flat(roots, central=(z.conjugate(), z))
    close = np.nonzero(np.diff(roots) < NEAR_DOUBLE)[0]
    diag["near_double"] = [(float(roots[i]), float(roots[i + 1])) for i in close]
    if close.size:
        log.warning("near-double zeros: %s", diag["near_double"])
    return mu, diag


def eigenvalues_P(q: Potential, bp: BoundaryParams, K: int, tol_root: float = TOL_ROOT):
    """Eigenvalues mu_{-K} .. mu_K of problem P (real line plus a central complex pair)."""
    if K < 8:
        raise ValueError("K must be at least 8")
    validate_boundary(bp)
    lam_max = K + 3.0
    a = -np.arctan(bp.alpha) / np.pi
    mu, _ = label_two_sided(lambda x: delta_eval(q, bp, x, lam_max), K, a, xtol=tol_root)
    return mu


def _positive_zeros(f, N: int, stop: float, xtol: float, what: str) -> np.ndarray:
    roots = adaptive_scan(f, 0.0, stop, N, step=0.05, fine_region=(0.0, 1.5), fine_step=0.01, xtol=xtol)
    if roots.size != N:  # pragma: no cover - adaptive_scan raises first
        raise RootCountMismatch(f"{what}: expected {N} zeros")
    return roots


def theta_zeros(q: Potential, gamma: float, N: int, tol_root: float = TOL_ROOT) -> np.ndarray:
    """Positive zeros theta_1 < ... < theta_N of sigma(pi, lam) = s' + gamma s."""
    if N < 4:
        raise ValueError("N must be at least 4")
    f = lambda x: _fundamental(q, x, N + 3.0).sigma(gamma)
    return _positive_zeros(f, N, float(N), tol_root, "theta")


def dirichlet_spectrum(q: Potential, N: int, tol_root: float = TOL_ROOT) -> np.ndarray:
    """Positive zeros lambda_1 < ... < lambda_N of s(pi, lam)."""
    if N < 4:
        raise ValueError("N must be at least 4")
    f = lambda x: _fundamental(q, x, N + 3.0).s
    return _positive_zeros(f, N, N + 0.5, tol_root, "dirichlet")


def dn_spectrum(q: Potential, N: int, tol_root: float = TOL_ROOT) -> np.ndarray:
    """Positive zeros nu_1 < ... < nu_N of s'(pi, lam)."""
    if N < 4:
        raise ValueError("N must be at least 4")
    f = lambda x: _fundamental(q, x, N + 3.0).sp
    return _positive_zeros(f, N, float(N), tol_root, "dirichlet-neumann")


def sign_sequence(q: Potential, bp: BoundaryParams, theta, tol_sign: float = TOL_SIGN) -> SignSequence:
    """sigma_n = sign(1 - |omega s(pi, theta_n)|), zero within ``tol_sign``."""
    theta = np.asarray(theta, dtype=float)
    s = _fundamental(q, theta, float(np.max(theta, initial=0.0)) + 3.0).s
    m = 1.0 - np.abs(bp.omega * s)
    return SignSequence(np.where(np.abs(m) <= tol_sign, 0, np.sign(m)).astype(np.int64))


@dataclass(frozen=True)
class ForwardResult:
    data: SpectralData
    aux: AuxSpectra
    delta_at: CharFn
    diagnostics: dict = field(default_factory=dict)


def forward(q: Potential, bp: BoundaryParams, K: int = 64, N: int | None = None,
            tol_root: float = TOL_ROOT, tol_sign: float = TOL_SIGN) -> ForwardResult:
    """Spectral data {mu_k}, {sigma_n} plus theta, lambda, nu of the problem (q, bp)."""
    N = K if N is None else N
    validate_boundary(bp)
    lam_max = max(K, N) + 3.0
    a = -np.arctan(bp.alpha) / np.pi
    dfun = lambda x: delta_eval(q, bp, x, lam_max)
    mu, diag = label_two_sided(dfun, K, a, xtol=tol_root)
    theta = theta_zeros(q, bp.gamma, N, tol_root)
    sig = sign_sequence(q, bp, theta, tol_sign)
    lam_d = dirichlet_spectrum(q, N, tol_root)
    nu = dn_spectrum(q, N, tol_root)
    data = validate_spectral_data(SpectralData(mu, sig))
    delta_fn = CharFn(CharKind.ClosedForm, dfun, zeros=mu.noncentral(),
                      params={"alpha": bp.alpha, "beta": bp.beta, "gamma": bp.gamma, "omega": bp.omega},
                      reference="ODE integration of the potential")
    resid = np.abs(dfun(mu.noncentral())) / (1.0 + np.abs(mu.noncentral()))
    diag["max_delta_residual"] = float(np.max(resid))
    diag["potential_Q"] = q.Q
    return ForwardResult(data, AuxSpectra(theta, lam_d, nu), delta_fn, diag)


def delta_table(f, lam) -> np.ndarray:
    """(lam, delta(lam)) rows for CSV export."""
    lam = np.asarray(lam, dtype=float)
    return np.column_stack([lam, f(lam)])
