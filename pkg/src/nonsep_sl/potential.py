"""Reconstruction of q from the Dirichlet and Dirichlet-Neumann spectra.

The transformation operator is taken relative to a constant potential c (the
mean of q, read off the Dirichlet eigenvalues), so with rho_n^2 = lambda_n^2 - c

    F(x, t) = sum_n [ sin(rho_n x) sin(rho_n t) / (rho_n^2 alpha_n) - (2/pi) sin(n x) sin(n t) ]

and the Gelfand-Levitan equation K(x, t) + F(x, t) + int_0^x K(x, s) F(s, t) ds = 0
gives q(x) = c + 2 d/dx K(x, x). With c = 0 this is the textbook kernel; the
shift only makes the series terms decay faster. Norming constants come from the
identity alpha_n = (ds/dlam / (2 lambda_n)) s'(pi, lambda_n).

Truncating the series at M terms leaves a boundary layer of width ~1/M in q,
because the coefficients decay only like kappa/n^2. kappa is fitted on the
upper half of the available terms and the tail is added in closed form.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .domain import Potential
from .errors import InterlacingViolation, NonpositiveNorming, NoProgress, SingularSystem
from .forward import TOL_ROOT
from .ode import integrate_fundamental, lambda_derivative_vec

log = logging.getLogger(__name__)

COND_MAX = 1e12
COND_STRIDE = 8
# refinement stops once a step gains less than 1 %
STAGNATION = 0.99


@dataclass(frozen=True)
class NormingConstants:
    alpha_n: np.ndarray

    def __post_init__(self):
        a = np.array(self.alpha_n, dtype=float)
        a.setflags(write=False)
        object.__setattr__(self, "alpha_n", a)


@dataclass(frozen=True)
class GLSolution:
    x: np.ndarray
    kernel_diag: np.ndarray
    q_rec: Potential
    shift: float = 0.0
    max_condition: float = float("nan")
    tail_ratio: float = float("nan")
    tail_kappa: float = 0.0
    n_terms: int = 0


def norming_constants(lambda_d, s_pi, s_prime_pi) -> NormingConstants:
    """alpha_n = (d s(pi, lam)/d lam / (2 lambda_n)) s'(pi, lambda_n), which must be positive."""
    lam = np.asarray(lambda_d, dtype=float)
    ds = lambda_derivative_vec(s_pi, lam)
    a = ds / (2.0 * lam) * np.asarray(s_prime_pi(lam), dtype=float)
    bad = np.nonzero(~(a > 0.0))[0]
    if bad.size:
        n = int(bad[0]) + 1
        raise NonpositiveNorming(f"alpha_{n} = {a[bad[0]]:.6g} is not positive")
    return NormingConstants(a)


def check_interlacing(lambda_d, nu) -> None:
    """nu_n^2 < lambda_n^2 < nu_{n+1}^2 for all available n."""
    lam2 = np.asarray(lambda_d, dtype=float) ** 2
    nu2 = np.asarray(nu, dtype=float) ** 2
    m = min(lam2.size, nu2.size)
    if m and np.any(nu2[:m] >= lam2[:m]):
        n = int(np.nonzero(nu2[:m] >= lam2[:m])[0][0]) + 1
        raise InterlacingViolation(f"nu_{n}^2 = {nu2[n - 1]:.6g} >= lambda_{n}^2 = {lam2[n - 1]:.6g}")
    if m > 1 and np.any(lam2[:m - 1] >= nu2[1:m]):
        n = int(np.nonzero(lam2[:m - 1] >= nu2[1:m])[0][0]) + 1
        raise InterlacingViolation(f"lambda_{n}^2 = {lam2[n - 1]:.6g} >= nu_{n + 1}^2 = {nu2[n]:.6g}")


def estimate_shift(lambda_d, n_max: int | None = None) -> float:
    """Mean of q from lambda_n^2 - n^2 -> c, fitted as c + c2/n^2 over n in [m/4, m]."""
    lam = np.asarray(lambda_d, dtype=float)
    m = lam.size if n_max is None else min(lam.size, n_max)
    n = np.arange(1, m + 1, dtype=float)
    keep = n >= max(2.0, m / 4.0)
    if keep.sum() < 3:
        return 0.0
    M = np.column_stack([np.ones(m), 1.0 / n**2])[keep]
    coef, *_ = np.linalg.lstsq(M, lam[:m][keep] ** 2 - n[keep] ** 2, rcond=None)
    return float(coef[0])


def _sin_ratio(r2, x):
    """sin(rho x)/rho with rho^2 = r2 (real; negative r2 gives sinh)."""
    r2 = np.asarray(r2, dtype=float)
    rho = np.sqrt(np.abs(r2))
    arg = np.multiply.outer(x, rho)
    safe = np.where(rho == 0.0, 1.0, rho)
    out = np.where(r2 >= 0.0, np.sin(arg), np.sinh(arg)) / safe
    return np.where(rho == 0.0, np.multiply.outer(x, np.ones_like(rho)), out)


def fit_tail_kappa(lambda_d, nc: NormingConstants, shift: float = 0.0, lower: float = 0.5) -> float:
    """kappa in (pi/2) / (rho_n^2 alpha_n) - 1 ~ kappa / n^2, averaged over n >= lower * M."""
    lam = np.asarray(lambda_d, dtype=float)
    n = np.arange(1, lam.size + 1, dtype=float)
    kap = 0.5 * np.pi / ((lam**2 - shift) * nc.alpha_n) - 1.0
    sel = n >= lower * lam.size
    return float(np.mean(kap[sel] * n[sel] ** 2))


def _green(x, t):
    """sum_{n >= 1} sin(n x) sin(n t) / n^2 = (pi min(x, t) - x t) / 2 on [0, pi]^2."""
    return 0.5 * (np.pi * np.minimum.outer(x, t) - np.outer(x, t))


def gl_kernel(lambda_d, nc: NormingConstants, x, t, shift: float = 0.0, tail_kappa: float = 0.0):
    """F(x, t) on the outer grid x by t, from the available n plus a modelled tail.

    Beyond the last index the coefficients are taken as (2/pi) kappa / n^2 with
    rho_n = n, whose sum has the closed form :func:`_green` minus the finite part.
    """
    lam = np.asarray(lambda_d, dtype=float)
    n = np.arange(1, lam.size + 1, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    r2 = lam**2 - shift
    sx, st = _sin_ratio(r2, x), _sin_ratio(r2, t)
    fx, ft = np.sin(np.outer(x, n)), np.sin(np.outer(t, n))
    F = (sx / nc.alpha_n) @ st.T - (2.0 / np.pi) * fx @ ft.T
    if tail_kappa:
        F = F + (2.0 / np.pi) * tail_kappa * (_green(x, t) - (fx / n**2) @ ft.T)
    return F


def gl_tail_report(lambda_d, nc: NormingConstants, shift: float = 0.0) -> float:
    """Size of the last series coefficient relative to the largest (decay diagnostic)."""
    lam = np.asarray(lambda_d, dtype=float)
    coef = np.abs(1.0 / ((lam**2 - shift) * nc.alpha_n) - 2.0 / np.pi)
    return float(coef[-1] / max(coef.max(), 1e-300))


def solve_gl(F, grid_n: int = 201, shift: float = 0.0) -> GLSolution:
    """Nystrom (trapezoid) solution of the Gelfand-Levitan equation for every grid x.

    ``F`` maps two arrays (x, t) to the matrix F(x_i, t_j).
    """
    if grid_n < 32:
        raise ValueError("grid_n must be at least 32")
    x = np.linspace(0.0, np.pi, grid_n)
    h = x[1] - x[0]
    Fm = np.asarray(F(x, x), dtype=float)
    diag = np.zeros(grid_n)
    cmax = 1.0
    for i in range(1, grid_n):
        m = i + 1
        w = np.full(m, h)
        w[0] = w[-1] = 0.5 * h
        sub = Fm[:m, :m]
        A = np.eye(m) + sub * w[None, :]
        # the SVD costs far more than the solve, so conditioning is sampled
        if i % COND_STRIDE == 0 or i == grid_n - 1:
            c = np.linalg.cond(A)
            cmax = max(cmax, c)
            if not np.isfinite(c) or c >= COND_MAX:
                raise SingularSystem(f"Gelfand-Levitan system at x = {x[i]:.6g} has condition {c:.3g}")
        try:
            k = np.linalg.solve(A, -Fm[i, :m])
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(f"Gelfand-Levitan system at x = {x[i]:.6g} is singular") from exc
        if not np.all(np.isfinite(k)):
            raise SingularSystem(f"Gelfand-Levitan system at x = {x[i]:.6g} gave a non-finite kernel")
        diag[i] = k[-1]
    q = shift + 2.0 * _derivative(diag, h)
    return GLSolution(x, diag, Potential(q), shift, float(cmax))


def _derivative(f, h):
    """Fourth-order centred differences inside, second-order one-sided at the ends."""
    n = f.size
    d = np.empty(n)
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    d[1] = (f[2] - f[0]) / (2.0 * h)
    d[-2] = (f[-1] - f[-3]) / (2.0 * h)
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    d[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return d


def recover_potential(lambda_d, nu, s_pi, s_prime_pi, grid_n: int = 201, n_terms: int | None = None,
                      shift: float | None = None, tail: bool = True) -> tuple[GLSolution, NormingConstants]:
    """Interlacing check, norming constants and the Gelfand-Levitan solve.

    Only the first ``n_terms`` (default half of the available) eigenvalues enter
    the series; the rest of it is modelled from their asymptotic decay.
    """
    lam_all = np.asarray(lambda_d, dtype=float)
    check_interlacing(lam_all, nu)
    m = max(8, lam_all.size // 2) if n_terms is None else int(n_terms)
    lam = lam_all[:m]
    nc = norming_constants(lam, s_pi, s_prime_pi)
    c = estimate_shift(lam) if shift is None else shift
    kappa = fit_tail_kappa(lam, nc, c) if tail else 0.0
    sol = solve_gl(lambda x, t: gl_kernel(lam, nc, x, t, c, kappa), grid_n, c)
    sol = GLSolution(sol.x, sol.kernel_diag, sol.q_rec, c, sol.max_condition,
                     gl_tail_report(lam, nc, c), kappa, m)
    return sol, nc


# --------------------------------------------------------------------------- #
# Gauss-Newton refinement
# --------------------------------------------------------------------------- #


def _hat_basis(grid_n: int, n_basis: int) -> np.ndarray:
    """Piecewise-linear hat functions on n_basis equispaced nodes, sampled on the grid."""
    x = np.linspace(0.0, np.pi, grid_n)
    nodes = np.linspace(0.0, np.pi, n_basis)
    return np.stack([np.interp(x, nodes, np.eye(n_basis)[j]) for j in range(n_basis)])


def spectra_map(q: Potential, m: int, guess_lambda, guess_nu, half_width: float = 0.25):
    """First m Dirichlet and Dirichlet-Neumann zeros of q, tracked from guesses.

    Both sets are refined together: one integration per iteration serves the
    s brackets and the s' brackets.
    """
    lam_max = m + 3.0
    guess = np.concatenate([np.asarray(guess_lambda, dtype=float)[:m], np.asarray(guess_nu, dtype=float)[:m]])
    is_s = np.arange(2 * m) < m

    def f(lam):
        fv = integrate_fundamental(q, lam, lam_max=lam_max)
        return np.where(is_s, fv.s, fv.sp)

    lo = np.maximum(guess - half_width, 1e-8)
    hi = guess + half_width
    flo, fhi = f(lo), f(hi)
    if np.any(np.sign(flo) * np.sign(fhi) > 0):
        from .forward import dirichlet_spectrum, dn_spectrum
        return np.concatenate([dirichlet_spectrum(q, m), dn_spectrum(q, m)])
    return _refine_all(f, lo, hi, flo, fhi)


def _refine_all(f, lo, hi, flo, fhi):
    """Illinois on the full bracket set so that f always sees all 2m abscissae."""
    a, b, fa, fb = lo.copy(), hi.copy(), flo.copy(), fhi.copy()
    kept = np.zeros(a.size, dtype=bool)
    x = b.copy()
    for _ in range(100):
        with np.errstate(divide="ignore", invalid="ignore"):
            xs = b - fb * (b - a) / (fb - fa)
        outside = ~((xs - a) * (xs - b) <= 0.0)
        xs = np.where(outside, 0.5 * (a + b), xs)
        fx = f(xs)
        same = np.sign(fx) == np.sign(fb)
        a, fa = np.where(same, a, b), np.where(same, np.where(kept, 0.5 * fa, fa), fb)
        kept = same
        step = np.abs(xs - b)
        b, fb, x = xs, fx, xs
        if np.all((step <= TOL_ROOT * (1.0 + np.abs(xs))) | (fx == 0.0)):
            break
    return x


@dataclass(frozen=True)
class RefineResult:
    q: Potential
    residuals: tuple[float, ...]
    iterations: int
    no_progress: bool = False
    regularization: tuple[float, ...] = field(default_factory=tuple)


def refine_q(q0: Potential, target_lambda, target_nu, iters: int = 8, m: int = 16,
             n_basis: int = 16, fd_step: float = 1e-4, noise: float = 1e-6) -> RefineResult:
    """Regularised Gauss-Newton on the map q -> (lambda_1..m, nu_1..m).

    Corrections live in a hat-function basis. The Tikhonov weight is the
    largest in a geometric ladder whose linearised residual falls below the
    discrepancy level max(noise, 0.1 |r|); a step is only accepted when the
    true residual decreases, and iteration stops when it decreases by less
    than 1 %.
    """
    if m > 24:
        raise ValueError("m must be at most 24")
    tl = np.asarray(target_lambda, dtype=float)[:m]
    tn = np.asarray(target_nu, dtype=float)[:m]
    m = min(m, tl.size, tn.size)
    target = np.concatenate([tl[:m], tn[:m]])
    basis = _hat_basis(q0.n_nodes, n_basis)
    q = q0
    r = spectra_map(q, m, tl, tn) - target
    hist = [float(np.sqrt(np.mean(r**2)))]
    taus: list[float] = []
    for _ in range(iters):
        if hist[-1] <= noise:
            break
        cur = spectra_map(q, m, tl, tn)
        J = np.empty((target.size, n_basis))
        for j in range(n_basis):
            qp = Potential(q.values + fd_step * basis[j])
            J[:, j] = (spectra_map(qp, m, cur[:m], cur[m:]) - cur) / fd_step
        JtJ, Jtr = J.T @ J, J.T @ r
        scale = float(np.trace(JtJ)) / n_basis
        level = max(noise * math.sqrt(target.size), 0.1 * float(np.linalg.norm(r)))
        step = None
        for tau in scale * np.logspace(0, -12, 25):
            d = np.linalg.solve(JtJ + tau * np.eye(n_basis), -Jtr)
            if np.linalg.norm(r + J @ d) <= level:
                step, used = d, float(tau)
                break
        if step is None:
            step, used = d, float(tau)
        improved = False
        for shrink in (1.0, 0.5, 0.25):
            qn = Potential(q.values + shrink * basis.T @ step)
            rn = spectra_map(qn, m, cur[:m], cur[m:]) - target
            res = float(np.sqrt(np.mean(rn**2)))
            if res < hist[-1]:
                q, r = qn, rn
                hist.append(res)
                taus.append(used)
                improved = True
                break
        if not improved or hist[-1] > STAGNATION * hist[-2]:
            break
    no_prog = len(hist) == 1 and hist[0] > noise
    if no_prog:
        log.warning("refinement made no progress (residual %.3g)", hist[0])
    return RefineResult(q, tuple(hist), len(hist) - 1, no_prog, tuple(taus))


def refine_or_raise(q0: Potential, target_lambda, target_nu, **kw) -> Potential:
    res = refine_q(q0, target_lambda, target_nu, **kw)
    if res.no_progress:
        raise NoProgress(f"refinement stalled at residual {res.residuals[0]:.3g}")
    return res.q
