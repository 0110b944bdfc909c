"""Fundamental system c(x, lam), s(x, lam) of -y'' + q y = lam^2 y at x = pi.

Each grid cell is split into ``substeps`` equal pieces. On a piece the
(piecewise-linear) potential is sampled at the two Gauss points and the
transfer matrix is the exact exponential of the fourth-order Magnus
generator

    Omega = [[-c, h], [h (qbar - lam^2), c]],   c = sqrt(3) h^2 (q2 - q1) / 12.

Omega is traceless with Omega^2 = d I, d = c^2 + h^2 (qbar - lam^2), so
exp(Omega) = cosh(sqrt d) I + sinh(sqrt d)/sqrt(d) Omega. With q constant on
a piece this is the exact constant-coefficient propagator, so the method is
uniformly accurate in lam and exact for q = 0. All evaluations are
vectorised over an array of lam (real or complex).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .domain import Potential
from .errors import StepUnderflow

_SQRT3 = np.sqrt(3.0)
_SERIES_W = 1e-4
DEFAULT_TOL = 1e-10
DEFAULT_LAM_MAX = 70.0


@dataclass(frozen=True)
class FundamentalValues:
    """c, c', s, s' at x = pi (arrays when lam is an array)."""

    c: np.ndarray
    cp: np.ndarray
    s: np.ndarray
    sp: np.ndarray
    lam: np.ndarray

    @property
    def wronskian(self):
        return self.c * self.sp - self.cp * self.s

    def eta(self, gamma: float):
        return self.cp + gamma * self.c

    def sigma(self, gamma: float):
        return self.sp + gamma * self.s


def eta_sigma(fv: FundamentalValues, gamma: float):
    """(eta, sigma) = (c' + gamma c, s' + gamma s) at x = pi."""
    return fv.eta(gamma), fv.sigma(gamma)


def choose_substeps(q: Potential, tol: float = DEFAULT_TOL, lam_max: float = DEFAULT_LAM_MAX) -> int:
    """Pieces per cell so that the Magnus remainder stays below tol*(1+|lam|).

    Empirically the global error of one piece per cell behaves like
    0.01 h^4 max|q'|^2 (1 + lam^2); constant q is propagated exactly.
    The count depends on the potential and ``lam_max`` only, never on the
    evaluation batch, so repeated evaluations are bit-identical.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    slope = float(np.max(np.abs(np.diff(q.values)))) / q.h
    if slope == 0.0:
        return 1
    lam_max = abs(float(lam_max))
    need = 0.01 * slope**2 * (1.0 + lam_max**2) / (tol * (1.0 + lam_max))
    m = int(np.ceil(q.h * need**0.25))
    if m > 4096:
        raise StepUnderflow(f"potential needs {m} substeps per cell; samples look pathological")
    return max(1, m)


@lru_cache(maxsize=32)
def _piece_data(values: bytes, n_nodes: int, substeps: int):
    q = np.frombuffer(values, dtype=float)
    h_cell = np.pi / (n_nodes - 1)
    h = h_cell / substeps
    # local Gauss abscissae (fractions of a piece)
    g1, g2 = 0.5 - _SQRT3 / 6.0, 0.5 + _SQRT3 / 6.0
    frac = (np.arange(substeps)[:, None] + np.array([g1, g2])[None, :]) / substeps  # (m, 2)
    left, right = q[:-1], q[1:]
    qg = left[:, None, None] + (right - left)[:, None, None] * frac[None, :, :]  # (cells, m, 2)
    qg = qg.reshape(-1, 2)
    qbar = 0.5 * (qg[:, 0] + qg[:, 1])
    cc = _SQRT3 * h * h * (qg[:, 1] - qg[:, 0]) / 12.0
    return h, qbar, cc


def _c_s(d):
    """cosh(sqrt d) and sinh(sqrt d)/sqrt d for real or complex d."""
    if np.iscomplexobj(d):
        r = np.sqrt(d)
        small = np.abs(r) < _SERIES_W
        rs = np.where(small, 1.0, r)
        C = np.cosh(r)
        S = np.where(small, 1.0 + d / 6.0 + d * d / 120.0, np.sinh(rs) / rs)
        return C, S
    w = np.sqrt(np.abs(d))
    small = w < _SERIES_W
    ws = np.where(small, 1.0, w)
    neg = d < 0
    C = np.where(neg, np.cos(w), np.cosh(w))
    S = np.where(small, 1.0 + d / 6.0 + d * d / 120.0, np.where(neg, np.sin(ws), np.sinh(ws)) / ws)
    return C, S


def integrate_fundamental(q: Potential, lam, tol: float = DEFAULT_TOL, substeps: int | None = None,
                          lam_max: float = DEFAULT_LAM_MAX):
    """c(pi), c'(pi), s(pi), s'(pi) for every entry of ``lam``.

    ``lam`` may be a scalar or an array, real or complex; the result mirrors
    its shape. Only lam^2 enters, so the output is exactly even in lam.
    """
    lam_arr = np.asarray(lam)
    if not np.all(np.isfinite(lam_arr)):
        raise ValueError("lambda must be finite")
    m = choose_substeps(q, tol, lam_max) if substeps is None else int(substeps)
    h, qbar, cc = _piece_data(q.values.tobytes(), q.n_nodes, m)
    lam2 = np.atleast_1d(lam_arr).ravel() ** 2
    dtype = complex if np.iscomplexobj(lam2) else float
    p00 = np.ones(lam2.shape, dtype)
    p01 = np.zeros(lam2.shape, dtype)
    p10 = np.zeros(lam2.shape, dtype)
    p11 = np.ones(lam2.shape, dtype)
    hh = h * h
    for qb, c in zip(qbar.tolist(), cc.tolist()):
        vbar = qb - lam2
        C, S = _c_s(c * c + hh * vbar)
        e00 = C - S * c
        e01 = S * h
        e10 = S * (h * vbar)
        e11 = C + S * c
        p00, p01, p10, p11 = (e00 * p00 + e01 * p10, e00 * p01 + e01 * p11,
                              e10 * p00 + e11 * p10, e10 * p01 + e11 * p11)
    shape = lam_arr.shape
    return FundamentalValues(p00.reshape(shape), p10.reshape(shape), p01.reshape(shape),
                             p11.reshape(shape), lam_arr)


def lambda_derivative(f, lam: float, scale: float = 1.0) -> float:
    """Central difference in lam, Richardson-extrapolated once."""
    h = scale * max(1.0, abs(lam)) * np.finfo(float).eps ** (1.0 / 3.0)
    d1 = (f(lam + h) - f(lam - h)) / (2.0 * h)
    d2 = (f(lam + 2 * h) - f(lam - 2 * h)) / (4.0 * h)
    return float((4.0 * d1 - d2) / 3.0)


def lambda_derivative_vec(f, lam, scale: float = 1.0) -> np.ndarray:
    """Vectorised :func:`lambda_derivative` for an f that accepts arrays."""
    lam = np.asarray(lam, dtype=float)
    h = scale * np.maximum(1.0, np.abs(lam)) * np.finfo(float).eps ** (1.0 / 3.0)
    pts = np.concatenate([lam + h, lam - h, lam + 2 * h, lam - 2 * h])
    v = np.asarray(f(pts), dtype=float).reshape(4, -1)
    d1 = (v[0] - v[1]) / (2.0 * h)
    d2 = (v[2] - v[3]) / (4.0 * h)
    return (4.0 * d1 - d2) / 3.0
