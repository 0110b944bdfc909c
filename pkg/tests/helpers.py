"""Fixture corpus, an independent ODE oracle and the single-condition mutations."""
from __future__ import annotations

import functools
from dataclasses import replace

import numpy as np
from scipy.integrate import solve_ivp

from nonsep_sl.admissibility import check_all
from nonsep_sl.domain import BoundaryParams, Potential, SignSequence, SpectralData, TwoSidedSpectrum
from nonsep_sl.forward import forward

# name -> (q(x), (alpha, beta, gamma, omega))
CORPUS = {
    "A": (lambda x: 0.0 * x, (1.0, 0.0, 0.0, 0.5)),
    "sin": (np.sin, (1.0, 0.5, 0.3, 0.7)),
    "c05": (lambda x: 0.5 + 0.0 * x, (1.0, 0.2, 0.1, 0.6)),
    "s02": (lambda x: 0.2 * np.sin(x), (1.0, 0.5, 0.3, 0.7)),
    # admissible corpus: beta negative enough that the central pair is real
    "Aadm": (lambda x: 0.0 * x, (1.0, -2.0, 0.0, 0.5)),
    "sinadm": (np.sin, (1.0, -3.0, 0.3, 0.7)),
    "cadm": (lambda x: 0.5 + 0.0 * x, (1.0, -2.0, 0.1, 0.6)),
    "s02adm": (lambda x: 0.2 * np.sin(x), (1.0, -2.0, 0.3, 0.7)),
    "sinneg": (np.sin, (-1.0, -3.0, 0.3, 0.7)),
    "sinhalf": (np.sin, (0.5, -2.5, 0.3, -0.4)),
}
ADMISSIBLE = ("Aadm", "sinadm", "cadm", "s02adm", "sinneg", "sinhalf")


def problem(name: str, n_nodes: int = 201):
    f, bp = CORPUS[name]
    return Potential.from_function(f, n_nodes), BoundaryParams(*bp)


@functools.lru_cache(maxsize=None)
def fixture(name: str, K: int = 64):
    """(q, bp, ForwardResult), computed once per session."""
    q, bp = problem(name)
    return q, bp, forward(q, bp, K)


def oracle_fundamental(q: Potential, lam: float) -> np.ndarray:
    """(c, c', s, s') at pi from DOP853 on every cell of the piecewise-linear q."""
    x, v = q.x, q.values
    lam2 = lam * lam
    y = np.array([1.0, 0.0, 0.0, 1.0])
    for i in range(x.size - 1):
        a, b, qa, qb = x[i], x[i + 1], v[i], v[i + 1]

        def rhs(t, u):
            qq = qa + (qb - qa) * (t - a) / (b - a)
            return [u[1], (qq - lam2) * u[0], u[3], (qq - lam2) * u[2]]

        y = solve_ivp(rhs, (a, b), y, method="DOP853", rtol=1e-13, atol=1e-15).y[:, -1]
    return y


# --------------------------------------------------------------------------- #
# Mutations, each meant to break exactly one admissibility condition
# --------------------------------------------------------------------------- #


def _tail_pattern(mu: TwoSidedSpectrum, period: int, amp: float):
    """Periodic perturbation on k > K/2, orthogonal to 1/mu^j (j = 1..4) on that window.

    The projection keeps it out of the asymptotic fit, so only the remainder
    tau_k grows towards the end.
    """
    K = mu.K
    k = np.arange(1, K + 1, dtype=float)
    tail = k > K // 2
    out = []
    for side in (mu.mu_pos, mu.mu_neg):
        e = np.where(tail, amp * np.cos(2.0 * np.pi * k / period), 0.0)
        M = np.column_stack([tail / side**j for j in range(1, 5)])
        out.append(e - M @ np.linalg.lstsq(M, e, rcond=None)[0])
    return out


def mutate_condition1(data: SpectralData, amp: float = 0.01) -> SpectralData:
    """Non-decaying remainder. Where sigma_n = 0, a second pattern keeps that b_n at 0."""
    mu = data.mu
    p3, p4 = _tail_pattern(mu, 3, amp), _tail_pattern(mu, 4, amp)

    def apply(c3, c4):
        return replace(mu, mu_pos=mu.mu_pos + c3 * p3[0] + c4 * p4[0],
                       mu_neg=mu.mu_neg + c3 * p3[1] + c4 * p4[1])

    zero = np.nonzero(data.sigma.signs == 0)[0]
    if not zero.size:
        return SpectralData(apply(1.0, 0.0), data.sigma)

    def b(m):
        return check_all(SpectralData(m, data.sigma)).cond3["b_values"][zero[0]]

    b0 = b(mu)
    g3, g4 = b(apply(1.0, 0.0)) - b0, b(apply(0.0, 1.0)) - b0
    return SpectralData(apply(1.0, -g3 / g4), data.sigma)


def mutate_condition2(data: SpectralData) -> SpectralData:
    """Swap mu_1 and mu_2."""
    pos = data.mu.mu_pos.copy()
    pos[[0, 1]] = pos[[1, 0]]
    return SpectralData(replace(data.mu, mu_pos=pos), data.sigma)


CENTRAL_SCALES = (0.5, 0.3, 0.1, 0.05, 1.2, 1.35)
CENTRAL_SHIFTS = (-0.2, -0.3)


def _central_variants(mu: TwoSidedSpectrum):
    lo, hi = float(mu.mu_neg0), float(mu.mu_pos0)
    for f in CENTRAL_SCALES:
        yield replace(mu, mu_neg0=f * lo, mu_pos0=f * hi)
    for s in CENTRAL_SHIFTS:
        yield replace(mu, mu_neg0=lo + s, mu_pos0=hi + s)


def mutate_condition3(data: SpectralData) -> SpectralData:
    """Move the central pair (mu_-0, mu_+0) until some b_n turns negative.

    The first variant of a fixed ladder that fails condition 3 alone is used.
    """
    for mu in _central_variants(data.mu):
        cand = SpectralData(mu, data.sigma)
        if check_all(cand).failed == [3]:
            return cand
    raise RuntimeError("no central-pair variant breaks condition 3 alone")


def mutate_condition4(data: SpectralData) -> SpectralData:
    """Last sign set to -1, so no all +1 suffix exists."""
    s = data.sigma.signs.copy()
    s[-1] = -1
    return SpectralData(data.mu, SignSequence(s))


MUTATIONS = {1: mutate_condition1, 2: mutate_condition2, 3: mutate_condition3, 4: mutate_condition4}
