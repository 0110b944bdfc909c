"""Bracketing, sign-change scanning and root refinement.

Every routine works on many brackets at once: the function is called with a
whole array of abscissae per iteration. The brackets never interact, so each
root depends only on its own bracket.
"""
from __future__ import annotations

import numpy as np

from .errors import RootCountMismatch


def sign_changes(f, grid: np.ndarray):
    """Brackets (lo, hi, f_lo, f_hi) of every sign change of f on ``grid``.

    Exact zeros on the grid are returned as degenerate brackets lo == hi.
    """
    grid = np.asarray(grid, dtype=float)
    v = np.asarray(f(grid), dtype=float)
    zero = v == 0.0
    s = np.sign(v)
    idx = np.nonzero((s[:-1] * s[1:] < 0))[0]
    lo, hi = grid[idx], grid[idx + 1]
    flo, fhi = v[idx], v[idx + 1]
    z = grid[zero]
    lo = np.concatenate([lo, z])
    hi = np.concatenate([hi, z])
    flo = np.concatenate([flo, np.zeros(z.size)])
    fhi = np.concatenate([fhi, np.zeros(z.size)])
    order = np.argsort(lo, kind="stable")
    return lo[order], hi[order], flo[order], fhi[order]


def refine_brackets(f, lo, hi, flo=None, fhi=None, xtol: float = 1e-12, max_iter: int = 100):
    """Illinois (safeguarded regula falsi) on every bracket simultaneously.

    Each bracket must hold a sign change (or be degenerate, lo == hi). A
    bracket is finished when the secant step or the bracket width falls below
    ``xtol * (1 + |x|)``, or f vanishes exactly.
    """
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    if a.size == 0:
        return a
    fa = np.asarray(f(a), dtype=float) if flo is None else np.array(flo, dtype=float)
    fb = np.asarray(f(b), dtype=float) if fhi is None else np.array(fhi, dtype=float)
    if np.any((np.sign(fa) * np.sign(fb) > 0) & (a != b)):
        raise ValueError("every bracket must contain a sign change")
    x = np.where(fa == 0.0, a, b)
    done = (fa == 0.0) | (fb == 0.0) | (a == b)
    kept = np.zeros(a.size, dtype=bool)
    for _ in range(max_iter):
        act = np.nonzero(~done)[0]
        if act.size == 0:
            break
        aa, bb, ffa, ffb = a[act], b[act], fa[act], fb[act]
        xs = bb - ffb * (bb - aa) / (ffb - ffa)
        # rounding can push the secant point out of the bracket
        outside = ~((xs - aa) * (xs - bb) <= 0.0)
        xs = np.where(outside, 0.5 * (aa + bb), xs)
        fx = np.asarray(f(xs), dtype=float)
        same = np.sign(fx) == np.sign(ffb)
        # Illinois: halve the retained endpoint's value when it is kept twice running
        a[act] = np.where(same, aa, bb)
        fa[act] = np.where(same, np.where(kept[act], 0.5 * ffa, ffa), ffb)
        kept[act] = same
        b[act], fb[act] = xs, fx
        x[act] = xs
        tol = xtol * (1.0 + np.abs(xs))
        conv = (fx == 0.0) | (np.abs(xs - bb) <= tol) | (np.abs(xs - a[act]) <= tol)
        done[act[conv]] = True
    return x


def scan_roots(f, grid, xtol: float = 1e-12) -> np.ndarray:
    """All sign-change roots of f on ``grid``, refined."""
    lo, hi, flo, fhi = sign_changes(f, grid)
    return refine_brackets(f, lo, hi, flo, fhi, xtol=xtol)


def adaptive_scan(f, start: float, stop: float, expected: int, step: float = 0.05,
                  fine_region: tuple[float, float] | None = None, fine_step: float = 0.01,
                  xtol: float = 1e-12, max_halvings: int = 4, allow_deficit: int = 0):
    """Scan [start, stop] and refine; halve the step until ``expected`` roots appear.

    ``allow_deficit`` permits that many fewer real roots (non-real zeros);
    the final count must be within ``expected - allow_deficit .. expected``
    with the same parity as ``expected``.
    """
    counts: list[int] = []
    roots = np.empty(0)
    for _ in range(max_halvings + 1):
        grid = _grid(start, stop, step, fine_region, fine_step)
        roots = scan_roots(f, grid, xtol=xtol)
        if roots.size == expected:
            return roots
        deficit = expected - roots.size
        # a stable even deficit means genuinely non-real zeros, not a missed pair
        if counts and counts[-1] == roots.size and 0 < deficit <= allow_deficit and deficit % 2 == 0:
            return roots
        counts.append(int(roots.size))
        step *= 0.5
        fine_step *= 0.5
    raise RootCountMismatch(
        f"found {roots.size} sign changes on [{start:.4g}, {stop:.4g}], asymptotics predict {expected}")


def _grid(start, stop, step, fine_region, fine_step):
    n = max(2, int(np.ceil((stop - start) / step)) + 1)
    g = np.linspace(start, stop, n)
    if fine_region is not None:
        lo, hi = max(start, fine_region[0]), min(stop, fine_region[1])
        if hi > lo:
            m = max(2, int(np.ceil((hi - lo) / fine_step)) + 1)
            g = np.union1d(g, np.linspace(lo, hi, m))
    return g


def complex_secant(f, z0: complex, z1: complex, tol: float = 1e-13, max_iter: int = 100):
    """Secant iteration for an analytic f in the complex plane; None on failure."""
    f0, f1 = complex(f(z0)), complex(f(z1))
    for _ in range(max_iter):
        if f1 == f0:
            break
        z2 = z1 - f1 * (z1 - z0) / (f1 - f0)
        if not np.isfinite(z2):
            return None
        z0, f0 = z1, f1
        z1, f1 = z2, complex(f(z2))
        if abs(z1 - z0) <= tol * (1.0 + abs(z1)):
            return z1
    return z1 if f1 == 0 else None


def find_conjugate_pair(f, re_range=(-1.5, 1.5), im_range=(0.05, 2.5), tol: float = 1e-13):
    """Locate one zero of f with positive imaginary part inside a box.

    f must accept complex arrays. A coarse grid search of |f| supplies
    starting points for the complex secant iteration.
    """
    re = np.linspace(*re_range, 31)
    im = np.linspace(*im_range, 26)
    Z = re[None, :] + 1j * im[:, None]
    vals = np.abs(np.asarray(f(Z.ravel()))).reshape(Z.shape)
    order = np.argsort(vals.ravel())
    fs = lambda z: complex(np.asarray(f(np.array([z])))[0])
    best = None
    for i in order[:12]:
        z0 = Z.ravel()[i]
        z = complex_secant(fs, z0, z0 + 1e-3 * (1 + 1j), tol=tol)
        if z is None or z.imag <= 1e-9:
            continue
        if not (re_range[0] - 1 <= z.real <= re_range[1] + 1 and z.imag <= im_range[1] + 1):
            continue
        r = abs(fs(z))
        if best is None or r < best[1]:
            best = (z, r)
        if r < 1e-10 * (1 + abs(z)):
            break
    if best is None:
        raise RootCountMismatch("two zeros are missing from the real axis but no complex pair was found")
    return best[0]
