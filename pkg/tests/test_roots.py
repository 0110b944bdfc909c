import numpy as np
import pytest

from nonsep_sl.errors import RootCountMismatch
from nonsep_sl.roots import adaptive_scan, find_conjugate_pair, refine_brackets, scan_roots, sign_changes


def test_sign_changes_and_exact_grid_zero():
    lo, hi, flo, fhi = sign_changes(np.sin, np.linspace(0.5, 7.0, 14))
    assert lo.size == 2
    assert np.all(lo < hi)
    lo, hi, _, _ = sign_changes(lambda x: x - 1.0, np.array([0.0, 1.0, 2.0]))
    assert lo.size == 1 and lo[0] == hi[0] == 1.0


def test_refine_brackets_many_at_once():
    k = np.arange(1, 30)
    x = refine_brackets(lambda t: np.sin(np.pi * t), k - 0.4, k + 0.3, xtol=1e-14)
    np.testing.assert_allclose(x, k, atol=1e-12)


def test_refine_requires_sign_change():
    with pytest.raises(ValueError):
        refine_brackets(lambda t: t * t + 1, [0.0], [1.0])


def test_scan_roots_cubic():
    r = scan_roots(lambda t: (t - 0.3) * (t + 1.2) * (t - 2.5), np.linspace(-3, 3, 61))
    np.testing.assert_allclose(r, [-1.2, 0.3, 2.5], atol=1e-12)


def test_adaptive_scan_halves_step_for_close_roots():
    f = lambda t: (t - 1.0) * (t - 1.004)
    r = adaptive_scan(f, 0.0, 2.0, expected=2, step=0.1, max_halvings=8)
    np.testing.assert_allclose(r, [1.0, 1.004], atol=1e-12)


def test_adaptive_scan_reports_count_mismatch():
    with pytest.raises(RootCountMismatch):
        adaptive_scan(np.sin, 0.5, 7.0, expected=3, max_halvings=1)


def test_adaptive_scan_accepts_stable_even_deficit():
    f = lambda t: (t * t + 0.25) * (t - 2.0) * (t + 2.0)
    r = adaptive_scan(f, -3.0, 3.0, expected=4, allow_deficit=2)
    np.testing.assert_allclose(r, [-2.0, 2.0], atol=1e-12)


def test_find_conjugate_pair():
    f = lambda z: (z - (0.2 + 0.5j)) * (z - (0.2 - 0.5j)) * (z - 3.0)
    z = find_conjugate_pair(f)
    assert abs(z - (0.2 + 0.5j)) < 1e-10
