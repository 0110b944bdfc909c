"""
How the reconstruction improves with K
======================================

The characteristic function is rebuilt from finitely many eigenvalues, so
every recovered quantity carries a truncation error. Doubling K shrinks it.
"""

import numpy as np

from nonsep_sl import BoundaryParams, Potential, forward, invert

q = Potential.zero()
bp = BoundaryParams(1.0, 0.0, 0.0, 0.5)
lam = np.linspace(0.0, 8.0, 401)

print("   K   sup|delta_K - delta| on [0, 8]   |beta_K - beta|   max|q_K|")
for K in (16, 32, 64, 128):
    fr = forward(q, bp, K=K)
    inv = invert(fr.data, force=True)  # the central pair is not real here
    d_err = np.max(np.abs(inv.delta(lam) - fr.delta_at(lam)))
    print(f"{K:4d}   {d_err:30.2e}   {abs(inv.boundary.beta):15.2e}   {np.max(np.abs(inv.potential.values)):.2e}")
