"""
Which sequences are spectral data?
==================================

Forward-generated data pass all four sufficient conditions. Small edits to
the same data break one condition at a time, and the report points at the
offending index.
"""

from dataclasses import replace

import numpy as np

from nonsep_sl import BoundaryParams, Potential, SignSequence, SpectralData, check_all, forward

q = Potential.from_function(lambda x: 0.5 + 0.0 * x, 201)
fr = forward(q, BoundaryParams(1.0, -2.0, 0.1, 0.6), K=64)
data = fr.data

rep = check_all(data)
print("original data: verdict", rep.verdict, " delta(0) =", round(rep.diagnostics["delta_at_0"], 6))

###############################################################################
# Swapping mu_1 and mu_2 breaks the interlacing with theta_n.

pos = data.mu.mu_pos.copy()
pos[[0, 1]] = pos[[1, 0]]
rep = check_all(SpectralData(replace(data.mu, mu_pos=pos), data.sigma))
print("mu_1 <-> mu_2: failed", rep.failed, "at", rep.cond2["first_violation"])

###############################################################################
# Pulling the central pair towards 0 makes a margin b_n negative.

mu = replace(data.mu, mu_neg0=0.1 * data.mu.mu_neg0, mu_pos0=0.1 * data.mu.mu_pos0)
rep = check_all(SpectralData(mu, data.sigma))
print("central pair x 0.1: failed", rep.failed, " first negative b_n at n =", rep.cond3["first_negative"])

###############################################################################
# A trailing -1 sign leaves no all +1 suffix.

s = data.sigma.signs.copy()
s[-1] = -1
rep = check_all(SpectralData(data.mu, SignSequence(s)))
print("last sign -1: failed", rep.failed, "-", rep.cond4["reason"])

###############################################################################
# beta >= 0 pushes the central pair off the real line, which the conditions
# exclude even though the data come from a genuine problem.

fr = forward(Potential.zero(), BoundaryParams(1.0, 0.0, 0.0, 0.5), K=32)
rep = check_all(fr.data)
print("q = 0, beta = 0: central pair", np.round(fr.data.mu.central, 4), "failed", rep.failed)
