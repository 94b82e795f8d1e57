# %% [markdown]
# # Critical integral and the barrier construction
#
# For 1 < p < n the critical exponent is sigma = n(p-1)/(n-p).  Whether
# int_0^eps f(t) t^{-1-sigma} dt is finite decides if a decaying positive
# solution exists.  This script classifies a few nonlinearities and then
# builds the barrier supersolution for f(t) = t^4 in three dimensions.

# %%
import math

import numpy as np

from quasilab import PowerLaw, PowerLog, ProblemParams, classify_criterion, delta_search
from quasilab.radial import delta_trajectory

P = ProblemParams(3, 2)
print("sigma =", P.sigma, " kappa =", P.kappa)

# %%
for f in (PowerLaw(2), PowerLaw(3), PowerLaw(4), PowerLog(3, 1), PowerLog(3, 2)):
    rep = classify_criterion(f, P)
    print(f"{f.describe():<22} {rep.verdict:<12} value={rep.value}")

# %% [markdown]
# t^3 |ln t|^{-2} sits exactly at the critical power yet converges, while
# t^3 |ln t|^{-1} diverges; the logarithm alone decides.

# %%
cert = delta_search(PowerLaw(4), P, eps=1.0)
print("verdict:", cert.verdict, " delta:", cert.delta)
print("sup u = %.6f  (must not exceed eps 2^-kappa = %.3f)" % (cert.sup_u, 2 ** -P.kappa))
print("forcing margin min(F - f(u)) = %.3e" % cert.forcing_margin)

# %% [markdown]
# Shrinking delta makes the solution small at the rate delta^{p/(p-1)}.

# %%
rows = delta_trajectory(PowerLaw(4), P, [2.0 ** -k for k in range(6)], eps=1.0)
for r in rows:
    print("delta=%-9g sup_u=%.6e  sup_u/delta^2=%.6f" % (r["delta"], r["sup_u"],
                                                        r["sup_u"] / r["delta"] ** 2))

# %%
u = cert.u
r = u.grid.nodes
mask = (r >= 1) & (r <= 100)
weighted = u.values[mask] * r[mask] ** P.kappa
print("r^kappa u(r) on [1, 100]: min %.4f max %.4f" % (np.min(weighted), np.max(weighted)))
print("tail limit M^(1/(p-1))/kappa = %.4f" % cert.tail_limit)
assert math.isfinite(cert.tail_limit)
