# %% [markdown]
# # Wolff potential of a radial density
#
# The Wolff potential W(x) = int_0^inf (mu(B_r(x)) / r^{n-p})^{1/(p-1)} dr/r
# controls solutions pointwise.  At the centre it reproduces the radial
# solution exactly; away from it the integral splits at r = |x|/2 into a
# near part and a far part with their own bounds.

# %%
import math

from quasilab import Forcing, ProblemParams
from quasilab.potential import RadialMeasure, ball_measure, center_identity_check, split_bounds, wolff_potential

P = ProblemParams(3, 2)
ind = RadialMeasure(Forcing.indicator(1.0), P)
print("W(0) = %.15f, 2 pi = %.15f" % (wolff_potential(ind, 0.0), 2 * math.pi))

# %% [markdown]
# Ball measures come from a shell/cap reduction; the lens of two unit
# balls at unit distance has volume 5 pi / 12.

# %%
print("mu(B_1(x)), |x| = 1: %.15f  vs %.15f" % (ball_measure(ind, 1.0, 1.0), 5 * math.pi / 12))

# %%
decay = RadialMeasure(Forcing.power_decay(4), P)
print(" d     W          near/near_bound  far/far_bound")
for d in (1, 2, 4, 8, 16, 32):
    s = split_bounds(decay, float(d))
    print("%-5g %.6e  %.4f           %.4f" % (d, s.total, s.near_ratio, s.far_ratio))

# %%
for F, params in [(Forcing.indicator(1.0), P), (Forcing.power_decay(4), P),
                  (Forcing.indicator(1.0), ProblemParams(4, 3))]:
    out = center_identity_check(F, params)
    print(F.label, params.n, params.p, "ratio - 1 = %.1e" % (out["ratio"] - 1))
