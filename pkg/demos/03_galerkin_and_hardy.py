# %% [markdown]
# # Galerkin solutions, Hardy ratios and weak Harnack
#
# Radial P1 elements on [0, R] with the exact value imposed at R.  For the
# model operator the discrete solution converges to the exact profile at
# second order.

# %%
from quasilab import Forcing, ProblemParams, RadialGrid, parse_operator
from quasilab.galerkin import (RadialFemSpace, assemble, convergence_study, hardy_check,
                               parse_profile, solve_system, weak_harnack_check)
from quasilab.radial import solve_radial

for params in (ProblemParams(3, 2), ProblemParams(4, 3)):
    study = convergence_study(params, Forcing.indicator(1.0), 50.0, [125, 250, 500, 1000, 2000])
    print(f"n={params.n} p={params.p:g}")
    for row in study["rows"]:
        print("  cells=%-5d max error=%.3e  reduction=%s" % (
            row["cells"], row["max_error"], "%.2f" % row["reduction"] if "reduction" in row else "-"))

# %% [markdown]
# A spatially varying coefficient, A(x, s, xi) = a(|x|) |xi| xi with a
# oscillating between 1/2 and 3/2, goes through the same Newton solver.

# %%
params = ProblemParams(4, 3, 0.5, 1.5)
space = RadialFemSpace(RadialGrid.uniform(20.0, 400))
sol = solve_system(assemble(space, parse_operator("scaled:sin2:0.5", 3), Forcing.indicator(1.0),
                            params))
print("scaled operator: u(0) = %.6f, residual %.1e, %d iterations"
      % (sol.coefficients[0], sol.residual_norm, sol.iterations))

# %%
P = ProblemParams(3, 2)
for name in ("exp", "inv:2", "gauss", "bump:2"):
    u, du, pts = parse_profile(name)
    rep = hardy_check(u, P, du, pts)
    print("%-7s Hardy ratio %.6f  (sharp constant %g)" % (name, rep.ratio, rep.sharp_constant))

# %%
u = solve_radial(Forcing.indicator(1.0), P, RadialGrid.default())
for row in weak_harnack_check(u, P, 1.0, [1, 2, 4, 8, 16]):
    print("r=%-3g mean over B_2r=%.5f  u(r)=%.5f  ratio=%.4f"
          % (row["r"], row["mean"], row["essinf"], row["ratio"]))
