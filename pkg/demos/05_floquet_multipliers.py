# coding: utf-8

# # Refining the orbits and reading their multipliers
#
# The averaged initial conditions are seeds. Newton shooting on the period
# map (energy held fixed, px anchored) closes them to round-off, and the
# monodromy matrix over one period gives the Floquet multipliers. Two of
# them are always 1. A second pair away from 1 on any periodic orbit rules
# out a second analytic first integral.

# %%

import math

import numpy as np

from twocenter import AveragingQuery, ModelParams, OrbitCandidate, integrability_probe, monodromy, refine_orbit
from twocenter.averaging import candidate_zero, frequency_ratio, initial_conditions, period, solve_zeros_sqrt5
from twocenter.floquet import oscillation_counts


def refine(p, res, h, eps):
    q = AveragingQuery(p, h, eps)
    ic = initial_conditions(q, res)
    l = frequency_ratio(p)[2][0]
    ref = refine_orbit(p, OrbitCandidate(ic, l * period(p)))
    return ic, ref


# %%

for a in (math.sqrt(13) / 3, math.sqrt(5), math.sqrt(29) / 2):
    p = ModelParams(a)
    res = solve_zeros_sqrt5(1.0)[0] if abs(a * a - 5) < 1e-12 else candidate_zero(p, 1.0, 0)
    ic, ref = refine(p, res, 1.0, 1e-2)
    rep = monodromy(p, ref.ic, ref.period)
    shift = np.max(np.abs(ref.ic.as_array() - ic.as_array()))
    print(f"\na = {a:.6f}: T = {ref.period:.6f}, closure {ref.closure:.1e}, "
          f"shift from seed {shift:.1e}, oscillations {oscillation_counts(p, ref.ic, ref.period)}")
    print("  multipliers:", ", ".join(f"{m.real:+.8f}{m.imag:+.8f}i" for m in rep.multipliers))
    print(f"  nontrivial |mu - 1| = {rep.max_deviation:.2e}  ->  {rep.verdict.value}")

# %%
# For a = sqrt(13)/3 the nontrivial pair sits very close to 1 at eps = 0.01
# and moves away quickly as the amplitude grows, clearing 1e-3 near eps = 0.03.

p = ModelParams(math.sqrt(13) / 3)
for eps in (0.01, 0.02, 0.03, 0.04):
    _, ref = refine(p, candidate_zero(p, 1.0, 0), 1.0, eps)
    rep = monodromy(p, ref.ic, ref.period)
    print(f"eps = {eps:.2f}: max |mu - 1| = {rep.max_deviation:.2e}")
print(integrability_probe(p, [rep]).verdict)
