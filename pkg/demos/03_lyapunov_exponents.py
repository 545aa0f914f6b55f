# coding: utf-8

# # Largest Lyapunov exponents
#
# A tangent vector is carried along each orbit and renormalised once per
# unit time. Its mean log growth rate is the running estimate. Regular
# orbits drift toward zero like log(t)/t; chaotic orbits settle at a
# positive value.

# %%

from twocenter import ModelParams, mle, sample_ics
from twocenter.chaos import mle_batch

# %%
# With a = 0 the potential is isotropic harmonic, so nothing can be chaotic.

p0 = ModelParams(0.0)
ic0 = sample_ics(p0, 4.0, 1, seed=1)[0]
print("a = 0:", mle(p0, ic0, 3000.0).final)

# %%
# At a = 3/2 and E = 4 E_s regular and chaotic orbits coexist.

p = ModelParams(1.5)
ics = sample_ics(p, 4 * p.E_s, 16, seed=3)
series = mle_batch(p, ics, 3000.0, seed=3, threads=4)
for i, s in enumerate(series):
    tag = "chaotic" if s.final > 0.02 else "regular"
    print(f"ic {i:2d} (y={s.ic.y:+.3f}, py={s.ic.py:+.3f}): {s.final:.4f}  {tag}")

# %%
# A chaotic estimate barely moves when the horizon is doubled.

i = max(range(len(series)), key=lambda k: series[k].final)
longer = mle(p, ics[i], 6000.0, seed=3, stream_index=i)
print(f"ic {i}: t=3000 -> {series[i].final:.4f}, t=6000 -> {longer.final:.4f}")
