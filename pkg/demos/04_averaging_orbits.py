# coding: utf-8

# # Periodic orbits predicted by averaging
#
# Close to the off-axis minimum the motion is two coupled oscillations with
# frequencies sqrt(2)/a and sqrt(2) g/a, where g = sqrt(a^2 - 1). When the
# ratio is rational, simple zeros of the first averaged function predict
# periodic orbits of energy eps^2 h. The parameters a = sqrt(N^2 + 1) are
# excluded because the averaged function vanishes identically there;
# a = sqrt(5) has its own closed form.

# %%

import math
import warnings

from twocenter import AveragingQuery, ModelParams, ResonantParameter, a_for_ratio, frequency_ratio
from twocenter.averaging import candidate_zero, initial_conditions, solve_zeros_sqrt5, symmetry_family

# %%

for l, j in [(3, 2), (1, 2), (2, 5)]:
    p = a_for_ratio(l, j)
    q = AveragingQuery(p, h=1.0, epsilon=1e-2)
    zs = solve_zeros_sqrt5(1.0)[:2] if (l, j) == (1, 2) else [candidate_zero(p, 1.0, n) for n in (0, 1)]
    print(f"\nratio {l}:{j}  ->  a = {p.a:.9f}, frequency check {frequency_ratio(p)[2]}")
    for z in zs:
        ic = initial_conditions(q, z)
        print(f"  n={z.n:+d}  rho={z.rho_tilde:.6f}  s={z.s_tilde:+.5f}  det={z.detA:.3e}")
        print(f"        ic = ({ic.x:.7f}, {ic.y:.7f}, {ic.px:.1f}, {ic.py:+.7f})")
    print("  symmetric copies:", [m.symmetry for m in symmetry_family(ic)])

# %%
# The excluded parameters are refused.

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    p = a_for_ratio(1, 1)
try:
    AveragingQuery(p)
except ResonantParameter as exc:
    print(f"\na = {p.a:.6f}: {exc}")
