# coding: utf-8

# # The potential landscape and its equilibria
#
# A particle in the plane is tied to two fixed centers at (-1, 0) and (+1, 0)
# by springs of rest length `a`. For `a > 1` the springs can both relax at
# two points off the axis, which become the minima of the potential.

# %%

import math

import numpy as np

from twocenter import ModelParams, equilibria, potential
from twocenter.model import potential_grid

# %%
# Below `a = 1` the origin is the only equilibrium and it is a minimum.

p = ModelParams(0.5)
for e in equilibria(p):
    print(e.kind.value, tuple(e.state), "U =", potential(p, e.state.x, e.state.y))

# %%
# Above `a = 1` there are five. The minima sit at (0, +-sqrt(a^2 - 1)),
# the origin turns into a saddle-center and two more saddle-centers
# appear on the axis at (+-a, 0).

for a in (1.5, 2.0, math.sqrt(5), 5.0):
    p = ModelParams(a)
    print(f"\na = {a:.6g}, E_s = U(0,0) = {p.E_s:.4g}")
    for e in equilibria(p):
        freqs = sorted({round(abs(l.imag), 12) for l in e.eigenvalues if abs(l.imag) > 0})
        print(f"  ({e.state.x:+.4f}, {e.state.y:+.4f})  {e.kind.value:14s} frequencies {freqs}")
    print(f"  linear frequencies at the minima: {p.omega_x:.6f}, {p.omega_y:.6f}")

# %%
# A coarse text contour of U for a = 2 shows the two wells separated by the
# barrier at the origin.

p = ModelParams(2.0)
xs = np.linspace(-3, 3, 49)
ys = np.linspace(-3, 3, 25)
U = potential_grid(p, xs, ys)
levels = " .:-=+*#%@"
for row in U[::-1]:
    print("".join(levels[min(int(u / 1.0 * 3), len(levels) - 1)] for u in row))
