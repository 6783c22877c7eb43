"""Tour of the time-domain building blocks: uniform grids, the convolution
pairing, and Riemann-Liouville fractional integrals/derivatives.

Run:  python3 demos/01_convolution_and_fractional_operators.py
"""

import math

import numpy as np

from convact import Grid, Side, convolve, frac_deriv, frac_integral, reflect, sample

print("== grids and signals ==")
grid = Grid(t_final=1.0, n_steps=256)
print(f"grid: {grid.n_steps} steps, h = {grid.h}")

ones = sample(lambda t: 1.0, grid)
ramp = sample(lambda t: t, grid)

print("\n== convolution pairing ==")
# [1 * 1](t) = t and [1 * tau](t) = t^2/2; the trapezoid product rule nails both
c1 = convolve(ones, ones)
c2 = convolve(ones, ramp)
print("max |[1*1](t) - t|        =", np.max(np.abs(c1.values - grid.nodes())))
print("max |[1*tau](t) - t^2/2|  =", np.max(np.abs(c2.values - grid.nodes() ** 2 / 2)))

# commutativity is bitwise, not approximate
rng = np.random.default_rng(0)
from convact import Signal

u = Signal(grid, rng.standard_normal(grid.n_nodes))
v = Signal(grid, rng.standard_normal(grid.n_nodes))
print("convolve(u, v) == convolve(v, u) bitwise:",
      bool(np.all(convolve(u, v).values == convolve(v, u).values)))

print("\n== fractional integral ==")
# half-integral of 1 is 2 sqrt(tau/pi)
half_int = frac_integral(Side.LEFT, ones, 0.5)
exact = 2.0 * np.sqrt(grid.nodes() / math.pi)
print("max error of J^(1/2) 1 vs closed form:", np.max(np.abs(half_int.values - exact)))

print("\n== fractional derivative (Grunwald-Letnikov) ==")
# half-derivative of tau is also 2 sqrt(tau/pi)
half_der = frac_deriv(Side.LEFT, ramp, 0.5)
err = np.abs(half_der.values[2:] - exact[2:])
print("max interior error of D^(1/2) tau:", err.max())

# a constant keeps a singular memory tail ~ u0 / sqrt(pi tau)
const = sample(lambda t: 3.0, grid)
tail = frac_deriv(Side.LEFT, const, 0.5)
k = grid.n_steps // 2
print(f"D^(1/2) of the constant 3 at tau=0.5: {tail.values[k]:.5f} "
      f"(expected {3.0 / math.sqrt(math.pi * 0.5):.5f})")

print("\n== reflection identity ==")
# right-sided operators are reflections of left-sided ones
right = frac_integral(Side.RIGHT, u, 0.5)
mirrored = reflect(frac_integral(Side.LEFT, reflect(u), 0.5))
print("max |(right J u) - reflect(left J reflect(u))|:",
      np.max(np.abs(right.values - mirrored.values)))
