"""The classical action functionals and where each one falls short for the
damped oscillator: indefiniteness is fine (stationarity, not minimality),
but dissipation and initial conditions are the real obstacles.

Run:  python3 demos/03_competing_actions.py
"""

import math

import numpy as np

from convact import (
    ActionKind,
    Grid,
    SdofModel,
    action_variation,
    analytic_sdof,
    bateman_residuals,
    el_residuals,
    hamilton_second_variation,
    rayleigh_variation,
    sample,
)
from convact.grid import Signal

model = SdofModel(m=1.0, c=0.2, k=1.0)
grid = Grid(10.0, 512)
traj = analytic_sdof(model, u0=1.0, v0=0.0, grid=grid)

print("== classical action: stationary, not minimal ==")
soft = sample(lambda t: math.sin(math.pi * t / 10.0), grid)
stiff = sample(lambda t: math.sin(4 * math.pi * t / 10.0), grid)
print("second variation along a slow direction:", f"{hamilton_second_variation(1, 1, soft):+.3f}")
print("second variation along a fast direction:", f"{hamilton_second_variation(1, 1, stiff):+.3f}")
print("without the spring every direction is positive (least action):",
      f"{hamilton_second_variation(1, 0, soft):+.3f}")

print("\n== dissipation-function route ==")
direction = sample(lambda t: math.sin(math.pi * t / 10.0), grid)
print("first variation with the damping term at the exact solution:",
      f"{rayleigh_variation(model, traj.u_signal(), direction):+.2e}",
      "(the equation of motion is recovered, but no action exists)")

print("\n== doubled-variable route ==")
taus = grid.nodes()
wd = math.sqrt(1 - 0.01)
mirror = np.exp(+0.1 * taus) * (np.cos(wd * taus) - (0.1 / wd) * np.sin(wd * taus))
rep = bateman_residuals(model, traj.u_signal(), Signal(grid, mirror))
print("physical residual sup:", f"{rep.sup('physical'):.2e}",
      " mirror (negative damping) residual sup:", f"{rep.sup('mirror'):.2e}")
print("the price: a fictitious anti-damped twin equation rides along.")

print("\n== convolution route with embedded initial data ==")
rep = el_residuals(ActionKind.GURTIN, model, traj, ics=(1.0, 0.0))
print("integro-differential residual sup on the exact path:",
      f"{rep.sup('integro_motion'):.2e}", "(falls at second order)")

print("\n== convolution route with the half-weighted damping term ==")
rep = el_residuals(ActionKind.TONTI, model, traj, ics=(1.0, 0.0))
print("field residual sup:", f"{rep.sup('motion'):.2e}")
print("but stationarity also enforces m v0 + c u0 / 2 =",
      f"{rep.ic_residuals['initial']:.3f}", "-- a non-physical initial condition")
ramp = sample(lambda t: t / 10.0, grid)
print("first variation along a direction with free end value:",
      f"{action_variation(ActionKind.TONTI, model, traj.u_signal(), ramp):+.4f}",
      "(the defect, visible as a surviving boundary term)")
