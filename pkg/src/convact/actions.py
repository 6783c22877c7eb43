"""Action functionals of the damped oscillator and their stationarity
diagnostics.

Five competing functionals are supported: the classical displacement action,
the two convolution-based displacement actions (with the initial conditions
embedded in the forcing, and with the half-weighted damping convolution whose
stationarity produces a spurious initial condition), and the mixed convolved
action in single- and multi-dof form, whose stationarity recovers the damped
equations of motion together with the physical initial conditions.

`action_value` evaluates the functionals directly from sampled signals;
`action_variation` differentiates the assembled bilinear structure (never by
epsilon-differencing), so the two routes cross-check each other.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from ._stencils import deriv1, deriv2
from .fracops import Side, frac_deriv
from .grid import Grid, Signal, convolve, convolve_at_end, sample
from .models import MdofModel, SdofModel

__all__ = [
    "ActionKind",
    "ResidualReport",
    "action_value",
    "action_variation",
    "el_residuals",
    "hamilton_second_variation",
    "rayleigh_variation",
    "bateman_residuals",
    "gurtin_forcing",
    "make_direction_battery",
]


class ActionKind(enum.Enum):
    HAMILTON = "HAMILTON"
    GURTIN = "GURTIN"
    TONTI = "TONTI"
    MCA_SDOF = "MCA_SDOF"
    MCA_MDOF = "MCA_MDOF"


DISPLACEMENT_KINDS = frozenset(
    {ActionKind.HAMILTON, ActionKind.GURTIN, ActionKind.TONTI}
)

# named residual vocabulary per kind
FIELD_NAMES = {
    ActionKind.HAMILTON: ("motion",),
    ActionKind.GURTIN: ("integro_motion",),
    ActionKind.TONTI: ("motion",),
    ActionKind.MCA_SDOF: ("motion", "compatibility"),
    ActionKind.MCA_MDOF: ("motion", "compatibility"),
}
IC_NAMES = {
    ActionKind.HAMILTON: (),
    ActionKind.GURTIN: (),
    ActionKind.TONTI: ("initial",),
    ActionKind.MCA_SDOF: ("motion_ic", "compatibility_ic"),
    ActionKind.MCA_MDOF: ("motion_ic", "compatibility_ic"),
}


@dataclass(frozen=True)
class ResidualReport:
    """Named per-node residual histories plus scalar initial-condition
    residuals, with sup/L2 norms."""

    kind: str
    grid: Grid
    field_residuals: dict = field(repr=False)
    ic_residuals: dict = field(default_factory=dict)
    excluded_nodes: int = 0

    def _included(self, name: str) -> np.ndarray:
        arr = np.asarray(self.field_residuals[name])
        if self.excluded_nodes:
            arr = arr[self.excluded_nodes : arr.shape[0] - self.excluded_nodes]
        return arr

    def sup(self, name: str) -> float:
        return float(np.max(np.abs(self._included(name))))

    def l2(self, name: str) -> float:
        arr = self._included(name)
        return float(math.sqrt(self.grid.h * np.sum(arr * arr)))

    def to_csv(self) -> str:
        """CSV rows `name,sup_norm,l2_norm,excluded_nodes`; initial-condition
        entries are scalars, reported with both norms equal to |value|."""
        lines = ["name,sup_norm,l2_norm,excluded_nodes"]
        for name in self.field_residuals:
            lines.append(
                f"{name},{self.sup(name):.17g},{self.l2(name):.17g},{self.excluded_nodes}"
            )
        for name, value in self.ic_residuals.items():
            lines.append(f"{name},{abs(value):.17g},{abs(value):.17g},0")
        return "\n".join(lines) + "\n"


def _signal_of(traj, component=None) -> Signal:
    if isinstance(traj, Signal):
        return traj
    return traj.u_signal(component)


def _d1_signal(sig: Signal) -> Signal:
    return Signal(sig.grid, deriv1(sig.values, sig.grid.h))


def _check_kind_inputs(kind: ActionKind, model, traj):
    if kind is ActionKind.MCA_MDOF:
        if not isinstance(model, MdofModel):
            raise ValueError("MCA_MDOF needs an MdofModel")
        if isinstance(traj, Signal) or traj.is_scalar:
            raise ValueError("MCA_MDOF needs a vector-valued trajectory")
    else:
        if not isinstance(model, SdofModel):
            raise ValueError(f"{kind.value} needs an SdofModel")
        if kind is ActionKind.MCA_SDOF:
            if isinstance(traj, Signal) or not traj.is_scalar:
                raise ValueError("MCA_SDOF needs a scalar mixed trajectory")


def gurtin_forcing(model: SdofModel, u0: float, v0: float, grid: Grid) -> Signal:
    """Effective forcing of the convolutional restatement of the initial value
    problem: [tau * f](t) + (m + c tau) u0 + m tau v0."""
    ramp = sample(lambda t: t, grid)
    conv = convolve(ramp, model.forcing_signal(grid))
    taus = grid.nodes()
    vals = conv.values + (model.m + model.c * taus) * u0 + model.m * taus * v0
    return Signal(grid, vals)


def _mca_value_terms(model: MdofModel, u: np.ndarray, J: np.ndarray, grid: Grid, scheme: str) -> float:
    from ._discrete import conv_end_linear, rate_pair_end, rate_value_pair_end

    d, e = model.n_dof, model.n_el
    h = grid.h
    amat = model.A
    total = 0.0
    for a in range(d):
        for b in range(d):
            if model.M[a, b] != 0.0:
                total += 0.5 * model.M[a, b] * rate_pair_end(u[:, a], u[:, b], h)
    for i in range(e):
        for j in range(e):
            if amat[i, j] != 0.0:
                total -= 0.5 * amat[i, j] * rate_pair_end(J[:, i], J[:, j], h)
    if scheme == "direct":
        su = [frac_deriv(Side.LEFT, Signal(grid, u[:, a]), 0.5) for a in range(d)]
        sJ = [frac_deriv(Side.LEFT, Signal(grid, J[:, i]), 0.5) for i in range(e)]
        for i in range(e):
            for a in range(d):
                if model.B[a, i] != 0.0:
                    total += model.B[a, i] * convolve_at_end(sJ[i], su[a])
        for a in range(d):
            for b in range(d):
                if model.C[a, b] != 0.0:
                    total += 0.5 * model.C[a, b] * convolve_at_end(su[a], su[b])
    else:
        for i in range(e):
            for a in range(d):
                if model.B[a, i] != 0.0:
                    total += model.B[a, i] * (
                        rate_value_pair_end(J[:, i], u[:, a], h) + J[0, i] * u[-1, a]
                    )
        for a in range(d):
            for b in range(d):
                if model.C[a, b] != 0.0:
                    total += 0.5 * model.C[a, b] * (
                        rate_value_pair_end(u[:, a], u[:, b], h) + u[0, a] * u[-1, b]
                    )
    f_hist = model.forcing_history(grid.nodes())
    for a in range(d):
        total -= conv_end_linear(u[:, a], f_hist[:, a], h)
        total -= u[-1, a] * model.j_hat_0[a]
    return total


def action_value(kind: ActionKind, model, traj, *, ics=None, scheme: str = "reduced") -> float:
    """Value of the chosen functional at the trajectory, computed directly
    from sampled signals (quadrature route, independent of the assembled
    matrices). GURTIN requires ics = (u0, v0)."""
    _check_kind_inputs(kind, model, traj)
    if kind is ActionKind.HAMILTON:
        u = _signal_of(traj)
        du = deriv1(u.values, u.grid.h)
        f = model.forcing_signal(u.grid).values
        integrand = 0.5 * model.m * du * du - 0.5 * model.k * u.values**2 + f * u.values
        w = np.full(u.grid.n_nodes, u.grid.h)
        w[0] *= 0.5
        w[-1] *= 0.5
        return float(w @ integrand)
    if kind is ActionKind.TONTI:
        u = _signal_of(traj)
        du = _d1_signal(u)
        f = model.forcing_signal(u.grid)
        return (
            0.5 * model.m * convolve_at_end(du, du)
            + 0.5 * model.c * convolve_at_end(du, u)
            + 0.5 * model.k * convolve_at_end(u, u)
            - convolve_at_end(u, f)
        )
    if kind is ActionKind.GURTIN:
        if ics is None:
            raise ValueError("GURTIN needs ics=(u0, v0) to build its forcing")
        u = _signal_of(traj)
        g = u.grid
        uu = convolve(u, u)
        ones = sample(lambda t: 1.0, g)
        kramp = sample(lambda t: model.k * t, g)
        f = gurtin_forcing(model, ics[0], ics[1], g)
        return (
            0.5 * model.m * convolve_at_end(u, u)
            + 0.5 * model.c * convolve_at_end(ones, uu)
            + 0.5 * convolve_at_end(kramp, uu)
            - convolve_at_end(f, u)
        )
    # mixed convolved kinds
    if scheme not in ("reduced", "direct"):
        raise ValueError(f"unknown scheme {scheme!r}")
    if kind is ActionKind.MCA_SDOF:
        from .models import sdof_as_mdof

        mdof = sdof_as_mdof(model)
        u = traj.u.reshape(-1, 1)
        J = traj.J.reshape(-1, 1)
        return _mca_value_terms(mdof, u, J, traj.grid, scheme)
    if kind is ActionKind.MCA_MDOF:
        return _mca_value_terms(model, traj.u, traj.J, traj.grid, scheme)
    raise ValueError(f"unknown action kind {kind!r}")


def _build_system(kind: ActionKind, model, grid: Grid, ics, scheme: str):
    from ._discrete import (
        build_gurtin_system,
        build_hamilton_system,
        build_mca_system,
        build_sdof_mca_system,
        build_tonti_system,
    )

    if kind is ActionKind.HAMILTON:
        return build_hamilton_system(model, grid)
    if kind is ActionKind.TONTI:
        return build_tonti_system(model, grid)
    if kind is ActionKind.GURTIN:
        if ics is None:
            raise ValueError("GURTIN needs ics=(u0, v0)")
        return build_gurtin_system(model, grid, ics[0], ics[1])
    if kind is ActionKind.MCA_SDOF:
        return build_sdof_mca_system(model, grid, scheme)
    if kind is ActionKind.MCA_MDOF:
        return build_mca_system(model, grid, scheme)
    raise ValueError(f"unknown action kind {kind!r}")


def _direction_vector(kind: ActionKind, direction, layout) -> np.ndarray:
    if kind in DISPLACEMENT_KINDS:
        return layout.pack(_signal_of(direction).values.reshape(-1, 1))
    if isinstance(direction, Signal):
        raise ValueError("mixed kinds need a Trajectory direction")
    u = direction.u.reshape(layout.n_nodes, layout.n_dof)
    J = direction.J.reshape(layout.n_nodes, layout.n_el)
    return layout.pack(u, J)


def _check_direction_constraints(kind: ActionKind, direction):
    def _is_zero(x) -> bool:
        return abs(x) <= 1e-12

    if kind is ActionKind.GURTIN:
        return  # variations stay fully free
    if kind in (ActionKind.TONTI, ActionKind.HAMILTON):
        d = _signal_of(direction).values
        if not _is_zero(d[0]):
            raise ValueError(f"{kind.value} direction must vanish at tau = 0")
        if kind is ActionKind.HAMILTON and not _is_zero(d[-1]):
            raise ValueError("HAMILTON direction must vanish at tau = t")
        return
    du = np.atleast_2d(np.asarray(direction.u).T).T
    dJ = np.atleast_2d(np.asarray(direction.J).T).T
    if not (np.all(np.abs(du[0]) <= 1e-12) and np.all(np.abs(dJ[0]) <= 1e-12)):
        raise ValueError("mixed direction must vanish at tau = 0 in both u and J")


def action_variation(
    kind: ActionKind, model, traj, direction, *, ics=None, scheme: str = "reduced"
) -> float:
    """First (Gateaux) variation of the functional at `traj` in `direction`,
    evaluated in closed form from the assembled bilinear structure."""
    _check_kind_inputs(kind, model, traj)
    _check_direction_constraints(kind, direction)
    kmat, r, layout = _build_system(kind, model, traj.grid, ics, scheme)
    if kind in DISPLACEMENT_KINDS:
        x = layout.pack(_signal_of(traj).values.reshape(-1, 1))
    else:
        from ._discrete import pack_trajectory

        x = pack_trajectory(layout, traj)
    g = _direction_vector(kind, direction, layout)
    return float(g @ (kmat @ x + r))


def el_residuals(kind: ActionKind, model, traj, *, ics=None) -> ResidualReport:
    """Euler-Lagrange residual report: the field equations of the kind's
    stationarity conditions evaluated by second-order differencing, plus the
    initial-condition residuals evaluated at tau = 0.

    TONTI, GURTIN and the mixed kinds need ics = (u0, v0) — the velocity
    datum enters the initial-condition residuals exactly, not by differencing.
    """
    _check_kind_inputs(kind, model, traj)
    grid = traj.grid
    h = grid.h
    fields: dict = {}
    ics_out: dict = {}

    if kind is ActionKind.HAMILTON:
        u = _signal_of(traj).values
        f = model.forcing_signal(grid).values
        fields["motion"] = model.m * deriv2(u, h) + model.k * u - f
    elif kind is ActionKind.TONTI:
        if ics is None:
            raise ValueError("TONTI residuals need ics=(u0, v0)")
        u = _signal_of(traj).values
        f = model.forcing_signal(grid).values
        fields["motion"] = model.m * deriv2(u, h) + model.c * deriv1(u, h) + model.k * u - f
        ics_out["initial"] = model.m * ics[1] + 0.5 * model.c * u[0]
    elif kind is ActionKind.GURTIN:
        if ics is None:
            raise ValueError("GURTIN residuals need ics=(u0, v0)")
        u = _signal_of(traj)
        ones = sample(lambda t: 1.0, grid)
        ramp = sample(lambda t: t, grid)
        f = gurtin_forcing(model, ics[0], ics[1], grid)
        fields["integro_motion"] = (
            model.m * u.values
            + model.c * convolve(ones, u).values
            + model.k * convolve(ramp, u).values
            - f.values
        )
    elif kind is ActionKind.MCA_SDOF:
        if ics is None:
            raise ValueError("MCA_SDOF residuals need ics=(u0, v0)")
        u, J = traj.u, traj.J
        f = model.forcing_signal(grid).values
        fields["motion"] = (
            model.m * deriv2(u, h) + model.c * deriv1(u, h) + deriv1(J, h) - f
        )
        fields["compatibility"] = model.a * deriv2(J, h) - deriv1(u, h)
        ics_out["motion_ic"] = (
            model.m * ics[1] + model.c * u[0] + J[0] - model.j_hat_0
        )
        # rate form: J'(0) is the spring force k u(0)
        ics_out["compatibility_ic"] = model.a * (model.k * u[0]) - u[0]
    elif kind is ActionKind.MCA_MDOF:
        if ics is None:
            raise ValueError("MCA_MDOF residuals need ics=(u0, v0)")
        u, J = traj.u, traj.J
        f = model.forcing_history(grid.nodes())
        ddu = np.column_stack([deriv2(u[:, a], h) for a in range(u.shape[1])])
        du = np.column_stack([deriv1(u[:, a], h) for a in range(u.shape[1])])
        ddJ = np.column_stack([deriv2(J[:, e], h) for e in range(J.shape[1])])
        dJ = np.column_stack([deriv1(J[:, e], h) for e in range(J.shape[1])])
        fields["motion"] = ddu @ model.M.T + du @ model.C.T + dJ @ model.B.T - f
        fields["compatibility"] = -ddJ @ model.A.T + du @ model.B
        v0 = np.asarray(ics[1], dtype=float)
        mot = model.M @ v0 + model.C @ u[0] + model.B @ J[0] - model.j_hat_0
        jdot0 = np.linalg.solve(model.A, model.B.T @ u[0])
        comp = -model.A @ jdot0 + model.B.T @ u[0]
        ics_out["motion_ic"] = float(np.max(np.abs(mot)))
        ics_out["compatibility_ic"] = float(np.max(np.abs(comp)))
    else:
        raise ValueError(f"unknown action kind {kind!r}")
    assert tuple(fields) == FIELD_NAMES[kind] and tuple(ics_out) == IC_NAMES[kind]
    return ResidualReport(kind.value, grid, fields, ics_out)


def hamilton_second_variation(m: float, k: float, direction: Signal) -> float:
    """Second variation int (m (du')^2 - k (du)^2) dtau of the classical
    action; indefinite for k > 0, positive for k = 0 (least action).

    Takes the mass and stiffness directly so the spring-free case k = 0 is
    expressible (the oscillator model type requires k > 0).
    """
    if m <= 0.0 or k < 0.0:
        raise ValueError("need m > 0 and k >= 0")
    d = direction.values
    if abs(d[0]) > 1e-12 or abs(d[-1]) > 1e-12:
        raise ValueError("second-variation direction must vanish at both ends")
    h = direction.grid.h
    dd = deriv1(d, h)
    integrand = m * dd * dd - k * d * d
    w = np.full(direction.grid.n_nodes, h)
    w[0] *= 0.5
    w[-1] *= 0.5
    return float(w @ integrand)


def rayleigh_variation(model: SdofModel, u: Signal, direction: Signal) -> float:
    """First variation with the dissipation-function term:
    int (m u' du' - k u du + f du - c u' du) dtau."""
    d = direction.values
    if abs(d[0]) > 1e-12 or abs(d[-1]) > 1e-12:
        raise ValueError("Rayleigh direction must vanish at both ends")
    if u.grid != direction.grid:
        raise ValueError("u and direction must share a grid")
    h = u.grid.h
    du = deriv1(u.values, h)
    dd = deriv1(d, h)
    f = model.forcing_signal(u.grid).values
    integrand = model.m * du * dd - model.k * u.values * d + f * d - model.c * du * d
    w = np.full(u.grid.n_nodes, h)
    w[0] *= 0.5
    w[-1] *= 0.5
    return float(w @ integrand)


def bateman_residuals(model: SdofModel, u: Signal, v: Signal) -> ResidualReport:
    """Residuals of the doubled-variable formulation: the physical damped
    equation for u and the mirror negative-damping equation for v."""
    if u.grid != v.grid:
        raise ValueError("u and v must share a grid")
    h = u.grid.h
    f = model.forcing_signal(u.grid).values
    fields = {
        "physical": model.m * deriv2(u.values, h)
        + model.c * deriv1(u.values, h)
        + model.k * u.values
        - f,
        "mirror": model.m * deriv2(v.values, h)
        - model.c * deriv1(v.values, h)
        + model.k * v.values
        - f,
    }
    return ResidualReport("BATEMAN", u.grid, fields)


def make_direction_battery(
    grid: Grid, count: int = 16, seed: int = 7, vanish_end: bool = False
) -> list[Signal]:
    """Fixed-seed random piecewise-cubic directions vanishing at tau = 0 (and
    at tau = t when requested)."""
    rng = np.random.default_rng(seed)
    knots = np.linspace(0.0, grid.t_final, 6)
    out = []
    for _ in range(count):
        vals = rng.uniform(-1.0, 1.0, knots.size)
        vals[0] = 0.0
        if vanish_end:
            vals[-1] = 0.0
        spline = CubicSpline(knots, vals)
        out.append(Signal(grid, spline(grid.nodes())))
    return out
