"""Discrete quadratic forms of the action functionals.

Every supported action is quadratic in the nodal values of its state
histories, so each kind maps to a matrix pair (K, r) with

    I(x) = 1/2 x^T K x + r^T x,        K = K^T exactly,

over the full node-value vector x (no constraints applied here). The first
variation in a direction g is then g^T (K x + r), and the stationarity module
eliminates the fixed node-0 values to obtain the solvable system.

Discretization of the mixed action: the reduced scheme (default) evaluates
every convolution EXACTLY on the piecewise-linear interpolants of the nodal
histories — derivatives become cell increments, and on a uniform grid the
reflection maps cells onto cells, so each pairing is a short increment sum.
Stationarity of an exactly-evaluated functional over the trial space is a
genuine Ritz method, and its one-cell-wide stencils control the grid-period
oscillation mode that wide centered stencils leave unconstrained. The direct
scheme replaces the rewritten semi-derivative pairings with Grunwald-Letnikov
half-derivative signals paired by the trapezoid anti-diagonal rule; it is the
cross-check path. The displacement-only functionals keep nodal quadrature
(trapezoid pairings, second-order difference stencils).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._stencils import deriv1_matrix
from .fracops import gl_derivative_matrix
from .grid import Grid
from .models import MdofModel, SdofModel, Trajectory, sdof_as_mdof

SCHEMES = ("reduced", "direct")


def trapezoid_matrix(grid: Grid) -> np.ndarray:
    """Diagonal trapezoid quadrature: x^T T y = int x y dtau."""
    w = np.full(grid.n_nodes, grid.h)
    w[0] *= 0.5
    w[-1] *= 0.5
    return np.diag(w)


def conv_end_matrix(grid: Grid) -> np.ndarray:
    """Anti-diagonal pairing: x^T W y = [x * y](t_final) by trapezoid."""
    n = grid.n_steps
    w = np.full(n + 1, grid.h)
    w[0] *= 0.5
    w[-1] *= 0.5
    mat = np.zeros((n + 1, n + 1))
    mat[np.arange(n + 1), n - np.arange(n + 1)] = w
    return mat


def prefix_conv_matrices(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Quadratic forms of the nested convolutions [1 * [u*u]](t) and
    [tau * [u*u]](t): sums of prefix pairings weighted by the outer trapezoid
    rule and kernel samples."""
    n = grid.n_steps
    h = grid.h
    t = grid.t_final
    outer = np.full(n + 1, h)
    outer[0] *= 0.5
    outer[-1] *= 0.5
    w_const = np.zeros((n + 1, n + 1))
    w_ramp = np.zeros((n + 1, n + 1))
    taus = grid.nodes()
    for j in range(1, n + 1):  # prefix pairing over nodes 0..j; j = 0 is empty
        idx = np.arange(j + 1)
        wj = np.full(j + 1, h)
        wj[0] *= 0.5
        wj[-1] *= 0.5
        block = np.zeros((n + 1, n + 1))
        block[idx, j - idx] = wj
        w_const += outer[j] * block
        w_ramp += outer[j] * (t - taus[j]) * block
    return w_const, w_ramp


@dataclass(frozen=True)
class DofLayout:
    """Node-major-inside, component-major-outside packing of state histories.

    x = [u_comp0 nodes..., u_comp1 nodes..., ..., J_el0 nodes..., ...]
    For displacement-only actions n_el = 0 and x holds only u.
    """

    n_nodes: int
    n_dof: int
    n_el: int

    @property
    def size(self) -> int:
        return self.n_nodes * (self.n_dof + self.n_el)

    def u_slice(self, comp: int) -> slice:
        return slice(comp * self.n_nodes, (comp + 1) * self.n_nodes)

    def J_slice(self, elem: int) -> slice:
        off = self.n_dof * self.n_nodes
        return slice(off + elem * self.n_nodes, off + (elem + 1) * self.n_nodes)

    def pack(self, u: np.ndarray, J: np.ndarray | None = None) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float).T).T  # (n_nodes, n_dof)
        parts = [u[:, a] for a in range(self.n_dof)]
        if self.n_el:
            J = np.atleast_2d(np.asarray(J, dtype=float).T).T
            parts += [J[:, e] for e in range(self.n_el)]
        return np.concatenate(parts)

    def unpack(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
        u = np.column_stack([x[self.u_slice(a)] for a in range(self.n_dof)])
        J = (
            np.column_stack([x[self.J_slice(e)] for e in range(self.n_el)])
            if self.n_el
            else None
        )
        return u, J

    def node0_indices(self) -> np.ndarray:
        """Indices of every node-0 dof (the constrained ones)."""
        first = [self.u_slice(a).start for a in range(self.n_dof)]
        first += [self.J_slice(e).start for e in range(self.n_el)]
        return np.asarray(first, dtype=int)


def _symmetrize(q: np.ndarray) -> np.ndarray:
    return q + q.T


def increment_matrix(grid: Grid) -> np.ndarray:
    """Cell increments: (L x)_m = x_{m+1} - x_m for cells m = 0..n-1."""
    n = grid.n_steps
    mat = np.zeros((n, n + 1))
    mat[np.arange(n), np.arange(n)] = -1.0
    mat[np.arange(n), np.arange(n) + 1] = 1.0
    return mat


def rate_pair_matrix(grid: Grid) -> np.ndarray:
    """Exact [x' * y'](t) for piecewise-linear x, y as a nodal quadratic form:
    (1/h) sum_cells dx_m dy_{n-1-m}."""
    n = grid.n_steps
    lmat = increment_matrix(grid)
    pi = np.zeros((n, n))
    pi[np.arange(n), n - 1 - np.arange(n)] = 1.0 / grid.h
    return lmat.T @ pi @ lmat


def rate_value_pair_matrix(grid: Grid) -> np.ndarray:
    """Exact [x' * y](t) for piecewise-linear x, y as a nodal quadratic form:
    sum_cells dx_m * (y at the midpoint of the reflected cell)."""
    n = grid.n_steps
    lmat = increment_matrix(grid)
    emat = np.zeros((n, n + 1))
    emat[np.arange(n), n - 1 - np.arange(n)] = 0.5
    emat[np.arange(n), n - np.arange(n)] = 0.5
    return lmat.T @ emat


def reflected_load_weights(f_vals: np.ndarray, h: float) -> np.ndarray:
    """Gradient of the exact piecewise-linear [u * f](t) with respect to the
    nodal values of u."""
    n = f_vals.size - 1
    rf = f_vals[::-1]
    w = np.zeros(n + 1)
    w[0] = h / 6.0 * (2.0 * rf[0] + rf[1])
    w[n] = h / 6.0 * (rf[n - 1] + 2.0 * rf[n])
    if n >= 2:
        w[1:n] = h / 6.0 * (rf[:-2][: n - 1] + 4.0 * rf[1:n] + rf[2:][: n - 1])
    return w


def conv_end_linear(x: np.ndarray, y: np.ndarray, h: float) -> float:
    """Exact [x * y](t_final) for the piecewise-linear interpolants."""
    ry = y[::-1]
    a, c = x[:-1], x[1:]
    b, dd = ry[:-1], ry[1:]
    return float(h / 6.0 * np.sum(2.0 * a * b + a * dd + c * b + 2.0 * c * dd))


def rate_pair_end(x: np.ndarray, y: np.ndarray, h: float) -> float:
    """Exact [x' * y'](t_final) for the piecewise-linear interpolants."""
    dx = np.diff(x)
    dy = np.diff(y)
    return float(np.dot(dx, dy[::-1]) / h)


def rate_value_pair_end(x: np.ndarray, y: np.ndarray, h: float) -> float:
    """Exact [x' * y](t_final) for the piecewise-linear interpolants."""
    dx = np.diff(x)
    mid = 0.5 * (y[:-1] + y[1:])
    return float(np.dot(dx, mid[::-1]))


def build_mca_system(
    model: MdofModel, grid: Grid, scheme: str = "reduced"
) -> tuple[np.ndarray, np.ndarray, DofLayout]:
    """K, r of the mixed convolved action over all nodal values of (u, J).

    Terms of the functional, with * the end-time convolution pairing:
        1/2 u'^T * M u'  -  1/2 J'^T * A J'  +  (semi J)^T * B^T (semi u)
        + 1/2 (semi u)^T * C (semi u)  -  u^T * f  -  u(t)^T jhat0
    The reduced scheme rewrites the semi-derivative pairings as
    x' * y + x(0) y(t) and evaluates every convolution exactly on the
    piecewise-linear interpolants; the direct scheme keeps the rewrite off and
    pairs GL half-derivative histories by trapezoid quadrature.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    n1 = grid.n_nodes
    d, e = model.n_dof, model.n_el
    layout = DofLayout(n1, d, e)
    rate_rate = rate_pair_matrix(grid)
    rate_value = rate_value_pair_matrix(grid)
    if scheme == "direct":
        wmat = conv_end_matrix(grid)
        gmat = gl_derivative_matrix(grid.n_steps, grid.h, 0.5)
        gtwg = gmat.T @ wmat @ gmat

    q = np.zeros((layout.size, layout.size))
    r = np.zeros(layout.size)

    amat = model.A
    last = n1 - 1
    for a in range(d):
        sa = layout.u_slice(a)
        for b in range(d):
            sb = layout.u_slice(b)
            if model.M[a, b] != 0.0:
                q[sa, sb] += 0.5 * model.M[a, b] * rate_rate
            if model.C[a, b] != 0.0:
                if scheme == "reduced":
                    q[sa, sb] += 0.5 * model.C[a, b] * rate_value
                    q[sa.start, sb.start + last] += 0.5 * model.C[a, b]
                else:
                    q[sa, sb] += 0.5 * model.C[a, b] * gtwg
    for i in range(e):
        si = layout.J_slice(i)
        for j in range(e):
            if amat[i, j] != 0.0:
                q[si, layout.J_slice(j)] += -0.5 * amat[i, j] * rate_rate
        for a in range(d):
            if model.B[a, i] != 0.0:
                sa = layout.u_slice(a)
                if scheme == "reduced":
                    q[si, sa] += model.B[a, i] * rate_value
                    q[si.start, sa.start + last] += model.B[a, i]
                else:
                    q[si, sa] += model.B[a, i] * gtwg

    f_hist = model.forcing_history(grid.nodes())
    for a in range(d):
        sa = layout.u_slice(a)
        r[sa] += -reflected_load_weights(f_hist[:, a], grid.h)
        r[sa.start + last] += -model.j_hat_0[a]

    return _symmetrize(q), r, layout


def build_sdof_mca_system(
    model: SdofModel, grid: Grid, scheme: str = "reduced"
) -> tuple[np.ndarray, np.ndarray, DofLayout]:
    return build_mca_system(sdof_as_mdof(model), grid, scheme)


def build_hamilton_system(
    model: SdofModel, grid: Grid
) -> tuple[np.ndarray, np.ndarray, DofLayout]:
    """K, r of the classical action int (m u'^2 / 2 - k u^2 / 2 + f u) dtau."""
    dmat = deriv1_matrix(grid.n_steps, grid.h)
    tmat = trapezoid_matrix(grid)
    q = 0.5 * model.m * dmat.T @ tmat @ dmat - 0.5 * model.k * tmat
    r = tmat @ model.forcing_signal(grid).values
    return _symmetrize(q), r, DofLayout(grid.n_nodes, 1, 0)


def build_tonti_system(
    model: SdofModel, grid: Grid
) -> tuple[np.ndarray, np.ndarray, DofLayout]:
    """K, r of the convolutional action with the half-weighted damping term:
    1/2 u' * m u' + 1/2 u' * c u + 1/2 u * k u - u * f."""
    dmat = deriv1_matrix(grid.n_steps, grid.h)
    wmat = conv_end_matrix(grid)
    q = (
        0.5 * model.m * dmat.T @ wmat @ dmat
        + 0.5 * model.c * dmat.T @ wmat
        + 0.5 * model.k * wmat
    )
    r = -(wmat @ model.forcing_signal(grid).values)
    return _symmetrize(q), r, DofLayout(grid.n_nodes, 1, 0)


def build_gurtin_system(
    model: SdofModel, grid: Grid, u0: float, v0: float
) -> tuple[np.ndarray, np.ndarray, DofLayout]:
    """K, r of the Gurtin convolutional action
    1/2 m [u*u] + 1/2 [c*[u*u]] + 1/2 [k tau*[u*u]] - [f*u] at the end time,
    with f carrying the initial-condition data."""
    from .actions import gurtin_forcing  # cycle-free: actions imports lazily too

    wmat = conv_end_matrix(grid)
    w_const, w_ramp = prefix_conv_matrices(grid)
    q = 0.5 * model.m * wmat + 0.5 * model.c * w_const + 0.5 * model.k * w_ramp
    f = gurtin_forcing(model, u0, v0, grid)
    r = -(wmat @ f.values)
    return _symmetrize(q), r, DofLayout(grid.n_nodes, 1, 0)


def pack_trajectory(layout: DofLayout, traj: Trajectory) -> np.ndarray:
    if layout.n_el:
        return layout.pack(traj.u, traj.J)
    return layout.pack(traj.u)
