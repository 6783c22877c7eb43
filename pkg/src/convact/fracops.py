"""Left/right Riemann-Liouville fractional integrals and derivatives.

Derivatives use the Grunwald-Letnikov (GL) sum on the uniform grid, which is
first-order accurate and reproduces the singular endpoint behaviour of the
Riemann-Liouville definition for sampled values (the node-0 / node-n values
are retained as-is; accuracy claims exclude the two nodes nearest a singular
endpoint). Integrals use product quadrature with the weakly singular kernel
integrated exactly against a piecewise-linear reconstruction of the samples,
so no node needs to be excluded. At order alpha = 1 the derivative collapses
to the two-point difference and the integral to running trapezoid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import FracOrder, Signal, as_order

__all__ = [
    "Side",
    "GlWeights",
    "CompositionKind",
    "gl_weights",
    "frac_integral",
    "frac_deriv",
    "composition_residual",
    "gl_derivative_matrix",
]

# Residual norms skip this many nodes next to each singular endpoint.
SINGULAR_EXCLUSION = 2


class Side(enum.Enum):
    """Left operators integrate over (0, tau); right operators over (tau, t)."""

    LEFT = enum.auto()
    RIGHT = enum.auto()


@dataclass(frozen=True)
class GlWeights:
    """Grunwald-Letnikov weights w[j] = w[j-1] * (j - 1 - alpha) / j, w[0] = 1."""

    alpha: FracOrder
    w: np.ndarray = field(repr=False)


def gl_weights(alpha, count: int) -> GlWeights:
    """First `count` GL weights for the given order."""
    order = as_order(alpha)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    a = order.alpha
    w = np.empty(count)
    w[0] = 1.0
    for j in range(1, count):
        w[j] = w[j - 1] * (j - 1 - a) / j
    w.setflags(write=False)
    return GlWeights(order, w)


def frac_deriv(side: Side, u: Signal, alpha) -> Signal:
    """Riemann-Liouville fractional derivative of order alpha by the GL sum.

    LEFT:  result[k] = h^-a * sum_{j=0..k}   w[j] u[k-j]
    RIGHT: result[k] = h^-a * sum_{j=0..n-k} w[j] u[k+j]

    For alpha = 1 these are the two-point differences approximating u' and
    -u' respectively.
    """
    order = as_order(alpha)
    n = u.grid.n_steps
    w = gl_weights(order, n + 1).w
    scale = u.grid.h ** (-order.alpha)
    if side is Side.LEFT:
        vals = np.convolve(u.values, w)[: n + 1]
    elif side is Side.RIGHT:
        vals = np.convolve(u.values[::-1], w)[: n + 1][::-1]
    else:
        raise ValueError(f"unknown side {side!r}")
    return Signal(u.grid, scale * vals)


def _left_integral_values(values: np.ndarray, h: float, a: float) -> np.ndarray:
    """Left RL integral by exact integration of the kernel against the
    piecewise-linear interpolant of `values`; result[0] = 0."""
    n = values.size - 1
    m = np.arange(n + 2, dtype=float)
    pow1 = m**a  # m^alpha
    pow2 = m ** (a + 1.0)
    # Node weights of the product rule, scaled by h^a / Gamma(a + 2):
    #   weight on u_i at node k:  d2[k-i] for 0 < i < k,
    #   boundary weights: `first` on u_k, b0[k] on u_0.
    d2 = pow2[2:] - 2.0 * pow2[1:-1] + pow2[:-2]  # second difference of m^(a+1)
    k = np.arange(n + 1, dtype=float)
    b0 = np.zeros(n + 1)
    b0[1:] = (k[1:] - 1.0) ** (a + 1.0) - (k[1:] - 1.0 - a) * k[1:] ** a
    scale = h**a / math.gamma(a + 2.0)
    out = np.zeros(n + 1)
    # Toeplitz part sum_{i=1..k-1} d2[k-i-1] u_i sits at offset k-2 of the
    # discrete convolution of the interior samples with d2.
    interior = np.convolve(values[1:], d2)
    for_k = np.zeros(n + 1)
    if n >= 2:
        for_k[2:] = interior[: n - 1]
    out[1:] = scale * (values[1:] + for_k[1:] + b0[1:] * values[0])
    return out


def frac_integral(side: Side, u: Signal, alpha) -> Signal:
    """Riemann-Liouville fractional integral of order alpha.

    LEFT:  result[k] ~= (1/Gamma(a)) int_0^{tau_k} u(xi) (tau_k - xi)^(a-1) dxi
    RIGHT: mirror image over (tau_k, t).

    Exact for piecewise-linear u; alpha = 1 reduces to running trapezoid.
    """
    order = as_order(alpha)
    if side is Side.LEFT:
        vals = _left_integral_values(u.values, u.grid.h, order.alpha)
    elif side is Side.RIGHT:
        vals = _left_integral_values(u.values[::-1], u.grid.h, order.alpha)[::-1]
    else:
        raise ValueError(f"unknown side {side!r}")
    return Signal(u.grid, vals)


class CompositionKind(enum.Enum):
    """Composition identities of the fractional operators."""

    J_J = enum.auto()  # J^a J^b u = J^(a+b) u
    D_OF_J = enum.auto()  # D^a J^a u = u
    J_OF_D = enum.auto()  # J^a D^a u = u - boundary correction


def interior_slice(n_steps: int) -> slice:
    """Nodes retained by residual norms: both singular ends excluded."""
    return slice(SINGULAR_EXCLUSION, n_steps + 1 - SINGULAR_EXCLUSION)


def composition_residual(
    kind: CompositionKind, side: Side, u: Signal, alpha, beta=None
) -> float:
    """Max interior mismatch of a composition identity, normalized by max |rhs|.

    For J_OF_D the boundary correction of the reconstruction identity is
    included on the rhs; discretely it vanishes because the left (right)
    integral is zero at its own base point.
    """
    a = as_order(alpha)
    if kind is CompositionKind.J_J:
        if beta is None:
            raise ValueError("J_J composition needs both orders")
        b = as_order(beta)
        if a.alpha + b.alpha > 1.0 + 1e-12:
            raise ValueError(
                f"J_J composition needs alpha + beta <= 1, got {a.alpha + b.alpha}"
            )
        lhs = frac_integral(side, frac_integral(side, u, b), a)
        rhs = frac_integral(side, u, FracOrder(a.alpha + b.alpha))
    elif kind is CompositionKind.D_OF_J:
        lhs = frac_deriv(side, frac_integral(side, u, a), a)
        rhs = u
    elif kind is CompositionKind.J_OF_D:
        lhs = frac_integral(side, frac_deriv(side, u, a), a)
        correction = np.zeros(u.grid.n_nodes)
        comp = FracOrder(1.0 - a.alpha) if a.alpha < 1.0 else None
        taus = u.grid.nodes()
        if comp is not None:
            if side is Side.LEFT:
                j0 = frac_integral(Side.LEFT, u, comp).values[0]
                with np.errstate(divide="ignore"):
                    correction[1:] = j0 / (math.gamma(a.alpha) * taus[1:] ** comp.alpha)
            else:
                jt = frac_integral(Side.RIGHT, u, comp).values[-1]
                with np.errstate(divide="ignore"):
                    correction[:-1] = jt / (
                        math.gamma(a.alpha) * (taus[-1] - taus[:-1]) ** comp.alpha
                    )
        rhs = Signal(u.grid, u.values - correction)
    else:
        raise ValueError(f"unknown composition kind {kind!r}")
    keep = interior_slice(u.grid.n_steps)
    scale = np.max(np.abs(rhs.values[keep]))
    if scale == 0.0:
        scale = 1.0
    return float(np.max(np.abs(lhs.values[keep] - rhs.values[keep])) / scale)


def gl_derivative_matrix(n_steps: int, h: float, alpha) -> np.ndarray:
    """Dense lower-triangular Toeplitz matrix of the LEFT GL derivative."""
    from scipy.linalg import toeplitz

    order = as_order(alpha)
    w = gl_weights(order, n_steps + 1).w
    scale = h ** (-order.alpha)
    return toeplitz(scale * w, np.zeros(n_steps + 1))
