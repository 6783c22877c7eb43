"""Physical models, mixed-variable lifts and reference oracles.

The mixed formulation tracks the displacement u together with the impulse J
of the internal (spring) force, with dJ/dt equal to the force. Reference
solutions come from two independent routes: the closed-form damped oscillator
(single dof, free or harmonically forced) and a high-accuracy state-space
integration (any dof count). Assemblers produce shear-building and clamped
1D-bar instances of the multi-dof model.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
import numpy as np
from scipy.linalg import block_diag

from .grid import Grid, Signal

__all__ = [
    "HarmonicForcing",
    "SdofModel",
    "MdofModel",
    "Trajectory",
    "analytic_sdof",
    "mixed_initials",
    "mdof_mixed_initials",
    "lift_to_mixed",
    "mdof_oracle",
    "build_shear_building",
    "build_bar_1d",
    "sdof_as_mdof",
    "mdof_to_json",
    "mdof_from_json",
]


@dataclass(frozen=True)
class HarmonicForcing:
    """Forcing amplitude * sin(omega * tau + phase); amplitude is a scalar for
    single-dof models and a per-dof vector otherwise."""

    amplitude: float | np.ndarray
    omega: float
    phase: float = 0.0

    def __call__(self, tau):
        return np.asarray(self.amplitude) * np.sin(self.omega * np.asarray(tau) + self.phase)


def _forcing_samples(forcing, taus: np.ndarray, width: int | None = None) -> np.ndarray:
    """Sampled forcing history; zeros when forcing is None."""
    if width is None:  # scalar model
        if forcing is None:
            return np.zeros_like(taus)
        return np.asarray([float(forcing(t)) for t in taus])
    if forcing is None:
        return np.zeros((taus.size, width))
    return np.asarray([np.broadcast_to(forcing(t), (width,)).astype(float) for t in taus])


@dataclass(frozen=True)
class SdofModel:
    """Damped oscillator m u'' + c u' + k u = f; works with the spring
    flexibility a = 1/k in the compatibility relation."""

    m: float
    c: float
    k: float
    forcing: HarmonicForcing | None = None
    j_hat_0: float = 0.0

    def __post_init__(self):
        if not (self.m > 0.0):
            raise ValueError(f"mass must be > 0, got {self.m}")
        if not (self.k > 0.0):
            raise ValueError(f"stiffness must be > 0, got {self.k}")
        if self.c < 0.0:
            raise ValueError(f"damping must be >= 0, got {self.c}")

    @property
    def a(self) -> float:
        """Spring flexibility 1/k."""
        return 1.0 / self.k

    def forcing_signal(self, grid: Grid) -> Signal:
        return Signal(grid, _forcing_samples(self.forcing, grid.nodes()))


def _check_symmetric(name: str, mat: np.ndarray):
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name}: must be a square matrix, got shape {mat.shape}")
    scale = max(np.max(np.abs(mat)), 1.0)
    if np.max(np.abs(mat - mat.T)) > 1e-10 * scale:
        raise ValueError(f"{name}: not symmetric")


def _min_eig(mat: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(mat).min())


@dataclass(frozen=True)
class MdofModel:
    """Multi-dof model: nodal mass M and damping C, element flexibility blocks
    A (block diagonal), equilibrium matrix B mapping element force impulses to
    nodal equations."""

    M: np.ndarray
    C: np.ndarray
    A_blocks: tuple
    B: np.ndarray
    forcing: HarmonicForcing | None = None
    j_hat_0: np.ndarray | None = None

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        C = np.asarray(self.C, dtype=float)
        B = np.asarray(self.B, dtype=float)
        blocks = tuple(np.atleast_2d(np.asarray(b, dtype=float)) for b in self.A_blocks)
        _check_symmetric("M", M)
        _check_symmetric("C", C)
        if _min_eig(M) <= 0.0:
            raise ValueError("M: not positive definite")
        if _min_eig(C) < -1e-10 * max(np.max(np.abs(C)), 1.0):
            raise ValueError("C: not positive semidefinite")
        for i, blk in enumerate(blocks):
            _check_symmetric(f"A_blocks[{i}]", blk)
            if _min_eig(blk) <= 0.0:
                raise ValueError(f"A_blocks[{i}]: not positive definite")
        n_dof = M.shape[0]
        n_el = sum(b.shape[0] for b in blocks)
        if C.shape != (n_dof, n_dof):
            raise ValueError(f"C: shape {C.shape} does not match M {M.shape}")
        if B.ndim != 2 or B.shape != (n_dof, n_el):
            raise ValueError(f"B: shape {B.shape}, expected ({n_dof}, {n_el})")
        j0 = np.zeros(n_dof) if self.j_hat_0 is None else np.asarray(self.j_hat_0, dtype=float)
        if j0.shape != (n_dof,):
            raise ValueError(f"j_hat_0: shape {j0.shape}, expected ({n_dof},)")
        for arr in (M, C, B, j0) + blocks:
            arr.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "A_blocks", blocks)
        object.__setattr__(self, "j_hat_0", j0)

    @property
    def n_dof(self) -> int:
        return self.M.shape[0]

    @property
    def n_el(self) -> int:
        return self.B.shape[1]

    @property
    def A(self) -> np.ndarray:
        return block_diag(*self.A_blocks)

    def reduced_stiffness(self) -> np.ndarray:
        """Displacement-form stiffness B A^-1 B^T."""
        return self.B @ np.linalg.solve(self.A, self.B.T)

    def forcing_history(self, taus: np.ndarray) -> np.ndarray:
        return _forcing_samples(self.forcing, taus, self.n_dof)


@dataclass(frozen=True)
class Trajectory:
    """Paired histories {u, J} on a shared grid; arrays are (n_nodes,) for
    single-dof models and (n_nodes, n_dof) / (n_nodes, n_el) otherwise."""

    grid: Grid
    u: np.ndarray = field(repr=False)
    J: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        J = np.asarray(self.J, dtype=float)
        if u.shape[0] != self.grid.n_nodes or J.shape[0] != self.grid.n_nodes:
            raise ValueError("trajectory histories must have one row per grid node")
        if u.ndim != J.ndim:
            raise ValueError("u and J must both be scalar or both vector valued")
        u.setflags(write=False)
        J.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "J", J)

    @property
    def is_scalar(self) -> bool:
        return self.u.ndim == 1

    def u_signal(self, component: int | None = None) -> Signal:
        vals = self.u if self.u.ndim == 1 else self.u[:, component]
        return Signal(self.grid, vals)

    def J_signal(self, component: int | None = None) -> Signal:
        vals = self.J if self.J.ndim == 1 else self.J[:, component]
        return Signal(self.grid, vals)

    def to_csv(self) -> str:
        """Columns tau,u...,J... at full double precision."""
        if self.is_scalar:
            header = "tau,u,J"
            cols = [self.u, self.J]
        else:
            header = "tau," + ",".join(
                [f"u{i}" for i in range(self.u.shape[1])]
                + [f"J{e}" for e in range(self.J.shape[1])]
            )
            cols = [self.u[:, i] for i in range(self.u.shape[1])] + [
                self.J[:, e] for e in range(self.J.shape[1])
            ]
        taus = self.grid.nodes()
        lines = [header]
        for row in range(self.grid.n_nodes):
            vals = [taus[row]] + [col[row] for col in cols]
            lines.append(",".join(f"{v:.17g}" for v in vals))
        return "\n".join(lines) + "\n"


def mixed_initials(model: SdofModel, u0: float, v0: float) -> tuple[float, float]:
    """Node-zero values (u(0), J(0)) consistent with the mixed-variable
    initial conditions: J(0) = j_hat_0 - m v0 - c u0."""
    return float(u0), float(model.j_hat_0 - model.m * v0 - model.c * u0)


def mdof_mixed_initials(model: MdofModel, u0, v0) -> tuple[np.ndarray, np.ndarray]:
    """Vector counterpart: B J(0) = j_hat_0 - M v0 - C u0 (B square here)."""
    u0 = np.asarray(u0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    rhs = model.j_hat_0 - model.M @ v0 - model.C @ u0
    if model.B.shape[0] != model.B.shape[1]:
        raise ValueError("mixed initials need a square equilibrium matrix B")
    return u0, np.linalg.solve(model.B, rhs)


def _cumtrapz(values: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(values)
    out[1:] = np.cumsum(0.5 * h * (values[1:] + values[:-1]), axis=0)
    return out


def lift_to_mixed(model: SdofModel, u: Signal, u0: float, v0: float) -> Trajectory:
    """Complete a displacement history to the mixed pair {u, J} with
    J(tau) = J(0) + k * int_0^tau u (running trapezoid)."""
    scale = max(abs(u0), float(np.max(np.abs(u.values))), 1.0)
    if abs(u.values[0] - u0) > 1e-9 * scale:
        raise ValueError(f"u[0] = {u.values[0]} does not match u0 = {u0}")
    _, j0 = mixed_initials(model, u0, v0)
    J = j0 + model.k * _cumtrapz(u.values, u.grid.h)
    return Trajectory(u.grid, u.values, J)


def analytic_sdof(model: SdofModel, u0: float, v0: float, grid: Grid) -> Trajectory:
    """Closed-form trajectory for free or single-harmonic forcing.

    All damping regimes are covered (under/critical/over); the impulse history
    J comes from the mixed lift. Unsupported forcing shapes raise ValueError.
    """
    m, c, k = model.m, model.c, model.k
    wn = math.sqrt(k / m)
    zeta = c / (2.0 * math.sqrt(k * m))
    taus = grid.nodes()

    if model.forcing is None:
        up0 = vp0 = 0.0
        u_part = np.zeros_like(taus)
    elif isinstance(model.forcing, HarmonicForcing) and np.ndim(model.forcing.amplitude) == 0:
        f0 = float(model.forcing.amplitude)
        om = model.forcing.omega
        ph = model.forcing.phase
        den = (k - m * om * om) ** 2 + (c * om) ** 2
        if den == 0.0:
            raise ValueError("undamped resonance has no steady-state closed form")
        amp = f0 / math.sqrt(den)
        lag = math.atan2(c * om, k - m * om * om)
        u_part = amp * np.sin(om * taus + ph - lag)
        up0 = amp * math.sin(ph - lag)
        vp0 = amp * om * math.cos(ph - lag)
    else:
        raise ValueError(f"unsupported forcing shape: {model.forcing!r}")

    b1 = u0 - up0
    disc = zeta * zeta - 1.0
    if abs(disc) < 1e-12:  # critically damped
        b2 = (v0 - vp0) + wn * b1
        u_hom = np.exp(-wn * taus) * (b1 + b2 * taus)
    elif disc < 0.0:  # underdamped (covers zeta = 0)
        wd = wn * math.sqrt(-disc)
        b2 = ((v0 - vp0) + zeta * wn * b1) / wd
        u_hom = np.exp(-zeta * wn * taus) * (b1 * np.cos(wd * taus) + b2 * np.sin(wd * taus))
    else:  # overdamped
        wo = wn * math.sqrt(disc)
        b2 = ((v0 - vp0) + zeta * wn * b1) / wo
        u_hom = np.exp(-zeta * wn * taus) * (b1 * np.cosh(wo * taus) + b2 * np.sinh(wo * taus))

    u_sig = Signal(grid, u_hom + u_part)
    return lift_to_mixed(model, u_sig, u0, v0)


def mdof_oracle(
    model: MdofModel, u0, v0, grid: Grid, substeps: int = 8, with_velocity: bool = False
):
    """Reference trajectory by classical fourth-order one-step integration of
    the displacement-form system M u'' + C u' + (B A^-1 B^T) u = f at step
    h/substeps, with J integrated alongside via J' = A^-1 B^T u.

    Returns the Trajectory, or (Trajectory, velocity history) when
    `with_velocity` is set (for energy audits)."""
    u0 = np.asarray(u0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    d = model.n_dof
    k_red = model.reduced_stiffness()
    a_inv_bt = np.linalg.solve(model.A, model.B.T)
    m_inv = np.linalg.inv(model.M)
    forcing = model.forcing

    def f_of(t: float) -> np.ndarray:
        if forcing is None:
            return np.zeros(d)
        return np.broadcast_to(forcing(t), (d,)).astype(float)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        u, v = y[:d], y[d : 2 * d]
        acc = m_inv @ (f_of(t) - model.C @ v - k_red @ u)
        jdot = a_inv_bt @ u
        return np.concatenate([v, acc, jdot])

    _, j0 = mdof_mixed_initials(model, u0, v0)
    y = np.concatenate([u0, v0, j0])
    hs = grid.h / substeps
    u_hist = np.empty((grid.n_nodes, d))
    v_hist = np.empty((grid.n_nodes, d))
    j_hist = np.empty((grid.n_nodes, model.n_el))
    u_hist[0], v_hist[0], j_hist[0] = u0, v0, j0
    t = 0.0
    for node in range(1, grid.n_nodes):
        for _ in range(substeps):
            k1 = rhs(t, y)
            k2 = rhs(t + 0.5 * hs, y + 0.5 * hs * k1)
            k3 = rhs(t + 0.5 * hs, y + 0.5 * hs * k2)
            k4 = rhs(t + hs, y + hs * k3)
            y = y + (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += hs
        u_hist[node] = y[:d]
        v_hist[node] = y[d : 2 * d]
        j_hist[node] = y[2 * d :]
    traj = Trajectory(grid, u_hist, j_hist)
    return (traj, v_hist) if with_velocity else traj


def _incidence(n: int) -> np.ndarray:
    """Chain incidence: element i spans nodes i-1, i with node -1 grounded."""
    b = np.eye(n)
    for i in range(1, n):
        b[i - 1, i] = -1.0
    return b


def build_shear_building(
    n_stories: int,
    story_mass: float,
    story_stiffness: float,
    story_damping: float = 0.0,
    forcing: HarmonicForcing | None = None,
    j_hat_0: np.ndarray | None = None,
) -> MdofModel:
    """Uniform shear building: one lateral dof, one spring and one nodal damper
    per story."""
    if n_stories < 1:
        raise ValueError("n_stories must be >= 1")
    if story_mass <= 0.0 or story_stiffness <= 0.0 or story_damping < 0.0:
        raise ValueError("story parameters must be positive (damping >= 0)")
    eye = np.eye(n_stories)
    return MdofModel(
        M=story_mass * eye,
        C=story_damping * eye,
        A_blocks=tuple(np.array([[1.0 / story_stiffness]]) for _ in range(n_stories)),
        B=_incidence(n_stories),
        forcing=forcing,
        j_hat_0=j_hat_0,
    )


def build_bar_1d(
    density: float, axial_rigidity: float, length: float, n_elem: int
) -> MdofModel:
    """Clamped-free elastic bar with linear two-node elements, lumped mass and
    per-element axial flexibility h_e / (EA); no damping."""
    if n_elem < 1:
        raise ValueError("n_elem must be >= 1")
    if density <= 0.0 or axial_rigidity <= 0.0 or length <= 0.0:
        raise ValueError("bar parameters must be positive")
    h_e = length / n_elem
    lumped = np.full(n_elem, density * h_e)
    lumped[-1] = density * h_e / 2.0  # free end carries half an element
    return MdofModel(
        M=np.diag(lumped),
        C=np.zeros((n_elem, n_elem)),
        A_blocks=tuple(np.array([[h_e / axial_rigidity]]) for _ in range(n_elem)),
        B=_incidence(n_elem),
    )


def sdof_as_mdof(model: SdofModel) -> MdofModel:
    """One-dof embedding of an SdofModel (for cross-checks)."""
    amp = None
    if model.forcing is not None:
        amp = HarmonicForcing(
            np.array([float(model.forcing.amplitude)]),
            model.forcing.omega,
            model.forcing.phase,
        )
    return MdofModel(
        M=np.array([[model.m]]),
        C=np.array([[model.c]]),
        A_blocks=(np.array([[model.a]]),),
        B=np.array([[1.0]]),
        forcing=amp,
        j_hat_0=np.array([model.j_hat_0]),
    )


# ---------------------------------------------------------------------------
# JSON serialization of MdofModel


def mdof_to_json(model: MdofModel) -> str:
    doc = {
        "M": model.M.tolist(),
        "C": model.C.tolist(),
        "A_blocks": [b.tolist() for b in model.A_blocks],
        "B": model.B.tolist(),
        "forcing": _forcing_to_doc(model.forcing),
        "j_hat_0": model.j_hat_0.tolist(),
    }
    return json.dumps(doc, indent=2)


def _forcing_to_doc(forcing) -> dict:
    if forcing is None:
        return {"kind": "zero"}
    return {
        "kind": "harmonic",
        "amplitude": np.asarray(forcing.amplitude).tolist(),
        "omega": forcing.omega,
        "phase": forcing.phase,
    }


def _forcing_from_doc(doc) -> HarmonicForcing | None:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ValueError("forcing: expected an object with a 'kind' key")
    kind = doc["kind"]
    if kind == "zero":
        extra = set(doc) - {"kind"}
        if extra:
            raise ValueError(f"forcing: unknown keys {sorted(extra)}")
        return None
    if kind == "harmonic":
        extra = set(doc) - {"kind", "amplitude", "omega", "phase"}
        if extra:
            raise ValueError(f"forcing: unknown keys {sorted(extra)}")
        try:
            return HarmonicForcing(
                amplitude=np.asarray(doc["amplitude"], dtype=float),
                omega=float(doc["omega"]),
                phase=float(doc.get("phase", 0.0)),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"forcing: {exc}") from exc
    raise ValueError(f"forcing.kind: unknown preset {kind!r}")


def mdof_from_json(text: str) -> MdofModel:
    """Parse and validate a model document; failures name the offending field."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"model document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError("model document must be a JSON object")
    required = {"M", "C", "A_blocks", "B"}
    missing = required - set(doc)
    if missing:
        raise ValueError(f"model document missing keys: {sorted(missing)}")
    unknown = set(doc) - required - {"forcing", "j_hat_0"}
    if unknown:
        raise ValueError(f"model document has unknown keys: {sorted(unknown)}")

    def matrix(name: str) -> np.ndarray:
        try:
            arr = np.asarray(doc[name], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{name}: not a numeric matrix") from exc
        if arr.ndim != 2:
            raise ValueError(f"{name}: expected a 2-d row-major matrix")
        return arr

    if not isinstance(doc["A_blocks"], list) or not doc["A_blocks"]:
        raise ValueError("A_blocks: expected a non-empty list of blocks")
    blocks = []
    for i, blk in enumerate(doc["A_blocks"]):
        try:
            arr = np.atleast_2d(np.asarray(blk, dtype=float))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"A_blocks[{i}]: not a numeric block") from exc
        blocks.append(arr)
    j0 = None
    if "j_hat_0" in doc:
        try:
            j0 = np.asarray(doc["j_hat_0"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValueError("j_hat_0: not a numeric vector") from exc
    return MdofModel(
        M=matrix("M"),
        C=matrix("C"),
        A_blocks=tuple(blocks),
        B=matrix("B"),
        forcing=_forcing_from_doc(doc.get("forcing", {"kind": "zero"})),
        j_hat_0=j0,
    )
