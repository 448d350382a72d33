"""Reference profiles: the spatial state each example is stabilized to.

The reactor profile is the equilibrium of the method-of-lines (MoL)
semi-discretization, found by explicit time marching; the traffic profile
is piecewise constant by construction, with jumps at the interchanges.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DivergenceError, InvalidArgumentError
from .grid import Grid
from .models import PatchActuation, PointActuation, TrafficParams

__all__ = ["Profile", "mol_rhs", "solve_reactor_profile", "traffic_profile", "steady_residual"]


@dataclass(frozen=True)
class Profile:
    """Nodal samples of a reference state, values[i][k] = state i at node k."""

    grid: Grid
    values: np.ndarray = field(repr=False)  # (n_states, N+1)
    reference_controls: np.ndarray = field(repr=False)  # (m,)

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise InvalidArgumentError("profile contains non-finite values")
        if self.values.shape[1] != self.grid.n_cells + 1:
            raise InvalidArgumentError("profile values do not match the grid")


def _control_injection(model, grid, controls, out):
    """Add the actuation term to an (n, N+1) right-hand-side array in place.

    Patch channels distribute gain * indicator over their nodes; point
    channels add the channel input at the single node holding the location
    (the semi-discrete form of a rate jump at that point).
    """
    act = model.actuation
    if isinstance(act, PatchActuation):
        x = grid.nodes
        for j, (a, b) in enumerate(act.intervals):
            if j == act.n_channels - 1:
                mask = (x >= a) & (x <= b)
            else:
                mask = (x >= a) & (x < b)
            out[:, mask] += np.outer(model.gain_vectors[j], np.full(mask.sum(), controls[j]))
    elif isinstance(act, PointActuation):
        for j, a in enumerate(act.locations):
            k = grid.node_index(a)
            out[:, k] += model.gain_vectors[j] * controls[j]
    else:
        raise InvalidArgumentError(f"unsupported actuation {type(act).__name__}")
    return out


def mol_rhs(model, grid, Z, controls):
    """Semi-discrete right-hand side d/dt Z on the full node set.

    Z is (n, N+1) including the boundary node, whose rate is reported as 0
    (the boundary value is prescribed, not evolved). The transport term is
    upwinded per node against the local sign of D: backward differences
    where D < 0, forward where D > 0, one-sided at the outflow end.
    """
    Z = np.asarray(Z, dtype=float)
    h = grid.h
    D = model.D(grid.nodes, Z)
    back = np.empty_like(Z)
    back[:, 1:] = (Z[:, 1:] - Z[:, :-1]) / h
    back[:, 0] = 0.0
    fwd = np.empty_like(Z)
    fwd[:, :-1] = (Z[:, 1:] - Z[:, :-1]) / h
    fwd[:, -1] = back[:, -1]
    dZ = D * np.where(D < 0, back, fwd) + model.source(grid.nodes, Z)
    _control_injection(model, grid, controls, dZ)
    dZ[:, 0] = 0.0
    return dZ


def _reactor_dt(model, grid, Z, p_like):
    """Conservative explicit step bound, tightened to the current state.

    The crude bound 0.5 / (N max(v) + beta + k1 e^mu) is usable for modest
    activation exponents but collapses for large mu; replacing e^mu with the
    Arrhenius factor at the current hottest node keeps the same safety
    structure while tracking the actual local stiffness.
    """
    t1max = max(float(Z[0].max()), 0.01)
    vmax = float(np.abs(model.D(grid.nodes, Z)).max())
    # reaction-rate slope bound at the hottest node; E entry (0,0) dominates
    E = model.E(grid.nodes, Z)
    slope = float(np.abs(E).max())
    return 0.5 / (grid.n_cells * vmax / grid.length + slope + 1e-30)


def solve_reactor_profile(model, grid, nu0, t_max=300.0, tol=1e-10, initial=None):
    """Integrate the reactor MoL ODE to its equilibrium.

    Marches with RK4 and an adaptive conservative step until the max norm of
    the time derivative drops below tol. The boundary node is pinned at the
    inlet state (zero in normalized coordinates). `initial` overrides the
    zero starting state; any start in the equilibrium's basin gives the same
    profile.
    """
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    nu0 = np.asarray(nu0, dtype=float)
    if nu0.shape != (model.n_controls,):
        raise InvalidArgumentError(f"nu0 must have {model.n_controls} entries")
    if initial is None:
        Z = np.zeros((model.n_states, grid.n_cells + 1))
    else:
        Z = np.array(initial, dtype=float)
        if Z.shape != (model.n_states, grid.n_cells + 1):
            raise InvalidArgumentError("initial state does not match the grid")
    Z[:, 0] = model.inlet
    t = 0.0
    step = 0
    res = np.inf
    while t < t_max:
        dt = min(_reactor_dt(model, grid, Z, None), t_max - t)
        k1 = mol_rhs(model, grid, Z, nu0)
        k2 = mol_rhs(model, grid, Z + 0.5 * dt * k1, nu0)
        k3 = mol_rhs(model, grid, Z + 0.5 * dt * k2, nu0)
        k4 = mol_rhs(model, grid, Z + dt * k3, nu0)
        Z = Z + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
        step += 1
        if not np.all(np.isfinite(Z)):
            raise DivergenceError(f"reactor state became non-finite at t = {t:.4g}", time=t)
        if step % 50 == 0 or t >= t_max:
            res = float(np.abs(mol_rhs(model, grid, Z, nu0)).max())
            if res <= tol:
                return Profile(grid=grid, values=Z, reference_controls=nu0)
    raise ConvergenceError(
        f"reactor profile not steady after t = {t_max} (residual {res:.3e})", residual=res
    )


def traffic_profile(p, grid):
    """Piecewise-constant density profile rising from 0.9 to 0.98 of critical.

    Right-continuous: the node sitting on an interchange takes the post-jump
    value. The grid must place a node on every interchange, which for the
    default geometry means N divisible by 5.
    """
    p = p or TrafficParams()
    if grid.n_cells % 5 != 0:
        raise InvalidArgumentError(f"n_cells must be divisible by 5, got {grid.n_cells}")
    for a in p.interchanges:
        grid.node_index(a)
    x = grid.nodes
    seg = np.searchsorted(np.asarray(p.interchanges), x, side="right")
    rho = (0.9 + 0.02 * seg) * p.rho_C
    nu0 = np.full(len(p.interchanges), 0.02 * p.rho_C)
    return Profile(grid=grid, values=rho[None, :], reference_controls=nu0)


def steady_residual(model, profile, nu0, exclude=()):
    """Max norm of the MoL right-hand side at a profile, optionally skipping nodes.

    `exclude` lists node indices where a residual is expected (e.g. interchange
    nodes of a piecewise-constant profile, where the one-sided difference sees
    the jump).
    """
    dZ = mol_rhs(model, profile.grid, profile.values, np.asarray(nu0, dtype=float))
    keep = np.ones(profile.grid.n_cells + 1, dtype=bool)
    keep[list(exclude)] = False
    return float(np.abs(dZ[:, keep]).max())
