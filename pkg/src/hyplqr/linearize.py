"""Linearization about a profile and backward-difference discretization.

Produces the frozen coefficient fields D0/E0/G0 along a reference profile
and assembles the LTI quadruple (F, G, Q, R) on the interior nodes, with
the boundary displacement eliminated (regulation drives it to zero).
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, SingularityError
from .grid import Grid
from .io import write_matrix_csv
from .models import PatchActuation, PointActuation

__all__ = ["LinearCoefficients", "LinearSystem", "linearize", "discretize", "build_weights", "build_system"]


@dataclass(frozen=True)
class LinearCoefficients:
    """Frozen coefficients at the interior nodes xi_1..xi_N of the profile's grid.

    D0 is (n, N) holding the diagonal transport entries, E0 is (n, n, N),
    G0 is (m, n) per-channel gain vectors; the actuation geometry says where
    each channel acts.
    """

    grid: Grid
    n_states: int
    D0: np.ndarray = field(repr=False)
    E0: np.ndarray = field(repr=False)
    G0: np.ndarray = field(repr=False)
    actuation: object = field(repr=False, default=None)


@dataclass(frozen=True)
class LinearSystem:
    """Discrete LTI quadruple on the n*N interior unknowns, node-major order."""

    F: np.ndarray = field(repr=False)
    G: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    grid: Grid = None
    n_states: int = 1
    weighting: str = "unit"
    point_scaling: str = "unit"

    @property
    def n_dofs(self):
        return self.F.shape[0]

    def export(self, out_dir, stem="system"):
        """Write F/G/Q/R CSVs and a JSON sidecar; returns the file list."""
        paths = []
        for name, M in (("F", self.F), ("G", self.G), ("Q", self.Q), ("R", self.R)):
            path = f"{out_dir}/{stem}_{name}.csv"
            write_matrix_csv(path, M)
            paths.append(path)
        meta = {
            "n_cells": self.grid.n_cells,
            "domain_length": self.grid.length,
            "n_states": self.n_states,
            "weighting": self.weighting,
            "point_scaling": self.point_scaling,
        }
        path = f"{out_dir}/{stem}_meta.json"
        with open(path, "w") as f:
            json.dump(meta, f, indent=1)
        paths.append(path)
        return paths


def linearize(model, profile):
    """Evaluate D, E and the channel gains along the profile's interior nodes."""
    grid = profile.grid
    x = grid.nodes[1:]
    Z = profile.values[:, 1:]
    if not np.all(np.isfinite(Z)):
        raise InvalidArgumentError("profile must be finite")
    D0 = model.D(x, Z)
    E0 = model.E(x, Z)
    if not (np.all(np.isfinite(D0)) and np.all(np.isfinite(E0))):
        raise SingularityError("linearized coefficients are non-finite along the profile")
    return LinearCoefficients(
        grid=grid,
        n_states=model.n_states,
        D0=np.asarray(D0, dtype=float),
        E0=np.asarray(E0, dtype=float),
        G0=np.asarray(model.gain_vectors, dtype=float),
        actuation=model.actuation,
    )


def patch_column(co, j):
    """Spatial gain samples of patch channel j (0-based) at the interior nodes."""
    act = co.actuation
    a, b = act.intervals[j]
    x = co.grid.nodes[1:]
    if j == act.n_channels - 1:
        mask = (x >= a) & (x <= b)
    else:
        mask = (x >= a) & (x < b)
    return mask


def discretize(co, act=None, point_scaling="unit"):
    """Assemble F and G by backward differences on the interior unknowns.

    The state vector stacks the n components node by node (node-major), with
    the boundary node eliminated. Point columns carry a single entry whose
    magnitude follows `point_scaling`: 'unit' keeps the raw gain (the
    mesh-dependent convention that reproduces the published numbers),
    'delta' divides by h for a delta-consistent column.
    """
    if point_scaling not in ("unit", "delta"):
        raise InvalidArgumentError(f"unknown point_scaling '{point_scaling}'")
    act = act or co.actuation
    grid, n = co.grid, co.n_states
    N, h = grid.n_cells, grid.h
    F = np.zeros((n * N, n * N))
    for k in range(N):
        blk = np.diag(co.D0[:, k]) / h + co.E0[:, :, k]
        F[n * k : n * (k + 1), n * k : n * (k + 1)] = blk
        if k > 0:
            F[n * k : n * (k + 1), n * (k - 1) : n * k] = -np.diag(co.D0[:, k]) / h
    m = act.n_channels
    G = np.zeros((n * N, m))
    if isinstance(act, PatchActuation):
        for j in range(m):
            mask = patch_column(co, j)
            for k in np.flatnonzero(mask):
                G[n * k : n * (k + 1), j] = co.G0[j]
    elif isinstance(act, PointActuation):
        scale = 1.0 if point_scaling == "unit" else 1.0 / h
        for j, a in enumerate(act.locations):
            k = grid.node_index(a) - 1  # interior row of the node at a_j
            if k < 0:
                raise InvalidArgumentError("point actuator at the eliminated boundary node")
            G[n * k : n * (k + 1), j] = scale * co.G0[j]
    else:
        raise InvalidArgumentError(f"unsupported actuation {type(act).__name__}")
    return F, G


def build_weights(grid, n, m, mode):
    """State and control weights: Q = c I with c = 1 ('unit') or c = h ('cell-width'); R = I."""
    if mode == "unit":
        c = 1.0
    elif mode == "cell-width":
        c = grid.h
    else:
        raise InvalidArgumentError(f"unknown weighting mode '{mode}'")
    return c * np.eye(n * grid.n_cells), np.eye(m)


def build_system(model, profile, weighting="unit", point_scaling="unit"):
    """Full pipeline from model + profile to the weighted LTI quadruple."""
    co = linearize(model, profile)
    F, G = discretize(co, model.actuation, point_scaling)
    Q, R = build_weights(profile.grid, model.n_states, model.n_controls, weighting)
    return LinearSystem(
        F=F,
        G=G,
        Q=Q,
        R=R,
        grid=profile.grid,
        n_states=model.n_states,
        weighting=weighting,
        point_scaling=point_scaling,
    )
