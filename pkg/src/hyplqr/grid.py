"""Uniform spatial grids on [0, L]."""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class Grid:
    """Uniform subdivision of [0, L] into n_cells intervals (n_cells + 1 nodes)."""

    length: float
    n_cells: int
    nodes: np.ndarray = field(repr=False)
    h: float

    def node_index(self, x, tol=1e-9):
        """Index of the node coinciding with x, or raise if x is off-grid."""
        k = int(round(x / self.h))
        if k < 0 or k > self.n_cells or abs(k * self.h - x) > tol * max(self.length, 1.0):
            raise InvalidArgumentError(f"location {x} does not coincide with a grid node")
        return k


def make_grid(length, n_cells):
    """Build a uniform grid with nodes k*L/N, k = 0..N."""
    if n_cells < 2:
        raise InvalidArgumentError(f"need at least 2 cells, got {n_cells}")
    if length <= 0:
        raise InvalidArgumentError(f"domain length must be positive, got {length}")
    n_cells = int(n_cells)
    nodes = np.arange(n_cells + 1) * (length / n_cells)
    return Grid(length=float(length), n_cells=n_cells, nodes=nodes, h=length / n_cells)
