"""Feedback synthesis, kernel reconstruction and the Riccati-PDE diagnostic.

The gain convention is housed here once: K = R^-1 G^T P and the control law
is applied as u = -K z, so the closed loop is F - G K.
"""

from dataclasses import dataclass, field

import numpy as np

from .care import Spectrum, eigenvalues, solve_care, _care_residual
from .errors import InvalidArgumentError
from .grid import Grid
from .linearize import patch_column
from .models import PatchActuation, PointActuation

__all__ = [
    "RiccatiSolution",
    "KernelField",
    "synthesize",
    "kernel_from_discrete",
    "riccati_pde_residual",
    "rpd_operator",
    "stability_margin",
]


@dataclass(frozen=True)
class RiccatiSolution:
    P: np.ndarray = field(repr=False)
    K: np.ndarray = field(repr=False)
    closed_loop_spectrum: Spectrum = field(repr=False)
    residual: float = 0.0
    weighting: str = "unit"


@dataclass(frozen=True)
class KernelField:
    """Samples P_ij(xi_k1, xi_k2) over the interior nodes.

    scaling 'raw' keeps the discrete blocks verbatim (what gets plotted);
    'kernel' divides by h^2 so the double rectangle rule over the samples
    approximates the quadratic cost integral.
    """

    grid: Grid
    samples: np.ndarray = field(repr=False)  # (n, n, N, N)
    scaling: str = "raw"


def synthesize(sys):
    """Solve the CARE for a discretized system and package gain + spectrum."""
    P = solve_care(sys.F, sys.G, sys.Q, sys.R)
    K = np.linalg.solve(sys.R, sys.G.T @ P)
    _, rel = _care_residual(sys.F, sys.G, sys.Q, sys.R, P)
    spectrum = eigenvalues(sys.F - sys.G @ K)
    return RiccatiSolution(
        P=P, K=K, closed_loop_spectrum=spectrum, residual=rel, weighting=sys.weighting
    )


def stability_margin(sol):
    """Negative of the closed-loop spectral abscissa; positive iff stable."""
    return -sol.closed_loop_spectrum.abscissa


def kernel_from_discrete(P, grid, n, mode="raw"):
    """Reindex an (nN x nN) node-major matrix into per-state-pair spatial samples."""
    if mode not in ("raw", "kernel"):
        raise InvalidArgumentError(f"unknown kernel mode '{mode}'")
    N = grid.n_cells
    P = np.asarray(P, dtype=float)
    if P.shape != (n * N, n * N):
        raise InvalidArgumentError(f"P shape {P.shape} does not match n*N = {n * N}")
    samples = P.reshape(N, n, N, n).transpose(1, 3, 0, 2).copy()
    if mode == "kernel":
        samples /= grid.h**2
    return KernelField(grid=grid, samples=samples, scaling=mode)


def _central_dx(A, h, axis):
    """Central differences along a node axis, one-sided at the ends."""
    out = np.gradient(A, h, axis=axis, edge_order=1)
    return out


def rpd_operator(field, co, R, point_scaling="unit"):
    """Everything in the kernel Riccati PDE except the state weight Q.

    Returns the (n, n, N, N) array
      -D0(x1)^T dP/dx1 - (dD0/dx1)^T P - dP/dx2 D0(x2) - P dD0/dx2
      + E0(x1)^T P + P E0(x2) - quad(x1, x2)
    with transport derivatives by central differences and the quadratic term
    by rectangle-rule quadrature (collapsed analytically for point channels).
    """
    if field.scaling != "kernel":
        raise InvalidArgumentError("residual requires a kernel-scaled field")
    grid = field.grid
    N, h = grid.n_cells, grid.h
    if N < 4:
        raise InvalidArgumentError("grid too coarse for central differences (need N >= 4)")
    P = field.samples  # (n, n, N, N)
    n = P.shape[0]
    D0, E0 = co.D0, co.E0  # (n, N), (n, n, N)
    dP1 = _central_dx(P, h, axis=2)
    dP2 = _central_dx(P, h, axis=3)
    dD0 = _central_dx(D0, h, axis=1)

    # D is diagonal, so D(x1)^T dP/dx1 acts row-wise and dP/dx2 D(x2) column-wise
    out = -D0[:, None, :, None] * dP1 - dD0[:, None, :, None] * P
    out -= dP2 * D0[None, :, None, :] + P * dD0[None, :, None, :]
    # E terms: (E(x1)^T P)_{ij} = sum_a E_{ai}(x1) P_{aj}; (P E(x2))_{ij} = sum_a P_{ia} E_{aj}(x2)
    out += np.einsum("aik,ajkl->ijkl", E0, P)
    out += np.einsum("iakl,ajl->ijkl", P, E0)

    # quadratic term: A(x1) R^-1 B(x2), A = integral P(x1,y) G(y) dy, B = A^T mirrored
    A = _kernel_gain_integral(field, co, point_scaling)  # (n, m, N)
    Rinv = np.linalg.inv(np.asarray(R, dtype=float))
    out -= np.einsum("imk,mp,jpl->ijkl", A, Rinv, A)
    return out


def _kernel_gain_integral(field, co, point_scaling):
    """A_{i m}(x1) = integral of P(x1, y) G0_m(y) dy by the rectangle rule."""
    P = field.samples
    n, _, N, _ = P.shape
    h = field.grid.h
    act = co.actuation
    m = act.n_channels
    A = np.zeros((n, m, N))
    if isinstance(act, PatchActuation):
        for j in range(m):
            mask = patch_column(co, j)
            # sum_y h * P[i, a, x1, y] * G0[j, a]
            A[:, j, :] = h * np.einsum("iakl,a->ik", P[:, :, :, mask], co.G0[j])
    elif isinstance(act, PointActuation):
        scale = h if point_scaling == "unit" else 1.0
        for j, a in enumerate(act.locations):
            k = field.grid.node_index(a) - 1
            A[:, j, :] = scale * np.einsum("iak,a->ik", P[:, :, :, k], co.G0[j])
    else:
        raise InvalidArgumentError(f"unsupported actuation {type(act).__name__}")
    return A


def riccati_pde_residual(field, co, Q_kernel, R, point_scaling="unit", margin_cells=2):
    """Pointwise interior residual of the kernel Riccati PDE.

    Q_kernel is an (n, n, N, N) array of state-weight kernel samples (zero
    off the diagonal for the delta-concentrated weights of the demos).
    Returns (residual_field, max_over_interior); the interior excludes
    margin_cells nodes at every edge, where one-sided stencils and the
    distributional boundary terms would pollute the diagnostic.
    """
    res = rpd_operator(field, co, R, point_scaling) + np.asarray(Q_kernel, dtype=float)
    N = field.grid.n_cells
    if not 0 <= margin_cells < N // 2:
        raise InvalidArgumentError("margin_cells out of range")
    sl = slice(margin_cells, N - margin_cells)
    interior_max = float(np.abs(res[:, :, sl, sl]).max())
    return res, interior_max
