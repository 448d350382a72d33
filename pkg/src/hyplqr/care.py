"""Dense linear-algebra kernels: Schur form, eigenvalues, Lyapunov and CARE.

The Schur decomposition is delegated to LAPACK (via scipy); the Lyapunov
solver is an own Bartels-Stewart implementation on the quasi-triangular
factor, and the CARE solver combines the Hamiltonian ordered-Schur method
with a Newton-Kleinman refinement step built on that Lyapunov solver.
"""

import warnings

import numpy as np
from scipy.linalg import matrix_balance, schur

from .errors import (
    ConvergenceError,
    InvalidArgumentError,
    NumericalError,
    OracleError,
    SingularEquationError,
    SynthesisError,
)

__all__ = [
    "Spectrum",
    "ConditioningWarning",
    "real_schur",
    "eigenvalues",
    "solve_lyapunov",
    "solve_care",
    "riccati_ode_oracle",
]


class ConditioningWarning(UserWarning):
    """The invariant-subspace basis of a CARE solve is poorly conditioned."""


class Spectrum:
    """Eigenvalues sorted by descending real part (ties by descending imaginary part)."""

    def __init__(self, values):
        values = np.asarray(values, dtype=complex)
        order = np.lexsort((-values.imag, -values.real))
        self.values = values[order]

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    @property
    def abscissa(self):
        return float(self.values[0].real) if len(self.values) else -np.inf


def _check_square(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"matrix must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidArgumentError("matrix has non-finite entries")
    return A


def real_schur(A):
    """Real Schur factorization A = Q T Q^T with quasi-upper-triangular T."""
    A = _check_square(A)
    try:
        T, Q = schur(A, output="real")
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"QR iteration failed to converge: {exc}") from exc
    return Q, T


def _schur_blocks(T, tol=0.0):
    """Start indices and sizes of the 1x1 / 2x2 diagonal blocks of T."""
    n = T.shape[0]
    blocks = []
    k = 0
    while k < n:
        if k + 1 < n and abs(T[k + 1, k]) > tol:
            blocks.append((k, 2))
            k += 2
        else:
            blocks.append((k, 1))
            k += 1
    return blocks


def _block_eigs(T, start, size):
    if size == 1:
        return [complex(T[start, start])]
    a, b = T[start, start], T[start, start + 1]
    c, d = T[start + 1, start], T[start + 1, start + 1]
    tr, disc = a + d, (a - d) ** 2 + 4.0 * b * c
    if disc < 0:
        im = np.sqrt(-disc) / 2.0
        return [complex(tr / 2.0, im), complex(tr / 2.0, -im)]
    rt = np.sqrt(disc) / 2.0
    return [complex(tr / 2.0 + rt), complex(tr / 2.0 - rt)]


def eigenvalues(A):
    """Spectrum of a square matrix from its Schur factor."""
    _, T = real_schur(A)
    vals = []
    for start, size in _schur_blocks(T):
        vals.extend(_block_eigs(T, start, size))
    return Spectrum(vals)


def solve_lyapunov(A, C):
    """Solve A^T X + X A + C = 0 by Bartels-Stewart on the Schur form of A.

    Requires the spectra of A and -A to be disjoint (automatic when A is
    Hurwitz). C is symmetrized on entry; the returned X is symmetrized.
    """
    A = _check_square(A)
    C = _check_square(C)
    if C.shape != A.shape:
        raise InvalidArgumentError("A and C dimensions differ")
    C = (C + C.T) / 2.0
    U, T = real_schur(A)
    lam = np.concatenate([_block_eigs(T, s, b) for s, b in _schur_blocks(T)])
    scale = max(np.abs(lam).max(), 1.0)
    if np.abs(lam[:, None] + lam[None, :]).min() <= 1e-13 * scale:
        raise SingularEquationError("eigenvalue pair of A sums to ~0; Lyapunov equation singular")
    Ct = U.T @ C @ U
    n = T.shape[0]
    Y = np.zeros((n, n))
    blocks = _schur_blocks(T)
    eye = {1: np.eye(1), 2: np.eye(2)}
    # T^T Y + Y T = -Ct, solved block column by block column, rows top-down
    for cJ, bJ in blocks:
        J = slice(cJ, cJ + bJ)
        col_acc = Y[:, :cJ] @ T[:cJ, J]
        for rI, bI in blocks:
            I = slice(rI, rI + bI)
            rhs = -Ct[I, J] - T[:rI, I].T @ Y[:rI, J] - col_acc[I]
            M = np.kron(eye[bJ], T[I, I].T) + np.kron(T[J, J].T, eye[bI])
            Y[I, J] = np.linalg.solve(M, rhs.reshape(-1, order="F")).reshape(bI, bJ, order="F")
    X = U @ Y @ U.T
    return (X + X.T) / 2.0


def _care_residual(F, G, Q, R, P):
    T1 = F.T @ P
    T2 = P @ F
    T3 = (P @ G) @ np.linalg.solve(R, G.T @ P)
    res = T1 + T2 - T3 + Q
    denom = np.linalg.norm(T1) + np.linalg.norm(T2) + np.linalg.norm(T3) + np.linalg.norm(Q)
    return res, float(np.linalg.norm(res) / max(denom, 1e-300))


def solve_care(F, G, Q, R, residual_tol=1e-9):
    """Stabilizing solution of F^T P + P F - P G R^-1 G^T P + Q = 0.

    Method: diagonal balancing of F, ordered real Schur of the 2n Hamiltonian,
    P from the stable invariant subspace, then up to two Newton-Kleinman
    refinement steps through solve_lyapunov. Emits ConditioningWarning when
    the subspace basis is ill-conditioned.
    """
    F = _check_square(F)
    Q = _check_square(Q)
    G = np.atleast_2d(np.asarray(G, dtype=float))
    R = _check_square(R)
    n, m = G.shape
    if F.shape[0] != n or Q.shape[0] != n or R.shape[0] != m:
        raise InvalidArgumentError("inconsistent CARE dimensions")
    if np.linalg.norm(R - R.T) > 1e-10 * max(np.linalg.norm(R), 1.0):
        raise InvalidArgumentError("R must be symmetric")
    if np.any(np.linalg.eigvalsh((R + R.T) / 2.0) <= 0):
        raise InvalidArgumentError("R must be positive definite")
    if np.linalg.norm(Q - Q.T) > 1e-10 * max(np.linalg.norm(Q), 1.0):
        raise InvalidArgumentError("Q must be symmetric")

    _, Dmat = matrix_balance(F, permute=False, separate=False)
    d = np.diag(Dmat)
    Fb = F * (d[None, :] / d[:, None])
    Gb = G / d[:, None]
    Qb = Q * (d[:, None] * d[None, :])
    S = Gb @ np.linalg.solve(R, Gb.T)
    H = np.block([[Fb, -S], [-Qb, -Fb.T]])
    try:
        _, Z, sdim = schur(H, output="real", sort="lhp")
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Hamiltonian Schur failed: {exc}") from exc
    if sdim != n:
        raise SynthesisError(
            f"Hamiltonian has {sdim} strictly stable eigenvalues, expected {n}; "
            "system not stabilizable/detectable"
        )
    U1, U2 = Z[:n, :n], Z[n:, :n]
    cond = np.linalg.cond(U1)
    if cond > 1e12:
        warnings.warn(
            f"invariant subspace basis condition {cond:.2e} exceeds 1e12", ConditioningWarning
        )
    try:
        Pb = np.linalg.solve(U1.T, U2.T).T
    except np.linalg.LinAlgError as exc:
        raise SynthesisError(
            "stable invariant subspace is not a graph; system not stabilizable/detectable"
        ) from exc
    Pb = (Pb + Pb.T) / 2.0
    P = Pb * np.outer(1.0 / d, 1.0 / d)

    _, rel = _care_residual(F, G, Q, R, P)
    for _ in range(2):
        if rel <= residual_tol * 0.1:
            break
        K = np.linalg.solve(R, G.T @ P)
        Acl = F - G @ K
        try:
            P_new = solve_lyapunov(Acl, Q + K.T @ R @ K)
        except SingularEquationError:
            break
        _, rel_new = _care_residual(F, G, Q, R, P_new)
        if rel_new >= rel:
            break
        P, rel = P_new, rel_new
    if rel > residual_tol:
        raise ConvergenceError(f"CARE residual {rel:.3e} above {residual_tol}", residual=rel)

    eigP = np.linalg.eigvalsh(P)
    if eigP.min() < -1e-10 * max(np.abs(eigP).max(), 1.0):
        raise SynthesisError(f"CARE solution indefinite (min eigenvalue {eigP.min():.3e})")
    Acl = F - G @ np.linalg.solve(R, G.T @ P)
    if eigenvalues(Acl).abscissa >= 0:
        raise SynthesisError("closed loop not Hurwitz; stabilizing solution not found")
    return P


def riccati_ode_oracle(F, G, Q, R, horizon=400.0, dt=0.005):
    """Independent CARE oracle: march the matrix Riccati ODE to its rest point.

    Integrates dP/ds = F^T P + P F - P G R^-1 G^T P + Q from P = 0 with RK4
    (this is the finite-horizon backward Riccati equation in reversed time,
    so its rest point is the stabilizing CARE solution). Test-scale only.
    """
    F = _check_square(F)
    n = F.shape[0]
    if n > 10:
        raise InvalidArgumentError("oracle restricted to n <= 10")
    G = np.atleast_2d(np.asarray(G, dtype=float))
    Q = np.asarray(Q, dtype=float)
    Rinv = np.linalg.inv(np.asarray(R, dtype=float))

    def f(P):
        return F.T @ P + P @ F - P @ G @ Rinv @ G.T @ P + Q

    P = np.zeros((n, n))
    steps = int(round(horizon / dt))
    for s in range(steps):
        k1 = f(P)
        if s % 20 == 0 and np.linalg.norm(k1) <= 1e-10:
            return (P + P.T) / 2.0
        k2 = f(P + 0.5 * dt * k1)
        k3 = f(P + 0.5 * dt * k2)
        k4 = f(P + dt * k3)
        P = P + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        P = (P + P.T) / 2.0
        if not np.all(np.isfinite(P)):
            raise OracleError(f"Riccati ODE diverged at s = {s * dt:.3g}")
    if np.linalg.norm(f(P)) <= 1e-10:
        return (P + P.T) / 2.0
    raise OracleError(f"Riccati ODE not at rest after horizon {horizon}")
