"""CSV round-tripping for matrices, profiles and trajectories.

Dialect: comma-separated, '.' decimal point, LF line endings, UTF-8, header
row mandatory. Numeric cells use %.17g so values survive a round trip at
full double precision.
"""

import csv

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "write_matrix_csv",
    "read_matrix_csv",
    "write_profile_csv",
    "write_kernel_csv",
    "write_spectrum_csv",
    "write_trajectory_csv",
    "write_control_csv",
]


def _fmt(v):
    return format(float(v), ".17g")


def _open_w(path):
    return open(path, "w", newline="\n", encoding="utf-8")


def write_matrix_csv(path, M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with _open_w(path) as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow([f"c{j}" for j in range(M.shape[1])])
        for row in M:
            w.writerow([_fmt(v) for v in row])
    return path


def read_matrix_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise InvalidArgumentError(f"empty CSV {path}")
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    return data


def write_profile_csv(path, profile):
    """One row per node: x,state_1,...,state_n."""
    n = profile.values.shape[0]
    with _open_w(path) as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["x"] + [f"state_{i + 1}" for i in range(n)])
        for k, x in enumerate(profile.grid.nodes):
            w.writerow([_fmt(x)] + [_fmt(profile.values[i, k]) for i in range(n)])
    return path


def write_kernel_csv(path, field):
    """Long format x1,x2,i,j,value over the kernel samples."""
    x = field.grid.nodes[1:]
    n = field.samples.shape[0]
    with _open_w(path) as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["x1", "x2", "i", "j", "value"])
        for i in range(n):
            for j in range(n):
                for k1, x1 in enumerate(x):
                    for k2, x2 in enumerate(x):
                        w.writerow(
                            [_fmt(x1), _fmt(x2), i + 1, j + 1, _fmt(field.samples[i, j, k1, k2])]
                        )
    return path


def write_spectrum_csv(path, spectrum):
    with _open_w(path) as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["re", "im"])
        for lam in spectrum.values:
            w.writerow([_fmt(lam.real), _fmt(lam.imag)])
    return path


def write_trajectory_csv(path, result, grid):
    """Long format t,x,state_index,value from snapshot frames."""
    with _open_w(path) as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["t", "x", "state_index", "value"])
        for ti, t in enumerate(result.snapshot_times):
            frame = result.snapshots[ti]
            for i in range(frame.shape[0]):
                for k, x in enumerate(grid.nodes):
                    w.writerow([_fmt(t), _fmt(x), i + 1, _fmt(frame[i, k])])
    return path


def write_control_csv(path, result):
    """Long format t,channel,u from logged control traces."""
    with _open_w(path) as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["t", "channel", "u"])
        for ti, t in enumerate(result.snapshot_times):
            for j in range(result.controls.shape[1]):
                w.writerow([_fmt(t), j + 1, _fmt(result.controls[ti, j])])
    return path
