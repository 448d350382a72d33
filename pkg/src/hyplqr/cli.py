"""Command-line front end: profiles, synthesis, simulation and diagnostics.

Exit codes: 1 invalid arguments/config, 2 profile solver failure,
3 synthesis failure, 4 CFL violation or divergence during simulation.
Every successful run writes a manifest.json listing the emitted artifacts;
the manifest is written last, so its absence marks a failed run.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__, io, svg
from .care import eigenvalues
from .errors import (
    CFLError,
    ConvergenceError,
    DivergenceError,
    HyplqrError,
    InvalidArgumentError,
    NumericalError,
    SynthesisError,
)
from .grid import make_grid
from .linearize import build_system
from .models import load_config, reactor_model, traffic_model
from .profiles import solve_reactor_profile, traffic_profile
from .simulate import SimConfig, cfl_max_dt, decay_metrics, simulate_closed_loop
from .synthesis import kernel_from_discrete, riccati_pde_residual, stability_margin, synthesize

_DEFAULT_WEIGHTS = {"reactor": "unit", "traffic": "cell-width"}


def _read_config(path):
    if path is None:
        return load_config({})
    if not os.path.exists(path):
        raise InvalidArgumentError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"config {path} is not valid JSON: {exc}") from exc
    return load_config(data)


def _pipeline_profile(args):
    rp, tp = _read_config(args.config)
    if args.model == "reactor":
        model = reactor_model(rp)
        grid = make_grid(model.domain_length, args.n_cells)
        nu0 = np.full(model.n_controls, 0.25)
        profile = solve_reactor_profile(model, grid, nu0)
    else:
        model = traffic_model(tp)
        grid = make_grid(model.domain_length, args.n_cells)
        profile = traffic_profile(tp, grid)
    return model, profile


def _out_dir(args):
    root = args.out or os.environ.get("HYPLQR_OUT") or "."
    os.makedirs(root, exist_ok=True)
    return root


def _write_manifest(args, out, artifacts, t0, extra=None):
    manifest = {
        "command": args.command,
        "config": args.config,
        "parameters": {
            "model": args.model,
            "n_cells": args.n_cells,
            "weights": getattr(args, "weights", None),
            "seed": getattr(args, "seed", None),
        },
        "out_dir": out,
        "artifacts": sorted(artifacts),
        "duration_s": round(time.time() - t0, 3),
        "version": __version__,
    }
    if extra:
        manifest.update(extra)
    path = os.path.join(out, "manifest.json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=1)
    return path


def cmd_profile(args):
    t0 = time.time()
    out = _out_dir(args)
    model, profile = _pipeline_profile(args)
    arts = [io.write_profile_csv(os.path.join(out, f"{args.model}_profile.csv"), profile)]
    for i in range(model.n_states):
        arts.append(
            svg.line_plot(
                os.path.join(out, f"{args.model}_profile_state{i + 1}.svg"),
                profile.grid.nodes,
                [profile.values[i]],
                labels=[f"state {i + 1}"],
                title=f"{args.model} reference profile, state {i + 1}",
                xlabel="x",
            )
        )
    _write_manifest(args, out, arts, t0)
    return 0


def _synth(args, model, profile):
    weighting = args.weights or _DEFAULT_WEIGHTS[args.model]
    sys_ = build_system(model, profile, weighting=weighting, point_scaling=args.point_scaling)
    return sys_, synthesize(sys_)


def cmd_linearize(args):
    t0 = time.time()
    out = _out_dir(args)
    model, profile = _pipeline_profile(args)
    weighting = args.weights or _DEFAULT_WEIGHTS[args.model]
    sys_ = build_system(model, profile, weighting=weighting, point_scaling=args.point_scaling)
    arts = sys_.export(out, stem=args.model)
    _write_manifest(args, out, arts, t0)
    return 0


def cmd_lqr(args):
    t0 = time.time()
    out = _out_dir(args)
    model, profile = _pipeline_profile(args)
    sys_, sol = _synth(args, model, profile)
    arts = sys_.export(out, stem=args.model)
    arts.append(io.write_matrix_csv(os.path.join(out, f"{args.model}_P.csv"), sol.P))
    arts.append(io.write_matrix_csv(os.path.join(out, f"{args.model}_K.csv"), sol.K))
    arts.append(
        io.write_spectrum_csv(
            os.path.join(out, f"{args.model}_spectrum.csv"), sol.closed_loop_spectrum
        )
    )
    field = kernel_from_discrete(sol.P, profile.grid, model.n_states, mode="raw")
    for i in range(model.n_states):
        arts.append(
            svg.heatmap(
                os.path.join(out, f"{args.model}_kernel_P{i + 1}{i + 1}.svg"),
                field.samples[i, i],
                extent=(0.0, profile.grid.length),
                title=f"cost kernel P_{i + 1},{i + 1}",
            )
        )
    lam = sol.closed_loop_spectrum.values[0]
    print(f"least stable closed-loop eigenvalue: {lam.real:.4f}{lam.imag:+.4f}j")
    print(f"stability margin: {stability_margin(sol):.4f}")
    _write_manifest(args, out, arts, t0, extra={"stability_margin": stability_margin(sol)})
    return 0


def _default_z0(args, model, profile):
    grid = profile.grid
    rng = np.random.default_rng(args.seed)
    amp = args.amplitude
    z0 = np.zeros((model.n_states, grid.n_cells + 1))
    base = np.sin(np.pi * grid.nodes / grid.length)
    if args.model == "traffic":
        z0[0] = amp * 80.0 * base
    else:
        for i in range(model.n_states):
            z0[i] = amp * base
    if args.seed is not None:
        z0 *= 1.0 + 0.0 * rng.standard_normal()  # seed reserved for future perturbations
    z0[:, 0] = 0.0
    return z0


def cmd_simulate(args):
    t0 = time.time()
    out = _out_dir(args)
    model, profile = _pipeline_profile(args)
    _, sol = _synth(args, model, profile)
    dt_max = cfl_max_dt(model, profile, 0.9, args.t_final)
    dt = args.dt or min(dt_max, args.t_final / 400)
    cfg = SimConfig(t_final=args.t_final, dt=dt, z0=_default_z0(args, model, profile))
    res = simulate_closed_loop(model, profile, sol.K, cfg)
    arts = [
        io.write_trajectory_csv(os.path.join(out, f"{args.model}_traj.csv"), res, profile.grid),
        io.write_control_csv(os.path.join(out, f"{args.model}_controls.csv"), res),
    ]
    envelopes = [res.norms]
    labels = ["closed loop"]
    if args.open_loop:
        K0 = np.zeros_like(sol.K)
        res_ol = simulate_closed_loop(model, profile, K0, cfg)
        envelopes.append(res_ol.norms)
        labels.append("open loop")
    arts.append(
        svg.line_plot(
            os.path.join(out, f"{args.model}_envelope.svg"),
            res.norm_times,
            envelopes,
            labels=labels,
            title=f"{args.model} displacement L2 norm",
            xlabel="t",
            ylabel="||z||",
        )
    )
    metrics = decay_metrics(res)
    metrics_path = os.path.join(out, f"{args.model}_metrics.json")
    with open(metrics_path, "w", encoding="utf-8") as f:
        json.dump({k: (v if np.isfinite(v) else None) for k, v in metrics.items()}, f, indent=1)
    arts.append(metrics_path)
    _write_manifest(args, out, arts, t0, extra={"dt": dt})
    return 0


def cmd_residual(args):
    t0 = time.time()
    out = _out_dir(args)
    if args.n_cells < 4:
        raise InvalidArgumentError("residual diagnostic needs at least 4 cells")
    rows = []
    arts = []
    for N in (50, 100, 200):
        ns = argparse.Namespace(**vars(args))
        ns.n_cells = N
        model, profile = _pipeline_profile(ns)
        sys_, sol = _synth(ns, model, profile)
        from .linearize import linearize as _lin

        co = _lin(model, profile)
        field = kernel_from_discrete(sol.P, profile.grid, model.n_states, mode="kernel")
        n = model.n_states
        Qk = np.zeros((n, n, N, N))
        # delta-concentrated state weight: Q = c I on the diagonal, kernel-scaled
        c = sys_.Q[0, 0]
        for k in range(N):
            Qk[:, :, k, k] = c * np.eye(n) / profile.grid.h**2
        res_field, res_max = riccati_pde_residual(
            field, co, Qk, sys_.R, point_scaling=args.point_scaling
        )
        rows.append((N, res_max))
        if N == args.n_cells:
            arts.append(
                io.write_matrix_csv(
                    os.path.join(out, f"{args.model}_rpd_residual_N{N}.csv"),
                    np.nan_to_num(res_field[0, 0]),
                )
            )
    table_path = os.path.join(out, f"{args.model}_rpd_table.csv")
    with open(table_path, "w", newline="\n", encoding="utf-8") as f:
        f.write("N,max_interior_residual\n")
        for N, r in rows:
            f.write(f"{N},{r:.17g}\n")
    arts.append(table_path)
    for N, r in rows:
        print(f"N = {N:4d}  max interior residual = {r:.6g}")
    _write_manifest(args, out, arts, t0)
    return 0


def cmd_eigs(args):
    t0 = time.time()
    out = _out_dir(args)
    model, profile = _pipeline_profile(args)
    weighting = args.weights or _DEFAULT_WEIGHTS[args.model]
    sys_ = build_system(model, profile, weighting=weighting, point_scaling=args.point_scaling)
    if args.closed_loop:
        sol = synthesize(sys_)
        spec = sol.closed_loop_spectrum
        stem = "closed"
    else:
        spec = eigenvalues(sys_.F)
        stem = "open"
    arts = [io.write_spectrum_csv(os.path.join(out, f"{args.model}_{stem}_spectrum.csv"), spec)]
    for lam in spec.values[:5]:
        print(f"{lam.real:.6g}{lam.imag:+.6g}j")
    _write_manifest(args, out, arts, t0)
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="hyplqr", description="LQR stabilization of hyperbolic transport models"
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default=None, help="JSON config path")
        sp.add_argument("--model", choices=("reactor", "traffic"), required=True)
        sp.add_argument("--out", default=None, help="output directory (default $HYPLQR_OUT or .)")
        sp.add_argument("--n-cells", type=int, default=100)
        sp.add_argument("--weights", choices=("unit", "cell-width"), default=None)
        sp.add_argument("--point-scaling", choices=("unit", "delta"), default="unit")
        sp.add_argument("--seed", type=int, default=None)

    sp = sub.add_parser("profile", help="compute and plot the reference profile")
    common(sp)
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("linearize", help="export the discretized LTI system")
    common(sp)
    sp.set_defaults(func=cmd_linearize)

    sp = sub.add_parser("lqr", help="synthesize the LQR feedback and export artifacts")
    common(sp)
    sp.set_defaults(func=cmd_lqr)

    sp = sub.add_parser("simulate", help="nonlinear closed-loop simulation")
    common(sp)
    sp.add_argument("--t-final", type=float, default=20.0)
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--amplitude", type=float, default=0.05)
    sp.add_argument("--open-loop", action="store_true")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("residual", help="Riccati-PDE residual mesh study")
    common(sp)
    sp.set_defaults(func=cmd_residual)

    sp = sub.add_parser("eigs", help="spectrum of the open or closed loop")
    common(sp)
    sp.add_argument("--closed-loop", action="store_true")
    sp.set_defaults(func=cmd_eigs)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (CFLError, DivergenceError) as exc:
        if args.command == "profile" and isinstance(exc, DivergenceError):
            print(f"solver error: {exc}", file=sys.stderr)
            return 2
        print(f"simulation error: {exc}", file=sys.stderr)
        return 4
    except (SynthesisError, NumericalError) as exc:
        print(f"synthesis error: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        stage = 2 if args.command == "profile" else 3
        print(f"solver error: {exc}", file=sys.stderr)
        return stage
    except HyplqrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
