import numpy as np
import pytest

from hyplqr.errors import CFLError, InvalidArgumentError
from hyplqr.grid import make_grid
from hyplqr.models import TrafficParams, reactor_model, traffic_model
from hyplqr.profiles import solve_reactor_profile, traffic_profile
from hyplqr.simulate import SimConfig, SimResult, cfl_max_dt, decay_metrics, simulate_closed_loop
from hyplqr.synthesis import synthesize
from hyplqr.linearize import build_system


def _traffic_setup(N=50):
    p = TrafficParams()
    pr = traffic_profile(p, make_grid(10.0, N))
    m = traffic_model(p)
    sys_ = build_system(m, pr, weighting="cell-width")
    sol = synthesize(sys_)
    return m, pr, sys_, sol


def _sin_z0(pr, amp):
    z0 = amp * np.sin(np.pi * pr.grid.nodes / pr.grid.length)[None, :]
    z0[:, 0] = 0.0
    return z0


def test_equilibrium_preserved():
    m, pr, _, sol = _traffic_setup()
    cfg = SimConfig(t_final=5.0, dt=0.05, z0=np.zeros((1, 51)))
    res = simulate_closed_loop(m, pr, sol.K, cfg)
    assert np.abs(res.snapshots).max() <= 1e-12
    assert np.abs(res.controls).max() <= 1e-12


def test_equilibrium_preserved_reactor():
    m = reactor_model()
    g = make_grid(1.0, 50)
    pr = solve_reactor_profile(m, g, np.full(5, 0.25))
    sol = synthesize(build_system(m, pr, weighting="unit"))
    cfg = SimConfig(t_final=1.0, dt=0.002, z0=np.zeros((2, 51)))
    res = simulate_closed_loop(m, pr, sol.K, cfg)
    assert np.abs(res.snapshots).max() <= 1e-12


def test_cfl_max_dt_values():
    m, pr, _, _ = _traffic_setup(100)
    # |D| <= 0.2 on the profile, h = 0.1, safety 0.9, headroom 2
    assert cfl_max_dt(m, pr, 0.9) == pytest.approx(0.9 * 0.1 / (2 * 0.2))
    mr = reactor_model()
    g = make_grid(1.0, 100)
    prr = solve_reactor_profile(mr, g, np.full(5, 0.25))
    assert cfl_max_dt(mr, prr, 0.9) == pytest.approx(0.9 * 0.01 / 2.0)
    # transport-free model: unbounded step reported as t_final
    mz = traffic_model()
    from hyplqr.profiles import Profile

    flat = Profile(
        grid=make_grid(10.0, 10),
        values=np.full((1, 11), 80.0),
        reference_controls=np.full(4, 1.6),
    )
    assert cfl_max_dt(mz, flat, 0.9, t_final=7.0) == 7.0


def test_cfl_violation_raises():
    m, pr, _, sol = _traffic_setup()
    cfg = SimConfig(t_final=5.0, dt=2.0, z0=_sin_z0(pr, 4.0))
    with pytest.raises(CFLError):
        simulate_closed_loop(m, pr, sol.K, cfg)


def test_closed_loop_decay_and_control_bound():
    m, pr, _, sol = _traffic_setup()
    z0 = _sin_z0(pr, 0.05 * 80.0)
    cfg = SimConfig(t_final=10.0, dt=0.05, z0=z0)
    res = simulate_closed_loop(m, pr, sol.K, cfg)
    assert res.norms[-1] < res.norms[0]
    # |u_j(t)| <= ||K|| max_t ||z(t)|| (operator bound on the logged traces)
    zmax = max(np.linalg.norm(f[:, 1:].ravel()) for f in res.snapshots)
    bound = np.linalg.norm(sol.K, 2) * zmax
    assert np.abs(res.controls).max() <= bound + 1e-12


def test_rk4_step_refinement_order():
    m, pr, _, sol = _traffic_setup()
    z0 = _sin_z0(pr, 2.0)
    finals = {}
    for dt in (0.2, 0.1, 0.05):
        cfg = SimConfig(t_final=4.0, dt=dt, z0=z0)
        finals[dt] = simulate_closed_loop(m, pr, sol.K, cfg).snapshots[-1]
    e1 = np.linalg.norm(finals[0.2] - finals[0.1])
    e2 = np.linalg.norm(finals[0.1] - finals[0.05])
    assert 8.0 <= e1 / e2 <= 32.0


def test_boundary_displacement_injection():
    m, pr, _, sol = _traffic_setup()
    cfg = SimConfig(
        t_final=2.0, dt=0.05, z0=np.zeros((1, 51)), boundary=lambda t: np.array([1.0])
    )
    res = simulate_closed_loop(m, pr, sol.K, cfg)
    assert res.snapshots[-1][0, 0] == pytest.approx(1.0)
    assert np.abs(res.snapshots[-1]).max() > 0.0


def test_simulate_validates_shapes():
    m, pr, _, sol = _traffic_setup()
    with pytest.raises(InvalidArgumentError):
        simulate_closed_loop(m, pr, sol.K[:, :-1], SimConfig(t_final=1, dt=0.1, z0=np.zeros((1, 51))))
    with pytest.raises(InvalidArgumentError):
        simulate_closed_loop(m, pr, sol.K, SimConfig(t_final=1, dt=0.1, z0=np.zeros((1, 5))))
    with pytest.raises(InvalidArgumentError):
        SimConfig(t_final=1.0, dt=-0.1, z0=np.zeros((1, 51)))


def _synthetic_result(times, norms):
    z = np.zeros((len(times), 1, 3))
    return SimResult(
        snapshot_times=np.asarray(times),
        snapshots=z,
        controls=np.zeros((len(times), 1)),
        norm_times=np.asarray(times),
        norms=np.asarray(norms),
    )


def test_decay_metrics_exact_exponential():
    t = np.linspace(0.0, 10.0, 500)
    met = decay_metrics(_synthetic_result(t, np.exp(-t)))
    assert met["fitted_rate"] == pytest.approx(1.0, abs=1e-3)
    assert met["monotone_after"] == 0.0
    assert met["half_life"] == pytest.approx(np.log(2.0), rel=1e-2)


def test_decay_metrics_constant_envelope():
    t = np.linspace(0.0, 10.0, 100)
    met = decay_metrics(_synthetic_result(t, np.ones_like(t)))
    assert abs(met["fitted_rate"]) < 1e-12
    assert met["monotone_after"] == 0.0
    with pytest.raises(InvalidArgumentError):
        decay_metrics(_synthetic_result(t[:5], np.ones(5)))
