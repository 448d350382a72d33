import numpy as np
import pytest

from hyplqr.care import eigenvalues
from hyplqr.errors import InvalidArgumentError
from hyplqr.grid import make_grid
from hyplqr.linearize import (
    LinearCoefficients,
    build_system,
    build_weights,
    discretize,
    linearize,
)
from hyplqr.models import (
    ReactorParams,
    TrafficParams,
    reactor_model,
    traffic_model,
)
from hyplqr.profiles import Profile, traffic_profile


def _zero_reactor_profile(N=20):
    g = make_grid(1.0, N)
    return Profile(grid=g, values=np.zeros((2, N + 1)), reference_controls=np.full(5, 0.25))


def test_reactor_E0_at_zero_profile():
    p = ReactorParams()
    m = reactor_model(p)
    co = linearize(m, _zero_reactor_profile())
    expected = np.array([[p.k1 * p.mu, -p.k1], [p.k2 * p.mu, -p.k2]])
    for k in range(co.E0.shape[2]):
        assert co.E0[:, :, k] == pytest.approx(expected)
    # column ratios k1 : k2 between the rows, at every node
    assert co.E0[0, 0] / co.E0[1, 0] == pytest.approx(p.k1 / p.k2)
    assert co.E0[0, 1] / co.E0[1, 1] == pytest.approx(p.k1 / p.k2)


def test_reactor_gain_rows():
    m = reactor_model()
    co = linearize(m, _zero_reactor_profile())
    assert np.all(co.G0[:, 1] == 0.0)  # control only enters the temperature row
    assert np.all(co.G0[:, 0] == ReactorParams().beta)


def test_traffic_D0_on_first_segment():
    p = TrafficParams()
    pr = traffic_profile(p, make_grid(10.0, 100))
    co = linearize(traffic_model(p), pr)
    x = pr.grid.nodes[1:]
    assert co.D0[0, x < 2.0] == pytest.approx(-0.2)


def test_traffic_F_entries_and_G_rows():
    p = TrafficParams()
    pr = traffic_profile(p, make_grid(10.0, 100))
    m = traffic_model(p)
    co = linearize(m, pr)
    F, G = discretize(co, m.actuation)
    # nodes strictly inside [0, 2): rows 0..18 (nodes xi_1..xi_19)
    for k in range(19):
        assert F[k, k] == pytest.approx(-2.0)
        if k > 0:
            assert F[k, k - 1] == pytest.approx(2.0)
    rows = set(np.flatnonzero(np.any(G != 0.0, axis=1)) + 1)  # 1-based node ids
    assert rows == {20, 40, 60, 80}
    for j, k in enumerate((20, 40, 60, 80)):
        assert G[k - 1, j] == 1.0
    _, Gd = discretize(co, m.actuation, point_scaling="delta")
    assert Gd[19, 0] == pytest.approx(1.0 / pr.grid.h)


def test_reactor_G_patch_columns():
    m = reactor_model()
    pr = _zero_reactor_profile(N=100)
    co = linearize(m, pr)
    _, G = discretize(co, m.actuation)
    beta = ReactorParams().beta
    # channel 1 covers nodes xi_1..xi_19 ([0, 0.2) with right ownership of 0.2)
    col = G[:, 0]
    temp_rows = col[0::2]
    assert np.all(temp_rows[:19] == beta)
    assert np.all(temp_rows[19:] == 0.0)
    assert np.all(G[1::2, :] == 0.0)  # concentration rows untouched
    # every interior node is covered by exactly one channel
    assert np.all(np.sum(G[0::2, :] != 0.0, axis=1) == 1)


def test_F_sparsity_and_row_sums():
    p = TrafficParams()
    pr = traffic_profile(p, make_grid(10.0, 50))
    m = traffic_model(p)
    F, _ = discretize(linearize(m, pr), m.actuation)
    N = 50
    for k in range(N):
        nz = np.flatnonzero(F[k])
        expected = {k} if k == 0 else {k - 1, k}
        assert set(nz) <= expected
    sums = F.sum(axis=1)
    assert sums[1:] == pytest.approx(np.zeros(N - 1), abs=1e-12)
    assert sums[0] == pytest.approx(F[0, 0])


def test_traffic_open_loop_spectrum_is_diagonal():
    p = TrafficParams()
    pr = traffic_profile(p, make_grid(10.0, 50))
    m = traffic_model(p)
    F, _ = discretize(linearize(m, pr), m.actuation)
    diag = np.sort(np.diag(F))
    assert np.all(np.diag(F) < 0.0)
    lam = np.sort([v.real for v in eigenvalues(F)])
    assert lam == pytest.approx(diag)


def test_build_weights_modes():
    g = make_grid(10.0, 100)
    Q, R = build_weights(g, 1, 4, "cell-width")
    assert np.array_equal(Q, 0.1 * np.eye(100))
    assert np.array_equal(R, np.eye(4))
    g1 = make_grid(1.0, 100)
    Q, R = build_weights(g1, 2, 5, "unit")
    assert np.array_equal(Q, np.eye(200))
    assert np.array_equal(R, np.eye(5))
    Q, _ = build_weights(make_grid(10.0, 10), 1, 1, "cell-width")
    assert np.array_equal(Q, np.eye(10))
    with pytest.raises(InvalidArgumentError):
        build_weights(g, 1, 4, "trapezoid")


def test_discretize_commutes_with_state_relabeling():
    m = reactor_model()
    pr = _zero_reactor_profile(N=10)
    co = linearize(m, pr)
    F, G = discretize(co, m.actuation)
    # swap the two state labels everywhere
    sw = [1, 0]
    co_sw = LinearCoefficients(
        grid=co.grid,
        n_states=2,
        D0=co.D0[sw],
        E0=co.E0[np.ix_(sw, sw)],
        G0=co.G0[:, sw],
        actuation=co.actuation,
    )
    F_sw, G_sw = discretize(co_sw, m.actuation)
    perm = np.arange(20).reshape(10, 2)[:, ::-1].ravel()
    assert F_sw == pytest.approx(F[np.ix_(perm, perm)])
    assert G_sw == pytest.approx(G[perm])


def test_point_actuator_must_sit_on_grid():
    p = TrafficParams(interchanges=(2.0, 4.0, 6.0, 8.5), injection_gains=(1, 1, 1, 1))
    m = traffic_model(p)
    g = make_grid(10.0, 10)
    pr = Profile(grid=g, values=np.full((1, 11), 72.0), reference_controls=np.full(4, 1.6))
    with pytest.raises(InvalidArgumentError):
        discretize(linearize(m, pr), m.actuation)


def test_build_system_metadata():
    p = TrafficParams()
    pr = traffic_profile(p, make_grid(10.0, 50))
    sys_ = build_system(traffic_model(p), pr, weighting="cell-width")
    assert sys_.n_dofs == 50
    assert sys_.weighting == "cell-width"
    assert np.allclose(sys_.Q, sys_.Q.T)
    assert np.all(np.linalg.eigvalsh(sys_.R) > 0)
