"""Hyperbolic transport models: fixed-bed reactor (patch control) and LWR traffic (point control).

Both concrete models are expressed through a common abstraction: a diagonal
transport-coefficient field D(x, zeta), a non-transport source term, its
state linearization E(x, zeta), and a finite set of control channels with
either patch (interval) or point (location) spatial footprint.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, DomainError, InvalidArgumentError, SingularityError

__all__ = [
    "PatchActuation",
    "PointActuation",
    "patch_indicator",
    "HyperbolicModel",
    "ReactorParams",
    "TrafficParams",
    "greenshields_velocity",
    "greenshields_flux",
    "reactor_model",
    "traffic_model",
    "load_config",
]


@dataclass(frozen=True)
class PatchActuation:
    """m intervals [a_j, b_j] with pairwise-disjoint interiors.

    A shared endpoint belongs to the patch on its right: every interval is
    treated as half-open [a_j, b_j), except the last, which is closed.
    """

    intervals: tuple

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        for a, b in ivs:
            if not a < b:
                raise InvalidArgumentError(f"degenerate patch interval [{a}, {b}]")
        for (a1, b1), (a2, b2) in zip(ivs, ivs[1:]):
            if b1 > a2:
                raise InvalidArgumentError("patch interiors overlap")

    @property
    def n_channels(self):
        return len(self.intervals)


@dataclass(frozen=True)
class PointActuation:
    """m actuation locations 0 <= a_1 < ... < a_m <= L."""

    locations: tuple

    def __post_init__(self):
        locs = tuple(float(a) for a in self.locations)
        object.__setattr__(self, "locations", locs)
        if any(b <= a for a, b in zip(locs, locs[1:])):
            raise InvalidArgumentError("point locations must be strictly increasing")

    @property
    def n_channels(self):
        return len(self.locations)


def patch_indicator(x, j, act):
    """Characteristic function of patch j (1-based), with right-ownership of shared endpoints."""
    if not isinstance(act, PatchActuation):
        raise InvalidArgumentError("patch_indicator requires patch actuation")
    if not 1 <= j <= act.n_channels:
        raise InvalidArgumentError(f"channel {j} out of range 1..{act.n_channels}")
    a, b = act.intervals[j - 1]
    if j == act.n_channels:
        return 1 if a <= x <= b else 0
    return 1 if a <= x < b else 0


@dataclass(frozen=True)
class HyperbolicModel:
    """First-order hyperbolic model dz/dt = D(x,z) dz/dx + source(x,z) + controls.

    All evaluators are pure and vectorized over nodes: for x of shape (K,)
    and states Z of shape (n, K), D and source return (n, K) and E returns
    (n, n, K). D holds the diagonal entries of the transport matrix.
    """

    name: str
    n_states: int
    n_controls: int
    actuation: object
    D: Callable = field(repr=False)
    E: Callable = field(repr=False)
    source: Callable = field(repr=False)
    gain_vectors: np.ndarray = field(repr=False)  # (m, n), per-channel G_j
    inlet: np.ndarray = field(repr=False)  # reference boundary state at x = 0
    domain_length: float = 1.0


@dataclass(frozen=True)
class ReactorParams:
    """Fixed-bed reactor constants in normalized (theta1, theta2) coordinates.

    The shipped numeric defaults are illustrative, literature-inspired values
    chosen so the open-loop reactor settles to a smooth ignited-free steady
    profile; they are configuration inputs, not physical constants.
    """

    v1: float = 0.1
    v2: float = 1.0
    k1: float = 0.0582
    k2: float = 0.0582
    mu: float = 4.0
    beta: float = 0.3
    T_in: float = 320.0
    C_A_in: float = 4.0
    n_patches: int = 5

    def __post_init__(self):
        if self.v1 <= 0 or self.v2 <= 0:
            raise InvalidArgumentError("transport speeds must be positive")
        if self.beta < 0:
            raise InvalidArgumentError("jacket coefficient beta must be nonnegative")
        if self.n_patches < 1:
            raise InvalidArgumentError("need at least one jacket patch")


@dataclass(frozen=True)
class TrafficParams:
    """Freeway stretch parameters (Greenshields fundamental diagram)."""

    rho_M: float = 160.0
    rho_C: float = 80.0
    v_M: float = 2.0
    v_C: float = 1.0
    L: float = 10.0
    interchanges: tuple = (2.0, 4.0, 6.0, 8.0)
    injection_gains: tuple = (1.0, 1.0, 1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "interchanges", tuple(float(a) for a in self.interchanges))
        object.__setattr__(self, "injection_gains", tuple(float(g) for g in self.injection_gains))
        if abs(self.rho_C - self.rho_M / 2) > 1e-12 * self.rho_M:
            raise InvalidArgumentError("critical density must equal rho_M / 2")
        if abs(self.v_C - self.v_M / 2) > 1e-12 * self.v_M:
            raise InvalidArgumentError("critical speed must equal v_M / 2")
        a = self.interchanges
        if any(b <= x for x, b in zip(a, a[1:])) or a[0] <= 0 or a[-1] >= self.L:
            raise InvalidArgumentError("interchanges must be strictly increasing inside (0, L)")
        if len(self.injection_gains) != len(a):
            raise InvalidArgumentError("one injection gain per interchange")


def greenshields_velocity(rho, p):
    """Equilibrium speed v = v_M (1 - rho/rho_M)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or np.any(rho > p.rho_M):
        raise DomainError(f"density outside [0, {p.rho_M}]")
    return p.v_M * (1.0 - rho / p.rho_M)


def greenshields_flux(rho, p):
    """Equilibrium flux q = v(rho) * rho, maximal at the critical density."""
    return greenshields_velocity(rho, p) * np.asarray(rho, dtype=float)


def reactor_model(p=None):
    """Two-state fixed-bed reactor with jacket temperature control on n_patches sections."""
    p = p or ReactorParams()
    m = p.n_patches
    width = 1.0 / m
    act = PatchActuation(tuple((width * j, width * (j + 1)) for j in range(m)))

    def arrhenius(theta1):
        denom = 1.0 + theta1
        if np.any(denom <= 1e-9):
            raise SingularityError("Arrhenius term evaluated at theta1 <= -1")
        return np.exp(p.mu * theta1 / denom)

    def D(x, Z):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty((2, x.size))
        out[0] = -p.v1
        out[1] = -p.v2
        return out

    def source(x, Z):
        t1, t2 = Z[0], Z[1]
        ex = arrhenius(t1)
        return np.stack([
            p.k1 * (1.0 - t2) * ex - p.beta * t1,
            p.k2 * (1.0 - t2) * ex,
        ])

    def E(x, Z):
        # Linearized reaction coefficients about the given state; the jacket
        # relaxation -beta*theta1 is deliberately not folded in here, so the
        # columns keep the k1:k2 row ratio of the reaction stoichiometry.
        t1, t2 = Z[0], Z[1]
        ex = arrhenius(t1)
        col1 = ex * (1.0 - t2) / (1.0 + t1) ** 2
        out = np.empty((2, 2) + t1.shape)
        out[0, 0] = p.k1 * p.mu * col1
        out[0, 1] = -p.k1 * ex
        out[1, 0] = p.k2 * p.mu * col1
        out[1, 1] = -p.k2 * ex
        return out

    gains = np.zeros((m, 2))
    gains[:, 0] = p.beta
    return HyperbolicModel(
        name="reactor",
        n_states=2,
        n_controls=m,
        actuation=act,
        D=D,
        E=E,
        source=source,
        gain_vectors=gains,
        inlet=np.zeros(2),
        domain_length=1.0,
    )


def traffic_model(p=None):
    """Scalar LWR density model with metered-ramp point injection at the interchanges."""
    p = p or TrafficParams()
    act = PointActuation(p.interchanges)

    def D(x, Z):
        return -p.v_M * (1.0 - 2.0 * Z / p.rho_M)

    def E(x, Z):
        return np.zeros((1, 1) + np.shape(Z[0]))

    def source(x, Z):
        return np.zeros_like(Z)

    gains = np.array([[g] for g in p.injection_gains])
    return HyperbolicModel(
        name="traffic",
        n_states=1,
        n_controls=len(p.interchanges),
        actuation=act,
        D=D,
        E=E,
        source=source,
        gain_vectors=gains,
        inlet=np.array([0.9 * p.rho_C]),
        domain_length=p.L,
    )


_REACTOR_KEYS = {"v1", "v2", "k1", "k2", "mu", "beta", "T_in", "C_A_in", "n_patches"}
_TRAFFIC_KEYS = {"rho_M", "rho_C", "v_M", "v_C", "L", "interchanges", "injection_gains"}


def load_config(data):
    """Parse a configuration mapping with top-level `reactor` and `traffic` sections.

    Unknown keys are rejected at every level. Returns (ReactorParams, TrafficParams),
    each falling back to defaults when its section is absent.
    """
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a JSON object")
    allowed = {"schema_version", "reactor", "traffic"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown top-level configuration keys: {sorted(unknown)}")

    def section(name, keys, cls):
        sec = data.get(name, {})
        if not isinstance(sec, dict):
            raise ConfigError(f"configuration section '{name}' must be an object")
        bad = set(sec) - keys
        if bad:
            raise ConfigError(f"unknown keys in '{name}' section: {sorted(bad)}")
        try:
            return cls(**sec)
        except TypeError as exc:
            raise ConfigError(f"bad '{name}' section: {exc}") from exc

    return (
        section("reactor", _REACTOR_KEYS, ReactorParams),
        section("traffic", _TRAFFIC_KEYS, TrafficParams),
    )
