"""LQR stabilization of first-order hyperbolic transport systems.

Pipeline: build a model, compute its reference profile, linearize and
discretize about it, solve the CARE for the feedback gain, then validate
with nonlinear closed-loop simulation and the kernel-level Riccati-PDE
residual diagnostic.
"""

__version__ = "0.1.0"

from .care import eigenvalues, real_schur, riccati_ode_oracle, solve_care, solve_lyapunov
from .errors import HyplqrError
from .grid import Grid, make_grid
from .linearize import build_system, build_weights, discretize, linearize
from .models import (
    HyperbolicModel,
    ReactorParams,
    TrafficParams,
    greenshields_flux,
    greenshields_velocity,
    load_config,
    patch_indicator,
    reactor_model,
    traffic_model,
)
from .profiles import Profile, solve_reactor_profile, steady_residual, traffic_profile
from .simulate import SimConfig, cfl_max_dt, decay_metrics, simulate_closed_loop
from .synthesis import (
    kernel_from_discrete,
    riccati_pde_residual,
    stability_margin,
    synthesize,
)
