"""Classical simulator and experiment harness for brick-wall circuit
preparation of SSH chain ground states."""

__version__ = "0.1.0"

from .model import (
    BoundaryCondition,
    ClosedShellError,
    EigensolverError,
    SshParams,
    SingleParticleHamiltonians,
    build_hamiltonians,
    exact_ground_state,
    elliptic_e2,
    energy_per_site_thermo,
    energy_per_site_thermo_signed,
)
from .gaussian import SlaterState, apply_layer, correlation, energy, initial_state, overlap

__all__ = [
    "BoundaryCondition",
    "ClosedShellError",
    "EigensolverError",
    "SshParams",
    "SingleParticleHamiltonians",
    "build_hamiltonians",
    "exact_ground_state",
    "elliptic_e2",
    "energy_per_site_thermo",
    "energy_per_site_thermo_signed",
    "SlaterState",
    "apply_layer",
    "correlation",
    "energy",
    "initial_state",
    "overlap",
    "__version__",
]
