"""Weak-strong cluster networks on Chimera graphs.

Construction of frustrated cluster-pair instances, a family of Monte Carlo
solvers (single-spin annealing through cluster and subspace methods), and the
statistical machinery (success probabilities, time-to-solution, scaling fits,
overlap landscapes, two-level adiabatic model) used to benchmark them.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .instance import (
    ChimeraCoord,
    ChimeraGraph,
    InstanceFormatError,
    ProblemInstance,
    ValidationError,
    WeakStrongLayout,
    build_chimera,
    chain_layout,
    generate_network,
    ladder_layout,
    brute_force_ground_state,
    parse_instance,
    serialize_instance,
)
from .mcmc import (
    Schedule,
    SpinState,
    derive_rng,
    geometric_temperature_ladder,
    linear_beta_schedule,
    metropolis_sweep,
)

__all__ = [
    "ChimeraCoord",
    "ChimeraGraph",
    "InstanceFormatError",
    "ProblemInstance",
    "Schedule",
    "SpinState",
    "ValidationError",
    "WeakStrongLayout",
    "build_chimera",
    "brute_force_ground_state",
    "chain_layout",
    "derive_rng",
    "generate_network",
    "geometric_temperature_ladder",
    "ladder_layout",
    "linear_beta_schedule",
    "metropolis_sweep",
    "parse_instance",
    "serialize_instance",
    "__version__",
]
