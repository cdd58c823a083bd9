"""Exact Ising thermodynamics on triangular tori via Kac-Ward determinants.

The package pairs every closed-form route (Kac-Ward determinants, momentum
product formulas, cylinder/plane free-energy integrals, the CDCL critical
line, the transverse-field chain) with an independent desk-scale oracle
(brute-force enumeration, even-subgraph sums, transfer matrices, exact
diagonalization).  `kacward verify` runs the whole identity suite.
"""

__version__ = "0.1.0"

from .lattice import Couplings, Direction, DirectedEdge, TorusSpec
from .projection import EvenSubgraph, FaithfulProjection, faithful_projection
from .determinants import MomentumPoint, kacward_partition_pair
from .quadrature import QuadratureError, QuadratureSpec
from .thermo import (
    GHDecomposition,
    ThermoSample,
    cylinder_free_energy,
    eval_gh,
    free_energy_derivatives,
    log_singularity_fit,
    plane_free_energy,
    plane_thermo_sample,
)
from .critical import CriticalResult, a_of_beta, beta_c_from_J3, j_of_t, min_h
from .quantum import (
    QuantumParams,
    exact_diag_free_energy,
    ground_state_energy,
    gse_second_derivative,
    quantum_free_energy,
    trotter_free_energy,
)
from .oracle import (
    brute_force_Z,
    cylinder_free_energy_tm,
    even_subgraph_sums,
    transfer_matrix,
)

__all__ = [
    "Couplings",
    "CriticalResult",
    "Direction",
    "DirectedEdge",
    "EvenSubgraph",
    "FaithfulProjection",
    "GHDecomposition",
    "MomentumPoint",
    "QuadratureError",
    "QuadratureSpec",
    "QuantumParams",
    "ThermoSample",
    "TorusSpec",
    "a_of_beta",
    "beta_c_from_J3",
    "brute_force_Z",
    "cylinder_free_energy",
    "cylinder_free_energy_tm",
    "eval_gh",
    "even_subgraph_sums",
    "exact_diag_free_energy",
    "faithful_projection",
    "free_energy_derivatives",
    "ground_state_energy",
    "gse_second_derivative",
    "j_of_t",
    "kacward_partition_pair",
    "log_singularity_fit",
    "min_h",
    "plane_free_energy",
    "plane_thermo_sample",
    "quantum_free_energy",
    "transfer_matrix",
    "trotter_free_energy",
]
