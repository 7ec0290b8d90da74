"""Quasipotentials of stationary measures on the one-dimensional torus.

The vanishing-noise rate functional of a diffusion (or of a two-state
transport process) is computed three independent ways and cross-checked:
a window-max transform of the integrated potential, an optimal-tree
variational solve over the stable components, and direct log-domain
quadrature of the exact stationary density, backed by Monte Carlo and by a
viscosity-solution verifier for the stationary Hamilton-Jacobi equation.
"""

from .densities import (DensityCurve, PdmpSpec, diffusion_density,
                        pdmp_density, pdmp_potential, rate_convergence)
from .estimators import (FreidlinWentzellSolver, MaxwellTransform,
                         StationaryDensity)
from .fields import (ComponentChain, FieldSpec, SampledPotential,
                     ZeroComponent, as_field, find_components,
                     integrate_potential, parse_field, positive_mass,
                     scaled_field)
from .fw import (FwSolution, RootedTree, check_identities, comb_tree, solve,
                 v_costs, w_point, w_stable_bruteforce, w_stable_fast)
from .maxwell import (ConstructionTrace, QuasiPotential, phi_constructive,
                      phi_direct, phi_tilde, sliding_window_max,
                      sliding_window_min)
from .simulate import Histogram, simulate_diffusion, simulate_pdmp, tv_distance
from .viscosity import (Hamiltonian, ViscosityReport, builtin_hamiltonians,
                        check_viscosity, sub_super_differentials)

__version__ = "0.1.0"

__all__ = [
    "ComponentChain", "ConstructionTrace", "DensityCurve", "FieldSpec",
    "FreidlinWentzellSolver", "FwSolution", "Hamiltonian", "Histogram",
    "MaxwellTransform", "PdmpSpec", "QuasiPotential", "RootedTree",
    "SampledPotential", "StationaryDensity", "ViscosityReport",
    "ZeroComponent", "as_field", "builtin_hamiltonians", "check_identities",
    "check_viscosity", "comb_tree", "diffusion_density", "find_components",
    "integrate_potential", "parse_field", "pdmp_density", "pdmp_potential",
    "phi_constructive", "phi_direct", "phi_tilde", "positive_mass",
    "rate_convergence", "scaled_field", "simulate_diffusion", "simulate_pdmp",
    "sliding_window_max", "sliding_window_min", "solve",
    "sub_super_differentials", "tv_distance", "v_costs", "w_point",
    "w_stable_bruteforce", "w_stable_fast",
]
