"""Epstein zeta functions of 3D lattices and Riesz / Lennard-Jones ground states.

The package evaluates lattice sums sum' |p|^-s (halved, energy per point)
with analytic continuation to every real s except the pole at s = 3, both
through closed theta-integral forms for the named structures (SC, FCC, BCC,
SH, HCP) and through a generic Ewald split for arbitrary periodic sets.  On
top of that sit Riesz and Lennard-Jones energy models, a multistart
Nelder-Mead minimizer over the Grenier fundamental domain, and sweep drivers
plus a CLI that emit phase-diagram and difference-curve data as CSV/JSON
(optionally rendered to figures).
"""

from .lattice import (
    Basis,
    LatticeParams,
    PeriodicSet,
    QuadraticForm,
    StructureLabel,
    basis_from_params,
    classify,
    in_grenier_domain,
    named_structure,
    quadratic_form,
)
from .zeta import (
    PoleError,
    ZetaResult,
    direct_sum,
    zeta_bcc,
    zeta_fcc,
    zeta_general,
    zeta_hcp,
    zeta_of,
    zeta_sc,
    zeta_sh,
)
from .energy import (
    EnergyValue,
    LJExponents,
    lj_energy,
    lj_energy_from_zetas,
    lj_optimal_volume,
    riesz_energy,
)
from .optimize import (
    MinimizeConfig,
    MinimizerReport,
    NonConvergenceError,
    minimize_fixed_volume,
    minimize_global,
    minimize_sh_delta,
)

__all__ = [
    "Basis",
    "EnergyValue",
    "LJExponents",
    "LatticeParams",
    "MinimizeConfig",
    "MinimizerReport",
    "NonConvergenceError",
    "PeriodicSet",
    "PoleError",
    "QuadraticForm",
    "StructureLabel",
    "ZetaResult",
    "basis_from_params",
    "classify",
    "direct_sum",
    "in_grenier_domain",
    "lj_energy",
    "lj_energy_from_zetas",
    "lj_optimal_volume",
    "minimize_fixed_volume",
    "minimize_global",
    "minimize_sh_delta",
    "named_structure",
    "quadratic_form",
    "riesz_energy",
    "zeta_bcc",
    "zeta_fcc",
    "zeta_general",
    "zeta_hcp",
    "zeta_of",
    "zeta_sc",
    "zeta_sh",
]

__version__ = "0.1.0"
