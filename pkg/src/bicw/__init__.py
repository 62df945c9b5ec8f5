"""Two-population mean-field Ising model toolkit.

Exact finite-N Glauber simulation through the lumped spin-count chain,
master-equation transient and stationary analysis, the infinite-volume
magnetization dynamics, and the zero-field phase-diagram engine.
"""

from .master import (
    LumpedGenerator,
    build_generator,
    evolve,
    evolve_grid,
    gibbs_distribution,
    initial_distribution,
    mean_magnetization,
    stationary,
    stationary_nullspace,
)
from .meanfield import (
    OdeConfig,
    eigenvalues,
    integrate,
    integrate_grid,
    jacobian,
    measure_rhs,
    spin_distributions,
    stability_matrix,
    vector_field,
)
from .model import (
    ModelParams,
    PopulationSizes,
    cramer_entropy,
    flip_rate,
    free_energy,
    free_energy_gradient,
    free_energy_hessian,
    gibbs_log_weight,
    hamiltonian,
    interaction_field,
    magnetization,
)
from .phase import (
    EquilibriumPoint,
    FreeEnergyReport,
    PhaseRegion,
    SweepRow,
    find_equilibria,
    free_energy_check,
    j12_critical,
    j12_tangency_critical,
    nullcline1,
    nullcline2,
    phase_region,
    sweep,
    tangency_residual,
)
from .simulate import (
    EnsembleStats,
    SimConfig,
    Trajectory,
    ensemble,
    init_state,
    make_grid,
    simulate,
    step,
    stream,
    total_rates,
)
from .validation import (
    LlnReport,
    LlnRow,
    detailed_balance_gap,
    lln_experiment,
    master_vs_ode,
    mc_vs_master,
)

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "PopulationSizes",
    "SimConfig",
    "Trajectory",
    "EnsembleStats",
    "OdeConfig",
    "LumpedGenerator",
    "EquilibriumPoint",
    "PhaseRegion",
    "FreeEnergyReport",
    "SweepRow",
    "LlnReport",
    "LlnRow",
    "magnetization",
    "interaction_field",
    "flip_rate",
    "hamiltonian",
    "gibbs_log_weight",
    "cramer_entropy",
    "free_energy",
    "free_energy_gradient",
    "free_energy_hessian",
    "stream",
    "init_state",
    "total_rates",
    "step",
    "simulate",
    "ensemble",
    "make_grid",
    "build_generator",
    "initial_distribution",
    "evolve",
    "evolve_grid",
    "stationary",
    "stationary_nullspace",
    "gibbs_distribution",
    "mean_magnetization",
    "vector_field",
    "jacobian",
    "stability_matrix",
    "eigenvalues",
    "integrate",
    "integrate_grid",
    "spin_distributions",
    "measure_rhs",
    "nullcline1",
    "nullcline2",
    "find_equilibria",
    "j12_critical",
    "j12_tangency_critical",
    "tangency_residual",
    "phase_region",
    "sweep",
    "free_energy_check",
    "detailed_balance_gap",
    "lln_experiment",
    "mc_vs_master",
    "master_vs_ode",
]
