"""Qubit thermal machine driven by coherent collisional reservoirs.

A single qubit repeatedly collides with fresh two-level ancillas drawn from
two baths at different temperatures whose ancillas may carry a small amount of
coherence in the energy basis. The package provides the finite-time collision
dynamics, the continuous-limit master equation with its closed-form steady
state, the full current accounting (coherent/incoherent heat and
coherent/collisional power), coherence-entropy rates with the local
second-law bound, and the machine-regime analysis (engine, refrigerator,
accelerator, hybrid refrigerator, including the beyond-Carnot zones opened by
bath coherence).
"""

__version__ = "0.1.0"

from .errors import ConfigError, NumericalError
from .linalg import (
    coherence_relative_entropy,
    hermitian_propagator,
    partial_trace,
    relative_entropy,
    tensor_product,
    trace_distance,
    validate_density_matrix,
    von_neumann_entropy,
)
from .model import (
    BathSpec,
    MachineParams,
    ancilla_state,
    coupling_strength,
    dissipation_rates,
    get_param,
    max_coherence_tau,
    params_from_config,
    params_to_config,
    thermal_occupation,
    with_param,
)
from .lindblad import (
    EffectiveCoherence,
    SteadyState,
    effective_coherence,
    generator_apply,
    generator_matrix,
    hamiltonian_correction,
    integrate,
    steady_state_analytic,
    steady_state_numeric,
)
from .thermo import (
    ThermoReport,
    coherence_rate_closed_form,
    common_factor_V,
    common_factor_V2,
    equivalent_single_bath_coherence,
    heat_currents,
    heat_currents_trace,
    internal_energy_rate,
    power,
    power_trace,
    second_law_residuals,
    thermo_report,
)
from .collision import (
    DEFAULT_TAU_LADDER,
    CollisionLedger,
    ExtrapolationResult,
    Trajectory,
    collide,
    convergence_to_steady_state,
    discrete_fixed_point,
    env_mutual_information,
    joint_hamiltonian,
    joint_hamiltonian_from_couplings,
    rate_extrapolate,
    run,
    write_trajectory_csv,
)
from .analysis import (
    AxisSpec,
    CurveResult,
    DiagramResult,
    Regime,
    RegimeLabel,
    SweepRecord,
    classify,
    cop,
    efficiency,
    epsilon_star,
    max_efficiency,
    otto_cop,
    otto_efficiency,
    power_efficiency_curve,
    reference_bounds,
    sweep_diagram,
)
