"""Retrocausal hidden-variable simulator for a relativistic Bell experiment.

Both wings of an entangled spin pair are prepared in definite eigenstates of
their future measurement settings; each particle's packet and guided
position then evolve in that wing's own proper time. One wing riding a
relativistic rocket therefore accumulates less proper time, its
eigenpackets separate less, and the plate patterns differ between the wings
while the Bell correlations are untouched.
"""

__version__ = "0.1.0"

from .dynamics import (
    GridState,
    Trajectory,
    grid_evolve,
    guidance_velocity,
    integrate_trajectory,
    transport_positions,
)
from .ensemble import (
    EnsembleResult,
    ExperimentConfig,
    TrialRecord,
    WingParams,
    epistemic_density,
    readout,
    run_experiment,
    run_experiment_at,
    run_trial,
    sample_initial_position,
    sample_joint_spins,
    wing_marginal_mixture,
)
from .packets import (
    EARTH,
    FULL_VON_NEUMANN,
    ROCKET,
    TRANSLATION_ONLY,
    EvolutionMode,
    GaussianPacket,
    OnticState,
    density,
    evolve_packet,
    packet_overlap,
    phase_gradient,
)
from .relativity import (
    Cylinder,
    ProperTimes,
    RocketRoundTrip,
    Worldline,
    at_rest,
    constant_speed,
    make_round_trip,
    proper_time,
    scenario_proper_times,
)
from .spin import (
    Direction,
    SingletDecomposition,
    X_AXIS,
    Z_AXIS,
    angle_between,
    correlation_exact,
    eigenspinor,
    singlet_coefficients,
)
from .stats import (
    ChshResult,
    CorrelationEstimate,
    NoOutcomesError,
    PlateHistogram,
    chsh,
    chsh_details,
    correlation_estimate,
    ks_statistic,
    plate_histogram,
    spot_widths,
)

__all__ = [
    "__version__",
    "Direction",
    "SingletDecomposition",
    "X_AXIS",
    "Z_AXIS",
    "angle_between",
    "correlation_exact",
    "eigenspinor",
    "singlet_coefficients",
    "EvolutionMode",
    "GaussianPacket",
    "OnticState",
    "TRANSLATION_ONLY",
    "FULL_VON_NEUMANN",
    "ROCKET",
    "EARTH",
    "density",
    "evolve_packet",
    "packet_overlap",
    "phase_gradient",
    "GridState",
    "Trajectory",
    "grid_evolve",
    "guidance_velocity",
    "integrate_trajectory",
    "transport_positions",
    "Worldline",
    "RocketRoundTrip",
    "Cylinder",
    "ProperTimes",
    "at_rest",
    "constant_speed",
    "make_round_trip",
    "proper_time",
    "scenario_proper_times",
    "ExperimentConfig",
    "WingParams",
    "TrialRecord",
    "EnsembleResult",
    "epistemic_density",
    "readout",
    "run_experiment",
    "run_experiment_at",
    "run_trial",
    "sample_initial_position",
    "sample_joint_spins",
    "wing_marginal_mixture",
    "CorrelationEstimate",
    "ChshResult",
    "PlateHistogram",
    "NoOutcomesError",
    "chsh",
    "chsh_details",
    "correlation_estimate",
    "ks_statistic",
    "plate_histogram",
    "spot_widths",
]
