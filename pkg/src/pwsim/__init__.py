"""Pseudo-spectral pilot-wave simulator: a real Klein-Gordon field on a
periodic 2D grid, sourced by and guiding a relativistic point particle."""

from .field_core import (
    FieldBlowupError,
    FieldState,
    GridSpec,
    SourceSpec,
    SpectralGridError,
    build_source,
    dispersion_omega,
    field_angular_momentum,
    field_energy,
    field_momentum,
    group_velocity,
    sample_gradient,
    sample_value,
    source_hat,
    step_field,
)
from .particle_core import (
    CouplingParams,
    ParticleState,
    gamma_of,
    kick,
    kick_momentum,
    step_particle,
    velocity_of,
)
from .simulation import (
    SOURCE_CALIBRATION,
    ConfigError,
    RestartPoint,
    RunOutput,
    Scenario,
    SimConfig,
    default_config,
    relax_static,
    run,
    steady_packet_state,
    sweep,
)
from .diagnostics import (
    AmplitudeFit,
    BudgetSeries,
    Spectrogram,
    VirtualMassFit,
    budgets,
    dominant_frequency,
    energy_residual,
    fit_amplitude_scaling,
    highpass,
    local_wavenumber,
    momentum_retention,
    oscillation_amplitude,
    spectrogram,
    uncertainty_product,
    virtual_mass_fit,
)
from .io_formats import (
    emit_heatmap,
    parse_config,
    read_budgets,
    read_field_snapshot,
    read_report,
    read_spectrogram,
    read_trajectory,
    write_budgets,
    write_config_echo,
    write_field_snapshot,
    write_report,
    write_spectrogram,
    write_trajectory,
)
from . import theory

__version__ = "0.1.0"

__all__ = [
    "AmplitudeFit",
    "BudgetSeries",
    "ConfigError",
    "CouplingParams",
    "FieldBlowupError",
    "FieldState",
    "GridSpec",
    "ParticleState",
    "RestartPoint",
    "RunOutput",
    "SOURCE_CALIBRATION",
    "Scenario",
    "SimConfig",
    "SourceSpec",
    "SpectralGridError",
    "Spectrogram",
    "VirtualMassFit",
    "budgets",
    "build_source",
    "default_config",
    "dispersion_omega",
    "dominant_frequency",
    "emit_heatmap",
    "energy_residual",
    "field_angular_momentum",
    "field_energy",
    "field_momentum",
    "fit_amplitude_scaling",
    "gamma_of",
    "group_velocity",
    "highpass",
    "kick",
    "kick_momentum",
    "local_wavenumber",
    "momentum_retention",
    "oscillation_amplitude",
    "parse_config",
    "read_budgets",
    "read_field_snapshot",
    "read_report",
    "read_spectrogram",
    "read_trajectory",
    "relax_static",
    "run",
    "sample_gradient",
    "sample_value",
    "source_hat",
    "spectrogram",
    "steady_packet_state",
    "step_field",
    "step_particle",
    "sweep",
    "theory",
    "uncertainty_product",
    "velocity_of",
    "virtual_mass_fit",
    "write_budgets",
    "write_config_echo",
    "write_field_snapshot",
    "write_report",
    "write_spectrogram",
    "write_trajectory",
]
