//! Declarative scenarios reproducing the figure-level experiments, run as
//! build → evolve → probe/tomography → fit → tabulate.

mod pipeline;
mod presets;
mod result;
mod runner;
mod scenario;
mod validation;

pub use pipeline::{
    add_shot_noise, fit_abs_sin, fit_effective, fit_slope, pad_density, rotational_asymmetry, tomography, EffectiveFit,
};
pub use presets::{calibration, preset, CARRIER_RABI_1MW, HEATING_RATE, LAMB_DICKE, NBAR, OSC_FREQ, PRESET_NAMES};
pub use result::{Column, Curve, Provenance, Quantity, ScenarioResult, Table};
pub use runner::run_scenario;
pub use scenario::{
    FitSpec, ForceSpec, HeatingFitMode, InteractionSpec, ProbeSpec, ScanAxis, ScanParam, Scenario, ScenarioKind,
    ShotNoise, SidebandSpec, SpinSpec, StrengthSpec, SystemSpec, TomographySpec,
};
pub use validation::{
    bichromatic_displacement_rate, heating_slope, infidelity_vs_detuning, loglog_slope, ScalingSetup,
};
