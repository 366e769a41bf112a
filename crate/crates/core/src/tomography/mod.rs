//! Probe-splitting readout, squeezing fits, characteristic-function and
//! Wigner reconstruction, and blue-sideband population analysis.

mod characteristic;
mod fit;
mod sideband;
mod splitting;
mod wigner;

pub use characteristic::{
    characteristic_function, squeezed_characteristic, symmetric_axis, uniform_spacing, vacuum_characteristic,
    CharacteristicGrid, ChiMethod,
};
pub use fit::{fit_squeezing_parameter, FitOptions, HeatingInFit, SqueezingFit};
pub use sideband::{fit_fock_populations, simulate_blue_sideband, FockFit, SidebandParams};
pub use splitting::{
    analytic_splitting, simulate_probe_splitting, squeezing_db, ProbeParams, SpinReadout, SplittingModel,
};
pub use wigner::{wigner_from_characteristic, WignerGrid, DEFAULT_PAD};
