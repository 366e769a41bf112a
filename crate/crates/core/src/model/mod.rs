//! Hamiltonian builders (single force, bichromatic drive, dual force) and the
//! closed-form effective generalized-squeezing interactions.

mod calibration;
mod effective;
mod interaction;
mod ramp;
mod sdf;
mod td;

pub use calibration::{CalibrationPoint, ForceBasis, PowerCalibration};
pub use effective::{
    direct_drive_strength, effective_hamiltonian_matrix, effective_interaction, effective_motional_op,
    magnus_error_estimate, EffectiveInteraction,
};
pub use interaction::InteractionConfig;
pub use ramp::{ramp_envelope, PulseConvention, RampShape};
pub use sdf::{
    add_bichromatic, add_sdf_rwa, bichromatic_hamiltonian, effective_sdf_strength, sdf_hamiltonian_rwa,
    BichromaticParams, BichromaticRegime, SdfParams,
};
pub use td::{Coeff, TdHamiltonian};
