use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceBasis {
    Equatorial,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub power_mw: f64,
    pub basis: ForceBasis,
    /// SDF strength Ω (rad/s)
    pub strength: f64,
}

/// Measured laser-power → SDF-strength table. Unlisted powers scale as √P
/// from the nearest listed point of the same basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerCalibration {
    pub points: Vec<CalibrationPoint>,
    pub lamb_dicke: f64,
}

impl PowerCalibration {
    pub fn strength(&self, power_mw: f64, basis: ForceBasis) -> Result<f64> {
        if !(power_mw >= 0.0) {
            return domain(format!("power {power_mw} mW < 0"));
        }
        let best = self
            .points
            .iter()
            .filter(|p| p.basis == basis)
            .min_by(|a, b| (a.power_mw - power_mw).abs().total_cmp(&(b.power_mw - power_mw).abs()));
        match best {
            Some(p) => Ok(p.strength * (power_mw / p.power_mw).sqrt()),
            None => domain(format!("no calibration for {basis:?} forces")),
        }
    }

    /// Carrier Rabi frequency Ω_c = Ω/η of an equatorial force at this power.
    pub fn carrier_rabi(&self, power_mw: f64) -> Result<f64> {
        Ok(self.strength(power_mw, ForceBasis::Equatorial)? / self.lamb_dicke)
    }
}
