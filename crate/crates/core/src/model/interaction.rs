use serde::{Deserialize, Serialize};

use super::ramp::RampShape;
use super::sdf::{add_bichromatic, add_sdf_rwa, BichromaticParams, SdfParams};
use super::td::TdHamiltonian;
use crate::error::{domain, Error, Result};
use crate::hilbert::{FockSpace, OscillatorParams};

/// Two spin-dependent forces detuned by Δ and m·Δ, m = 1 − n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionConfig {
    pub order: usize,
    pub delta: f64,
    pub sdf_a: SdfParams,
    pub sdf_b: SdfParams,
    pub ramp: RampShape,
    pub include_carrier: bool,
    /// Needed only when the carrier is included.
    pub lamb_dicke: f64,
    pub oscillator: OscillatorParams,
}

impl InteractionConfig {
    /// Sets the detunings from the resonance rule.
    pub fn nonlinear(
        order: usize,
        delta: f64,
        mut sdf_a: SdfParams,
        mut sdf_b: SdfParams,
        ramp: RampShape,
        oscillator: OscillatorParams,
    ) -> Result<InteractionConfig> {
        if !(2..=4).contains(&order) {
            return Err(Error::UnsupportedOrder(order));
        }
        sdf_a.detuning = delta;
        sdf_b.detuning = (1.0 - order as f64) * delta;
        let c =
            InteractionConfig { order, delta, sdf_a, sdf_b, ramp, include_carrier: false, lamb_dicke: 0.0, oscillator };
        c.validate()?;
        Ok(c)
    }

    pub fn m(&self) -> i32 {
        1 - self.order as i32
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=4).contains(&self.order) {
            return Err(Error::UnsupportedOrder(self.order));
        }
        if self.delta == 0.0 || !self.delta.is_finite() {
            return domain("Δ must be finite and nonzero");
        }
        self.sdf_a.validate()?;
        self.sdf_b.validate()?;
        let want = self.m() as f64 * self.delta;
        if (self.sdf_a.detuning - self.delta).abs() > 1e-9 * self.delta.abs()
            || (self.sdf_b.detuning - want).abs() > 1e-9 * self.delta.abs()
        {
            return domain(format!("detunings must be Δ and {}·Δ", self.m()));
        }
        RampShape::new(self.ramp.t_ramp, self.ramp.t_total)?;
        self.oscillator.validate()?;
        if self.include_carrier && !(self.lamb_dicke > 0.0 && self.lamb_dicke < 1.0) {
            return domain("carrier simulation needs 0 < η < 1");
        }
        Ok(())
    }

    /// Dual-force Hamiltonian: RWA forces, or each force realized by its
    /// bichromatic drive (carrier terms, no RWA on ω_osc) when requested.
    pub fn hamiltonian(&self, space: FockSpace) -> Result<TdHamiltonian> {
        self.validate()?;
        let mut h = TdHamiltonian::zero(space.total());
        for sdf in [&self.sdf_a, &self.sdf_b] {
            if self.include_carrier {
                let b = BichromaticParams::realizing(sdf, self.lamb_dicke, self.oscillator.freq)?;
                add_bichromatic(&mut h, &b, &self.oscillator, self.ramp, space)?;
            } else {
                add_sdf_rwa(&mut h, sdf, self.ramp, space)?;
            }
        }
        Ok(h)
    }
}
