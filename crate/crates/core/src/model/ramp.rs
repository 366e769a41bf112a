use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// sin² rising and falling edges around a flat top.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RampShape {
    pub t_ramp: f64,
    pub t_total: f64,
}

/// How a nominal interaction duration maps onto the full pulse length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseConvention {
    /// t_total = t_sqz: the ramps are part of the nominal duration.
    Inclusive,
    /// t_total = t_sqz + t_ramp: t_sqz is the amplitude full width at half maximum.
    #[default]
    Fwhm,
}

impl PulseConvention {
    pub fn total(self, t_sqz: f64, t_ramp: f64) -> f64 {
        match self {
            PulseConvention::Inclusive => t_sqz,
            PulseConvention::Fwhm => t_sqz + t_ramp,
        }
    }
}

impl RampShape {
    pub fn new(t_ramp: f64, t_total: f64) -> Result<RampShape> {
        if !(t_ramp >= 0.0) || !(t_total > 0.0) || 2.0 * t_ramp > t_total * (1.0 + 1e-12) {
            return domain(format!(
                "RampShape requires 0 ≤ 2·t_ramp ≤ t_total (t_ramp={t_ramp:e}, t_total={t_total:e})"
            ));
        }
        Ok(RampShape { t_ramp, t_total })
    }

    pub fn flat(t_total: f64) -> Result<RampShape> {
        RampShape::new(0.0, t_total)
    }

    pub fn with_convention(t_sqz: f64, t_ramp: f64, conv: PulseConvention) -> Result<RampShape> {
        RampShape::new(t_ramp, conv.total(t_sqz, t_ramp))
    }

    /// Envelope with zero outside the pulse; used inside integrators where
    /// stages may probe the boundary.
    pub fn g(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.t_total {
            return 0.0;
        }
        let tr = self.t_ramp;
        if tr == 0.0 {
            return 1.0;
        }
        let h = std::f64::consts::FRAC_PI_2 / tr;
        if t < tr {
            (h * t).sin().powi(2)
        } else if t > self.t_total - tr {
            (h * (self.t_total - t)).sin().powi(2)
        } else {
            1.0
        }
    }

    /// ∫ g(t)^k dt over the pulse.
    pub fn integral_pow(&self, k: u32) -> f64 {
        // ∫₀¹ sin^{2k}(πu/2) du = (2k−1)!!/(2k)!!
        let mut c = 1.0;
        for j in 1..=k {
            c *= (2 * j - 1) as f64 / (2 * j) as f64;
        }
        self.t_total - 2.0 * self.t_ramp + 2.0 * self.t_ramp * c
    }
}

pub fn ramp_envelope(t: f64, ramp: &RampShape) -> Result<f64> {
    let eps = 1e-12 * ramp.t_total;
    if t < -eps || t > ramp.t_total + eps {
        return domain(format!("t = {t:e} outside [0, {:e}]", ramp.t_total));
    }
    Ok(ramp.g(t.clamp(0.0, ramp.t_total)))
}
