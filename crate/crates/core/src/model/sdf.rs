use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::ramp::RampShape;
use super::td::TdHamiltonian;
use crate::error::{domain, Result};
use crate::hilbert::{annihilation, spin_axis_op, FockSpace, OscillatorParams, SpinAxis};
use crate::linalg::{kron, CMat};
use crate::special::bessel_j;
use num_complex::Complex64 as C64;

/// One spin-dependent force: (Ω/2)·σ ⊗ (a e^{−i(Δt+φ)} + h.c.).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdfParams {
    pub strength: f64,
    pub detuning: f64,
    pub spin_axis: SpinAxis,
    pub motional_phase: f64,
}

impl SdfParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.strength >= 0.0) {
            return domain(format!("SDF strength {} < 0", self.strength));
        }
        SpinAxis::from_bloch(self.spin_axis.bloch)?;
        Ok(())
    }
}

pub fn sdf_hamiltonian_rwa(t: f64, params: &SdfParams, envelope: f64, space: FockSpace) -> Result<CMat> {
    params.validate()?;
    let s = spin_axis_op(params.spin_axis)?;
    let a = annihilation(space.dim);
    let ph = C64::from_polar(0.5 * params.strength * envelope, -(params.detuning * t + params.motional_phase));
    let osc = a.map(|z| z * ph) + a.adjoint().map(|z| z * ph.conj());
    Ok(kron(&s, &osc))
}

/// Adds the RWA force with envelope g(t) to `h`.
pub fn add_sdf_rwa(h: &mut TdHamiltonian, params: &SdfParams, ramp: RampShape, space: FockSpace) -> Result<()> {
    params.validate()?;
    let op = kron(&spin_axis_op(params.spin_axis)?, &annihilation(space.dim));
    let SdfParams { strength, detuning, motional_phase, .. } = *params;
    h.add_hc(&op, move |t| C64::from_polar(0.5 * strength * ramp.g(t), -(detuning * t + motional_phase)));
    Ok(())
}

/// Bichromatic (Mølmer–Sørensen) drive in the interaction frame of qubit and
/// oscillator, first order in η, without a rotating-wave approximation on ω_osc:
/// H = g·Ω_c·cos(δt − φ_m)·[σ_{φ_s−π/2} + η·σ_{φ_s} ⊗ (a e^{−iω t} + h.c.)].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BichromaticParams {
    pub carrier_rabi: f64,
    pub tone_detuning: f64,
    pub tone_phases: (f64, f64),
    pub lamb_dicke: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BichromaticRegime {
    /// δ ≈ ω_osc: force along σ_{φ_s}, detuning ω_osc − δ.
    NearOsc,
    /// δ ≈ ω_osc/2: force along σ_z, detuning ω_osc − 2δ.
    NearHalfOsc,
}

impl BichromaticParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_rabi >= 0.0) {
            return domain(format!("carrier Rabi frequency {} < 0", self.carrier_rabi));
        }
        if !(self.lamb_dicke > 0.0 && self.lamb_dicke < 1.0) {
            return domain(format!("Lamb-Dicke parameter {} outside (0, 1)", self.lamb_dicke));
        }
        Ok(())
    }

    pub fn spin_phase(&self) -> f64 {
        0.5 * (self.tone_phases.0 + self.tone_phases.1)
    }

    pub fn motional_phase(&self) -> f64 {
        0.5 * (self.tone_phases.0 - self.tone_phases.1)
    }

    /// Bessel argument 2Ω_c/δ.
    pub fn modulation_index(&self) -> f64 {
        2.0 * self.carrier_rabi / self.tone_detuning
    }

    /// Drive whose effective force matches `sdf` in strength, detuning, axis
    /// and phase. An SDF along σ_z uses the half-frequency regime; any other
    /// axis must be equatorial.
    pub fn realizing(sdf: &SdfParams, eta: f64, omega_osc: f64) -> Result<BichromaticParams> {
        sdf.validate()?;
        let [x, y, z] = sdf.spin_axis.bloch;
        let (regime, delta) = if (z.abs() - 1.0).abs() < 1e-12 {
            (BichromaticRegime::NearHalfOsc, 0.5 * (omega_osc - sdf.detuning))
        } else if z.abs() < 1e-12 {
            (BichromaticRegime::NearOsc, omega_osc - sdf.detuning)
        } else {
            return domain("bichromatic drives realize equatorial or σz forces only");
        };
        // Invert Ω = ηΩ_c·|bessel factor(2Ω_c/δ)| by fixed point from the small-drive guess.
        let mut p =
            BichromaticParams { carrier_rabi: 0.0, tone_detuning: delta, tone_phases: (0.0, 0.0), lamb_dicke: eta };
        let target = sdf.strength;
        let (spin_phase, motional) = match regime {
            BichromaticRegime::NearOsc => {
                p.carrier_rabi = target / eta;
                for _ in 0..100 {
                    let f = effective_sdf_strength(&p, regime) / (eta * p.carrier_rabi).max(1e-300);
                    p.carrier_rabi = target / (eta * f);
                }
                (y.atan2(x), sdf.motional_phase)
            }
            BichromaticRegime::NearHalfOsc => {
                // ηΩ_c·(J1 + J3) ≈ ηΩ_c²/δ for small drives
                p.carrier_rabi = (target * delta.abs() / eta).sqrt();
                for _ in 0..200 {
                    let f = effective_sdf_strength(&p, regime) / target;
                    if (f - 1.0).abs() < 1e-14 {
                        break;
                    }
                    p.carrier_rabi /= f.sqrt();
                }
                // Effective force: (Ω/2)·σz·(a e^{−i(Δt + 2φ_m − π/2)} + h.c.); the sign of
                // σz follows the motional phase, so −σz takes an extra π/2.
                let flip = if z < 0.0 { FRAC_PI_2 } else { 0.0 };
                (0.0, 0.5 * (sdf.motional_phase + FRAC_PI_2) + flip)
            }
        };
        p.tone_phases = (spin_phase + motional, spin_phase - motional);
        Ok(p)
    }

    pub fn regime(&self, omega_osc: f64) -> BichromaticRegime {
        if (self.tone_detuning - omega_osc).abs() < (self.tone_detuning - 0.5 * omega_osc).abs() {
            BichromaticRegime::NearOsc
        } else {
            BichromaticRegime::NearHalfOsc
        }
    }
}

pub fn bichromatic_hamiltonian(
    t: f64,
    params: &BichromaticParams,
    envelope: f64,
    mode: &OscillatorParams,
    space: FockSpace,
) -> Result<CMat> {
    params.validate()?;
    let phi_s = params.spin_phase();
    let carrier = spin_axis_op(SpinAxis::equatorial(phi_s - FRAC_PI_2))?;
    let force = spin_axis_op(SpinAxis::equatorial(phi_s))?;
    let a = annihilation(space.dim);
    let amp = envelope * params.carrier_rabi * (params.tone_detuning * t - params.motional_phase()).cos();
    let ph = C64::from_polar(params.lamb_dicke, -mode.freq * t);
    let osc = a.map(|z| z * ph) + a.adjoint().map(|z| z * ph.conj());
    let id = CMat::identity(space.dim, space.dim);
    Ok((kron(&carrier, &id) + kron(&force, &osc)).map(|z| z * amp))
}

pub fn add_bichromatic(
    h: &mut TdHamiltonian,
    params: &BichromaticParams,
    mode: &OscillatorParams,
    ramp: RampShape,
    space: FockSpace,
) -> Result<()> {
    params.validate()?;
    let phi_s = params.spin_phase();
    let carrier = kron(&spin_axis_op(SpinAxis::equatorial(phi_s - FRAC_PI_2))?, &CMat::identity(space.dim, space.dim));
    let force = kron(&spin_axis_op(SpinAxis::equatorial(phi_s))?, &annihilation(space.dim));
    let (oc, d, pm, eta, w) =
        (params.carrier_rabi, params.tone_detuning, params.motional_phase(), params.lamb_dicke, mode.freq);
    h.add(&carrier, move |t| C64::new(ramp.g(t) * oc * (d * t - pm).cos(), 0.0));
    h.add_hc(&force, move |t| C64::from_polar(ramp.g(t) * oc * eta * (d * t - pm).cos(), -w * t));
    Ok(())
}

pub fn effective_sdf_strength(params: &BichromaticParams, regime: BichromaticRegime) -> f64 {
    let x = params.modulation_index();
    let f = match regime {
        BichromaticRegime::NearOsc => bessel_j(0, x) + bessel_j(2, x),
        BichromaticRegime::NearHalfOsc => bessel_j(1, x) + bessel_j(3, x),
    };
    params.lamb_dicke * params.carrier_rabi * f.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_defect, max_abs_diff};
    use std::f64::consts::PI;

    fn lcg(s: &mut u64) -> f64 {
        *s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*s >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn rwa_basics() {
        let sp = FockSpace { dim: 8 };
        let mut p =
            SdfParams { strength: 0.0, detuning: 3.0, spin_axis: SpinAxis::equatorial(0.3), motional_phase: 0.2 };
        assert!(sdf_hamiltonian_rwa(0.7, &p, 1.0, sp).unwrap().iter().all(|z| z.norm() == 0.0));
        p.strength = 2.0;
        p.motional_phase = 0.0;
        let h = sdf_hamiltonian_rwa(0.0, &p, 1.0, sp).unwrap();
        let a = annihilation(8);
        let want = kron(&spin_axis_op(p.spin_axis).unwrap(), &(&a + a.adjoint()));
        assert!(max_abs_diff(&h, &want) < 1e-15);
        let mut s = 7u64;
        for _ in 0..100 {
            let q = SdfParams {
                strength: 10.0 * lcg(&mut s),
                detuning: 100.0 * (lcg(&mut s) - 0.5),
                spin_axis: SpinAxis::along([lcg(&mut s) - 0.5, lcg(&mut s) - 0.5, lcg(&mut s) - 0.5]).unwrap(),
                motional_phase: 2.0 * PI * lcg(&mut s),
            };
            assert!(hermitian_defect(&sdf_hamiltonian_rwa(lcg(&mut s), &q, lcg(&mut s), sp).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn td_builder_matches_pointwise() {
        let sp = FockSpace { dim: 6 };
        let p = SdfParams { strength: 1.3, detuning: 2.0, spin_axis: SpinAxis::equatorial(1.0), motional_phase: 0.4 };
        let ramp = RampShape::new(0.5, 3.0).unwrap();
        let mut h = TdHamiltonian::zero(12);
        add_sdf_rwa(&mut h, &p, ramp, sp).unwrap();
        for &t in &[0.1, 0.9, 2.7] {
            let want = sdf_hamiltonian_rwa(t, &p, ramp.g(t), sp).unwrap();
            assert!(max_abs_diff(&h.at(t), &want) < 1e-14);
        }
        let b = BichromaticParams { carrier_rabi: 2.0, tone_detuning: 9.0, tone_phases: (0.3, -0.1), lamb_dicke: 0.05 };
        let mode = OscillatorParams { freq: 10.0, nbar: 0.0, heating_rate: 0.0 };
        let mut h = TdHamiltonian::zero(12);
        add_bichromatic(&mut h, &b, &mode, ramp, sp).unwrap();
        for &t in &[0.1, 0.9, 2.7] {
            let want = bichromatic_hamiltonian(t, &b, ramp.g(t), &mode, sp).unwrap();
            assert!(max_abs_diff(&h.at(t), &want) < 1e-14);
            assert!(hermitian_defect(&want) < 1e-12);
        }
    }

    #[test]
    fn bichromatic_limits() {
        let sp = FockSpace { dim: 5 };
        let mode = OscillatorParams { freq: 2.0 * PI * 1.2e6, nbar: 0.0, heating_rate: 0.0 };
        let mut b = BichromaticParams {
            carrier_rabi: 0.0,
            tone_detuning: mode.freq,
            tone_phases: (0.0, 0.0),
            lamb_dicke: 0.05,
        };
        assert!(bichromatic_hamiltonian(1e-7, &b, 1.0, &mode, sp).unwrap().iter().all(|z| z.norm() == 0.0));
        b.carrier_rabi = 1e5;
        b.lamb_dicke = 1e-12;
        let h = bichromatic_hamiltonian(1e-7, &b, 1.0, &mode, sp).unwrap();
        let carrier = kron(&spin_axis_op(SpinAxis::equatorial(-FRAC_PI_2)).unwrap(), &CMat::identity(5, 5))
            .map(|z| z * 1e5 * (mode.freq * 1e-7).cos());
        assert!(max_abs_diff(&h, &carrier) < 1e-6);
        b.lamb_dicke = 1.2;
        assert!(bichromatic_hamiltonian(0.0, &b, 1.0, &mode, sp).is_err());
    }

    #[test]
    fn bessel_strengths() {
        let b = BichromaticParams { carrier_rabi: 1e-6, tone_detuning: 1.0, tone_phases: (0.0, 0.0), lamb_dicke: 0.1 };
        assert!((effective_sdf_strength(&b, BichromaticRegime::NearOsc) / (0.1 * 1e-6) - 1.0).abs() < 1e-9);
        assert!(effective_sdf_strength(&b, BichromaticRegime::NearHalfOsc) < 1e-12);
        let w = 2.0 * PI * 1.2e6;
        for &(axis, det) in &[(SpinAxis::equatorial(0.7), 2.0 * PI * 25e3), (SpinAxis::z(), -2.0 * PI * 50e3)] {
            let sdf = SdfParams { strength: 2.0 * PI * 6.5e3, detuning: det, spin_axis: axis, motional_phase: 0.3 };
            let p = BichromaticParams::realizing(&sdf, 0.049, w).unwrap();
            let reg = p.regime(w);
            assert!((effective_sdf_strength(&p, reg) / sdf.strength - 1.0).abs() < 1e-10);
        }
    }
}
