//! Numerical checks behind the model: heating growth, bichromatic force
//! strengths, and the error scaling of the effective interactions.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::dynamics::{evolve_lindblad, evolve_pure, EvolutionSpec, HeatingModel};
use crate::error::{domain, Result};
use crate::hilbert::OscillatorParams;
use crate::hilbert::{annihilation, embed_osc, spin_axis_op, thermal_state, FockSpace, SpinAxis};
use crate::linalg::{c, eigh, expm_hermitian, CVec};
use crate::model::{
    add_bichromatic, effective_hamiltonian_matrix, effective_interaction, BichromaticParams, BichromaticRegime,
    EffectiveInteraction, InteractionConfig, PulseConvention, RampShape, SdfParams, TdHamiltonian,
};

use super::pipeline::fit_slope;

/// Fitted d⟨n⟩/dt of a thermal state under heating alone.
pub fn heating_slope(rate: f64, nbar: f64, dim: usize, duration: f64, points: usize) -> Result<f64> {
    if points < 3 {
        return domain("need at least 3 sample times");
    }
    let sp = FockSpace::new(dim)?;
    let rho0 = thermal_state(nbar, sp)?;
    let times: Vec<f64> = (1..points).map(|k| duration * k as f64 / (points - 1) as f64).collect();
    let spec = EvolutionSpec::new(TdHamiltonian::zero(dim), 0.0, duration).with_samples(times.clone());
    let traj = evolve_lindblad(&rho0, &spec, &HeatingModel { rate }, sp, false)?;
    let dn: Vec<f64> = traj.iter().map(|r| (0..dim).map(|n| n as f64 * r[(n, n)].re).sum::<f64>() - nbar).collect();
    Ok(fit_slope(&times, &dn).0)
}

/// Force strength Ω measured from the full bichromatic drive on resonance:
/// the spin is prepared in an eigenstate of the force axis and |⟨a⟩| grows
/// as Ω·t/2.
pub fn bichromatic_displacement_rate(
    params: &BichromaticParams,
    osc_freq: f64,
    duration: f64,
    dim: usize,
) -> Result<f64> {
    let sp = FockSpace::new(dim)?;
    let regime = params.regime(osc_freq);
    let axis = match regime {
        BichromaticRegime::NearOsc => SpinAxis::equatorial(params.spin_phase()),
        BichromaticRegime::NearHalfOsc => SpinAxis::z(),
    };
    let (_, vecs) = eigh(&spin_axis_op(axis)?);
    let spin = vecs.column(1).into_owned();
    let mut psi0 = CVec::zeros(2 * dim);
    psi0[0] = spin[0];
    psi0[dim] = spin[1];
    let mode = OscillatorParams { freq: osc_freq, nbar: 0.0, heating_rate: 0.0 };
    let mut h = TdHamiltonian::zero(2 * dim);
    add_bichromatic(&mut h, params, &mode, RampShape::flat(duration)?, sp)?;
    let n = 200;
    let times: Vec<f64> = (1..=n).map(|k| duration * k as f64 / n as f64).collect();
    let spec = EvolutionSpec::new(h, 0.0, duration).with_samples(times.clone()).with_tolerances(1e-10, 1e-12);
    let traj = evolve_pure(&psi0, &spec)?;
    let a = embed_osc(&annihilation(dim));
    let amp: Vec<f64> = traj.iter().map(|p| p.dotc(&(&a * p)).norm()).collect();
    // slope with intercept: fast micromotion averages out
    let m = times.len() as f64;
    let (mt, ma) = (times.iter().sum::<f64>() / m, amp.iter().sum::<f64>() / m);
    let cov: f64 = times.iter().zip(&amp).map(|(t, y)| (t - mt) * (y - ma)).sum();
    let var: f64 = times.iter().map(|t| (t - mt).powi(2)).sum();
    Ok(2.0 * cov / var)
}

/// Setup for the error-scaling study of one order.
#[derive(Clone, Copy, Debug)]
pub struct ScalingSetup {
    pub order: usize,
    pub strength_a: f64,
    pub strength_b: f64,
    pub axis_a: SpinAxis,
    pub axis_b: SpinAxis,
    /// Target r_n = Ω_n·∫gⁿ dt, held fixed across detunings.
    pub r: f64,
    /// Ramp length in units of 2π/|Δ|.
    pub ramp_periods: f64,
    pub dim: usize,
    /// Fock levels per spin state in the compared subspace.
    pub levels: usize,
}

/// 1 − |Tr(P·U_ideal†·U·P)|²/d² on the spin ⊗ {|0⟩..|levels−1⟩} subspace,
/// for each detuning, with the pulse stretched to keep r_n fixed.
pub fn infidelity_vs_detuning(setup: &ScalingSetup, deltas: &[f64]) -> Result<Vec<f64>> {
    deltas.par_iter().map(|&d| propagator_infidelity(setup, d)).collect()
}

fn propagator_infidelity(s: &ScalingSetup, delta: f64) -> Result<f64> {
    let sp = FockSpace::new(s.dim)?;
    let n = s.order;
    let mk = |strength, axis| SdfParams { strength, detuning: 0.0, spin_axis: axis, motional_phase: 0.0 };
    let osc = OscillatorParams { freq: 1.0, nbar: 0.0, heating_rate: 0.0 };
    let probe_cfg = InteractionConfig::nonlinear(
        n,
        delta,
        mk(s.strength_a, s.axis_a),
        mk(s.strength_b, s.axis_b),
        RampShape::flat(1.0)?,
        osc,
    )?;
    let eff = effective_interaction(&probe_cfg)?;
    let t_r = s.ramp_periods * 2.0 * PI / delta.abs();
    let mut cn = 1.0;
    for j in 1..=n {
        cn *= (2 * j - 1) as f64 / (2 * j) as f64;
    }
    let t_sqz = s.r / eff.magnitude + t_r * (1.0 - 2.0 * cn);
    let ramp = RampShape::with_convention(t_sqz, t_r, PulseConvention::Fwhm)?;
    let cfg = InteractionConfig { ramp, ..probe_cfg };
    let r_check = eff.magnitude * ramp.integral_pow(n as u32);
    let ideal_u =
        expm_hermitian(&effective_hamiltonian_matrix(&EffectiveInteraction { magnitude: 1.0, ..eff }, sp)?, r_check);
    let h = cfg.hamiltonian(sp)?;
    let spec = EvolutionSpec::new(h, 0.0, ramp.t_total).with_tolerances(1e-11, 1e-13);
    let mut overlap = c(0.0, 0.0);
    let mut count = 0.0;
    for spin in 0..2 {
        for k in 0..s.levels {
            let mut psi = CVec::zeros(2 * s.dim);
            psi[spin * s.dim + k] = c(1.0, 0.0);
            let out = evolve_pure(&psi, &spec)?.pop().expect("one sample");
            let ideal = &ideal_u * &psi;
            overlap += ideal.dotc(&out);
            count += 1.0;
        }
    }
    Ok(1.0 - overlap.norm_sqr() / (count * count))
}

/// Slope of ln y against ln x by ordinary least squares with an intercept;
/// returns (slope, σ).
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return domain("log-log fit needs ≥ 2 paired positive values");
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|u| (u - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return domain("log-log fit needs distinct x values");
    }
    let b = lx.iter().zip(&ly).map(|(u, v)| (u - mx) * (v - my)).sum::<f64>() / sxx;
    let ssr: f64 = lx.iter().zip(&ly).map(|(u, v)| (v - my - b * (u - mx)).powi(2)).sum();
    let sigma = if lx.len() > 2 { (ssr / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok((b, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heating_slope_matches_rate() {
        let s = heating_slope(300.0, 0.09, 30, 1e-3, 11).unwrap();
        assert!((s / 300.0 - 1.0).abs() < 0.01, "{s}");
    }

    #[test]
    fn loglog_slope_ignores_prefactor() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 7.5 * v.powf(-3.2)).collect();
        let (b, s) = loglog_slope(&x, &y).unwrap();
        assert!((b + 3.2).abs() < 1e-12 && s < 1e-12);
        assert!(loglog_slope(&[1.0, 2.0], &[1.0, -1.0]).is_err());
    }
}
