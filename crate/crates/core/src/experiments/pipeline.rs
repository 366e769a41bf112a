//! Steps shared by the scenario kinds.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::dynamics::{evolve_density, evolve_lindblad, EvolutionSpec, HeatingModel};
use crate::error::{Error, Result};
use crate::hilbert::{
    fidelity, min_variance_angle, oscillator_covariance, spin_axis_op, thermal_state, FockSpace, SpinAxis,
    SpinFockState, LEAKAGE_TOL,
};
use crate::linalg::{c, eigh, expm_hermitian, kron, matmul, matmul_adj, CMat};
use crate::model::{effective_interaction, effective_motional_op, InteractionConfig, TdHamiltonian};
use crate::optimize::{golden_max, nelder_mead};
use crate::tomography::{
    characteristic_function, fit_squeezing_parameter, simulate_probe_splitting, symmetric_axis,
    wigner_from_characteristic, CharacteristicGrid, FitOptions, HeatingInFit, ProbeParams, SpinReadout, SqueezingFit,
    WignerGrid,
};

use super::scenario::{Scenario, TomographySpec};

pub fn space(scn: &Scenario) -> Result<FockSpace> {
    FockSpace::new(scn.system.dim)
}

pub fn heating(scn: &Scenario) -> HeatingModel {
    HeatingModel { rate: scn.system.heating_rate }
}

/// |s⟩⟨s| ⊗ thermal(n̄).
pub fn initial_state(scn: &Scenario, spin: SpinReadout) -> Result<SpinFockState> {
    let s = spin.vector();
    SpinFockState::product(&(&s * s.adjoint()), &thermal_state(scn.system.nbar, space(scn)?)?)
}

fn check_leakage(rho: &CMat, dim: usize, what: &str) -> Result<()> {
    let leak = SpinFockState { rho: rho.clone(), dim }.leakage();
    if leak > LEAKAGE_TOL {
        return Err(Error::Truncation(format!("{what}: population {leak:.2e} in the top 5% of Fock levels")));
    }
    Ok(())
}

/// Evolves through one interaction pulse, under heating if configured.
pub fn run_pulse(cfg: &InteractionConfig, rho: &CMat, sp: FockSpace, heat: &HeatingModel) -> Result<CMat> {
    let h = cfg.hamiltonian(sp)?;
    let spec = EvolutionSpec::new(h, 0.0, cfg.ramp.t_total);
    let out = evolve_lindblad(rho, &spec, heat, sp, true)?.pop().expect("one sample");
    check_leakage(&out, sp.dim, "interaction pulse")?;
    Ok(out)
}

/// Free evolution under heating only.
pub fn idle(rho: &CMat, duration: f64, sp: FockSpace, heat: &HeatingModel) -> Result<CMat> {
    if heat.rate == 0.0 || duration == 0.0 {
        return Ok(rho.clone());
    }
    let spec = EvolutionSpec::new(TdHamiltonian::zero(rho.nrows()), 0.0, duration);
    Ok(evolve_lindblad(rho, &spec, heat, sp, true)?.pop().expect("one sample"))
}

/// Instantaneous spin rotation R(θ, φ) = exp(−iθ/2·σ_φ) on spin ⊗ oscillator.
pub fn rotate_spin(rho: &CMat, theta: f64, phi: f64, dim: usize) -> Result<CMat> {
    let u2 = expm_hermitian(&spin_axis_op(SpinAxis::equatorial(phi))?, 0.5 * theta);
    let u = kron(&u2, &crate::linalg::identity(dim));
    Ok(matmul_adj(&matmul(&u, rho), &u))
}

/// Probe phase aligned with the minimum-variance quadrature.
pub fn squeezed_axis_phase(state: &SpinFockState) -> f64 {
    min_variance_angle(&oscillator_covariance(&state.oscillator()).1)
}

/// Spin state with the larger population, used as the probe readout.
pub fn dominant_spin(state: &SpinFockState) -> SpinReadout {
    if state.spin()[(0, 0)].re > 0.5 {
        SpinReadout::Up
    } else {
        SpinReadout::Down
    }
}

pub fn probe_params(scn: &Scenario, phase: f64, readout: SpinReadout, durations: Vec<f64>) -> ProbeParams {
    ProbeParams { readout, ..ProbeParams::new(scn.probe.strength, phase, durations) }
}

pub fn probe(scn: &Scenario, state: &SpinFockState, params: &ProbeParams) -> Result<Vec<f64>> {
    let heat = if scn.probe.heating_during_probe { heating(scn) } else { HeatingModel { rate: 0.0 } };
    simulate_probe_splitting(state, params, &heat)
}

/// Binomial resampling of a p↓ curve; each (stream, point) has its own RNG.
pub fn add_shot_noise(curve: &mut [f64], shots: u32, seed: u64, stream: u64) -> Result<()> {
    for (k, p) in curve.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (k as u64) << 40);
        let b = Binomial::new(shots as u64, p.clamp(0.0, 1.0)).map_err(|e| Error::Domain(e.to_string()))?;
        *p = b.sample(&mut rng) as f64 / shots as f64;
    }
    Ok(())
}

pub fn noisy(scn: &Scenario, mut curve: Vec<f64>, stream: u64) -> Result<Vec<f64>> {
    if let Some(n) = scn.noise {
        add_shot_noise(&mut curve, n.shots, n.seed, stream)?;
    }
    Ok(curve)
}

pub fn fit_options(scn: &Scenario, heated_for: f64) -> FitOptions {
    let heating = scn.fit.heating.resolve(scn.system.heating_rate, heated_for);
    let heating = if scn.system.heating_rate == 0.0 { HeatingInFit::Off } else { heating };
    FitOptions { nbar_gs: scn.system.nbar, heating, ..Default::default() }
}

pub struct ProbeFit {
    pub phase: f64,
    pub squeezed: Vec<f64>,
    pub fit: SqueezingFit,
}

/// Probes `state` along its squeezed axis (or the configured phase) and
/// fits r against `reference`.
pub fn probe_and_fit(
    scn: &Scenario,
    state: &SpinFockState,
    reference: &[f64],
    heated_for: f64,
    stream: u64,
) -> Result<ProbeFit> {
    let phase = scn.probe.phase.unwrap_or_else(|| squeezed_axis_phase(state));
    let durations = scn.probe.durations();
    let params = probe_params(scn, phase, dominant_spin(state), durations.clone());
    let squeezed = noisy(scn, probe(scn, state, &params)?, stream)?;
    let fit = fit_squeezing_parameter(&durations, reference, &squeezed, &fit_options(scn, heated_for))?;
    Ok(ProbeFit { phase, squeezed, fit })
}

/// Splitting curve of the unsqueezed initial state.
pub fn reference_curve(scn: &Scenario) -> Result<Vec<f64>> {
    let init = initial_state(scn, scn.readout)?;
    let params = probe_params(scn, 0.0, scn.readout, scn.probe.durations());
    noisy(scn, probe(scn, &init, &params)?, u64::MAX)
}

#[derive(Clone, Copy, Debug)]
pub struct EffectiveFit {
    /// Fitted r_n = Ω_n·∫gⁿ dt.
    pub r: f64,
    /// Spread of r consistent with the residual infidelity: 1 − F rises by
    /// its own minimum value at r ± σ.
    pub r_sigma: f64,
    pub theta: f64,
    /// 1 − F of the oscillator state, the quantity maximized.
    pub infidelity: f64,
    /// 1 − F of the joint state against the ideal with the spin untouched;
    /// exceeds `infidelity` by the population heating moves out of the
    /// initial spin state.
    pub joint_infidelity: f64,
    pub r_nominal: f64,
    pub theta_nominal: f64,
}

/// Best agreement with the ideal effective interaction, maximizing the
/// oscillator-state fidelity over r_n and θ. The initial spin must be an
/// eigenstate of σ_β, so the ideal acts on the oscillator alone. With heating,
/// r is refined against an ideal integrated under the same heating with the
/// interaction following gⁿ(t).
pub fn fit_effective(
    cfg: &InteractionConfig,
    rho0: &CMat,
    actual: &CMat,
    sp: FockSpace,
    heat: &HeatingModel,
) -> Result<EffectiveFit> {
    let eff = effective_interaction(cfg)?;
    let n = cfg.order as u32;
    let d = sp.dim;
    let weight = cfg.ramp.integral_pow(n);
    let r_nominal = eff.magnitude * weight;

    let spin = SpinFockState { rho: rho0.clone(), dim: d }.spin();
    let (vals, vecs) = eigh(&spin);
    if (vals[1] - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState("initial spin state is not pure".into()));
    }
    let s = vecs.column(1).into_owned();
    let sign = s.dotc(&(spin_axis_op(eff.spin_axis)? * &s)).re;
    if (sign.abs() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState("initial spin is not an eigenstate of the effective spin axis".into()));
    }
    // ⟨s|ρ|s⟩; F against |s⟩⟨s| ⊗ σ only sees this block
    let block = |rho: &CMat| -> CMat {
        let mut b = CMat::zeros(d, d);
        for a in 0..2 {
            for c2 in 0..2 {
                let w = s[a].conj() * s[c2];
                if w.norm() > 0.0 {
                    b += rho.view((a * d, c2 * d), (d, d)).map(|z| z * w);
                }
            }
        }
        b
    };
    let sigma0 = block(rho0);
    let joint = block(actual);
    let reduced: CMat = actual.view((0, 0), (d, d)) + actual.view((d, d), (d, d));
    let unit = |theta: f64| effective_motional_op(cfg.order, theta, eff.even, d).map(|z| z * (0.5 * sign));

    let unitary = |r: f64, theta: f64| {
        let u = expm_hermitian(&unit(theta), r);
        Ok(matmul_adj(&matmul(&u, &sigma0), &u))
    };
    let diss = if heat.rate > 0.0 { Some(heat.dissipator(sp, false)?) } else { None };
    let heated = |r: f64, theta: f64| -> Result<CMat> {
        let omega = r / weight;
        let ramp = cfg.ramp;
        let mut h = TdHamiltonian::zero(d);
        h.add(&unit(theta), move |t| c(omega * ramp.g(t).powi(n as i32), 0.0));
        let spec = EvolutionSpec::new(h, 0.0, ramp.t_total);
        Ok(evolve_density(&sigma0, &spec, diss.as_ref().expect("heating"))?.pop().expect("one sample"))
    };
    let infid = |ideal: Result<CMat>, target: &CMat| match ideal.and_then(|i| fidelity(&i, target)) {
        Ok(f) => 1.0 - f,
        Err(_) => f64::INFINITY,
    };

    let cost2 = |p: &[f64]| infid(unitary(p[0], p[1]), &reduced);
    let step = [0.05 * r_nominal.max(1e-3), 0.2];
    let (mut x, mut v) = nelder_mead(cost2, &[r_nominal, eff.theta], &step, 1e-13, 400);
    let (x2, v2) = nelder_mead(cost2, &x, &[0.01 * r_nominal.max(1e-3), 0.05], 1e-14, 400);
    if v2 < v {
        (x, v) = (x2, v2);
    }
    let theta = x[1];
    let ideal = |r: f64| if diss.is_some() { heated(r, theta) } else { unitary(r, theta) };
    let cost = |r: f64| infid(ideal(r), &reduced);
    if diss.is_some() {
        let (lo, hi) = (0.8 * x[0], 1.2 * x[0]);
        let (r, neg) = golden_max(|r| -cost(r), lo.min(hi), lo.max(hi), 1e-5 * x[0].abs().max(1e-6));
        x[0] = r;
        v = -neg;
    }
    if !v.is_finite() {
        return Err(Error::NoConvergence("fidelity fit".into()));
    }
    let h = 0.02 * x[0].abs().max(1e-3);
    let curv = (cost(x[0] + h) + cost(x[0] - h) - 2.0 * v) / (h * h);
    let r_sigma = if curv > 0.0 { (v.max(0.0) / curv).sqrt() } else { f64::NAN };
    let joint_infidelity = infid(ideal(x[0]), &joint).max(0.0);
    Ok(EffectiveFit {
        r: x[0],
        r_sigma,
        theta: x[1].rem_euclid(2.0 * PI),
        infidelity: v.max(0.0),
        joint_infidelity,
        r_nominal,
        theta_nominal: eff.theta,
    })
}

/// Zero-pads an oscillator density matrix to `dim` levels.
pub fn pad_density(rho: &CMat, dim: usize) -> CMat {
    let d = rho.nrows();
    if dim <= d {
        return rho.clone();
    }
    let mut out = CMat::zeros(dim, dim);
    out.view_mut((0, 0), (d, d)).copy_from(rho);
    out
}

/// χ on the configured grid and its Wigner reconstruction. The state is
/// zero-padded so the grid corners stay inside the displacement guard.
pub fn tomography(osc: &CMat, spec: &TomographySpec) -> Result<(CharacteristicGrid, WignerGrid)> {
    let re = symmetric_axis(spec.points, spec.extent_re)?;
    let im = symmetric_axis(spec.points, spec.extent_im)?;
    let corner = spec.extent_re.powi(2) + spec.extent_im.powi(2);
    let need = (4.0 * corner).ceil() as usize + 2;
    let rho = pad_density(osc, need);
    let chi = characteristic_function(&rho, &re, &im, spec.method)?;
    let w = wigner_from_characteristic(&chi, spec.pad)?;
    Ok((chi, w))
}

/// Relative L2 change of |W| under rotation by 2π/k about the origin,
/// over the disc that stays on the grid.
pub fn rotational_asymmetry(w: &WignerGrid, k: usize) -> f64 {
    let ang = 2.0 * PI / k as f64;
    let (ca, sa) = (ang.cos(), ang.sin());
    let rmax = w.x[w.x.len() - 1].min(w.p[w.p.len() - 1]).min(-w.x[0]).min(-w.p[0]);
    let (mut num, mut den) = (0.0, 0.0);
    for (ip, &p) in w.p.iter().enumerate() {
        for (ix, &x) in w.x.iter().enumerate() {
            if x * x + p * p > rmax * rmax {
                continue;
            }
            let a = w.get(ix, ip).abs();
            let b = w.interpolate(ca * x - sa * p, sa * x + ca * p).abs();
            num += (a - b).powi(2);
            den += a * a;
        }
    }
    (num / den.max(1e-300)).sqrt()
}

/// Least-squares fit of y = A|sin x|; returns (A, σ_A).
pub fn fit_abs_sin(x: &[f64], y: &[f64]) -> (f64, f64) {
    let s: Vec<f64> = x.iter().map(|v| v.sin().abs()).collect();
    let ss: f64 = s.iter().map(|v| v * v).sum();
    let a = s.iter().zip(y).map(|(u, v)| u * v).sum::<f64>() / ss;
    let ssr: f64 = s.iter().zip(y).map(|(u, v)| (v - a * u).powi(2)).sum();
    let dof = (x.len() as f64 - 1.0).max(1.0);
    (a, (ssr / dof / ss).sqrt())
}

/// Least-squares slope through the origin; returns (slope, σ).
pub fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let xx: f64 = x.iter().map(|v| v * v).sum();
    let k = x.iter().zip(y).map(|(u, v)| u * v).sum::<f64>() / xx;
    let ssr: f64 = x.iter().zip(y).map(|(u, v)| (v - k * u).powi(2)).sum();
    let dof = (x.len() as f64 - 1.0).max(1.0);
    (k, (ssr / dof / xx).sqrt())
}

/// y = a + b·cos 2x + c·sin 2x; returns the phase ψ of the cos(2x − ψ)
/// component and its σ.
pub fn fit_second_harmonic(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    use nalgebra::{DMatrix, DVector};
    let a = DMatrix::from_fn(x.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => (2.0 * x[i]).cos(),
        _ => (2.0 * x[i]).sin(),
    });
    let b = DVector::from_column_slice(y);
    let ata = a.transpose() * &a;
    let inv = ata.try_inverse().ok_or_else(|| Error::NoConvergence("harmonic fit is singular".into()))?;
    let coef = &inv * (a.transpose() * &b);
    let ssr = (&a * &coef - &b).norm_squared();
    let s2 = ssr / (x.len() as f64 - 3.0).max(1.0);
    let (bc, bs) = (coef[1], coef[2]);
    let amp2 = bc * bc + bs * bs;
    let psi = bs.atan2(bc);
    // σ_ψ from the linearized atan2
    let g = [-bs / amp2, bc / amp2];
    let var = s2 * (g[0] * g[0] * inv[(1, 1)] + 2.0 * g[0] * g[1] * inv[(1, 2)] + g[1] * g[1] * inv[(2, 2)]);
    Ok((psi, var.max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shot_noise_is_seeded() {
        let base = vec![0.5; 20];
        let mut a = base.clone();
        let mut b = base.clone();
        add_shot_noise(&mut a, 100, 7, 3).unwrap();
        add_shot_noise(&mut b, 100, 7, 3).unwrap();
        assert_eq!(a, b);
        let mut c = base.clone();
        add_shot_noise(&mut c, 100, 8, 3).unwrap();
        assert_ne!(a, c);
        assert!(a.iter().all(|v| (0.0..=1.0).contains(v) && (v * 100.0).fract() == 0.0));
    }

    #[test]
    fn small_fits() {
        let x: Vec<f64> = (0..13).map(|k| k as f64 * PI / 6.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.7 * v.sin().abs()).collect();
        let (a, s) = fit_abs_sin(&x, &y);
        assert!((a - 0.7).abs() < 1e-12 && s < 1e-12);
        let (k, _) = fit_slope(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]);
        assert!((k - 2.0).abs() < 1e-12);
        let y: Vec<f64> = x.iter().map(|v| 0.5 + 0.3 * (2.0 * v - 0.4).cos()).collect();
        let (psi, s) = fit_second_harmonic(&x, &y).unwrap();
        assert!((psi - 0.4).abs() < 1e-10 && s < 1e-8);
    }

    #[test]
    fn spin_flip() {
        let d = 3;
        let down = crate::hilbert::spin_down();
        let rho = kron(&(&down * down.adjoint()), &crate::linalg::identity(d).map(|z| z / d as f64));
        let out = rotate_spin(&rho, PI, 0.0, d).unwrap();
        let st = SpinFockState::new(out).unwrap();
        assert!((st.spin()[(0, 0)].re - 1.0).abs() < 1e-12);
    }
}
