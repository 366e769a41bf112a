use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_density, EvolutionSpec, HeatingModel};
use crate::error::{domain, Error, Result};
use crate::hilbert::{spin_axis_op, Displacer, FockSpace, SpinAxis, SpinFockState};
use crate::linalg::{eigh, CMat, CVec};
use crate::model::{add_sdf_rwa, RampShape, SdfParams, TdHamiltonian};

/// Spin state the probe starts from; the readout projects back onto it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinReadout {
    #[default]
    Down,
    Up,
}

impl SpinReadout {
    pub fn vector(self) -> CVec {
        match self {
            SpinReadout::Up => crate::hilbert::spin_up(),
            SpinReadout::Down => crate::hilbert::spin_down(),
        }
    }
}

/// Resonant probe force. A duration t displaces by ±β, β = Ω·t·e^{iφ}/2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeParams {
    pub strength: f64,
    pub motional_phase: f64,
    pub spin_axis: SpinAxis,
    pub durations: Vec<f64>,
    #[serde(default)]
    pub readout: SpinReadout,
}

impl ProbeParams {
    pub fn new(strength: f64, motional_phase: f64, durations: Vec<f64>) -> ProbeParams {
        ProbeParams {
            strength,
            motional_phase,
            spin_axis: SpinAxis::equatorial(0.0),
            durations,
            readout: SpinReadout::Down,
        }
    }

    pub fn beta(&self, t: f64) -> C64 {
        C64::from_polar(0.5 * self.strength * t, self.motional_phase)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strength >= 0.0) {
            return domain(format!("probe strength {} < 0", self.strength));
        }
        if self.durations.iter().any(|&t| !(t >= 0.0)) {
            return domain("probe durations must be ≥ 0");
        }
        SpinAxis::from_bloch(self.spin_axis.bloch)?;
        Ok(())
    }

    /// The probe as an RWA force; the −π/2 makes the displacement ∓β on the
    /// ±1 eigenstates of the probe spin axis.
    pub fn sdf(&self) -> SdfParams {
        SdfParams {
            strength: self.strength,
            detuning: 0.0,
            spin_axis: self.spin_axis,
            motional_phase: self.motional_phase - FRAC_PI_2,
        }
    }
}

/// Squeezed thermal state seen by the probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingModel {
    pub r: f64,
    pub theta: f64,
    pub nbar: f64,
    pub contrast: f64,
}

impl SplittingModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.r >= 0.0) || !(self.nbar >= 0.0) || !(0.0..=1.0).contains(&self.contrast) {
            return domain(format!("invalid splitting model {self:?}"));
        }
        Ok(())
    }

    /// p↓ at displacement β.
    pub fn p_down(&self, beta: C64) -> f64 {
        let (mag, phi) = beta.to_polar();
        let g = 4.0 * mag * mag * (self.nbar + 0.5);
        let a = phi - 0.5 * self.theta;
        let h = (2.0 * self.r).exp() * a.cos().powi(2) + (-2.0 * self.r).exp() * a.sin().powi(2);
        0.5 * (1.0 + self.contrast * (-g * h).exp())
    }
}

pub fn analytic_splitting(model: &SplittingModel, probe: &ProbeParams) -> Result<Vec<f64>> {
    model.validate()?;
    probe.validate()?;
    Ok(probe.durations.iter().map(|&t| model.p_down(probe.beta(t))).collect())
}

pub fn squeezing_db(r: f64) -> f64 {
    10.0 * (2.0 * r).exp().log10()
}

/// Probe splitting of a spin ⊗ oscillator state. Without heating the probe
/// unitary Σ_s |s⟩⟨s| ⊗ D(−sβ) is applied exactly; with heating the probe
/// force is integrated under the master equation.
pub fn simulate_probe_splitting(
    state: &SpinFockState,
    probe: &ProbeParams,
    heating: &HeatingModel,
) -> Result<Vec<f64>> {
    probe.validate()?;
    let dim = state.dim;
    let space = FockSpace::new(dim)?;
    let readout = probe.readout.vector();
    if heating.rate > 0.0 {
        return probe_lindblad(state, probe, heating, space, &readout);
    }
    let exact = ExactProbe::new(state, probe.spin_axis, &readout)?;
    probe.durations.iter().map(|&t| exact.p(probe.beta(t))).collect()
}

/// Readout probability after the ideal probe unitary Σ_s |s⟩⟨s| ⊗ D(−sβ),
/// with the spin blocks of ρ in the probe eigenbasis cached.
pub(crate) struct ExactProbe {
    disp: Displacer,
    vals: Vec<f64>,
    weights: [[C64; 2]; 2],
    blocks: [[CMat; 2]; 2],
}

impl ExactProbe {
    pub(crate) fn new(state: &SpinFockState, axis: SpinAxis, readout: &CVec) -> Result<ExactProbe> {
        let dim = state.dim;
        let disp = Displacer::new(FockSpace::new(dim)?)?;
        let (vals, vecs) = eigh(&spin_axis_op(axis)?);
        let overlaps: Vec<C64> = (0..2).map(|k| readout.dotc(&vecs.column(k).into_owned())).collect();
        let block = |k: usize, l: usize| -> CMat {
            let mut m = CMat::zeros(dim, dim);
            for a in 0..2 {
                for b in 0..2 {
                    let w = vecs[(a, k)].conj() * vecs[(b, l)];
                    if w.norm() > 0.0 {
                        m += state.rho.view((a * dim, b * dim), (dim, dim)).map(|z| z * w);
                    }
                }
            }
            m
        };
        let w = |k: usize, l: usize| overlaps[k] * overlaps[l].conj();
        Ok(ExactProbe {
            disp,
            vals: vals.to_vec(),
            weights: [[w(0, 0), w(0, 1)], [w(1, 0), w(1, 1)]],
            blocks: [[block(0, 0), block(0, 1)], [block(1, 0), block(1, 1)]],
        })
    }

    pub(crate) fn p(&self, beta: C64) -> Result<f64> {
        let mut p = C64::new(0.0, 0.0);
        for k in 0..2 {
            for l in 0..2 {
                let w = self.weights[k][l];
                if w.norm() == 0.0 {
                    continue;
                }
                // tr[ρ_{ss'} D(s'β) D(−sβ)] = tr[ρ_{ss'} D((s' − s)β)]
                let shift = beta * (self.vals[l] - self.vals[k]);
                let tr = if shift.norm() == 0.0 {
                    self.blocks[k][l].diagonal().sum()
                } else {
                    self.disp.expect(&self.blocks[k][l], shift)?
                };
                p += w * tr;
            }
        }
        Ok(p.re)
    }
}

fn probe_lindblad(
    state: &SpinFockState,
    probe: &ProbeParams,
    heating: &HeatingModel,
    space: FockSpace,
    readout: &CVec,
) -> Result<Vec<f64>> {
    let mut order: Vec<usize> = (0..probe.durations.len()).collect();
    order.sort_by(|&a, &b| probe.durations[a].total_cmp(&probe.durations[b]));
    let t_max = probe.durations.iter().copied().fold(0.0, f64::max);
    let mut out = vec![0.0; probe.durations.len()];
    let proj = |rho: &CMat| -> f64 {
        let d = space.dim;
        let mut p = C64::new(0.0, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                let tr: C64 = (0..d).map(|n| rho[(a * d + n, b * d + n)]).sum();
                p += readout[a].conj() * tr * readout[b];
            }
        }
        p.re
    };
    if t_max == 0.0 {
        out.iter_mut().for_each(|v| *v = proj(&state.rho));
        return Ok(out);
    }
    let mut h = TdHamiltonian::zero(space.total());
    add_sdf_rwa(&mut h, &probe.sdf(), RampShape::flat(t_max)?, space)?;
    let samples: Vec<f64> = order.iter().map(|&i| probe.durations[i]).collect();
    let spec = EvolutionSpec::new(h, 0.0, t_max).with_samples(samples);
    let diss = heating.dissipator(space, true)?;
    let traj = evolve_density(&state.rho, &spec, &diss).map_err(|e| e.context("probe evolution"))?;
    for (k, rho) in order.iter().zip(&traj) {
        let leak = SpinFockState { rho: rho.clone(), dim: space.dim }.leakage();
        if leak > crate::hilbert::LEAKAGE_TOL {
            return Err(Error::Truncation(format!("probe leakage {leak:e}")));
        }
        out[*k] = proj(rho);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{spin_down, squeezed_vacuum, thermal_state};

    fn product(osc: &CMat, spin: &CVec) -> SpinFockState {
        SpinFockState::product(&(spin * spin.adjoint()), osc).unwrap()
    }

    #[test]
    fn formula_reductions() {
        let probe = ProbeParams::new(2.0 * std::f64::consts::PI * 5e3, 0.0, vec![0.0, 10e-6, 30e-6]);
        let m = SplittingModel { r: 0.0, theta: 0.0, nbar: 0.0, contrast: 1.0 };
        let p = analytic_splitting(&m, &probe).unwrap();
        for (t, v) in probe.durations.iter().zip(&p) {
            let b = probe.beta(*t).norm();
            assert!((v - 0.5 * (1.0 + (-2.0 * b * b).exp())).abs() < 1e-15);
        }
        let c = SplittingModel { contrast: 0.9, ..m };
        assert!((analytic_splitting(&c, &probe).unwrap()[0] - 0.95).abs() < 1e-15);
        let sq = SplittingModel { r: 1.09, ..m };
        let b = C64::new(0.1, 0.0);
        let ratio = (2.0 * (1.0 - sq.p_down(b)) - 1.0).abs().ln() / (2.0 * (1.0 - m.p_down(b)) - 1.0).abs().ln();
        assert!((ratio - (2.18f64).exp()).abs() < 1e-9);
        assert!(analytic_splitting(&SplittingModel { contrast: 1.5, ..m }, &probe).is_err());
    }

    #[test]
    fn db() {
        assert_eq!(squeezing_db(0.0), 0.0);
        assert!((squeezing_db(1.09) - 9.47).abs() < 0.01);
        assert!((squeezing_db(10f64.ln() / 2.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn exact_probe_matches_closed_form() {
        let sp = FockSpace { dim: 40 };
        let durations: Vec<f64> = (0..25).map(|k| k as f64 * 4e-6).collect();
        let probe = ProbeParams::new(2.0 * std::f64::consts::PI * 4.6e3, 0.0, durations);
        for nbar in [0.0, 0.09] {
            let st = product(&thermal_state(nbar, sp).unwrap(), &spin_down());
            let sim = simulate_probe_splitting(&st, &probe, &HeatingModel { rate: 0.0 }).unwrap();
            let an = analytic_splitting(&SplittingModel { r: 0.0, theta: 0.0, nbar, contrast: 1.0 }, &probe).unwrap();
            for (a, b) in sim.iter().zip(&an) {
                assert!((a - b).abs() < 1e-4);
            }
        }
        let psi = squeezed_vacuum(0.6, 0.0, sp).unwrap();
        let st = product(&(&psi * psi.adjoint()), &spin_down());
        for phi in [0.0, 0.5, FRAC_PI_2] {
            let p = ProbeParams { motional_phase: phi, ..probe.clone() };
            let sim = simulate_probe_splitting(&st, &p, &HeatingModel { rate: 0.0 }).unwrap();
            let an = analytic_splitting(&SplittingModel { r: 0.6, theta: 0.0, nbar: 0.0, contrast: 1.0 }, &p).unwrap();
            for (a, b) in sim.iter().zip(&an) {
                assert!((a - b).abs() < 1e-6, "phi={phi}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn lindblad_probe_agrees_without_heating_effects() {
        let sp = FockSpace { dim: 30 };
        let durations: Vec<f64> = (0..10).map(|k| k as f64 * 8e-6).collect();
        let probe = ProbeParams::new(2.0 * std::f64::consts::PI * 4.6e3, 0.3, durations);
        let st = product(&thermal_state(0.09, sp).unwrap(), &spin_down());
        let exact = simulate_probe_splitting(&st, &probe, &HeatingModel { rate: 0.0 }).unwrap();
        let slow = simulate_probe_splitting(&st, &probe, &HeatingModel { rate: 1e-9 }).unwrap();
        for (a, b) in exact.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-7);
        }
    }
}
