use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::optimize::levenberg_marquardt;

use super::splitting::squeezing_db;

/// How motional heating during the squeezing pulse enters the fitted model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum HeatingInFit {
    /// The squeezed state is taken to have the ground-state occupation.
    #[default]
    Off,
    /// n̄ = n̄_gs + ṅ·T.
    Linear { rate: f64, duration: f64 },
    /// Heating quanta added at time t are squeezed only by the remainder of
    /// the pulse: n̄ = n̄_gs + ṅ·T·(1 − e^{−2r})/(2r) along the probed axis.
    Propagated { rate: f64, duration: f64 },
}

impl HeatingInFit {
    pub fn nbar(&self, nbar_gs: f64, r: f64) -> f64 {
        match *self {
            HeatingInFit::Off => nbar_gs,
            HeatingInFit::Linear { rate, duration } => nbar_gs + rate * duration,
            HeatingInFit::Propagated { rate, duration } => {
                let x = 2.0 * r;
                let f = if x.abs() < 1e-8 { 1.0 - 0.5 * x } else { (1.0 - (-x).exp()) / x };
                nbar_gs + rate * duration * f
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub nbar_gs: f64,
    pub heating: HeatingInFit,
    /// Probe phase minus θ/2; zero probes the anti-squeezed variance.
    pub relative_angle: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> FitOptions {
        FitOptions { nbar_gs: 0.0, heating: HeatingInFit::Off, relative_angle: 0.0, max_iter: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezingFit {
    pub r: f64,
    pub r_sigma: f64,
    pub contrast: f64,
    pub contrast_sigma: f64,
    /// Probe force strength from the thermal reference.
    pub probe_strength: f64,
    pub probe_strength_sigma: f64,
    pub reference_contrast: f64,
    pub nbar_eff: f64,
    pub ssr: f64,
    pub db: f64,
}

fn anisotropy(r: f64, angle: f64) -> f64 {
    (2.0 * r).exp() * angle.cos().powi(2) + (-2.0 * r).exp() * angle.sin().powi(2)
}

/// Time at which the normalised contrast first falls below 1/e.
fn e_fold_time(t: &[f64], p: &[f64], contrast: f64) -> Option<f64> {
    let target = (-1.0f64).exp();
    let y = |i: usize| (2.0 * p[i] - 1.0) / contrast;
    (1..t.len()).find(|&i| y(i) < target).map(|i| {
        let (y0, y1) = (y(i - 1), y(i));
        let w = if (y0 - y1).abs() > 1e-15 { (y0 - target) / (y0 - y1) } else { 0.5 };
        t[i - 1] + w * (t[i] - t[i - 1])
    })
}

/// Two-stage fit: the probe strength and contrast from the unsqueezed
/// reference, then r and contrast from the squeezed curve at fixed strength.
pub fn fit_squeezing_parameter(
    durations: &[f64],
    reference: &[f64],
    squeezed: &[f64],
    opts: &FitOptions,
) -> Result<SqueezingFit> {
    let m = durations.len();
    if reference.len() != m || squeezed.len() != m {
        return Err(Error::Mismatch(format!(
            "{m} durations, {} reference points, {} squeezed points",
            reference.len(),
            squeezed.len()
        )));
    }
    if m < 3 {
        return domain("need at least 3 probe durations");
    }
    if durations.iter().chain(reference).chain(squeezed).any(|v| !v.is_finite()) {
        return domain("non-finite data");
    }
    if !(opts.nbar_gs >= 0.0) {
        return domain("n̄_gs must be ≥ 0");
    }
    let t_max = durations.iter().copied().fold(0.0, f64::max);
    if t_max <= 0.0 {
        return domain("probe durations must include t > 0");
    }

    let c0 = |p: &[f64]| {
        let i0 = (0..m).min_by(|&a, &b| durations[a].total_cmp(&durations[b])).unwrap();
        if durations[i0] == 0.0 {
            (2.0 * p[i0] - 1.0).clamp(0.05, 1.0)
        } else {
            1.0
        }
    };
    let nbar0 = opts.nbar_gs;
    let cref = c0(reference);
    let te = e_fold_time(durations, reference, cref).unwrap_or(t_max);
    let omega0 = 1.0 / (te * (nbar0 + 0.5).sqrt());
    let ref_model = |q: &[f64], t: f64| 0.5 * (1.0 + q[1] * (-(q[0] * t).powi(2) * (nbar0 + 0.5)).exp());
    let stage1 = levenberg_marquardt(
        |q| durations.iter().zip(reference).map(|(&t, &y)| ref_model(q, t) - y).collect(),
        &[omega0, cref],
        &[(0.0, f64::INFINITY), (0.0, 1.0)],
        opts.max_iter,
    )
    .map_err(|e| e.context("reference fit"))?;
    let omega = stage1.params[0];
    if omega <= 0.0 {
        return Err(Error::NoConvergence("reference fit gave zero probe strength".into()));
    }

    let csq = c0(squeezed);
    let angle = opts.relative_angle;
    let heating = opts.heating;
    let sq_model = move |q: &[f64], t: f64| {
        let nb = heating.nbar(nbar0, q[0]);
        0.5 * (1.0 + q[1] * (-(omega * t).powi(2) * (nb + 0.5) * anisotropy(q[0], angle)).exp())
    };
    let r0 = match e_fold_time(durations, squeezed, csq) {
        Some(ts) => {
            let h = 1.0 / ((omega * ts).powi(2) * (nbar0 + 0.5));
            (0.5 * h.max(1.0).ln()).max(0.05)
        }
        None => 0.05,
    };
    let stage2 = levenberg_marquardt(
        |q| durations.iter().zip(squeezed).map(|(&t, &y)| sq_model(q, t) - y).collect(),
        &[r0, csq],
        &[(0.0, 10.0), (0.0, 1.0)],
        opts.max_iter,
    )
    .map_err(|e| e.context("squeezed fit"))?;
    let r = stage2.params[0];
    Ok(SqueezingFit {
        r,
        r_sigma: stage2.sigma[0],
        contrast: stage2.params[1],
        contrast_sigma: stage2.sigma[1],
        probe_strength: omega,
        probe_strength_sigma: stage1.sigma[0],
        reference_contrast: stage1.params[1],
        nbar_eff: heating.nbar(nbar0, r),
        ssr: stage1.ssr + stage2.ssr,
        db: squeezing_db(r),
    })
}
