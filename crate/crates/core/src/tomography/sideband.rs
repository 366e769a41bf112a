use serde::{Deserialize, Serialize};

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};
use crate::hilbert::{FockSpace, SpinFockState};
use crate::linalg::{c, eigh, matmul, matmul_adj, CMat};
use crate::optimize::golden_max;

/// Resonant blue sideband H = (Ω/2)(σ₊a† + σ₋a), σ₊ = |↑⟩⟨↓|.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidebandParams {
    pub strength: f64,
    pub durations: Vec<f64>,
}

/// p↓ after each sideband duration.
pub fn simulate_blue_sideband(state: &SpinFockState, params: &SidebandParams) -> Result<Vec<f64>> {
    if !(params.strength > 0.0) {
        return domain("sideband strength must be > 0");
    }
    let d = state.dim;
    FockSpace::new(d)?;
    let mut h = CMat::zeros(2 * d, 2 * d);
    for n in 0..d - 1 {
        // |↓, n⟩ ↔ |↑, n + 1⟩
        let g = c(0.5 * params.strength * ((n + 1) as f64).sqrt(), 0.0);
        h[(n + 1, d + n)] = g;
        h[(d + n, n + 1)] = g;
    }
    let (vals, vecs) = eigh(&h);
    let rho_eig = matmul(&vecs.adjoint(), &matmul(&state.rho, &vecs));
    params
        .durations
        .iter()
        .map(|&t| {
            if !(t >= 0.0) {
                return domain("sideband durations must be ≥ 0");
            }
            let mut r = rho_eig.clone();
            for i in 0..2 * d {
                for j in 0..2 * d {
                    r[(i, j)] *= c(0.0, -(vals[i] - vals[j]) * t).exp();
                }
            }
            let full = matmul_adj(&matmul(&vecs, &r), &vecs);
            Ok((d..2 * d).map(|k| full[(k, k)].re).sum())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockFit {
    pub populations: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Common decay rate of the flopping envelope.
    pub decay: f64,
    pub ssr: f64,
}

/// Non-negative least squares, Lawson–Hanson active set.
fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let solve_passive = |passive: &[bool]| -> DVector<f64> {
        let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
        let sub = a.select_columns(&idx);
        let z = sub.clone().svd(true, true).solve(b, 1e-13).unwrap_or_else(|_| DVector::zeros(idx.len()));
        let mut full = DVector::zeros(n);
        for (k, &i) in idx.iter().enumerate() {
            full[i] = z[k];
        }
        full
    };
    for _ in 0..3 * n + 10 {
        let w = a.transpose() * (b - a * &x);
        let cand = (0..n).filter(|&k| !passive[k] && w[k] > 1e-14).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(k) = cand else { break };
        passive[k] = true;
        loop {
            let z = solve_passive(&passive);
            if (0..n).all(|i| !passive[i] || z[i] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for i in 0..n {
                if passive[i] && z[i] <= 0.0 {
                    alpha = alpha.min(x[i] / (x[i] - z[i]));
                }
            }
            x += (z - &x) * alpha;
            for i in 0..n {
                if passive[i] && x[i] <= 1e-15 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
    }
    x
}

fn design(times: &[f64], strength: f64, max_n: usize, decay: f64) -> DMatrix<f64> {
    DMatrix::from_fn(times.len(), max_n + 1, |i, n| {
        let t = times[i];
        0.5 * (1.0 + (-decay * t).exp() * (((n + 1) as f64).sqrt() * strength * t).cos())
    })
}

/// Fock populations P_0..P_max_n from a blue-sideband p↓ curve, with
/// p↓(t) = Σ P_n (1 + e^{−γt} cos(√(n+1)·Ω·t))/2 and P_n ≥ 0.
pub fn fit_fock_populations(times: &[f64], p_down: &[f64], strength: f64, max_n: usize) -> Result<FockFit> {
    if times.len() != p_down.len() {
        return Err(Error::Mismatch(format!("{} times for {} points", times.len(), p_down.len())));
    }
    if !(strength > 0.0) {
        return domain("sideband strength must be > 0");
    }
    if times.len() < 2 * (max_n + 2) {
        return domain(format!("{} points cannot resolve {} populations", times.len(), max_n + 1));
    }
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let beat = strength * (((max_n + 1) as f64).sqrt() - (max_n as f64).sqrt());
    if t_max * beat < std::f64::consts::PI {
        return domain(format!(
            "window {t_max:.3e} s is too short to separate n = {max_n} from n = {} (needs {:.3e} s)",
            max_n - 1,
            std::f64::consts::PI / beat
        ));
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let dt = sorted.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if dt * strength * ((max_n + 1) as f64).sqrt() >= std::f64::consts::PI {
        return domain("sampling too coarse for the fastest flopping frequency");
    }
    let b = DVector::from_column_slice(p_down);
    let solve = |gamma: f64| {
        let a = design(times, strength, max_n, gamma);
        let x = nnls(&a, &b);
        let ssr = (&a * &x - &b).norm_squared();
        (x, ssr, a)
    };
    let g_max = 10.0 / t_max;
    let (mut gamma, _) = golden_max(|g| -solve(g).1, 0.0, g_max, 1e-6 * g_max);
    if solve(0.0).1 <= solve(gamma).1 {
        gamma = 0.0;
    }
    let (x, ssr, a) = solve(gamma);
    let mut pops: Vec<f64> = x.iter().copied().collect();
    let total: f64 = pops.iter().sum();
    if total > 1.0 {
        pops.iter_mut().for_each(|p| *p /= total);
    }
    let dof = (times.len() as f64 - (max_n + 2) as f64).max(1.0);
    let s2 = ssr / dof;
    let active: Vec<usize> = (0..=max_n).filter(|&k| pops[k] > 0.0).collect();
    let mut sigma = vec![0.0; max_n + 1];
    if let Some(inv) = (a.select_columns(&active).transpose() * a.select_columns(&active)).try_inverse() {
        for (k, &i) in active.iter().enumerate() {
            sigma[i] = (s2 * inv[(k, k)]).max(0.0).sqrt();
        }
    }
    Ok(FockFit { populations: pops, sigma, decay: gamma, ssr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{fock_state, spin_down, thermal_state};

    fn down_with(osc: &CMat) -> SpinFockState {
        let s = spin_down();
        SpinFockState::product(&(&s * s.adjoint()), osc).unwrap()
    }

    #[test]
    fn fock_flopping_frequency() {
        let sp = FockSpace { dim: 12 };
        let om = 2.0 * std::f64::consts::PI * 10e3;
        let times: Vec<f64> = (0..30).map(|k| k as f64 * 7e-6).collect();
        for n in [0usize, 1, 3] {
            let psi = fock_state(n, sp).unwrap();
            let p = simulate_blue_sideband(
                &down_with(&(&psi * psi.adjoint())),
                &SidebandParams { strength: om, durations: times.clone() },
            )
            .unwrap();
            for (t, v) in times.iter().zip(&p) {
                let want = 0.5 * (1.0 + (((n + 1) as f64).sqrt() * om * t).cos());
                assert!((v - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn recovers_populations() {
        let sp = FockSpace { dim: 30 };
        let om = 2.0 * std::f64::consts::PI * 10e3;
        let times: Vec<f64> = (0..300).map(|k| k as f64 * 2e-6).collect();
        let params = SidebandParams { strength: om, durations: times.clone() };
        let vac = thermal_state(0.0, sp).unwrap();
        let p = simulate_blue_sideband(&down_with(&vac), &params).unwrap();
        let fit = fit_fock_populations(&times, &p, om, 6).unwrap();
        assert!((fit.populations[0] - 1.0).abs() < 1e-4, "{fit:?}");

        let th = thermal_state(0.5, sp).unwrap();
        let p = simulate_blue_sideband(&down_with(&th), &params).unwrap();
        let fit = fit_fock_populations(&times, &p, om, 10).unwrap();
        for (n, pn) in fit.populations.iter().enumerate() {
            let want = (2.0 / 3.0) * (1.0f64 / 3.0).powi(n as i32);
            assert!((pn - want).abs() < 1e-3, "n={n}: {pn} vs {want}");
        }
    }

    #[test]
    fn rejects_short_window() {
        let om = 2.0 * std::f64::consts::PI * 10e3;
        let times: Vec<f64> = (0..40).map(|k| k as f64 * 1e-6).collect();
        let p = vec![1.0; 40];
        assert!(fit_fock_populations(&times, &p, om, 15).is_err());
    }
}
