use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

use super::characteristic::{uniform_spacing, CharacteristicGrid};

/// Zero padding added to each side of the χ grid by default.
pub const DEFAULT_PAD: usize = 200;

/// W(x, p) on a uniform grid, row-major with p as the slow index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest |Im W| discarded; large values flag a non-Hermitian χ.
    pub imag_residue: f64,
}

impl WignerGrid {
    pub fn get(&self, ix: usize, ip: usize) -> f64 {
        self.values[ip * self.x.len() + ix]
    }

    pub fn dx(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn dp(&self) -> f64 {
        self.p[1] - self.p[0]
    }

    /// ∫W dx dp; one for a normalised state.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx() * self.dp()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Bilinear interpolation; zero outside the grid.
    pub fn interpolate(&self, x: f64, p: f64) -> f64 {
        let fx = (x - self.x[0]) / self.dx();
        let fp = (p - self.p[0]) / self.dp();
        if fx < 0.0 || fp < 0.0 || fx > (self.x.len() - 1) as f64 || fp > (self.p.len() - 1) as f64 {
            return 0.0;
        }
        let (i, j) = ((fx as usize).min(self.x.len() - 2), (fp as usize).min(self.p.len() - 2));
        let (u, v) = (fx - i as f64, fp - j as f64);
        (1.0 - u) * (1.0 - v) * self.get(i, j)
            + u * (1.0 - v) * self.get(i + 1, j)
            + (1.0 - u) * v * self.get(i, j + 1)
            + u * v * self.get(i + 1, j + 1)
    }
}

/// W(x, p) = (1/2π²) ∫ χ(β) e^{i√2(p·Re β − x·Im β)} d²β by FFT, after
/// zero-padding `pad` points on each side. A padded axis of M points at
/// spacing dβ gives an output spacing 2π/(√2·M·dβ).
pub fn wigner_from_characteristic(chi: &CharacteristicGrid, pad: usize) -> Result<WignerGrid> {
    chi.validate()?;
    let (nr, ni) = (chi.beta_re.len(), chi.beta_im.len());
    let (dr, di) = (uniform_spacing(&chi.beta_re)?, uniform_spacing(&chi.beta_im)?);
    let (mr, mi) = (nr + 2 * pad, ni + 2 * pad);
    if mr > 1 << 14 || mi > 1 << 14 {
        return domain(format!("padded grid {mr}×{mi} is too large"));
    }
    let r0 = chi.beta_re[0] - pad as f64 * dr;
    let i0 = chi.beta_im[0] - pad as f64 * di;
    let dp = 2.0 * PI / (SQRT_2 * mr as f64 * dr);
    let dx = 2.0 * PI / (SQRT_2 * mi as f64 * di);
    let cp = (mr as f64 - 1.0) / 2.0;
    let cx = (mi as f64 - 1.0) / 2.0;
    let p: Vec<f64> = (0..mr).map(|l| (l as f64 - cp) * dp).collect();
    let x: Vec<f64> = (0..mi).map(|k| (k as f64 - cx) * dx).collect();

    // buf[m][j]: padded χ, imaginary index m slow
    let mut buf = vec![C64::new(0.0, 0.0); mr * mi];
    for m in 0..ni {
        for j in 0..nr {
            buf[(m + pad) * mr + j + pad] = chi.get(j, m);
        }
    }
    let mut planner = FftPlanner::<f64>::new();

    // Re β → p: Σ_j χ_j e^{2πi(l − cp)j/M}, an inverse transform.
    let inv = planner.plan_fft_inverse(mr);
    let pre_r: Vec<C64> = (0..mr).map(|j| C64::from_polar(1.0, -2.0 * PI * cp * j as f64 / mr as f64)).collect();
    let post_r: Vec<C64> = p.iter().map(|&pl| C64::from_polar(1.0, SQRT_2 * pl * r0)).collect();
    for row in buf.chunks_mut(mr) {
        row.iter_mut().zip(&pre_r).for_each(|(z, w)| *z *= w);
        inv.process(row);
        row.iter_mut().zip(&post_r).for_each(|(z, w)| *z *= w);
    }

    // Im β → x: Σ_m χ_m e^{−2πi(k − cx)m/M}, a forward transform per column.
    let fwd = planner.plan_fft_forward(mi);
    let pre_i: Vec<C64> = (0..mi).map(|m| C64::from_polar(1.0, 2.0 * PI * cx * m as f64 / mi as f64)).collect();
    let post_i: Vec<C64> = x.iter().map(|&xk| C64::from_polar(1.0, -SQRT_2 * xk * i0)).collect();
    let scale = dr * di / (2.0 * PI * PI);
    let mut values = vec![0.0; mr * mi];
    let mut imag_residue: f64 = 0.0;
    let mut col = vec![C64::new(0.0, 0.0); mi];
    for l in 0..mr {
        for m in 0..mi {
            col[m] = buf[m * mr + l] * pre_i[m];
        }
        fwd.process(&mut col);
        for k in 0..mi {
            let w = col[k] * post_i[k] * scale;
            values[l * mi + k] = w.re;
            imag_residue = imag_residue.max(w.im.abs());
        }
    }
    Ok(WignerGrid { x, p, values, imag_residue })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{fock_state, FockSpace};
    use crate::tomography::characteristic::{
        characteristic_function, squeezed_characteristic, symmetric_axis, vacuum_characteristic, ChiMethod,
    };

    #[test]
    fn vacuum() {
        let ax = symmetric_axis(41, 6.0).unwrap();
        let w = wigner_from_characteristic(&vacuum_characteristic(&ax, &ax), DEFAULT_PAD).unwrap();
        assert_eq!(w.x.len(), 441);
        assert!((w.integral() - 1.0).abs() < 1e-6);
        assert!(w.imag_residue < 1e-12);
        for (x, p) in [(0.0f64, 0.0f64), (0.5, -0.3), (1.0, 1.0)] {
            let want = (-(x * x + p * p)).exp() / PI;
            assert!((w.interpolate(x, p) - want).abs() < 2e-3, "({x},{p})");
        }
        let c = (w.x.len() - 1) / 2;
        assert!((w.get(c, c) - 1.0 / PI).abs() < 1e-6);
    }

    #[test]
    fn squeezed_orientation() {
        // θ = 0 squeezes x: W ∝ exp(−x² e^{2r} − p² e^{−2r})
        let r: f64 = 0.5;
        let ax = symmetric_axis(61, 8.0).unwrap();
        let w = wigner_from_characteristic(&squeezed_characteristic(r, 0.0, &ax, &ax), 100).unwrap();
        for (x, p) in [(0.3f64, 0.0f64), (0.0, 0.8), (0.2, 0.5)] {
            let want = (-(x * x) * (2.0 * r).exp() - p * p * (-2.0 * r).exp()).exp() / PI;
            assert!((w.interpolate(x, p) - want).abs() < 3e-3, "({x},{p})");
        }
    }

    #[test]
    fn fock_one_is_negative_at_origin() {
        let ax = symmetric_axis(41, 6.0).unwrap();
        let mut chi = vacuum_characteristic(&ax, &ax);
        for (k, z) in chi.values.iter_mut().enumerate() {
            let (br, bi) = (ax[k % 41], ax[k / 41]);
            *z *= 1.0 - br * br - bi * bi;
        }
        let w = wigner_from_characteristic(&chi, DEFAULT_PAD).unwrap();
        let c = (w.x.len() - 1) / 2;
        assert!((w.get(c, c) + 1.0 / PI).abs() < 1e-4);
        assert!((w.integral() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn truncated_state_matches_direct_chi() {
        let sp = FockSpace { dim: 80 };
        let psi = fock_state(1, sp).unwrap();
        let ax = symmetric_axis(41, 3.0).unwrap();
        let chi = characteristic_function(&(&psi * psi.adjoint()), &ax, &ax, ChiMethod::Direct).unwrap();
        let w = wigner_from_characteristic(&chi, DEFAULT_PAD).unwrap();
        let c = (w.x.len() - 1) / 2;
        // χ is cut at |β| = 3 where it is still ~1e-3; the origin is sensitive
        assert!((w.get(c, c) + 1.0 / PI).abs() < 2e-2);
    }

    #[test]
    fn padding_only_refines() {
        let ax = symmetric_axis(41, 6.0).unwrap();
        let chi = vacuum_characteristic(&ax, &ax);
        let a = wigner_from_characteristic(&chi, 0).unwrap();
        let b = wigner_from_characteristic(&chi, DEFAULT_PAD).unwrap();
        for ix in (0..a.x.len()).step_by(5) {
            for ip in (0..a.p.len()).step_by(5) {
                let (x, p) = (a.x[ix], a.p[ip]);
                if x.abs() < 2.0 && p.abs() < 2.0 {
                    assert!((a.get(ix, ip) - b.interpolate(x, p)).abs() < 5e-3);
                }
            }
        }
    }
}
