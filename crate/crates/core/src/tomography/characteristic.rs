use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::hilbert::{spin_down, Displacer, FockSpace, SpinAxis, SpinFockState};
use crate::linalg::{c, CMat, CVec};

use super::splitting::ExactProbe;

/// χ(β) = tr[ρ D(β)] sampled on a rectangular grid, row-major with the
/// imaginary axis as the slow index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicGrid {
    pub beta_re: Vec<f64>,
    pub beta_im: Vec<f64>,
    pub values: Vec<C64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiMethod {
    /// tr[ρ D(β)] evaluated directly.
    #[default]
    Direct,
    /// Probe force, optional π/2 spin rotation and |↓⟩ readout, as measured.
    Circuit,
}

/// n evenly spaced points on [−extent, extent].
pub fn symmetric_axis(n: usize, extent: f64) -> Result<Vec<f64>> {
    if n < 2 || !(extent > 0.0) {
        return domain(format!("axis needs n ≥ 2 and extent > 0 (got {n}, {extent})"));
    }
    Ok((0..n).map(|k| -extent + 2.0 * extent * k as f64 / (n - 1) as f64).collect())
}

/// Spacing of a uniform axis.
pub fn uniform_spacing(axis: &[f64]) -> Result<f64> {
    if axis.len() < 2 {
        return Err(Error::NonUniformGrid("axis has fewer than 2 points".into()));
    }
    let d = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
    if !(d > 0.0) {
        return Err(Error::NonUniformGrid("axis is not increasing".into()));
    }
    for (k, w) in axis.windows(2).enumerate() {
        if ((w[1] - w[0]) - d).abs() > 1e-9 * d.max(1.0) {
            return Err(Error::NonUniformGrid(format!("spacing changes at index {k}")));
        }
    }
    Ok(d)
}

impl CharacteristicGrid {
    pub fn get(&self, i_re: usize, i_im: usize) -> C64 {
        self.values[i_im * self.beta_re.len() + i_re]
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.beta_re.len() * self.beta_im.len() {
            return Err(Error::Mismatch(format!(
                "{} values for a {}×{} grid",
                self.values.len(),
                self.beta_re.len(),
                self.beta_im.len()
            )));
        }
        uniform_spacing(&self.beta_re)?;
        uniform_spacing(&self.beta_im)?;
        Ok(())
    }

    /// Largest |χ(−β) − χ(β)*| over grid points whose mirror is on the grid.
    pub fn hermiticity_defect(&self) -> f64 {
        let (nr, ni) = (self.beta_re.len(), self.beta_im.len());
        let mut worst: f64 = 0.0;
        for j in 0..ni {
            for i in 0..nr {
                let (mi, mj) = (nr - 1 - i, ni - 1 - j);
                if (self.beta_re[mi] + self.beta_re[i]).abs() < 1e-9
                    && (self.beta_im[mj] + self.beta_im[j]).abs() < 1e-9
                {
                    worst = worst.max((self.get(mi, mj) - self.get(i, j).conj()).norm());
                }
            }
        }
        worst
    }
}

/// Characteristic function of an oscillator density matrix.
pub fn characteristic_function(
    rho: &CMat,
    beta_re: &[f64],
    beta_im: &[f64],
    method: ChiMethod,
) -> Result<CharacteristicGrid> {
    uniform_spacing(beta_re)?;
    uniform_spacing(beta_im)?;
    if rho.nrows() != rho.ncols() {
        return Err(Error::Mismatch("density matrix is not square".into()));
    }
    let space = FockSpace::new(rho.nrows())?;
    let points: Vec<C64> = beta_im.iter().flat_map(|&bi| beta_re.iter().map(move |&br| c(br, bi))).collect();
    let values: Vec<C64> = match method {
        ChiMethod::Direct => {
            let disp = Displacer::new(space)?;
            points.par_iter().map(|&b| disp.expect(rho, b)).collect::<Result<_>>()?
        }
        ChiMethod::Circuit => {
            let down = spin_down();
            let state = SpinFockState::product(&(&down * down.adjoint()), rho)?;
            // Readout after R_x(π/2) is a projection onto R_x(π/2)†|↓⟩ = |−y⟩.
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let minus_y = CVec::from_vec(vec![c(s, 0.0), c(0.0, -s)]);
            let axis = SpinAxis::equatorial(0.0);
            let real = ExactProbe::new(&state, axis, &down)?;
            let imag = ExactProbe::new(&state, axis, &minus_y)?;
            // The probe displaces the two arms by ∓b, so χ(β) needs b = β/2
            // and the probe phase is arg β.
            points
                .par_iter()
                .map(|&b| {
                    let half = b * 0.5;
                    let re = 2.0 * real.p(half)? - 1.0;
                    let im = 1.0 - 2.0 * imag.p(half)?;
                    Ok(c(re, im))
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(CharacteristicGrid { beta_re: beta_re.to_vec(), beta_im: beta_im.to_vec(), values })
}

/// χ of the vacuum, e^{−|β|²/2}.
pub fn vacuum_characteristic(beta_re: &[f64], beta_im: &[f64]) -> CharacteristicGrid {
    let values = beta_im
        .iter()
        .flat_map(|&bi| beta_re.iter().map(move |&br| c((-(br * br + bi * bi) / 2.0).exp(), 0.0)))
        .collect();
    CharacteristicGrid { beta_re: beta_re.to_vec(), beta_im: beta_im.to_vec(), values }
}

/// χ of the squeezed vacuum S(re^{iθ})|0⟩.
pub fn squeezed_characteristic(r: f64, theta: f64, beta_re: &[f64], beta_im: &[f64]) -> CharacteristicGrid {
    let values = beta_im
        .iter()
        .flat_map(|&bi| {
            beta_re.iter().map(move |&br| {
                let b = c(br, bi);
                let (mag, phi) = b.to_polar();
                let a = phi - 0.5 * theta;
                let h = (2.0 * r).exp() * a.cos().powi(2) + (-2.0 * r).exp() * a.sin().powi(2);
                c((-0.5 * mag * mag * h).exp(), 0.0)
            })
        })
        .collect();
    CharacteristicGrid { beta_re: beta_re.to_vec(), beta_im: beta_im.to_vec(), values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_state, squeezed_vacuum, thermal_state};

    #[test]
    fn axes() {
        let a = symmetric_axis(41, 3.0).unwrap();
        assert_eq!(a.len(), 41);
        assert!((a[20]).abs() < 1e-15);
        assert!((uniform_spacing(&a).unwrap() - 0.15).abs() < 1e-12);
        assert!(matches!(uniform_spacing(&[0.0, 1.0, 3.0]), Err(Error::NonUniformGrid(_))));
        assert!(symmetric_axis(1, 1.0).is_err());
    }

    #[test]
    fn direct_matches_closed_forms() {
        let sp = FockSpace { dim: 40 };
        let ax = symmetric_axis(13, 2.0).unwrap();
        let vac = thermal_state(0.0, sp).unwrap();
        let g = characteristic_function(&vac, &ax, &ax, ChiMethod::Direct).unwrap();
        let want = vacuum_characteristic(&ax, &ax);
        for (a, b) in g.values.iter().zip(&want.values) {
            assert!((a - b).norm() < 1e-10);
        }
        let psi = squeezed_vacuum(0.5, 0.7, sp).unwrap();
        let g = characteristic_function(&(&psi * psi.adjoint()), &ax, &ax, ChiMethod::Direct).unwrap();
        let want = squeezed_characteristic(0.5, 0.7, &ax, &ax);
        for (a, b) in g.values.iter().zip(&want.values) {
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
        assert!(g.hermiticity_defect() < 1e-10);
    }

    #[test]
    fn circuit_matches_direct() {
        let sp = FockSpace { dim: 40 };
        let ax = symmetric_axis(9, 2.0).unwrap();
        // a coherent state has a non-trivial imaginary part
        let psi = coherent_state(c(0.4, -0.3), sp).unwrap();
        let rho = &psi * psi.adjoint();
        let d = characteristic_function(&rho, &ax, &ax, ChiMethod::Direct).unwrap();
        let k = characteristic_function(&rho, &ax, &ax, ChiMethod::Circuit).unwrap();
        let imag: f64 = d.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(imag > 0.1);
        for (a, b) in d.values.iter().zip(&k.values) {
            assert!((a - b).norm() < 1e-3, "{a} vs {b}");
        }
    }
}
