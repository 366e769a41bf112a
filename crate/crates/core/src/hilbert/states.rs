use nalgebra::Matrix2;
use num_complex::Complex64 as C64;

use super::FockSpace;
use crate::error::{domain, Error, Result};
use crate::linalg::{c, eigh, hermitian_defect, kron, trace, CMat, CVec, ZERO};

pub const PSD_TOL: f64 = 1e-6;
pub const TRACE_TOL: f64 = 1e-10;
pub const LEAKAGE_TOL: f64 = 1e-4;

pub fn thermal_state(nbar: f64, space: FockSpace) -> Result<CMat> {
    let space = FockSpace::new(space.dim)?;
    if !(nbar >= 0.0) {
        return domain(format!("thermal occupation {nbar} < 0"));
    }
    let q = nbar / (nbar + 1.0);
    let mut p: Vec<f64> = (0..space.dim).map(|n| q.powi(n as i32)).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= z);
    Ok(CMat::from_fn(space.dim, space.dim, |i, j| if i == j { c(p[i], 0.0) } else { ZERO }))
}

pub fn fock_state(n: usize, space: FockSpace) -> Result<CVec> {
    if n >= space.dim {
        return Err(Error::Truncation(format!("Fock level {n} outside dimension {}", space.dim)));
    }
    let mut v = CVec::zeros(space.dim);
    v[n] = c(1.0, 0.0);
    Ok(v)
}

/// Truncated coherent state, renormalized.
pub fn coherent_state(alpha: C64, space: FockSpace) -> Result<CVec> {
    if alpha.norm_sqr() > space.dim as f64 / 4.0 {
        return Err(Error::Truncation(format!("|α|² = {} > dim/4", alpha.norm_sqr())));
    }
    let mut v = CVec::zeros(space.dim);
    let mut amp = c((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..space.dim {
        v[n] = amp;
        amp *= alpha / ((n + 1) as f64).sqrt();
    }
    let norm = v.norm();
    Ok(v.unscale(norm))
}

/// S(ξ)|0⟩ with S(ξ) = exp(½(ξ*a² − ξa†²)), ξ = r·e^{iθ}. θ = 0 squeezes x̂.
pub fn squeezed_vacuum(r: f64, theta: f64, space: FockSpace) -> Result<CVec> {
    let mut v = CVec::zeros(space.dim);
    let ratio = -C64::from_polar(r.tanh(), theta);
    let mut amp = c(1.0 / r.cosh().sqrt(), 0.0);
    let mut m = 0;
    while 2 * m < space.dim {
        v[2 * m] = amp;
        m += 1;
        let k = 2.0 * m as f64;
        amp *= ratio * ((k * (k - 1.0)).sqrt() / k);
    }
    let norm = v.norm();
    if 1.0 - norm * norm > LEAKAGE_TOL {
        return Err(Error::Truncation(format!("squeezed vacuum r={r} loses {:e} norm", 1.0 - norm * norm)));
    }
    Ok(v.unscale(norm))
}

/// Reduced oscillator state (spin traced out) from a 2·dim density matrix.
pub fn partial_trace_spin(rho: &CMat) -> CMat {
    let d = rho.nrows() / 2;
    rho.view((0, 0), (d, d)) + rho.view((d, d), (d, d))
}

/// Means (⟨x̂⟩, ⟨p̂⟩) and symmetrized covariance of an oscillator state.
pub fn oscillator_covariance(rho: &CMat) -> ([f64; 2], Matrix2<f64>) {
    let d = rho.nrows();
    let mut ea = ZERO;
    let mut ea2 = ZERO;
    let mut en = 0.0;
    for n in 0..d {
        en += n as f64 * rho[(n, n)].re;
        if n + 1 < d {
            ea += ((n + 1) as f64).sqrt() * rho[(n + 1, n)];
        }
        if n + 2 < d {
            ea2 += (((n + 1) * (n + 2)) as f64).sqrt() * rho[(n + 2, n)];
        }
    }
    let s2 = std::f64::consts::SQRT_2;
    let mx = s2 * ea.re;
    let mp = s2 * ea.im;
    let vxx = ea2.re + en + 0.5 - mx * mx;
    let vpp = -ea2.re + en + 0.5 - mp * mp;
    let vxp = ea2.im - mx * mp;
    ([mx, mp], Matrix2::new(vxx, vxp, vxp, vpp))
}

/// Angle ψ minimizing Var(cos ψ x̂ + sin ψ p̂), in [0, π).
pub fn min_variance_angle(cov: &Matrix2<f64>) -> f64 {
    let psi = 0.5 * f64::atan2(2.0 * cov[(0, 1)], cov[(0, 0)] - cov[(1, 1)]) + std::f64::consts::FRAC_PI_2;
    psi.rem_euclid(std::f64::consts::PI)
}

/// Density matrix on spin ⊗ oscillator.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinFockState {
    pub rho: CMat,
    pub dim: usize,
}

impl SpinFockState {
    pub fn new(rho: CMat) -> Result<SpinFockState> {
        if rho.nrows() != rho.ncols() || rho.nrows() % 2 != 0 || rho.nrows() < 4 {
            return Err(Error::Mismatch(format!("density matrix shape {:?}", rho.shape())));
        }
        let dim = rho.nrows() / 2;
        Ok(SpinFockState { rho, dim })
    }

    pub fn product(spin: &CMat, osc: &CMat) -> Result<SpinFockState> {
        SpinFockState::new(kron(spin, osc))
    }

    pub fn pure(psi: &CVec) -> Result<SpinFockState> {
        SpinFockState::new(psi * psi.adjoint())
    }

    pub fn oscillator(&self) -> CMat {
        partial_trace_spin(&self.rho)
    }

    pub fn spin(&self) -> CMat {
        let d = self.dim;
        let mut s = CMat::zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                s[(a, b)] = trace(&self.rho.view((a * d, b * d), (d, d)).into_owned());
            }
        }
        s
    }

    /// Population in the top 5% of Fock levels (at least one level).
    pub fn leakage(&self) -> f64 {
        let osc = self.oscillator();
        let top = ((self.dim as f64) * 0.05).ceil().max(1.0) as usize;
        (self.dim - top..self.dim).map(|n| osc[(n, n)].re).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let herm = hermitian_defect(&self.rho);
        if herm > PSD_TOL {
            return Err(Error::InvalidState(format!("Hermiticity defect {herm:e}")));
        }
        let tr = trace(&self.rho);
        if (tr - 1.0).norm() > TRACE_TOL.max(1e2 * herm) {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let (vals, _) = eigh(&self.rho);
        if vals[0] < -PSD_TOL {
            return Err(Error::InvalidState(format!("eigenvalue {:e}", vals[0])));
        }
        let leak = self.leakage();
        if leak > LEAKAGE_TOL {
            return Err(Error::Truncation(format!("top-level population {leak:e} exceeds {LEAKAGE_TOL:e}")));
        }
        Ok(())
    }
}
