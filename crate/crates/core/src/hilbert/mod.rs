//! Truncated Fock space, Pauli algebra, reference states and state metrics.
//!
//! Ordering is spin ⊗ oscillator everywhere. Spin basis index 0 is |↑⟩ and
//! index 1 is |↓⟩, so σz = diag(1, −1).

mod displacement;
mod metrics;
mod states;

pub use displacement::{displacement_op, Displacer};
pub use metrics::{fidelity, fidelity_pure, fidelity_pure_mixed};
pub use states::{
    coherent_state, fock_state, min_variance_angle, oscillator_covariance, partial_trace_spin, squeezed_vacuum,
    thermal_state, SpinFockState, LEAKAGE_TOL, PSD_TOL, TRACE_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, kron, CMat, Csr, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    pub dim: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<FockSpace> {
        if dim < 2 {
            return Err(Error::InvalidDimension(format!("Fock dimension {dim} < 2")));
        }
        Ok(FockSpace { dim })
    }

    /// Full spin ⊗ oscillator dimension.
    pub fn total(&self) -> usize {
        2 * self.dim
    }
}

/// (a, a†, a†a)
pub fn ladder_ops(space: FockSpace) -> Result<(CMat, CMat, CMat)> {
    let space = FockSpace::new(space.dim)?;
    let a = annihilation(space.dim);
    let ad = a.adjoint();
    let n = CMat::from_fn(space.dim, space.dim, |i, j| if i == j { c(i as f64, 0.0) } else { ZERO });
    Ok((a, ad, n))
}

pub fn annihilation(dim: usize) -> CMat {
    CMat::from_fn(dim, dim, |i, j| if j == i + 1 { c((j as f64).sqrt(), 0.0) } else { ZERO })
}

pub fn annihilation_csr(dim: usize) -> Csr {
    Csr::from_dense(&annihilation(dim))
}

pub fn number_op(dim: usize) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_fn(dim, |i, _| c(i as f64, 0.0)))
}

/// a^k
pub fn ladder_power(dim: usize, k: usize) -> CMat {
    let a = annihilation(dim);
    let mut out = CMat::identity(dim, dim);
    for _ in 0..k {
        out = &out * &a;
    }
    out
}

/// Oscillator mode: angular frequency (rad/s), initial thermal occupation and
/// heating rate (quanta/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub freq: f64,
    pub nbar: f64,
    pub heating_rate: f64,
}

impl OscillatorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nbar >= 0.0) {
            return Err(Error::Domain(format!("nbar {} < 0", self.nbar)));
        }
        if !(self.heating_rate >= 0.0) {
            return Err(Error::Domain(format!("heating rate {} < 0", self.heating_rate)));
        }
        Ok(())
    }
}

/// Unit Bloch vector n; the operator is n·σ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinAxis {
    pub bloch: [f64; 3],
}

impl SpinAxis {
    /// σ_φ = cos φ σx + sin φ σy
    pub fn equatorial(phi: f64) -> SpinAxis {
        SpinAxis { bloch: [phi.cos(), phi.sin(), 0.0] }
    }

    pub fn z() -> SpinAxis {
        SpinAxis { bloch: [0.0, 0.0, 1.0] }
    }

    pub fn from_bloch(v: [f64; 3]) -> Result<SpinAxis> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Normalization(norm));
        }
        Ok(SpinAxis { bloch: v })
    }

    /// Normalizes any nonzero vector.
    pub fn along(v: [f64; 3]) -> Result<SpinAxis> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm < 1e-12 {
            return Err(Error::Normalization(norm));
        }
        Ok(SpinAxis { bloch: [v[0] / norm, v[1] / norm, v[2] / norm] })
    }
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn spin_axis_op(axis: SpinAxis) -> Result<CMat> {
    let axis = SpinAxis::from_bloch(axis.bloch)?;
    let [x, y, z] = axis.bloch;
    Ok(pauli_x().scale(x) + pauli_y().scale(y) + pauli_z().scale(z))
}

/// Spin state |↑⟩ (index 0) or |↓⟩ (index 1).
pub fn spin_up() -> nalgebra::DVector<num_complex::Complex64> {
    nalgebra::DVector::from_vec(vec![ONE, ZERO])
}

pub fn spin_down() -> nalgebra::DVector<num_complex::Complex64> {
    nalgebra::DVector::from_vec(vec![ZERO, ONE])
}

pub fn tensor_embed(spin_op: &CMat, osc_op: &CMat) -> Result<CMat> {
    if spin_op.shape() != (2, 2) {
        return Err(Error::Mismatch(format!("spin operator has shape {:?}", spin_op.shape())));
    }
    if osc_op.nrows() != osc_op.ncols() {
        return Err(Error::Mismatch(format!("oscillator operator has shape {:?}", osc_op.shape())));
    }
    Ok(kron(spin_op, osc_op))
}

pub fn embed_osc(osc_op: &CMat) -> CMat {
    kron(&CMat::identity(2, 2), osc_op)
}

pub fn embed_spin(spin_op: &CMat, dim: usize) -> CMat {
    kron(spin_op, &CMat::identity(dim, dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, trace};

    #[test]
    fn ladder_small() {
        let (a, ad, n) = ladder_ops(FockSpace { dim: 2 }).unwrap();
        assert_eq!(a[(0, 1)], ONE);
        assert_eq!(a[(1, 0)], ZERO);
        assert_eq!(ad, a.adjoint());
        let (_, _, n3) = ladder_ops(FockSpace { dim: 3 }).unwrap();
        assert_eq!(n3.diagonal().map(|z| z.re).as_slice(), &[0.0, 1.0, 2.0]);
        assert_eq!(n.diagonal().map(|z| z.re).as_slice(), &[0.0, 1.0]);
        assert!(ladder_ops(FockSpace { dim: 1 }).is_err());
    }

    #[test]
    fn commutator_below_truncation_edge() {
        let (a, ad, _) = ladder_ops(FockSpace { dim: 50 }).unwrap();
        let comm = &a * &ad - &ad * &a;
        let block = comm.view((0, 0), (49, 49)).into_owned();
        assert!(max_abs_diff(&block, &CMat::identity(49, 49)) < 1e-12);
        assert!((comm[(49, 49)].re + 49.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_axes() {
        let sx = spin_axis_op(SpinAxis::equatorial(0.0)).unwrap();
        assert!(max_abs_diff(&sx, &pauli_x()) < 1e-15);
        let sy = spin_axis_op(SpinAxis::equatorial(std::f64::consts::FRAC_PI_2)).unwrap();
        assert!(max_abs_diff(&sy, &pauli_y()) < 1e-15);
        assert!(spin_axis_op(SpinAxis { bloch: [1.0, 1.0, 0.0] }).is_err());
        let sz = pauli_z();
        for k in 0..12 {
            for l in 0..12 {
                let (phi, dphi) = (0.5 * k as f64, 0.55 * l as f64);
                let a = spin_axis_op(SpinAxis::equatorial(phi)).unwrap();
                let b = spin_axis_op(SpinAxis::equatorial(phi + dphi)).unwrap();
                let comm = &a * &b - &b * &a;
                let want = sz.map(|z| z * c(0.0, 2.0 * dphi.sin()));
                assert!(max_abs_diff(&comm, &want) < 1e-14);
            }
        }
    }

    #[test]
    fn embedding() {
        let id = tensor_embed(&CMat::identity(2, 2), &CMat::identity(4, 4)).unwrap();
        assert_eq!(id, CMat::identity(8, 8));
        let (a, _, n) = ladder_ops(FockSpace { dim: 4 }).unwrap();
        let zs = embed_spin(&pauli_z(), 4);
        let ao = embed_osc(&a);
        assert!(max_abs_diff(&(&zs * &ao), &(&ao * &zs)) < 1e-15);
        let t = trace(&tensor_embed(&pauli_x(), &n).unwrap());
        assert!(t.norm() < 1e-15);
        // spin is the slow index
        let m = tensor_embed(&pauli_z(), &CMat::identity(4, 4)).unwrap();
        assert_eq!(m[(3, 3)], ONE);
        assert_eq!(m[(4, 4)], -ONE);
        assert!(tensor_embed(&CMat::identity(3, 3), &n).is_err());
    }
}
