use num_complex::Complex64 as C64;

use super::FockSpace;
use crate::error::{Error, Result};
use crate::linalg::{c, eigh, matmul, matmul_adj, CMat};

/// Cached factorization for fast D(β) = e^{βa† − β*a} on one truncation.
///
/// D(β) = R(φ)·D(|β|)·R(φ)† with R(φ) = e^{iφn} and D(|β|) = e^{−i√2|β|p̂},
/// the latter applied through the eigenbasis of the truncated p̂.
#[derive(Clone, Debug)]
pub struct Displacer {
    dim: usize,
    vals: Vec<f64>,
    vecs: CMat,
}

impl Displacer {
    pub fn new(space: FockSpace) -> Result<Displacer> {
        let space = FockSpace::new(space.dim)?;
        let d = space.dim;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // p̂ = (a − a†)/(i√2)
        let p = CMat::from_fn(d, d, |i, j| {
            if j == i + 1 {
                c(0.0, -s * (j as f64).sqrt())
            } else if i == j + 1 {
                c(0.0, s * (i as f64).sqrt())
            } else {
                c(0.0, 0.0)
            }
        });
        let (vals, vecs) = eigh(&p);
        Ok(Displacer { dim: d, vals, vecs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn check(&self, beta: C64) -> Result<()> {
        if beta.norm_sqr() > self.dim as f64 / 4.0 {
            return Err(Error::Truncation(format!(
                "|β|² = {:.3} exceeds dim/4 = {:.2}",
                beta.norm_sqr(),
                self.dim as f64 / 4.0
            )));
        }
        Ok(())
    }

    /// R(φ)·V with the diagonal phase e^{−i√2|β|λ_k} folded into the columns.
    fn rotated_basis(&self, beta: C64) -> (CMat, CMat) {
        let (mag, phi) = beta.to_polar();
        let k = -std::f64::consts::SQRT_2 * mag;
        let mut left = self.vecs.clone();
        for (i, mut row) in left.row_iter_mut().enumerate() {
            let ph = C64::from_polar(1.0, phi * i as f64);
            row.iter_mut().for_each(|z| *z *= ph);
        }
        let mut scaled = left.clone();
        for (kk, mut col) in scaled.column_iter_mut().enumerate() {
            let ph = C64::from_polar(1.0, k * self.vals[kk]);
            col.iter_mut().for_each(|z| *z *= ph);
        }
        (scaled, left)
    }

    pub fn op(&self, beta: C64) -> Result<CMat> {
        self.check(beta)?;
        let (scaled, left) = self.rotated_basis(beta);
        Ok(matmul_adj(&scaled, &left))
    }

    /// tr(ρ D(β)) without forming D.
    pub fn expect(&self, rho: &CMat, beta: C64) -> Result<C64> {
        self.check(beta)?;
        if rho.nrows() != self.dim {
            return Err(Error::Mismatch(format!("state dim {} vs {}", rho.nrows(), self.dim)));
        }
        let (scaled, left) = self.rotated_basis(beta);
        // tr(ρ·S·L†) = Σ_{k,m} (ρS)_{mk}·conj(L_{mk})
        let rs = matmul(rho, &scaled);
        Ok(rs.iter().zip(left.iter()).map(|(a, b)| a * b.conj()).sum())
    }
}

pub fn displacement_op(beta: C64, space: FockSpace) -> Result<CMat> {
    Displacer::new(space)?.op(beta)
}
