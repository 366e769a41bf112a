use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::linalg::{CMat, Csr};

pub type Coeff = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// H(t) = Σ_k c_k(t)·O_k with sparse constant operators. Builders add
/// Hermitian-conjugate pairs so that H(t) is Hermitian at every t.
#[derive(Clone)]
pub struct TdHamiltonian {
    pub n: usize,
    pub terms: Vec<(Csr, Coeff)>,
}

impl fmt::Debug for TdHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TdHamiltonian").field("n", &self.n).field("terms", &self.terms.len()).finish()
    }
}

impl TdHamiltonian {
    pub fn zero(n: usize) -> TdHamiltonian {
        TdHamiltonian { n, terms: Vec::new() }
    }

    pub fn add(&mut self, op: &CMat, coeff: impl Fn(f64) -> C64 + Send + Sync + 'static) {
        assert_eq!(op.nrows(), self.n);
        self.terms.push((Csr::from_dense(op), Arc::new(coeff)));
    }

    /// Adds c(t)·O + conj(c(t))·O†.
    pub fn add_hc(&mut self, op: &CMat, coeff: impl Fn(f64) -> C64 + Send + Sync + 'static) {
        let coeff: Coeff = Arc::new(coeff);
        let c2 = coeff.clone();
        self.terms.push((Csr::from_dense(op), coeff));
        self.terms.push((Csr::from_dense(&op.adjoint()), Arc::new(move |t| c2(t).conj())));
    }

    pub fn add_constant(&mut self, op: &CMat) {
        self.add(op, |_| C64::new(1.0, 0.0));
    }

    pub fn extend(&mut self, other: TdHamiltonian) {
        assert_eq!(other.n, self.n);
        self.terms.extend(other.terms);
    }

    pub fn at(&self, t: f64) -> CMat {
        let mut h = CMat::zeros(self.n, self.n);
        for (op, c) in &self.terms {
            let s = c(t);
            for (i, j, v) in op.iter() {
                h[(i, j)] += s * v;
            }
        }
        h
    }

    /// y += alpha·H(t)·x
    pub fn apply_acc(&self, t: f64, alpha: C64, x: &[C64], y: &mut [C64]) {
        for (op, c) in &self.terms {
            op.mul_vec_acc(alpha * c(t), x, y);
        }
    }
}
