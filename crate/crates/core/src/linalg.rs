//! Dense and sparse complex linear algebra used by every other module.
//! Dense matrices are nalgebra column-major; `Csr` covers the structured
//! ladder-operator products that dominate the master-equation right-hand side.

use matrixmultiply::{zgemm, CGemmOption};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// C = A·B through the blocked complex kernel.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "gemm shape");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut out = CMat::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return out;
    }
    // SAFETY: Complex64 is repr(C) {re, im}; strides describe column-major storage
    // of exactly the shapes asserted above.
    unsafe {
        zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            out.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    out
}

/// A·B†
pub fn matmul_adj(a: &CMat, b: &CMat) -> CMat {
    matmul(a, &b.adjoint())
}

/// A†·B
pub fn adj_matmul(a: &CMat, b: &CMat) -> CMat {
    matmul(&a.adjoint(), b)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..=j.min(m.nrows() - 1) {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().sum()
}

/// Eigen-decomposition of a Hermitian matrix: ascending real eigenvalues and
/// unitary eigenvectors as columns.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let e = SymmetricEigen::new(hermitize(m));
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(m.nrows(), idx.len(), |r, k| e.eigenvectors[(r, idx[k])]);
    (vals, vecs)
}

/// V·diag(f(λ))·V†
pub fn apply_spectral(vals: &[f64], vecs: &CMat, f: impl Fn(f64) -> C64) -> CMat {
    let mut scaled = vecs.clone();
    for (k, &l) in vals.iter().enumerate() {
        let s = f(l);
        scaled.column_mut(k).scale_mut_c(s);
    }
    matmul_adj(&scaled, vecs)
}

trait ScaleC {
    fn scale_mut_c(&mut self, s: C64);
}

impl<S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>> ScaleC
    for nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S>
{
    fn scale_mut_c(&mut self, s: C64) {
        for v in self.iter_mut() {
            *v *= s;
        }
    }
}

/// Square root of a positive semidefinite Hermitian matrix. Eigenvalues below
/// `-tol` are rejected; those in [-tol, 0) are clipped.
pub fn sqrt_psd(m: &CMat, tol: f64) -> Result<CMat> {
    let (vals, vecs) = eigh(m);
    if let Some(&lo) = vals.first() {
        if lo < -tol {
            return Err(Error::InvalidState(format!("eigenvalue {lo:e} below -{tol:e}")));
        }
    }
    Ok(apply_spectral(&vals, &vecs, |l| C64::from(l.max(0.0).sqrt())))
}

/// exp(-i·H·t) for Hermitian H.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    apply_spectral(&vals, &vecs, |l| C64::from_polar(1.0, -l * t))
}

/// General matrix exponential: scaling and squaring around a Taylor series.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > 0.25 { (norm / 0.25).log2().ceil() as i32 } else { 0 };
    let scaled = a.scale(0.5f64.powi(s));
    let mut out = identity(n);
    let mut term = identity(n);
    for k in 1..40 {
        term = matmul(&term, &scaled).unscale(k as f64);
        out += &term;
        if one_norm(&term) < 1e-18 * one_norm(&out) {
            break;
        }
    }
    for _ in 0..s {
        out = matmul(&out, &out);
    }
    out
}

pub fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols()).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<C64>,
}

impl Csr {
    pub fn from_dense(m: &CMat) -> Csr {
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != ZERO {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Csr { nrows: m.nrows(), ncols: m.ncols(), indptr, indices, data }
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows)
            .flat_map(move |i| (self.indptr[i]..self.indptr[i + 1]).map(move |k| (i, self.indices[k], self.data[k])))
    }

    pub fn adjoint(&self) -> Csr {
        Csr::from_dense(&self.to_dense().adjoint())
    }

    pub fn kron(a: &Csr, b: &Csr) -> Csr {
        Csr::from_dense(&kron(&a.to_dense(), &b.to_dense()))
    }

    pub fn scale(&self, s: C64) -> Csr {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// y += alpha·A·x
    pub fn mul_vec_acc(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.nrows) {
            let mut acc = ZERO;
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            *yi += alpha * acc;
        }
    }

    /// Y += alpha·A·X, X and Y column-major with `self.ncols` / `self.nrows` rows.
    pub fn mul_dense_acc(&self, alpha: C64, x: &[C64], xcols: usize, y: &mut [C64]) {
        let (nr, nc) = (self.nrows, self.ncols);
        for col in 0..xcols {
            self.mul_vec_acc(alpha, &x[col * nc..(col + 1) * nc], &mut y[col * nr..(col + 1) * nr]);
        }
    }

    /// Y += alpha·X·A, X with `xrows` rows and `self.nrows` columns.
    pub fn dense_mul_acc(&self, alpha: C64, x: &[C64], xrows: usize, y: &mut [C64]) {
        for (r, ccol, v) in self.iter() {
            let s = alpha * v;
            let src = &x[r * xrows..(r + 1) * xrows];
            let dst = &mut y[ccol * xrows..(ccol + 1) * xrows];
            for (d, s0) in dst.iter_mut().zip(src) {
                *d += s * s0;
            }
        }
    }
}
