use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, CMat};
use crate::model::TdHamiltonian;

#[derive(Clone, Debug)]
pub struct PropagatorResult {
    /// T·exp(−i∫H dt) applied to the input columns.
    pub value: CMat,
    pub steps: usize,
    /// Max elementwise change at the last doubling.
    pub change: f64,
}

/// Product of midpoint exponentials over `steps` uniform slices, each
/// exponential applied by a Taylor series of the sparse Hamiltonian.
fn midpoint_product(h: &TdHamiltonian, t0: f64, t1: f64, steps: usize, x: &CMat) -> CMat {
    let n = h.n;
    let cols = x.ncols();
    let dt = (t1 - t0) / steps as f64;
    let mut u = x.clone();
    let mut term = CMat::zeros(n, cols);
    let mut next = CMat::zeros(n, cols);
    for s in 0..steps {
        let tm = t0 + (s as f64 + 0.5) * dt;
        let coeffs: Vec<C64> = h.terms.iter().map(|(_, c)| c(tm)).collect();
        term.copy_from(&u);
        for k in 1..60 {
            next.fill(C64::new(0.0, 0.0));
            let alpha = C64::new(0.0, -dt / k as f64);
            for ((op, _), c) in h.terms.iter().zip(&coeffs) {
                op.mul_dense_acc(alpha * c, term.as_slice(), cols, next.as_mut_slice());
            }
            std::mem::swap(&mut term, &mut next);
            u += &term;
            let size = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if size < 1e-17 {
                break;
            }
        }
    }
    u
}

fn norm_bound(h: &TdHamiltonian, t0: f64, t1: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..=64 {
        let t = t0 + (t1 - t0) * k as f64 / 64.0;
        let mut col = vec![0.0; h.n];
        for (op, c) in &h.terms {
            let s = c(t).norm();
            for (_, j, v) in op.iter() {
                col[j] += s * v.norm();
            }
        }
        worst = worst.max(col.into_iter().fold(0.0, f64::max));
    }
    worst
}

/// Time-ordered evolution of the columns of `x`, doubling the step count
/// from `steps` until successive results differ by less than `tol`.
pub fn time_ordered_apply(
    h: &TdHamiltonian,
    t0: f64,
    t1: f64,
    x: &CMat,
    steps: usize,
    tol: f64,
    max_steps: usize,
) -> Result<PropagatorResult> {
    if x.nrows() != h.n {
        return Err(Error::Mismatch(format!("input rows {} vs Hamiltonian dim {}", x.nrows(), h.n)));
    }
    if !(t1 > t0) {
        return Err(Error::Domain("t1 must exceed t0".into()));
    }
    let min_steps = (norm_bound(h, t0, t1) * (t1 - t0)).ceil() as usize;
    let mut n = steps.max(min_steps).max(1);
    let mut prev = midpoint_product(h, t0, t1, n, x);
    loop {
        let m = 2 * n;
        if m > max_steps {
            return Err(Error::NoConvergence(format!("time-ordered product not converged at {n} steps")));
        }
        let cur = midpoint_product(h, t0, t1, m, x);
        let change = max_abs_diff(&cur, &prev);
        if change < tol {
            return Ok(PropagatorResult { value: cur, steps: m, change });
        }
        prev = cur;
        n = m;
    }
}

pub fn time_ordered_propagator(
    h: &TdHamiltonian,
    t0: f64,
    t1: f64,
    steps: usize,
    tol: f64,
    max_steps: usize,
) -> Result<PropagatorResult> {
    time_ordered_apply(h, t0, t1, &CMat::identity(h.n, h.n), steps, tol, max_steps)
}
