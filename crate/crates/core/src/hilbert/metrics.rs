use crate::error::{Error, Result};
use crate::linalg::{adj_matmul, eigh, CMat, CVec};

use super::PSD_TOL;

/// V_k·√λ_k over eigenvalues above rounding level, so that A·A† = ρ.
fn support_root(rho: &CMat) -> Result<CMat> {
    let (l, v) = eigh(rho);
    if l[0] < -PSD_TOL {
        return Err(Error::InvalidState(format!("eigenvalue {:e}", l[0])));
    }
    let cut = 1e-15 * l.last().copied().unwrap_or(0.0).max(0.0);
    let keep: Vec<usize> = (0..l.len()).filter(|&k| l[k] > cut).collect();
    Ok(CMat::from_fn(rho.nrows(), keep.len(), |i, j| v[(i, keep[j])] * l[keep[j]].sqrt()))
}

/// Uhlmann fidelity (tr√(√ρ σ √ρ))².
pub fn fidelity(rho: &CMat, sigma: &CMat) -> Result<f64> {
    if rho.shape() != sigma.shape() || rho.nrows() != rho.ncols() {
        return Err(Error::Mismatch(format!("{:?} vs {:?}", rho.shape(), sigma.shape())));
    }
    // F = ‖√σ·√ρ‖²_tr with each square root restricted to the numerical
    // support. Singular values carry absolute rounding error, unlike square
    // roots of eigenvalues of √ρσ√ρ, so pure inputs stay accurate.
    let a = support_root(rho)?;
    let b = support_root(sigma)?;
    let svd = adj_matmul(&b, &a).svd(false, false);
    let tr: f64 = svd.singular_values.iter().sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

pub fn fidelity_pure(psi: &CVec, phi: &CVec) -> f64 {
    psi.dotc(phi).norm_sqr() / (psi.norm_squared() * phi.norm_squared())
}

/// ⟨ψ|ρ|ψ⟩
pub fn fidelity_pure_mixed(psi: &CVec, rho: &CMat) -> f64 {
    psi.dotc(&(rho * psi)).re / psi.norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_state, fock_state, thermal_state, FockSpace};
    use crate::linalg::c;

    #[test]
    fn basic_identities() {
        let sp = FockSpace { dim: 20 };
        let t = thermal_state(0.3, sp).unwrap();
        assert!((fidelity(&t, &t).unwrap() - 1.0).abs() < 1e-10);
        let z = fock_state(0, sp).unwrap();
        let o = fock_state(1, sp).unwrap();
        assert!(fidelity(&(&z * z.adjoint()), &(&o * o.adjoint())).unwrap() < 1e-12);
        assert!(fidelity_pure(&z, &o) == 0.0);
        assert!(fidelity(&t, &CMat::zeros(3, 3)).is_err());
    }

    #[test]
    fn vacuum_vs_thermal() {
        let sp = FockSpace { dim: 40 };
        let z = fock_state(0, sp).unwrap();
        let t = thermal_state(0.1, sp).unwrap();
        let f = fidelity(&(&z * z.adjoint()), &t).unwrap();
        assert!((f - 1.0 / 1.1).abs() < 1e-10);
        assert!((fidelity_pure_mixed(&z, &t) - f).abs() < 1e-12);
    }

    #[test]
    fn symmetric() {
        let sp = FockSpace { dim: 25 };
        let a = coherent_state(c(0.5, 0.2), sp).unwrap();
        let pa = &a * a.adjoint();
        let t = thermal_state(0.7, sp).unwrap();
        let f1 = fidelity(&pa, &t).unwrap();
        let f2 = fidelity(&t, &pa).unwrap();
        assert!((f1 - f2).abs() < 1e-9, "{f1} {f2}");
        assert!((f1 - fidelity_pure_mixed(&a, &t)).abs() < 1e-9);
    }
}
