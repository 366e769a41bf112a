//! Unitary and Lindblad time evolution under time-dependent Hamiltonians, and
//! the brute-force time-ordered propagator used as an oracle.

mod integrator;
mod propagator;

pub use integrator::{dopri5, Stats, Tolerances};
pub use propagator::{time_ordered_propagator, PropagatorResult};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{annihilation, embed_osc, FockSpace};
use crate::linalg::{CMat, CVec, Csr};
use crate::model::TdHamiltonian;

#[derive(Clone, Debug)]
pub struct EvolutionSpec {
    pub hamiltonian: TdHamiltonian,
    pub t0: f64,
    pub t1: f64,
    pub tol: Tolerances,
    /// Sorted times in [t0, t1]; defaults to [t1].
    pub samples: Vec<f64>,
}

impl EvolutionSpec {
    pub fn new(hamiltonian: TdHamiltonian, t0: f64, t1: f64) -> EvolutionSpec {
        EvolutionSpec { hamiltonian, t0, t1, tol: Tolerances::default(), samples: vec![t1] }
    }

    pub fn with_samples(mut self, samples: Vec<f64>) -> EvolutionSpec {
        self.samples = samples;
        self
    }

    pub fn with_max_step(mut self, h: f64) -> EvolutionSpec {
        self.tol.max_step = h;
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> EvolutionSpec {
        self.tol.rtol = rtol;
        self.tol.atol = atol;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(self.t1 > self.t0) {
            return Err(Error::Domain(format!("t1 = {:e} must exceed t0 = {:e}", self.t1, self.t0)));
        }
        if !(self.tol.rtol > 0.0 && self.tol.atol > 0.0) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        if self.hamiltonian.n != n {
            return Err(Error::Mismatch(format!("Hamiltonian dim {} vs state dim {n}", self.hamiltonian.n)));
        }
        let eps = 1e-12 * (self.t1 - self.t0);
        if self.samples.iter().any(|&s| s < self.t0 - eps || s > self.t1 + eps) {
            return Err(Error::Domain("sample times outside [t0, t1]".into()));
        }
        Ok(())
    }

    /// Default step cap: a small fraction of the span so that drives starting
    /// from zero amplitude are not stepped over.
    fn tolerances(&self) -> Tolerances {
        let mut tol = self.tol;
        tol.max_step = tol.max_step.min((self.t1 - self.t0) / 20.0);
        tol
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum QState {
    Pure(CVec),
    Mixed(CMat),
}

impl QState {
    pub fn density(&self) -> CMat {
        match self {
            QState::Pure(p) => p * p.adjoint(),
            QState::Mixed(r) => r.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            QState::Pure(p) => p.len(),
            QState::Mixed(r) => r.nrows(),
        }
    }
}

/// Heating at rate ṅ via collapse operators √ṅ·a† and √ṅ·a.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatingModel {
    pub rate: f64,
}

impl HeatingModel {
    pub fn collapse_ops(&self, space: FockSpace, with_spin: bool) -> Result<Vec<CMat>> {
        if !(self.rate >= 0.0) {
            return Err(Error::Domain(format!("heating rate {} < 0", self.rate)));
        }
        let a = annihilation(space.dim).map(|z| z * self.rate.sqrt());
        let ops = vec![a.adjoint(), a];
        Ok(if with_spin { ops.iter().map(embed_osc).collect() } else { ops })
    }

    pub fn dissipator(&self, space: FockSpace, with_spin: bool) -> Result<Dissipator> {
        Dissipator::new(&self.collapse_ops(space, with_spin)?)
    }
}

/// Collapse operators prepared for the master-equation right-hand side.
#[derive(Clone, Debug)]
pub struct Dissipator {
    n: usize,
    jumps: Vec<(Csr, Csr)>,
    /// Σ L†L
    decay: Csr,
}

impl Dissipator {
    pub fn new(ops: &[CMat]) -> Result<Dissipator> {
        let n = ops.first().map(|o| o.nrows()).unwrap_or(0);
        let mut decay = CMat::zeros(n, n);
        let mut jumps = Vec::new();
        for l in ops {
            if l.shape() != (n, n) {
                return Err(Error::Mismatch("collapse operators differ in shape".into()));
            }
            decay += l.adjoint() * l;
            jumps.push((Csr::from_dense(l), Csr::from_dense(&l.adjoint())));
        }
        Ok(Dissipator { n, jumps, decay: Csr::from_dense(&decay) })
    }

    pub fn none(n: usize) -> Dissipator {
        Dissipator { n, jumps: Vec::new(), decay: Csr::from_dense(&CMat::zeros(n, n)) }
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }
}

fn schrodinger_rhs(h: &TdHamiltonian) -> impl FnMut(f64, &[C64], &mut [C64]) + '_ {
    move |t, y, dy| {
        dy.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        h.apply_acc(t, C64::new(0.0, -1.0), y, dy);
    }
}

/// dρ/dt = −i(H_eff ρ − ρ H_eff†) + Σ LρL†, H_eff = H − (i/2)ΣL†L.
fn lindblad_rhs<'a>(h: &'a TdHamiltonian, diss: &'a Dissipator) -> impl FnMut(f64, &[C64], &mut [C64]) + 'a {
    let n = h.n;
    let mut a = vec![C64::new(0.0, 0.0); n * n];
    let mut tmp = vec![C64::new(0.0, 0.0); n * n];
    move |t, rho, out| {
        a.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (op, c) in &h.terms {
            op.mul_dense_acc(C64::new(0.0, -1.0) * c(t), rho, n, &mut a);
        }
        if !diss.is_empty() {
            diss.decay.mul_dense_acc(C64::new(-0.5, 0.0), rho, n, &mut a);
        }
        for j in 0..n {
            for i in 0..n {
                out[i + j * n] = a[i + j * n] + a[j + i * n].conj();
            }
        }
        for (l, ld) in &diss.jumps {
            tmp.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            l.mul_dense_acc(C64::new(1.0, 0.0), rho, n, &mut tmp);
            ld.dense_mul_acc(C64::new(1.0, 0.0), &tmp, n, out);
        }
    }
}

pub fn evolve_pure(psi: &CVec, spec: &EvolutionSpec) -> Result<Vec<CVec>> {
    spec.validate(psi.len())?;
    let mut out = Vec::with_capacity(spec.samples.len());
    dopri5(
        schrodinger_rhs(&spec.hamiltonian),
        spec.t0,
        psi.as_slice().to_vec(),
        &spec.samples,
        spec.tolerances(),
        |_, _, y| {
            out.push(CVec::from_column_slice(y));
            Ok(())
        },
    )?;
    Ok(out)
}

/// Lindblad integration; `diss` may be empty for von Neumann evolution.
pub fn evolve_density(rho: &CMat, spec: &EvolutionSpec, diss: &Dissipator) -> Result<Vec<CMat>> {
    let n = rho.nrows();
    spec.validate(n)?;
    if !diss.is_empty() && diss.n != n {
        return Err(Error::Mismatch(format!("dissipator dim {} vs state dim {n}", diss.n)));
    }
    let mut out = Vec::with_capacity(spec.samples.len());
    dopri5(
        lindblad_rhs(&spec.hamiltonian, diss),
        spec.t0,
        rho.as_slice().to_vec(),
        &spec.samples,
        spec.tolerances(),
        |_, _, y| {
            out.push(CMat::from_column_slice(n, n, y));
            Ok(())
        },
    )?;
    Ok(out)
}

pub fn evolve_unitary(state: &QState, spec: &EvolutionSpec) -> Result<Vec<QState>> {
    Ok(match state {
        QState::Pure(p) => evolve_pure(p, spec)?.into_iter().map(QState::Pure).collect(),
        QState::Mixed(r) => {
            evolve_density(r, spec, &Dissipator::none(r.nrows()))?.into_iter().map(QState::Mixed).collect()
        }
    })
}

/// `with_spin` selects whether the state carries the spin factor.
pub fn evolve_lindblad(
    rho: &CMat,
    spec: &EvolutionSpec,
    heating: &HeatingModel,
    space: FockSpace,
    with_spin: bool,
) -> Result<Vec<CMat>> {
    let diss = if heating.rate > 0.0 { heating.dissipator(space, with_spin)? } else { Dissipator::none(rho.nrows()) };
    evolve_density(rho, spec, &diss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{embed_spin, fock_state, number_op, pauli_x, spin_down, thermal_state, SpinFockState};
    use crate::linalg::{expm_hermitian, hermitize, max_abs_diff, trace};

    #[test]
    fn zero_hamiltonian_is_identity() {
        let psi = fock_state(2, FockSpace { dim: 5 }).unwrap();
        let spec = EvolutionSpec::new(TdHamiltonian::zero(5), 0.0, 1.0);
        let out = evolve_pure(&psi, &spec).unwrap();
        assert!((&out[0] - &psi).norm() < 1e-14);
    }

    #[test]
    fn rabi_pi_pulse() {
        let dim = 4;
        let om = 2.0;
        let mut h = TdHamiltonian::zero(2 * dim);
        h.add_constant(&embed_spin(&pauli_x(), dim).map(|z| z * (om / 2.0)));
        let mut psi = CVec::zeros(2 * dim);
        psi[dim] = spin_down()[1];
        let spec = EvolutionSpec::new(h, 0.0, std::f64::consts::PI / om);
        let out = evolve_pure(&psi, &spec).unwrap();
        assert!((out[0][0].norm_sqr() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn constant_h_matches_expm() {
        let n = 6;
        let mut s = 3u64;
        let m = CMat::from_fn(n, n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
            C64::new(((s >> 40) as f64) / 1e7 - 0.8, ((s >> 20) & 0xfffff) as f64 / 1e6 - 0.5)
        });
        let hm = hermitize(&m);
        let mut h = TdHamiltonian::zero(n);
        h.add_constant(&hm);
        let psi = CVec::from_fn(n, |i, _| C64::new(if i == 1 { 1.0 } else { 0.0 }, 0.0));
        let spec = EvolutionSpec::new(h.clone(), 0.0, 2.0);
        let out = evolve_pure(&psi, &spec).unwrap();
        let want = expm_hermitian(&hm, 2.0) * &psi;
        assert!((&out[0] - &want).norm() < 1e-8);
        let rho = &psi * psi.adjoint();
        let r = evolve_unitary(&QState::Mixed(rho), &spec).unwrap();
        assert!(max_abs_diff(&r[0].density(), &(&want * want.adjoint())) < 1e-8);
    }

    #[test]
    fn heating_linear_growth() {
        let sp = FockSpace { dim: 30 };
        let nop = number_op(30);
        for (init, t, want) in [(0.0, 1e-3, 0.3), (0.09, 600e-6, 0.27)] {
            let rho = thermal_state(init, sp).unwrap();
            let spec = EvolutionSpec::new(TdHamiltonian::zero(30), 0.0, t);
            let out = evolve_lindblad(&rho, &spec, &HeatingModel { rate: 300.0 }, sp, false).unwrap();
            let n = trace(&(&out[0] * &nop)).re;
            assert!((n - want).abs() < 0.01 * want, "{n} vs {want}");
            assert!((trace(&out[0]).re - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn no_heating_matches_unitary_and_purity_drops() {
        let dim = 12;
        let sp = FockSpace { dim };
        let mut h = TdHamiltonian::zero(2 * dim);
        let sdf = crate::model::SdfParams {
            strength: 2e4,
            detuning: 5e4,
            spin_axis: crate::hilbert::SpinAxis::equatorial(0.0),
            motional_phase: 0.0,
        };
        crate::model::add_sdf_rwa(&mut h, &sdf, crate::model::RampShape::flat(1e-4).unwrap(), sp).unwrap();
        let mut psi = CVec::zeros(2 * dim);
        psi[dim] = C64::new(1.0, 0.0);
        let rho = &psi * psi.adjoint();
        let samples: Vec<f64> = (1..=5).map(|k| k as f64 * 2e-5).collect();
        let spec = EvolutionSpec::new(h, 0.0, 1e-4).with_samples(samples);
        let pure = evolve_pure(&psi, &spec).unwrap();
        let mixed = evolve_lindblad(&rho, &spec, &HeatingModel { rate: 0.0 }, sp, true).unwrap();
        let hot = evolve_lindblad(&rho, &spec, &HeatingModel { rate: 2000.0 }, sp, true).unwrap();
        let mut last = 1.0;
        for ((p, m), r) in pure.iter().zip(&mixed).zip(&hot) {
            assert!(max_abs_diff(&(p * p.adjoint()), m) < 1e-7);
            let st = SpinFockState::new(r.clone()).unwrap();
            assert!(crate::linalg::hermitian_defect(&st.rho) < 1e-8);
            assert!((trace(&st.rho).re - 1.0).abs() < 1e-8);
            let purity = trace(&(&st.rho * &st.rho)).re;
            assert!(purity <= last + 1e-10);
            last = purity;
        }
        assert!(last < 1.0 - 1e-4);
    }
}
