use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::interaction::InteractionConfig;
use crate::error::{domain, Error, Result};
use crate::hilbert::{ladder_power, spin_axis_op, FockSpace, SpinAxis};
use crate::linalg::{kron, CMat};
use num_complex::Complex64 as C64;

/// (Ω_n/2)·σ_β ⊗ i(−aⁿe^{−iθ} + a†ⁿe^{iθ}) for even n,
/// (Ω_n/2)·σ_β ⊗ (aⁿe^{−iθ} + a†ⁿe^{iθ}) for odd n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveInteraction {
    pub order: usize,
    pub magnitude: f64,
    pub spin_axis: SpinAxis,
    pub theta: f64,
    pub even: bool,
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

pub fn effective_interaction(config: &InteractionConfig) -> Result<EffectiveInteraction> {
    let n = config.order;
    if !(2..=4).contains(&n) {
        return Err(Error::UnsupportedOrder(n));
    }
    let (a, b) = (&config.sdf_a, &config.sdf_b);
    let delta = config.delta;
    if delta == 0.0 {
        return domain("Δ = 0");
    }
    let na = a.spin_axis.bloch;
    let nb = b.spin_axis.bloch;
    let c = cross(na, nb);
    let sin = norm(c);
    if sin < 1e-12 {
        return Err(Error::DegenerateBasis("the two SDF spin axes commute".into()));
    }
    let dir = if n % 2 == 0 {
        c
    } else {
        let dot = na[0] * nb[0] + na[1] * nb[1] + na[2] * nb[2];
        [nb[0] - dot * na[0], nb[1] - dot * na[1], nb[2] - dot * na[2]]
    };
    let spin_axis = SpinAxis::along(dir)?;
    let (oa, ob) = (a.strength, b.strength);
    let signed = sin
        * match n {
            2 => ob * oa / delta,
            3 => ob * oa * oa / (2.0 * delta * delta),
            _ => ob * oa.powi(3) / (8.0 * delta.powi(3)),
        };
    // Invariance under a common time shift (φ_α → φ_α + Δτ, φ_α′ → φ_α′ + mΔτ)
    // and a common phase shift (θ → θ + n·c) fixes θ = (n−1)φ_α + φ_α′.
    let mut theta = (n as f64 - 1.0) * a.motional_phase + b.motional_phase;
    if signed < 0.0 {
        theta += PI;
    }
    Ok(EffectiveInteraction {
        order: n,
        magnitude: signed.abs(),
        spin_axis,
        theta: theta.rem_euclid(2.0 * PI),
        even: n % 2 == 0,
    })
}

/// Oscillator factor of the effective Hamiltonian at unit magnitude.
pub fn effective_motional_op(order: usize, theta: f64, even: bool, dim: usize) -> CMat {
    let an = ladder_power(dim, order);
    let e = C64::from_polar(1.0, -theta);
    let lower = an.map(|z| z * e);
    let raise = lower.adjoint();
    if even {
        (raise - lower).map(|z| z * C64::new(0.0, 1.0))
    } else {
        raise + lower
    }
}

pub fn effective_hamiltonian_matrix(eff: &EffectiveInteraction, space: FockSpace) -> Result<CMat> {
    if eff.order >= space.dim {
        return Err(Error::Truncation(format!("order {} ≥ dim {}", eff.order, space.dim)));
    }
    let s = spin_axis_op(eff.spin_axis)?;
    let m = effective_motional_op(eff.order, eff.theta, eff.even, space.dim);
    Ok(kron(&s, &m).map(|z| z * (0.5 * eff.magnitude)))
}

/// Residual error scale (Ω/Δ)^{n+1} of the truncated Magnus series.
pub fn magnus_error_estimate(order: usize, omega: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return domain("Δ = 0");
    }
    Ok((omega / delta).abs().powi(order as i32 + 1))
}

/// Strength Ω_c·ηⁿ/n! of the nth-order sideband from a single bichromatic field.
pub fn direct_drive_strength(order: usize, carrier_rabi: f64, eta: f64) -> f64 {
    let fact: f64 = (1..=order).map(|k| k as f64).product();
    carrier_rabi * eta.powi(order as i32) / fact
}
