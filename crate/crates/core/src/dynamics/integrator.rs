//! Dormand–Prince 5(4) with embedded error control, stepping exactly onto
//! requested sample times.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-8, atol: 1e-10, max_step: f64::INFINITY }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Default, Clone, Copy)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Integrates y' = f(t, y) from t0, returning y at each sample time (sorted,
/// all ≥ t0). `visit` sees each sampled state and may consume it.
pub fn dopri5<F, V>(mut f: F, t0: f64, mut y: Vec<C64>, samples: &[f64], tol: Tolerances, mut visit: V) -> Result<Stats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    V: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    let n = y.len();
    let mut stats = Stats::default();
    let mut k = vec![vec![C64::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let mut ynew = vec![C64::new(0.0, 0.0); n];
    let mut t = t0;
    let mut next = 0;
    while next < samples.len() && samples[next] <= t0 {
        if samples[next] < t0 {
            return Err(Error::Domain(format!("sample time {:e} before start {t0:e}", samples[next])));
        }
        visit(next, t0, &y)?;
        next += 1;
    }
    if next == samples.len() {
        return Ok(stats);
    }
    for w in samples.windows(2) {
        if w[1] < w[0] {
            return Err(Error::Domain("sample times must be sorted".into()));
        }
    }
    f(t, &y, &mut k[0]);
    stats.evaluations += 1;
    let span = samples[samples.len() - 1] - t0;
    let mut h = initial_step(&y, &k[0], tol, span).min(tol.max_step);
    while next < samples.len() {
        let target = samples[next];
        let mut hit = false;
        let mut step = h.min(tol.max_step);
        if t + step * (1.0 + 1e-9) >= target {
            step = target - t;
            hit = true;
        }
        if step <= 0.0 {
            visit(next, t, &y)?;
            next += 1;
            continue;
        }
        if step < 1e-14 * t.abs().max(span) {
            return Err(Error::StepUnderflow { t, h: step });
        }
        let stage = |coef: &[(usize, f64)], k: &Vec<Vec<C64>>, tmp: &mut Vec<C64>, y: &Vec<C64>| {
            for i in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for &(j, a) in coef {
                    acc += k[j][i] * a;
                }
                tmp[i] = y[i] + acc * step;
            }
        };
        stage(&[(0, A21)], &k, &mut tmp, &y);
        f(t + C2 * step, &tmp, &mut k[1]);
        stage(&[(0, A31), (1, A32)], &k, &mut tmp, &y);
        f(t + C3 * step, &tmp, &mut k[2]);
        stage(&[(0, A41), (1, A42), (2, A43)], &k, &mut tmp, &y);
        f(t + C4 * step, &tmp, &mut k[3]);
        stage(&[(0, A51), (1, A52), (2, A53), (3, A54)], &k, &mut tmp, &y);
        f(t + C5 * step, &tmp, &mut k[4]);
        stage(&[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], &k, &mut tmp, &y);
        f(t + step, &tmp, &mut k[5]);
        stage(&[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)], &k, &mut ynew, &y);
        f(t + step, &ynew, &mut k[6]);
        stats.evaluations += 6;
        let mut err = 0.0;
        for i in 0..n {
            let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * step;
            let sc = tol.atol + tol.rtol * y[i].norm().max(ynew[i].norm());
            let r = e.norm() / sc;
            err += r * r;
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::NoConvergence(format!("non-finite state at t = {t:e}")));
        }
        if err <= 1.0 {
            stats.accepted += 1;
            t = if hit { target } else { t + step };
            std::mem::swap(&mut y, &mut ynew);
            k.swap(0, 6);
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // A step shortened to land on a sample says nothing about the
            // natural step size; keep the previous proposal then.
            if !hit || step >= h {
                h = step * fac;
            }
            if hit {
                visit(next, t, &y)?;
                next += 1;
            }
        } else {
            stats.rejected += 1;
            h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
        if stats.accepted + stats.rejected > 50_000_000 {
            return Err(Error::NoConvergence("step limit exceeded".into()));
        }
    }
    Ok(stats)
}

fn initial_step(y: &[C64], dy: &[C64], tol: Tolerances, span: f64) -> f64 {
    let n = y.len() as f64;
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (a, b) in y.iter().zip(dy) {
        let sc = tol.atol + tol.rtol * a.norm();
        d0 += (a.norm() / sc).powi(2);
        d1 += (b.norm() / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h.min(0.01 * span).max(1e-12 * span)
}
