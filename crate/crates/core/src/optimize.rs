//! Small deterministic optimizers: golden-section search, Nelder–Mead, and
//! Levenberg–Marquardt with finite-difference Jacobians.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Maximizes a unimodal f on [a, b].
pub fn golden_max(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > xtol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Minimizes f from `x0` with initial simplex offsets `step`.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: &[f64],
    ftol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step[i];
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    for _ in 0..max_iter {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = idx.iter().map(|&i| pts[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        if (vals[n] - vals[0]).abs() <= ftol * (vals[0].abs() + vals[n].abs()) + 1e-300 {
            break;
        }
        let cen: Vec<f64> = (0..n).map(|j| pts[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
        let lerp = |t: f64| -> Vec<f64> { (0..n).map(|j| cen[j] + t * (pts[n][j] - cen[j])).collect() };
        let xr = lerp(-1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = lerp(-2.0);
            let fe = f(&xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let x = lerp(-0.5);
                let v = f(&x);
                (x, v)
            } else {
                let x = lerp(0.5);
                let v = f(&x);
                (x, v)
            };
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    pts[i] = (0..n).map(|j| pts[0][j] + 0.5 * (pts[i][j] - pts[0][j])).collect();
                    vals[i] = f(&pts[i]);
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (pts[best].clone(), vals[best])
}

#[derive(Clone, Debug)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// 1σ uncertainties from the covariance s²·(JᵀJ)⁻¹, s² = SSR/(m − p).
    pub sigma: Vec<f64>,
    pub ssr: f64,
    pub iterations: usize,
}

/// Least squares on residuals r(p); parameters are clamped into `bounds`.
pub fn levenberg_marquardt(
    resid: impl Fn(&[f64]) -> Vec<f64>,
    p0: &[f64],
    bounds: &[(f64, f64)],
    max_iter: usize,
) -> Result<LmFit> {
    let np = p0.len();
    let clamp = |p: &mut Vec<f64>| {
        for (v, &(lo, hi)) in p.iter_mut().zip(bounds) {
            *v = v.clamp(lo, hi);
        }
    };
    let mut p = p0.to_vec();
    clamp(&mut p);
    let mut r = resid(&p);
    let m = r.len();
    if m < np {
        return Err(Error::Domain(format!("{m} residuals for {np} parameters")));
    }
    let ssr_of = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let mut ssr = ssr_of(&r);
    let jac = |p: &[f64], r: &[f64]| {
        let mut j = DMatrix::<f64>::zeros(m, np);
        for k in 0..np {
            let h = 1e-7 * p[k].abs().max(1e-4);
            let mut q = p.to_vec();
            // one-sided step pointing inward at a bound
            let hk = if q[k] + h > bounds[k].1 { -h } else { h };
            q[k] += hk;
            let rq = resid(&q);
            for i in 0..m {
                j[(i, k)] = (rq[i] - r[i]) / hk;
            }
        }
        j
    };
    let mut lambda = 1e-3;
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        let j = jac(&p, &r);
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..np {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let mut q: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            clamp(&mut q);
            let rq = resid(&q);
            let sq = ssr_of(&rq);
            if sq < ssr {
                let rel = (ssr - sq) / ssr.max(1e-300);
                p = q;
                r = rq;
                ssr = sq;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if rel < 1e-14 {
                    return finish(p, &jac, r, ssr, iterations, m);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    finish(p, &jac, r, ssr, iterations, m)
}

fn finish(
    p: Vec<f64>,
    jac: &impl Fn(&[f64], &[f64]) -> DMatrix<f64>,
    r: Vec<f64>,
    ssr: f64,
    iterations: usize,
    m: usize,
) -> Result<LmFit> {
    let np = p.len();
    let j = jac(&p, &r);
    let jtj = j.transpose() * &j;
    let dof = (m.saturating_sub(np)).max(1) as f64;
    let s2 = ssr / dof;
    let sigma = match jtj.clone().try_inverse() {
        Some(inv) => (0..np).map(|k| (inv[(k, k)] * s2).max(0.0).sqrt()).collect(),
        None => vec![f64::INFINITY; np],
    };
    Ok(LmFit { params: p, sigma, ssr, iterations })
}
