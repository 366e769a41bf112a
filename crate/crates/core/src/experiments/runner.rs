use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::SpinFockState;
use crate::model::{direct_drive_strength, effective_interaction};
use crate::tomography::{fit_fock_populations, simulate_blue_sideband, SidebandParams, SpinReadout};

use super::pipeline::{self as pl, ProbeFit};
use super::result::{curve, q, Curve, Provenance, Quantity, ScenarioResult, Table};
use super::scenario::{ScanParam, Scenario, ScenarioKind, SpinSpec};

struct Out {
    table: Table,
    curves: Vec<Curve>,
    summary: Vec<Quantity>,
    chi: Option<crate::tomography::CharacteristicGrid>,
    wigner: Option<crate::tomography::WignerGrid>,
    notes: Vec<String>,
}

impl Out {
    fn new(table: Table) -> Out {
        Out { table, curves: Vec::new(), summary: Vec::new(), chi: None, wigner: None, notes: Vec::new() }
    }
}

/// Runs one scenario. Scan points are evaluated in parallel and gathered in
/// scan order, so the result does not depend on the worker count.
pub fn run_scenario(scn: &Scenario) -> Result<ScenarioResult> {
    scn.validate().map_err(|e| e.context(format!("scenario '{}'", scn.name)))?;
    let out = match scn.kind {
        ScenarioKind::SqueezingCharacterisation | ScenarioKind::DetuningScan => squeezing_scan(scn, false),
        ScenarioKind::CommutativityScan => squeezing_scan(scn, true),
        ScenarioKind::PhaseScan => phase_scan(scn),
        ScenarioKind::RampScan => ramp_scan(scn),
        ScenarioKind::UnitarityCheck => unitarity_check(scn),
        ScenarioKind::GeneralizedSqueezing => generalized_squeezing(scn),
        ScenarioKind::FidelityBenchmark => fidelity_benchmark(scn),
        ScenarioKind::StrengthComparison => strength_comparison(scn),
        ScenarioKind::SidebandAnalysis => sideband_analysis(scn),
    }
    .map_err(|e| e.context(format!("scenario '{}' ({:?})", scn.name, scn.kind)))?;
    Ok(ScenarioResult {
        name: scn.name.clone(),
        kind: scn.kind,
        table: out.table,
        curves: out.curves,
        summary: out.summary,
        chi: out.chi,
        wigner: out.wigner,
        notes: out.notes,
        provenance: Provenance {
            config_hash: scn.hash(),
            seed: scn.noise.map(|n| n.seed),
            shots: scn.noise.map(|n| n.shots),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

fn scan_points(scn: &Scenario) -> Vec<(f64, ScanParam)> {
    match &scn.scan {
        Some(a) => a.values.iter().map(|&v| (v, a.param)).collect(),
        None => vec![(f64::NAN, ScanParam::TSqz)],
    }
}

fn at(scn: &Scenario, value: f64, param: ScanParam) -> Result<Scenario> {
    if value.is_nan() {
        Ok(scn.clone())
    } else {
        scn.with_param(param, value)
    }
}

/// Ω₂·t_sqz style prediction; zero when the forces commute.
fn nominal_r(scn: &Scenario) -> Result<f64> {
    let cfg = scn.interaction_config()?;
    match effective_interaction(&cfg) {
        Ok(e) => Ok(e.magnitude * scn.interaction.t_sqz),
        Err(Error::DegenerateBasis(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

fn squeeze_once(scn: &Scenario, spin: SpinReadout) -> Result<(SpinFockState, f64)> {
    let cfg = scn.interaction_config()?;
    let init = pl::initial_state(scn, spin)?;
    let rho = pl::run_pulse(&cfg, &init.rho, pl::space(scn)?, &pl::heating(scn))?;
    Ok((SpinFockState::new(rho)?, cfg.ramp.t_total))
}

fn squeezing_scan(scn: &Scenario, commutativity: bool) -> Result<Out> {
    let reference = pl::reference_curve(scn)?;
    let points = scan_points(scn);
    let fits: Vec<(ProbeFit, f64)> = points
        .par_iter()
        .enumerate()
        .map(|(k, &(v, p))| {
            let s = at(scn, v, p)?;
            let (state, total) = squeeze_once(&s, scn.readout)?;
            let pf = pl::probe_and_fit(&s, &state, &reference, total, k as u64)?;
            Ok((pf, nominal_r(&s)?))
        })
        .collect::<Result<_>>()?;
    let (xname, xunit) = match &scn.scan {
        Some(a) => (a.param.name(), a.param.unit()),
        None => ("point", "1"),
    };
    let mut table = Table::new(&[
        (xname, xunit),
        ("r", "1"),
        ("r_sigma", "1"),
        ("contrast", "1"),
        ("contrast_sigma", "1"),
        ("squeezing", "dB"),
        ("r_nominal", "1"),
        ("probe_phase", "rad"),
    ]);
    let durations = scn.probe.durations();
    let mut out_curves = vec![curve("reference", "t_probe", "s", durations.clone(), reference.clone())];
    for (k, ((pf, rn), &(v, _))) in fits.iter().zip(&points).enumerate() {
        let x = if v.is_nan() { k as f64 } else { v };
        let f = &pf.fit;
        table.rows.push(vec![x, f.r, f.r_sigma, f.contrast, f.contrast_sigma, f.db, *rn, pf.phase]);
        out_curves.push(curve(&format!("squeezed[{k}]"), "t_probe", "s", durations.clone(), pf.squeezed.clone()));
    }
    let mut out = Out::new(table);
    out.curves = out_curves;
    let f0 = &fits[0].0.fit;
    out.summary.push(q("probe_strength", f0.probe_strength, f0.probe_strength_sigma, "rad/s"));
    out.summary.push(q("reference_contrast", f0.reference_contrast, 0.0, "1"));
    if fits.len() == 1 {
        out.summary.push(q("r", f0.r, f0.r_sigma, "1"));
        out.summary.push(q("squeezing", f0.db, 20.0 * f0.r_sigma / std::f64::consts::LN_10, "dB"));
        out.summary.push(q("r_nominal", fits[0].1, 0.0, "1"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let rs: Vec<f64> = fits.iter().map(|f| f.0.fit.r).collect();
    if let Some(axis) = &scn.scan {
        match axis.param {
            ScanParam::TSqz => {
                let (k, s) = pl::fit_slope(&xs, &rs);
                out.summary.push(q("strength_fit", k, s, "rad/s"));
                let nominal = fits[0].1 / scn.with_param(ScanParam::TSqz, xs[0])?.interaction.t_sqz;
                out.summary.push(q("strength_nominal", nominal, 0.0, "rad/s"));
            }
            ScanParam::PhaseDifference if commutativity => {
                let (a, s) = pl::fit_abs_sin(&xs, &rs);
                out.summary.push(q("amplitude", a, s, "1"));
                let worst = xs.iter().zip(&rs).map(|(x, r)| (r - a * x.sin().abs()).abs()).fold(0.0, f64::max);
                out.summary.push(q("max_residual", worst, 0.0, "1"));
            }
            _ => {}
        }
        let worst = fits.iter().filter(|f| f.1 > 0.0).map(|f| (f.0.fit.r / f.1 - 1.0).abs()).fold(0.0, f64::max);
        out.summary.push(q("max_relative_deviation_from_nominal", worst, 0.0, "1"));
    }
    out.notes.push(format!("heating in fit: {:?}", pl::fit_options(scn, 0.0).heating));
    Ok(out)
}

fn phase_scan(scn: &Scenario) -> Result<Out> {
    let axis = scn.scan.as_ref().expect("validated");
    let t = scn.probe.fixed_duration.unwrap_or(scn.probe.t_max);
    let mut table = Table::new(&[("probe_phase", "rad"), ("p_down_initial_down", "1"), ("p_initial_up", "1")]);
    let runs: Vec<Vec<f64>> = [SpinReadout::Down, SpinReadout::Up]
        .par_iter()
        .map(|&spin| {
            let (state, _) = squeeze_once(scn, spin)?;
            let readout = pl::dominant_spin(&state);
            let mut ys = Vec::with_capacity(axis.values.len());
            for &phi in &axis.values {
                ys.push(pl::probe(scn, &state, &pl::probe_params(scn, phi, readout, vec![t]))?[0]);
            }
            pl::noisy(scn, ys, spin as u64)
        })
        .collect::<Result<_>>()?;
    for (k, &phi) in axis.values.iter().enumerate() {
        table.rows.push(vec![phi, runs[0][k], runs[1][k]]);
    }
    let mut out = Out::new(table);
    let (pd, sd) = pl::fit_second_harmonic(&axis.values, &runs[0])?;
    let (pu, su) = pl::fit_second_harmonic(&axis.values, &runs[1])?;
    let shift = (0.5 * (pu - pd)).rem_euclid(PI);
    out.summary.push(q("pattern_phase_down", pd, sd, "rad"));
    out.summary.push(q("pattern_phase_up", pu, su, "rad"));
    out.summary.push(q("pattern_shift", shift, 0.5 * (sd * sd + su * su).sqrt(), "rad"));
    out.curves.push(curve("initial_down", "probe_phase", "rad", axis.values.clone(), runs[0].clone()));
    out.curves.push(curve("initial_up", "probe_phase", "rad", axis.values.clone(), runs[1].clone()));
    Ok(out)
}

fn ramp_scan(scn: &Scenario) -> Result<Out> {
    let outer = scn.scan.as_ref().expect("validated");
    let inner = scn.inner_scan.as_ref().expect("validated");
    let jobs: Vec<(usize, usize)> =
        (0..outer.values.len()).flat_map(|i| (0..inner.values.len()).map(move |j| (i, j))).collect();
    let p: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let s = scn.with_param(outer.param, outer.values[i])?.with_param(inner.param, inner.values[j])?;
            let (state, _) = squeeze_once(&s, scn.readout)?;
            let spin = state.spin();
            Ok(match scn.readout {
                SpinReadout::Down => spin[(1, 1)].re,
                SpinReadout::Up => spin[(0, 0)].re,
            })
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(&[(outer.param.name(), outer.param.unit()), ("max_spin_error", "1")]);
    let mut out_curves = Vec::new();
    let n = inner.values.len();
    for (i, &v) in outer.values.iter().enumerate() {
        let row = &p[i * n..(i + 1) * n];
        table.rows.push(vec![v, row.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max)]);
        out_curves.push(curve(
            &format!("{}={v:e}", outer.param.name()),
            inner.param.name(),
            inner.param.unit(),
            inner.values.clone(),
            row.to_vec(),
        ));
    }
    let errs = table.column("max_spin_error").unwrap();
    let monotone = errs.windows(2).all(|w| w[1] <= w[0]);
    let mut out = Out::new(table);
    out.curves = out_curves;
    out.summary.push(q("monotone_decrease", if monotone { 1.0 } else { 0.0 }, 0.0, "bool"));
    Ok(out)
}

/// Second pulse with the spin dependence reversed (σ_β → −σ_β).
fn mirrored(scn: &Scenario) -> Result<Scenario> {
    let mut s = scn.clone();
    let i = &mut s.interaction;
    match (i.force_a.spin, i.force_b.spin) {
        (SpinSpec::Equatorial { phase: a }, SpinSpec::Equatorial { phase: b }) => {
            i.force_b.spin = SpinSpec::Equatorial { phase: 2.0 * a - b };
        }
        _ => return Err(Error::Domain("sign-reversed pulse needs two equatorial forces".into())),
    }
    Ok(s)
}

fn unitarity_check(scn: &Scenario) -> Result<Out> {
    let sp = pl::space(scn)?;
    let heat = pl::heating(scn);
    let cfg = scn.interaction_config()?;
    let cfg_rev = mirrored(scn)?.interaction_config()?;
    let t1 = cfg.ramp.t_total;
    let init = pl::initial_state(scn, SpinReadout::Down)?;
    let single = SpinFockState::new(pl::run_pulse(&cfg, &init.rho, sp, &heat)?)?;
    let phase = scn.probe.phase.unwrap_or_else(|| pl::squeezed_axis_phase(&single));
    let durations = scn.probe.durations();

    let seqs: Vec<SpinFockState> = (0..3)
        .into_par_iter()
        .map(|k| {
            let rho = match k {
                0 => pl::run_pulse(&cfg, &single.rho, sp, &heat)?,
                1 => pl::run_pulse(&cfg, &pl::rotate_spin(&single.rho, PI, 0.0, sp.dim)?, sp, &heat)?,
                _ => pl::run_pulse(&cfg_rev, &single.rho, sp, &heat)?,
            };
            SpinFockState::new(rho)
        })
        .collect::<Result<_>>()?;
    // thermal reference idled for the same two pulse lengths
    let idle = SpinFockState::new(pl::idle(&init.rho, 2.0 * t1, sp, &heat)?)?;
    let idle_curve = pl::noisy(
        scn,
        pl::probe(scn, &idle, &pl::probe_params(scn, phase, SpinReadout::Down, durations.clone()))?,
        10,
    )?;
    let reference = pl::reference_curve(scn)?;

    let mut table = Table::new(&[
        ("sequence", "1"),
        ("max_deviation_from_reference", "1"),
        ("r", "1"),
        ("r_sigma", "1"),
        ("r_nominal", "1"),
    ]);
    let labels = ["S-S", "S-R(pi,0)-S", "S|sz-S|-sz"];
    let mut out_curves = vec![
        curve("initial_reference", "t_probe", "s", durations.clone(), reference.clone()),
        curve("idle_reference", "t_probe", "s", durations.clone(), idle_curve.clone()),
    ];
    let r1 = nominal_r(scn)?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (k, st) in seqs.iter().enumerate() {
        let readout = pl::dominant_spin(st);
        let y =
            pl::noisy(scn, pl::probe(scn, st, &pl::probe_params(scn, phase, readout, durations.clone()))?, k as u64)?;
        let dev = y.iter().zip(&idle_curve).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let (r, rs) = if k == 0 {
            let pf = pl::probe_and_fit(scn, st, &reference, 2.0 * t1, 20)?;
            summary.push(q("r_double", pf.fit.r, pf.fit.r_sigma, "1"));
            summary.push(q("r_double_nominal", 2.0 * r1, 0.0, "1"));
            (pf.fit.r, pf.fit.r_sigma)
        } else {
            summary.push(q(&format!("max_deviation_{}", if k == 1 { "rotation" } else { "sign_flip" }), dev, 0.0, "1"));
            (f64::NAN, f64::NAN)
        };
        rows.push(vec![k as f64, dev, r, rs, if k == 0 { 2.0 * r1 } else { 0.0 }]);
        out_curves.push(curve(labels[k], "t_probe", "s", durations.clone(), y));
    }
    table.rows = rows;
    let mut out = Out::new(table);
    out.curves = out_curves;
    out.summary = summary;
    out.notes.push(
        "sequence 0: S-S, 1: S-R(pi,0)-S, 2: S|sz-S|-sz; deviations are against the idle-heated thermal reference"
            .into(),
    );
    Ok(out)
}

fn generalized_squeezing(scn: &Scenario) -> Result<Out> {
    let sp = pl::space(scn)?;
    let heat = pl::heating(scn);
    let cfg = scn.interaction_config()?;
    let init = pl::initial_state(scn, scn.readout)?;
    let state = SpinFockState::new(pl::run_pulse(&cfg, &init.rho, sp, &heat)?)?;
    let fit = pl::fit_effective(&cfg, &init.rho, &state.rho, sp, &heat)?;
    let spec = scn.tomography.unwrap_or_default();
    let (chi, w) = pl::tomography(&state.oscillator(), &spec)?;
    let asym = pl::rotational_asymmetry(&w, cfg.order);
    let mut table =
        Table::new(&[("order", "1"), ("r_fit", "1"), ("r_fit_sigma", "1"), ("r_nominal", "1"), ("one_minus_f", "1")]);
    table.rows.push(vec![cfg.order as f64, fit.r, fit.r_sigma, fit.r_nominal, fit.infidelity]);
    let mut out = Out::new(table);
    let name = format!("r{}s", cfg.order);
    out.summary.push(q(&name, fit.r, fit.r_sigma, "1"));
    out.summary.push(q(&format!("{name}_nominal"), fit.r_nominal, 0.0, "1"));
    let eff = effective_interaction(&cfg)?;
    out.summary.push(q(&format!("{name}_flat_top"), eff.magnitude * scn.interaction.t_sqz, 0.0, "1"));
    out.summary.push(q("theta_fit", fit.theta, 0.0, "rad"));
    out.summary.push(q("theta_nominal", fit.theta_nominal, 0.0, "rad"));
    out.summary.push(q("one_minus_f", fit.infidelity, 0.0, "1"));
    out.summary.push(q("one_minus_f_joint", fit.joint_infidelity, 0.0, "1"));
    out.summary.push(q("wigner_min", w.min(), 0.0, "1"));
    out.summary.push(q("rotational_asymmetry", asym, 0.0, "1"));
    out.summary.push(q("wigner_imag_residue", w.imag_residue, 0.0, "1"));
    out.chi = Some(chi);
    out.wigner = Some(w);
    out.notes.push(
        "r fitted by maximizing fidelity against the ideal effective interaction over (r, θ); nominal uses Ω_n·∫gⁿ dt"
            .into(),
    );
    Ok(out)
}

fn fidelity_benchmark(scn: &Scenario) -> Result<Out> {
    let mut cases = vec![(0.0, 0.0)];
    if scn.system.nbar > 0.0 || scn.system.heating_rate > 0.0 {
        cases.push((scn.system.nbar, scn.system.heating_rate));
    }
    let fits: Vec<_> = cases
        .par_iter()
        .map(|&(nbar, rate)| {
            let mut s = scn.clone();
            s.system.nbar = nbar;
            s.system.heating_rate = rate;
            let sp = pl::space(&s)?;
            let heat = pl::heating(&s);
            let cfg = s.interaction_config()?;
            let init = pl::initial_state(&s, s.readout)?;
            let rho = pl::run_pulse(&cfg, &init.rho, sp, &heat)?;
            pl::fit_effective(&cfg, &init.rho, &rho, sp, &heat)
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(&[
        ("nbar", "1"),
        ("heating_rate", "1/s"),
        ("one_minus_f", "1"),
        ("one_minus_f_joint", "1"),
        ("r_fit", "1"),
        ("r_fit_sigma", "1"),
        ("r_nominal", "1"),
        ("theta_fit", "rad"),
        ("theta_nominal", "rad"),
    ]);
    let mut out_summary = Vec::new();
    for (&(nbar, rate), f) in cases.iter().zip(&fits) {
        table.rows.push(vec![
            nbar,
            rate,
            f.infidelity,
            f.joint_infidelity,
            f.r,
            f.r_sigma,
            f.r_nominal,
            f.theta,
            f.theta_nominal,
        ]);
    }
    out_summary.push(q("one_minus_f_ground", fits[0].infidelity, 0.0, "1"));
    out_summary.push(q("one_minus_f_ground_joint", fits[0].joint_infidelity, 0.0, "1"));
    if fits.len() > 1 {
        out_summary.push(q("one_minus_f_thermal", fits[1].infidelity, 0.0, "1"));
        out_summary.push(q("one_minus_f_thermal_joint", fits[1].joint_infidelity, 0.0, "1"));
    }
    let mut out = Out::new(table);
    out.summary = out_summary;
    out.notes.push("one_minus_f compares oscillator states; the joint value also counts population heating moves out of the initial spin state".into());
    Ok(out)
}

fn strength_comparison(scn: &Scenario) -> Result<Out> {
    let st = scn.strength.expect("validated");
    let i = &scn.interaction;
    let eta = scn.system.lamb_dicke;
    let total_power = 2.0 * st.power_per_force_mw;
    let carrier = st.carrier_rabi_1mw * total_power.sqrt();
    let (oa, ob, d) = (i.force_a.strength, i.force_b.strength, i.delta.abs());
    let mut table =
        Table::new(&[("order", "1"), ("omega_spin_mediated", "rad/s"), ("omega_direct", "rad/s"), ("ratio", "1")]);
    let mut summary = Vec::new();
    for n in 2..=4usize {
        let spin = match n {
            2 => oa * ob / d,
            3 => ob * oa * oa / (2.0 * d * d),
            _ => ob * oa.powi(3) / (8.0 * d.powi(3)),
        };
        let direct = direct_drive_strength(n, carrier, eta);
        table.rows.push(vec![n as f64, spin, direct, spin / direct]);
        summary.push(q(&format!("ratio_n{n}"), spin / direct, 0.0, "1"));
    }
    let mut out = Out::new(table);
    out.summary = summary;
    out.notes.push(format!(
        "direct drive at the same total power {total_power} mW: Ω_c = {carrier:.6e} rad/s, Ω_ηⁿ = Ω_c·ηⁿ/n!; spin-mediated rates assume orthogonal spin axes"
    ));
    Ok(out)
}

fn sideband_analysis(scn: &Scenario) -> Result<Out> {
    let sb = scn.sideband.expect("validated");
    let (state, _) = squeeze_once(scn, SpinReadout::Down)?;
    let times: Vec<f64> = (0..sb.points).map(|k| sb.t_max * k as f64 / (sb.points - 1) as f64).collect();
    let p = simulate_blue_sideband(&state, &SidebandParams { strength: sb.strength, durations: times.clone() })?;
    let p = pl::noisy(scn, p, 30)?;
    let fit = fit_fock_populations(&times, &p, sb.strength, sb.max_n)?;
    let osc = state.oscillator();
    let mut table =
        Table::new(&[("n", "1"), ("population_fit", "1"), ("population_sigma", "1"), ("population_simulated", "1")]);
    let mut worst: f64 = 0.0;
    for n in 0..=sb.max_n {
        let sim = osc[(n, n)].re;
        worst = worst.max((fit.populations[n] - sim).abs());
        table.rows.push(vec![n as f64, fit.populations[n], fit.sigma[n], sim]);
    }
    let mut out = Out::new(table);
    out.curves.push(curve("blue_sideband", "t", "s", times, p));
    out.summary.push(q("max_population_error", worst, 0.0, "1"));
    out.summary.push(q("decay_fit", fit.decay, 0.0, "1/s"));
    let even: f64 = (0..=sb.max_n).step_by(2).map(|n| fit.populations[n]).sum();
    out.summary.push(q("even_population", even, 0.0, "1"));
    Ok(out)
}
