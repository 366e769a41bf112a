//! Human-editable scenario files. Frequencies are given in Hz (converted to
//! rad/s), durations in µs, laser powers in mW and phases in rad. Every field
//! is optional when `preset` names a starting scenario; without one, the
//! Fig. 2a squeezing scenario supplies the defaults.

use std::f64::consts::TAU;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::experiments::{
    calibration, preset, FitSpec, ForceSpec, ScanAxis, ScanParam, Scenario, ScenarioKind, ShotNoise, SidebandSpec,
    SpinSpec, StrengthSpec, TomographySpec,
};
use crate::model::{ForceBasis, PulseConvention};
use crate::tomography::{ChiMethod, SpinReadout};

/// µs per s; dividing keeps round inputs like 400 µs exact.
const US_PER_S: f64 = 1e6;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    pub name: Option<String>,
    pub kind: Option<ScenarioKind>,
    pub readout: Option<SpinReadout>,
    pub system: Option<SystemCfg>,
    pub interaction: Option<InteractionCfg>,
    pub probe: Option<ProbeCfg>,
    pub fit: Option<FitSpec>,
    pub tomography: Option<TomographyCfg>,
    pub sideband: Option<SidebandCfg>,
    pub strength: Option<StrengthCfg>,
    pub scan: Option<ScanCfg>,
    pub inner_scan: Option<ScanCfg>,
    pub noise: Option<ShotNoise>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemCfg {
    pub dim: Option<usize>,
    pub osc_freq_hz: Option<f64>,
    pub nbar: Option<f64>,
    /// quanta/s
    pub heating_rate: Option<f64>,
    pub lamb_dicke: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceCfg {
    pub power_mw: Option<f64>,
    pub strength_hz: Option<f64>,
    pub spin: Option<SpinSpec>,
    pub motional_phase: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionCfg {
    pub order: Option<usize>,
    pub delta_hz: Option<f64>,
    pub t_sqz_us: Option<f64>,
    pub t_ramp_us: Option<f64>,
    pub convention: Option<PulseConvention>,
    pub include_carrier: Option<bool>,
    pub force_a: Option<ForceCfg>,
    pub force_b: Option<ForceCfg>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeCfg {
    pub power_mw: Option<f64>,
    pub strength_hz: Option<f64>,
    pub t_max_us: Option<f64>,
    pub points: Option<usize>,
    pub phase: Option<f64>,
    pub fixed_duration_us: Option<f64>,
    pub heating_during_probe: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyCfg {
    pub points: Option<usize>,
    pub extent_re: Option<f64>,
    pub extent_im: Option<f64>,
    pub pad: Option<usize>,
    pub method: Option<ChiMethod>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidebandCfg {
    pub strength_hz: f64,
    pub t_max_us: f64,
    pub points: usize,
    pub max_n: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrengthCfg {
    pub power_per_force_mw: f64,
    pub carrier_rabi_1mw_hz: f64,
}

/// Scan values in config units: µs for durations, Hz for Δ, rad for phases.
/// Either `values` or `start`/`stop`/`points`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanCfg {
    pub param: ScanParam,
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
}

fn cfg_err(path: &str, msg: impl Into<String>) -> Error {
    Error::Config { path: path.into(), msg: msg.into() }
}

fn to_si(param: ScanParam, v: f64) -> f64 {
    match param {
        ScanParam::TSqz | ScanParam::TRamp => v / US_PER_S,
        ScanParam::Delta => TAU * v,
        ScanParam::PhaseDifference | ScanParam::ProbePhase => v,
    }
}

impl ScanCfg {
    fn resolve(&self, path: &str) -> Result<ScanAxis> {
        let raw = match (&self.values, self.start, self.stop, self.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) if n >= 2 => {
                (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
            }
            (None, Some(a), Some(_), Some(1)) => vec![a],
            _ => return Err(cfg_err(path, "give either `values` or all of `start`, `stop`, `points`")),
        };
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(cfg_err(path, "scan values must be finite"));
        }
        Ok(ScanAxis { param: self.param, values: raw.iter().map(|&v| to_si(self.param, v)).collect() })
    }
}

fn basis(spin: &SpinSpec) -> ForceBasis {
    if matches!(spin, SpinSpec::Z) {
        ForceBasis::Z
    } else {
        ForceBasis::Equatorial
    }
}

fn strength(path: &str, power_mw: Option<f64>, strength_hz: Option<f64>, basis: ForceBasis) -> Result<Option<f64>> {
    match (power_mw, strength_hz) {
        (Some(_), Some(_)) => Err(cfg_err(path, "give either `power_mw` or `strength_hz`, not both")),
        (Some(p), None) => calibration().strength(p, basis).map(Some).map_err(|e| cfg_err(path, e.to_string())),
        (None, Some(f)) => Ok(Some(TAU * f)),
        (None, None) => Ok(None),
    }
}

fn apply_force(path: &str, cfg: &ForceCfg, f: &mut ForceSpec) -> Result<()> {
    if let Some(s) = cfg.spin {
        f.spin = s;
    }
    if let Some(v) = strength(path, cfg.power_mw, cfg.strength_hz, basis(&f.spin))? {
        f.strength = v;
    }
    if let Some(p) = cfg.motional_phase {
        f.motional_phase = p;
    }
    Ok(())
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile> {
        let de = toml::Deserializer::parse(text).map_err(|e| cfg_err("<document>", e.to_string().trim_end()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            cfg_err(&path, e.into_inner().message().trim_end())
        })
    }

    /// Scenario described by this file; not yet validated.
    pub fn scenario(&self) -> Result<Scenario> {
        let base = self.preset.as_deref().unwrap_or("fig2a");
        let mut s = preset(base).map_err(|e| cfg_err("preset", e.to_string()))?;
        if let Some(n) = &self.name {
            s.name = n.clone();
        }
        if let Some(k) = self.kind {
            s.kind = k;
        }
        if let Some(r) = self.readout {
            s.readout = r;
        }
        if let Some(c) = &self.system {
            let y = &mut s.system;
            y.dim = c.dim.unwrap_or(y.dim);
            y.osc_freq = c.osc_freq_hz.map_or(y.osc_freq, |f| TAU * f);
            y.nbar = c.nbar.unwrap_or(y.nbar);
            y.heating_rate = c.heating_rate.unwrap_or(y.heating_rate);
            y.lamb_dicke = c.lamb_dicke.unwrap_or(y.lamb_dicke);
        }
        if let Some(c) = &self.interaction {
            let i = &mut s.interaction;
            i.order = c.order.unwrap_or(i.order);
            i.delta = c.delta_hz.map_or(i.delta, |f| TAU * f);
            i.t_sqz = c.t_sqz_us.map_or(i.t_sqz, |t| t / US_PER_S);
            i.t_ramp = c.t_ramp_us.map_or(i.t_ramp, |t| t / US_PER_S);
            i.convention = c.convention.unwrap_or(i.convention);
            i.include_carrier = c.include_carrier.unwrap_or(i.include_carrier);
            if let Some(f) = &c.force_a {
                apply_force("interaction.force_a", f, &mut i.force_a)?;
            }
            if let Some(f) = &c.force_b {
                apply_force("interaction.force_b", f, &mut i.force_b)?;
            }
        }
        if let Some(c) = &self.probe {
            let p = &mut s.probe;
            if let Some(v) = strength("probe", c.power_mw, c.strength_hz, ForceBasis::Equatorial)? {
                p.strength = v;
            }
            p.t_max = c.t_max_us.map_or(p.t_max, |t| t / US_PER_S);
            p.points = c.points.unwrap_or(p.points);
            p.phase = c.phase.or(p.phase);
            p.fixed_duration = c.fixed_duration_us.map(|t| t / US_PER_S).or(p.fixed_duration);
            p.heating_during_probe = c.heating_during_probe.unwrap_or(p.heating_during_probe);
        }
        if let Some(f) = self.fit {
            s.fit = f;
        }
        if let Some(c) = &self.tomography {
            let mut t: TomographySpec = s.tomography.unwrap_or_default();
            t.points = c.points.unwrap_or(t.points);
            t.extent_re = c.extent_re.unwrap_or(t.extent_re);
            t.extent_im = c.extent_im.unwrap_or(t.extent_im);
            t.pad = c.pad.unwrap_or(t.pad);
            t.method = c.method.unwrap_or(t.method);
            s.tomography = Some(t);
        }
        if let Some(c) = &self.sideband {
            s.sideband = Some(SidebandSpec {
                strength: TAU * c.strength_hz,
                t_max: c.t_max_us / US_PER_S,
                points: c.points,
                max_n: c.max_n,
            });
        }
        if let Some(c) = &self.strength {
            s.strength = Some(StrengthSpec {
                power_per_force_mw: c.power_per_force_mw,
                carrier_rabi_1mw: TAU * c.carrier_rabi_1mw_hz,
            });
        }
        if let Some(c) = &self.scan {
            s.scan = Some(c.resolve("scan")?);
        }
        if let Some(c) = &self.inner_scan {
            s.inner_scan = Some(c.resolve("inner_scan")?);
        }
        if let Some(n) = self.noise {
            s.noise = Some(n);
        }
        Ok(s)
    }
}

/// Parses and validates a scenario file; validation failures are reported
/// against the section they concern.
pub fn scenario_from_str(text: &str) -> Result<Scenario> {
    let s = ConfigFile::parse(text)?.scenario()?;
    s.validate().map_err(|e| cfg_err(section_of(&e), e.to_string()))?;
    Ok(s)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(e).context(format!("reading {}", path.display())))?;
    scenario_from_str(&text).map_err(|e| e.context(path.display().to_string()))
}

fn section_of(e: &Error) -> &'static str {
    let msg = e.to_string();
    if msg.contains("RampShape") || msg.contains("SDF") || msg.contains("spin ax") || msg.contains("order") {
        "interaction"
    } else if msg.contains("probe") {
        "probe"
    } else if msg.contains("scan") {
        "scan"
    } else if msg.contains("dim") || msg.contains("oscillator") || msg.contains("heating") || msg.contains("nbar") {
        "system"
    } else if msg.contains("sideband") {
        "sideband"
    } else if msg.contains("strength") {
        "strength"
    } else if msg.contains("noise") {
        "noise"
    } else {
        "<scenario>"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_with_overrides() {
        let s = scenario_from_str(
            r#"
            preset = "fig2a"
            name = "short"
            [interaction]
            t_sqz_us = 200
            delta_hz = 100e3
            [interaction.force_b]
            power_mw = 1.0
            [scan]
            param = "t_sqz"
            start = 100
            stop = 300
            points = 3
            "#,
        )
        .unwrap();
        assert_eq!(s.name, "short");
        assert!((s.interaction.t_sqz - 200e-6).abs() < 1e-18);
        assert!((s.interaction.delta - TAU * 1e5).abs() < 1e-9);
        assert!((s.interaction.force_b.strength - TAU * 6.5e3).abs() < 1e-9);
        let v = &s.scan.unwrap().values;
        assert!((v[2] - 300e-6).abs() < 1e-18);
    }

    #[test]
    fn unknown_field_has_path() {
        let e = scenario_from_str("[interaction]\nt_sqz = 4\n").unwrap_err();
        match e {
            Error::Config { path, msg } => {
                assert_eq!(path, "interaction.t_sqz");
                assert!(msg.contains("t_sqz"), "{msg}");
            }
            e => panic!("{e}"),
        }
        let e = scenario_from_str("[interaction.force_a]\nspin = { axis = \"diagonal\" }\n").unwrap_err();
        assert!(matches!(&e, Error::Config { path, .. } if path == "interaction.force_a.spin.axis"), "{e}");
    }

    #[test]
    fn ramp_invariant_is_named() {
        let e = scenario_from_str("[interaction]\nt_sqz_us = 50\nt_ramp_us = 40\nconvention = \"inclusive\"\n")
            .unwrap_err();
        let msg = e.to_string();
        assert!(matches!(&e, Error::Config { path, .. } if path == "interaction"), "{msg}");
        assert!(msg.contains("RampShape"), "{msg}");
    }

    #[test]
    fn conflicting_strengths() {
        let e = scenario_from_str("[probe]\npower_mw = 0.5\nstrength_hz = 4e3\n").unwrap_err();
        assert!(matches!(&e, Error::Config { path, .. } if path == "probe"), "{e}");
    }
}
