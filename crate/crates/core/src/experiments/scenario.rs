use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{domain, Error, Result};
use crate::hilbert::{OscillatorParams, SpinAxis};
use crate::model::{InteractionConfig, PulseConvention, RampShape, SdfParams};
use crate::tomography::{ChiMethod, HeatingInFit, SpinReadout};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    SqueezingCharacterisation,
    PhaseScan,
    CommutativityScan,
    DetuningScan,
    RampScan,
    UnitarityCheck,
    GeneralizedSqueezing,
    FidelityBenchmark,
    StrengthComparison,
    SidebandAnalysis,
}

impl ScenarioKind {
    pub fn needs_scan(self) -> bool {
        matches!(
            self,
            ScenarioKind::PhaseScan
                | ScenarioKind::CommutativityScan
                | ScenarioKind::DetuningScan
                | ScenarioKind::RampScan
        )
    }
}

/// Oscillator and truncation. Angular frequencies in rad/s, rates in 1/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub dim: usize,
    pub osc_freq: f64,
    pub nbar: f64,
    pub heating_rate: f64,
    pub lamb_dicke: f64,
}

impl SystemSpec {
    pub fn oscillator(&self) -> OscillatorParams {
        OscillatorParams { freq: self.osc_freq, nbar: self.nbar, heating_rate: self.heating_rate }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case")]
pub enum SpinSpec {
    Equatorial { phase: f64 },
    Z,
    Bloch { vector: [f64; 3] },
}

impl SpinSpec {
    pub fn axis(&self) -> Result<SpinAxis> {
        match *self {
            SpinSpec::Equatorial { phase } => Ok(SpinAxis::equatorial(phase)),
            SpinSpec::Z => Ok(SpinAxis::z()),
            SpinSpec::Bloch { vector } => SpinAxis::from_bloch(vector),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceSpec {
    pub strength: f64,
    pub spin: SpinSpec,
    #[serde(default)]
    pub motional_phase: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionSpec {
    pub order: usize,
    pub delta: f64,
    pub force_a: ForceSpec,
    pub force_b: ForceSpec,
    pub t_sqz: f64,
    pub t_ramp: f64,
    #[serde(default)]
    pub convention: PulseConvention,
    #[serde(default)]
    pub include_carrier: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub strength: f64,
    /// Duration grid 0..=t_max with `points` samples.
    pub t_max: f64,
    pub points: usize,
    /// Probe motional phase; `None` aligns it with the squeezed quadrature.
    #[serde(default)]
    pub phase: Option<f64>,
    /// Fixed duration for probe-phase scans.
    #[serde(default)]
    pub fixed_duration: Option<f64>,
    #[serde(default = "yes")]
    pub heating_during_probe: bool,
}

fn yes() -> bool {
    true
}

impl ProbeSpec {
    pub fn durations(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.t_max * k as f64 / (self.points - 1) as f64).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatingFitMode {
    #[default]
    Off,
    Linear,
    Propagated,
}

impl HeatingFitMode {
    /// `duration` is the time the state spent heating before the probe.
    pub fn resolve(self, rate: f64, duration: f64) -> HeatingInFit {
        match self {
            HeatingFitMode::Off => HeatingInFit::Off,
            HeatingFitMode::Linear => HeatingInFit::Linear { rate, duration },
            HeatingFitMode::Propagated => HeatingInFit::Propagated { rate, duration },
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    #[serde(default)]
    pub heating: HeatingFitMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographySpec {
    pub points: usize,
    pub extent_re: f64,
    pub extent_im: f64,
    pub pad: usize,
    #[serde(default)]
    pub method: ChiMethod,
}

impl Default for TomographySpec {
    fn default() -> TomographySpec {
        TomographySpec {
            points: 41,
            extent_re: 3.0,
            extent_im: 3.0,
            pad: crate::tomography::DEFAULT_PAD,
            method: ChiMethod::Direct,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidebandSpec {
    pub strength: f64,
    pub t_max: f64,
    pub points: usize,
    pub max_n: usize,
}

/// Total optical power per force and the carrier Rabi frequency at 1 mW,
/// for comparing against a direct ηⁿ drive of the same total power.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrengthSpec {
    pub power_per_force_mw: f64,
    pub carrier_rabi_1mw: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanParam {
    TSqz,
    /// Spin phase of force b minus that of force a.
    PhaseDifference,
    Delta,
    TRamp,
    ProbePhase,
}

impl ScanParam {
    pub fn unit(self) -> &'static str {
        match self {
            ScanParam::TSqz | ScanParam::TRamp => "s",
            ScanParam::PhaseDifference | ScanParam::ProbePhase => "rad",
            ScanParam::Delta => "rad/s",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScanParam::TSqz => "t_sqz",
            ScanParam::PhaseDifference => "phase_difference",
            ScanParam::Delta => "delta",
            ScanParam::TRamp => "t_ramp",
            ScanParam::ProbePhase => "probe_phase",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanAxis {
    pub param: ScanParam,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotNoise {
    pub shots: u32,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    pub system: SystemSpec,
    pub interaction: InteractionSpec,
    pub probe: ProbeSpec,
    #[serde(default)]
    pub readout: SpinReadout,
    #[serde(default)]
    pub fit: FitSpec,
    #[serde(default)]
    pub tomography: Option<TomographySpec>,
    #[serde(default)]
    pub sideband: Option<SidebandSpec>,
    #[serde(default)]
    pub strength: Option<StrengthSpec>,
    #[serde(default)]
    pub scan: Option<ScanAxis>,
    /// Inner axis for ramp scans (the t_sqz values swept per ramp).
    #[serde(default)]
    pub inner_scan: Option<ScanAxis>,
    #[serde(default)]
    pub noise: Option<ShotNoise>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        if s.dim < 4 {
            return Err(Error::InvalidDimension(format!("system.dim = {} < 4", s.dim)));
        }
        s.oscillator().validate()?;
        if self.kind.needs_scan() && self.scan.as_ref().map_or(true, |a| a.values.is_empty()) {
            return domain(format!("{:?} needs a non-empty scan axis", self.kind));
        }
        if let Some(a) = &self.scan {
            if a.values.is_empty() {
                return domain("scan.values is empty");
            }
        }
        if self.kind == ScenarioKind::RampScan && self.inner_scan.as_ref().map_or(true, |a| a.values.is_empty()) {
            return domain("ramp_scan needs a non-empty inner_scan over t_sqz");
        }
        if self.probe.points < 3 || !(self.probe.t_max > 0.0) || !(self.probe.strength > 0.0) {
            return domain("probe needs points ≥ 3, t_max > 0 and strength > 0");
        }
        if self.kind == ScenarioKind::SidebandAnalysis && self.sideband.is_none() {
            return domain("sideband_analysis needs a sideband section");
        }
        if self.kind == ScenarioKind::StrengthComparison && self.strength.is_none() {
            return domain("strength_comparison needs a strength section");
        }
        if let Some(n) = self.noise {
            if n.shots == 0 {
                return domain("noise.shots must be ≥ 1");
            }
        }
        self.interaction_config().map(|_| ())
    }

    /// Interaction with the resonance-rule detunings and pulse shape resolved.
    pub fn interaction_config(&self) -> Result<InteractionConfig> {
        let i = &self.interaction;
        let ramp = RampShape::with_convention(i.t_sqz, i.t_ramp, i.convention)?;
        let force = |f: &ForceSpec| -> Result<SdfParams> {
            Ok(SdfParams {
                strength: f.strength,
                detuning: 0.0,
                spin_axis: f.spin.axis()?,
                motional_phase: f.motional_phase,
            })
        };
        let mut c = InteractionConfig::nonlinear(
            i.order,
            i.delta,
            force(&i.force_a)?,
            force(&i.force_b)?,
            ramp,
            self.system.oscillator(),
        )?;
        c.include_carrier = i.include_carrier;
        c.lamb_dicke = self.system.lamb_dicke;
        c.validate()?;
        Ok(c)
    }

    /// Copy with one scan parameter applied.
    pub fn with_param(&self, param: ScanParam, value: f64) -> Result<Scenario> {
        let mut s = self.clone();
        let i = &mut s.interaction;
        match param {
            ScanParam::TSqz => i.t_sqz = value,
            ScanParam::Delta => i.delta = value,
            ScanParam::TRamp => i.t_ramp = value,
            ScanParam::ProbePhase => s.probe.phase = Some(value),
            ScanParam::PhaseDifference => {
                let SpinSpec::Equatorial { phase } = i.force_a.spin else {
                    return domain("phase_difference scans need an equatorial force a");
                };
                i.force_b.spin = SpinSpec::Equatorial { phase: phase + value };
            }
        }
        Ok(s)
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("scenario serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}
