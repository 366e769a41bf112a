//! Figure-level scenarios. All physical constants of the reference setup
//! live here.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{CalibrationPoint, ForceBasis, PowerCalibration, PulseConvention};
use crate::tomography::{ChiMethod, SpinReadout, DEFAULT_PAD};

use super::scenario::*;

const TAU: f64 = 2.0 * PI;
pub const LAMB_DICKE: f64 = 0.049;
pub const OSC_FREQ: f64 = TAU * 1.2e6;
pub const NBAR: f64 = 0.09;
pub const HEATING_RATE: f64 = 300.0;
/// Carrier Rabi frequency of one tone pair at 1 mW.
pub const CARRIER_RABI_1MW: f64 = TAU * 132.7e3;

pub fn calibration() -> PowerCalibration {
    let p = |power_mw, basis, khz: f64| CalibrationPoint { power_mw, basis, strength: TAU * khz * 1e3 };
    PowerCalibration {
        points: vec![
            p(0.5, ForceBasis::Equatorial, 4.6),
            p(1.0, ForceBasis::Equatorial, 6.5),
            p(1.0, ForceBasis::Z, 1.3),
        ],
        lamb_dicke: LAMB_DICKE,
    }
}

pub const PRESET_NAMES: &[&str] = &[
    "fig2a",
    "fig2b_50khz",
    "fig2b_100khz",
    "fig2c",
    "fig2d",
    "detuning_scan",
    "figs2_ramp",
    "figs4_sideband",
    "figs6_unitarity",
    "fig3_trisqueezing",
    "fig3_quadsqueezing",
    "fidelity_n2",
    "fidelity_n3",
    "fidelity_n4",
    "figs8_strength",
];

fn eq(phase: f64) -> SpinSpec {
    SpinSpec::Equatorial { phase }
}

fn force(power_mw: f64, spin: SpinSpec) -> ForceSpec {
    let basis = if matches!(spin, SpinSpec::Z) { ForceBasis::Z } else { ForceBasis::Equatorial };
    let strength = calibration().strength(power_mw, basis).expect("calibrated basis");
    ForceSpec { strength, spin, motional_phase: 0.0 }
}

fn system(dim: usize) -> SystemSpec {
    SystemSpec { dim, osc_freq: OSC_FREQ, nbar: NBAR, heating_rate: HEATING_RATE, lamb_dicke: LAMB_DICKE }
}

fn probe() -> ProbeSpec {
    ProbeSpec {
        strength: calibration().strength(0.5, ForceBasis::Equatorial).expect("calibrated"),
        t_max: 120e-6,
        points: 31,
        phase: None,
        fixed_duration: None,
        heating_during_probe: true,
    }
}

fn squeezing(delta_khz: f64, t_sqz: f64) -> InteractionSpec {
    InteractionSpec {
        order: 2,
        delta: TAU * (delta_khz * 1e3),
        force_a: force(0.5, eq(0.0)),
        force_b: force(0.5, eq(PI / 2.0)),
        t_sqz,
        t_ramp: 40e-6,
        convention: PulseConvention::Fwhm,
        include_carrier: false,
    }
}

fn base(name: &str, kind: ScenarioKind, dim: usize, interaction: InteractionSpec) -> Scenario {
    Scenario {
        name: name.into(),
        kind,
        system: system(dim),
        interaction,
        probe: probe(),
        readout: SpinReadout::Down,
        fit: FitSpec::default(),
        tomography: None,
        sideband: None,
        strength: None,
        scan: None,
        inner_scan: None,
        noise: None,
    }
}

fn trisqueezing() -> InteractionSpec {
    InteractionSpec {
        order: 3,
        delta: -TAU * 25e3,
        force_a: force(1.0, eq(0.0)),
        force_b: force(1.0, SpinSpec::Z),
        t_sqz: 600e-6,
        t_ramp: 80e-6,
        convention: PulseConvention::Fwhm,
        include_carrier: false,
    }
}

fn quadsqueezing() -> InteractionSpec {
    InteractionSpec {
        order: 4,
        delta: TAU * 25e3,
        force_a: force(1.0, eq(0.0)),
        force_b: force(1.0, eq(PI / 2.0)),
        t_sqz: 600e-6,
        t_ramp: 80e-6,
        convention: PulseConvention::Fwhm,
        include_carrier: false,
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

pub fn preset(name: &str) -> Result<Scenario> {
    use ScenarioKind::*;
    let s = match name {
        "fig2a" | "squeezing" => base("fig2a", SqueezingCharacterisation, 60, squeezing(50.0, 400e-6)),
        "fig2b_50khz" | "fig2b_100khz" => {
            // at 50 kHz r passes 2 by 800 µs, beyond what 150 Fock levels hold
            let (d, dim, t_max) = if name.ends_with("50khz") { (50.0, 150, 600e-6) } else { (100.0, 60, 800e-6) };
            let mut s = base(name, SqueezingCharacterisation, dim, squeezing(d, 400e-6));
            s.scan = Some(ScanAxis {
                param: ScanParam::TSqz,
                values: linspace(100e-6, t_max, (t_max / 100e-6).round() as usize),
            });
            s.fit.heating = HeatingFitMode::Propagated;
            s
        }
        "fig2c" => {
            let mut s = base(name, PhaseScan, 60, squeezing(50.0, 400e-6));
            s.probe.fixed_duration = Some(53.6e-6);
            s.scan = Some(ScanAxis { param: ScanParam::ProbePhase, values: linspace(0.0, TAU, 37) });
            s
        }
        "fig2d" => {
            let mut s = base(name, CommutativityScan, 60, squeezing(50.0, 400e-6));
            s.scan = Some(ScanAxis { param: ScanParam::PhaseDifference, values: linspace(0.0, TAU, 17) });
            s.fit.heating = HeatingFitMode::Propagated;
            s
        }
        "detuning_scan" => {
            let mut s = base(name, DetuningScan, 60, squeezing(50.0, 400e-6));
            s.scan = Some(ScanAxis {
                param: ScanParam::Delta,
                values: [50e3, 75e3, 100e3, 150e3].map(|v| TAU * v).to_vec(),
            });
            s.fit.heating = HeatingFitMode::Propagated;
            s
        }
        "figs2_ramp" => {
            let mut s = base(name, RampScan, 40, squeezing(50.0, 400e-6));
            s.system.nbar = 0.0;
            s.system.heating_rate = 0.0;
            s.scan = Some(ScanAxis { param: ScanParam::TRamp, values: vec![0.0, 20e-6, 40e-6, 80e-6] });
            s.inner_scan = Some(ScanAxis { param: ScanParam::TSqz, values: linspace(100e-6, 400e-6, 7) });
            s
        }
        "figs4_sideband" => {
            let mut s = base(name, SidebandAnalysis, 60, squeezing(50.0, 400e-6));
            s.sideband = Some(SidebandSpec { strength: TAU * 10e3, t_max: 800e-6, points: 401, max_n: 14 });
            s
        }
        "figs6_unitarity" => base(name, UnitarityCheck, 60, squeezing(50.0, 200e-6)),
        "fig3_trisqueezing" => {
            let mut s = base(name, GeneralizedSqueezing, 50, trisqueezing());
            s.tomography = Some(TomographySpec {
                points: 41,
                extent_re: 3.0,
                extent_im: 3.0,
                pad: DEFAULT_PAD,
                method: ChiMethod::Direct,
            });
            s
        }
        "fig3_quadsqueezing" => {
            let mut s = base(name, GeneralizedSqueezing, 50, quadsqueezing());
            s.tomography = Some(TomographySpec::default());
            s
        }
        "fidelity_n2" => base(name, FidelityBenchmark, 60, squeezing(50.0, 400e-6)),
        "fidelity_n3" => base(name, FidelityBenchmark, 60, trisqueezing()),
        "fidelity_n4" => base(name, FidelityBenchmark, 60, quadsqueezing()),
        "figs8_strength" => {
            let mut s = base(name, StrengthComparison, 60, quadsqueezing());
            s.strength = Some(StrengthSpec { power_per_force_mw: 1.0, carrier_rabi_1mw: CARRIER_RABI_1MW });
            s
        }
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_validate() {
        for n in PRESET_NAMES {
            let s = preset(n).unwrap();
            s.validate().unwrap_or_else(|e| panic!("{n}: {e}"));
            assert_eq!(&s.name, n);
        }
        assert!(matches!(preset("nope"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn figure_parameters() {
        let t = preset("fig3_trisqueezing").unwrap().interaction_config().unwrap();
        assert_eq!((t.order, t.m()), (3, -2));
        let q = preset("fig3_quadsqueezing").unwrap().interaction_config().unwrap();
        assert_eq!((q.order, q.m()), (4, -3));
        assert_eq!(preset("fig2c").unwrap().probe.fixed_duration, Some(53.6e-6));
        let a = preset("fig2a").unwrap();
        assert!((a.interaction.force_a.strength - TAU * 4.6e3).abs() < 1e-9);
        assert!((a.probe.strength - TAU * 4.6e3).abs() < 1e-9);
        assert!((LAMB_DICKE * CARRIER_RABI_1MW - TAU * 6.5e3).abs() < TAU * 0.01e3);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = preset("fig2a").unwrap();
        assert_eq!(a.hash(), preset("fig2a").unwrap().hash());
        let mut b = a.clone();
        b.interaction.t_sqz += 1e-9;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
