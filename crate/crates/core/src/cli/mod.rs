//! Command-line front end: run scenarios from presets or TOML files, list
//! presets, reconstruct Wigner functions from χ datasets and validate
//! configs without running them.

pub mod config;
pub mod output;
#[cfg(feature = "png")]
pub mod plot;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{preset, run_scenario, Scenario, ShotNoise, PRESET_NAMES};
use crate::tomography::{wigner_from_characteristic, DEFAULT_PAD};
pub use config::{load_scenario, scenario_from_str, ConfigFile};
pub use output::{read_chi, write_dataset, Format};

/// Output root used when neither `--out` nor this variable is set: `./out`.
pub const OUT_ENV: &str = "SPINSQUEEZE_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "spinsqueeze",
    version,
    about = "Spin-mediated squeezing, trisqueezing and quadsqueezing of a trapped-ion oscillator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct OutputArgs {
    /// Output directory (default: $SPINSQUEEZE_OUT, else ./out)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated dataset formats
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Csv, Format::Json])]
    pub format: Vec<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario given as a TOML file or a preset name
    Run {
        scenario: String,
        #[command(flatten)]
        output: OutputArgs,
        /// Worker threads (default: all cores)
        #[arg(long)]
        jobs: Option<usize>,
        /// Seed for shot noise
        #[arg(long)]
        seed: Option<u64>,
        /// Shots per point; enables binomial shot noise
        #[arg(long)]
        shots: Option<u32>,
    },
    /// List preset names
    Presets,
    /// Reconstruct W(x, p) from a χ dataset (CSV or JSON)
    Wigner {
        dataset: PathBuf,
        /// Zero padding on each side of the χ grid
        #[arg(long, default_value_t = DEFAULT_PAD)]
        pad: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Parse and validate a scenario without running it
    Validate { scenario: String },
}

/// A path to an existing file is read as TOML; anything else must name a preset.
pub fn resolve_scenario(arg: &str) -> Result<Scenario> {
    let path = Path::new(arg);
    if path.is_file() {
        return load_scenario(path);
    }
    if PRESET_NAMES.contains(&arg) {
        let s = preset(arg)?;
        s.validate()?;
        return Ok(s);
    }
    if arg.ends_with(".toml") {
        return Err(Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, format!("{arg}: no such file"))));
    }
    Err(Error::UnknownPreset(arg.into()))
}

fn out_dir(arg: Option<PathBuf>) -> PathBuf {
    arg.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"))
}

fn apply_noise(scn: &mut Scenario, seed: Option<u64>, shots: Option<u32>) {
    match (scn.noise.as_mut(), shots) {
        (Some(n), _) => {
            n.shots = shots.unwrap_or(n.shots);
            n.seed = seed.unwrap_or(n.seed);
        }
        (None, Some(shots)) => scn.noise = Some(ShotNoise { shots, seed: seed.unwrap_or(0) }),
        (None, None) => {}
    }
}

fn print_summary(r: &crate::experiments::ScenarioResult) {
    println!("{} ({:?})", r.name, r.kind);
    let w = r.summary.iter().map(|q| q.name.len()).max().unwrap_or(0);
    for q in &r.summary {
        if q.sigma > 0.0 {
            println!("  {:w$}  {:.6} ± {:.2e} {}", q.name, q.value, q.sigma, q.unit);
        } else {
            println!("  {:w$}  {:.6} {}", q.name, q.value, q.unit);
        }
    }
    for n in &r.notes {
        println!("  note: {n}");
    }
}

fn print_written(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Presets => {
            for n in PRESET_NAMES {
                let s = preset(n)?;
                println!("{n:20} {:?}", s.kind);
            }
        }
        Command::Validate { scenario } => {
            let s = resolve_scenario(&scenario)?;
            println!("ok: {} ({:?}), config hash {}", s.name, s.kind, s.hash());
        }
        Command::Run { scenario, output, jobs, seed, shots } => {
            if let Some(j) = jobs {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(j.max(1))
                    .build_global()
                    .map_err(|e| Error::Config { path: "--jobs".into(), msg: e.to_string() })?;
            }
            let mut scn = resolve_scenario(&scenario)?;
            apply_noise(&mut scn, seed, shots);
            let res = run_scenario(&scn)?;
            print_summary(&res);
            let dir = out_dir(output.out);
            for f in output.format {
                print_written(&write_dataset(&res, f, &dir)?);
            }
        }
        Command::Wigner { dataset, pad, output } => {
            let chi = read_chi(&dataset)?;
            let w = wigner_from_characteristic(&chi, pad)?;
            let stem =
                dataset.file_stem().and_then(|s| s.to_str()).unwrap_or("chi").trim_end_matches("_chi").to_string();
            println!(
                "{}×{} grid, W(0,0) = {:.6}, ∫W = {:.6}, min W = {:.3e}, imag residue {:.1e}",
                w.x.len(),
                w.p.len(),
                w.interpolate(0.0, 0.0),
                w.integral(),
                w.min(),
                w.imag_residue
            );
            let dir = out_dir(output.out);
            std::fs::create_dir_all(&dir)?;
            let mut files = Vec::new();
            for f in output.format {
                match f {
                    Format::Csv => {
                        let p = dir.join(format!("{stem}_wigner.csv"));
                        output::write_wigner_csv(&p, &w)?;
                        files.push(p);
                    }
                    Format::Json => {
                        let p = dir.join(format!("{stem}_wigner.json"));
                        output::write_json(&p, &w)?;
                        files.push(p);
                    }
                    #[cfg(feature = "png")]
                    Format::Png => {
                        let p = dir.join(format!("{stem}_wigner.png"));
                        plot::wigner_png(&p, &w)?;
                        files.push(p);
                    }
                    #[cfg(not(feature = "png"))]
                    Format::Png => {
                        return Err(Error::UnsupportedFormat("png (built without the `png` feature)".into()))
                    }
                }
            }
            print_written(&files);
        }
    }
    Ok(())
}

/// Exit status: 2 for bad input (config, preset name, format), 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Config { .. } | Error::UnknownPreset(_) | Error::UnsupportedFormat(_) => 2,
        _ => 1,
    }
}
