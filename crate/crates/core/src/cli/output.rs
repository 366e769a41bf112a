use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::ScenarioResult;
use crate::tomography::{CharacteristicGrid, WignerGrid};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Png,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Format> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "png" => Ok(Format::Png),
            _ => Err(Error::UnsupportedFormat(s.into())),
        }
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so `path` never holds a partial file. If `fill` fails the
/// temporary file is removed and `path` is left untouched.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn header(name: &str, unit: &str) -> String {
    format!("{name} [{unit}]")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Serde(e.to_string())
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn write_csv(path: &Path, head: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    write_atomic(path, |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(head).map_err(csv_err)?;
        for r in rows {
            c.write_record(&r).map_err(csv_err)?;
        }
        c.flush()?;
        Ok(())
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Serde(e.to_string()))?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

pub fn read_result(path: &Path) -> Result<ScenarioResult> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Serde(e.to_string()))
}

pub fn write_chi_csv(path: &Path, chi: &CharacteristicGrid) -> Result<()> {
    let head = ["beta_re", "beta_im", "chi_re", "chi_im"].map(|n| header(n, "1")).to_vec();
    let rows = (0..chi.beta_im.len()).flat_map(|m| (0..chi.beta_re.len()).map(move |j| (j, m))).map(|(j, m)| {
        let z = chi.get(j, m);
        vec![num(chi.beta_re[j]), num(chi.beta_im[m]), num(z.re), num(z.im)]
    });
    write_csv(path, &head, rows)
}

pub fn write_wigner_csv(path: &Path, w: &WignerGrid) -> Result<()> {
    let head = ["x", "p", "wigner"].map(|n| header(n, "1")).to_vec();
    let rows = (0..w.p.len())
        .flat_map(|ip| (0..w.x.len()).map(move |ix| (ix, ip)))
        .map(|(ix, ip)| vec![num(w.x[ix]), num(w.p[ip]), num(w.get(ix, ip))]);
    write_csv(path, &head, rows)
}

/// χ grid from a CSV with columns beta_re, beta_im, chi_re, chi_im (unit
/// annotations in the header are ignored) or from a JSON grid or result.
pub fn read_chi(path: &Path) -> Result<CharacteristicGrid> {
    let ctx = |e: Error| e.context(path.display().to_string());
    if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(path).map_err(|e| ctx(e.into()))?;
        if let Ok(g) = serde_json::from_str::<CharacteristicGrid>(&text) {
            return Ok(g);
        }
        let r: ScenarioResult = serde_json::from_str(&text).map_err(|e| ctx(Error::Serde(e.to_string())))?;
        return r.chi.ok_or_else(|| ctx(Error::Serde("result holds no χ grid".into())));
    }
    let mut rd = csv::Reader::from_path(path).map_err(|e| ctx(csv_err(e)))?;
    let names: Vec<String> = rd
        .headers()
        .map_err(|e| ctx(csv_err(e)))?
        .iter()
        .map(|h| h.split_whitespace().next().unwrap_or("").to_string())
        .collect();
    let col =
        |n: &str| names.iter().position(|h| h == n).ok_or_else(|| ctx(Error::Serde(format!("missing column `{n}`"))));
    let idx = [col("beta_re")?, col("beta_im")?, col("chi_re")?, col("chi_im")?];
    let mut pts = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| ctx(csv_err(e)))?;
        let mut v = [0.0; 4];
        for (k, &i) in idx.iter().enumerate() {
            let s = rec.get(i).unwrap_or("");
            v[k] =
                s.trim().parse().map_err(|_| ctx(Error::Serde(format!("row {}: `{s}` is not a number", line + 2))))?;
        }
        pts.push(v);
    }
    let axis = |k: usize| {
        let mut a: Vec<f64> = pts.iter().map(|p| p[k]).collect();
        a.sort_by(f64::total_cmp);
        a.dedup();
        a
    };
    let (re, im) = (axis(0), axis(1));
    if re.len() * im.len() != pts.len() {
        return Err(ctx(Error::Serde(format!("{} rows do not fill a {}×{} grid", pts.len(), re.len(), im.len()))));
    }
    let mut values = vec![C64::new(f64::NAN, 0.0); pts.len()];
    for p in &pts {
        let j = re.partition_point(|&v| v < p[0]);
        let m = im.partition_point(|&v| v < p[1]);
        values[m * re.len() + j] = C64::new(p[2], p[3]);
    }
    if values.iter().any(|z| z.re.is_nan()) {
        return Err(ctx(Error::Serde("duplicate grid points".into())));
    }
    let g = CharacteristicGrid { beta_re: re, beta_im: im, values };
    g.validate().map_err(ctx)?;
    Ok(g)
}

/// Writes `result` in `format` under `dir`, returning the files written.
/// CSV gives the scan table (one row per point) plus summary, curves and
/// grids; JSON holds the whole result; PNG renders grids and curves.
pub fn write_dataset(result: &ScenarioResult, format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let file = |suffix: &str, ext: &str| dir.join(format!("{}{suffix}.{ext}", result.name));
    let mut out = Vec::new();
    match format {
        Format::Json => {
            let p = file("", "json");
            write_json(&p, result)?;
            out.push(p);
        }
        Format::Csv => {
            let t = &result.table;
            let p = file("", "csv");
            let head: Vec<String> = t.columns.iter().map(|c| header(&c.name, &c.unit)).collect();
            write_csv(&p, &head, t.rows.iter().map(|r| r.iter().map(|&v| num(v)).collect()))?;
            out.push(p);

            let p = file("_summary", "csv");
            let head = vec!["quantity".into(), "value".into(), "sigma".into(), "unit".into()];
            let rows = result.summary.iter().map(|q| vec![q.name.clone(), num(q.value), num(q.sigma), q.unit.clone()]);
            write_csv(&p, &head, rows)?;
            out.push(p);

            if !result.curves.is_empty() {
                let p = file("_curves", "csv");
                let head = vec!["curve".into(), "x_name".into(), "x_unit".into(), "x".into(), "y".into()];
                let rows = result.curves.iter().flat_map(|c| {
                    c.x.iter()
                        .zip(&c.y)
                        .map(move |(x, y)| vec![c.label.clone(), c.x_name.clone(), c.x_unit.clone(), num(*x), num(*y)])
                });
                write_csv(&p, &head, rows)?;
                out.push(p);
            }
            if let Some(chi) = &result.chi {
                let p = file("_chi", "csv");
                write_chi_csv(&p, chi)?;
                out.push(p);
            }
            if let Some(w) = &result.wigner {
                let p = file("_wigner", "csv");
                write_wigner_csv(&p, w)?;
                out.push(p);
            }
        }
        Format::Png => out.extend(write_png(result, dir)?),
    }
    Ok(out)
}

#[cfg(feature = "png")]
fn write_png(result: &ScenarioResult, dir: &Path) -> Result<Vec<PathBuf>> {
    use super::plot;
    let mut out = Vec::new();
    let file = |suffix: &str| dir.join(format!("{}{suffix}.png", result.name));
    if let Some(w) = &result.wigner {
        let p = file("_wigner");
        plot::wigner_png(&p, w)?;
        out.push(p);
    }
    if let Some(chi) = &result.chi {
        let p = file("_chi");
        plot::chi_png(&p, chi)?;
        out.push(p);
    }
    if !result.curves.is_empty() {
        let p = file("_curves");
        plot::curves_png(&p, &result.curves)?;
        out.push(p);
    }
    Ok(out)
}

#[cfg(not(feature = "png"))]
fn write_png(_: &ScenarioResult, _: &Path) -> Result<Vec<PathBuf>> {
    Err(Error::UnsupportedFormat("png (built without the `png` feature)".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_write_leaves_target_alone() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        std::fs::write(&p, "old").unwrap();
        let e = write_atomic(&p, |w| {
            w.write_all(b"half of a new fi")?;
            Err(Error::Serde("injected".into()))
        });
        assert!(e.is_err());
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "old");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        let q = dir.path().join("b.csv");
        assert!(write_atomic(&q, |_| Err(Error::Serde("injected".into()))).is_err());
        assert!(!q.exists());
    }

    #[test]
    fn chi_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ax: Vec<f64> = (0..5).map(|k| -1.0 + 0.5 * k as f64).collect();
        let im = vec![-0.25, 0.0, 0.25];
        let values = (0..15).map(|k| C64::new(0.1 * k as f64, -0.3 * k as f64)).collect();
        let g = CharacteristicGrid { beta_re: ax, beta_im: im, values };
        let p = dir.path().join("chi.csv");
        write_chi_csv(&p, &g).unwrap();
        assert_eq!(read_chi(&p).unwrap(), g);
    }
}
