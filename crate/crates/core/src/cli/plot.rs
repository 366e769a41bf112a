//! Minimal PNG rendering: phase-space heatmaps and line plots. Axis ranges
//! and labels travel as tEXt chunks since no text is drawn.

use std::path::Path;

use super::output::write_atomic;
use crate::error::{Error, Result};
use crate::experiments::Curve;
use crate::tomography::{CharacteristicGrid, WignerGrid};

struct Image {
    w: usize,
    h: usize,
    rgb: Vec<u8>,
}

impl Image {
    fn new(w: usize, h: usize) -> Image {
        Image { w, h, rgb: vec![255; w * h * 3] }
    }

    fn set(&mut self, x: usize, y: usize, c: [u8; 3]) {
        if x < self.w && y < self.h {
            let k = 3 * (y * self.w + x);
            self.rgb[k..k + 3].copy_from_slice(&c);
        }
    }

    fn line(&mut self, (x0, y0): (f64, f64), (x1, y1): (f64, f64), c: [u8; 3]) {
        let n = (x1 - x0).abs().max((y1 - y0).abs()).ceil().max(1.0) as usize;
        for k in 0..=n {
            let t = k as f64 / n as f64;
            let (x, y) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
            if x >= 0.0 && y >= 0.0 {
                self.set(x.round() as usize, y.round() as usize, c);
            }
        }
    }

    fn save(&self, path: &Path, text: &[(&str, String)]) -> Result<()> {
        write_atomic(path, |out| {
            let mut enc = png::Encoder::new(out, self.w as u32, self.h as u32);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            for (k, v) in text {
                enc.add_text_chunk(k.to_string(), v.clone()).map_err(png_err)?;
            }
            let mut wr = enc.write_header().map_err(png_err)?;
            wr.write_image_data(&self.rgb).map_err(png_err)?;
            wr.finish().map_err(png_err)?;
            Ok(())
        })
    }
}

fn png_err(e: png::EncodingError) -> Error {
    match e {
        png::EncodingError::IoError(e) => Error::Io(e),
        e => Error::Serde(e.to_string()),
    }
}

/// Blue (negative) through white to red (positive), symmetric about zero.
fn diverging(v: f64, scale: f64) -> [u8; 3] {
    let t = if scale > 0.0 { (v / scale).clamp(-1.0, 1.0) } else { 0.0 };
    let fade = |t: f64| (255.0 * (1.0 - t.abs())).round() as u8;
    if t >= 0.0 {
        [255, fade(t), fade(t)]
    } else {
        [fade(t), fade(t), 255]
    }
}

/// Row 0 is the top of the image, so the slow axis is flipped to point up.
fn heatmap(nx: usize, ny: usize, val: impl Fn(usize, usize) -> f64) -> Image {
    let scale = (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).map(|(i, j)| val(i, j).abs()).fold(0.0, f64::max);
    let mut img = Image::new(nx, ny);
    for j in 0..ny {
        for i in 0..nx {
            img.set(i, ny - 1 - j, diverging(val(i, j), scale));
        }
    }
    img
}

fn range(a: &[f64]) -> (String, String) {
    (format!("{:?}", a[0]), format!("{:?}", a[a.len() - 1]))
}

pub fn wigner_png(path: &Path, w: &WignerGrid) -> Result<()> {
    let img = heatmap(w.x.len(), w.p.len(), |i, j| w.get(i, j));
    let (x0, x1) = range(&w.x);
    let (p0, p1) = range(&w.p);
    let (lo, hi) = w.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    img.save(
        path,
        &[
            ("quantity", "W(x,p)".into()),
            ("x_min", x0),
            ("x_max", x1),
            ("p_min", p0),
            ("p_max", p1),
            ("value_min", format!("{lo:?}")),
            ("value_max", format!("{hi:?}")),
        ],
    )
}

/// Real part of χ; its imaginary part is plotted alongside on the right.
pub fn chi_png(path: &Path, chi: &CharacteristicGrid) -> Result<()> {
    let (nx, ny) = (chi.beta_re.len(), chi.beta_im.len());
    let re = heatmap(nx, ny, |i, j| chi.get(i, j).re);
    let im = heatmap(nx, ny, |i, j| chi.get(i, j).im);
    let gap = 2;
    let mut img = Image::new(2 * nx + gap, ny);
    for y in 0..ny {
        for x in 0..nx {
            let k = 3 * (y * nx + x);
            img.set(x, y, [re.rgb[k], re.rgb[k + 1], re.rgb[k + 2]]);
            img.set(x + nx + gap, y, [im.rgb[k], im.rgb[k + 1], im.rgb[k + 2]]);
        }
    }
    let (x0, x1) = range(&chi.beta_re);
    let (p0, p1) = range(&chi.beta_im);
    img.save(
        path,
        &[
            ("quantity", "Re chi (left), Im chi (right)".into()),
            ("x_min", x0),
            ("x_max", x1),
            ("p_min", p0),
            ("p_max", p1),
        ],
    )
}

const PALETTE: [[u8; 3]; 6] =
    [[31, 119, 180], [214, 39, 40], [44, 160, 44], [148, 103, 189], [255, 127, 14], [0, 0, 0]];

pub fn curves_png(path: &Path, curves: &[Curve]) -> Result<()> {
    let (w, h, m) = (640usize, 400usize, 30.0);
    let finite = curves.iter().flat_map(|c| c.x.iter().zip(&c.y)).filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut xl, mut xh, mut yl, mut yh) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (&x, &y) in finite {
        (xl, xh, yl, yh) = (xl.min(x), xh.max(x), yl.min(y), yh.max(y));
    }
    if !xl.is_finite() {
        return Err(Error::Serde("no finite points to plot".into()));
    }
    if xh == xl {
        xh = xl + 1.0;
    }
    if yh == yl {
        yh = yl + 1.0;
    }
    let px = |x: f64| m + (x - xl) / (xh - xl) * (w as f64 - 2.0 * m);
    let py = |y: f64| h as f64 - m - (y - yl) / (yh - yl) * (h as f64 - 2.0 * m);
    let mut img = Image::new(w, h);
    let grey = [120, 120, 120];
    let (l, r, t, b) = (m, w as f64 - m, m, h as f64 - m);
    img.line((l, b), (r, b), grey);
    img.line((l, t), (l, b), grey);
    let mut legend = Vec::new();
    for (k, c) in curves.iter().enumerate() {
        let col = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> =
            c.x.iter()
                .zip(&c.y)
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(&x, &y)| (px(x), py(y)))
                .collect();
        for s in pts.windows(2) {
            img.line(s[0], s[1], col);
        }
        for &(x, y) in &pts {
            for d in [(-1.0, 0.0), (1.0, 0.0), (0.0, -1.0), (0.0, 1.0)] {
                img.line((x, y), (x + d.0 * 2.0, y + d.1 * 2.0), col);
            }
        }
        legend.push(format!("{}=#{:02x}{:02x}{:02x}", c.label, col[0], col[1], col[2]));
    }
    let xlabel = curves.first().map(|c| format!("{} [{}]", c.x_name, c.x_unit)).unwrap_or_default();
    img.save(
        path,
        &[
            ("x_label", xlabel),
            ("x_min", format!("{xl:?}")),
            ("x_max", format!("{xh:?}")),
            ("y_min", format!("{yl:?}")),
            ("y_max", format!("{yh:?}")),
            ("legend", legend.join("; ")),
        ],
    )
}
