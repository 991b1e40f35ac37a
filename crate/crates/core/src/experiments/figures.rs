//! Figure tables and quick-look plots.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use super::{SweepPoint, TrialRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    /// Mean sum rate versus the number of IRS elements.
    RateVsN,
    /// Mean sum rate versus the Tx–IRS horizontal offset.
    RateVsDt,
    /// Mean sum rate versus the EH target.
    RateVsE,
    /// Mean time fractions of the hybrid-family schemes versus the EH target.
    TimeFractions,
    /// Mean PS ratio versus the EH target.
    PsRatios,
}

impl Figure {
    pub const ALL: [Figure; 5] =
        [Figure::RateVsN, Figure::RateVsDt, Figure::RateVsE, Figure::TimeFractions, Figure::PsRatios];

    pub fn name(self) -> &'static str {
        match self {
            Figure::RateVsN => "rate_vs_n",
            Figure::RateVsDt => "rate_vs_dt",
            Figure::RateVsE => "rate_vs_e",
            Figure::TimeFractions => "time_fractions",
            Figure::PsRatios => "ps_ratios",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Figure::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| Error::Config(format!("unknown figure '{s}'")))
    }
}

/// One point of one curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureRow {
    pub curve: String,
    pub x: f64,
    pub mean: f64,
    pub trials: usize,
}

/// Aggregates records into curves. Axes not shown by the figure are averaged
/// over. Rates use the zero penalty for infeasible runs; allocations average
/// over feasible runs only.
pub fn emit_figure_data(points: &[SweepPoint], records: &[TrialRecord], figure: Figure) -> Vec<FigureRow> {
    let by_id: BTreeMap<usize, &SweepPoint> = points.iter().map(|p| (p.point_id, p)).collect();
    // (scheme, curve label, x bits) → (sum, count)
    let mut acc: BTreeMap<(crate::Scheme, String, u64), (f64, usize)> = BTreeMap::new();
    let mut add = |scheme, label: String, x: f64, y: f64| {
        let e = acc.entry((scheme, label, x.to_bits())).or_insert((0.0, 0));
        e.0 += y;
        e.1 += 1;
    };
    for r in records {
        let Some(p) = by_id.get(&r.point_id) else { continue };
        match figure {
            Figure::RateVsN => add(r.scheme, r.scheme.to_string(), p.n_total as f64, r.penalized_rate()),
            Figure::RateVsDt => add(r.scheme, r.scheme.to_string(), p.d_t, r.penalized_rate()),
            Figure::RateVsE => add(r.scheme, r.scheme.to_string(), p.eh_target, r.penalized_rate()),
            Figure::TimeFractions => {
                if r.feasible && r.scheme.is_hybrid_family() {
                    for (j, &t) in r.tau.iter().enumerate() {
                        add(r.scheme, format!("{}:tau{}", r.scheme, j + 1), p.eh_target, t);
                    }
                }
            }
            Figure::PsRatios => {
                if r.feasible
                    && r.scheme.is_hybrid_family()
                    && !r.rho.is_empty()
                    && r.tau.get(1).is_some_and(|&t| t > 0.0)
                {
                    let m = r.rho.iter().sum::<f64>() / r.rho.len() as f64;
                    add(r.scheme, format!("{}:rho", r.scheme), p.eh_target, m);
                }
            }
        }
    }
    let mut rows: Vec<((crate::Scheme, String), FigureRow)> = acc
        .into_iter()
        .map(|((s, label, bits), (sum, n))| {
            ((s, label.clone()), FigureRow { curve: label, x: f64::from_bits(bits), mean: sum / n as f64, trials: n })
        })
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.x.total_cmp(&b.1.x)));
    rows.into_iter().map(|(_, r)| r).collect()
}

/// Writes `fig_<name>.csv` with columns `curve, x, mean, trials`.
pub fn write_figure(dir: &Path, figure: Figure, rows: &[FigureRow]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("fig_{}.csv", figure.name()));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["curve", "x", "mean", "trials"])?;
    for r in rows {
        w.write_record([r.curve.clone(), r.x.to_string(), r.mean.to_string(), r.trials.to_string()])?;
    }
    w.flush()?;
    Ok(path)
}

const PALETTE: [[u8; 3]; 8] = [
    [31, 119, 180],
    [214, 39, 40],
    [44, 160, 44],
    [255, 127, 14],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [23, 190, 207],
];

fn draw_line(img: &mut RgbImage, (x0, y0): (i64, i64), (x1, y1): (i64, i64), color: Rgb<u8>) {
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    loop {
        if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, color);
        }
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Renders the curves as a bare line plot (axes, one color per curve in
/// table order, no text). The table is the canonical artifact.
pub fn render_png(path: &Path, rows: &[FigureRow]) -> Result<()> {
    let (w, h, margin) = (640u32, 480u32, 40i64);
    let mut img = RgbImage::from_pixel(w, h, Rgb([255, 255, 255]));
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for r in rows {
        xmin = xmin.min(r.x);
        xmax = xmax.max(r.x);
        ymin = ymin.min(r.mean);
        ymax = ymax.max(r.mean);
    }
    if !(xmax > xmin) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if !(ymax > ymin) {
        ymax = ymin + 1.0;
    }
    let px = |x: f64| margin + ((x - xmin) / (xmax - xmin) * (w as i64 - 2 * margin) as f64).round() as i64;
    let py = |y: f64| h as i64 - margin - ((y - ymin) / (ymax - ymin) * (h as i64 - 2 * margin) as f64).round() as i64;
    let axis = Rgb([0, 0, 0]);
    draw_line(&mut img, (margin, h as i64 - margin), (w as i64 - margin, h as i64 - margin), axis);
    draw_line(&mut img, (margin, margin), (margin, h as i64 - margin), axis);

    let mut curves: Vec<&str> = Vec::new();
    for r in rows {
        if !curves.contains(&r.curve.as_str()) {
            curves.push(&r.curve);
        }
    }
    for (c, name) in curves.iter().enumerate() {
        let color = Rgb(PALETTE[c % PALETTE.len()]);
        let pts: Vec<(i64, i64)> = rows.iter().filter(|r| r.curve == *name).map(|r| (px(r.x), py(r.mean))).collect();
        for pair in pts.windows(2) {
            draw_line(&mut img, pair[0], pair[1], color);
        }
        for &(x, y) in &pts {
            for d in -2..=2 {
                draw_line(&mut img, (x - 2, y + d), (x + 2, y + d), color);
            }
        }
    }
    img.save(path).map_err(|e| Error::Image(e.to_string()))
}
