//! Record files and the aggregate summary.

use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, SweepPoint};
use crate::scheme::{OutcomeFlags, SchemeOutcome};
use crate::{Error, Result, Scheme};

pub const SCHEMA_VERSION: u32 = 1;

pub const RECORDS_HEADER: [&str; 9] =
    ["point_id", "trial", "scheme", "feasible", "sum_rate_bps_hz", "min_eh_slack", "iters", "wall_ms", "flags"];
const ALLOCATIONS_HEADER: [&str; 7] = ["point_id", "trial", "scheme", "seed", "tau", "rho", "harvested_w"];
const POINTS_HEADER: [&str; 4] = ["point_id", "n_total", "d_t", "eh_target"];

/// One scheme on one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub point_id: usize,
    pub trial: usize,
    pub seed: u64,
    pub scheme: Scheme,
    pub feasible: bool,
    /// `None` for infeasible runs; aggregates count those as zero.
    pub sum_rate: Option<f64>,
    pub min_eh_slack: Option<f64>,
    pub iters: usize,
    pub wall_ms: f64,
    pub flags: OutcomeFlags,
    pub tau: Vec<f64>,
    pub rho: Vec<f64>,
    pub harvested: Vec<f64>,
}

impl TrialRecord {
    pub fn from_outcome(point_id: usize, trial: usize, seed: u64, o: &SchemeOutcome, wall_ms: f64) -> Self {
        let (tau, rho) = o.solution.as_ref().map_or((Vec::new(), Vec::new()), |s| (s.tau.clone(), s.rho.clone()));
        Self {
            point_id,
            trial,
            seed,
            scheme: o.scheme,
            feasible: o.feasible(),
            sum_rate: o.sum_rate,
            min_eh_slack: o.min_eh_slack,
            iters: o.iterations,
            wall_ms,
            flags: o.flags,
            tau,
            rho,
            harvested: o.harvested.clone(),
        }
    }

    pub fn failure(point_id: usize, trial: usize, seed: u64, scheme: Scheme) -> Self {
        let mut o = SchemeOutcome::infeasible(scheme);
        o.flags.solver_failure = true;
        Self::from_outcome(point_id, trial, seed, &o, 0.0)
    }

    pub fn penalized_rate(&self) -> f64 {
        self.sum_rate.unwrap_or(0.0)
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(|x| x.parse::<f64>().map_err(|e| Error::Config(format!("bad number '{x}': {e}")))).collect()
}

fn parse_flags(s: &str) -> OutcomeFlags {
    let mut f = OutcomeFlags::default();
    for part in s.split('|') {
        match part {
            "iteration_cap" => f.iteration_cap = true,
            "solver_failure" => f.solver_failure = true,
            "rejected_step" => f.rejected_step = true,
            _ => {}
        }
    }
    f
}

/// Appends records to `records.csv` and `allocations.csv`, flushing after
/// every batch.
pub(super) struct RecordWriter {
    records: csv::Writer<File>,
    allocations: csv::Writer<File>,
}

impl RecordWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        let mut records = csv::Writer::from_path(dir.join("records.csv"))?;
        records.write_record(RECORDS_HEADER)?;
        let mut allocations = csv::Writer::from_path(dir.join("allocations.csv"))?;
        allocations.write_record(ALLOCATIONS_HEADER)?;
        Ok(Self { records, allocations })
    }

    pub fn write(&mut self, recs: &[TrialRecord]) -> Result<()> {
        for r in recs {
            self.records.write_record([
                r.point_id.to_string(),
                r.trial.to_string(),
                r.scheme.to_string(),
                r.feasible.to_string(),
                opt(r.sum_rate),
                opt(r.min_eh_slack),
                r.iters.to_string(),
                format!("{:.3}", r.wall_ms),
                r.flags.to_string(),
            ])?;
            self.allocations.write_record([
                r.point_id.to_string(),
                r.trial.to_string(),
                r.scheme.to_string(),
                r.seed.to_string(),
                join(&r.tau),
                join(&r.rho),
                join(&r.harvested),
            ])?;
        }
        self.records.flush()?;
        self.allocations.flush()?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.records.flush()?;
        self.allocations.flush()?;
        Ok(())
    }
}

pub(super) fn write_points(dir: &Path, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join("points.csv"))?;
    w.write_record(POINTS_HEADER)?;
    for p in points {
        w.write_record([p.point_id.to_string(), p.n_total.to_string(), p.d_t.to_string(), p.eh_target.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub(super) fn read_points(dir: &Path) -> Result<Vec<SweepPoint>> {
    let mut r = csv::Reader::from_path(dir.join("points.csv"))?;
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let bad = |what: &str| Error::Config(format!("points.csv: bad {what}"));
        out.push(SweepPoint {
            point_id: field(0).parse().map_err(|_| bad("point_id"))?,
            n_total: field(1).parse().map_err(|_| bad("n_total"))?,
            d_t: field(2).parse().map_err(|_| bad("d_t"))?,
            eh_target: field(3).parse().map_err(|_| bad("eh_target"))?,
        });
    }
    Ok(out)
}

/// Reads the points and records of a finished run directory.
pub fn read_records(dir: &Path) -> Result<(Vec<SweepPoint>, Vec<TrialRecord>)> {
    let points = read_points(dir)?;
    let mut rec = csv::Reader::from_path(dir.join("records.csv"))?;
    if rec.headers()?.iter().collect::<Vec<_>>() != RECORDS_HEADER {
        return Err(Error::Config("records.csv has an unexpected header".into()));
    }
    let mut alloc = csv::Reader::from_path(dir.join("allocations.csv"))?;
    let mut out = Vec::new();
    for (row, arow) in rec.records().zip(alloc.records()) {
        let (row, arow) = (row?, arow?);
        let f = |i: usize| row.get(i).unwrap_or("");
        let a = |i: usize| arow.get(i).unwrap_or("");
        let bad = |what: &str| Error::Config(format!("records.csv: bad {what}"));
        let num = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad("number"))
            }
        };
        out.push(TrialRecord {
            point_id: f(0).parse().map_err(|_| bad("point_id"))?,
            trial: f(1).parse().map_err(|_| bad("trial"))?,
            scheme: f(2).parse()?,
            feasible: f(3).parse().map_err(|_| bad("feasible"))?,
            sum_rate: num(f(4))?,
            min_eh_slack: num(f(5))?,
            iters: f(6).parse().map_err(|_| bad("iters"))?,
            wall_ms: f(7).parse().map_err(|_| bad("wall_ms"))?,
            flags: parse_flags(f(8)),
            seed: a(3).parse().map_err(|_| bad("seed"))?,
            tau: parse_list(a(4))?,
            rho: parse_list(a(5))?,
            harvested: parse_list(a(6))?,
        });
    }
    Ok((points, out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub trials: usize,
    pub feasible_fraction: f64,
    /// Mean over all trials with infeasible runs counted as zero.
    pub mean_sum_rate: f64,
    /// Means over feasible trials; empty / `None` if there were none.
    pub mean_tau: Vec<f64>,
    pub mean_rho: Option<f64>,
    pub mean_iters: f64,
    pub flagged_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub point: SweepPoint,
    pub schemes: Vec<SchemeSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub points: Vec<PointSummary>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut s, mut n) = (0.0, 0usize);
    for x in xs {
        s += x;
        n += 1;
    }
    (n > 0).then(|| s / n as f64)
}

impl Summary {
    /// Aggregates records per point and scheme; the order of `records` does
    /// not matter.
    pub fn aggregate(cfg: &ExperimentConfig, points: &[SweepPoint], records: &[TrialRecord]) -> Self {
        let mut sorted: Vec<&TrialRecord> = records.iter().collect();
        sorted.sort_by_key(|r| (r.point_id, r.scheme, r.trial));
        let points = points
            .iter()
            .map(|p| {
                let schemes = Scheme::ALL
                    .iter()
                    .filter_map(|&s| {
                        let rs: Vec<&TrialRecord> =
                            sorted.iter().copied().filter(|r| r.point_id == p.point_id && r.scheme == s).collect();
                        if rs.is_empty() {
                            return None;
                        }
                        let feas: Vec<&TrialRecord> = rs.iter().copied().filter(|r| r.feasible).collect();
                        let slots = feas.iter().map(|r| r.tau.len()).max().unwrap_or(0);
                        let mean_tau = (0..slots)
                            .map(|j| mean(feas.iter().map(|r| r.tau.get(j).copied().unwrap_or(0.0))).unwrap_or(0.0))
                            .collect();
                        Some(SchemeSummary {
                            scheme: s,
                            trials: rs.len(),
                            feasible_fraction: feas.len() as f64 / rs.len() as f64,
                            mean_sum_rate: mean(rs.iter().map(|r| r.penalized_rate())).unwrap_or(0.0),
                            mean_tau,
                            mean_rho: mean(feas.iter().flat_map(|r| r.rho.iter().copied())),
                            mean_iters: mean(rs.iter().map(|r| r.iters as f64)).unwrap_or(0.0),
                            flagged_trials: rs.iter().filter(|r| r.flags.any()).count(),
                        })
                    })
                    .collect();
                PointSummary { point: *p, schemes }
            })
            .collect();
        Summary { schema_version: SCHEMA_VERSION, config: cfg.clone(), points }
    }
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let text = serde_json::to_string_pretty(summary)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
