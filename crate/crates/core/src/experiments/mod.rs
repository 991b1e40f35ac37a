//! Seeded Monte Carlo sweeps over channel realizations.
//!
//! Every sweep point × trial draws one channel realization from a seed mixed
//! out of `(base seed, point, trial)` and runs all requested schemes on that
//! same realization. Trials run in parallel; records are written in
//! (point, trial) order by a single writer, so the output files do not depend
//! on the completion order.

mod figures;
mod output;
mod solve;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{Deployment, FadingParams, Geometry};
use crate::config::{AoSettings, ScenarioConfig};
use crate::{Error, Result, Scheme};

pub use figures::{emit_figure_data, render_png, write_figure, Figure, FigureRow};
pub use output::{read_records, write_summary, Summary, TrialRecord, RECORDS_HEADER, SCHEMA_VERSION};
pub use solve::solve_schemes;

/// Environment variable overriding the number of worker threads.
pub const WORKERS_ENV: &str = "IRS_SWIPT_WORKERS";

/// Sweep description. Every field has a default matching the reference
/// setup, so a config file only needs the fields it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub k: usize,
    pub m: usize,
    pub deployment: Deployment,
    /// Sweep axes; the points are their Cartesian product, N varying slowest.
    pub n_total: Vec<usize>,
    pub d_t: Vec<f64>,
    /// EH target per receiver, in watts.
    pub eh_target: Vec<f64>,
    pub d_r: f64,
    pub d_i: f64,
    pub power_dbm: f64,
    pub sigma_ant_sq: f64,
    pub sigma_proc_sq: f64,
    pub zeta: f64,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub fading: FadingParams,
    pub ao: AoSettings,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "sweep".into(),
            k: 2,
            m: 2,
            deployment: Deployment::Distributed,
            n_total: vec![10],
            d_t: vec![0.0],
            eh_target: vec![0.5e-6],
            d_r: 6.0,
            d_i: 1.0,
            power_dbm: 23.0,
            sigma_ant_sq: 0.5e-8,
            sigma_proc_sq: 0.5e-8,
            zeta: 0.7,
            trials: 20,
            seed: 1,
            schemes: Scheme::ALL.to_vec(),
            fading: FadingParams::default(),
            ao: AoSettings::default(),
            out_dir: PathBuf::from("results"),
        }
    }
}

/// One fully specified sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub point_id: usize,
    pub n_total: usize,
    pub d_t: f64,
    pub eh_target: f64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &n_total in &self.n_total {
            for &d_t in &self.d_t {
                for &eh_target in &self.eh_target {
                    out.push(SweepPoint { point_id: out.len(), n_total, d_t, eh_target });
                }
            }
        }
        out
    }

    pub fn scenario(&self, point: &SweepPoint) -> Result<ScenarioConfig> {
        let geometry = Geometry::new(self.k, point.d_t, self.d_r, self.d_i, self.deployment, point.n_total)?;
        Ok(ScenarioConfig {
            geometry,
            m: self.m,
            fading: self.fading.clone(),
            power_dbm: self.power_dbm,
            sigma_ant_sq: self.sigma_ant_sq,
            sigma_proc_sq: self.sigma_proc_sq,
            zeta: self.zeta,
            eh_target: point.eh_target,
            ao: self.ao.clone(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n_total.is_empty() || self.d_t.is_empty() || self.eh_target.is_empty() {
            return Err(Error::Config("every sweep axis needs at least one value".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes requested".into()));
        }
        for p in self.points() {
            self.scenario(&p)?.validate()?;
        }
        Ok(())
    }
}

/// splitmix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Trial seed: `splitmix64(splitmix64(splitmix64(base) ^ point) ^ trial)`.
pub fn trial_seed(base: u64, point: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ point as u64) ^ trial as u64)
}

/// Worker count from [`WORKERS_ENV`], else the number of CPUs.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs one trial of one point: samples the channels and solves every
/// requested scheme on them.
pub fn run_trial(cfg: &ExperimentConfig, point: &SweepPoint, trial: usize) -> Result<Vec<TrialRecord>> {
    let scenario = cfg.scenario(point)?;
    let seed = trial_seed(cfg.seed, point.point_id, trial);
    let channels = crate::channel::sample_channels(seed, &scenario.geometry, &scenario.fading, scenario.m)?;
    let noise = scenario.noise();
    let started = std::time::Instant::now();
    let outcomes = solve_schemes(&channels, &noise, &scenario.ao, &cfg.schemes, seed);
    let wall_ms = started.elapsed().as_secs_f64() * 1e3 / outcomes.len().max(1) as f64;
    Ok(outcomes.iter().map(|o| TrialRecord::from_outcome(point.point_id, trial, seed, o, wall_ms)).collect())
}

/// Result of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub points: Vec<SweepPoint>,
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

/// Runs the whole sweep, writing `records.csv`, `allocations.csv`,
/// `points.csv` and `summary.json` into `cfg.out_dir`. Records are flushed
/// as soon as every earlier trial is done; a trial that errors is logged
/// and recorded as a failure for every scheme.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    crate::limit_blas_threads();
    std::fs::create_dir_all(&cfg.out_dir)?;
    let points = cfg.points();
    output::write_points(&cfg.out_dir, &points)?;
    let units: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..cfg.trials).map(move |t| (p, t))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let (tx, rx) = std::sync::mpsc::channel::<(usize, Vec<TrialRecord>)>();
    let mut writer = output::RecordWriter::create(&cfg.out_dir)?;
    let records = std::thread::scope(|scope| -> Result<Vec<TrialRecord>> {
        let units = &units;
        let points = &points;
        scope.spawn(move || {
            pool.install(|| {
                use rayon::prelude::*;
                units.par_iter().enumerate().for_each_with(tx, |tx, (idx, &(p, t))| {
                    let recs = run_trial(cfg, &points[p], t).unwrap_or_else(|e| {
                        log::error!("point {p} trial {t}: {e}");
                        let seed = trial_seed(cfg.seed, p, t);
                        cfg.schemes.iter().map(|&s| TrialRecord::failure(p, t, seed, s)).collect()
                    });
                    // the receiver only disappears if the writer failed
                    let _ = tx.send((idx, recs));
                });
            });
        });
        let mut pending = std::collections::BTreeMap::new();
        let mut next = 0;
        let mut all = Vec::new();
        for (idx, recs) in rx {
            pending.insert(idx, recs);
            while let Some(recs) = pending.remove(&next) {
                writer.write(&recs)?;
                all.extend(recs);
                next += 1;
            }
        }
        Ok(all)
    })?;
    writer.finish()?;

    let summary = Summary::aggregate(cfg, &points, &records);
    write_summary(&cfg.out_dir.join("summary.json"), &summary)?;
    Ok(ExperimentResult { points, records, summary })
}

/// Feasibility verdicts of one point: fractions of trials for which the
/// hybrid-family and TDMA-family problems are feasible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityFractions {
    pub point: SweepPoint,
    pub hybrid: f64,
    pub tdma: f64,
}

/// Feasibility-only pass over every point and trial.
pub fn check_feasibility(cfg: &ExperimentConfig) -> Result<Vec<FeasibilityFractions>> {
    use rayon::prelude::*;
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    cfg.points()
        .iter()
        .map(|point| {
            let scenario = cfg.scenario(point)?;
            let noise = scenario.noise();
            let verdicts: Vec<(bool, bool)> = pool.install(|| {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| -> Result<(bool, bool)> {
                        let seed = trial_seed(cfg.seed, point.point_id, t);
                        let ch =
                            crate::channel::sample_channels(seed, &scenario.geometry, &scenario.fading, scenario.m)?;
                        let h = crate::feasibility::hybrid_feasibility(&ch, &noise, &scenario.ao, seed)?;
                        let d = crate::feasibility::tdma_feasibility(&ch, &noise, &scenario.ao, seed)?;
                        Ok((h.feasible, d.feasible))
                    })
                    .collect::<Result<_>>()
            })?;
            let n = verdicts.len() as f64;
            Ok(FeasibilityFractions {
                point: *point,
                hybrid: verdicts.iter().filter(|v| v.0).count() as f64 / n,
                tdma: verdicts.iter().filter(|v| v.1).count() as f64 / n,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        assert_eq!(trial_seed(1, 0, 0), trial_seed(1, 0, 0));
        let mut seen = std::collections::HashSet::new();
        for p in 0..20 {
            for t in 0..50 {
                assert!(seen.insert(trial_seed(7, p, t)));
            }
        }
        assert_ne!(trial_seed(1, 0, 1), trial_seed(1, 1, 0));
    }

    #[test]
    fn config_defaults_and_round_trip() {
        let cfg =
            ExperimentConfig::from_toml("n_total = [0, 10]\neh_target = [1e-7, 5e-7]\nschemes = [\"ps\", \"tdma_d\"]")
                .unwrap();
        assert_eq!(cfg.k, 2);
        assert_eq!(cfg.points().len(), 4);
        assert_eq!(cfg.points()[1], SweepPoint { point_id: 1, n_total: 0, d_t: 0.0, eh_target: 5e-7 });
        assert_eq!(cfg.schemes, vec![Scheme::Ps, Scheme::TdmaD]);
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(ExperimentConfig::from_toml("trials = 0").is_err());
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml("schemes = [\"nope\"]").is_err());
    }
}
