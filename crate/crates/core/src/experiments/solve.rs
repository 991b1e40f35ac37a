//! Runs every requested scheme on one channel realization.

use std::collections::BTreeSet;

use crate::channel::ChannelSet;
use crate::config::AoSettings;
use crate::feasibility::{
    hybrid_feasibility, hybrid_initial_point, ps_initial_point, tdma_feasibility, tdma_initial_point, ts_initial_point,
    FeasibilityReport,
};
use crate::hybrid::ao_solve;
use crate::metrics::NoiseAndPower;
use crate::scheme::{OutcomeFlags, Scheme, SchemeOutcome, SchemeSolution};
use crate::tdma::ao_solve_tdma;
use crate::Result;

fn failed(scheme: Scheme, err: &crate::Error) -> SchemeOutcome {
    log::warn!("{scheme} failed: {err}");
    let mut out = SchemeOutcome::infeasible(scheme);
    out.flags = OutcomeFlags { solver_failure: true, ..OutcomeFlags::default() };
    out
}

fn unwrap_or_failed(scheme: Scheme, r: Result<SchemeOutcome>) -> SchemeOutcome {
    r.unwrap_or_else(|e| failed(scheme, &e))
}

fn relabel(sol: &SchemeSolution, scheme: Scheme) -> SchemeSolution {
    let mut s = sol.clone();
    s.scheme = scheme;
    s
}

/// Keeps the run with the larger sum rate; the first wins ties.
fn better(a: SchemeOutcome, b: SchemeOutcome) -> SchemeOutcome {
    match (a.sum_rate, b.sum_rate) {
        (Some(x), Some(y)) if y > x => b,
        (None, Some(_)) => b,
        _ => a,
    }
}

fn infeasible_with(scheme: Scheme, report: &FeasibilityReport) -> SchemeOutcome {
    let mut out = SchemeOutcome::infeasible(scheme);
    out.flags.solver_failure = report.solver_failure;
    out
}

/// Solves the requested schemes on one realization, in [`Scheme::ALL`] order.
///
/// The hybrid scheme is started from the constructed initial point and from
/// the converged PS and TS solutions, and TDMA-D from the TDMA witness and
/// the converged TDMA solution; the best run is kept. Because every run is
/// monotone, this guarantees hybrid ≥ max(PS, TS) and TDMA-D ≥ TDMA on every
/// realization. Errors of individual runs are recorded as solver failures.
pub fn solve_schemes(
    channels: &ChannelSet,
    noise: &NoiseAndPower,
    settings: &AoSettings,
    schemes: &[Scheme],
    seed: u64,
) -> Vec<SchemeOutcome> {
    let wanted: BTreeSet<Scheme> = schemes.iter().copied().collect();
    let mut out = Vec::new();

    let hybrid_family = [Scheme::Hybrid, Scheme::Ps, Scheme::Ts];
    if hybrid_family.iter().any(|s| wanted.contains(s)) {
        match hybrid_feasibility(channels, noise, settings, seed) {
            Ok(report) if report.feasible => {
                let need_baselines = wanted.contains(&Scheme::Hybrid);
                let run = |variant: Scheme, init: Result<SchemeSolution>| {
                    unwrap_or_failed(variant, init.and_then(|i| ao_solve(channels, noise, settings, variant, &i)))
                };
                let ps = (need_baselines || wanted.contains(&Scheme::Ps))
                    .then(|| run(Scheme::Ps, ps_initial_point(&report, channels, noise)));
                let ts = (need_baselines || wanted.contains(&Scheme::Ts))
                    .then(|| run(Scheme::Ts, ts_initial_point(&report, channels, noise, seed)));
                if need_baselines {
                    let mut best = run(Scheme::Hybrid, hybrid_initial_point(&report, channels, noise, seed));
                    for base in [&ps, &ts].into_iter().flatten() {
                        if let Some(sol) = &base.solution {
                            best = better(best, run(Scheme::Hybrid, Ok(relabel(sol, Scheme::Hybrid))));
                        }
                    }
                    out.push(best);
                }
                out.extend(ps.filter(|_| wanted.contains(&Scheme::Ps)));
                out.extend(ts.filter(|_| wanted.contains(&Scheme::Ts)));
            }
            Ok(report) => {
                out.extend(hybrid_family.iter().filter(|s| wanted.contains(s)).map(|&s| infeasible_with(s, &report)))
            }
            Err(e) => out.extend(hybrid_family.iter().filter(|s| wanted.contains(s)).map(|&s| failed(s, &e))),
        }
    }

    let tdma_family = [Scheme::Tdma, Scheme::TdmaD];
    if tdma_family.iter().any(|s| wanted.contains(s)) {
        match tdma_feasibility(channels, noise, settings, seed) {
            Ok(report) if report.feasible => {
                let run = |variant: Scheme, init: Result<SchemeSolution>| {
                    unwrap_or_failed(variant, init.and_then(|i| ao_solve_tdma(channels, noise, settings, variant, &i)))
                };
                let tdma = run(Scheme::Tdma, tdma_initial_point(&report, Scheme::Tdma));
                if wanted.contains(&Scheme::TdmaD) {
                    let mut best = run(Scheme::TdmaD, tdma_initial_point(&report, Scheme::TdmaD));
                    if let Some(sol) = &tdma.solution {
                        best = better(best, run(Scheme::TdmaD, Ok(relabel(sol, Scheme::TdmaD))));
                    }
                    if wanted.contains(&Scheme::Tdma) {
                        out.push(tdma);
                    }
                    out.push(best);
                } else {
                    out.push(tdma);
                }
            }
            Ok(report) => {
                out.extend(tdma_family.iter().filter(|s| wanted.contains(s)).map(|&s| infeasible_with(s, &report)))
            }
            Err(e) => out.extend(tdma_family.iter().filter(|s| wanted.contains(s)).map(|&s| failed(s, &e))),
        }
    }
    out
}
