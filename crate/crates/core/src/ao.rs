//! Alternating-optimization driver shared by the hybrid and TDMA solvers.

use crate::channel::ChannelSet;
use crate::config::AoSettings;
use crate::linalg::{hermitize, project_psd, trace_re};
use crate::metrics::{self, NoiseAndPower};
use crate::scheme::{OutcomeFlags, SchemeOutcome, SchemeSolution};
use crate::solver::{ConicProgram, SolveStatus};
use crate::{CMat, CVec, Error, Result, C64};

/// Channels and noise rescaled so that the mean receiver noise power is one.
/// SINRs, rates, covariances and phases are unchanged; energies scale with
/// the noise.
pub(crate) struct Normalized {
    pub channels: ChannelSet,
    pub noise: NoiseAndPower,
}

pub(crate) fn normalize(channels: &ChannelSet, noise: &NoiseAndPower) -> Normalized {
    let k = noise.k().max(1);
    let ref_sq = (0..noise.k()).map(|u| noise.sigma_sq(u)).sum::<f64>() / k as f64;
    let amp = C64::new(1.0 / ref_sq.sqrt(), 0.0);
    let mut ch = channels.clone();
    ch.h.iter_mut().flatten().for_each(|v| *v *= amp);
    ch.g.iter_mut().flatten().for_each(|m| *m *= amp);
    ch.phi.iter_mut().flatten().flatten().for_each(|m| *m *= amp);
    ch.stacked.iter_mut().flatten().for_each(|m| *m *= amp);
    let mut nz = noise.clone();
    nz.sigma_ant_sq.iter_mut().for_each(|x| *x /= ref_sq);
    nz.sigma_proc_sq.iter_mut().for_each(|x| *x /= ref_sq);
    nz.e.iter_mut().for_each(|x| *x /= ref_sq);
    Normalized { channels: ch, noise: nz }
}

/// Hermitian, PSD and within the power budget.
pub(crate) fn polish_covariance(s: &CMat, power: f64) -> CMat {
    let mut out = project_psd(&hermitize(s));
    let tr = trace_re(&out);
    if tr > power {
        out *= C64::new(power / tr, 0.0);
    }
    out
}

/// Unit-modulus box and a trailing one.
pub(crate) fn polish_phase(v: &CVec) -> CVec {
    let n = v.len();
    CVec::from_fn(n, |i, _| {
        if i + 1 == n {
            C64::new(1.0, 0.0)
        } else if v[i].norm() > 1.0 {
            v[i] / v[i].norm()
        } else {
            v[i]
        }
    })
}

/// Non-negative time fractions summing to at most one.
pub(crate) fn polish_tau(tau: &mut [f64]) {
    for t in tau.iter_mut() {
        *t = t.max(0.0);
    }
    let total: f64 = tau.iter().sum();
    if total > 1.0 {
        tau.iter_mut().for_each(|t| *t /= total);
    }
}

/// True sum rate if the point satisfies every constraint, `None` otherwise.
pub(crate) fn feasible_rate(channels: &ChannelSet, noise: &NoiseAndPower, sol: &SchemeSolution) -> Result<Option<f64>> {
    let res = metrics::constraint_residuals(channels, sol, noise)?;
    if !res.feasible() {
        return Ok(None);
    }
    let rate = metrics::sum_rate(channels, sol, noise)?;
    Ok(if rate.is_finite() { Some(rate) } else { None })
}

pub(crate) enum Step {
    Candidate(SchemeSolution),
    /// Nothing to optimize in this block.
    Skip,
    /// The subproblem did not produce an optimal point.
    Failed,
}

/// Tolerance of the retry after an inexact solve.
const RETRY_TOL: f64 = 1e-6;

/// Solves one block subproblem. Interior-point runs can stall when the
/// optimum sits where a perspective term's time fraction reaches zero; then
/// the solve is retried at a looser tolerance, and if that stalls too the
/// last iterate is still offered as a candidate, since the driver validates
/// every candidate with the exact evaluators anyway.
pub(crate) fn solve_block(
    program: &ConicProgram,
    tol: f64,
    extract: impl FnOnce(&[f64]) -> SchemeSolution,
) -> Result<Step> {
    let mut r = program.solve(tol)?;
    if r.status == SolveStatus::NumericalFailure && tol < RETRY_TOL {
        r = program.solve(RETRY_TOL)?;
    }
    match r.status {
        SolveStatus::Optimal => Ok(Step::Candidate(extract(&r.x))),
        SolveStatus::NumericalFailure if !r.x.is_empty() && r.x.iter().all(|v| v.is_finite()) => {
            Ok(Step::Candidate(extract(&r.x)))
        }
        status => {
            log::debug!("block subproblem returned {status:?}");
            Ok(Step::Failed)
        }
    }
}

pub(crate) struct AoRun {
    pub solution: SchemeSolution,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub flags: OutcomeFlags,
}

/// Runs the two-block loop from a feasible start. A block output replaces the
/// incumbent only if it is feasible and does not lower the true sum rate, so
/// the trace is non-decreasing by construction.
pub(crate) fn run<E, B1, B2>(
    start: SchemeSolution,
    settings: &AoSettings,
    evaluate: E,
    mut block1: B1,
    mut block2: B2,
) -> Result<AoRun>
where
    E: Fn(&SchemeSolution) -> Result<Option<f64>>,
    B1: FnMut(&SchemeSolution) -> Result<Step>,
    B2: FnMut(&SchemeSolution) -> Result<Step>,
{
    let mut rate =
        evaluate(&start)?.ok_or_else(|| Error::InfeasibleStart("initial point violates constraints".into()))?;
    let mut current = start;
    let mut trace = vec![rate];
    let mut flags = OutcomeFlags::default();
    let mut iterations = 0;
    let mut converged = false;

    'outer: while iterations < settings.max_outer_iters {
        iterations += 1;
        let previous = rate;
        for block in 0..2 {
            let step = if block == 0 { block1(&current)? } else { block2(&current)? };
            match step {
                Step::Skip => {}
                Step::Failed => {
                    flags.solver_failure = true;
                    trace.push(rate);
                    break 'outer;
                }
                Step::Candidate(candidate) => match evaluate(&candidate)? {
                    Some(r) if r >= rate => {
                        current = candidate;
                        rate = r;
                    }
                    // solver-tolerance noise around a converged point
                    Some(r) if r >= rate - 1e-9 * rate.abs().max(1.0) => {}
                    _ => flags.rejected_step = true,
                },
            }
        }
        trace.push(rate);
        if rate - previous <= settings.epsilon * previous.abs().max(1e-12) {
            converged = true;
            break;
        }
    }
    if !converged && !flags.solver_failure {
        flags.iteration_cap = true;
    }
    Ok(AoRun { solution: current, trace, iterations, flags })
}

/// Packages a run into an outcome evaluated on the original (unnormalized)
/// channels.
pub(crate) fn finish(channels: &ChannelSet, noise: &NoiseAndPower, run: AoRun) -> Result<SchemeOutcome> {
    let sol = run.solution;
    let sum_rate = metrics::sum_rate(channels, &sol, noise)?;
    let harvested = metrics::harvested_energy(channels, &sol, noise.zeta)?;
    let residuals = metrics::constraint_residuals(channels, &sol, noise)?;
    Ok(SchemeOutcome {
        scheme: sol.scheme,
        solution: Some(sol),
        sum_rate: Some(sum_rate),
        harvested,
        min_eh_slack: Some(residuals.eh),
        trace: run.trace,
        iterations: run.iterations,
        flags: run.flags,
    })
}
