//! Feasibility checks and feasible starting points for every AO solver.
//!
//! The hybrid check maximizes `δ = 1/τ₁`, the largest EH-slot scaling for
//! which every receiver meets its target from the EH slot alone. The TDMA
//! check minimizes the total time needed to meet the targets. Both alternate
//! a covariance SDP with a phase QCQP and are heuristic in the same sense as
//! the AO solvers: a verdict of infeasible means the iteration converged
//! without reaching the threshold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ao::{self, polish_covariance, polish_phase};
use crate::channel::ChannelSet;
use crate::config::AoSettings;
use crate::linalg::mrt_covariance;
use crate::metrics::{self, effective_channel, NoiseAndPower};
use crate::sca::{lifted_gram, PhaseVar};
use crate::scheme::{Scheme, SchemeSolution};
use crate::solver::{AffExpr, ConicProgram, SolveStatus};
use crate::{CMat, CVec, Error, Result, C64};

#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// Achieved δ̃ for the hybrid check, total time Σ τ for TDMA.
    pub delta_or_time: f64,
    /// Feasible point of the target problem, present when `feasible`.
    pub witness: Option<SchemeSolution>,
    /// Objective after every iteration.
    pub trace: Vec<f64>,
    /// A subproblem failed; the verdict is the conservative one.
    pub solver_failure: bool,
}

/// Unit-modulus phases uniform on [0, 2π), last entry 1.
pub fn random_phases(rng: &mut impl Rng, n: usize) -> CVec {
    CVec::from_fn(n + 1, |i, _| {
        if i == n {
            C64::new(1.0, 0.0)
        } else {
            C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
        }
    })
}

fn zeros(m: usize) -> CMat {
    CMat::zeros(m, m)
}

/// min_k Σ_i ζ tr(A_ik S_i) / E_k over receivers with a target.
fn energy_ratio(channels: &ChannelSet, noise: &NoiseAndPower, s: &[CMat], v: &CVec) -> Result<f64> {
    let mut ratio = f64::INFINITY;
    for k in (0..channels.k).filter(|&k| noise.e[k] > 0.0) {
        let mut q = 0.0;
        for (i, si) in s.iter().enumerate() {
            q += metrics::link_power(channels, i, k, si, v)?;
        }
        ratio = ratio.min(noise.zeta * q / noise.e[k]);
    }
    Ok(ratio)
}

/// max δ over EH-slot covariances with phases fixed.
fn hybrid_covariance_step(
    channels: &ChannelSet,
    noise: &NoiseAndPower,
    v: &CVec,
    tol: f64,
) -> Result<Option<Vec<CMat>>> {
    let k = channels.k;
    let mut p = ConicProgram::new();
    let delta = p.scalar();
    let s: Vec<_> = (0..k).map(|_| p.hermitian_psd(channels.m)).collect();
    for (i, si) in s.iter().enumerate() {
        p.add_le(si.trace(), AffExpr::constant(noise.p[i]));
    }
    for u in (0..k).filter(|&u| noise.e[u] > 0.0) {
        let mut lhs = AffExpr::zero();
        for (i, si) in s.iter().enumerate() {
            let a = effective_channel(&channels.stacked[i][u], v)?;
            lhs += si.re_trace_with(&(&a * a.adjoint())) * noise.zeta;
        }
        p.add_ge(lhs, delta.expr() * noise.e[u]);
    }
    p.maximize(delta.expr());
    let r = p.solve(tol)?;
    if r.status != SolveStatus::Optimal {
        return Ok(None);
    }
    Ok(Some(s.iter().enumerate().map(|(i, si)| polish_covariance(&si.value(&r.x), noise.p[i])).collect()))
}

/// Phase step with the residual variable: max δ' subject to
/// ζ Σ_i G^lb(v) ≥ (δ + δ') E_k, δ held at its current value.
fn hybrid_phase_step(
    channels: &ChannelSet,
    noise: &NoiseAndPower,
    s: &[CMat],
    v_t: &CVec,
    delta: f64,
    tol: f64,
) -> Result<Option<CVec>> {
    let k = channels.k;
    let n = channels.n_total();
    let mut p = ConicProgram::new();
    let pv = PhaseVar { v: p.complex_vector(n) };
    for idx in 0..n {
        p.add_soc(AffExpr::constant(1.0), vec![pv.v.re(idx), pv.v.im(idx)]);
    }
    let residual = p.scalar();
    for u in (0..k).filter(|&u| noise.e[u] > 0.0) {
        let mut lhs = AffExpr::zero();
        for (i, si) in s.iter().enumerate() {
            lhs += pv.g_lb_expr(&lifted_gram(&channels.stacked[i][u], si), v_t) * noise.zeta;
        }
        p.add_ge(lhs, residual.expr() * noise.e[u] + delta * noise.e[u]);
    }
    p.maximize(residual.expr());
    let r = p.solve(tol)?;
    if r.status != SolveStatus::Optimal {
        return Ok(None);
    }
    Ok(Some(polish_phase(&pv.value(&r.x))))
}

fn hybrid_witness(channels: &ChannelSet, s: Vec<CMat>, v: CVec, tau1: f64) -> SchemeSolution {
    let m = channels.m;
    let k = channels.k;
    SchemeSolution {
        scheme: Scheme::Hybrid,
        covariances: s.into_iter().map(|si| vec![si, zeros(m), zeros(m)]).collect(),
        phases: vec![v.clone(), v.clone(), v],
        tau: vec![tau1, 0.0, 0.0],
        rho: vec![1.0; k],
    }
}

/// Checks whether the hybrid-family problems are feasible by maximizing the
/// energy-slot scaling δ. `seed` draws the initial phases.
pub fn hybrid_feasibility(
    channels: &ChannelSet,
    noise: &NoiseAndPower,
    settings: &AoSettings,
    seed: u64,
) -> Result<FeasibilityReport> {
    noise.validate(channels.k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v0 = random_phases(&mut rng, channels.n_total());
    if !noise.eh_required() {
        let s = (0..channels.k).map(|_| zeros(channels.m)).collect();
        return Ok(FeasibilityReport {
            feasible: true,
            delta_or_time: f64::INFINITY,
            witness: Some(hybrid_witness(channels, s, v0, 0.0)),
            trace: Vec::new(),
            solver_failure: false,
        });
    }

    let nrm = ao::normalize(channels, noise);
    let (ch, nz) = (&nrm.channels, &nrm.noise);
    let tol = settings.solver_tol;
    let mut v = v0;
    let mut best: Option<(f64, Vec<CMat>, CVec)> = None;
    let mut trace = Vec::new();
    let mut solver_failure = false;

    for _ in 0..settings.feasibility_max_iters {
        let previous = best.as_ref().map_or(0.0, |b| b.0);
        let Some(s) = hybrid_covariance_step(ch, nz, &v, tol)? else {
            solver_failure = true;
            break;
        };
        let mut delta = energy_ratio(ch, nz, &s, &v)?;
        if ch.n_total() > 0 {
            match hybrid_phase_step(ch, nz, &s, &v, delta, tol)? {
                Some(v_new) => {
                    let d = energy_ratio(ch, nz, &s, &v_new)?;
                    if d >= delta {
                        v = v_new;
                        delta = d;
                    }
                }
                None => solver_failure = true,
            }
        }
        if best.as_ref().is_none_or(|b| delta > b.0) {
            best = Some((delta, s, v.clone()));
        }
        let current = best.as_ref().map_or(0.0, |b| b.0);
        trace.push(current);
        if solver_failure
            || ch.n_total() == 0
            || current - previous <= settings.feasibility_epsilon * previous.abs().max(1e-12)
        {
            break;
        }
    }

    let Some((delta, s, v)) = best else {
        return Ok(FeasibilityReport { feasible: false, delta_or_time: 0.0, witness: None, trace, solver_failure });
    };
    let feasible = delta.is_finite() && delta >= 1.0;
    let witness = feasible.then(|| hybrid_witness(channels, s, v, 1.0 / delta));
    Ok(FeasibilityReport { feasible, delta_or_time: delta, witness, trace, solver_failure })
}

fn feasible_witness(report: &FeasibilityReport) -> Result<&SchemeSolution> {
    match (&report.witness, report.feasible) {
        (Some(w), true) => Ok(w),
        _ => Err(Error::Infeasible),
    }
}

/// Initial point of the hybrid AO: τ₁ = 1/δ̃, the remaining time split
/// evenly between the PS and ID slots, MRT covariances at full power in
/// those slots, ρ = 1, and seeded random phases for slots 2 and 3.
pub fn hybrid_initial_point(
    report: &FeasibilityReport,
    channels: &ChannelSet,
    noise: &NoiseAndPower,
    seed: u64,
) -> Result<SchemeSolution> {
    let w = feasible_witness(report)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_1417);
    let n = channels.n_total();
    let v2 = random_phases(&mut rng, n);
    let v3 = random_phases(&mut rng, n);
    let tau1 = w.tau[0];
    let rest = (1.0 - tau1).max(0.0) / 2.0;
    let mut sol = w.clone();
    sol.scheme = Scheme::Hybrid;
    sol.tau = vec![tau1, rest, rest];
    sol.phases = vec![w.phases[0].clone(), v2, v3];
    for i in 0..channels.k {
        for j in 1..3 {
            let a = effective_channel(&channels.stacked[i][i], &sol.phases[j])?;
            sol.covariances[i][j] = mrt_covariance(&a, noise.p[i]);
        }
    }
    sol.rho = vec![1.0; channels.k];
    Ok(sol)
}

/// Initial point of the PS-only baseline: the whole frame in the PS slot with
/// the energy-maximizing covariances and phases, and each ρ_k as large as its
/// EH target allows.
pub fn ps_initial_point(
    report: &FeasibilityReport,
    channels: &ChannelSet,
    noise: &NoiseAndPower,
) -> Result<SchemeSolution> {
    let w = feasible_witness(report)?;
    let m = channels.m;
    let mut sol = w.clone();
    sol.scheme = Scheme::Ps;
    sol.tau = vec![0.0, 1.0, 0.0];
    for row in sol.covariances.iter_mut() {
        let s = std::mem::replace(&mut row[0], zeros(m));
        row[1] = s;
        row[2] = zeros(m);
    }
    let s2 = sol.slot_covariances(1);
    sol.rho = (0..channels.k)
        .map(|u| {
            if noise.e[u] <= 0.0 {
                return Ok(1.0);
            }
            let mut p = 0.0;
            for (i, si) in s2.iter().enumerate() {
                p += metrics::link_power(channels, i, u, si, &sol.phases[1])?;
            }
            Ok((1.0 - noise.e[u] / (noise.zeta * p)).clamp(0.0, 1.0))
        })
        .collect::<Result<_>>()?;
    Ok(sol)
}

/// Initial point of the TS-only baseline: the EH slot of the hybrid witness
/// followed by an ID slot with MRT covariances and seeded random phases.
pub fn ts_initial_point(
    report: &FeasibilityReport,
    channels: &ChannelSet,
    noise: &NoiseAndPower,
    seed: u64,
) -> Result<SchemeSolution> {
    let w = feasible_witness(report)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x75_1417);
    let v3 = random_phases(&mut rng, channels.n_total());
    let mut sol = w.clone();
    sol.scheme = Scheme::Ts;
    sol.tau = vec![w.tau[0], 0.0, (1.0 - w.tau[0]).max(0.0)];
    sol.phases[2] = v3;
    for i in 0..channels.k {
        let a = effective_channel(&channels.stacked[i][i], &sol.phases[2])?;
        sol.covariances[i][1] = zeros(channels.m);
        sol.covariances[i][2] = mrt_covariance(&a, noise.p[i]);
    }
    Ok(sol)
}

/// Received EH energy of Rx k with slot covariances `s[i][j]` (not lifted)
/// and time fractions `tau`.
fn tdma_energy(channels: &ChannelSet, noise: &NoiseAndPower, s: &[Vec<CMat>], v: &[CVec], tau: &[f64]) -> Result<f64> {
    let q = metrics::harvested_energy_tdma(channels, s, v, tau, noise.zeta)?;
    Ok((0..channels.k).filter(|&u| noise.e[u] > 0.0).map(|u| q[u] / noise.e[u]).fold(f64::INFINITY, f64::min))
}

/// min Σ τ over lifted covariances with phases fixed. Returns `(S, τ)`.
fn tdma_time_step(
    channels: &ChannelSet,
    noise: &NoiseAndPower,
    v: &[CVec],
    tol: f64,
) -> Result<Option<(Vec<Vec<CMat>>, Vec<f64>)>> {
    let k = channels.k;
    let m = channels.m;
    let mut p = ConicProgram::new();
    let tau: Vec<_> = (0..k).map(|_| p.nonneg_scalar()).collect();
    let w: Vec<Vec<_>> = (0..k).map(|_| (0..k).map(|_| p.hermitian_psd(m)).collect()).collect();
    for (i, row) in w.iter().enumerate() {
        for (j, wij) in row.iter().enumerate() {
            p.add_le(wij.trace(), tau[j].expr() * noise.p[i]);
        }
    }
    for u in (0..k).filter(|&u| noise.e[u] > 0.0) {
        let mut lhs = AffExpr::zero();
        for j in (0..k).filter(|&j| j != u) {
            for (i, row) in w.iter().enumerate() {
                let c = effective_channel(&channels.stacked[i][u], &v[j])?;
                lhs += row[j].re_trace_with(&(&c * c.adjoint())) * noise.zeta;
            }
        }
        p.add_ge(lhs, AffExpr::constant(noise.e[u]));
    }
    p.maximize(-AffExpr::sum(tau.iter().map(|t| t.expr())));
    let r = p.solve(tol)?;
    if r.status != SolveStatus::Optimal {
        return Ok(None);
    }
    let tau_v: Vec<f64> = tau.iter().map(|t| t.value(&r.x).max(0.0)).collect();
    let s = w
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, wij)| {
                    if tau_v[j] > 0.0 {
                        polish_covariance(&(wij.value(&r.x) / C64::new(tau_v[j], 0.0)), noise.p[i])
                    } else {
                        zeros(m)
                    }
                })
                .collect()
        })
        .collect();
    Ok(Some((s, tau_v)))
}

/// Phase step: max η subject to Σ_{j≠k} ζ τ_j Σ_i G^lb(v_j) ≥ (1 + η) E_k.
fn tdma_phase_step(
    channels: &ChannelSet,
    noise: &NoiseAndPower,
    s: &[Vec<CMat>],
    v_t: &[CVec],
    tau: &[f64],
    tol: f64,
) -> Result<Option<Vec<CVec>>> {
    let k = channels.k;
    let n = channels.n_total();
    let mut p = ConicProgram::new();
    let vars: Vec<Option<PhaseVar>> = (0..k)
        .map(|j| {
            (tau[j] > 0.0).then(|| {
                let pv = PhaseVar { v: p.complex_vector(n) };
                for idx in 0..n {
                    p.add_soc(AffExpr::constant(1.0), vec![pv.v.re(idx), pv.v.im(idx)]);
                }
                pv
            })
        })
        .collect();
    if vars.iter().all(Option::is_none) {
        return Ok(Some(v_t.to_vec()));
    }
    let eta = p.scalar();
    for u in (0..k).filter(|&u| noise.e[u] > 0.0) {
        let mut lhs = AffExpr::zero();
        for j in (0..k).filter(|&j| j != u) {
            let Some(pv) = vars[j] else { continue };
            for (i, row) in s.iter().enumerate() {
                let a = lifted_gram(&channels.stacked[i][u], &row[j]);
                lhs += pv.g_lb_expr(&a, &v_t[j]) * (noise.zeta * tau[j]);
            }
        }
        p.add_ge(lhs, eta.expr() * noise.e[u] + noise.e[u]);
    }
    p.maximize(eta.expr());
    let r = p.solve(tol)?;
    if r.status != SolveStatus::Optimal {
        return Ok(None);
    }
    Ok(Some(
        vars.iter()
            .zip(v_t)
            .map(|(pv, vt)| pv.map_or_else(|| vt.clone(), |pv| polish_phase(&pv.value(&r.x))))
            .collect(),
    ))
}

/// Spreads the unused time proportionally over the slots (uniformly if none
/// is used) and gives idle slots MRT covariances.
fn tdma_witness(
    channels: &ChannelSet,
    noise: &NoiseAndPower,
    mut s: Vec<Vec<CMat>>,
    v: Vec<CVec>,
    tau: &[f64],
    tau_zero_tol: f64,
) -> Result<SchemeSolution> {
    let k = channels.k;
    let total: f64 = tau.iter().sum();
    let scaled: Vec<f64> = if total > 0.0 { tau.iter().map(|t| t / total).collect() } else { vec![1.0 / k as f64; k] };
    for j in 0..k {
        if tau[j] <= tau_zero_tol {
            for (i, row) in s.iter_mut().enumerate() {
                let a = effective_channel(&channels.stacked[i][i], &v[j])?;
                row[j] = mrt_covariance(&a, noise.p[i]);
            }
        }
    }
    Ok(SchemeSolution { scheme: Scheme::Tdma, covariances: s, phases: v, tau: scaled, rho: Vec::new() })
}

/// Checks TDMA / TDMA-D feasibility by minimizing the total time needed to
/// meet every EH target. The witness uses the whole frame.
pub fn tdma_feasibility(
    channels: &ChannelSet,
    noise: &NoiseAndPower,
    settings: &AoSettings,
    seed: u64,
) -> Result<FeasibilityReport> {
    noise.validate(channels.k)?;
    let k = channels.k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v0: Vec<CVec> = (0..k).map(|_| random_phases(&mut rng, channels.n_total())).collect();
    let empty = |m| (0..k).map(|_| (0..k).map(|_| zeros(m)).collect()).collect::<Vec<Vec<CMat>>>();
    if !noise.eh_required() {
        let witness = tdma_witness(channels, noise, empty(channels.m), v0, &vec![0.0; k], settings.tau_zero_tol)?;
        return Ok(FeasibilityReport {
            feasible: true,
            delta_or_time: 0.0,
            witness: Some(witness),
            trace: Vec::new(),
            solver_failure: false,
        });
    }
    if k == 1 {
        // the only receiver decodes in the only slot and never harvests
        return Ok(FeasibilityReport {
            feasible: false,
            delta_or_time: f64::INFINITY,
            witness: None,
            trace: Vec::new(),
            solver_failure: false,
        });
    }

    let nrm = ao::normalize(channels, noise);
    let (ch, nz) = (&nrm.channels, &nrm.noise);
    let tol = settings.solver_tol;
    let mut v = v0;
    let mut best: Option<(f64, Vec<Vec<CMat>>, Vec<CVec>, Vec<f64>)> = None;
    let mut trace = Vec::new();
    let mut solver_failure = false;

    for _ in 0..settings.feasibility_max_iters {
        let previous = best.as_ref().map_or(f64::INFINITY, |b| b.0);
        let Some((s, mut tau)) = tdma_time_step(ch, nz, &v, tol)? else {
            solver_failure = true;
            break;
        };
        // exact energy ratio; rescaling τ by it keeps every target met
        let ratio = tdma_energy(ch, nz, &s, &v, &tau)?;
        if !(ratio > 0.0) || !ratio.is_finite() {
            solver_failure = true;
            break;
        }
        tau.iter_mut().for_each(|t| *t /= ratio);
        if ch.n_total() > 0 {
            match tdma_phase_step(ch, nz, &s, &v, &tau, tol)? {
                Some(v_new) => {
                    let r = tdma_energy(ch, nz, &s, &v_new, &tau)?;
                    if r >= 1.0 {
                        v = v_new;
                        tau.iter_mut().for_each(|t| *t /= r);
                    }
                }
                None => solver_failure = true,
            }
        }
        let total: f64 = tau.iter().sum();
        if best.as_ref().is_none_or(|b| total < b.0) {
            best = Some((total, s, v.clone(), tau));
        }
        let current = best.as_ref().map_or(f64::INFINITY, |b| b.0);
        trace.push(current);
        if solver_failure
            || ch.n_total() == 0
            || previous - current <= settings.feasibility_epsilon * current.abs().max(1e-12)
        {
            break;
        }
    }

    let Some((total, s, v, tau)) = best else {
        return Ok(FeasibilityReport {
            feasible: false,
            delta_or_time: f64::INFINITY,
            witness: None,
            trace,
            solver_failure,
        });
    };
    let feasible = total <= 1.0;
    let witness = if feasible { Some(tdma_witness(channels, noise, s, v, &tau, settings.tau_zero_tol)?) } else { None };
    Ok(FeasibilityReport { feasible, delta_or_time: total, witness, trace, solver_failure })
}

/// Witness of a TDMA report relabeled for the requested variant.
pub fn tdma_initial_point(report: &FeasibilityReport, variant: Scheme) -> Result<SchemeSolution> {
    if !matches!(variant, Scheme::Tdma | Scheme::TdmaD) {
        return Err(Error::InvalidParameter(format!("{variant} is not a TDMA scheme")));
    }
    let mut sol = feasible_witness(report)?.clone();
    sol.scheme = variant;
    Ok(sol)
}
