//! Hybrid TS-PS scheme and its PS-only / TS-only restrictions.
//!
//! Slot 0 is energy harvesting only, slot 1 power splitting, slot 2
//! information decoding only. Block 1 optimizes the lifted covariances
//! `W = τ·S`, the time fractions, the PS ratios and the slacks `e`, `z`; block
//! 2 optimizes the phase-shift vectors.

use crate::ao::{self, polish_covariance, polish_phase, polish_tau, Step};
use crate::channel::ChannelSet;
use crate::config::AoSettings;
use crate::linalg::{quad_form, trace_product};
use crate::metrics::{self, effective_channel, NoiseAndPower};
use crate::sca::{chi_lb_expr, lifted_gram, zsq_lb_expr, PerspectiveLogUb, PhaseVar};
use crate::scheme::{Scheme, SchemeOutcome, SchemeSolution};
use crate::solver::{AffExpr, ConicProgram, HermitianMatrix, Scalar};
use crate::{CMat, CVec, Error, Result};

pub use crate::sca::{chi_lb as surrogate_bilinear, zsq_lb as surrogate_zsq};

fn check_variant(variant: Scheme) -> Result<()> {
    if variant.is_hybrid_family() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{variant} is not a hybrid-family scheme")))
    }
}

/// `a a^H` for the link Tx i → Rx k under phases `v`.
fn gram(channels: &ChannelSet, i: usize, k: usize, v: &CVec) -> Result<CMat> {
    let a = effective_channel(&channels.stacked[i][k], v)?;
    Ok(&a * a.adjoint())
}

/// Interference power `Σ_{i≠k} tr(a a^H W_i)` at Rx `k`.
fn interference(channels: &ChannelSet, k: usize, w: &[CMat], v: &CVec) -> Result<f64> {
    let mut acc = 0.0;
    for (i, wi) in w.iter().enumerate() {
        if i != k {
            acc += trace_product(&gram(channels, i, k, v)?, wi);
        }
    }
    Ok(acc)
}

/// Tangent-plane overestimator of the slot-1 (PS) interference term of Rx `k`,
/// expanded at lifted covariances `w2_t`, slack `e_t` and time `tau2_t`.
pub fn surrogate_g2(
    channels: &ChannelSet,
    v2: &CVec,
    w2_t: &[CMat],
    e_t: f64,
    tau2_t: f64,
    k: usize,
    noise: &NoiseAndPower,
) -> Result<PerspectiveLogUb> {
    let i_t = interference(channels, k, w2_t, v2)?;
    PerspectiveLogUb::new(i_t, e_t, tau2_t, noise.sigma_proc_sq[k], noise.sigma_ant_sq[k])
}

/// Tangent-plane overestimator of the slot-2 (ID) interference term of Rx `k`.
pub fn surrogate_g3(
    channels: &ChannelSet,
    v3: &CVec,
    w3_t: &[CMat],
    tau3_t: f64,
    k: usize,
    noise: &NoiseAndPower,
) -> Result<PerspectiveLogUb> {
    let i_t = interference(channels, k, w3_t, v3)?;
    PerspectiveLogUb::new(i_t, 0.0, tau3_t, 0.0, noise.sigma_sq(k))
}

/// `S = W/τ` when `τ > tol`, else zero.
pub fn recover_covariances(w: &[CMat], tau: f64, tol: f64) -> Vec<CMat> {
    w.iter()
        .map(|wi| if tau > tol { wi / crate::C64::new(tau, 0.0) } else { CMat::zeros(wi.nrows(), wi.ncols()) })
        .collect()
}

/// SCA expansion point of block 1, derived from a feasible solution.
#[derive(Debug, Clone)]
pub struct HybridExpansion {
    /// Lifted covariances `W[i][j] = τ_j S[i][j]`.
    pub w: Vec<Vec<CMat>>,
    /// Time fractions, clamped below.
    pub tau: [f64; 3],
    /// PS ratios, clamped to `[floor, 1]`.
    pub rho: Vec<f64>,
    /// `e_k = τ₂/ρ_k`, clamped below.
    pub e: Vec<f64>,
    /// `z_k = sqrt((1 − ρ_k) ζ Σ_i tr(a a^H W_{i,2}))`.
    pub z: Vec<f64>,
}

impl HybridExpansion {
    pub fn from_solution(channels: &ChannelSet, sol: &SchemeSolution, zeta: f64, floor: f64) -> Result<Self> {
        let k = channels.k;
        let w: Vec<Vec<CMat>> = sol
            .covariances
            .iter()
            .map(|row| (0..3).map(|j| &row[j] * crate::C64::new(sol.tau[j], 0.0)).collect())
            .collect();
        let tau = [sol.tau[0].max(floor), sol.tau[1].max(floor), sol.tau[2].max(floor)];
        let rho: Vec<f64> = sol.rho.iter().map(|&r| r.clamp(floor, 1.0)).collect();
        let e: Vec<f64> = rho.iter().map(|&r| (sol.tau[1].max(0.0) / r).max(floor)).collect();
        let mut z = Vec::with_capacity(k);
        for u in 0..k {
            let mut p = 0.0;
            for (i, row) in w.iter().enumerate() {
                p += trace_product(&gram(channels, i, u, &sol.phases[1])?, &row[1]);
            }
            z.push(((1.0 - sol.rho[u].clamp(0.0, 1.0)) * zeta * p).max(0.0).sqrt());
        }
        Ok(Self { w, tau, rho, e, z })
    }
}

/// Block-1 program together with the handles needed to read its solution.
pub struct Block1 {
    pub program: ConicProgram,
    w: Vec<Vec<Option<HermitianMatrix>>>,
    tau: [Option<Scalar>; 3],
    rho: Vec<Option<Scalar>>,
}

impl Block1 {
    /// Recovers covariances, time fractions and PS ratios from a primal
    /// point, polished onto the feasible set.
    pub fn extract(
        &self,
        x: &[f64],
        base: &SchemeSolution,
        noise: &NoiseAndPower,
        tau_zero_tol: f64,
    ) -> SchemeSolution {
        let mut sol = base.clone();
        let mut tau = [0.0; 3];
        for j in 0..3 {
            tau[j] = self.tau[j].map_or(0.0, |s| s.value(x));
        }
        polish_tau(&mut tau);
        sol.tau = tau.to_vec();
        for (i, row) in self.w.iter().enumerate() {
            for (j, wij) in row.iter().enumerate() {
                let (r, c) = (base.covariances[i][j].nrows(), base.covariances[i][j].ncols());
                sol.covariances[i][j] = match wij.map(|h| h.value(x)) {
                    Some(wv) if tau[j] > tau_zero_tol => {
                        polish_covariance(&(wv / crate::C64::new(tau[j], 0.0)), noise.p[i])
                    }
                    _ => CMat::zeros(r, c),
                };
            }
        }
        for (u, r) in self.rho.iter().enumerate() {
            if let Some(r) = r {
                sol.rho[u] = r.value(x).clamp(0.0, 1.0);
            }
        }
        sol
    }
}

/// Builds the block-1 SDP for phases fixed at `sol.phases`, expanded at `exp`.
pub fn build_block1_program(
    channels: &ChannelSet,
    noise: &NoiseAndPower,
    variant: Scheme,
    sol: &SchemeSolution,
    exp: &HybridExpansion,
) -> Result<Block1> {
    check_variant(variant)?;
    let k = channels.k;
    let m = channels.m;
    let active = variant.active_slots(k);
    let on = |j: usize| active.contains(&j);
    let mut p = ConicProgram::new();

    let mut w: Vec<Vec<Option<HermitianMatrix>>> = vec![vec![None; 3]; k];
    let mut tau: [Option<Scalar>; 3] = [None; 3];
    for j in 0..3 {
        if on(j) {
            tau[j] = Some(p.nonneg_scalar());
            for row in w.iter_mut() {
                row[j] = Some(p.hermitian_psd(m));
            }
        }
    }
    let tau_e = |j: usize| tau[j].map_or(AffExpr::zero(), |s| s.expr());

    // Grams per (slot, i, k)
    let mut grams: Vec<Vec<Vec<CMat>>> = Vec::with_capacity(3);
    for j in 0..3 {
        let mut per_i = Vec::with_capacity(k);
        for i in 0..k {
            let mut per_k = Vec::with_capacity(k);
            for u in 0..k {
                per_k.push(gram(channels, i, u, &sol.phases[j])?);
            }
            per_i.push(per_k);
        }
        grams.push(per_i);
    }
    // Σ_{i ∈ set} tr(A_{i,u,j} W_{i,j})
    let received = |j: usize, u: usize, skip: Option<usize>| -> AffExpr {
        let mut acc = AffExpr::zero();
        for i in 0..k {
            if Some(i) == skip {
                continue;
            }
            if let Some(wij) = w[i][j] {
                acc += wij.re_trace_with(&grams[j][i][u]);
            }
        }
        acc
    };

    let eh_needed = noise.eh_required();
    let ps = on(1);
    let mut rho = vec![None; k];
    let mut e = vec![None; k];
    let mut z = vec![None; k];
    if ps {
        for u in 0..k {
            let r = p.nonneg_scalar();
            p.add_le(r.expr(), AffExpr::constant(1.0));
            rho[u] = Some(r);
            e[u] = Some(p.nonneg_scalar());
            if eh_needed && noise.e[u] > 0.0 {
                z[u] = Some(p.scalar());
            }
        }
    }

    let mut objective = AffExpr::zero();
    let w2_t: Vec<CMat> = exp.w.iter().map(|row| row[1].clone()).collect();
    let w3_t: Vec<CMat> = exp.w.iter().map(|row| row[2].clone()).collect();
    for u in 0..k {
        if ps {
            let (ru, eu) = (rho[u].unwrap(), e[u].unwrap());
            let x = received(1, u, None) + eu.expr() * noise.sigma_proc_sq[u] + tau_e(1) * noise.sigma_ant_sq[u];
            objective += p.perspective_log2(tau_e(1), x)?;
            let g = surrogate_g2(channels, &sol.phases[1], &w2_t, exp.e[u], exp.tau[1], u, noise)?;
            objective -= g.expr(received(1, u, Some(u)), Some(eu.expr()), tau_e(1));
            // τ₂ ≤ χ^lb(e, ρ) − ½(e² + ρ²)
            let chi = chi_lb_expr(exp.e[u], exp.rho[u], eu.expr(), ru.expr());
            p.sum_squares_le(vec![eu.expr(), ru.expr()], (chi - tau_e(1)) * 2.0);
        }
        if on(2) {
            let x = received(2, u, None) + tau_e(2) * noise.sigma_sq(u);
            objective += p.perspective_log2(tau_e(2), x)?;
            let g = surrogate_g3(channels, &sol.phases[2], &w3_t, exp.tau[2], u, noise)?;
            objective -= g.expr(received(2, u, Some(u)), None, tau_e(2));
        }
        if noise.e[u] > 0.0 {
            let mut lhs = if on(0) { received(0, u, None) * noise.zeta } else { AffExpr::zero() };
            if let Some(zu) = z[u] {
                lhs += zsq_lb_expr(exp.z[u], zu.expr());
                let one_minus_rho = AffExpr::constant(1.0) - rho[u].unwrap().expr();
                p.square_le_product(zu.expr(), one_minus_rho, received(1, u, None) * noise.zeta);
            }
            p.add_ge(lhs, AffExpr::constant(noise.e[u]));
        }
    }
    for (i, row) in w.iter().enumerate() {
        for (j, wij) in row.iter().enumerate() {
            if let Some(wij) = wij {
                p.add_le(wij.trace(), tau_e(j) * noise.p[i]);
            }
        }
    }
    p.add_le(AffExpr::sum((0..3).map(tau_e)), AffExpr::constant(1.0));
    p.maximize(objective);
    Ok(Block1 { program: p, w, tau, rho })
}

/// Block-2 program together with its phase handles.
pub struct Block2 {
    pub program: ConicProgram,
    v: [Option<PhaseVar>; 3],
}

impl Block2 {
    pub fn extract(&self, x: &[f64], base: &SchemeSolution) -> SchemeSolution {
        let mut sol = base.clone();
        for j in 0..3 {
            if let Some(pv) = &self.v[j] {
                sol.phases[j] = polish_phase(&pv.value(x));
            }
        }
        sol
    }
}

/// Builds the phase QCQP for fixed covariances, time fractions and PS ratios.
/// Returns `None` when no phase vector influences the objective or the EH
/// constraints (no IRS elements, or all relevant slots idle).
pub fn build_block2_program(
    channels: &ChannelSet,
    noise: &NoiseAndPower,
    variant: Scheme,
    sol: &SchemeSolution,
    settings: &AoSettings,
) -> Result<Option<Block2>> {
    check_variant(variant)?;
    let k = channels.k;
    let n = channels.n_total();
    if n == 0 {
        return Ok(None);
    }
    let tol = settings.tau_zero_tol;
    let floor = settings.expansion_floor;
    let active = variant.active_slots(k);
    let tau = &sol.tau;
    let eh_needed = noise.eh_required();
    let varies = [
        active.contains(&0) && tau[0] > tol && eh_needed,
        active.contains(&1) && tau[1] > tol,
        active.contains(&2) && tau[2] > tol,
    ];
    if !varies.iter().any(|&b| b) {
        return Ok(None);
    }

    let mut p = ConicProgram::new();
    let mut v: [Option<PhaseVar>; 3] = [None; 3];
    for j in 0..3 {
        if varies[j] {
            let pv = PhaseVar { v: p.complex_vector(n) };
            for idx in 0..n {
                p.add_soc(AffExpr::constant(1.0), vec![pv.v.re(idx), pv.v.im(idx)]);
            }
            v[j] = Some(pv);
        }
    }
    // A_{i,k,j} = H S H^H
    let lifted = |j: usize, i: usize, u: usize| lifted_gram(&channels.stacked[i][u], &sol.covariances[i][j]);

    let slot2 = sol.slot_covariances(1);
    let slot3 = sol.slot_covariances(2);
    let mu2 = metrics::sinr_hybrid_slot2(channels, &slot2, &sol.phases[1], &sol.rho, noise)?;
    let mu3 = metrics::sinr_hybrid_slot3(channels, &slot3, &sol.phases[2], noise)?;

    let mut objective = AffExpr::zero();
    for u in 0..k {
        for (j, mu_t, extra) in [(1usize, mu2[u], 1), (2usize, mu3[u], 2)] {
            let Some(pv) = v[j] else { continue };
            if mu_t <= floor || (j == 1 && sol.rho[u] <= 0.0) {
                continue;
            }
            let mu = p.nonneg_scalar();
            let rate = p.log2_one_plus(mu.expr());
            objective += rate * tau[j];
            let noise_term = if extra == 1 {
                noise.sigma_ant_sq[u] + noise.sigma_proc_sq[u] / sol.rho[u]
            } else {
                noise.sigma_sq(u)
            };
            let lhs = pv.f_lb_expr(&lifted(j, u, u), &sol.phases[j], mu_t, mu.expr()) - noise_term;
            let mut parts = Vec::new();
            for i in (0..k).filter(|&i| i != u) {
                parts.extend(pv.quad_parts(&lifted(j, i, u)));
            }
            if parts.is_empty() {
                p.add_ge(lhs, AffExpr::zero());
            } else {
                p.sum_squares_le(parts, lhs);
            }
        }
        if noise.e[u] > 0.0 {
            let mut lhs = AffExpr::zero();
            for (j, weight) in [(0usize, noise.zeta * tau[0]), (1usize, noise.zeta * tau[1] * (1.0 - sol.rho[u]))] {
                if weight <= 0.0 {
                    continue;
                }
                for i in 0..k {
                    let a = lifted(j, i, u);
                    match v[j] {
                        Some(pv) => lhs += pv.g_lb_expr(&a, &sol.phases[j]) * weight,
                        None => lhs += quad_form(&a, &sol.phases[j]) * weight,
                    }
                }
            }
            p.add_ge(lhs, AffExpr::constant(noise.e[u]));
        }
    }
    p.maximize(objective);
    Ok(Some(Block2 { program: p, v }))
}

/// Runs the alternating optimization from a feasible initial point.
pub fn ao_solve(
    channels: &ChannelSet,
    noise: &NoiseAndPower,
    settings: &AoSettings,
    variant: Scheme,
    initial: &SchemeSolution,
) -> Result<SchemeOutcome> {
    check_variant(variant)?;
    noise.validate(channels.k)?;
    if !initial.scheme.is_hybrid_family() || initial.tau.len() != 3 || initial.phases.len() != 3 {
        return Err(Error::InfeasibleStart("initial point is not a hybrid-frame solution".into()));
    }
    let active = variant.active_slots(channels.k);
    if (0..3).any(|j| !active.contains(&j) && initial.tau[j] > settings.tau_zero_tol) {
        return Err(Error::InfeasibleStart(format!("{variant} requires idle slots to have zero time")));
    }
    let mut start = initial.clone();
    start.scheme = variant;
    for j in (0..3).filter(|j| !active.contains(j)) {
        start.tau[j] = 0.0;
    }

    let nrm = ao::normalize(channels, noise);
    let (ch, nz) = (&nrm.channels, &nrm.noise);
    let tol = settings.solver_tol;

    let evaluate = |s: &SchemeSolution| ao::feasible_rate(ch, nz, s);
    let block1 = |s: &SchemeSolution| -> Result<Step> {
        let exp = HybridExpansion::from_solution(ch, s, nz.zeta, settings.expansion_floor)?;
        let b = build_block1_program(ch, nz, variant, s, &exp)?;
        ao::solve_block(&b.program, tol, |x| b.extract(x, s, nz, settings.tau_zero_tol))
    };
    let block2 = |s: &SchemeSolution| -> Result<Step> {
        let Some(b) = build_block2_program(ch, nz, variant, s, settings)? else {
            return Ok(Step::Skip);
        };
        ao::solve_block(&b.program, tol, |x| b.extract(x, s))
    };
    let run = ao::run(start, settings, evaluate, block1, block2)?;
    ao::finish(channels, noise, run)
}
