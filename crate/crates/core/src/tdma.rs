//! TDMA and TDMA-D schemes: slot `k` carries Rx `k`'s information while every
//! other receiver harvests.
//!
//! TDMA-D receivers know the other transmitters' signals in their own slot
//! (they are pure energy signals) and cancel them, so their rate is
//! interference-free and the covariance block needs no SCA surrogate.

use std::f64::consts::LN_2;

use crate::ao::{self, polish_covariance, polish_phase, polish_tau, Step};
use crate::channel::ChannelSet;
use crate::config::AoSettings;
use crate::linalg::quad_form;
use crate::metrics::{self, effective_channel, NoiseAndPower};
use crate::sca::{lifted_gram, LogUb, PhaseVar};
use crate::scheme::{Scheme, SchemeOutcome, SchemeSolution};
use crate::solver::{AffExpr, ConicProgram, HermitianMatrix, Scalar};
use crate::{CMat, Error, Result, C64};

fn check_variant(variant: Scheme) -> Result<()> {
    match variant {
        Scheme::Tdma | Scheme::TdmaD => Ok(()),
        other => Err(Error::InvalidParameter(format!("{other} is not a TDMA scheme"))),
    }
}

/// `b b^H` for Tx i → Rx k under the phases of slot `slot`.
fn gram(channels: &ChannelSet, sol: &SchemeSolution, i: usize, k: usize, slot: usize) -> Result<CMat> {
    let b = effective_channel(&channels.stacked[i][k], &sol.phases[slot])?;
    Ok(&b * b.adjoint())
}

/// Tangent plane of `log₂(Σ_{i≠k} tr(b b^H S_ik) + σ_k²)` at the covariances
/// of `sol`, in Rx k's own slot.
pub fn surrogate_q(channels: &ChannelSet, sol: &SchemeSolution, k: usize, noise: &NoiseAndPower) -> Result<LogUb> {
    let mut interf = 0.0;
    for i in (0..channels.k).filter(|&i| i != k) {
        interf += metrics::link_power(channels, i, k, &sol.covariances[i][k], &sol.phases[k])?;
    }
    LogUb::new(interf, noise.sigma_sq(k))
}

/// Covariance / time program with the handles needed to read its solution.
pub struct CovarianceSdp {
    pub program: ConicProgram,
    w: Vec<Vec<HermitianMatrix>>,
    tau: Vec<Scalar>,
}

impl CovarianceSdp {
    pub fn extract(
        &self,
        x: &[f64],
        base: &SchemeSolution,
        noise: &NoiseAndPower,
        tau_zero_tol: f64,
    ) -> SchemeSolution {
        let mut sol = base.clone();
        let mut tau: Vec<f64> = self.tau.iter().map(|t| t.value(x)).collect();
        polish_tau(&mut tau);
        for (i, row) in self.w.iter().enumerate() {
            for (j, wij) in row.iter().enumerate() {
                sol.covariances[i][j] = if tau[j] > tau_zero_tol {
                    polish_covariance(&(wij.value(x) / C64::new(tau[j], 0.0)), noise.p[i])
                } else {
                    CMat::zeros(base.covariances[i][j].nrows(), base.covariances[i][j].ncols())
                };
            }
        }
        sol.tau = tau;
        sol
    }
}

/// Lifted-covariance SDP for fixed phases, expanded at `sol`.
pub fn build_covariance_sdp(
    channels: &ChannelSet,
    noise: &NoiseAndPower,
    variant: Scheme,
    sol: &SchemeSolution,
) -> Result<CovarianceSdp> {
    check_variant(variant)?;
    let k = channels.k;
    let mut p = ConicProgram::new();
    let tau: Vec<Scalar> = (0..k).map(|_| p.nonneg_scalar()).collect();
    let w: Vec<Vec<HermitianMatrix>> = (0..k).map(|_| (0..k).map(|_| p.hermitian_psd(channels.m)).collect()).collect();

    let mut objective = AffExpr::zero();
    for u in 0..k {
        let own = w[u][u].re_trace_with(&gram(channels, sol, u, u, u)?);
        if variant == Scheme::TdmaD {
            let x = own * (1.0 / noise.sigma_sq(u)) + tau[u].expr();
            objective += p.perspective_log2(tau[u].expr(), x)?;
        } else {
            let mut interf = AffExpr::zero();
            for i in (0..k).filter(|&i| i != u) {
                interf += w[i][u].re_trace_with(&gram(channels, sol, i, u, u)?);
            }
            let x = own + interf.clone() + tau[u].expr() * noise.sigma_sq(u);
            objective += p.perspective_log2(tau[u].expr(), x)?;
            let q = surrogate_q(channels, sol, u, noise)?;
            // τ log₂Λ + (I(W) − τ Iʳ)/(Λ ln2)
            objective -= tau[u].expr() * (q.lambda.log2() - q.interf_r / (q.lambda * LN_2));
            objective -= interf * (1.0 / (q.lambda * LN_2));
        }
        if noise.e[u] > 0.0 {
            let mut lhs = AffExpr::zero();
            for j in (0..k).filter(|&j| j != u) {
                for (i, row) in w.iter().enumerate() {
                    lhs += row[j].re_trace_with(&gram(channels, sol, i, u, j)?) * noise.zeta;
                }
            }
            p.add_ge(lhs, AffExpr::constant(noise.e[u]));
        }
    }
    for (i, row) in w.iter().enumerate() {
        for (j, wij) in row.iter().enumerate() {
            p.add_le(wij.trace(), tau[j].expr() * noise.p[i]);
        }
    }
    p.add_le(AffExpr::sum(tau.iter().map(|t| t.expr())), AffExpr::constant(1.0));
    p.maximize(objective);
    Ok(CovarianceSdp { program: p, w, tau })
}

/// Phase program with its per-slot phase handles.
pub struct PhaseQcqp {
    pub program: ConicProgram,
    v: Vec<Option<PhaseVar>>,
}

impl PhaseQcqp {
    pub fn extract(&self, x: &[f64], base: &SchemeSolution) -> SchemeSolution {
        let mut sol = base.clone();
        for (j, pv) in self.v.iter().enumerate() {
            if let Some(pv) = pv {
                sol.phases[j] = polish_phase(&pv.value(x));
            }
        }
        sol
    }
}

/// Phase QCQP for fixed covariances and time fractions. `None` when no phase
/// vector can change the objective or the EH constraints.
pub fn build_phase_qcqp(
    channels: &ChannelSet,
    noise: &NoiseAndPower,
    variant: Scheme,
    sol: &SchemeSolution,
    settings: &AoSettings,
) -> Result<Option<PhaseQcqp>> {
    check_variant(variant)?;
    let k = channels.k;
    let n = channels.n_total();
    if n == 0 {
        return Ok(None);
    }
    let tau = &sol.tau;
    let mut p = ConicProgram::new();
    let v: Vec<Option<PhaseVar>> = (0..k)
        .map(|j| {
            (tau[j] > settings.tau_zero_tol).then(|| {
                let pv = PhaseVar { v: p.complex_vector(n) };
                for idx in 0..n {
                    p.add_soc(AffExpr::constant(1.0), vec![pv.v.re(idx), pv.v.im(idx)]);
                }
                pv
            })
        })
        .collect();
    if v.iter().all(Option::is_none) {
        return Ok(None);
    }
    let lifted = |i: usize, u: usize, j: usize| lifted_gram(&channels.stacked[i][u], &sol.covariances[i][j]);
    let mu_t = match variant {
        Scheme::TdmaD => metrics::sinr_tdma_d(channels, &sol.covariances, &sol.phases, noise)?,
        _ => metrics::sinr_tdma(channels, &sol.covariances, &sol.phases, noise)?,
    };

    let mut objective = AffExpr::zero();
    for u in 0..k {
        if let Some(pv) = v[u] {
            if mu_t[u] > settings.expansion_floor {
                let mu = p.nonneg_scalar();
                objective += p.log2_one_plus(mu.expr()) * tau[u];
                let own = lifted(u, u, u);
                if variant == Scheme::TdmaD {
                    p.add_ge(pv.g_lb_expr(&own, &sol.phases[u]), mu.expr() * noise.sigma_sq(u));
                } else {
                    let lhs = pv.f_lb_expr(&own, &sol.phases[u], mu_t[u], mu.expr()) - noise.sigma_sq(u);
                    let parts: Vec<AffExpr> =
                        (0..k).filter(|&i| i != u).flat_map(|i| pv.quad_parts(&lifted(i, u, u))).collect();
                    if parts.is_empty() {
                        p.add_ge(lhs, AffExpr::zero());
                    } else {
                        p.sum_squares_le(parts, lhs);
                    }
                }
            }
        }
        if noise.e[u] > 0.0 {
            let mut lhs = AffExpr::zero();
            for j in (0..k).filter(|&j| j != u && tau[j] > 0.0) {
                let weight = noise.zeta * tau[j];
                for i in 0..k {
                    let a = lifted(i, u, j);
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
    Ok(Some(PhaseQcqp { program: p, v }))
}

/// Runs the alternating optimization for TDMA or TDMA-D from a feasible
/// initial point.
pub fn ao_solve_tdma(
    channels: &ChannelSet,
    noise: &NoiseAndPower,
    settings: &AoSettings,
    variant: Scheme,
    initial: &SchemeSolution,
) -> Result<SchemeOutcome> {
    check_variant(variant)?;
    noise.validate(channels.k)?;
    let k = channels.k;
    if initial.tau.len() != k || initial.phases.len() != k || initial.covariances.iter().any(|row| row.len() != k) {
        return Err(Error::InfeasibleStart("initial point is not a TDMA-frame solution".into()));
    }
    let mut start = initial.clone();
    start.scheme = variant;

    let nrm = ao::normalize(channels, noise);
    let (ch, nz) = (&nrm.channels, &nrm.noise);
    let tol = settings.solver_tol;
    let evaluate = |s: &SchemeSolution| ao::feasible_rate(ch, nz, s);
    let block1 = |s: &SchemeSolution| -> Result<Step> {
        let b = build_covariance_sdp(ch, nz, variant, s)?;
        ao::solve_block(&b.program, tol, |x| b.extract(x, s, nz, settings.tau_zero_tol))
    };
    let block2 = |s: &SchemeSolution| -> Result<Step> {
        let Some(b) = build_phase_qcqp(ch, nz, variant, s, settings)? else {
            return Ok(Step::Skip);
        };
        ao::solve_block(&b.program, tol, |x| b.extract(x, s))
    };
    let run = ao::run(start, settings, evaluate, block1, block2)?;
    ao::finish(channels, noise, run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channels, Deployment, FadingParams, Geometry};
    use crate::feasibility::{tdma_feasibility, tdma_initial_point};
    use crate::CVec;

    fn setup(seed: u64, n: usize, e: f64) -> (ChannelSet, NoiseAndPower) {
        let geo = Geometry::new(2, 0.0, 6.0, 1.0, Deployment::Distributed, n).unwrap();
        let ch = sample_channels(seed, &geo, &FadingParams::default(), 2).unwrap();
        (ch, NoiseAndPower::uniform(2, 0.2, 0.5e-8, 0.5e-8, 0.7, e))
    }

    fn solve(ch: &ChannelSet, noise: &NoiseAndPower, variant: Scheme, seed: u64) -> SchemeOutcome {
        let settings = AoSettings::default();
        let r = tdma_feasibility(ch, noise, &settings, seed).unwrap();
        ao_solve_tdma(ch, noise, &settings, variant, &tdma_initial_point(&r, variant).unwrap()).unwrap()
    }

    #[test]
    fn single_link_reaches_capacity() {
        let h = C64::new(2e-4, 1e-4);
        let ch = ChannelSet::from_links(1, vec![vec![CVec::from_element(1, h)]], vec![vec![]], vec![]).unwrap();
        let noise = NoiseAndPower::uniform(1, 0.2, 0.5e-8, 0.5e-8, 0.7, 0.0);
        let capacity = (1.0 + 0.2 * h.norm_sqr() / 1e-8).log2();
        for variant in [Scheme::Tdma, Scheme::TdmaD] {
            let out = solve(&ch, &noise, variant, 0);
            let sol = out.solution.unwrap();
            assert!((sol.tau[0] - 1.0).abs() < 1e-6);
            assert!((out.sum_rate.unwrap() - capacity).abs() <= 1e-4 * capacity);
        }
    }

    #[test]
    fn q_bound_is_tight_and_dominant() {
        let (ch, noise) = setup(3, 4, 0.5e-6);
        let r = tdma_feasibility(&ch, &noise, &AoSettings::default(), 3).unwrap();
        let sol = r.witness.unwrap();
        let q = surrogate_q(&ch, &sol, 0, &noise).unwrap();
        let at = LogUb::exact(q.interf_r, noise.sigma_sq(0));
        assert!((q.value(q.interf_r) - at).abs() < 1e-12 * at.abs().max(1.0));
        for scale in [0.0, 0.3, 2.0, 10.0] {
            let i = q.interf_r * scale;
            assert!(q.value(i) >= LogUb::exact(i, noise.sigma_sq(0)) - 1e-12);
        }
    }

    #[test]
    fn runs_are_monotone_feasible_and_ordered() {
        let (ch, noise) = setup(0, 6, 0.5e-6);
        let tdma = solve(&ch, &noise, Scheme::Tdma, 0);
        assert!(tdma.trace.windows(2).all(|w| w[1] >= w[0] - 1e-8));
        assert!(metrics::constraint_residuals(&ch, tdma.solution.as_ref().unwrap(), &noise).unwrap().feasible());
        let mut warm = tdma.solution.clone().unwrap();
        warm.scheme = Scheme::TdmaD;
        let d = ao_solve_tdma(&ch, &noise, &AoSettings::default(), Scheme::TdmaD, &warm).unwrap();
        assert!(d.sum_rate.unwrap() >= tdma.sum_rate.unwrap() - 1e-6);
        assert!(d.trace.windows(2).all(|w| w[1] >= w[0] - 1e-8));
    }

    #[test]
    fn zero_energy_target_still_uses_irs() {
        let (ch, noise) = setup(9, 4, 0.0);
        let out = solve(&ch, &noise, Scheme::Tdma, 9);
        assert!(out.sum_rate.unwrap() >= out.trace[0]);
        assert!(build_phase_qcqp(&ch, &noise, Scheme::Hybrid, out.solution.as_ref().unwrap(), &AoSettings::default())
            .is_err());
    }
}
