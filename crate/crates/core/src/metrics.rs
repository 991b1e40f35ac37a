//! Exact SINR, rate and harvested-energy evaluators plus constraint residuals.
//!
//! These are the ground truth every optimizer output is checked against; the
//! optimizers never trust their own surrogate values.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::linalg::{hermitian_eigenvalues, quad_form, trace_re};
use crate::scheme::{Scheme, SchemeSolution};
use crate::{CMat, CVec, Error, Result};

/// Relative slack below which a constraint counts as violated.
pub const FEASIBILITY_TOL: f64 = 1e-6;
/// Floor used to normalize EH slacks when the requirement is zero.
pub const EH_ABS_FLOOR: f64 = 1e-12;

/// Transmit powers, receiver noise and energy-harvesting parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseAndPower {
    /// Maximum instantaneous transmit power per Tx (W).
    pub p: Vec<f64>,
    /// RF-band antenna noise σ̃² per Rx (W).
    pub sigma_ant_sq: Vec<f64>,
    /// Baseband processing noise σ̂² per Rx (W).
    pub sigma_proc_sq: Vec<f64>,
    /// EH conversion efficiency ζ ∈ (0, 1].
    pub zeta: f64,
    /// EH requirement per Rx (W · normalized interval).
    pub e: Vec<f64>,
}

impl NoiseAndPower {
    pub fn uniform(k: usize, p: f64, sigma_ant_sq: f64, sigma_proc_sq: f64, zeta: f64, e: f64) -> Self {
        Self {
            p: vec![p; k],
            sigma_ant_sq: vec![sigma_ant_sq; k],
            sigma_proc_sq: vec![sigma_proc_sq; k],
            zeta,
            e: vec![e; k],
        }
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }

    /// Total noise σ² = σ̃² + σ̂² at Rx `k`.
    pub fn sigma_sq(&self, k: usize) -> f64 {
        self.sigma_ant_sq[k] + self.sigma_proc_sq[k]
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        let lens = [self.p.len(), self.sigma_ant_sq.len(), self.sigma_proc_sq.len(), self.e.len()];
        if lens.iter().any(|&l| l != k) {
            return Err(Error::DimensionMismatch(format!("power/noise vectors must have length K={k}")));
        }
        let positive = self.p.iter().chain(&self.sigma_ant_sq).chain(&self.sigma_proc_sq);
        if positive.into_iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidParameter("powers and noise variances must be positive".into()));
        }
        if !(self.zeta > 0.0 && self.zeta <= 1.0) {
            return Err(Error::InvalidParameter(format!("zeta must lie in (0, 1], got {}", self.zeta)));
        }
        if self.e.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidParameter("EH requirements must be non-negative".into()));
        }
        Ok(())
    }

    pub fn eh_required(&self) -> bool {
        self.e.iter().any(|&e| e > 0.0)
    }
}

/// `a` with `a^H = v^H H`.
pub fn effective_channel(stacked: &CMat, v: &CVec) -> Result<CVec> {
    if stacked.nrows() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "phase vector length {} vs stacked channel rows {}",
            v.len(),
            stacked.nrows()
        )));
    }
    Ok(stacked.adjoint() * v)
}

/// `tr(a a^H S) = a^H S a` for the link Tx i → Rx k with phases `v`.
pub fn link_power(channels: &ChannelSet, i: usize, k: usize, s: &CMat, v: &CVec) -> Result<f64> {
    let a = effective_channel(&channels.stacked[i][k], v)?;
    if s.nrows() != a.len() {
        return Err(Error::DimensionMismatch("covariance size must equal M".into()));
    }
    Ok(quad_form(s, &a))
}

fn check_slot(channels: &ChannelSet, s: &[CMat]) -> Result<()> {
    if s.len() != channels.k {
        return Err(Error::DimensionMismatch(format!("expected {} covariances, got {}", channels.k, s.len())));
    }
    Ok(())
}

/// Per-Rx (signal, interference) powers in one slot, decoding Rx `k` against Tx `k`.
fn signal_and_interference(channels: &ChannelSet, s: &[CMat], v: &CVec) -> Result<Vec<(f64, f64)>> {
    check_slot(channels, s)?;
    let k = channels.k;
    (0..k)
        .map(|rx| {
            let mut sig = 0.0;
            let mut interf = 0.0;
            for (tx, cov) in s.iter().enumerate() {
                let p = link_power(channels, tx, rx, cov, v)?;
                if tx == rx {
                    sig = p;
                } else {
                    interf += p;
                }
            }
            Ok((sig, interf))
        })
        .collect()
}

/// Slot-2 SINR of the hybrid scheme; `ρ_k = 0` yields 0.
pub fn sinr_hybrid_slot2(
    channels: &ChannelSet,
    s: &[CMat],
    v2: &CVec,
    rho: &[f64],
    noise: &NoiseAndPower,
) -> Result<Vec<f64>> {
    let parts = signal_and_interference(channels, s, v2)?;
    Ok(parts
        .into_iter()
        .enumerate()
        .map(
            |(k, (sig, interf))| {
                if rho[k] <= 0.0 {
                    0.0
                } else {
                    sig / (interf + noise.sigma_ant_sq[k] + noise.sigma_proc_sq[k] / rho[k])
                }
            },
        )
        .collect())
}

/// Slot-3 SINR of the hybrid scheme.
pub fn sinr_hybrid_slot3(channels: &ChannelSet, s: &[CMat], v3: &CVec, noise: &NoiseAndPower) -> Result<Vec<f64>> {
    let parts = signal_and_interference(channels, s, v3)?;
    Ok(parts.into_iter().enumerate().map(|(k, (sig, interf))| sig / (interf + noise.sigma_sq(k))).collect())
}

/// TDMA SINR of Rx k in its own slot k (`cov[i][j]`, `phases[j]`).
pub fn sinr_tdma(channels: &ChannelSet, cov: &[Vec<CMat>], phases: &[CVec], noise: &NoiseAndPower) -> Result<Vec<f64>> {
    tdma_parts(channels, cov, phases)
        .map(|p| p.into_iter().enumerate().map(|(k, (sig, interf))| sig / (interf + noise.sigma_sq(k))).collect())
}

/// TDMA-D SINR: the other transmitters' energy signals are cancelled.
pub fn sinr_tdma_d(
    channels: &ChannelSet,
    cov: &[Vec<CMat>],
    phases: &[CVec],
    noise: &NoiseAndPower,
) -> Result<Vec<f64>> {
    tdma_parts(channels, cov, phases)
        .map(|p| p.into_iter().enumerate().map(|(k, (sig, _))| sig / noise.sigma_sq(k)).collect())
}

fn tdma_parts(channels: &ChannelSet, cov: &[Vec<CMat>], phases: &[CVec]) -> Result<Vec<(f64, f64)>> {
    let k = channels.k;
    if cov.len() != k || cov.iter().any(|row| row.len() != k) || phases.len() != k {
        return Err(Error::DimensionMismatch("TDMA needs K×K covariances and K phase vectors".into()));
    }
    (0..k)
        .map(|rx| {
            let mut sig = 0.0;
            let mut interf = 0.0;
            for (tx, row) in cov.iter().enumerate() {
                let p = link_power(channels, tx, rx, &row[rx], &phases[rx])?;
                if tx == rx {
                    sig = p;
                } else {
                    interf += p;
                }
            }
            Ok((sig, interf))
        })
        .collect()
}

/// Total received power at every Rx in one slot: `Σ_i tr(a a^H S_i)`.
fn received_power(channels: &ChannelSet, s: &[CMat], v: &CVec) -> Result<Vec<f64>> {
    signal_and_interference(channels, s, v).map(|p| p.into_iter().map(|(a, b)| a + b).collect())
}

/// Harvested energy per Rx for the hybrid family.
pub fn harvested_energy_hybrid(
    channels: &ChannelSet,
    cov: &[Vec<CMat>],
    phases: &[CVec],
    tau: &[f64],
    rho: &[f64],
    zeta: f64,
) -> Result<Vec<f64>> {
    if phases.len() != 3 || tau.len() != 3 || cov.iter().any(|row| row.len() != 3) {
        return Err(Error::DimensionMismatch("hybrid frame has three slots".into()));
    }
    let s1: Vec<CMat> = cov.iter().map(|row| row[0].clone()).collect();
    let s2: Vec<CMat> = cov.iter().map(|row| row[1].clone()).collect();
    let p1 = received_power(channels, &s1, &phases[0])?;
    let p2 = received_power(channels, &s2, &phases[1])?;
    Ok((0..channels.k).map(|k| zeta * tau[0] * p1[k] + zeta * tau[1] * (1.0 - rho[k]) * p2[k]).collect())
}

/// Harvested energy per Rx for TDMA / TDMA-D (every slot except the Rx's own).
pub fn harvested_energy_tdma(
    channels: &ChannelSet,
    cov: &[Vec<CMat>],
    phases: &[CVec],
    tau: &[f64],
    zeta: f64,
) -> Result<Vec<f64>> {
    let k = channels.k;
    if phases.len() != k || tau.len() != k || cov.iter().any(|row| row.len() != k) {
        return Err(Error::DimensionMismatch("TDMA frame has K slots".into()));
    }
    let mut q = vec![0.0; k];
    for j in 0..k {
        let sj: Vec<CMat> = cov.iter().map(|row| row[j].clone()).collect();
        let pj = received_power(channels, &sj, &phases[j])?;
        for (rx, qk) in q.iter_mut().enumerate() {
            if rx != j {
                *qk += zeta * tau[j] * pj[rx];
            }
        }
    }
    Ok(q)
}

pub fn harvested_energy(channels: &ChannelSet, sol: &SchemeSolution, zeta: f64) -> Result<Vec<f64>> {
    if sol.scheme.is_hybrid_family() {
        harvested_energy_hybrid(channels, &sol.covariances, &sol.phases, &sol.tau, &sol.rho, zeta)
    } else {
        harvested_energy_tdma(channels, &sol.covariances, &sol.phases, &sol.tau, zeta)
    }
}

/// Per-Rx achievable rates (bps/Hz) of a solution.
pub fn user_rates(channels: &ChannelSet, sol: &SchemeSolution, noise: &NoiseAndPower) -> Result<Vec<f64>> {
    let k = channels.k;
    if sol.scheme.is_hybrid_family() {
        if sol.tau.len() != 3 || sol.phases.len() != 3 || sol.rho.len() != k {
            return Err(Error::DimensionMismatch("hybrid solution shape".into()));
        }
        let g2 = sinr_hybrid_slot2(channels, &sol.slot_covariances(1), &sol.phases[1], &sol.rho, noise)?;
        let g3 = sinr_hybrid_slot3(channels, &sol.slot_covariances(2), &sol.phases[2], noise)?;
        Ok((0..k).map(|u| sol.tau[1] * (1.0 + g2[u]).log2() + sol.tau[2] * (1.0 + g3[u]).log2()).collect())
    } else {
        let g = match sol.scheme {
            Scheme::TdmaD => sinr_tdma_d(channels, &sol.covariances, &sol.phases, noise)?,
            _ => sinr_tdma(channels, &sol.covariances, &sol.phases, noise)?,
        };
        Ok((0..k).map(|u| sol.tau[u] * (1.0 + g[u]).log2()).collect())
    }
}

pub fn sum_rate(channels: &ChannelSet, sol: &SchemeSolution, noise: &NoiseAndPower) -> Result<f64> {
    Ok(user_rates(channels, sol, noise)?.iter().sum())
}

/// Minimum relative slack per constraint family. Every entry is scaled so
/// that `0` means tight and negative means violated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// min_k (Q_k − E_k) / max(E_k, floor).
    pub eh: f64,
    /// min_{i,j} (P_i − tr S_ij) / P_i.
    pub power: f64,
    /// min(1 − Σ τ, min_j τ_j).
    pub time: f64,
    /// min over slots and elements of 1 − |v_n|, and −|v_{N+1} − 1|.
    pub modulus: f64,
    /// min_k min(ρ_k, 1 − ρ_k); `+∞` for TDMA.
    pub split: f64,
    /// min eigenvalue of every S_ij divided by P_i.
    pub psd: f64,
}

impl ResidualReport {
    pub fn min_slack(&self) -> f64 {
        [self.eh, self.power, self.time, self.modulus, self.split, self.psd].into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn feasible(&self) -> bool {
        self.min_slack() >= -FEASIBILITY_TOL
    }
}

pub fn constraint_residuals(
    channels: &ChannelSet,
    sol: &SchemeSolution,
    noise: &NoiseAndPower,
) -> Result<ResidualReport> {
    let k = channels.k;
    let q = harvested_energy(channels, sol, noise.zeta)?;
    let eh = (0..k).map(|u| (q[u] - noise.e[u]) / noise.e[u].max(EH_ABS_FLOOR)).fold(f64::INFINITY, f64::min);

    let mut power = f64::INFINITY;
    let mut psd = f64::INFINITY;
    for (i, row) in sol.covariances.iter().enumerate() {
        for s in row {
            power = power.min((noise.p[i] - trace_re(s)) / noise.p[i]);
            let lmin = hermitian_eigenvalues(s).first().copied().unwrap_or(0.0);
            psd = psd.min(lmin / noise.p[i]);
        }
    }
    let total: f64 = sol.tau.iter().sum();
    let time = sol.tau.iter().copied().fold(1.0 - total, f64::min);

    let n = channels.n_total();
    let mut modulus = f64::INFINITY;
    for v in &sol.phases {
        if v.len() != n + 1 {
            return Err(Error::DimensionMismatch("phase vector length must be N+1".into()));
        }
        for e in v.iter().take(n) {
            modulus = modulus.min(1.0 - e.norm());
        }
        modulus = modulus.min(-(v[n] - crate::C64::new(1.0, 0.0)).norm());
    }
    let split = sol.rho.iter().map(|&r| r.min(1.0 - r)).fold(f64::INFINITY, f64::min);
    Ok(ResidualReport { eh, power, time, modulus, split, psd })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channels, Deployment, FadingParams, Geometry};
    use crate::C64;
    use approx::assert_relative_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn scalar_channels(h: &[&[f64]]) -> ChannelSet {
        let k = h.len();
        let hv = h.iter().map(|row| row.iter().map(|&x| CVec::from_element(1, c(x))).collect()).collect();
        ChannelSet::from_links(1, hv, vec![Vec::new(); k], Vec::new()).unwrap()
    }

    fn one() -> CVec {
        CVec::from_element(1, c(1.0))
    }

    #[test]
    fn irs_off_gives_direct_channel() {
        let g = Geometry::new(2, 0.0, 6.0, 1.0, Deployment::Centralized, 4).unwrap();
        let ch = sample_channels(1, &g, &FadingParams::default(), 2).unwrap();
        let mut v = CVec::zeros(5);
        v[4] = c(1.0);
        let a = effective_channel(&ch.stacked[0][1], &v).unwrap();
        assert!((a - &ch.h[0][1]).norm() < 1e-15);
        assert!(effective_channel(&ch.stacked[0][1], &CVec::zeros(3)).is_err());
    }

    #[test]
    fn single_user_full_split() {
        let ch = scalar_channels(&[&[1.0]]);
        let noise = NoiseAndPower::uniform(1, 2.0, 0.25, 0.75, 1.0, 0.0);
        let s = vec![CMat::from_element(1, 1, c(2.0))];
        let g2 = sinr_hybrid_slot2(&ch, &s, &one(), &[1.0], &noise).unwrap();
        assert_relative_eq!(g2[0], 2.0, max_relative = 1e-15);
        let g0 = sinr_hybrid_slot2(&ch, &s, &one(), &[0.0], &noise).unwrap();
        assert_eq!(g0[0], 0.0);
        let tiny = sinr_hybrid_slot2(&ch, &s, &one(), &[1e-12], &noise).unwrap();
        assert!(tiny[0] < 1e-11);
        let g3 = sinr_hybrid_slot3(&ch, &s, &one(), &noise).unwrap();
        assert_relative_eq!(g3[0], 2.0, max_relative = 1e-15);
        let zero = sinr_hybrid_slot3(&ch, &[CMat::zeros(1, 1)], &one(), &noise).unwrap();
        assert_eq!(zero[0], 0.0);
    }

    #[test]
    fn tdma_single_user_and_zero() {
        let ch = scalar_channels(&[&[1.0]]);
        let noise = NoiseAndPower::uniform(1, 2.0, 0.5, 0.5, 1.0, 0.0);
        let cov = vec![vec![CMat::from_element(1, 1, c(2.0))]];
        assert_relative_eq!(sinr_tdma(&ch, &cov, &[one()], &noise).unwrap()[0], 2.0);
        assert_relative_eq!(sinr_tdma_d(&ch, &cov, &[one()], &noise).unwrap()[0], 2.0);
        let z = vec![vec![CMat::zeros(1, 1)]];
        assert_eq!(sinr_tdma(&ch, &z, &[one()], &noise).unwrap()[0], 0.0);
        // K = 1 has no harvesting slot
        assert_eq!(harvested_energy_tdma(&ch, &cov, &[one()], &[1.0], 0.7).unwrap()[0], 0.0);
    }

    #[test]
    fn tdma_d_dominates_tdma() {
        let g = Geometry::new(3, 1.0, 6.0, 1.0, Deployment::Distributed, 6).unwrap();
        let ch = sample_channels(4, &g, &FadingParams::default(), 2).unwrap();
        let noise = NoiseAndPower::uniform(3, 0.2, 0.5e-8, 0.5e-8, 0.7, 0.0);
        let cov: Vec<Vec<CMat>> =
            (0..3).map(|i| (0..3).map(|j| CMat::identity(2, 2) * c(0.05 * (1 + i + j) as f64)).collect()).collect();
        let phases: Vec<CVec> = (0..3)
            .map(|j| CVec::from_fn(7, |n, _| if n == 6 { c(1.0) } else { C64::from_polar(1.0, (n + j) as f64) }))
            .collect();
        let a = sinr_tdma(&ch, &cov, &phases, &noise).unwrap();
        let b = sinr_tdma_d(&ch, &cov, &phases, &noise).unwrap();
        for k in 0..3 {
            assert!(b[k] >= a[k]);
        }
    }

    #[test]
    fn harvested_energy_examples() {
        let ch = scalar_channels(&[&[1.0]]);
        let s = CMat::from_element(1, 1, c(3.0));
        let cov = vec![vec![s.clone(), s.clone(), s]];
        let ph = vec![one(), one(), one()];
        let q = harvested_energy_hybrid(&ch, &cov, &ph, &[1.0, 0.0, 0.0], &[0.5], 1.0).unwrap();
        assert_relative_eq!(q[0], 3.0);
        let q = harvested_energy_hybrid(&ch, &cov, &ph, &[0.0, 1.0, 0.0], &[1.0], 1.0).unwrap();
        assert_eq!(q[0], 0.0);
    }

    #[test]
    fn tdma_energy_linear_in_zeta() {
        let ch = scalar_channels(&[&[1.0, 0.5], &[0.3, 2.0]]);
        let cov = vec![
            vec![CMat::from_element(1, 1, c(1.0)), CMat::from_element(1, 1, c(0.5))],
            vec![CMat::from_element(1, 1, c(0.2)), CMat::from_element(1, 1, c(1.0))],
        ];
        let ph = vec![one(), one()];
        let full = harvested_energy_tdma(&ch, &cov, &ph, &[0.4, 0.6], 1.0).unwrap();
        let half = harvested_energy_tdma(&ch, &cov, &ph, &[0.4, 0.6], 0.5).unwrap();
        for k in 0..2 {
            assert_relative_eq!(half[k], 0.5 * full[k], max_relative = 1e-15);
        }
        // Rx 0 harvests in slot 1: tau_1 * (|h_00|² S_01 + |h_10|² S_11)
        assert_relative_eq!(full[0], 0.6 * (1.0 * 0.5 + 0.09 * 1.0), max_relative = 1e-14);
    }

    fn hybrid_solution(scheme: Scheme, tau: [f64; 3], s: f64) -> SchemeSolution {
        let m = CMat::from_element(1, 1, c(s));
        SchemeSolution {
            scheme,
            covariances: vec![vec![m.clone(), m.clone(), m]],
            phases: vec![one(), one(), one()],
            tau: tau.to_vec(),
            rho: vec![1.0],
        }
    }

    #[test]
    fn sum_rate_zero_without_id_time() {
        let ch = scalar_channels(&[&[1.0]]);
        let noise = NoiseAndPower::uniform(1, 1.0, 0.5, 0.5, 1.0, 0.0);
        let sol = hybrid_solution(Scheme::Hybrid, [1.0, 0.0, 0.0], 1.0);
        assert_eq!(sum_rate(&ch, &sol, &noise).unwrap(), 0.0);
        let sol = hybrid_solution(Scheme::Ps, [0.0, 1.0, 0.0], 1.0);
        assert_relative_eq!(sum_rate(&ch, &sol, &noise).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn residuals_behave() {
        let ch = scalar_channels(&[&[1.0]]);
        let mut noise = NoiseAndPower::uniform(1, 1.0, 0.5, 0.5, 1.0, 0.0);
        let sol = hybrid_solution(Scheme::Hybrid, [0.3, 0.3, 0.4], 0.0);
        let r = constraint_residuals(&ch, &sol, &noise).unwrap();
        assert!(r.eh >= 0.0);
        assert!(r.feasible());
        noise.e = vec![0.1];
        let r = constraint_residuals(&ch, &sol, &noise).unwrap();
        assert!(!r.feasible());
        // 2×2 hand-computed instance: Q = 0.5 * 1 * |1|² * 0.8 = 0.4
        let ch2 = scalar_channels(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let noise2 = NoiseAndPower::uniform(2, 1.0, 0.5, 0.5, 1.0, 0.4);
        let cov = vec![
            vec![CMat::from_element(1, 1, c(0.8)), CMat::from_element(1, 1, c(1.0)), CMat::zeros(1, 1)],
            vec![CMat::from_element(1, 1, c(0.8)), CMat::from_element(1, 1, c(1.0)), CMat::zeros(1, 1)],
        ];
        let sol2 = SchemeSolution {
            scheme: Scheme::Hybrid,
            covariances: cov,
            phases: vec![one(), one(), one()],
            tau: vec![0.5, 0.5, 0.0],
            rho: vec![1.0, 1.0],
        };
        let r = constraint_residuals(&ch2, &sol2, &noise2).unwrap();
        assert!(r.eh.abs() < 1e-12);
        assert_relative_eq!(r.power, 0.0, epsilon = 1e-15);
        assert_relative_eq!(r.time, 0.0, epsilon = 1e-15);
    }
}
