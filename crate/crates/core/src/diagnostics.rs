//! Post-hoc checks of the rank structure of converged covariances.
//!
//! Optimal covariances are expected to be rank one in almost every case; the
//! solvers never enforce it, so these checks only measure it.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::linalg::{hermitian_eigenvalues, trace_re};
use crate::metrics::effective_channel;
use crate::scheme::SchemeSolution;
use crate::{CMat, CVec, Result};

/// Eigenvalues below this fraction of the largest one do not count.
pub const RANK_TOL: f64 = 1e-4;
/// Slots with τ at or below this are idle.
pub const TAU_ACTIVE_TOL: f64 = 1e-6;
const FULL_POWER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRank {
    pub tx: usize,
    pub slot: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub effective_rank: usize,
    pub slot_active: bool,
    pub full_power: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub covariances: Vec<CovarianceRank>,
    /// Active-slot, full-power covariances.
    pub eligible: usize,
    /// Of those, how many have effective rank at most one.
    pub rank_one: usize,
}

impl RankReport {
    /// `None` when no covariance is eligible.
    pub fn rank_one_fraction(&self) -> Option<f64> {
        (self.eligible > 0).then(|| self.rank_one as f64 / self.eligible as f64)
    }
}

/// Number of eigenvalues above `tol · λ_max` (zero for a zero matrix).
pub fn effective_rank(eigenvalues: &[f64], tol: f64) -> usize {
    let lmax = eigenvalues.iter().copied().fold(0.0, f64::max);
    if lmax <= 0.0 {
        return 0;
    }
    eigenvalues.iter().filter(|&&l| l > tol * lmax).count()
}

/// Rank statistics of every covariance in `sol`; `power[i]` is Tx i's budget.
pub fn rank_check(sol: &SchemeSolution, power: &[f64], tol: f64) -> RankReport {
    let mut covariances = Vec::new();
    for (i, row) in sol.covariances.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            let eigenvalues = hermitian_eigenvalues(s);
            covariances.push(CovarianceRank {
                tx: i,
                slot: j,
                effective_rank: effective_rank(&eigenvalues, tol),
                eigenvalues,
                slot_active: sol.tau.get(j).is_some_and(|&t| t > TAU_ACTIVE_TOL),
                full_power: trace_re(s) >= power[i] * (1.0 - FULL_POWER_TOL),
            });
        }
    }
    let eligible: Vec<_> = covariances.iter().filter(|c| c.slot_active && c.full_power).collect();
    let rank_one = eligible.iter().filter(|c| c.effective_rank <= 1).count();
    RankReport { eligible: eligible.len(), rank_one, covariances }
}

/// Advisory check per transmitter: does `ζ Σ_k a_{i,k} a_{i,k}^H` (phases `v`)
/// have a simple dominant eigenvalue? A repeated one is the situation in
/// which a rank-one optimum is not implied.
pub fn condition_flags(channels: &ChannelSet, v: &CVec, zeta: f64) -> Result<Vec<bool>> {
    let mut flags = Vec::with_capacity(channels.k);
    for i in 0..channels.k {
        let mut y = CMat::zeros(channels.m, channels.m);
        for k in 0..channels.k {
            let a = effective_channel(&channels.stacked[i][k], v)?;
            y += &a * a.adjoint() * crate::C64::new(zeta, 0.0);
        }
        let ev = hermitian_eigenvalues(&y);
        let lmax = ev.last().copied().unwrap_or(0.0);
        let multiplicity = ev.iter().filter(|&&l| (l - lmax).abs() <= 1e-9 * lmax.abs().max(f64::MIN_POSITIVE)).count();
        flags.push(lmax > 0.0 && multiplicity == 1);
    }
    Ok(flags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::Scheme;
    use crate::C64;

    fn sol_with(s: CMat) -> SchemeSolution {
        SchemeSolution {
            scheme: Scheme::Ps,
            covariances: vec![vec![CMat::zeros(2, 2), s, CMat::zeros(2, 2)]],
            phases: vec![],
            tau: vec![0.0, 1.0, 0.0],
            rho: vec![0.5],
        }
    }

    #[test]
    fn rank_one_and_full_rank() {
        let u = CVec::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let r = rank_check(&sol_with(&u * u.adjoint() * C64::new(2.0, 0.0)), &[2.0], RANK_TOL);
        assert_eq!(r.covariances[1].effective_rank, 1);
        assert_eq!((r.eligible, r.rank_one), (1, 1));
        assert_eq!(r.covariances[0].effective_rank, 0);
        assert!(!r.covariances[0].slot_active);

        let r = rank_check(&sol_with(CMat::identity(2, 2) * C64::new(1.0, 0.0)), &[2.0], RANK_TOL);
        assert_eq!(r.covariances[1].effective_rank, 2);
        assert_eq!(r.rank_one_fraction(), Some(0.0));
        assert_eq!(r, rank_check(&sol_with(CMat::identity(2, 2) * C64::new(1.0, 0.0)), &[2.0], RANK_TOL));
    }

    #[test]
    fn dominant_eigenvalue_multiplicity() {
        let ch = ChannelSet::from_links(1, vec![vec![CVec::from_element(1, C64::new(0.3, 0.1))]], vec![vec![]], vec![])
            .unwrap();
        let v = CVec::from_element(1, C64::new(1.0, 0.0));
        assert_eq!(condition_flags(&ch, &v, 0.7).unwrap(), vec![true]);

        // both receivers see orthogonal equal-gain channels from Tx 0: Υ ∝ I
        let e0 = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let e1 = CVec::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let ch =
            ChannelSet::from_links(2, vec![vec![e0.clone(), e1.clone()], vec![e0, e1]], vec![vec![], vec![]], vec![])
                .unwrap();
        assert_eq!(condition_flags(&ch, &v, 0.7).unwrap(), vec![false, false]);
    }
}
