//! Scheme identifiers and the solution / outcome records shared by all solvers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{CMat, CVec, Error};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Three-slot hybrid TS-PS.
    Hybrid,
    /// Hybrid restricted to the power-splitting slot (τ₁ = τ₃ = 0).
    Ps,
    /// Hybrid restricted to the two time-switching slots (τ₂ = 0).
    Ts,
    Tdma,
    TdmaD,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::Hybrid, Scheme::Ps, Scheme::Ts, Scheme::Tdma, Scheme::TdmaD];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Hybrid => "hybrid",
            Scheme::Ps => "ps",
            Scheme::Ts => "ts",
            Scheme::Tdma => "tdma",
            Scheme::TdmaD => "tdma_d",
        }
    }

    /// Hybrid, PS and TS share the three-slot frame.
    pub fn is_hybrid_family(self) -> bool {
        matches!(self, Scheme::Hybrid | Scheme::Ps | Scheme::Ts)
    }

    pub fn slot_count(self, k: usize) -> usize {
        if self.is_hybrid_family() {
            3
        } else {
            k
        }
    }

    /// Slots (0-based) whose time fraction may be non-zero.
    pub fn active_slots(self, k: usize) -> Vec<usize> {
        match self {
            Scheme::Hybrid => vec![0, 1, 2],
            Scheme::Ps => vec![1],
            Scheme::Ts => vec![0, 2],
            Scheme::Tdma | Scheme::TdmaD => (0..k).collect(),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "hybrid" => Ok(Scheme::Hybrid),
            "ps" => Ok(Scheme::Ps),
            "ts" => Ok(Scheme::Ts),
            "tdma" => Ok(Scheme::Tdma),
            "tdma_d" | "tdmad" => Ok(Scheme::TdmaD),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Decision variables of one scheme.
///
/// `covariances[i][j]` is the transmit covariance of Tx `i` in slot `j`,
/// `phases[j]` the phase-shift vector of slot `j` (length N+1, last entry 1).
/// `rho` holds the PS ratios for the hybrid family and is empty for TDMA.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSolution {
    pub scheme: Scheme,
    pub covariances: Vec<Vec<CMat>>,
    pub phases: Vec<CVec>,
    pub tau: Vec<f64>,
    pub rho: Vec<f64>,
}

impl SchemeSolution {
    pub fn slot_covariances(&self, slot: usize) -> Vec<CMat> {
        self.covariances.iter().map(|row| row[slot].clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeFlags {
    /// Outer iteration cap reached before the stopping rule fired.
    pub iteration_cap: bool,
    /// A subproblem solve did not return an optimal point.
    pub solver_failure: bool,
    /// A block update was discarded because it lowered the true objective
    /// or broke feasibility.
    pub rejected_step: bool,
}

impl OutcomeFlags {
    pub fn any(&self) -> bool {
        self.iteration_cap || self.solver_failure || self.rejected_step
    }
}

impl fmt::Display for OutcomeFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.iteration_cap {
            parts.push("iteration_cap");
        }
        if self.solver_failure {
            parts.push("solver_failure");
        }
        if self.rejected_step {
            parts.push("rejected_step");
        }
        f.write_str(&parts.join("|"))
    }
}

/// Result of running one scheme on one channel realization.
#[derive(Debug, Clone)]
pub struct SchemeOutcome {
    pub scheme: Scheme,
    /// `None` when the scheme is infeasible.
    pub solution: Option<SchemeSolution>,
    pub sum_rate: Option<f64>,
    pub harvested: Vec<f64>,
    pub min_eh_slack: Option<f64>,
    /// True sum rate after every accepted outer iteration, starting with the
    /// initial point.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub flags: OutcomeFlags,
}

impl SchemeOutcome {
    pub fn infeasible(scheme: Scheme) -> Self {
        Self {
            scheme,
            solution: None,
            sum_rate: None,
            harvested: Vec::new(),
            min_eh_slack: None,
            trace: Vec::new(),
            iterations: 0,
            flags: OutcomeFlags::default(),
        }
    }

    pub fn feasible(&self) -> bool {
        self.solution.is_some()
    }

    /// Sum rate with the zero-rate penalty for infeasible runs.
    pub fn penalized_rate(&self) -> f64 {
        self.sum_rate.unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("foo".parse::<Scheme>().is_err());
        assert_eq!("TDMA-D".parse::<Scheme>().unwrap(), Scheme::TdmaD);
    }

    #[test]
    fn flags_display() {
        let f = OutcomeFlags { iteration_cap: true, solver_failure: false, rejected_step: true };
        assert_eq!(f.to_string(), "iteration_cap|rejected_step");
        assert_eq!(OutcomeFlags::default().to_string(), "");
    }
}
