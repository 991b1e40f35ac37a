//! Physical and algorithmic parameters of one simulated network.

use serde::{Deserialize, Serialize};

use crate::channel::{FadingParams, Geometry};
use crate::metrics::NoiseAndPower;
use crate::{Error, Result};

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Tolerances and caps shared by every AO / SCA solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AoSettings {
    /// Stop once the fractional objective increase falls below this.
    pub epsilon: f64,
    pub max_outer_iters: usize,
    /// Relative tolerance of every conic solve.
    pub solver_tol: f64,
    /// Lower clamp for τ, ρ and e at SCA expansion points.
    pub expansion_floor: f64,
    /// Slots with τ at or below this carry no covariance.
    pub tau_zero_tol: f64,
    pub feasibility_epsilon: f64,
    pub feasibility_max_iters: usize,
}

impl Default for AoSettings {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            max_outer_iters: 100,
            solver_tol: 1e-8,
            expansion_floor: 1e-8,
            tau_zero_tol: 1e-6,
            feasibility_epsilon: 1e-4,
            feasibility_max_iters: 50,
        }
    }
}

impl AoSettings {
    pub fn validate(&self) -> Result<()> {
        let positive =
            [self.epsilon, self.solver_tol, self.expansion_floor, self.tau_zero_tol, self.feasibility_epsilon];
        if positive.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Config("AO tolerances must be positive".into()));
        }
        if self.max_outer_iters == 0 || self.feasibility_max_iters == 0 {
            return Err(Error::Config("iteration caps must be at least 1".into()));
        }
        Ok(())
    }
}

/// One fully specified network: geometry, antennas, fading, powers, noise,
/// EH targets and solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub geometry: Geometry,
    /// Transmit antennas per Tx.
    pub m: usize,
    pub fading: FadingParams,
    pub power_dbm: f64,
    pub sigma_ant_sq: f64,
    pub sigma_proc_sq: f64,
    pub zeta: f64,
    /// Per-Rx EH requirement in watts.
    pub eh_target: f64,
    pub ao: AoSettings,
}

impl ScenarioConfig {
    /// Defaults of the reference setup for a given geometry.
    pub fn with_geometry(geometry: Geometry) -> Self {
        Self {
            geometry,
            m: 2,
            fading: FadingParams::default(),
            power_dbm: 23.0,
            sigma_ant_sq: 0.5e-8,
            sigma_proc_sq: 0.5e-8,
            zeta: 0.7,
            eh_target: 0.5e-6,
            ao: AoSettings::default(),
        }
    }

    pub fn noise(&self) -> NoiseAndPower {
        NoiseAndPower::uniform(
            self.geometry.k,
            dbm_to_watt(self.power_dbm),
            self.sigma_ant_sq,
            self.sigma_proc_sq,
            self.zeta,
            self.eh_target,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.fading.validate()?;
        self.ao.validate()?;
        if self.m == 0 {
            return Err(Error::Config("M must be at least 1".into()));
        }
        self.noise().validate(self.geometry.k)
    }
}
