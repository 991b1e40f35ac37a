//! Node geometry, large-scale path loss, small-scale fading and the composed
//! channel matrices.
//!
//! Coordinates are spherical `(radius, azimuth, polar)` with the polar angle
//! measured from +z, so polar π/2 lies in the ground plane. Tx `k` and Rx `k`
//! share the azimuth `2π(k-1)/K` (Tx shifted by π when `d_T < 0`). A
//! distributed IRS sits `d_I` straight above its Rx; the centralized IRS sits
//! on the +z axis at height `d_I`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{CMat, CVec, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deployment {
    Distributed,
    Centralized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Number of Tx-Rx pairs.
    pub k: usize,
    /// Tx radial distance in metres; negative values mirror the Tx through the origin.
    pub d_t: f64,
    /// Rx radial distance in metres.
    pub d_r: f64,
    /// IRS height above its anchor in metres.
    pub d_i: f64,
    pub deployment: Deployment,
    /// Total reflecting elements across all IRSs.
    pub n_total: usize,
}

impl Geometry {
    pub fn new(k: usize, d_t: f64, d_r: f64, d_i: f64, deployment: Deployment, n_total: usize) -> Result<Self> {
        let g = Self { k, d_t, d_r, d_i, deployment, n_total };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidGeometry("K must be at least 1".into()));
        }
        if !(self.d_r > 0.0) || !(self.d_i > 0.0) || !self.d_t.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "need d_R > 0, d_I > 0 and finite d_T (got d_R={}, d_I={}, d_T={})",
                self.d_r, self.d_i, self.d_t
            )));
        }
        if self.deployment == Deployment::Distributed && !self.n_total.is_multiple_of(self.k) {
            return Err(Error::InvalidGeometry(format!(
                "distributed deployment needs N divisible by K (N={}, K={})",
                self.n_total, self.k
            )));
        }
        Ok(())
    }

    /// Number of IRSs L.
    pub fn irs_count(&self) -> usize {
        match self.deployment {
            Deployment::Distributed => self.k,
            Deployment::Centralized => 1,
        }
    }

    /// Elements per IRS (N_ℓ), summing to `n_total`.
    pub fn elements_per_irs(&self) -> Vec<usize> {
        let l = self.irs_count();
        vec![self.n_total / l; l]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn from_spherical(radius: f64, azimuth: f64, polar: f64) -> Self {
        Self {
            x: radius * polar.sin() * azimuth.cos(),
            y: radius * polar.sin() * azimuth.sin(),
            z: radius * polar.cos(),
        }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodePositions {
    pub tx: Vec<Point3>,
    pub rx: Vec<Point3>,
    pub irs: Vec<Point3>,
}

pub fn place_nodes(geometry: &Geometry) -> NodePositions {
    use std::f64::consts::{FRAC_PI_2, PI};
    let k = geometry.k;
    let azimuth = |idx: usize| 2.0 * PI * idx as f64 / k as f64;
    let tx = (0..k)
        .map(|i| {
            let shift = if geometry.d_t < 0.0 { PI } else { 0.0 };
            Point3::from_spherical(geometry.d_t.abs(), azimuth(i) + shift, FRAC_PI_2)
        })
        .collect();
    let rx: Vec<Point3> = (0..k).map(|i| Point3::from_spherical(geometry.d_r, azimuth(i), FRAC_PI_2)).collect();
    let irs = match geometry.deployment {
        Deployment::Distributed => rx.iter().map(|p| Point3 { x: p.x, y: p.y, z: p.z + geometry.d_i }).collect(),
        Deployment::Centralized => vec![Point3::from_spherical(geometry.d_i, FRAC_PI_2, 0.0)],
    };
    NodePositions { tx, rx, irs }
}

/// Line-of-sight structure of the Rician links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LosModel {
    /// Rank-one all-ones matrix / vector.
    #[default]
    AllOnes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FadingParams {
    /// Path loss at the 1 m reference distance, in dB.
    pub pl_ref_db: f64,
    /// Exponent for IRS-related links.
    pub alpha_irs: f64,
    /// Exponent for all other links.
    pub alpha_direct: f64,
    /// Rician factor of IRS-related links, in dB.
    pub rician_db: f64,
    pub los: LosModel,
}

impl Default for FadingParams {
    fn default() -> Self {
        Self { pl_ref_db: -30.0, alpha_irs: 2.2, alpha_direct: 3.5, rician_db: 3.0, los: LosModel::AllOnes }
    }
}

impl FadingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_irs >= 0.0) || !(self.alpha_direct >= 0.0) {
            return Err(Error::InvalidParameter("path-loss exponents must be non-negative".into()));
        }
        if !self.pl_ref_db.is_finite() || !self.rician_db.is_finite() {
            return Err(Error::InvalidParameter("fading parameters must be finite".into()));
        }
        Ok(())
    }

    pub fn reference_gain(&self) -> f64 {
        10f64.powf(self.pl_ref_db / 10.0)
    }

    pub fn rician_factor(&self) -> f64 {
        10f64.powf(self.rician_db / 10.0)
    }
}

/// Linear power gain `10^(pl_ref/10) · d^(-α)`; distances below 1 m are clamped to 1 m.
pub fn path_loss(distance: f64, exponent: f64, params: &FadingParams) -> Result<f64> {
    let d = if distance < 1.0 { 1.0 } else { distance };
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidParameter(format!("distance must be positive, got {distance}")));
    }
    Ok(params.reference_gain() * d.powf(-exponent))
}

/// One realization of every channel in the network.
///
/// Index conventions: `h[i][k]` Tx i → Rx k, `g[i][l]` Tx i → IRS l,
/// `f[l][k]` IRS l → Rx k, `phi[i][l][k]` cascaded, `stacked[i][k]` the
/// `(N+1) × M` matrix whose last row is `h[i][k]^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub k: usize,
    pub m: usize,
    pub n_per_irs: Vec<usize>,
    pub h: Vec<Vec<CVec>>,
    pub g: Vec<Vec<CMat>>,
    pub f: Vec<Vec<CVec>>,
    pub phi: Vec<Vec<Vec<CMat>>>,
    pub stacked: Vec<Vec<CMat>>,
}

impl ChannelSet {
    pub fn n_total(&self) -> usize {
        self.n_per_irs.iter().sum()
    }

    /// Length of a phase-shift vector (N + 1).
    pub fn phase_len(&self) -> usize {
        self.n_total() + 1
    }

    /// Builds a channel set from raw links and populates the cascaded and
    /// stacked matrices.
    pub fn from_links(m: usize, h: Vec<Vec<CVec>>, g: Vec<Vec<CMat>>, f: Vec<Vec<CVec>>) -> Result<Self> {
        let k = h.len();
        let n_per_irs = f.iter().map(|row| row.first().map_or(0, |v| v.len())).collect();
        cascade_and_stack(ChannelSet { k, m, n_per_irs, h, g, f, phi: Vec::new(), stacked: Vec::new() })
    }
}

fn cn(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn rician(rng: &mut ChaCha8Rng, kappa: f64, gain: f64) -> C64 {
    let los = C64::new(1.0, 0.0);
    let nlos = cn(rng);
    (los * (kappa / (1.0 + kappa)).sqrt() + nlos * (1.0 / (1.0 + kappa)).sqrt()) * gain.sqrt()
}

/// Draws one channel realization. Draw order is fixed (all `h`, then all
/// `G`, then all `f`, each in row-major order), so the result is a pure
/// function of the arguments.
pub fn sample_channels(seed: u64, geometry: &Geometry, fading: &FadingParams, m: usize) -> Result<ChannelSet> {
    geometry.validate()?;
    fading.validate()?;
    if m == 0 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    let pos = place_nodes(geometry);
    let k = geometry.k;
    let n_per_irs = geometry.elements_per_irs();
    let l = n_per_irs.len();
    let kappa = fading.rician_factor();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut h = vec![Vec::with_capacity(k); k];
    for (i, row) in h.iter_mut().enumerate() {
        for rx in &pos.rx {
            let pl = path_loss(pos.tx[i].distance(rx), fading.alpha_direct, fading)?;
            row.push(CVec::from_fn(m, |_, _| cn(&mut rng) * pl.sqrt()));
        }
    }
    let mut g = vec![Vec::with_capacity(l); k];
    for (i, row) in g.iter_mut().enumerate() {
        for (ell, irs) in pos.irs.iter().enumerate() {
            let pl = path_loss(pos.tx[i].distance(irs), fading.alpha_irs, fading)?;
            let mut mat = CMat::zeros(n_per_irs[ell], m);
            for r in 0..n_per_irs[ell] {
                for c in 0..m {
                    mat[(r, c)] = rician(&mut rng, kappa, pl);
                }
            }
            row.push(mat);
        }
    }
    let mut f = vec![Vec::with_capacity(k); l];
    for (ell, row) in f.iter_mut().enumerate() {
        for rx in &pos.rx {
            let pl = path_loss(pos.irs[ell].distance(rx), fading.alpha_irs, fading)?;
            row.push(CVec::from_fn(n_per_irs[ell], |_, _| rician(&mut rng, kappa, pl)));
        }
    }
    cascade_and_stack(ChannelSet { k, m, n_per_irs, h, g, f, phi: Vec::new(), stacked: Vec::new() })
}

/// Populates `phi[i][l][k] = diag(f[l][k]^H) · G[i][l]` and the stacked
/// `H[i][k] = [phi[i][1][k]; …; phi[i][L][k]; h[i][k]^H]`.
pub fn cascade_and_stack(mut channels: ChannelSet) -> Result<ChannelSet> {
    let k = channels.k;
    let m = channels.m;
    let l = channels.n_per_irs.len();
    if channels.h.len() != k || channels.h.iter().any(|row| row.len() != k) {
        return Err(Error::DimensionMismatch("direct channels must be K × K".into()));
    }
    if channels.h.iter().flatten().any(|v| v.len() != m) {
        return Err(Error::DimensionMismatch("direct channel length must equal M".into()));
    }
    if channels.g.len() != k || channels.g.iter().any(|row| row.len() != l) {
        return Err(Error::DimensionMismatch("Tx→IRS channels must be K × L".into()));
    }
    if channels.f.len() != l || channels.f.iter().any(|row| row.len() != k) {
        return Err(Error::DimensionMismatch("IRS→Rx channels must be L × K".into()));
    }
    for ell in 0..l {
        let n = channels.n_per_irs[ell];
        if channels.g.iter().any(|row| row[ell].shape() != (n, m)) || channels.f[ell].iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch(format!("IRS {ell} link sizes disagree with N_ℓ={n}")));
        }
    }

    let n_total = channels.n_total();
    let mut phi = vec![vec![Vec::with_capacity(k); l]; k];
    let mut stacked = vec![Vec::with_capacity(k); k];
    for i in 0..k {
        for ell in 0..l {
            for kk in 0..k {
                let fv = &channels.f[ell][kk];
                let gm = &channels.g[i][ell];
                let mut p = gm.clone();
                for r in 0..p.nrows() {
                    let s = fv[r].conj();
                    for c in 0..m {
                        p[(r, c)] = gm[(r, c)] * s;
                    }
                }
                phi[i][ell].push(p);
            }
        }
        for kk in 0..k {
            let mut hm = CMat::zeros(n_total + 1, m);
            let mut row = 0;
            for ell in 0..l {
                let p = &phi[i][ell][kk];
                hm.view_mut((row, 0), p.shape()).copy_from(p);
                row += p.nrows();
            }
            let hv = &channels.h[i][kk];
            for c in 0..m {
                hm[(n_total, c)] = hv[c].conj();
            }
            stacked[i].push(hm);
        }
    }
    channels.phi = phi;
    channels.stacked = stacked;
    Ok(channels)
}
