//! First-order surrogates used by the SCA steps.
//!
//! Concave log terms that enter the objective with a minus sign are replaced
//! by their tangent planes (global over-estimators), while convex quadratic
//! and bilinear terms on the "large" side of a constraint are replaced by
//! their tangent planes (global under-estimators). Every surrogate is exact at
//! its expansion point.

use std::f64::consts::LN_2;

use crate::linalg::{psd_factor, quad_form};
use crate::solver::{AffExpr, ComplexVector};
use crate::{CMat, CVec, Error, Result, C64};

/// Tangent plane of `g(I, e, τ) = τ·log₂((I + c·e)/τ + s₀)` at `(Iᵗ, eᵗ, τᵗ)`.
///
/// `I` is an (already linear) interference power, `c·e` an optional extra
/// noise term proportional to a slack `e`, and `s₀ > 0` a fixed noise floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerspectiveLogUb {
    pub interf_t: f64,
    pub e_t: f64,
    pub tau_t: f64,
    /// Weight `c` of the slack term.
    pub e_weight: f64,
    pub floor: f64,
    /// Ψᵗ = (Iᵗ + c·eᵗ)/τᵗ + s₀.
    pub psi: f64,
}

impl PerspectiveLogUb {
    pub fn new(interf_t: f64, e_t: f64, tau_t: f64, e_weight: f64, floor: f64) -> Result<Self> {
        if !(tau_t > 0.0) {
            return Err(Error::CorruptedIterate(format!("expansion time fraction {tau_t} must be positive")));
        }
        let psi = (interf_t + e_weight * e_t) / tau_t + floor;
        if !(psi > 0.0) || !psi.is_finite() {
            return Err(Error::CorruptedIterate(format!("non-positive surrogate denominator {psi}")));
        }
        Ok(Self { interf_t, e_t, tau_t, e_weight, floor, psi })
    }

    pub fn exact(interf: f64, e: f64, tau: f64, e_weight: f64, floor: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        tau * ((interf + e_weight * e) / tau + floor).log2()
    }

    pub fn d_interf(&self) -> f64 {
        1.0 / (self.psi * LN_2)
    }

    pub fn d_e(&self) -> f64 {
        self.e_weight / (self.psi * LN_2)
    }

    pub fn d_tau(&self) -> f64 {
        self.psi.log2() - (self.psi - self.floor) / (self.psi * LN_2)
    }

    pub fn value(&self, interf: f64, e: f64, tau: f64) -> f64 {
        self.tau_t * self.psi.log2()
            + self.d_interf() * (interf - self.interf_t)
            + self.d_e() * (e - self.e_t)
            + self.d_tau() * (tau - self.tau_t)
    }

    /// Affine expression of the bound given expressions for I, e and τ.
    pub fn expr(&self, interf: AffExpr, e: Option<AffExpr>, tau: AffExpr) -> AffExpr {
        let mut out = AffExpr::constant(
            self.tau_t * self.psi.log2()
                - self.d_interf() * self.interf_t
                - self.d_e() * self.e_t
                - self.d_tau() * self.tau_t,
        );
        out += interf * self.d_interf();
        if let Some(e) = e {
            out += e * self.d_e();
        }
        out += tau * self.d_tau();
        out
    }
}

/// Tangent plane of `q(I) = log₂(I + σ²)` at `Iʳ`, i.e. `log₂Λ + (I − Iʳ)/(Λ ln2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogUb {
    pub interf_r: f64,
    /// Λʳ = Iʳ + σ².
    pub lambda: f64,
}

impl LogUb {
    pub fn new(interf_r: f64, sigma_sq: f64) -> Result<Self> {
        let lambda = interf_r + sigma_sq;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::CorruptedIterate(format!("non-positive surrogate denominator {lambda}")));
        }
        Ok(Self { interf_r, lambda })
    }

    pub fn exact(interf: f64, sigma_sq: f64) -> f64 {
        (interf + sigma_sq).log2()
    }

    pub fn value(&self, interf: f64) -> f64 {
        self.lambda.log2() + (interf - self.interf_r) / (self.lambda * LN_2)
    }
}

/// Lower bound of ½(e + ρ)² tangent at `(eᵗ, ρᵗ)`.
pub fn chi_lb(e_t: f64, rho_t: f64, e: f64, rho: f64) -> f64 {
    let s = e_t + rho_t;
    -0.5 * s * s + s * (e + rho)
}

pub fn chi_lb_expr(e_t: f64, rho_t: f64, e: AffExpr, rho: AffExpr) -> AffExpr {
    let s = e_t + rho_t;
    (e + rho) * s - 0.5 * s * s
}

/// Lower bound `−(zᵗ)² + 2zᵗz` of z².
pub fn zsq_lb(z_t: f64, z: f64) -> f64 {
    -z_t * z_t + 2.0 * z_t * z
}

pub fn zsq_lb_expr(z_t: f64, z: AffExpr) -> AffExpr {
    z * (2.0 * z_t) - z_t * z_t
}

/// `F_B(x, y) = x^H B x / y`.
pub fn f_quad(b: &CMat, x: &CVec, y: f64) -> f64 {
    quad_form(b, x) / y
}

/// `F^lb(x, y) = 2Re{(xᵗ)^H B x}/yᵗ − (xᵗ)^H B xᵗ·y/(yᵗ)²`.
pub fn f_quad_lb(b: &CMat, x_t: &CVec, y_t: f64, x: &CVec, y: f64) -> f64 {
    let bx = b * x_t;
    2.0 * bx.dotc(x).re / y_t - quad_form(b, x_t) * y / (y_t * y_t)
}

/// `G_B(x) = x^H B x`.
pub fn g_quad(b: &CMat, x: &CVec) -> f64 {
    quad_form(b, x)
}

/// `G^lb(x) = 2Re{(xᵗ)^H B x} − (xᵗ)^H B xᵗ`.
pub fn g_quad_lb(b: &CMat, x_t: &CVec, x: &CVec) -> f64 {
    let bx = b * x_t;
    2.0 * bx.dotc(x).re - quad_form(b, x_t)
}

/// Phase-shift variable `x = [v; 1]` of a QCQP step.
#[derive(Debug, Clone, Copy)]
pub struct PhaseVar {
    pub v: ComplexVector,
}

impl PhaseVar {
    /// Re(g^H x) for a constant `g` of length N+1.
    pub fn re_inner(&self, g: &CVec) -> AffExpr {
        let n = self.v.len();
        assert_eq!(g.len(), n + 1);
        let head = g.rows(0, n).into_owned();
        self.v.re_inner(&head) + g[n].re
    }

    /// Real parts whose squares sum to `x^H A x` for PSD `A`.
    pub fn quad_parts(&self, a: &CMat) -> Vec<AffExpr> {
        let n = self.v.len();
        let f = psd_factor(a, 1e-12);
        if f.ncols() == 0 {
            return Vec::new();
        }
        let fh = f.adjoint();
        let lin = fh.columns(0, n).into_owned();
        let offset = fh.column(n).into_owned();
        self.v.affine_image(&lin, &offset).into_iter().flat_map(|(re, im)| [re, im]).collect()
    }

    /// `F^lb` as an affine expression in (x, y).
    pub fn f_lb_expr(&self, b: &CMat, x_t: &CVec, y_t: f64, y: AffExpr) -> AffExpr {
        let g: CVec = b * x_t;
        self.re_inner(&g) * (2.0 / y_t) - y * (quad_form(b, x_t) / (y_t * y_t))
    }

    /// `G^lb` as an affine expression in x.
    pub fn g_lb_expr(&self, b: &CMat, x_t: &CVec) -> AffExpr {
        let g: CVec = b * x_t;
        self.re_inner(&g) * 2.0 - quad_form(b, x_t)
    }

    pub fn value(&self, x: &[f64]) -> CVec {
        let head = self.v.value(x);
        let n = head.len();
        CVec::from_fn(n + 1, |i, _| if i < n { head[i] } else { C64::new(1.0, 0.0) })
    }
}

/// `A = H S H^H` for a stacked channel and covariance.
pub fn lifted_gram(stacked: &CMat, s: &CMat) -> CMat {
    stacked * s * stacked.adjoint()
}
