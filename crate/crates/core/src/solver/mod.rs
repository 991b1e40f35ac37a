//! Solver-agnostic convex program description.
//!
//! A [`ConicProgram`] is a maximization of an affine objective over real
//! decision variables, subject to memberships of affine expressions in the
//! zero, nonnegative, second-order, exponential and PSD cones. Complex vectors
//! and Hermitian PSD matrices are declared through typed handles that map onto
//! the underlying real columns. Concave log terms enter through hypograph
//! variables (see [`ConicProgram::perspective_log2`]).

mod backend;
mod expr;
mod handles;

pub use expr::AffExpr;
pub use handles::{hermitian_embed, hermitian_unembed, ComplexVector, HermitianMatrix, RealVector, Scalar};

use std::f64::consts::LN_2;

/// Default relative tolerance handed to the conic backend.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("malformed program: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Primal point; populated for every status, meaningful for `Optimal`.
    pub x: Vec<f64>,
    /// Objective of the maximization at `x`.
    pub objective: f64,
    pub iterations: u32,
    pub solve_time: f64,
    /// Backend accepted the point only at its reduced accuracy level.
    pub reduced_accuracy: bool,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// expr = 0
    Zero(AffExpr),
    /// expr ≥ 0
    NonNeg(AffExpr),
    /// t ≥ ‖x‖₂
    Soc { t: AffExpr, x: Vec<AffExpr> },
    /// y·exp(x/y) ≤ z, y > 0 (closure at y = 0)
    Exp { x: AffExpr, y: AffExpr, z: AffExpr },
    /// Symmetric `dim × dim` matrix, upper triangle by columns with
    /// off-diagonals scaled by √2, is PSD.
    Psd { dim: usize, svec: Vec<AffExpr> },
}

#[derive(Debug, Clone, Default)]
pub struct ConicProgram {
    n: usize,
    nonneg: Vec<bool>,
    objective: AffExpr,
    constraints: Vec<Constraint>,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &AffExpr {
        &self.objective
    }

    fn alloc(&mut self, count: usize) -> usize {
        let start = self.n;
        self.n += count;
        self.nonneg.resize(self.n, false);
        start
    }

    pub fn scalar(&mut self) -> Scalar {
        Scalar(self.alloc(1))
    }

    /// Scalar with an implied `x ≥ 0` constraint.
    pub fn nonneg_scalar(&mut self) -> Scalar {
        let s = self.scalar();
        self.nonneg[s.0] = true;
        self.constraints.push(Constraint::NonNeg(s.expr()));
        s
    }

    pub fn real_vector(&mut self, len: usize) -> RealVector {
        RealVector { start: self.alloc(len), len }
    }

    /// Complex vector stored as interleaved (re, im) columns.
    pub fn complex_vector(&mut self, len: usize) -> ComplexVector {
        ComplexVector { start: self.alloc(2 * len), len }
    }

    /// Hermitian `dim × dim` matrix variable constrained PSD through its real
    /// `2·dim` embedding.
    pub fn hermitian_psd(&mut self, dim: usize) -> HermitianMatrix {
        let w = HermitianMatrix { start: self.alloc(dim * dim), dim };
        if dim > 0 {
            let svec = w.embedding_svec();
            self.constraints.push(Constraint::Psd { dim: 2 * dim, svec });
        }
        w
    }

    pub fn maximize(&mut self, objective: AffExpr) {
        self.objective = objective;
    }

    pub fn add_eq(&mut self, lhs: AffExpr, rhs: AffExpr) {
        self.constraints.push(Constraint::Zero(lhs - rhs));
    }

    /// lhs ≤ rhs
    pub fn add_le(&mut self, lhs: AffExpr, rhs: AffExpr) {
        self.constraints.push(Constraint::NonNeg(rhs - lhs));
    }

    /// lhs ≥ rhs
    pub fn add_ge(&mut self, lhs: AffExpr, rhs: AffExpr) {
        self.constraints.push(Constraint::NonNeg(lhs - rhs));
    }

    pub fn add_soc(&mut self, t: AffExpr, x: Vec<AffExpr>) {
        self.constraints.push(Constraint::Soc { t, x });
    }

    pub fn add_exp(&mut self, x: AffExpr, y: AffExpr, z: AffExpr) {
        self.constraints.push(Constraint::Exp { x, y, z });
    }

    pub fn add_psd(&mut self, dim: usize, svec: Vec<AffExpr>) {
        self.constraints.push(Constraint::Psd { dim, svec });
    }

    /// Returns an expression `t` constrained by `t ≤ τ·log₂(x/τ)`, with value
    /// `t ≤ 0` at `τ = 0`. `tau` must be certifiably nonnegative: a
    /// nonnegative constant plus positive multiples of nonneg scalars.
    pub fn perspective_log2(&mut self, tau: AffExpr, x: AffExpr) -> Result<AffExpr, SolverError> {
        if !self.certified_nonneg(&tau) {
            return Err(SolverError::Malformed("perspective term with uncertified τ ≥ 0".into()));
        }
        let t = self.scalar();
        // τ·log(x/τ) ≥ t·ln2  ⇔  (t·ln2, τ, x) ∈ K_exp
        self.add_exp(t.expr() * LN_2, tau, x);
        Ok(t.expr())
    }

    /// `t ≤ log₂(1 + μ)`.
    pub fn log2_one_plus(&mut self, mu: AffExpr) -> AffExpr {
        self.perspective_log2(AffExpr::constant(1.0), mu + 1.0).expect("unit perspective weight is nonnegative")
    }

    /// Σ xᵢ² ≤ rhs, as ‖(2x, rhs − 1)‖ ≤ rhs + 1.
    pub fn sum_squares_le(&mut self, x: Vec<AffExpr>, rhs: AffExpr) {
        let mut parts: Vec<AffExpr> = x.into_iter().map(|e| e * 2.0).collect();
        parts.push(rhs.clone() - 1.0);
        self.add_soc(rhs + 1.0, parts);
    }

    /// z² ≤ u·w with u, w ≥ 0, as ‖(2z, u − w)‖ ≤ u + w.
    pub fn square_le_product(&mut self, z: AffExpr, u: AffExpr, w: AffExpr) {
        self.add_soc(u.clone() + w.clone(), vec![z * 2.0, u - w]);
    }

    fn certified_nonneg(&self, e: &AffExpr) -> bool {
        e.constant_term() >= 0.0 && e.terms().iter().all(|&(i, c)| i < self.n && self.nonneg[i] && c > 0.0)
    }

    fn validate(&self) -> Result<(), SolverError> {
        let check = |e: &AffExpr| -> Result<(), SolverError> {
            if !e.constant_term().is_finite() {
                return Err(SolverError::Malformed("non-finite constant".into()));
            }
            for &(i, c) in e.terms() {
                if i >= self.n {
                    return Err(SolverError::Malformed(format!("undeclared variable {i}")));
                }
                if !c.is_finite() {
                    return Err(SolverError::Malformed(format!("non-finite coefficient on variable {i}")));
                }
            }
            Ok(())
        };
        check(&self.objective)?;
        for c in &self.constraints {
            match c {
                Constraint::Zero(e) | Constraint::NonNeg(e) => check(e)?,
                Constraint::Soc { t, x } => {
                    check(t)?;
                    x.iter().try_for_each(check)?;
                }
                Constraint::Exp { x, y, z } => {
                    check(x)?;
                    check(y)?;
                    check(z)?;
                }
                Constraint::Psd { dim, svec } => {
                    if svec.len() != dim * (dim + 1) / 2 {
                        return Err(SolverError::Malformed(format!(
                            "PSD block of dimension {dim} needs {} entries, got {}",
                            dim * (dim + 1) / 2,
                            svec.len()
                        )));
                    }
                    svec.iter().try_for_each(check)?;
                }
            }
        }
        Ok(())
    }

    /// Solves the program with relative tolerance `tol`. Backend trouble is
    /// reported through the status, never as an error.
    pub fn solve(&self, tol: f64) -> Result<SolveResult, SolverError> {
        self.validate()?;
        if !(tol > 0.0) {
            return Err(SolverError::Malformed(format!("tolerance must be positive, got {tol}")));
        }
        Ok(backend::solve(self, tol))
    }
}
