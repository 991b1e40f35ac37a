//! Clarabel backend: `min q'x s.t. Ax + s = b, s ∈ K`.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};

use super::{AffExpr, ConicProgram, Constraint, SolveResult, SolveStatus};

struct Rows {
    i: Vec<usize>,
    j: Vec<usize>,
    v: Vec<f64>,
    b: Vec<f64>,
}

impl Rows {
    // s = e(x) = a'x + c  ⇒  −a'x + s = c
    fn push(&mut self, e: &AffExpr) {
        let row = self.b.len();
        for &(col, c) in e.terms() {
            if c != 0.0 {
                self.i.push(row);
                self.j.push(col);
                self.v.push(-c);
            }
        }
        self.b.push(e.constant_term());
    }
}

fn trivial(program: &ConicProgram) -> SolveResult {
    let x: Vec<f64> = Vec::new();
    let ok = program.constraints().iter().all(|c| match c {
        Constraint::Zero(e) => e.eval(&x).abs() <= 1e-12,
        Constraint::NonNeg(e) => e.eval(&x) >= 0.0,
        Constraint::Soc { t, x: parts } => t.eval(&x) >= parts.iter().map(|p| p.eval(&x).powi(2)).sum::<f64>().sqrt(),
        Constraint::Exp { x: a, y, z } => {
            let (a, y, z) = (a.eval(&x), y.eval(&x), z.eval(&x));
            (y > 0.0 && y * (a / y).exp() <= z) || (y == 0.0 && a <= 0.0 && z >= 0.0)
        }
        Constraint::Psd { svec, .. } => svec.iter().all(|e| e.eval(&x) == 0.0),
    });
    SolveResult {
        status: if ok { SolveStatus::Optimal } else { SolveStatus::Infeasible },
        x,
        objective: program.objective().constant_term(),
        iterations: 0,
        solve_time: 0.0,
        reduced_accuracy: false,
    }
}

pub(super) fn solve(program: &ConicProgram, tol: f64) -> SolveResult {
    let n = program.num_vars();
    if n == 0 {
        return trivial(program);
    }

    let mut rows = Rows { i: Vec::new(), j: Vec::new(), v: Vec::new(), b: Vec::new() };
    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();

    // Group the linear cones so each becomes a single block.
    let zeros: Vec<&AffExpr> =
        program.constraints().iter().filter_map(|c| if let Constraint::Zero(e) = c { Some(e) } else { None }).collect();
    let nonnegs: Vec<&AffExpr> = program
        .constraints()
        .iter()
        .filter_map(|c| if let Constraint::NonNeg(e) = c { Some(e) } else { None })
        .collect();
    if !zeros.is_empty() {
        zeros.iter().for_each(|e| rows.push(e));
        cones.push(SupportedConeT::ZeroConeT(zeros.len()));
    }
    if !nonnegs.is_empty() {
        nonnegs.iter().for_each(|e| rows.push(e));
        cones.push(SupportedConeT::NonnegativeConeT(nonnegs.len()));
    }
    for c in program.constraints() {
        match c {
            Constraint::Zero(_) | Constraint::NonNeg(_) => {}
            Constraint::Soc { t, x } => {
                rows.push(t);
                x.iter().for_each(|e| rows.push(e));
                cones.push(SupportedConeT::SecondOrderConeT(x.len() + 1));
            }
            Constraint::Exp { x, y, z } => {
                rows.push(x);
                rows.push(y);
                rows.push(z);
                cones.push(SupportedConeT::ExponentialConeT());
            }
            Constraint::Psd { dim, svec } => {
                svec.iter().for_each(|e| rows.push(e));
                cones.push(SupportedConeT::PSDTriangleConeT(*dim));
            }
        }
    }

    let m = rows.b.len();
    let a = CscMatrix::new_from_triplets(m, n, rows.i, rows.j, rows.v);
    let p = CscMatrix::zeros((n, n));
    let mut q = vec![0.0; n];
    for &(col, c) in program.objective().terms() {
        q[col] -= c;
    }

    let settings = DefaultSettings::<f64> {
        verbose: false,
        tol_gap_abs: tol,
        tol_gap_rel: tol,
        tol_feas: tol,
        max_iter: 400,
        max_threads: 1,
        ..DefaultSettings::default()
    };

    let failure = |x: Vec<f64>| SolveResult {
        status: SolveStatus::NumericalFailure,
        x,
        objective: f64::NAN,
        iterations: 0,
        solve_time: 0.0,
        reduced_accuracy: false,
    };

    let mut solver = match DefaultSolver::new(&p, &q, &a, &rows.b, &cones, settings) {
        Ok(s) => s,
        Err(_) => return failure(vec![f64::NAN; n]),
    };
    solver.solve();
    let sol = &solver.solution;
    let (status, reduced) = match sol.status {
        SolverStatus::Solved => (SolveStatus::Optimal, false),
        SolverStatus::AlmostSolved => (SolveStatus::Optimal, true),
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => (SolveStatus::Infeasible, false),
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => (SolveStatus::Unbounded, false),
        other => {
            log::debug!("conic solver stopped with {other:?} after {} iterations", sol.iterations);
            (SolveStatus::NumericalFailure, false)
        }
    };
    let x = sol.x.clone();
    let objective = program.objective().eval(&x);
    SolveResult {
        status,
        x,
        objective,
        iterations: sol.iterations,
        solve_time: sol.solve_time,
        reduced_accuracy: reduced,
    }
}
