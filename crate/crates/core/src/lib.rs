//! IRS-aided SWIPT in multi-user MISO interference channels.
//!
//! Three transmission schemes are implemented and cross-compared:
//!
//! - **hybrid TS-PS** ([`hybrid`]): an energy-harvesting slot, a power-splitting
//!   slot and an information-decoding slot, with the PS-only and TS-only
//!   restrictions as baselines;
//! - **TDMA** and **TDMA-D** ([`tdma`]): one decoding slot per receiver, with
//!   the other slots used for harvesting. TDMA-D receivers cancel the known
//!   energy signals of the other transmitters.
//!
//! Each scheme is solved by alternating optimization between a transmit
//! covariance / resource block (a semidefinite program with perspective-log
//! objective) and an IRS phase-shift block (a convex QCQP), with successive
//! convex approximation of the non-convex terms. Both kinds of subproblem go
//! through the solver-agnostic [`solver::ConicProgram`] layer.
//!
//! [`metrics`] holds the exact rate / energy evaluators every optimizer output
//! is checked against, [`feasibility`] builds feasible starting points,
//! [`diagnostics`] inspects the rank structure of converged covariances and
//! [`experiments`] runs seeded Monte Carlo sweeps.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use openblas_src as _;

extern "C" {
    fn openblas_set_num_threads(n: std::os::raw::c_int);
}

/// Pins OpenBLAS to one thread. Trials already run in parallel, and nested
/// BLAS threading only oversubscribes the cores.
pub fn limit_blas_threads() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| unsafe { openblas_set_num_threads(1) });
}

mod ao;
pub mod channel;
pub mod config;
pub mod diagnostics;
mod error;
pub mod experiments;
pub mod feasibility;
pub mod hybrid;
pub mod linalg;
pub mod metrics;
pub mod sca;
pub mod scheme;
pub mod solver;
pub mod tdma;

pub use error::{Error, Result};
pub use scheme::{Scheme, SchemeOutcome, SchemeSolution};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Complex scalar used throughout.
pub type C64 = Complex64;
/// Dense complex matrix.
pub type CMat = DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = DVector<C64>;
