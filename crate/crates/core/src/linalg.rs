//! Small dense complex helpers shared by the metrics and the schemes.

use nalgebra::linalg::SymmetricEigen;

use crate::{CMat, CVec, C64};

/// Re(x^H A x).
pub fn quad_form(a: &CMat, x: &CVec) -> f64 {
    x.dotc(&(a * x)).re
}

/// Re tr(A B).
pub fn trace_product(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc.re
}

pub fn trace_re(a: &CMat) -> f64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)].re).sum()
}

/// (A + A^H) / 2.
pub fn hermitize(a: &CMat) -> CMat {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted ascending.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitize(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    hermitian_eigen(a).0
}

/// Factor F with A ≈ F F^H, keeping eigen-directions above `rel_tol · λ_max`.
/// The result has as many columns as retained eigenvalues (possibly zero).
pub fn psd_factor(a: &CMat, rel_tol: f64) -> CMat {
    let n = a.nrows();
    let (values, vectors) = hermitian_eigen(a);
    let lmax = values.last().copied().unwrap_or(0.0);
    if lmax <= 0.0 {
        return CMat::zeros(n, 0);
    }
    let keep: Vec<usize> = (0..n).filter(|&i| values[i] > rel_tol * lmax).collect();
    let mut f = CMat::zeros(n, keep.len());
    for (col, &i) in keep.iter().enumerate() {
        let s = C64::new(values[i].sqrt(), 0.0);
        f.set_column(col, &(vectors.column(i) * s));
    }
    f
}

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped).
pub fn project_psd(a: &CMat) -> CMat {
    let n = a.nrows();
    let (values, vectors) = hermitian_eigen(a);
    let mut out = CMat::zeros(n, n);
    for (i, &l) in values.iter().enumerate() {
        if l > 0.0 {
            let u = vectors.column(i);
            out += u * u.adjoint() * C64::new(l, 0.0);
        }
    }
    hermitize(&out)
}

/// P · u u^H / ‖u‖² (maximum-ratio transmission covariance). Falls back to
/// P·I/M when `u` vanishes.
pub fn mrt_covariance(u: &CVec, power: f64) -> CMat {
    let m = u.len();
    let norm_sq = u.norm_squared();
    if norm_sq <= f64::MIN_POSITIVE {
        return CMat::identity(m, m) * C64::new(power / m as f64, 0.0);
    }
    u * u.adjoint() * C64::new(power / norm_sq, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let a = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let (vals, vecs) = hermitian_eigen(&a);
        assert_relative_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 3.0, epsilon = 1e-12);
        let d = CMat::from_diagonal(&CVec::from_iterator(2, vals.iter().map(|&v| c(v, 0.0))));
        let back = &vecs * d * vecs.adjoint();
        assert!((back - a).norm() < 1e-12);
    }

    #[test]
    fn factor_of_rank_one() {
        let u = CVec::from_vec(vec![c(1.0, 1.0), c(0.5, -2.0)]);
        let a = &u * u.adjoint();
        let f = psd_factor(&a, 1e-12);
        assert_eq!(f.ncols(), 1);
        assert!((&f * f.adjoint() - a).norm() < 1e-10);
    }

    #[test]
    fn projection_clips_negative_part() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let p = project_psd(&a);
        assert_relative_eq!(p[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert!(p[(1, 1)].norm() < 1e-14);
    }

    #[test]
    fn mrt_has_full_trace() {
        let u = CVec::from_vec(vec![c(3.0, 0.0), c(0.0, 4.0)]);
        let s = mrt_covariance(&u, 0.2);
        assert_relative_eq!(trace_re(&s), 0.2, epsilon = 1e-14);
        assert_relative_eq!(quad_form(&s, &u), 0.2 * 25.0, epsilon = 1e-12);
    }
}
