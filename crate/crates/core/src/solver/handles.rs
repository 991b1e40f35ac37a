use nalgebra::DMatrix;

use super::AffExpr;
use crate::{CMat, CVec, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scalar(pub(crate) usize);

impl Scalar {
    pub fn index(self) -> usize {
        self.0
    }

    pub fn expr(self) -> AffExpr {
        AffExpr::var(self.0)
    }

    pub fn value(self, x: &[f64]) -> f64 {
        x[self.0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RealVector {
    pub(crate) start: usize,
    pub(crate) len: usize,
}

impl RealVector {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn at(&self, i: usize) -> AffExpr {
        assert!(i < self.len);
        AffExpr::var(self.start + i)
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        x[self.start..self.start + self.len].to_vec()
    }
}

/// Complex vector with interleaved (re, im) columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexVector {
    pub(crate) start: usize,
    pub(crate) len: usize,
}

impl ComplexVector {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn re(&self, i: usize) -> AffExpr {
        assert!(i < self.len);
        AffExpr::var(self.start + 2 * i)
    }

    pub fn im(&self, i: usize) -> AffExpr {
        assert!(i < self.len);
        AffExpr::var(self.start + 2 * i + 1)
    }

    pub fn value(&self, x: &[f64]) -> CVec {
        CVec::from_fn(self.len, |i, _| C64::new(x[self.start + 2 * i], x[self.start + 2 * i + 1]))
    }

    /// Re(c^H v).
    pub fn re_inner(&self, c: &CVec) -> AffExpr {
        assert_eq!(c.len(), self.len);
        let mut e = AffExpr::zero();
        for (i, ci) in c.iter().enumerate() {
            e.add_term(self.start + 2 * i, ci.re);
            e.add_term(self.start + 2 * i + 1, ci.im);
        }
        e
    }

    /// Real and imaginary parts of `A·v + b`, row by row.
    pub fn affine_image(&self, a: &CMat, b: &CVec) -> Vec<(AffExpr, AffExpr)> {
        assert_eq!(a.ncols(), self.len);
        assert_eq!(a.nrows(), b.len());
        (0..a.nrows())
            .map(|r| {
                let mut re = AffExpr::constant(b[r].re);
                let mut im = AffExpr::constant(b[r].im);
                for n in 0..self.len {
                    let m = a[(r, n)];
                    let (vr, vi) = (self.start + 2 * n, self.start + 2 * n + 1);
                    re.add_term(vr, m.re);
                    re.add_term(vi, -m.im);
                    im.add_term(vr, m.im);
                    im.add_term(vi, m.re);
                }
                (re, im)
            })
            .collect()
    }
}

/// Hermitian matrix variable. Columns: the `dim` real diagonal entries, then
/// (re, im) of each strictly upper entry in row-major order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HermitianMatrix {
    pub(crate) start: usize,
    pub(crate) dim: usize,
}

impl HermitianMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    fn upper_index(&self, p: usize, q: usize) -> usize {
        debug_assert!(p < q);
        // pairs before row p: Σ_{r<p} (dim − 1 − r)
        let before = p * (2 * self.dim - p - 1) / 2;
        self.start + self.dim + 2 * (before + (q - p - 1))
    }

    /// (Re W_pq, Im W_pq).
    pub fn entry(&self, p: usize, q: usize) -> (AffExpr, AffExpr) {
        assert!(p < self.dim && q < self.dim);
        if p == q {
            (AffExpr::var(self.start + p), AffExpr::zero())
        } else if p < q {
            let k = self.upper_index(p, q);
            (AffExpr::var(k), AffExpr::var(k + 1))
        } else {
            let k = self.upper_index(q, p);
            (AffExpr::var(k), AffExpr::term(k + 1, -1.0))
        }
    }

    pub fn trace(&self) -> AffExpr {
        let mut e = AffExpr::zero();
        for p in 0..self.dim {
            e.add_term(self.start + p, 1.0);
        }
        e
    }

    /// Re tr(B W) for a constant complex B.
    pub fn re_trace_with(&self, b: &CMat) -> AffExpr {
        assert_eq!(b.nrows(), self.dim);
        assert_eq!(b.ncols(), self.dim);
        let mut e = AffExpr::zero();
        for p in 0..self.dim {
            e.add_term(self.start + p, b[(p, p)].re);
            for q in p + 1..self.dim {
                // B_pq W_qp + B_qp W_pq with W_qp = conj(W_pq)
                let k = self.upper_index(p, q);
                let s = b[(q, p)] + b[(p, q)];
                let d = b[(q, p)] - b[(p, q)];
                e.add_term(k, s.re);
                e.add_term(k + 1, -d.im);
            }
        }
        e
    }

    /// Upper triangle (column-wise, off-diagonals ×√2) of the real embedding
    /// `[[X, −Y], [Y, X]]` of W = X + iY.
    pub(crate) fn embedding_svec(&self) -> Vec<AffExpr> {
        let m = self.dim;
        let entry = |r: usize, c: usize| -> AffExpr {
            let (rb, p) = (r / m, r % m);
            let (cb, q) = (c / m, c % m);
            let (x, y) = self.entry(p, q);
            match (rb, cb) {
                (0, 0) | (1, 1) => x,
                (0, 1) => -y,
                _ => y,
            }
        };
        let mut out = Vec::with_capacity(m * (2 * m + 1));
        for c in 0..2 * m {
            for r in 0..=c {
                let e = entry(r, c);
                out.push(if r == c { e } else { e * std::f64::consts::SQRT_2 });
            }
        }
        out
    }

    pub fn value(&self, x: &[f64]) -> CMat {
        CMat::from_fn(self.dim, self.dim, |p, q| {
            let (re, im) = self.entry(p, q);
            C64::new(re.eval(x), im.eval(x))
        })
    }
}

/// Real symmetric `2n × 2n` embedding `[[X, −Y], [Y, X]]` of `A = X + iY`.
pub fn hermitian_embed(a: &CMat) -> DMatrix<f64> {
    let n = a.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = a[(r % n, c % n)];
        match (r / n, c / n) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    })
}

/// Inverse of [`hermitian_embed`] (reads the left block column).
pub fn hermitian_unembed(z: &DMatrix<f64>) -> CMat {
    let n = z.nrows() / 2;
    CMat::from_fn(n, n, |p, q| C64::new(z[(p, q)], z[(n + p, q)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, trace_product};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> CMat {
        let g = CMat::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        &g * g.adjoint()
    }

    #[test]
    fn embedding_round_trip_and_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_psd(&mut rng, 3);
        let z = hermitian_embed(&a);
        assert!((hermitian_unembed(&z) - &a).norm() < 1e-12);
        let mut ev: Vec<f64> = z.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let orig = hermitian_eigenvalues(&a);
        for (i, l) in orig.iter().enumerate() {
            assert!((ev[2 * i] - l).abs() < 1e-10 && (ev[2 * i + 1] - l).abs() < 1e-10);
        }
        assert_eq!(hermitian_embed(&CMat::identity(2, 2)), DMatrix::identity(4, 4));
        assert_eq!(hermitian_embed(&CMat::zeros(2, 2)), DMatrix::zeros(4, 4));
    }

    #[test]
    fn variable_layout_matches_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = HermitianMatrix { start: 2, dim: 3 };
        let x: Vec<f64> = (0..11).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let wv = w.value(&x);
        assert!((&wv - wv.adjoint()).norm() < 1e-15);
        let b = CMat::from_fn(3, 3, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        assert!((w.re_trace_with(&b).eval(&x) - trace_product(&b, &wv)).abs() < 1e-12);
        // the svec of the variable equals the svec of the numeric embedding
        let z = hermitian_embed(&wv);
        let svec = w.embedding_svec();
        let mut k = 0;
        for c in 0..6 {
            for r in 0..=c {
                let scale = if r == c { 1.0 } else { std::f64::consts::SQRT_2 };
                assert!((svec[k].eval(&x) - scale * z[(r, c)]).abs() < 1e-12);
                k += 1;
            }
        }
    }

    #[test]
    fn complex_vector_maps() {
        let v = ComplexVector { start: 0, len: 2 };
        let x = [1.0, 2.0, -0.5, 0.25];
        let val = v.value(&x);
        let a = CMat::from_row_slice(1, 2, &[C64::new(0.3, -1.0), C64::new(2.0, 0.5)]);
        let b = CVec::from_vec(vec![C64::new(0.1, 0.2)]);
        let img = v.affine_image(&a, &b);
        let expect = &a * &val + &b;
        assert!((img[0].0.eval(&x) - expect[0].re).abs() < 1e-14);
        assert!((img[0].1.eval(&x) - expect[0].im).abs() < 1e-14);
        let c = CVec::from_vec(vec![C64::new(0.7, 0.1), C64::new(-0.2, 0.9)]);
        assert!((v.re_inner(&c).eval(&x) - c.dotc(&val).re).abs() < 1e-14);
    }
}
