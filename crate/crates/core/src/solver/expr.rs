use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Sparse affine expression `Σ cᵢ·xᵢ + c₀` over the program's real columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffExpr {
    terms: Vec<(usize, f64)>,
    constant: f64,
}

impl AffExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn var(index: usize) -> Self {
        Self { terms: vec![(index, 1.0)], constant: 0.0 }
    }

    pub fn term(index: usize, coef: f64) -> Self {
        Self { terms: vec![(index, coef)], constant: 0.0 }
    }

    pub fn terms(&self) -> &[(usize, f64)] {
        &self.terms
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|&(_, c)| c == 0.0)
    }

    pub fn add_term(&mut self, index: usize, coef: f64) {
        if coef != 0.0 {
            self.terms.push((index, coef));
        }
    }

    pub fn add_scaled(&mut self, other: &AffExpr, scale: f64) {
        if scale == 0.0 {
            return;
        }
        self.terms.extend(other.terms.iter().map(|&(i, c)| (i, c * scale)));
        self.constant += other.constant * scale;
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().fold(self.constant, |acc, &(i, c)| acc + c * x[i])
    }

    pub fn sum<I: IntoIterator<Item = AffExpr>>(items: I) -> AffExpr {
        items.into_iter().fold(AffExpr::zero(), |acc, e| acc + e)
    }
}

impl From<f64> for AffExpr {
    fn from(c: f64) -> Self {
        AffExpr::constant(c)
    }
}

impl AddAssign<&AffExpr> for AffExpr {
    fn add_assign(&mut self, rhs: &AffExpr) {
        self.add_scaled(rhs, 1.0);
    }
}

impl AddAssign for AffExpr {
    fn add_assign(&mut self, rhs: AffExpr) {
        if self.terms.is_empty() {
            let c = self.constant;
            *self = rhs;
            self.constant += c;
        } else {
            self.terms.extend(rhs.terms);
            self.constant += rhs.constant;
        }
    }
}

impl AddAssign<f64> for AffExpr {
    fn add_assign(&mut self, rhs: f64) {
        self.constant += rhs;
    }
}

impl SubAssign<&AffExpr> for AffExpr {
    fn sub_assign(&mut self, rhs: &AffExpr) {
        self.add_scaled(rhs, -1.0);
    }
}

impl SubAssign for AffExpr {
    fn sub_assign(&mut self, rhs: AffExpr) {
        self.add_scaled(&rhs, -1.0);
    }
}

impl Add for AffExpr {
    type Output = AffExpr;
    fn add(mut self, rhs: AffExpr) -> AffExpr {
        self += rhs;
        self
    }
}

impl Add<f64> for AffExpr {
    type Output = AffExpr;
    fn add(mut self, rhs: f64) -> AffExpr {
        self.constant += rhs;
        self
    }
}

impl Sub for AffExpr {
    type Output = AffExpr;
    fn sub(mut self, rhs: AffExpr) -> AffExpr {
        self -= rhs;
        self
    }
}

impl Sub<f64> for AffExpr {
    type Output = AffExpr;
    fn sub(mut self, rhs: f64) -> AffExpr {
        self.constant -= rhs;
        self
    }
}

impl Mul<f64> for AffExpr {
    type Output = AffExpr;
    fn mul(mut self, rhs: f64) -> AffExpr {
        for t in &mut self.terms {
            t.1 *= rhs;
        }
        self.constant *= rhs;
        self
    }
}

impl Neg for AffExpr {
    type Output = AffExpr;
    fn neg(self) -> AffExpr {
        self * -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_eval() {
        let x = [2.0, -1.0, 4.0];
        let e = AffExpr::var(0) * 3.0 - AffExpr::var(1) + 5.0;
        assert_eq!(e.eval(&x), 12.0);
        let f = -(e.clone()) + AffExpr::term(2, 0.5);
        assert_eq!(f.eval(&x), -10.0);
        let s = AffExpr::sum(vec![e, f, AffExpr::constant(1.0)]);
        assert_eq!(s.eval(&x), 3.0);
        assert!(AffExpr::constant(3.0).is_constant());
    }
}
