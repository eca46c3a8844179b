//! Dense univariate polynomials with exact rational coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use crate::numerics::{int, Rational};

/// Coefficients in ascending powers: `c[0] + c[1] t + c[2] t² + ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(pub Vec<Rational>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: Rational) -> Self {
        Poly(vec![c]).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    /// Degree of the polynomial; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|c| !c.is_zero())
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        self.0
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * t + c)
    }

    /// `p(t + h)` as a polynomial in `t` (Taylor shift).
    pub fn shift(&self, h: &Rational) -> Poly {
        // Repeated synthetic division; O(d²) exact operations.
        let mut c = self.0.clone();
        let d = c.len();
        for i in 0..d {
            for j in (i..d.saturating_sub(1)).rev() {
                let add = &c[j + 1] * h;
                c[j] += add;
            }
        }
        Poly(c).trimmed()
    }

    /// Antiderivative vanishing at `t = 0`.
    pub fn integral(&self) -> Poly {
        let mut c = Vec::with_capacity(self.0.len() + 1);
        c.push(Rational::zero());
        for (i, a) in self.0.iter().enumerate() {
            c.push(a / int(i as i64 + 1));
        }
        Poly(c).trimmed()
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * int(i as i64))
                .collect(),
        )
        .trimmed()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        let zero = Rational::zero();
        Poly(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&zero) + rhs.0.get(i).unwrap_or(&zero))
                .collect(),
        )
        .trimmed()
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Rational::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly(c).trimmed()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;

    fn p(cs: &[i64]) -> Poly {
        Poly(cs.iter().map(|&c| int(c)).collect())
    }

    #[test]
    fn shift_matches_direct_evaluation() {
        let f = p(&[3, -2, 0, 5]);
        let h = rat(-7, 3);
        let g = f.shift(&h);
        for t in [-2, -1, 0, 1, 3] {
            let t = rat(t, 5);
            assert_eq!(g.eval(&t), f.eval(&(&t + &h)));
        }
    }

    #[test]
    fn calculus() {
        let f = p(&[1, 2, 3]);
        assert_eq!(f.integral(), Poly(vec![int(0), int(1), int(1), int(1)]));
        assert_eq!(f.integral().derivative(), f);
        assert_eq!((&f * &p(&[0, 1])).degree(), Some(3));
        assert!((&f - &f).is_zero());
        assert_eq!(Poly::zero().degree(), None);
    }
}
