//! Univariate polynomials with exact rational coefficients.

use crate::rational::{rat, Rat};
use num_traits::Zero;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Polynomial in one variable, coefficients ascending by degree.
/// The zero polynomial has an empty coefficient vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rat) -> Self {
        Poly { coeffs: vec![c] }.trimmed()
    }

    /// `a + b x`.
    pub fn linear(a: Rat, b: Rat) -> Self {
        Poly { coeffs: vec![a, b] }.trimmed()
    }

    pub fn from_coeffs(coeffs: Vec<Rat>) -> Self {
        Poly { coeffs }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(|| rat(0))
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = rat(0);
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn scale(&self, s: &Rat) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        }
        .trimmed()
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = vec![rat(0); n];
        for (i, c) in self.coeffs.into_iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, c) in rhs.coeffs.into_iter().enumerate() {
            coeffs[i] += c;
        }
        Poly { coeffs }.trimmed()
    }
}

impl AddAssign for Poly {
    fn add_assign(&mut self, rhs: Poly) {
        *self = std::mem::replace(self, Poly::zero()) + rhs;
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        self + (-rhs)
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![rat(0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a.clone() * b.clone();
            }
        }
        Poly { coeffs }.trimmed()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn arithmetic_and_eval() {
        // (1 + x)(2 - x) = 2 + x - x^2
        let p = Poly::linear(rat(1), rat(1)) * Poly::linear(rat(2), rat(-1));
        assert_eq!(p.coeffs(), &[rat(2), rat(1), rat(-1)]);
        assert_eq!(p.eval(&rat(3)), rat(-4));
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.coeff(5), rat(0));

        let q = p.clone() - p;
        assert!(q.is_zero());
        assert_eq!(q.degree(), None);
    }

    #[test]
    fn falling_factorial_expansion() {
        // x(x-1)(x-2) = x^3 - 3x^2 + 2x
        let x = Poly::linear(rat(0), rat(1));
        let p = x.clone()
            * Poly::linear(rat(-1), rat(1))
            * Poly::linear(rat(-2), rat(1));
        assert_eq!(p.coeffs(), &[rat(0), rat(2), rat(-3), rat(1)]);
        assert_eq!(p.scale(&frac(1, 2)).coeff(3), frac(1, 2));
    }
}
