//! Dense univariate polynomials.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{FromPrimitive, Num, Zero};

/// `Σ coeffs[k] x^k`. Trailing zeros are not significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Num + Clone + FromPrimitive> Polynomial<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim();
        p
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    /// Value at 1, the plain coefficient sum.
    pub fn eval_one(&self) -> T {
        self.coeffs.iter().cloned().fold(T::zero(), |a, c| a + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs =
            self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c.clone() * T::from_usize(k).unwrap()).collect();
        Self::new(coeffs)
    }

    /// Antiderivative vanishing at 0, plus `c`.
    pub fn antiderivative(&self, c: T) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(c);
        for (k, a) in self.coeffs.iter().enumerate() {
            coeffs.push(a.clone() / T::from_usize(k + 1).unwrap());
        }
        Self::new(coeffs)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    /// `x ↦ p(1 - x)`.
    pub fn compose_one_minus(&self) -> Self {
        // Horner in the polynomial ring: acc = acc * (1 - x) + c
        let one_minus = Polynomial::new(vec![T::one(), T::zero() - T::one()]);
        self.coeffs
            .iter()
            .rev()
            .fold(Polynomial::zero(), |acc, c| &(&acc * &one_minus) + &Polynomial::constant(c.clone()))
    }
}

impl<T: Num + Clone + FromPrimitive> Zero for Polynomial<T> {
    fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

impl<T: Num + Clone + FromPrimitive> Add for Polynomial<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl<T: Num + Clone + FromPrimitive> Sub for Polynomial<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl<T: Num + Clone + FromPrimitive> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<T: Num + Clone + FromPrimitive> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<T: Num + Clone + FromPrimitive> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn neg(self) -> Polynomial<T> {
        Polynomial::new(self.coeffs.iter().map(|c| T::zero() - c.clone()).collect())
    }
}

impl<T: Num + Clone + FromPrimitive> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: Self) -> Polynomial<T> {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Polynomial::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::new(out)
    }
}

impl<T: Num + Clone + FromPrimitive> Mul for Polynomial<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn calculus_round_trip() {
        let p = Polynomial::new(vec![q(1, 1), q(-2, 1), q(3, 4)]);
        assert_eq!(p.antiderivative(q(5, 1)).derivative(), p);
        assert_eq!(p.eval(q(2, 1)), q(1, 1) - q(4, 1) + q(3, 1));
        assert_eq!(p.eval_one(), p.eval(q(1, 1)));
    }

    #[test]
    fn one_minus_substitution() {
        // (1 - x)^2 composed with 1 - x gives x^2
        let p = Polynomial::new(vec![q(1, 1), q(-2, 1), q(1, 1)]);
        assert_eq!(p.compose_one_minus(), Polynomial::new(vec![q(0, 1), q(0, 1), q(1, 1)]));
        let r = Polynomial::new(vec![q(3, 1), q(0, 1), q(-1, 2), q(2, 1)]);
        for x in [q(0, 1), q(1, 3), q(7, 5)] {
            assert_eq!(r.compose_one_minus().eval(x), r.eval(q(1, 1) - x));
        }
    }

    #[test]
    fn ring_ops() {
        let a = Polynomial::new(vec![q(1, 1), q(1, 1)]);
        let b = Polynomial::new(vec![q(-1, 1), q(1, 1)]);
        assert_eq!(&a * &b, Polynomial::new(vec![q(-1, 1), q(0, 1), q(1, 1)]));
        assert!((&a - &a).is_zero());
        assert_eq!((&a + &b).degree(), 1);
        assert_eq!(-&a, Polynomial::new(vec![q(-1, 1), q(-1, 1)]));
    }
}
