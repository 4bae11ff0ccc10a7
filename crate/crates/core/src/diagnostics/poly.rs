//! Polynomials in `t` with exact rational coefficients.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

/// `sum_i c_i t^i`; trailing zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialInT {
    coeffs: Vec<BigRational>,
}

impl PolynomialInT {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        PolynomialInT { coeffs }
    }

    pub fn zero() -> Self {
        PolynomialInT { coeffs: vec![] }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = BigRational::zero();
        Self::new((0..n).map(|i| self.coeffs.get(i).unwrap_or(&z) + o.coeffs.get(i).unwrap_or(&z)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = BigRational::zero();
        Self::new((0..n).map(|i| self.coeffs.get(i).unwrap_or(&z) - o.coeffs.get(i).unwrap_or(&z)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut c = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    /// `t^j p`
    pub fn mul_t_pow(&self, j: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = vec![BigRational::zero(); j];
        c.extend(self.coeffs.iter().cloned());
        Self::new(c)
    }

    /// `d^k p / dt^k`
    pub fn derivative(&self, k: usize) -> Self {
        if k >= self.coeffs.len() {
            return Self::zero();
        }
        Self::new(
            (k..self.coeffs.len())
                .map(|i| {
                    let f: BigInt = ((i - k + 1)..=i).fold(BigInt::one(), |a, m| a * m);
                    &self.coeffs[i] * BigRational::from_integer(f)
                })
                .collect(),
        )
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * t + c)
    }

    /// Degree at most `max_degree`, coefficients `p / q` with `|p| <= 20`, `1 <= q <= 9`.
    pub fn random<R: Rng>(rng: &mut R, max_degree: usize) -> Self {
        let d = rng.gen_range(0..=max_degree);
        Self::new(
            (0..=d)
                .map(|_| BigRational::new(BigInt::from(rng.gen_range(-20i64..=20)), BigInt::from(rng.gen_range(1i64..=9))))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> PolynomialInT {
        PolynomialInT::new(c.iter().map(|&v| BigRational::from_integer(v.into())).collect())
    }

    #[test]
    fn arithmetic() {
        assert_eq!(p(&[1, 2, 0, 0]).degree(), Some(1));
        assert_eq!(p(&[0]).degree(), None);
        assert_eq!(p(&[1, 1]).mul(&p(&[-1, 1])), p(&[-1, 0, 1]));
        assert_eq!(p(&[1, 2, 3]).derivative(1), p(&[2, 6]));
        assert_eq!(p(&[1, 2, 3]).derivative(2), p(&[6]));
        assert!(p(&[1, 2, 3]).derivative(3).is_zero());
        assert_eq!(p(&[1]).mul_t_pow(3), p(&[0, 0, 0, 1]));
        assert_eq!(p(&[1, 2]).sub(&p(&[1, 2])), PolynomialInT::zero());
        let two = BigRational::from_integer(2.into());
        assert_eq!(p(&[1, 0, 3]).eval(&two), BigRational::from_integer(13.into()));
    }
}
