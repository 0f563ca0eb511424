//! Integer-valued polynomials in the binomial basis `C(t,0), C(t,1), ...`.

use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::scalar::{binomials_upto, Exponent};

/// `sum_j coeffs[j] * C(t, j)`. Trailing zero coefficients are trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegerValuedPolynomial<E = BigInt> {
    coeffs: Vec<E>,
}

/// Forward differences at 0: the coefficients in the binomial basis.
pub fn forward_differences<E: Exponent>(mut values: Vec<E>) -> Vec<E> {
    let n = values.len();
    let mut coeffs = Vec::with_capacity(n);
    for k in 0..n {
        coeffs.push(values[0].clone());
        for i in 0..(n - k - 1) {
            let next = values[i + 1].clone() - &values[i];
            values[i] = next;
        }
        values.truncate(n - k - 1);
        if values.is_empty() {
            break;
        }
    }
    trim(&mut coeffs);
    coeffs
}

fn trim<E: Exponent>(c: &mut Vec<E>) {
    while c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
}

/// The unique polynomial of degree `<= values.len() - 1` taking `values[t]` at `t = 0, 1, ...`.
pub fn ivp_from_values<E: Exponent>(values: &[E]) -> IntegerValuedPolynomial<E> {
    IntegerValuedPolynomial::from_values(values.to_vec())
}

impl<E: Exponent> IntegerValuedPolynomial<E> {
    pub fn new(mut coeffs: Vec<E>) -> Self {
        trim(&mut coeffs);
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// The polynomial `t`.
    pub fn identity() -> Self {
        Self::new(vec![E::zero(), E::one()])
    }

    /// `C(t, k)`.
    pub fn binomial(k: usize) -> Self {
        let mut c = vec![E::zero(); k + 1];
        c[k] = E::one();
        Self { coeffs: c }
    }

    pub fn from_values(values: Vec<E>) -> Self {
        Self {
            coeffs: forward_differences(values),
        }
    }

    pub fn coeffs(&self) -> &[E] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> E {
        self.coeffs.get(j).cloned().unwrap_or_else(E::zero)
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, t: &E) -> E {
        let Some(d) = self.degree() else {
            return E::zero();
        };
        let b = binomials_upto(t, d);
        let mut acc = E::zero();
        for (c, bj) in self.coeffs.iter().zip(&b) {
            if !c.is_zero() {
                acc += c.clone() * bj;
            }
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|j| self.coeff(j) + other.coeff(j)).collect())
    }

    pub fn scale(&self, k: &E) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * k).collect())
    }

    pub fn map<F: Exponent>(&self, f: impl Fn(&E) -> F) -> IntegerValuedPolynomial<F> {
        IntegerValuedPolynomial::new(self.coeffs.iter().map(f).collect())
    }
}

impl<E: Exponent> fmt::Display for IntegerValuedPolynomial<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match (j, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (_, true) => write!(f, "C(t,{j})")?,
                (_, false) => write!(f, "{mag}C(t,{j})")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_values_examples() {
        assert_eq!(ivp_from_values(&[0i64, 1, 2, 3]), IntegerValuedPolynomial::identity());
        assert_eq!(ivp_from_values(&[0i64, 0, 1, 3]), IntegerValuedPolynomial::binomial(2));
        assert!(ivp_from_values(&[0i64, 0, 0]).is_zero());
    }

    #[test]
    fn eval_negative() {
        // C(-1, 2) = 1, C(-2, 3) = -4
        let p = IntegerValuedPolynomial::<i64>::binomial(2);
        assert_eq!(p.eval(&-1), 1);
        assert_eq!(IntegerValuedPolynomial::<i64>::binomial(3).eval(&-2), -4);
    }

    #[test]
    fn display() {
        let p = IntegerValuedPolynomial::new(vec![0i64, 0, 1, 2]);
        assert_eq!(p.to_string(), "C(t,2) + 2C(t,3)");
        assert_eq!(IntegerValuedPolynomial::<i64>::zero().to_string(), "0");
        assert_eq!(IntegerValuedPolynomial::new(vec![3i64, -1]).to_string(), "3 - C(t,1)");
    }
}
