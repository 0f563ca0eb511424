//! Exponent scalars.
//!
//! Every exact computation in the crate is generic over an integer type
//! implementing [`Exponent`]. `BigInt` is the default and never overflows;
//! `i64`/`i128` are much faster when exponents are known to stay small
//! (the workspace builds with overflow checks enabled, so an overflow panics
//! instead of wrapping).

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::{BigInt, ToBigInt};
use num_integer::Integer;
use num_traits::{FromPrimitive, NumAssignRef, NumRef, Signed, ToPrimitive};

pub trait Exponent:
    Clone
    + Debug
    + Display
    + Hash
    + Ord
    + Send
    + Sync
    + 'static
    + Integer
    + Signed
    + NumRef
    + NumAssignRef
    + FromPrimitive
    + ToPrimitive
    + ToBigInt
{
    fn from_big(n: &BigInt) -> Option<Self>;

    fn to_big(&self) -> BigInt {
        self.to_bigint().expect("integer always converts to BigInt")
    }

    fn from_i64_exact(n: i64) -> Self {
        Self::from_i64(n).expect("i64 fits every exponent type")
    }
}

impl Exponent for i64 {
    fn from_big(n: &BigInt) -> Option<Self> {
        n.to_i64()
    }
}

impl Exponent for i128 {
    fn from_big(n: &BigInt) -> Option<Self> {
        n.to_i128()
    }
}

impl Exponent for BigInt {
    fn from_big(n: &BigInt) -> Option<Self> {
        Some(n.clone())
    }

    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

/// `C(t, 0), C(t, 1), ..., C(t, d)` for any integer `t`, negative included.
pub fn binomials_upto<E: Exponent>(t: &E, d: usize) -> Vec<E> {
    let mut out = Vec::with_capacity(d + 1);
    let mut cur = E::one();
    out.push(cur.clone());
    for j in 0..d {
        let jj = E::from_usize(j).unwrap();
        // C(t, j+1) = C(t, j) (t - j) / (j + 1), exact at every step
        cur = cur * (t.clone() - jj) / E::from_usize(j + 1).unwrap();
        out.push(cur.clone());
    }
    out
}

/// `C(t, k)` for any integer `t`.
pub fn binomial<E: Exponent>(t: &E, k: usize) -> E {
    binomials_upto(t, k).pop().unwrap()
}

/// Converts a non-negative exponent to `usize`, if it fits.
pub fn to_usize<E: Exponent>(e: &E) -> Option<usize> {
    e.to_usize()
}

/// Serializes a `BigInt` as a decimal string.
pub(crate) fn big_as_string<S: serde::Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_match_pascal() {
        for n in 0i64..20 {
            let row = binomials_upto(&n, 20);
            for k in 1..20 {
                let pascal = binomial(&(n - 1), k) + binomial(&(n - 1), k - 1);
                if n > 0 {
                    assert_eq!(row[k], pascal, "C({n},{k})");
                }
            }
        }
    }

    #[test]
    fn negative_arguments() {
        // C(-1, k) = (-1)^k
        for k in 0..10 {
            assert_eq!(binomial(&-1i64, k), if k % 2 == 0 { 1 } else { -1 });
        }
        assert_eq!(binomial(&-3i64, 2), 6);
    }

    #[test]
    fn big_and_small_agree() {
        let b = binomial(&BigInt::from(256), 13);
        let s = binomial(&256i128, 13);
        assert_eq!(b, BigInt::from(s));
    }
}
