//! p-adic valuations and residues of binomial coefficients `C(q, d)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest `e` with `p^e | n`.
pub fn padic_valuation(n: &BigInt, p: u64) -> Result<u32> {
    if n.is_zero() {
        return Err(Error::ZeroValuation);
    }
    if p < 2 {
        return Err(Error::InvalidArgument(format!("{p} is not a prime")));
    }
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut e = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Ok(e);
        }
        n = q;
        e += 1;
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// `(p, k)` with `q = p^k`, `k >= 1`.
pub fn prime_power(q: &BigInt) -> Result<(u64, u32)> {
    let err = || Error::NotPrimePower(q.to_string());
    if q < &BigInt::from(2) {
        return Err(err());
    }
    let mut p = None;
    for d in 2u64.. {
        let db = BigInt::from(d);
        if &(&db * &db) > q {
            break;
        }
        if (q % &db).is_zero() {
            p = Some(d);
            break;
        }
    }
    let p = match p {
        Some(p) => p,
        // q itself is prime
        None => return q.to_u64().map(|p| (p, 1)).ok_or_else(err),
    };
    let k = padic_valuation(q, p)?;
    if BigInt::from(p).pow(k) == *q {
        Ok((p, k))
    } else {
        Err(err())
    }
}

/// `C(n, k)` by the multiplicative formula; every partial product
/// `C(n-k+i, i)` is an integer, so each division is exact.
pub fn binomial_big(n: &BigInt, k: u64) -> BigInt {
    if n.is_negative() {
        return crate::scalar::binomial(n, k as usize);
    }
    if BigInt::from(k) > *n {
        return BigInt::zero();
    }
    let k = if BigInt::from(2 * k) > *n {
        (n - BigInt::from(k)).to_u64().expect("small complement")
    } else {
        k
    };
    let base = n - BigInt::from(k);
    let mut acc = BigInt::one();
    for i in 1..=k {
        acc = acc * (&base + BigInt::from(i)) / BigInt::from(i);
    }
    acc
}

/// `(C(q, d) / (q / p^j)) mod m`.
pub fn binom_residue(q: &BigInt, d: u64, j: u32, m: u64) -> Result<u64> {
    let (p, k) = prime_power(q)?;
    if j > k {
        return Err(Error::Divisibility(format!("p^{j} does not divide q = {q}")));
    }
    let divisor = q / BigInt::from(p).pow(j);
    let b = binomial_big(q, d);
    let (n, r) = b.div_rem(&divisor);
    if !r.is_zero() {
        return Err(Error::Divisibility(format!(
            "q/{p}^{j} = {divisor} does not divide C({q},{d}) = {b}"
        )));
    }
    Ok(n.mod_floor(&BigInt::from(m)).to_u64().unwrap())
}

/// Smallest `q` from which residue stability is asserted for each prime.
pub fn stability_threshold(p: u64) -> u64 {
    match p {
        2 => 32,
        3 => 27,
        5 => 25,
        _ => p,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidueRow {
    pub k: u32,
    pub q: String,
    pub binomial: String,
    pub n: String,
    pub residue: u64,
    /// Below the stability threshold: reported but not part of the verdict.
    pub below_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilityReport {
    pub p: u64,
    pub d: u64,
    pub scale_exp: u32,
    pub modulus: u64,
    pub rows: Vec<ResidueRow>,
    pub stable: bool,
    pub residue: Option<u64>,
}

/// Computes the residue for every `q = p^k`, `k_min <= k <= k_max`.
pub fn verify_residue_stability(
    p: u64,
    d: u64,
    j: u32,
    m: u64,
    k_min: u32,
    k_max: u32,
) -> Result<StabilityReport> {
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not a prime")));
    }
    if k_min > k_max || k_min == 0 {
        return Err(Error::InvalidArgument(format!("bad k range {k_min}..{k_max}")));
    }
    if prime_power(&BigInt::from(m)).map(|(mp, _)| mp) != Ok(p) {
        return Err(Error::InvalidArgument(format!("modulus {m} is not a power of {p}")));
    }
    let threshold = BigInt::from(stability_threshold(p));
    let mut rows = Vec::new();
    for k in k_min..=k_max {
        let q = BigInt::from(p).pow(k);
        let residue = binom_residue(&q, d, j, m)?;
        let b = binomial_big(&q, d);
        let n = &b / (&q / BigInt::from(p).pow(j));
        rows.push(ResidueRow {
            k,
            below_threshold: q < threshold,
            q: q.to_string(),
            binomial: b.to_string(),
            n: n.to_string(),
            residue,
        });
    }
    let counted: Vec<u64> = rows.iter().filter(|r| !r.below_threshold).map(|r| r.residue).collect();
    let stable = !counted.is_empty() && counted.iter().all(|r| *r == counted[0]);
    Ok(StabilityReport {
        p,
        d,
        scale_exp: j,
        modulus: m,
        residue: if stable { Some(counted[0]) } else { None },
        rows,
        stable,
    })
}

/// Does `q / p^j` divide `C(q, d)`?
pub fn divides_binomial(q: &BigInt, d: u64, j: u32) -> Result<bool> {
    let (p, k) = prime_power(q)?;
    if j > k {
        return Ok(true);
    }
    let divisor = q / BigInt::from(p).pow(j);
    Ok((binomial_big(q, d) % divisor).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: u64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn valuations() {
        assert_eq!(padic_valuation(&b(10518300), 2), Ok(2));
        assert_eq!(padic_valuation(&b(351), 3), Ok(3));
        assert_eq!(padic_valuation(&BigInt::from(-48), 2), Ok(4));
        assert_eq!(padic_valuation(&b(0), 2), Err(Error::ZeroValuation));
        for k in 1..20 {
            assert_eq!(padic_valuation(&b(3u64.pow(k)), 3), Ok(k));
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_big(&b(32), 8), b(10518300));
        assert_eq!(binomial_big(&b(27), 2), b(351));
        assert_eq!(binomial_big(&b(5), 7), b(0));
        assert_eq!(binomial_big(&b(10), 0), b(1));
        assert_eq!(binomial_big(&BigInt::from(-3), 2), b(6));
    }

    #[test]
    fn residues() {
        assert_eq!(binom_residue(&b(32), 8, 3, 8), Ok(7));
        assert_eq!(binom_residue(&b(32), 12, 3, 8), Ok(2));
        assert_eq!(binom_residue(&b(27), 2, 0, 9), Ok(4));
        assert!(matches!(binom_residue(&b(32), 16, 3, 8), Err(Error::Divisibility(_))));
        assert!(matches!(binom_residue(&b(12), 2, 0, 4), Err(Error::NotPrimePower(_))));
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(&b(32)), Ok((2, 5)));
        assert_eq!(prime_power(&b(7)), Ok((7, 1)));
        assert_eq!(prime_power(&b(3u64.pow(10))), Ok((3, 10)));
        assert!(prime_power(&b(1)).is_err());
        assert!(prime_power(&b(18)).is_err());
    }

    #[test]
    fn threshold_excludes_small_q() {
        let r = verify_residue_stability(2, 8, 3, 8, 3, 12).unwrap();
        assert!(r.rows[0].below_threshold && r.rows[1].below_threshold);
        assert!(!r.rows[2].below_threshold);
        assert!(r.stable);
        assert_eq!(r.residue, Some(7));
    }
}
