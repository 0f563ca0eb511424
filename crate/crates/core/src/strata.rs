//! Weight-banded stratifications `N <= K` of the free group on `a, b`.
//!
//! `K` is generated by `gamma_w(F)^{K_scale(w)}` and `N` by
//! `gamma_w(F)^{N_scale(w)}` over the bands, plus `gamma_{c+1}(F)`. With
//! `N_scale = m K_scale`, `K/N` is elementary `C_m^r` and a coset `kN` is
//! read off the normal form of `k` as its representative vector.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::collector::{ExponentVector, GroupContext};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::hallpoly::{hall_expansion, power_commutator, shared_free_context};
use crate::residue::{prime_power, stability_threshold};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Band {
    pub min_weight: u32,
    #[serde(serialize_with = "crate::scalar::big_as_string")]
    pub k_scale: BigInt,
    #[serde(serialize_with = "crate::scalar::big_as_string")]
    pub n_scale: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StratificationSpec {
    pub name: String,
    pub p: u64,
    #[serde(serialize_with = "crate::scalar::big_as_string")]
    pub q: BigInt,
    pub class_bound: u32,
    pub bands: Vec<Band>,
    pub modulus: u64,
}

impl StratificationSpec {
    /// Validates and keeps only the bands reached by `class_bound`.
    pub fn new(
        name: impl Into<String>,
        p: u64,
        q: BigInt,
        class_bound: u32,
        bands: Vec<Band>,
        modulus: u64,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        let (qp, _) = prime_power(&q)?;
        if qp != p {
            return bad(format!("q = {q} is not a power of {p}"));
        }
        match prime_power(&BigInt::from(modulus)) {
            Ok((mp, _)) if mp == p => {}
            _ => return bad(format!("modulus {modulus} is not a power of {p}")),
        }
        if class_bound < 2 {
            return bad("class bound must be at least 2".into());
        }
        if bands.first().map(|b| b.min_weight) != Some(2) {
            return bad("the first band must start at weight 2".into());
        }
        let m = BigInt::from(modulus);
        for w in bands.windows(2) {
            if w[1].min_weight <= w[0].min_weight {
                return bad("band thresholds must increase".into());
            }
        }
        for b in &bands {
            if !b.k_scale.is_positive() {
                return bad(format!("band {} has a nonpositive K scale", b.min_weight));
            }
            if b.n_scale != &b.k_scale * &m {
                return bad(format!("band {}: N scale is not m times K scale", b.min_weight));
            }
        }
        let bands = bands.into_iter().filter(|b| b.min_weight <= class_bound).collect();
        Ok(Self {
            name: name.into(),
            p,
            q,
            class_bound,
            bands,
            modulus,
        })
    }

    fn banded(
        name: &str,
        p: u64,
        q: &BigInt,
        class_bound: u32,
        max_class: u32,
        modulus: u64,
        table: &[(u32, u64, u64)],
    ) -> Result<Self> {
        let threshold = stability_threshold(p);
        if *q < BigInt::from(threshold) {
            return Err(Error::InvalidSpec(format!(
                "the {name} stratification needs q >= {threshold}, got {q}"
            )));
        }
        if class_bound > max_class {
            return Err(Error::InvalidSpec(format!(
                "the {name} stratification is defined up to class {max_class}"
            )));
        }
        // (weight, K = q/div, N = m q/div)
        let bands = table
            .iter()
            .map(|&(w, num, div)| {
                let k = q * BigInt::from(num) / BigInt::from(div);
                Band {
                    min_weight: w,
                    n_scale: &k * BigInt::from(modulus),
                    k_scale: k,
                }
            })
            .collect();
        Self::new(name, p, q.clone(), class_bound, bands, modulus)
    }

    /// K: `q, q/2, q/4, q/8` on weights `2, 3-4, 5-7, 8-13`; `m = 8`.
    pub fn two_power(q: &BigInt, class_bound: u32) -> Result<Self> {
        Self::banded(
            "2power",
            2,
            q,
            class_bound,
            13,
            8,
            &[(2, 1, 1), (3, 1, 2), (5, 1, 4), (8, 1, 8)],
        )
    }

    /// K: `q, q/3, q/9` on weights `2, 3-6, 7-13`; `m = 9`.
    pub fn three_power(q: &BigInt, class_bound: u32) -> Result<Self> {
        Self::banded("3power", 3, q, class_bound, 13, 9, &[(2, 1, 1), (3, 1, 3), (7, 1, 9)])
    }

    /// K: `q, q/5` on weights `2, 3-10`; `m = 5`.
    pub fn five_power(q: &BigInt, class_bound: u32) -> Result<Self> {
        Self::banded("5power", 5, q, class_bound, 10, 5, &[(2, 1, 1), (3, 1, 5)])
    }

    pub fn builtin(name: &str, q: &BigInt, class_bound: u32) -> Result<Self> {
        match name {
            "2power" | "2" => Self::two_power(q, class_bound),
            "3power" | "3" => Self::three_power(q, class_bound),
            "5power" | "5" => Self::five_power(q, class_bound),
            _ => Err(Error::InvalidSpec(format!("unknown stratification `{name}`"))),
        }
    }

    pub fn band_for(&self, weight: u32) -> Option<&Band> {
        if weight < 2 || weight > self.class_bound {
            return None;
        }
        self.bands.iter().rev().find(|b| b.min_weight <= weight)
    }

    /// Same bands at another `q` (scales are rescaled proportionally).
    pub fn with_q(&self, q: &BigInt) -> Result<Self> {
        let mut s = Self::builtin(&self.name, q, self.class_bound)?;
        s.name = self.name.clone();
        Ok(s)
    }
}

/// Coordinates `(e_i / K_scale(wt c_i)) mod m` for `i >= 3`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RepVector {
    pub modulus: u64,
    pub entries: Vec<u64>,
}

impl RepVector {
    pub fn zero(modulus: u64, len: usize) -> Self {
        Self {
            modulus,
            entries: vec![0; len],
        }
    }

    /// Unit vector at basis id `id` (ids start at 3).
    pub fn unit(modulus: u64, len: usize, id: u32, value: i64) -> Self {
        let mut v = Self::zero(modulus, len);
        v.entries[id as usize - 3] = value.rem_euclid(modulus as i64) as u64;
        v
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| *e == 0)
    }

    /// Entry for basis id `id`.
    pub fn at(&self, id: u32) -> u64 {
        self.entries[id as usize - 3]
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.modulus, other.modulus);
        assert_eq!(self.len(), other.len());
        Self {
            modulus: self.modulus,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| (a + b) % self.modulus)
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            modulus: self.modulus,
            entries: self
                .entries
                .iter()
                .map(|a| (self.modulus - a) % self.modulus)
                .collect(),
        }
    }

    /// `(basis id, residue)` of nonzero entries.
    pub fn nonzero(&self) -> Vec<(u32, u64)> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| **e != 0)
            .map(|(i, e)| (i as u32 + 3, *e))
            .collect()
    }
}

impl fmt::Display for RepVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.entries.iter().rposition(|e| *e != 0).map_or(0, |i| i + 1);
        let shown: Vec<String> = self.entries[..last].iter().map(u64::to_string).collect();
        if last < self.entries.len() {
            write!(f, "[{}{}0,...,0]", shown.join(","), if last > 0 { "," } else { "" })
        } else {
            write!(f, "[{}]", shown.join(","))
        }
    }
}

fn check_context(ctx: &GroupContext<BigInt>, spec: &StratificationSpec) -> Result<()> {
    if ctx.class_bound() != spec.class_bound {
        return Err(Error::InvalidSpec(format!(
            "element collected at class {}, stratification is at class {}",
            ctx.class_bound(),
            spec.class_bound
        )));
    }
    Ok(())
}

fn check_derived(ctx: &GroupContext<BigInt>, u: &ExponentVector<BigInt>) -> Result<()> {
    let rank = ctx.basis().rank() as u32;
    if let Some((id, e)) = u.terms().iter().find(|(id, _)| *id <= rank) {
        return Err(Error::NotInDerived {
            name: ctx.basis().flat_string(*id),
            exponent: e.to_string(),
        });
    }
    Ok(())
}

/// First coordinate not divisible by its band scale, if any.
fn first_violation(
    ctx: &GroupContext<BigInt>,
    u: &ExponentVector<BigInt>,
    spec: &StratificationSpec,
    use_n: bool,
) -> Result<Option<Error>> {
    check_context(ctx, spec)?;
    check_derived(ctx, u)?;
    for (id, e) in u.terms() {
        let band = spec.band_for(ctx.basis().weight(*id)).expect("weights 2..=class are banded");
        let d = if use_n { &band.n_scale } else { &band.k_scale };
        if !(e % d).is_zero() {
            return Ok(Some(Error::NotInK {
                id: *id,
                element: ctx.basis().flat_string(*id),
                exponent: e.to_string(),
                divisor: d.to_string(),
            }));
        }
    }
    Ok(None)
}

pub fn in_k(ctx: &GroupContext<BigInt>, u: &ExponentVector<BigInt>, spec: &StratificationSpec) -> Result<bool> {
    Ok(first_violation(ctx, u, spec, false)?.is_none())
}

pub fn in_n(ctx: &GroupContext<BigInt>, u: &ExponentVector<BigInt>, spec: &StratificationSpec) -> Result<bool> {
    Ok(first_violation(ctx, u, spec, true)?.is_none())
}

/// Number of coordinates of a representative vector.
pub fn rv_len(ctx: &GroupContext<BigInt>) -> usize {
    ctx.basis().len() - ctx.basis().rank()
}

pub fn rv(ctx: &GroupContext<BigInt>, u: &ExponentVector<BigInt>, spec: &StratificationSpec) -> Result<RepVector> {
    if let Some(err) = first_violation(ctx, u, spec, false)? {
        return Err(err);
    }
    let m = BigInt::from(spec.modulus);
    let mut v = RepVector::zero(spec.modulus, rv_len(ctx));
    let rank = ctx.basis().rank();
    for (id, e) in u.terms() {
        let band = spec.band_for(ctx.basis().weight(*id)).unwrap();
        let r = (e / &band.k_scale).mod_floor(&m);
        v.entries[*id as usize - rank - 1] = r.to_u64().unwrap();
    }
    Ok(v)
}

/// `rv([y^q, x] N)` with `[y^q, x]` evaluated through the Hall polynomials.
pub fn rv_power_commutator(x: &Expr, y: &Expr, spec: &StratificationSpec) -> Result<RepVector> {
    let ctx = shared_free_context(spec.class_bound)?;
    let u = power_commutator_element(&ctx, x, y, &spec.q)?;
    rv(&ctx, &u, spec)
}

/// `[y^q, x]` in `ctx` via the expansion polynomials.
pub fn power_commutator_element(
    ctx: &GroupContext<BigInt>,
    x: &Expr,
    y: &Expr,
    q: &BigInt,
) -> Result<ExponentVector<BigInt>> {
    let exp = hall_expansion(ctx.class_bound().saturating_sub(1).max(2))?;
    let xv = ctx.eval(x)?;
    let yv = ctx.eval(y)?;
    power_commutator(&exp, q, &xv, &yv, ctx)
}

/// The same vector by collecting `[y^q, x]` directly.
pub fn rv_power_commutator_direct(x: &Expr, y: &Expr, spec: &StratificationSpec) -> Result<RepVector> {
    let ctx = shared_free_context(spec.class_bound)?;
    let e = Expr::bracket(y.clone().pow(spec.q.clone()), x.clone());
    let u = ctx.eval(&e)?;
    rv(&ctx, &u, spec)
}

/// Freely reduced words of length `1..=max_len` over `a, b` with exponents
/// `+-1`, deduplicated by their normal form in class 2.
pub fn enumerate_words(max_len: usize) -> Vec<Expr> {
    let ctx: GroupContext<i64> = GroupContext::free(&["a", "b"], 2).expect("valid context");
    let letters = [("a", 1i64), ("b", 1), ("a", -1), ("b", -1)];
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for (i, _) in letters.iter().enumerate() {
                if let Some(&last) = w.last() {
                    if last % 2 == i % 2 && last != i {
                        continue;
                    }
                }
                let mut nw = w.clone();
                nw.push(i);
                next.push(nw);
            }
        }
        for w in &next {
            let factors: Vec<Expr> = w
                .iter()
                .map(|&i| {
                    let (g, e) = letters[i];
                    if e == 1 {
                        Expr::gen(g)
                    } else {
                        Expr::gen(g).pow(e)
                    }
                })
                .collect();
            let expr = Expr::product(factors);
            let nf = ctx.eval(&expr).expect("letters are declared");
            if seen.insert(nf) {
                out.push(expr);
            }
        }
        frontier = next;
    }
    out
}

/// Pivot summary of a span over `Z/p^k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpanProfile {
    pub modulus: u64,
    pub generators: usize,
    /// `(coordinate index, p-adic valuation of the pivot)`.
    pub pivots: Vec<(usize, u32)>,
    /// Number of pivots per valuation `0..k`.
    pub by_valuation: Vec<usize>,
    /// `log_p` of the subgroup order.
    pub log_order: u32,
}

/// A subgroup of `C_m^r`, `m = p^k`, kept in a Howell-style echelon form:
/// each pivot row leads with a power of `p`, and `p^{k-a}` times every row
/// is reduced into the form as well, so membership is plain reduction.
#[derive(Debug, Clone)]
pub struct SpanState {
    p: u64,
    k: u32,
    modulus: u64,
    dim: usize,
    rows: BTreeMap<usize, Vec<u64>>,
    generators: Vec<RepVector>,
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    let (g, x, _) = ext_gcd(a as i128, m as i128);
    assert_eq!(g, 1, "{a} is not a unit mod {m}");
    x.rem_euclid(m as i128) as u64
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

impl SpanState {
    pub fn new(modulus: u64, dim: usize) -> Result<Self> {
        let (p, k) = prime_power(&BigInt::from(modulus))?;
        Ok(Self {
            p,
            k,
            modulus,
            dim,
            rows: BTreeMap::new(),
            generators: Vec::new(),
        })
    }

    pub fn for_spec(spec: &StratificationSpec, ctx: &GroupContext<BigInt>) -> Result<Self> {
        Self::new(spec.modulus, rv_len(ctx))
    }

    pub fn generators(&self) -> &[RepVector] {
        &self.generators
    }

    fn valuation(&self, mut x: u64) -> u32 {
        let mut a = 0;
        while x % self.p == 0 {
            x /= self.p;
            a += 1;
        }
        a
    }

    fn scale(&self, v: &mut [u64], c: u64) {
        let m = self.modulus as u128;
        for e in v.iter_mut() {
            *e = ((*e as u128 * c as u128) % m) as u64;
        }
    }

    /// `v -= c * row`.
    fn sub_mul(&self, v: &mut [u64], row: &[u64], c: u64) {
        let m = self.modulus as u128;
        for (e, r) in v.iter_mut().zip(row) {
            let t = (c as u128 * *r as u128) % m;
            *e = ((*e as u128 + m - t) % m) as u64;
        }
    }

    /// Makes the entry at `col` a power of `p`.
    fn normalize(&self, v: &mut [u64], col: usize) -> u32 {
        let a = self.valuation(v[col]);
        let unit = v[col] / self.p.pow(a);
        self.scale(v, mod_inverse(unit % self.modulus, self.modulus));
        a
    }

    /// Adds a generator; returns whether the span grew.
    pub fn insert(&mut self, v: &RepVector) -> bool {
        assert_eq!(v.modulus, self.modulus);
        assert_eq!(v.len(), self.dim);
        self.generators.push(v.clone());
        let mut grew = false;
        let mut queue = vec![v.entries.clone()];
        while let Some(mut w) = queue.pop() {
            let mut col = 0;
            loop {
                while col < self.dim && w[col] == 0 {
                    col += 1;
                }
                if col == self.dim {
                    break;
                }
                let a = self.normalize(&mut w, col);
                match self.rows.get(&col) {
                    Some(row) => {
                        let b = self.valuation(row[col]);
                        if b <= a {
                            let row = row.clone();
                            self.sub_mul(&mut w, &row, self.p.pow(a - b));
                        } else {
                            let old = self.rows.insert(col, w.clone()).unwrap();
                            grew = true;
                            let mut mult = w.clone();
                            self.scale(&mut mult, self.p.pow(self.k - a));
                            queue.push(mult);
                            w = old;
                        }
                    }
                    None => {
                        self.rows.insert(col, w.clone());
                        grew = true;
                        let mut mult = w.clone();
                        self.scale(&mut mult, self.p.pow(self.k - a));
                        queue.push(mult);
                        break;
                    }
                }
            }
        }
        grew
    }

    pub fn contains(&self, v: &RepVector) -> bool {
        let mut w = v.entries.clone();
        for col in 0..self.dim {
            if w[col] == 0 {
                continue;
            }
            let a = self.normalize(&mut w, col);
            match self.rows.get(&col) {
                Some(row) if self.valuation(row[col]) <= a => {
                    let b = self.valuation(row[col]);
                    self.sub_mul(&mut w, row, self.p.pow(a - b));
                }
                _ => return false,
            }
        }
        true
    }

    pub fn profile(&self) -> SpanProfile {
        let pivots: Vec<(usize, u32)> = self
            .rows
            .iter()
            .map(|(c, r)| (*c, self.valuation(r[*c])))
            .collect();
        let mut by_valuation = vec![0; self.k as usize];
        for (_, a) in &pivots {
            by_valuation[*a as usize] += 1;
        }
        SpanProfile {
            modulus: self.modulus,
            generators: self.generators.len(),
            log_order: pivots.iter().map(|(_, a)| self.k - a).sum(),
            pivots,
            by_valuation,
        }
    }
}

/// Adds `rv([y^q, x] N)` for every pair; vectors are computed in parallel
/// and inserted in the given order.
pub fn span_accumulate(
    mut state: SpanState,
    pairs: &[(Expr, Expr)],
    spec: &StratificationSpec,
) -> Result<SpanState> {
    let vecs: Vec<RepVector> = pairs
        .par_iter()
        .map(|(x, y)| rv_power_commutator(x, y, spec))
        .collect::<Result<_>>()?;
    for v in &vecs {
        state.insert(v);
    }
    Ok(state)
}

/// Convenience for specs at the default context.
pub fn spec_context(spec: &StratificationSpec) -> Result<Arc<GroupContext<BigInt>>> {
    shared_free_context(spec.class_bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: u64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn builtin_bands() {
        let s = StratificationSpec::two_power(&q(32), 13).unwrap();
        let scales: Vec<(u32, String, String)> = (2..=13)
            .map(|w| {
                let b = s.band_for(w).unwrap();
                (w, b.k_scale.to_string(), b.n_scale.to_string())
            })
            .collect();
        assert_eq!(scales[0], (2, "32".into(), "256".into()));
        assert_eq!(scales[2], (4, "16".into(), "128".into()));
        assert_eq!(scales[3], (5, "8".into(), "64".into()));
        assert_eq!(scales[6], (8, "4".into(), "32".into()));
        assert_eq!(scales[11], (13, "4".into(), "32".into()));
        assert!(s.band_for(14).is_none());
        assert!(StratificationSpec::two_power(&q(16), 13).is_err());
        assert!(StratificationSpec::three_power(&q(9), 13).is_err());
        assert!(StratificationSpec::five_power(&q(25), 11).is_err());
        assert!(StratificationSpec::two_power(&q(27), 5).is_err());
        let t = StratificationSpec::three_power(&q(27), 13).unwrap();
        assert_eq!(t.band_for(7).unwrap().k_scale, q(3));
    }

    #[test]
    fn spec_validation() {
        let band = |w, k: u64, n: u64| Band {
            min_weight: w,
            k_scale: q(k),
            n_scale: q(n),
        };
        assert!(StratificationSpec::new("x", 2, q(8), 4, vec![band(2, 8, 64)], 8).is_ok());
        assert!(StratificationSpec::new("x", 2, q(8), 4, vec![band(2, 8, 63)], 8).is_err());
        assert!(StratificationSpec::new("x", 2, q(8), 4, vec![band(3, 8, 64)], 8).is_err());
        assert!(StratificationSpec::new("x", 2, q(8), 4, vec![band(2, 8, 72)], 9).is_err());
        assert!(StratificationSpec::new("x", 3, q(8), 4, vec![band(2, 8, 72)], 9).is_err());
    }

    #[test]
    fn span_mod_8() {
        let mut s = SpanState::new(8, 3).unwrap();
        let v = |e: [u64; 3]| RepVector {
            modulus: 8,
            entries: e.to_vec(),
        };
        assert!(s.insert(&v([2, 1, 0])));
        // 4 * (2,1,0) = (0,4,0)
        assert!(s.contains(&v([0, 4, 0])));
        assert!(!s.contains(&v([0, 2, 0])));
        assert!(!s.contains(&v([1, 0, 0])));
        assert!(!s.insert(&v([6, 3, 0])));
        assert!(s.insert(&v([1, 0, 0])));
        assert!(s.contains(&v([0, 1, 0])));
        let p = s.profile();
        assert_eq!(p.log_order, 6);
        assert_eq!(p.by_valuation, vec![2, 0, 0]);
        assert!(!s.contains(&v([0, 0, 1])));
    }

    #[test]
    fn span_order_matches_brute_force() {
        // enumerate the subgroup of (Z/4)^3 generated by two vectors
        let gens = [[2u64, 1, 3], [0, 2, 2]];
        let mut all = HashSet::new();
        for x in 0..4 {
            for y in 0..4 {
                let e: Vec<u64> = (0..3).map(|i| (x * gens[0][i] + y * gens[1][i]) % 4).collect();
                all.insert(e);
            }
        }
        let mut s = SpanState::new(4, 3).unwrap();
        for g in gens {
            s.insert(&RepVector {
                modulus: 4,
                entries: g.to_vec(),
            });
        }
        assert_eq!(1usize << s.profile().log_order, all.len());
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let v = RepVector {
                        modulus: 4,
                        entries: vec![a, b, c],
                    };
                    assert_eq!(s.contains(&v), all.contains(&v.entries));
                }
            }
        }
    }

    #[test]
    fn words() {
        let w = enumerate_words(1);
        assert_eq!(w.len(), 4);
        assert_eq!(enumerate_words(2).len(), 4 + 12);
    }

    #[test]
    fn rep_vector_display() {
        let mut v = RepVector::zero(8, 10);
        v.entries[0] = 4;
        v.entries[3] = 4;
        assert_eq!(v.to_string(), "[4,0,0,4,0,...,0]");
        assert_eq!(RepVector::zero(8, 3).to_string(), "[0,...,0]");
    }
}
