//! Magnus embedding oracle.
//!
//! A generator `g` maps to `1 + x_g` in the ring of noncommutative integer
//! polynomials truncated above graded degree `cap`, where `x_g` has the
//! declared weight of `g`. This is faithful on `F / gamma_{cap+1}(F)` and
//! shares no code with the collector, so it can check collected normal forms.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use num_bigint::BigInt;

use crate::basis::{Basis, Definition, GeneratorDecl};
use crate::collector::{ExponentVector, GroupContext, Word};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::scalar::{binomials_upto, Exponent};

/// Sparse truncated series; monomials are sequences of generator indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries<E = BigInt> {
    cap: u32,
    terms: HashMap<Vec<u8>, E>,
}

impl<E: Exponent> TruncatedSeries<E> {
    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn coeff(&self, mono: &[u8]) -> E {
        self.terms.get(mono).cloned().unwrap_or_else(E::zero)
    }

    pub fn terms(&self) -> &HashMap<Vec<u8>, E> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coeff(&[]).is_one()
    }

    fn add_term(&mut self, mono: Vec<u8>, c: E) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    /// Terms as sorted `(monomial, coefficient)` pairs.
    pub fn sorted_terms(&self) -> Vec<(Vec<u8>, E)> {
        let mut v: Vec<_> = self.terms.iter().map(|(k, c)| (k.clone(), c.clone())).collect();
        v.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        v
    }
}

/// The truncated algebra for a list of (weighted) generators.
#[derive(Debug, Clone)]
pub struct MagnusAlgebra {
    generators: Vec<GeneratorDecl>,
    cap: u32,
}

impl MagnusAlgebra {
    pub fn new(generators: &[GeneratorDecl], cap: u32) -> Result<Self> {
        if cap == 0 {
            return Err(Error::ZeroMaxWeight);
        }
        if generators.len() > u8::MAX as usize {
            return Err(Error::InvalidArgument("too many generators".into()));
        }
        Ok(Self {
            generators: generators.to_vec(),
            cap,
        })
    }

    pub fn for_context<E: Exponent>(ctx: &GroupContext<E>) -> Self {
        Self {
            generators: ctx.basis().generators().to_vec(),
            cap: ctx.class_bound(),
        }
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    fn degree(&self, mono: &[u8]) -> u32 {
        mono.iter().map(|&i| self.generators[i as usize].weight).sum()
    }

    pub fn one<E: Exponent>(&self) -> TruncatedSeries<E> {
        let mut terms = HashMap::new();
        terms.insert(Vec::new(), E::one());
        TruncatedSeries { cap: self.cap, terms }
    }

    /// `1 + x_g` for the generator with 0-based index `g`.
    pub fn generator<E: Exponent>(&self, g: usize) -> TruncatedSeries<E> {
        let mut s = self.one();
        if self.generators[g].weight <= self.cap {
            s.terms.insert(vec![g as u8], E::one());
        }
        s
    }

    pub fn generator_named<E: Exponent>(&self, name: &str) -> Result<TruncatedSeries<E>> {
        let g = self
            .generators
            .iter()
            .position(|d| d.name == name)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
        Ok(self.generator(g))
    }

    pub fn mul<E: Exponent>(&self, x: &TruncatedSeries<E>, y: &TruncatedSeries<E>) -> TruncatedSeries<E> {
        let mut by_deg: Vec<Vec<(&Vec<u8>, &E)>> = vec![Vec::new(); self.cap as usize + 1];
        for (m, c) in &y.terms {
            by_deg[self.degree(m) as usize].push((m, c));
        }
        let mut out: HashMap<Vec<u8>, E> = HashMap::with_capacity(x.terms.len() + y.terms.len());
        for (mx, cx) in &x.terms {
            let dx = self.degree(mx);
            for bucket in &by_deg[..=(self.cap - dx) as usize] {
                for (my, cy) in bucket {
                    let mut m = Vec::with_capacity(mx.len() + my.len());
                    m.extend_from_slice(mx);
                    m.extend_from_slice(my);
                    *out.entry(m).or_insert_with(E::zero) += cx.clone() * *cy;
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        TruncatedSeries { cap: self.cap, terms: out }
    }

    /// `s^n` for `s = 1 + X`, as `sum_k C(n, k) X^k`; valid for negative `n`.
    pub fn power<E: Exponent>(&self, s: &TruncatedSeries<E>, n: &E) -> Result<TruncatedSeries<E>> {
        if !s.coeff(&[]).is_one() {
            return Err(Error::InvalidArgument("constant term must be 1".into()));
        }
        let mut x = s.clone();
        x.terms.remove(&Vec::new());
        if x.terms.is_empty() || n.is_zero() {
            return Ok(self.one());
        }
        let min_deg = x.terms.keys().map(|m| self.degree(m)).min().unwrap();
        let top = (self.cap / min_deg) as usize;
        let binoms = binomials_upto(n, top);
        let mut out = self.one();
        let mut xk = self.one();
        for b in binoms.iter().skip(1) {
            xk = self.mul(&xk, &x);
            if xk.terms.is_empty() {
                break;
            }
            if !b.is_zero() {
                for (m, c) in &xk.terms {
                    out.add_term(m.clone(), c.clone() * b);
                }
            }
        }
        Ok(out)
    }

    pub fn inverse<E: Exponent>(&self, s: &TruncatedSeries<E>) -> Result<TruncatedSeries<E>> {
        self.power(s, &-E::one())
    }

    /// `u^-1 v^-1 u v`.
    pub fn commutator<E: Exponent>(
        &self,
        u: &TruncatedSeries<E>,
        v: &TruncatedSeries<E>,
    ) -> Result<TruncatedSeries<E>> {
        let ui = self.inverse(u)?;
        let vi = self.inverse(v)?;
        Ok(self.mul(&self.mul(&ui, &vi), &self.mul(u, v)))
    }

    /// Images of all basis elements, by id (index 0 unused).
    pub fn basis_images<E: Exponent>(&self, basis: &Basis) -> Result<Vec<TruncatedSeries<E>>> {
        if basis.generators() != self.generators.as_slice() {
            return Err(Error::ContextMismatch);
        }
        let mut out = vec![self.one()];
        for el in basis.elements() {
            let img = match el.definition {
                Definition::Gen(g) => self.generator(g as usize),
                Definition::Bracket(u, v) => {
                    self.commutator(&out[u as usize], &out[v as usize])?
                }
            };
            out.push(img);
        }
        Ok(out)
    }

    pub fn image_of_expr<E: Exponent>(&self, e: &Expr) -> Result<TruncatedSeries<E>> {
        match e {
            Expr::Gen(g) => self.generator_named(g),
            Expr::Product(items) => {
                let mut acc = self.one();
                for i in items {
                    acc = self.mul(&acc, &self.image_of_expr(i)?);
                }
                Ok(acc)
            }
            Expr::Power(b, n) => {
                let n = E::from_big(n)
                    .ok_or_else(|| Error::InvalidArgument(format!("exponent {n} does not fit")))?;
                self.power(&self.image_of_expr(b)?, &n)
            }
            Expr::Bracket(u, v) => {
                self.commutator(&self.image_of_expr(u)?, &self.image_of_expr(v)?)
            }
        }
    }

    /// Image of a word whose factors are basis ids.
    pub fn image_of_word<E: Exponent>(
        &self,
        w: &Word<E>,
        images: &[TruncatedSeries<E>],
    ) -> Result<TruncatedSeries<E>> {
        let mut acc = self.one();
        for (id, e) in w.factors() {
            let img = images.get(*id as usize).ok_or(Error::UnknownBasisId(*id))?;
            acc = self.mul(&acc, &self.power(img, e)?);
        }
        Ok(acc)
    }

    /// `prod_i image(c_i)^{n_i}` in basis order.
    pub fn image_of_normal_form<E: Exponent>(
        &self,
        nf: &ExponentVector<E>,
        images: &[TruncatedSeries<E>],
    ) -> Result<TruncatedSeries<E>> {
        self.image_of_word(&Word::new(nf.terms().to_vec()), images)
    }
}

/// Magnus image of a word over `ctx`'s basis ids, truncated at `cap`.
pub fn magnus_image<E: Exponent>(
    ctx: &GroupContext<E>,
    w: &Word<E>,
    cap: u32,
) -> Result<TruncatedSeries<E>> {
    let alg = MagnusAlgebra::new(ctx.basis().generators(), cap)?;
    let images = alg.basis_images(ctx.basis())?;
    alg.image_of_word(w, &images)
}

/// Checks `image(w) == prod image(c_i)^{n_i}` at the context's class bound.
pub fn check_normal_form<E: Exponent>(
    ctx: &GroupContext<E>,
    w: &Word<E>,
    nf: &ExponentVector<E>,
) -> Result<bool> {
    let alg = MagnusAlgebra::for_context(ctx);
    let images = alg.basis_images(ctx.basis())?;
    Ok(alg.image_of_word(w, &images)? == alg.image_of_normal_form(nf, &images)?)
}

/// Reusable checker that keeps the basis images.
pub struct Oracle<E: Exponent = BigInt> {
    alg: MagnusAlgebra,
    images: Vec<TruncatedSeries<E>>,
}

impl<E: Exponent> Oracle<E> {
    pub fn new(ctx: &GroupContext<E>) -> Result<Self> {
        let alg = MagnusAlgebra::for_context(ctx);
        let images = alg.basis_images(ctx.basis())?;
        Ok(Self { alg, images })
    }

    pub fn algebra(&self) -> &MagnusAlgebra {
        &self.alg
    }

    pub fn image_of_word(&self, w: &Word<E>) -> Result<TruncatedSeries<E>> {
        self.alg.image_of_word(w, &self.images)
    }

    pub fn image_of_normal_form(&self, nf: &ExponentVector<E>) -> Result<TruncatedSeries<E>> {
        self.alg.image_of_normal_form(nf, &self.images)
    }

    pub fn check(&self, w: &Word<E>, nf: &ExponentVector<E>) -> Result<bool> {
        Ok(self.image_of_word(w)? == self.image_of_normal_form(nf)?)
    }

    pub fn check_expr(&self, e: &Expr, nf: &ExponentVector<E>) -> Result<bool> {
        Ok(self.alg.image_of_expr(e)? == self.image_of_normal_form(nf)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg(cap: u32) -> MagnusAlgebra {
        MagnusAlgebra::new(&[GeneratorDecl::unit("a"), GeneratorDecl::unit("b")], cap).unwrap()
    }

    #[test]
    fn bracket_at_cap_two() {
        let m = alg(2);
        let e = Expr::parse("[b,a]", &["a", "b"]).unwrap();
        let s: TruncatedSeries<i64> = m.image_of_expr(&e).unwrap();
        let mut want = m.one::<i64>();
        want.terms.insert(vec![1, 0], 1);
        want.terms.insert(vec![0, 1], -1);
        assert_eq!(s, want);
    }

    #[test]
    fn cube_at_cap_two() {
        let m = alg(2);
        let s: TruncatedSeries<i64> = m.power(&m.generator(0), &3).unwrap();
        assert_eq!(s.coeff(&[]), 1);
        assert_eq!(s.coeff(&[0]), 3);
        assert_eq!(s.coeff(&[0, 0]), 3);
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn inverse_of_generator() {
        let m = alg(4);
        let s: TruncatedSeries<i64> = m.inverse(&m.generator(1)).unwrap();
        for k in 0..=4 {
            assert_eq!(s.coeff(&vec![1u8; k]), if k % 2 == 0 { 1 } else { -1 });
        }
        assert!(m.mul(&s, &m.generator(1)).is_one());
    }

    #[test]
    fn check_examples() {
        let g: GroupContext<i64> = GroupContext::free(&["a", "b"], 2).unwrap();
        let ba = Word::new(vec![(2, 1), (1, 1)]);
        let good = g.from_exponents([(1, 1), (2, 1), (3, 1)]).unwrap();
        let bad = g.from_exponents([(1, 1), (2, 1)]).unwrap();
        assert!(check_normal_form(&g, &ba, &good).unwrap());
        assert!(!check_normal_form(&g, &ba, &bad).unwrap());
        let a = Word::new(vec![(1, 1)]);
        assert!(check_normal_form(&g, &a, &g.generator("a").unwrap()).unwrap());
        assert!(magnus_image(&g, &Word::empty(), 5).unwrap().is_one());
    }

    #[test]
    fn weighted_degrees() {
        let gens = GeneratorDecl::parse_list("c:2,d:3").unwrap();
        let m = MagnusAlgebra::new(&gens, 5).unwrap();
        let s: TruncatedSeries<i64> = m.power(&m.generator(0), &5).unwrap();
        // x_c^2 has degree 4, x_c^3 would be 6
        assert_eq!(s.coeff(&[0, 0]), 10);
        assert_eq!(s.coeff(&[0, 0, 0]), 0);
    }
}
