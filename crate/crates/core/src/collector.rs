//! Collection in the free nilpotent group `F / gamma_{c+1}(F)`.
//!
//! Elements are kept in normal form `c_1^{n_1} c_2^{n_2} ... c_m^{n_m}` as a
//! sparse, id-sorted list of nonzero exponents. The commutator convention is
//! `[y, x] = y^-1 x^-1 y x`, so `y x = x y [y, x]`.
//!
//! Multiplying a normal form by a syllable `c_j^e` is collection from the
//! left: the part of the word to the right of `c_j` is conjugated by
//! `c_j^e` and re-collected. Conjugation acts generator by generator:
//!
//! * `c_j^-1 c_m c_j` is memoized per pair. When `[c_m, c_j]` is basic it is
//!   that basis element; otherwise `c_m = [u, v]` with `v > c_j`, and the
//!   conjugate is `[u^{c_j}, v^{c_j}]`, collected recursively.
//! * For arbitrary `e`, the coordinates of `c_j^-e c_m c_j^e` are integer
//!   valued polynomials in `e` of degree at most `(class - wt c_m) / wt c_j`.
//!   They are interpolated once from `e = 0, 1, ...` and cached, so large
//!   and negative exponents cost the same as small ones.
//!
//! Powers `v^n` use the same idea: each coordinate of `v^n` is a polynomial in
//! `n` of degree at most `class / (least weight in v)`.
//!
//! Every recursive call only conjugates by generators with a larger id than
//! the caller's, which bounds the recursion.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigInt;
use parking_lot::RwLock;

use crate::basis::{build_basis, Basis, Definition, GeneratorDecl};
use crate::error::{Error, Result};
use crate::ivp::forward_differences;
use crate::scalar::{binomials_upto, Exponent};

/// Sparse normal form: `(basis id, exponent)` sorted by id, no zero exponents.
pub(crate) type Nf<E> = Vec<(u32, E)>;

static NEXT_CONTEXT: AtomicU64 = AtomicU64::new(1);

/// Coordinates of a family of normal forms indexed by an integer parameter.
#[derive(Debug, Clone)]
struct CoordPoly<E> {
    coords: Vec<(u32, Vec<E>)>,
}

impl<E: Exponent> CoordPoly<E> {
    /// Samples are the normal forms at parameter values `0, 1, ..., d`.
    fn interpolate(samples: &[Nf<E>]) -> Self {
        let ids: BTreeSet<u32> = samples.iter().flatten().map(|(i, _)| *i).collect();
        let coords = ids
            .into_iter()
            .map(|id| {
                let values: Vec<E> = samples
                    .iter()
                    .map(|s| lookup(s, id).cloned().unwrap_or_else(E::zero))
                    .collect();
                (id, forward_differences(values))
            })
            .collect();
        Self { coords }
    }

    fn degree(&self) -> usize {
        self.coords
            .iter()
            .map(|(_, c)| c.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    fn eval(&self, t: &E) -> Nf<E> {
        let binoms = binomials_upto(t, self.degree());
        let mut out = Vec::with_capacity(self.coords.len());
        for (id, coeffs) in &self.coords {
            let mut v = E::zero();
            for (c, b) in coeffs.iter().zip(&binoms) {
                if !c.is_zero() {
                    v += c.clone() * b;
                }
            }
            if !v.is_zero() {
                out.push((*id, v));
            }
        }
        out
    }
}

fn lookup<E>(nf: &[(u32, E)], id: u32) -> Option<&E> {
    nf.binary_search_by_key(&id, |(i, _)| *i)
        .ok()
        .map(|pos| &nf[pos].1)
}

/// A free nilpotent group of bounded class with its collection tables.
pub struct GroupContext<E: Exponent = BigInt> {
    id: u64,
    basis: Arc<Basis>,
    class: u32,
    weights: Vec<u32>,
    conj_base: RwLock<HashMap<(u32, u32), Arc<Nf<E>>>>,
    conj_polys: RwLock<HashMap<(u32, u32), Arc<CoordPoly<E>>>>,
    base_powers: RwLock<HashMap<(u32, u32), Arc<CoordPoly<E>>>>,
}

impl<E: Exponent> fmt::Debug for GroupContext<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupContext")
            .field("generators", &self.basis.generators())
            .field("class", &self.class)
            .field("basis_len", &self.basis.len())
            .finish()
    }
}

/// A group element in normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExponentVector<E = BigInt> {
    ctx: u64,
    terms: Vec<(u32, E)>,
}

impl<E: Exponent> ExponentVector<E> {
    pub fn terms(&self) -> &[(u32, E)] {
        &self.terms
    }

    pub fn exponent(&self, id: u32) -> E {
        lookup(&self.terms, id).cloned().unwrap_or_else(E::zero)
    }

    pub fn is_identity(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn context_id(&self) -> u64 {
        self.ctx
    }

    pub fn into_terms(self) -> Vec<(u32, E)> {
        self.terms
    }
}

/// A sequence of syllables `c_id^e`; generators are the ids `1..=rank`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Word<E = BigInt> {
    factors: Vec<(u32, E)>,
}

impl<E: Exponent> Word<E> {
    pub fn new(factors: Vec<(u32, E)>) -> Self {
        let mut w = Self { factors };
        w.normalize();
        w
    }

    pub fn empty() -> Self {
        Self {
            factors: Vec::new(),
        }
    }

    pub fn factors(&self) -> &[(u32, E)] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Merges adjacent equal ids and drops zero exponents.
    pub fn normalize(&mut self) {
        let mut out: Vec<(u32, E)> = Vec::with_capacity(self.factors.len());
        for (id, e) in self.factors.drain(..) {
            if e.is_zero() {
                continue;
            }
            match out.last_mut() {
                Some((last, le)) if *last == id => {
                    *le += e;
                    if le.is_zero() {
                        out.pop();
                    }
                }
                _ => out.push((id, e)),
            }
        }
        self.factors = out;
    }

    pub fn concat(&self, other: &Word<E>) -> Word<E> {
        let mut f = self.factors.clone();
        f.extend(other.factors.iter().cloned());
        Word::new(f)
    }

    pub fn inverse(&self) -> Word<E> {
        Word::new(
            self.factors
                .iter()
                .rev()
                .map(|(i, e)| (*i, -e.clone()))
                .collect(),
        )
    }

    /// `u^-1 v^-1 u v`.
    pub fn commutator(u: &Word<E>, v: &Word<E>) -> Word<E> {
        u.inverse().concat(&v.inverse()).concat(u).concat(v)
    }
}

impl<E: Exponent> GroupContext<E> {
    pub fn new(basis: Basis) -> Self {
        let mut weights = vec![0];
        weights.extend(basis.elements().iter().map(|e| e.weight));
        Self {
            id: NEXT_CONTEXT.fetch_add(1, Ordering::Relaxed),
            class: basis.max_weight(),
            basis: Arc::new(basis),
            weights,
            conj_base: RwLock::new(HashMap::new()),
            conj_polys: RwLock::new(HashMap::new()),
            base_powers: RwLock::new(HashMap::new()),
        }
    }

    pub fn with_generators(generators: &[GeneratorDecl], class: u32) -> Result<Self> {
        Ok(Self::new(build_basis(generators, class)?))
    }

    /// Unweighted generators.
    pub fn free(names: &[&str], class: u32) -> Result<Self> {
        let gens: Vec<_> = names.iter().map(|n| GeneratorDecl::unit(*n)).collect();
        Self::with_generators(&gens, class)
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn shared_basis(&self) -> Arc<Basis> {
        self.basis.clone()
    }

    pub fn class_bound(&self) -> u32 {
        self.class
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub(crate) fn wt(&self, id: u32) -> u32 {
        self.weights[id as usize]
    }

    pub(crate) fn wrap(&self, terms: Nf<E>) -> ExponentVector<E> {
        ExponentVector {
            ctx: self.id,
            terms,
        }
    }

    pub(crate) fn check(&self, u: &ExponentVector<E>) -> Result<()> {
        if u.ctx == self.id {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn identity(&self) -> ExponentVector<E> {
        self.wrap(Vec::new())
    }

    pub fn generator(&self, name: &str) -> Result<ExponentVector<E>> {
        let id = self
            .basis
            .generator_id(name)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
        Ok(self.basis_power(id, E::one()))
    }

    /// `c_id^e` as an element (zero if `c_id` lies beyond the class bound).
    pub fn basis_power(&self, id: u32, e: E) -> ExponentVector<E> {
        if e.is_zero() || self.wt(id) > self.class {
            self.identity()
        } else {
            self.wrap(vec![(id, e)])
        }
    }

    /// Builds an element from raw normal-form coordinates.
    pub fn from_exponents(
        &self,
        terms: impl IntoIterator<Item = (u32, E)>,
    ) -> Result<ExponentVector<E>> {
        let mut t: Vec<(u32, E)> = terms.into_iter().filter(|(_, e)| !e.is_zero()).collect();
        t.sort_by_key(|(i, _)| *i);
        for w in t.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {} given twice",
                    w[0].0
                )));
            }
        }
        for (i, _) in &t {
            if *i == 0 || *i as usize > self.basis.len() {
                return Err(Error::UnknownBasisId(*i));
            }
        }
        t.retain(|(i, _)| self.wt(*i) <= self.class);
        Ok(self.wrap(t))
    }

    pub fn normal_form(&self, w: &Word<E>) -> Result<ExponentVector<E>> {
        let mut state = Vec::new();
        for (id, e) in w.factors() {
            if *id == 0 || *id as usize > self.basis.len() {
                return Err(Error::UnknownBasisId(*id));
            }
            if self.wt(*id) <= self.class {
                self.mul_syllable(&mut state, *id, e.clone());
            }
        }
        Ok(self.wrap(state))
    }

    pub fn multiply(&self, u: &ExponentVector<E>, v: &ExponentVector<E>) -> Result<ExponentVector<E>> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.wrap(self.mul_nf(u.terms.clone(), &v.terms)))
    }

    /// Product of a sequence of elements.
    pub fn product<'a>(
        &self,
        items: impl IntoIterator<Item = &'a ExponentVector<E>>,
    ) -> Result<ExponentVector<E>> {
        let mut acc = Vec::new();
        for it in items {
            self.check(it)?;
            acc = self.mul_nf(acc, &it.terms);
        }
        Ok(self.wrap(acc))
    }

    pub fn inverse(&self, u: &ExponentVector<E>) -> Result<ExponentVector<E>> {
        self.check(u)?;
        Ok(self.wrap(self.inv_nf(&u.terms)))
    }

    pub fn power(&self, u: &ExponentVector<E>, n: &E) -> Result<ExponentVector<E>> {
        self.check(u)?;
        Ok(self.wrap(self.power_nf(&u.terms, n)))
    }

    /// `u^-1 v^-1 u v`.
    pub fn commutator(&self, u: &ExponentVector<E>, v: &ExponentVector<E>) -> Result<ExponentVector<E>> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.wrap(self.commutator_nf(&u.terms, &v.terms)))
    }

    /// `c_j^-e u c_j^e` for a basis element `c_j`.
    pub fn conjugate_by_basis(&self, u: &ExponentVector<E>, j: u32, e: &E) -> Result<ExponentVector<E>> {
        self.check(u)?;
        let pos = u.terms.partition_point(|(i, _)| *i <= j);
        if pos > 0 {
            // only the part above c_j is moved; the rest goes through multiply
            let left = self.wrap(u.terms.clone());
            let cj = self.basis_power(j, e.clone());
            let cji = self.basis_power(j, -e.clone());
            return self.product([&cji, &left, &cj]);
        }
        Ok(self.wrap(self.conj(&u.terms, j, e)))
    }

    /// Drops coordinates of weight above `to.class_bound()`; both contexts
    /// must share the same generators.
    pub fn project(&self, u: &ExponentVector<E>, to: &GroupContext<E>) -> Result<ExponentVector<E>> {
        self.check(u)?;
        if self.basis.generators() != to.basis.generators() {
            return Err(Error::ContextMismatch);
        }
        let terms = u
            .terms
            .iter()
            .filter(|(i, _)| self.wt(*i) <= to.class)
            .cloned()
            .collect();
        Ok(to.wrap(terms))
    }

    /// Human-readable `a^3 b^3 [b,a]^3 ...`.
    pub fn format(&self, u: &ExponentVector<E>) -> String {
        if u.terms.is_empty() {
            return "1".into();
        }
        u.terms
            .iter()
            .map(|(i, e)| {
                let s = self.basis.flat_string(*i);
                if e.is_one() {
                    s
                } else {
                    format!("{s}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    // ---- engine ----

    pub(crate) fn mul_nf(&self, mut x: Nf<E>, y: &[(u32, E)]) -> Nf<E> {
        for (j, e) in y {
            self.mul_syllable(&mut x, *j, e.clone());
        }
        x
    }

    /// `state := state * c_j^e`.
    fn mul_syllable(&self, state: &mut Nf<E>, j: u32, e: E) {
        if e.is_zero() {
            return;
        }
        let pos = state.partition_point(|(i, _)| *i < j);
        let mut own = E::zero();
        let mut start = pos;
        if pos < state.len() && state[pos].0 == j {
            own = state[pos].1.clone();
            start = pos + 1;
        }
        if start == state.len() {
            own += e;
            state.truncate(pos);
            if !own.is_zero() {
                state.push((j, own));
            }
            return;
        }
        let suffix = state.split_off(start);
        state.truncate(pos);
        let moved = self.conj(&suffix, j, &e);
        own += e;
        if !own.is_zero() {
            state.push((j, own));
        }
        state.extend(moved);
    }

    /// `c_j^-e s c_j^e` where every id in `s` exceeds `j`.
    fn conj(&self, s: &[(u32, E)], j: u32, e: &E) -> Nf<E> {
        if e.is_zero() || s.is_empty() {
            return s.to_vec();
        }
        let wj = self.wt(j);
        if wj >= self.class {
            return s.to_vec();
        }
        let limit = self.class - wj;
        // trailing entries heavier than `limit` commute with c_j
        let mut tail = s.len();
        while tail > 0 && self.wt(s[tail - 1].0) > limit {
            tail -= 1;
        }
        if tail == 0 {
            return s.to_vec();
        }
        let one = e.is_one();
        let mut acc: Nf<E> = Vec::new();
        for (m, em) in &s[..tail] {
            let piece = if self.wt(*m) > limit {
                vec![(*m, em.clone())]
            } else if one {
                self.base_power(j, *m, em)
            } else {
                let v = self.conj_poly(j, *m).eval(e);
                self.power_nf(&v, em)
            };
            acc = self.append(acc, &piece);
        }
        self.append(acc, &s[tail..])
    }

    /// Multiplies, taking the fast path when `y` starts after `x` ends.
    fn append(&self, mut x: Nf<E>, y: &[(u32, E)]) -> Nf<E> {
        match (x.last(), y.first()) {
            (_, None) => x,
            (None, _) => y.to_vec(),
            (Some((a, _)), Some((b, _))) if a < b => {
                x.extend_from_slice(y);
                x
            }
            _ => self.mul_nf(x, y),
        }
    }

    /// `c_j^-1 c_m c_j`, for `j < m`.
    fn conj_base(&self, j: u32, m: u32) -> Arc<Nf<E>> {
        if let Some(v) = self.conj_base.read().get(&(j, m)) {
            return v.clone();
        }
        let result = self.compute_conj_base(j, m);
        let arc = Arc::new(result);
        self.conj_base.write().entry((j, m)).or_insert(arc).clone()
    }

    fn compute_conj_base(&self, j: u32, m: u32) -> Nf<E> {
        if self.wt(j) + self.wt(m) > self.class {
            return vec![(m, E::one())];
        }
        let hall_pair = match self.basis.element(m).definition {
            Definition::Gen(_) => true,
            Definition::Bracket(_, v) => v <= j,
        };
        if hall_pair {
            let k = self
                .basis
                .bracket_id(m, j)
                .expect("basic commutator within the class bound is in the basis");
            return vec![(m, E::one()), (k, E::one())];
        }
        let Definition::Bracket(u, v) = self.basis.element(m).definition else {
            unreachable!()
        };
        let cu = self.conj_base(j, u);
        let cv = self.conj_base(j, v);
        self.commutator_nf(&cu, &cv)
    }

    /// Coordinates of `c_j^-e c_m c_j^e` as polynomials in `e`.
    fn conj_poly(&self, j: u32, m: u32) -> Arc<CoordPoly<E>> {
        if let Some(v) = self.conj_polys.read().get(&(j, m)) {
            return v.clone();
        }
        let (wj, wm) = (self.wt(j), self.wt(m));
        let degree = if wj + wm > self.class {
            0
        } else {
            ((self.class - wm) / wj) as usize
        };
        let mut samples = vec![vec![(m, E::one())]];
        for k in 0..degree {
            let next = if k == 0 {
                self.conj_base(j, m).as_ref().clone()
            } else {
                self.conj(&samples[k], j, &E::one())
            };
            samples.push(next);
        }
        let arc = Arc::new(CoordPoly::interpolate(&samples));
        self.conj_polys.write().entry((j, m)).or_insert(arc).clone()
    }

    /// `(c_j^-1 c_m c_j)^n`.
    fn base_power(&self, j: u32, m: u32, n: &E) -> Nf<E> {
        let base = self.conj_base(j, m);
        if n.is_one() {
            return base.as_ref().clone();
        }
        if base.len() == 1 {
            return vec![(base[0].0, base[0].1.clone() * n)];
        }
        let degree = self.power_degree(&base);
        if n.abs() <= E::from_usize(degree).unwrap() {
            return self.power_nf(&base, n);
        }
        if let Some(p) = self.base_powers.read().get(&(j, m)) {
            return p.eval(n);
        }
        let poly = Arc::new(CoordPoly::interpolate(&self.power_samples(&base, degree)));
        let out = poly.eval(n);
        self.base_powers.write().entry((j, m)).or_insert(poly);
        out
    }

    fn power_degree(&self, v: &[(u32, E)]) -> usize {
        let wmin = v.iter().map(|(i, _)| self.wt(*i)).min().unwrap_or(1);
        (self.class / wmin) as usize
    }

    fn power_samples(&self, v: &[(u32, E)], degree: usize) -> Vec<Nf<E>> {
        let mut samples: Vec<Nf<E>> = vec![Vec::new(), v.to_vec()];
        for k in 1..degree {
            let next = self.mul_nf(samples[k].clone(), v);
            samples.push(next);
        }
        samples
    }

    pub(crate) fn power_nf(&self, v: &[(u32, E)], n: &E) -> Nf<E> {
        if n.is_zero() || v.is_empty() {
            return Vec::new();
        }
        if n.is_one() {
            return v.to_vec();
        }
        if v.len() == 1 {
            return vec![(v[0].0, v[0].1.clone() * n)];
        }
        let wmin = v.iter().map(|(i, _)| self.wt(*i)).min().unwrap();
        if 2 * wmin > self.class {
            return v.iter().map(|(i, e)| (*i, e.clone() * n)).collect();
        }
        let degree = self.power_degree(v);
        let small = n.abs();
        if small <= E::from_usize(degree).unwrap() {
            let k = small.to_usize().unwrap();
            let base = if n.is_negative() {
                self.inv_nf(v)
            } else {
                v.to_vec()
            };
            let mut acc = base.clone();
            for _ in 1..k {
                acc = self.mul_nf(acc, &base);
            }
            return acc;
        }
        CoordPoly::interpolate(&self.power_samples(v, degree)).eval(n)
    }

    pub(crate) fn inv_nf(&self, x: &[(u32, E)]) -> Nf<E> {
        let mut state = Vec::new();
        for (m, e) in x.iter().rev() {
            self.mul_syllable(&mut state, *m, -e.clone());
        }
        state
    }

    /// `x^-1 y^-1 x y`, computed as `(y x)^-1 (x y)`.
    pub(crate) fn commutator_nf(&self, x: &[(u32, E)], y: &[(u32, E)]) -> Nf<E> {
        if x.is_empty() || y.is_empty() {
            return Vec::new();
        }
        let xy = self.mul_nf(x.to_vec(), y);
        let yx = self.mul_nf(y.to_vec(), x);
        let inv = self.inv_nf(&yx);
        self.mul_nf(inv, &xy)
    }

    /// Number of memoized conjugation relations (for diagnostics).
    pub fn table_sizes(&self) -> (usize, usize, usize) {
        (
            self.conj_base.read().len(),
            self.conj_polys.read().len(),
            self.base_powers.read().len(),
        )
    }
}

/// Applies the endomorphism defined by generator images.
pub struct Substitution<'a, E: Exponent> {
    source: &'a Basis,
    target: &'a GroupContext<E>,
    images: Vec<Option<Nf<E>>>,
}

impl<'a, E: Exponent> Substitution<'a, E> {
    /// `images` maps every generator name of `source` to a word over `target`.
    pub fn new(
        source: &'a GroupContext<E>,
        images: &HashMap<String, Word<E>>,
        target: &'a GroupContext<E>,
    ) -> Result<Self> {
        let mut vecs = HashMap::new();
        for g in source.basis().generators() {
            let w = images
                .get(&g.name)
                .ok_or_else(|| Error::MissingImage(g.name.clone()))?;
            vecs.insert(g.name.clone(), target.normal_form(w)?);
        }
        Self::from_vectors(source.basis(), &vecs, target)
    }

    pub fn from_vectors(
        source: &'a Basis,
        images: &HashMap<String, ExponentVector<E>>,
        target: &'a GroupContext<E>,
    ) -> Result<Self> {
        let mut table = vec![None; source.len() + 1];
        for (i, g) in source.generators().iter().enumerate() {
            let img = images
                .get(&g.name)
                .ok_or_else(|| Error::MissingImage(g.name.clone()))?;
            target.check(img)?;
            table[i + 1] = Some(img.terms.clone());
        }
        Ok(Self {
            source,
            target,
            images: table,
        })
    }

    /// Image of the basis element `c_id`.
    pub fn image_of(&mut self, id: u32) -> ExponentVector<E> {
        let t = self.image_nf(id);
        self.target.wrap(t)
    }

    fn image_nf(&mut self, id: u32) -> Nf<E> {
        if let Some(v) = &self.images[id as usize] {
            return v.clone();
        }
        let Definition::Bracket(l, r) = self.source.element(id).definition else {
            unreachable!("generator images are preset")
        };
        let li = self.image_nf(l);
        let ri = self.image_nf(r);
        let v = self.target.commutator_nf(&li, &ri);
        self.images[id as usize] = Some(v.clone());
        v
    }

    /// Image of a normal form of the source context.
    pub fn apply(&mut self, u: &ExponentVector<E>) -> ExponentVector<E> {
        let mut acc = Vec::new();
        for (i, e) in &u.terms {
            let img = self.image_nf(*i);
            let p = self.target.power_nf(&img, e);
            acc = self.target.mul_nf(acc, &p);
        }
        self.target.wrap(acc)
    }

    /// Image of a word over the source basis.
    pub fn apply_word(&mut self, w: &Word<E>) -> ExponentVector<E> {
        let mut acc = Vec::new();
        for (i, e) in w.factors() {
            let img = self.image_nf(*i);
            let p = self.target.power_nf(&img, e);
            acc = self.target.mul_nf(acc, &p);
        }
        self.target.wrap(acc)
    }
}

/// Either kind of substitution target.
pub enum SubstTarget<'a, E> {
    Vector(&'a ExponentVector<E>),
    Word(&'a Word<E>),
}

/// Applies the endomorphism `generator -> image` and collects in `ctx_out`.
pub fn substitute<E: Exponent>(
    source: &GroupContext<E>,
    images: &HashMap<String, Word<E>>,
    target: SubstTarget<'_, E>,
    ctx_out: &GroupContext<E>,
) -> Result<ExponentVector<E>> {
    let mut sub = Substitution::new(source, images, ctx_out)?;
    Ok(match target {
        SubstTarget::Vector(v) => {
            source.check(v)?;
            sub.apply(v)
        }
        SubstTarget::Word(w) => sub.apply_word(w),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(class: u32) -> GroupContext<i64> {
        GroupContext::free(&["a", "b"], class).unwrap()
    }

    fn ev(g: &GroupContext<i64>, terms: &[(u32, i64)]) -> ExponentVector<i64> {
        g.from_exponents(terms.iter().cloned()).unwrap()
    }

    #[test]
    fn ba_collects_to_ab_commutator() {
        let g = ctx(2);
        let b = g.generator("b").unwrap();
        let a = g.generator("a").unwrap();
        assert_eq!(g.multiply(&b, &a).unwrap(), ev(&g, &[(1, 1), (2, 1), (3, 1)]));
        assert_eq!(g.multiply(&a, &b).unwrap(), ev(&g, &[(1, 1), (2, 1)]));
    }

    #[test]
    fn commutator_convention() {
        let g = ctx(2);
        let w = Word::new(vec![(2, -1), (1, -1), (2, 1), (1, 1)]);
        assert_eq!(g.normal_form(&w).unwrap(), ev(&g, &[(3, 1)]));
        let b = g.generator("b").unwrap();
        let a = g.generator("a").unwrap();
        assert_eq!(g.commutator(&b, &a).unwrap(), ev(&g, &[(3, 1)]));
        assert_eq!(g.commutator(&a, &b).unwrap(), ev(&g, &[(3, -1)]));
    }

    #[test]
    fn ab_powers() {
        let g2 = ctx(2);
        let ab = g2.normal_form(&Word::new(vec![(1, 1), (2, 1)])).unwrap();
        assert_eq!(g2.power(&ab, &2).unwrap(), ev(&g2, &[(1, 2), (2, 2), (3, 1)]));
        let g3 = ctx(3);
        let ab = g3.normal_form(&Word::new(vec![(1, 1), (2, 1)])).unwrap();
        assert_eq!(
            g3.power(&ab, &3).unwrap(),
            ev(&g3, &[(1, 3), (2, 3), (3, 3), (4, 1), (5, 5)])
        );
    }

    #[test]
    fn power_identity_and_inverse() {
        let g = ctx(5);
        assert!(g.power(&g.identity(), &1_000_000_000).unwrap().is_identity());
        let u = ev(&g, &[(1, 2), (2, -3), (4, 1), (9, 2)]);
        let inv = g.power(&u, &-1).unwrap();
        assert!(g.multiply(&u, &inv).unwrap().is_identity());
        assert_eq!(inv, g.inverse(&u).unwrap());
        assert!(g.power(&u, &0).unwrap().is_identity());
    }

    #[test]
    fn large_power_matches_repeated_squaring() {
        let g = ctx(6);
        let u = ev(&g, &[(1, 1), (2, 2), (3, -1), (6, 3)]);
        let mut sq = u.clone();
        for _ in 0..5 {
            sq = g.multiply(&sq, &sq).unwrap();
        }
        assert_eq!(g.power(&u, &32).unwrap(), sq);
    }

    #[test]
    fn conjugation_polynomial_degree() {
        // direct repeated conjugation agrees with polynomial evaluation
        let g = ctx(7);
        let b = g.generator("b").unwrap();
        for e in -4i64..=9 {
            let direct = {
                let ae = g.basis_power(1, e);
                let aie = g.basis_power(1, -e);
                let mut acc = g.multiply(&aie, &b).unwrap();
                acc = g.multiply(&acc, &ae).unwrap();
                acc
            };
            let mut slow = b.clone();
            let a = g.generator("a").unwrap();
            let ai = g.inverse(&a).unwrap();
            for _ in 0..e.unsigned_abs() {
                slow = if e > 0 {
                    g.product([&ai, &slow, &a]).unwrap()
                } else {
                    g.product([&a, &slow, &ai]).unwrap()
                };
            }
            assert_eq!(direct, slow, "e = {e}");
        }
    }

    #[test]
    fn substitution_squares_generator() {
        let g = ctx(2);
        let mut images = HashMap::new();
        images.insert("a".to_string(), Word::new(vec![(1, 2)]));
        images.insert("b".to_string(), Word::new(vec![(2, 1)]));
        let target = ev(&g, &[(3, 1)]);
        let out = substitute(&g, &images, SubstTarget::Vector(&target), &g).unwrap();
        assert_eq!(out, ev(&g, &[(3, 2)]));
    }

    #[test]
    fn identity_substitution() {
        let g = ctx(4);
        let mut images = HashMap::new();
        images.insert("a".to_string(), Word::new(vec![(1, 1)]));
        images.insert("b".to_string(), Word::new(vec![(2, 1)]));
        let u = ev(&g, &[(1, 3), (2, -1), (5, 2), (7, -4)]);
        assert_eq!(substitute(&g, &images, SubstTarget::Vector(&u), &g).unwrap(), u);
        images.remove("b");
        assert!(matches!(
            substitute(&g, &images, SubstTarget::Vector(&u), &g),
            Err(Error::MissingImage(_))
        ));
    }

    #[test]
    fn context_mismatch() {
        let g = ctx(3);
        let h = ctx(3);
        assert_eq!(
            g.multiply(&g.identity(), &h.identity()),
            Err(Error::ContextMismatch)
        );
    }

}
