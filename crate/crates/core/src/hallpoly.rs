//! Hall exponent polynomials.
//!
//! `(ab)^n = a^n b^n c_3^{f_3(n)} ... c_m^{f_m(n)}` with each `f_i` an
//! integer-valued polynomial of degree at most `wt c_i`. The polynomials are
//! recovered by collecting `(ab)^n` for `n = 0..=class` and interpolating.

use std::collections::HashMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use parking_lot::Mutex;
use serde::Serialize;

use crate::basis::{GeneratorDecl, Tree};
use crate::collector::{ExponentVector, GroupContext, Substitution, Word};
use crate::error::{Error, Result};
use crate::ivp::IntegerValuedPolynomial;
use crate::scalar::binomial;

/// Bumped whenever basis ordering or the file layout changes.
pub const ORDERING_VERSION: u32 = 1;

type Ivp = IntegerValuedPolynomial<BigInt>;

/// The polynomials `f_i` for the free group on `a, b` at a class bound.
#[derive(Debug)]
pub struct HallExpansion {
    ctx: Arc<GroupContext<BigInt>>,
    polys: Vec<Ivp>,
}

impl HallExpansion {
    /// Collects and interpolates without touching any cache.
    pub fn compute(class: u32) -> Result<Self> {
        if class < 2 {
            return Err(Error::InvalidArgument("class bound must be at least 2".into()));
        }
        // exponents of (ab)^n for n <= class are small; collect in i128
        let small: GroupContext<i128> = GroupContext::free(&["a", "b"], class)?;
        let ab = small.normal_form(&Word::new(vec![(1, 1), (2, 1)]))?;
        let mut samples = vec![small.identity()];
        for k in 0..class as usize {
            let next = small.multiply(&samples[k], &ab)?;
            samples.push(next);
        }
        let m = small.basis().len();
        let mut polys = vec![Ivp::zero()];
        for id in 1..=m as u32 {
            let values: Vec<i128> = samples.iter().map(|s| s.exponent(id)).collect();
            let p = IntegerValuedPolynomial::from_values(values);
            polys.push(p.map(|c| BigInt::from(*c)));
        }
        let ctx = GroupContext::<BigInt>::new(small.basis().clone());
        Ok(Self {
            ctx: Arc::new(ctx),
            polys,
        })
    }

    pub fn class_bound(&self) -> u32 {
        self.ctx.class_bound()
    }

    pub fn context(&self) -> &GroupContext<BigInt> {
        &self.ctx
    }

    pub fn shared_context(&self) -> Arc<GroupContext<BigInt>> {
        self.ctx.clone()
    }

    /// `f_id`; ids 1 and 2 give `t`.
    pub fn poly(&self, id: u32) -> &Ivp {
        &self.polys[id as usize]
    }

    /// `(id, f_id)` for every basis id.
    pub fn polys(&self) -> impl Iterator<Item = (u32, &Ivp)> {
        self.polys.iter().enumerate().skip(1).map(|(i, p)| (i as u32, p))
    }

    pub fn len(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(ab)^n` assembled from the polynomials.
    pub fn evaluate(&self, n: &BigInt) -> ExponentVector<BigInt> {
        self.assemble(n, 1)
    }

    /// `b^-n a^-n (ab)^n`: coordinates `f_i(n)` for `i >= 3`.
    pub fn tail(&self, n: &BigInt) -> ExponentVector<BigInt> {
        self.assemble(n, 3)
    }

    fn assemble(&self, n: &BigInt, from: u32) -> ExponentVector<BigInt> {
        let terms = self
            .polys()
            .filter(|(id, _)| *id >= from)
            .map(|(id, p)| (id, p.eval(n)));
        self.ctx.from_exponents(terms).expect("ids come from the basis")
    }

    fn header(class: u32) -> String {
        format!("nilcollect-hallpoly rank=2 class={class} ordering={ORDERING_VERSION}")
    }

    pub fn to_cache_text(&self) -> String {
        let mut out = Self::header(self.class_bound());
        out.push('\n');
        for (id, p) in self.polys() {
            out.push_str(&format!("{id} {}", self.ctx.basis().weight(id)));
            for c in p.coeffs() {
                out.push_str(&format!(" {c}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_cache_text(text: &str, class: u32) -> Result<Self> {
        let bad = |m: &str| Error::Cache(m.to_string());
        let mut lines = text.lines();
        if lines.next() != Some(Self::header(class).as_str()) {
            return Err(bad("header mismatch"));
        }
        let ctx = GroupContext::<BigInt>::free(&["a", "b"], class)?;
        let mut polys = vec![Ivp::zero()];
        for (k, line) in lines.enumerate() {
            let mut f = line.split_whitespace();
            let id: u32 = f.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad id"))?;
            let wt: u32 = f.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad weight"))?;
            if id as usize != k + 1 || id as usize > ctx.basis().len() || ctx.basis().weight(id) != wt {
                return Err(bad("row does not match the basis"));
            }
            let coeffs = f
                .map(|s| s.parse::<BigInt>().map_err(|_| bad("bad coefficient")))
                .collect::<Result<Vec<_>>>()?;
            polys.push(Ivp::new(coeffs));
        }
        if polys.len() != ctx.basis().len() + 1 {
            return Err(bad("wrong number of rows"));
        }
        Ok(Self {
            ctx: Arc::new(ctx),
            polys,
        })
    }

    /// Loads from `dir` if a valid file exists, otherwise computes and saves.
    pub fn load_or_compute_in(dir: &Path, class: u32) -> Result<Self> {
        let path = cache_file(dir, class);
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(e) = Self::from_cache_text(&text, class) {
                return Ok(e);
            }
        }
        let e = Self::compute(class)?;
        // a failed write only costs a recomputation next time
        let _ = write_atomic(&path, &e.to_cache_text());
        Ok(e)
    }
}

fn cache_file(dir: &Path, class: u32) -> PathBuf {
    dir.join(format!("hallpoly-r2-c{class}-v{ORDERING_VERSION}.txt"))
}

fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(text.as_bytes())?;
    f.sync_all()?;
    fs::rename(&tmp, path)
}

/// `NILCOLLECT_CACHE`, else the XDG cache directory, else a temp directory.
pub fn cache_dir() -> PathBuf {
    if let Some(d) = std::env::var_os("NILCOLLECT_CACHE") {
        return PathBuf::from(d);
    }
    if let Some(d) = std::env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(d).join("nilcollect");
    }
    if let Some(h) = std::env::var_os("HOME") {
        return PathBuf::from(h).join(".cache").join("nilcollect");
    }
    std::env::temp_dir().join("nilcollect")
}

fn memo() -> &'static Mutex<HashMap<u32, Arc<HallExpansion>>> {
    static M: OnceLock<Mutex<HashMap<u32, Arc<HallExpansion>>>> = OnceLock::new();
    M.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Process-wide shared expansion, backed by the disk cache.
pub fn hall_expansion(class: u32) -> Result<Arc<HallExpansion>> {
    if let Some(e) = memo().lock().get(&class) {
        return Ok(e.clone());
    }
    let e = Arc::new(HallExpansion::load_or_compute_in(&cache_dir(), class)?);
    Ok(memo().lock().entry(class).or_insert(e).clone())
}

/// Process-wide free context on `a, b`, so collection tables are shared.
pub fn shared_free_context(class: u32) -> Result<Arc<GroupContext<BigInt>>> {
    static M: OnceLock<Mutex<HashMap<u32, Arc<GroupContext<BigInt>>>>> = OnceLock::new();
    let m = M.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = m.lock().get(&class) {
        return Ok(c.clone());
    }
    let c = Arc::new(GroupContext::free(&["a", "b"], class)?);
    Ok(m.lock().entry(class).or_insert(c).clone())
}

/// `b^-n a^-n (ab)^n` at the class bound.
pub fn tail_of_power(n: &BigInt, class: u32) -> Result<ExponentVector<BigInt>> {
    Ok(hall_expansion(class)?.tail(n))
}

/// `[y^n, x] = prod_{i >= 2} (c_i alpha)^{f_i(n)}` with `alpha: a -> y, b -> [y,x]`.
///
/// Returns `(id, f_id(n))` over the `a, b` basis of class `class - 1`
/// (every factor has weight at least `wt c_i + 1` in `x, y`).
pub fn expand_power_commutator(n: &BigInt, class: u32) -> Result<Vec<(u32, BigInt)>> {
    let exp = hall_expansion(class.saturating_sub(1).max(2))?;
    Ok(power_commutator_terms(&exp, n))
}

fn power_commutator_terms(exp: &HallExpansion, n: &BigInt) -> Vec<(u32, BigInt)> {
    exp.polys()
        .filter(|(id, _)| *id >= 2)
        .map(|(id, p)| (id, p.eval(n)))
        .filter(|(_, v)| !v.is_zero())
        .collect()
}

/// Evaluates `[y^n, x]` in `ctx` through the expansion, for `x, y` in `ctx`.
pub fn power_commutator(
    exp: &HallExpansion,
    n: &BigInt,
    x: &ExponentVector<BigInt>,
    y: &ExponentVector<BigInt>,
    ctx: &GroupContext<BigInt>,
) -> Result<ExponentVector<BigInt>> {
    if exp.class_bound() + 1 < ctx.class_bound() {
        return Err(Error::InvalidArgument(format!(
            "expansion of class {} is too small for class {}",
            exp.class_bound(),
            ctx.class_bound()
        )));
    }
    let yx = ctx.commutator(y, x)?;
    let mut images = HashMap::new();
    images.insert("a".to_string(), y.clone());
    images.insert("b".to_string(), yx);
    let mut sub = Substitution::from_vectors(exp.context().basis(), &images, ctx)?;
    let terms = power_commutator_terms(exp, n);
    let mut acc = ctx.identity();
    for (id, e) in terms {
        // c_i alpha lies in gamma_{wt c_i + 1} since c_i involves b
        if exp.context().basis().weight(id) >= ctx.class_bound() {
            continue;
        }
        let img = sub.image_of(id);
        if img.is_identity() {
            continue;
        }
        let p = ctx.power(&img, &e)?;
        acc = ctx.multiply(&acc, &p)?;
    }
    Ok(acc)
}

fn lookup(ctx: &GroupContext<BigInt>, text: &str) -> Option<u32> {
    ctx.basis().find_tree(&Tree::parse(text).ok()?)
}

fn bi(n: i64) -> BigInt {
    BigInt::from(n)
}

fn c(n: i64, k: usize) -> BigInt {
    binomial(&bi(n), k)
}

/// One compared coordinate of a commutator table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub label: String,
    pub element: String,
    pub expected: String,
    pub actual: Option<String>,
}

impl TableRow {
    pub fn ok(&self) -> bool {
        self.actual.as_deref() == Some(self.expected.as_str())
    }
}

/// Comparison of a collected commutator with closed-form exponents.
#[derive(Debug, Clone, Serialize)]
pub struct TableReport {
    pub r: i64,
    pub s: i64,
    pub rows: Vec<TableRow>,
    /// Listed elements that the context does not contain.
    pub absent: Vec<String>,
    /// Coordinates outside the table with nonzero exponent.
    pub unlisted_nonzero: Vec<(String, String)>,
    pub pass: bool,
}

fn compare(
    ctx: &GroupContext<BigInt>,
    got: &ExponentVector<BigInt>,
    table: &[(&str, &str, BigInt)],
    strict_rest: bool,
    r: i64,
    s: i64,
) -> TableReport {
    let mut rows = Vec::new();
    let mut absent = Vec::new();
    let mut listed = Vec::new();
    for (label, text, want) in table {
        match lookup(ctx, text) {
            Some(id) => {
                listed.push(id);
                rows.push(TableRow {
                    label: label.to_string(),
                    element: text.to_string(),
                    expected: want.to_string(),
                    actual: Some(got.exponent(id).to_string()),
                });
            }
            None => absent.push(text.to_string()),
        }
    }
    let unlisted_nonzero: Vec<(String, String)> = got
        .terms()
        .iter()
        .filter(|(id, _)| !listed.contains(id))
        .map(|(id, e)| (ctx.basis().flat_string(*id), e.to_string()))
        .collect();
    let pass = rows.iter().all(TableRow::ok) && (!strict_rest || unlisted_nonzero.is_empty());
    TableReport {
        r,
        s,
        rows,
        absent,
        unlisted_nonzero,
        pass,
    }
}

/// `[c^r, d^s]` modulo `gamma_5(<c,d>)` against its six-term closed form.
pub fn weighted_expansion_gamma3_report(r: i64, s: i64) -> Result<TableReport> {
    // d first, so that [c,d] is basic
    let ctx = GroupContext::<BigInt>::free(&["d", "c"], 4)?;
    let got = ctx.eval_str(&format!("[c^{r}, d^{s}]"))?;
    let table = [
        ("[c,d]", "[c,d]", bi(r) * bi(s)),
        ("[c,d,d]", "[c,d,d]", bi(r) * c(s, 2)),
        ("[c,d,d,d]", "[c,d,d,d]", bi(r) * c(s, 3)),
        ("[c,d,c]", "[c,d,c]", c(r, 2) * bi(s)),
        ("[c,d,d,c]", "[c,d,d,c]", c(r, 2) * c(s, 2)),
        ("[c,d,c,c]", "[c,d,c,c]", c(r, 3) * bi(s)),
    ];
    Ok(compare(&ctx, &got, &table, true, r, s))
}

pub fn verify_weighted_expansion_gamma3(r: i64, s: i64) -> Result<bool> {
    Ok(weighted_expansion_gamma3_report(r, s)?.pass)
}

/// The closed forms `n_3 .. n_15` for `[d^r, c^s]`.
pub fn drcs_table(r: i64, s: i64) -> Vec<(&'static str, &'static str, BigInt)> {
    let (rb, sb) = (bi(r), bi(s));
    vec![
        ("n3", "[d,c]", &rb * &sb),
        ("n4", "[d,c,c]", &rb * c(s, 2)),
        ("n5", "[d,c,d]", c(r, 2) * &sb),
        ("n6", "[d,c,c,c]", &rb * c(s, 3)),
        ("n7", "[d,c,c,d]", c(r, 2) * c(s, 2)),
        ("n8", "[d,c,d,d]", c(r, 3) * &sb),
        ("n9", "[d,c,c,c,c]", &rb * c(s, 4)),
        ("n10", "[d,c,c,c,d]", c(r, 2) * c(s, 3)),
        ("n11", "[d,c,c,d,d]", c(r, 3) * c(s, 2)),
        ("n12", "[d,c,d,d,d]", c(r, 4) * &sb),
        (
            "n13",
            "[d,c,c,[d,c]]",
            bi(3) * c(r, 2) * c(s, 3) + bi(2) * c(r, 2) * c(s, 2) + &rb * c(s, 3),
        ),
        (
            "n14",
            "[d,c,d,[d,c]]",
            bi(4) * c(r, 3) * c(s, 2) + bi(2) * c(r, 3) * &sb + bi(3) * c(r, 2) * c(s, 2) + c(r, 2) * &sb,
        ),
        ("n15", "[d,c,c,c,c,c]", &rb * c(s, 5)),
    ]
}

/// `[d^r, c^s]` with `c` of weight 2 and `d` of weight 3, truncated above 13.
///
/// Every listed coordinate present in the context is compared; the listed
/// element `[d,c,d,d,d]` has weight 14 and is reported in `absent`.
pub fn drcs_weighted_report(r: i64, s: i64) -> Result<TableReport> {
    let gens = [GeneratorDecl::new("c", 2), GeneratorDecl::new("d", 3)];
    let ctx = GroupContext::<BigInt>::with_generators(&gens, 13)?;
    let got = ctx.eval_str(&format!("[d^{r}, c^{s}]"))?;
    Ok(compare(&ctx, &got, &drcs_table(r, s), true, r, s))
}

/// The same table in the unweighted free group of class 6 on `c, d`, where
/// all thirteen listed elements exist; other weight-6 coordinates are ignored.
pub fn drcs_unweighted_report(r: i64, s: i64) -> Result<TableReport> {
    let ctx = GroupContext::<BigInt>::free(&["c", "d"], 6)?;
    let got = ctx.eval_str(&format!("[d^{r}, c^{s}]"))?;
    Ok(compare(&ctx, &got, &drcs_table(r, s), false, r, s))
}

/// Both drcs checks.
pub fn verify_drcs_table(r: i64, s: i64) -> Result<bool> {
    if r < 0 || s < 0 {
        return Err(Error::InvalidArgument("r and s must be nonnegative".into()));
    }
    Ok(drcs_weighted_report(r, s)?.pass && drcs_unweighted_report(r, s)?.pass)
}

/// Coefficients that are negative, and the `(id, j)` positions of zero
/// coefficients strictly inside the degree range.
pub fn coefficient_signs(exp: &HallExpansion) -> (Vec<(u32, usize)>, Vec<(u32, usize)>) {
    let mut neg = Vec::new();
    let mut zero = Vec::new();
    for (id, p) in exp.polys() {
        for (j, c) in p.coeffs().iter().enumerate().skip(1) {
            if c.is_negative() {
                neg.push((id, j));
            } else if c.is_zero() {
                zero.push((id, j));
            }
        }
    }
    (neg, zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_three_polys() {
        let e = HallExpansion::compute(3).unwrap();
        assert_eq!(e.poly(1), &Ivp::identity());
        assert_eq!(e.poly(2), &Ivp::identity());
        assert_eq!(e.poly(3), &Ivp::binomial(2));
        assert_eq!(e.poly(4), &Ivp::binomial(3));
        assert_eq!(e.poly(5).to_string(), "C(t,2) + 2C(t,3)");
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = HallExpansion::load_or_compute_in(dir.path(), 6).unwrap();
        let path = cache_file(dir.path(), 6);
        assert!(path.exists());
        let b = HallExpansion::load_or_compute_in(dir.path(), 6).unwrap();
        assert_eq!(a.polys, b.polys);
        assert!(HallExpansion::from_cache_text(&a.to_cache_text(), 5).is_err());
        let truncated: String = a.to_cache_text().lines().take(10).collect::<Vec<_>>().join("\n");
        assert!(HallExpansion::from_cache_text(&truncated, 6).is_err());
        // a corrupt file is replaced
        fs::write(&path, "garbage").unwrap();
        let c = HallExpansion::load_or_compute_in(dir.path(), 6).unwrap();
        assert_eq!(a.polys, c.polys);
    }

    #[test]
    fn tail_small() {
        let e = HallExpansion::compute(2).unwrap();
        assert!(e.tail(&bi(0)).is_identity());
        assert_eq!(e.tail(&bi(2)).terms(), &[(3, bi(1))]);
    }

    #[test]
    fn gamma3_example() {
        let rep = weighted_expansion_gamma3_report(2, 3).unwrap();
        let got: Vec<String> = rep.rows.iter().map(|r| r.actual.clone().unwrap()).collect();
        assert_eq!(got, ["6", "6", "2", "3", "3", "0"]);
        assert!(rep.pass);
    }
}
