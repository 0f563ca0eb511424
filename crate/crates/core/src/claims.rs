//! Registry of verifiable claims with structured evidence.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::basis::{build_basis, free_basis, witt_count, GeneratorDecl, Tree};
use crate::collector::{ExponentVector, GroupContext, Word};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::hallpoly::{
    coefficient_signs, drcs_unweighted_report, drcs_weighted_report, hall_expansion,
    power_commutator, shared_free_context, weighted_expansion_gamma3_report, TableReport,
};
use crate::magnus::Oracle;
use crate::residue::{divides_binomial, verify_residue_stability};
use crate::strata::{
    enumerate_words, in_k, in_n, rv, rv_len, rv_power_commutator, rv_power_commutator_direct,
    RepVector, StratificationSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClaimRecord {
    pub id: String,
    /// Topic the claim comes from.
    pub location: String,
    pub parameters: BTreeMap<String, String>,
    pub verdict: Verdict,
    pub evidence: Value,
    pub runtime_ms: f64,
}

/// Parameter lookup that records every value it hands out.
pub struct Params {
    overrides: BTreeMap<String, String>,
    used: BTreeMap<String, String>,
}

impl Params {
    fn new(overrides: &BTreeMap<String, String>) -> Self {
        Self {
            overrides: overrides.clone(),
            used: BTreeMap::new(),
        }
    }

    fn u64(&mut self, key: &str, default: u64) -> Result<u64> {
        let v = match self.overrides.get(key) {
            Some(s) => s
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("parameter {key}={s} is not an integer")))?,
            None => default,
        };
        self.used.insert(key.to_string(), v.to_string());
        Ok(v)
    }
}

struct Outcome {
    pass: bool,
    evidence: Value,
}

type ClaimFn = fn(&mut Params) -> Result<Outcome>;

pub struct ClaimDef {
    pub id: &'static str,
    pub location: &'static str,
    pub heavy: bool,
    run: ClaimFn,
}

pub fn registry() -> Vec<ClaimDef> {
    let c = |id, location, heavy, run| ClaimDef {
        id,
        location,
        heavy,
        run,
    };
    vec![
        c("basis-counts", "basic commutator counts", false, basis_counts as ClaimFn),
        c("basis-prefix", "basic commutator sequence", false, basis_prefix),
        c("basis-weighted", "basic commutators in c, d", false, basis_weighted),
        c("oracle-random-words", "normal form uniqueness", false, oracle_random_words),
        c("hallpoly-low", "Hall polynomials, class 7", false, hallpoly_low),
        c("hallpoly-13", "Hall polynomials, class 13", true, hallpoly_13),
        c("hall-power-expansion", "expansion of (ab)^n", false, hall_power_expansion),
        c("power-commutator-expansion", "expansion of [y^n,x]", false, power_commutator_expansion),
        c("gamma3-commutator-expansion", "[c^r,d^s] modulo gamma_5", false, gamma3_expansion),
        c("drcs-table", "[d^r,c^s] exponent table", false, drcs_table_claim),
        c("hallpoly-divisibility", "divisibility of f_i(q)", false, hallpoly_divisibility),
        c("binres-2power", "binomial residues, q a power of 2", false, binres_2power),
        c("binres-3power", "binomial residues, q a power of 3", false, binres_3power),
        c("binres-bands", "binomial divisibility bands", false, binres_bands),
        c("hallpoly-half-row", "f_i(q/2) residues", false, half_row),
        c("rv-basic", "representative vector of [b,a]^{4q}", true, rv_basic),
        c("rv-tail8q", "representative vector of b^-8q a^-8q (ab)^8q", true, rv_tail8q),
        c("rv-cicj", "representative vector of (c_i c_j)^{q/4}", true, rv_cicj),
        c("rv-q-independence", "q-independence of rv([y^q,x]N), class 7", false, rv_q_independence),
        c("rv-q-independence-13", "q-independence of rv([y^q,x]N), class 13", true, rv_q_independence_13),
        c("kn-structure", "structure of K/N", false, kn_structure),
    ]
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub filter: Option<String>,
    pub heavy: bool,
    pub params: BTreeMap<String, String>,
}

/// Runs the matching claims in parallel; records come back sorted by id.
pub fn run_claims(opts: &RunOptions) -> Result<Vec<ClaimRecord>> {
    let pattern = match &opts.filter {
        Some(f) => Some(
            glob::Pattern::new(f).map_err(|e| Error::InvalidArgument(format!("bad filter `{f}`: {e}")))?,
        ),
        None => None,
    };
    let defs: Vec<ClaimDef> = registry()
        .into_iter()
        .filter(|d| pattern.as_ref().map_or(true, |p| p.matches(d.id)))
        .collect();
    let mut records: Vec<ClaimRecord> = defs.par_iter().map(|d| run_one(d, opts)).collect();
    records.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(records)
}

fn run_one(def: &ClaimDef, opts: &RunOptions) -> ClaimRecord {
    let mut params = Params::new(&opts.params);
    let start = Instant::now();
    let (verdict, evidence) = if def.heavy && !opts.heavy {
        (Verdict::Skipped, json!({"reason": "heavy claim; enable with --heavy"}))
    } else {
        match (def.run)(&mut params) {
            Ok(o) => (if o.pass { Verdict::Pass } else { Verdict::Fail }, o.evidence),
            Err(e) => (Verdict::Fail, json!({"error": e.to_string()})),
        }
    };
    ClaimRecord {
        id: def.id.to_string(),
        location: def.location.to_string(),
        parameters: params.used,
        verdict,
        evidence,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

pub fn any_failed(records: &[ClaimRecord]) -> bool {
    records.iter().any(|r| r.verdict == Verdict::Fail)
}

/// A JSON number with the exact decimal value.
pub fn num(n: &BigInt) -> Value {
    serde_json::from_str(&n.to_string()).expect("integers are valid JSON numbers")
}

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

fn outcome(pass: bool, evidence: Value) -> Result<Outcome> {
    Ok(Outcome { pass, evidence })
}

// ---- basis ----

fn basis_counts(_: &mut Params) -> Result<Outcome> {
    let b = free_basis(&["a", "b"], 13)?;
    let want = [(4, 8), (5, 14), (6, 23), (7, 41), (10, 226), (13, 1377)];
    let cumulative: Vec<Value> = want
        .iter()
        .map(|&(w, n)| json!({"weight": w, "expected": n, "actual": b.count_up_to(w)}))
        .collect();
    let counts = b.weight_counts();
    let per_weight: Vec<Value> = (1..=13u32)
        .map(|w| json!({"weight": w, "witt": witt_count(2, w as u64) as u64, "actual": counts[w as usize]}))
        .collect();
    let pass = want.iter().all(|&(w, n)| b.count_up_to(w) == n)
        && (1..=13u32).all(|w| counts[w as usize] as u128 == witt_count(2, w as u64));
    outcome(pass, json!({"cumulative": cumulative, "per_weight": per_weight}))
}

pub const FIRST_EIGHT: [&str; 8] = [
    "a", "b", "[b,a]", "[b,a,a]", "[b,a,b]", "[b,a,a,a]", "[b,a,a,b]", "[b,a,b,b]",
];

fn basis_prefix(_: &mut Params) -> Result<Outcome> {
    let b = free_basis(&["a", "b"], 13)?;
    let got: Vec<String> = (1..=8).map(|i| b.flat_string(i)).collect();
    outcome(got == FIRST_EIGHT, json!({"expected": FIRST_EIGHT, "actual": got}))
}

/// `d_1 .. d_15` in the listed order.
pub const WEIGHTED_LIST: [&str; 15] = [
    "c",
    "d",
    "[d,c]",
    "[d,c,c]",
    "[d,c,d]",
    "[d,c,c,c]",
    "[d,c,c,d]",
    "[d,c,d,d]",
    "[d,c,c,c,c]",
    "[d,c,c,c,d]",
    "[d,c,c,d,d]",
    "[d,c,d,d,d]",
    "[d,c,c,[d,c]]",
    "[d,c,d,[d,c]]",
    "[d,c,c,c,c,c]",
];

fn basis_weighted(_: &mut Params) -> Result<Outcome> {
    let gens = [GeneratorDecl::new("c", 2), GeneratorDecl::new("d", 3)];
    let b = build_basis(&gens, 13)?;
    let got: Vec<String> = (1..=b.len() as u32).map(|i| b.flat_string(i)).collect();
    let missing: Vec<&str> = WEIGHTED_LIST.iter().copied().filter(|w| !got.iter().any(|g| g == w)).collect();
    let extra: Vec<&String> = got.iter().filter(|g| !WEIGHTED_LIST.contains(&g.as_str())).collect();
    let weights: Vec<Value> = WEIGHTED_LIST
        .iter()
        .map(|t| {
            let tree = Tree::parse(t).expect("valid tree");
            json!({"element": t, "leaf_weight": tree_weight(&tree, &gens)})
        })
        .collect();
    outcome(
        b.len() == 15 && missing.is_empty() && extra.is_empty(),
        json!({
            "expected_count": 15,
            "actual_count": b.len(),
            "actual": got,
            "missing": missing,
            "extra": extra,
            "leaf_weights": weights,
        }),
    )
}

fn tree_weight(t: &Tree, gens: &[GeneratorDecl]) -> u32 {
    match t {
        Tree::Leaf(n) => gens.iter().find(|g| &g.name == n).map_or(0, |g| g.weight),
        Tree::Node(l, r) => tree_weight(l, gens) + tree_weight(r, gens),
    }
}

// ---- oracle ----

/// Random word over `a, b` with nonzero exponents in `-max_exp..=max_exp`.
pub fn random_word(rng: &mut impl Rng, max_len: usize, max_exp: i64) -> Word<BigInt> {
    let len = rng.gen_range(1..=max_len);
    let mut f = Vec::with_capacity(len);
    for _ in 0..len {
        let g = rng.gen_range(1..=2u32);
        let mut e = rng.gen_range(1..=max_exp);
        if rng.gen_bool(0.5) {
            e = -e;
        }
        f.push((g, big(e)));
    }
    Word::new(f)
}

fn oracle_random_words(p: &mut Params) -> Result<Outcome> {
    let count = p.u64("samples", 500)? as usize;
    let seed = p.u64("seed", 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctxs: Vec<GroupContext<BigInt>> =
        (1..=6).map(|c| GroupContext::free(&["a", "b"], c)).collect::<Result<_>>()?;
    let oracles: Vec<Oracle<BigInt>> = ctxs.iter().map(Oracle::new).collect::<Result<_>>()?;
    let mut failures = Vec::new();
    let mut per_class = [0usize; 6];
    for _ in 0..count {
        let c = rng.gen_range(1..=6usize);
        let w = random_word(&mut rng, 10, 5);
        let nf = ctxs[c - 1].normal_form(&w)?;
        per_class[c - 1] += 1;
        if !oracles[c - 1].check(&w, &nf)? {
            failures.push(json!({"class": c, "word": format!("{:?}", w.factors())}));
        }
    }
    outcome(
        failures.is_empty(),
        json!({"samples": count, "per_class": per_class, "failures": failures}),
    )
}

// ---- Hall polynomials ----

fn hallpoly_checks(class: u32) -> Result<Outcome> {
    let e = hall_expansion(class)?;
    let b = e.context().basis();
    let named = [
        (3, "C(t,2)"),
        (4, "C(t,3)"),
        (5, "C(t,2) + 2C(t,3)"),
    ];
    let named_ok: Vec<Value> = named
        .iter()
        .map(|(id, want)| json!({"id": id, "element": b.flat_string(*id), "expected": want, "actual": e.poly(*id).to_string()}))
        .collect();
    let mut bad_zero = Vec::new();
    let mut bad_degree = Vec::new();
    for (id, p) in e.polys().skip(2) {
        if !p.coeff(0).is_zero() {
            bad_zero.push(id);
        }
        if p.degree().unwrap_or(0) as u32 > b.weight(id) {
            bad_degree.push(id);
        }
    }
    let (negative, zero) = coefficient_signs(&e);
    let pass = named.iter().all(|(id, want)| e.poly(*id).to_string() == *want)
        && bad_zero.is_empty()
        && bad_degree.is_empty()
        && negative.is_empty();
    // zero binomial coefficients below the degree are allowed and listed
    let zero_positions: Vec<Value> = zero.iter().map(|(id, j)| json!([id, j])).collect();
    outcome(
        pass,
        json!({
            "class": class,
            "polynomials": e.len() - 2,
            "named": named_ok,
            "nonzero_constant_term": bad_zero,
            "degree_above_weight": bad_degree,
            "negative_coefficients": negative,
            "zero_coefficient_count": zero.len(),
            "zero_coefficients": zero_positions,
        }),
    )
}

fn hallpoly_low(p: &mut Params) -> Result<Outcome> {
    let class = p.u64("class", 7)? as u32;
    hallpoly_checks(class)
}

fn hallpoly_13(_: &mut Params) -> Result<Outcome> {
    let mut o = hallpoly_checks(13)?;
    let e = hall_expansion(13)?;
    // f_4(q) = C(q,3) as polynomials; tail at 256 starts with C(256,2)
    let f4 = e.poly(4).to_string() == "C(t,3)";
    let tail = e.tail(&big(256));
    let c2 = tail.exponent(3) == big(32640);
    o.pass &= f4 && c2;
    o.evidence["tail256_first"] = num(&tail.exponent(3));
    Ok(o)
}

fn hall_power_expansion(_: &mut Params) -> Result<Outcome> {
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for class in 2..=6 {
        let e = hall_expansion(class)?;
        let ctx = e.context();
        let ab = ctx.eval_str("ab")?;
        for n in -6..=20 {
            let n = big(n);
            checked += 1;
            if e.evaluate(&n) != ctx.power(&ab, &n)? {
                mismatches.push(json!({"class": class, "n": num(&n)}));
            }
        }
    }
    outcome(mismatches.is_empty(), json!({"checked": checked, "mismatches": mismatches}))
}

fn power_commutator_expansion(_: &mut Params) -> Result<Outcome> {
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for class in 2..=6 {
        let ctx = GroupContext::<BigInt>::free(&["x", "y"], class)?;
        let exp = hall_expansion((class - 1).max(2))?;
        let x = ctx.generator("x")?;
        let y = ctx.generator("y")?;
        for n in -6..=6i64 {
            let via = power_commutator(&exp, &big(n), &x, &y, &ctx)?;
            let direct = ctx.eval_str(&format!("[y^{n}, x]"))?;
            checked += 1;
            if via != direct {
                mismatches.push(json!({"class": class, "n": n}));
            }
        }
    }
    // [y^2, x] at class 3 is [y,x]^2 [y,x,y]
    let ctx = GroupContext::<BigInt>::free(&["x", "y"], 3)?;
    let sq = ctx.eval_str("[y^2, x]")?;
    let want = ctx.eval_str("[y,x]^2 [y,x,y]")?;
    outcome(
        mismatches.is_empty() && sq == want,
        json!({"checked": checked, "mismatches": mismatches, "n2_class3": ctx.format(&sq)}),
    )
}

fn table_json(reports: &[TableReport]) -> Vec<Value> {
    reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| serde_json::to_value(r).expect("serializable"))
        .collect()
}

fn gamma3_expansion(_: &mut Params) -> Result<Outcome> {
    let mut reports = Vec::new();
    for r in 0..=6 {
        for s in 0..=6 {
            reports.push(weighted_expansion_gamma3_report(r, s)?);
        }
    }
    let example = weighted_expansion_gamma3_report(2, 3)?;
    let ex: Vec<String> = example.rows.iter().filter_map(|r| r.actual.clone()).collect();
    let pass = reports.iter().all(|r| r.pass) && ex == ["6", "6", "2", "3", "3", "0"];
    outcome(pass, json!({"cases": reports.len(), "r2_s3": ex, "failures": table_json(&reports)}))
}

fn drcs_table_claim(_: &mut Params) -> Result<Outcome> {
    let mut weighted = Vec::new();
    let mut unweighted = Vec::new();
    for r in 0..=6 {
        for s in 0..=6 {
            weighted.push(drcs_weighted_report(r, s)?);
            unweighted.push(drcs_unweighted_report(r, s)?);
        }
    }
    let absent = weighted[0].absent.clone();
    let pass = weighted.iter().all(|r| r.pass) && unweighted.iter().all(|r| r.pass);
    outcome(
        pass,
        json!({
            "cases": weighted.len(),
            "weighted_coordinates": weighted[0].rows.len(),
            "weighted_absent": absent,
            "unweighted_coordinates": unweighted[0].rows.len(),
            "weighted_failures": table_json(&weighted),
            "unweighted_failures": table_json(&unweighted),
        }),
    )
}

fn hallpoly_divisibility(_: &mut Params) -> Result<Outcome> {
    let e = hall_expansion(13)?;
    let b = e.context().basis();
    let mut failures = Vec::new();
    let mut checks = 0usize;
    for p in [2u64, 3, 5] {
        for k in 1..=6 {
            let q = BigInt::from(p).pow(k);
            let qp = &q / BigInt::from(p);
            for (id, f) in e.polys() {
                let w = b.weight(id) as u64;
                let v = f.eval(&q);
                if w < p {
                    checks += 1;
                    if !(&v % &q).is_zero() {
                        failures.push(json!({"p": p, "q": num(&q), "id": id, "divisor": "q"}));
                    }
                }
                if w < p * p {
                    checks += 1;
                    if !(&v % &qp).is_zero() {
                        failures.push(json!({"p": p, "q": num(&q), "id": id, "divisor": "q/p"}));
                    }
                }
            }
        }
    }
    outcome(failures.is_empty(), json!({"checks": checks, "failures": failures}))
}

// ---- binomial residues ----

fn residue_summary(p: u64, d: u64, j: u32, m: u64, k0: u32, k1: u32) -> Result<(bool, Option<u64>, Value)> {
    let r = verify_residue_stability(p, d, j, m, k0, k1)?;
    Ok((
        r.stable,
        r.residue,
        json!({"d": d, "stable": r.stable, "residue": r.residue}),
    ))
}

fn binres_2power(_: &mut Params) -> Result<Outcome> {
    let mut rows = Vec::new();
    let mut pass = true;
    for d in 1..=13u64 {
        let (stable, res, v) = residue_summary(2, d, 3, 8, 5, 12)?;
        pass &= stable;
        let want = match d {
            8 => Some(7),
            12 => Some(2),
            d if d % 2 == 1 => Some(0),
            _ => None,
        };
        if let Some(w) = want {
            pass &= res == Some(w);
        }
        rows.push(v);
    }
    outcome(pass, json!({"q": "2^5..2^12", "scale": "q/8", "modulus": 8, "rows": rows}))
}

fn binres_3power(_: &mut Params) -> Result<Outcome> {
    let (s2, r2, v2) = residue_summary(3, 2, 0, 9, 3, 10)?;
    let mut pass = s2 && r2 == Some(4);
    let mut rows = Vec::new();
    for d in 1..=13u64 {
        let (stable, _, v) = residue_summary(3, d, 2, 9, 3, 10)?;
        pass &= stable;
        rows.push(v);
    }
    outcome(pass, json!({"binom2_over_q": v2, "scale_q_over_9": rows}))
}

fn binres_bands(_: &mut Params) -> Result<Outcome> {
    // (p, k range, [(d range, j)]) with (q/p^j) | C(q,d)
    let cases: [(u64, u32, u32, &[(u64, u64, u32)]); 3] = [
        (2, 5, 12, &[(2, 3, 1), (1, 7, 2), (1, 15, 3)]),
        (3, 3, 10, &[(1, 2, 0), (1, 8, 1), (1, 26, 2)]),
        (5, 2, 8, &[(1, 4, 0), (1, 24, 1)]),
    ];
    let mut failures = Vec::new();
    let mut checks = 0;
    for (p, k0, k1, bands) in cases {
        for k in k0..=k1 {
            let q = BigInt::from(p).pow(k);
            for &(d0, d1, j) in bands {
                for d in d0..=d1 {
                    checks += 1;
                    if !divides_binomial(&q, d, j)? {
                        failures.push(json!({"p": p, "q": num(&q), "d": d, "j": j}));
                    }
                }
            }
        }
    }
    outcome(failures.is_empty(), json!({"checks": checks, "failures": failures}))
}

fn half_row(_: &mut Params) -> Result<Outcome> {
    let e = hall_expansion(13)?;
    let want = [4u64, 6, 7, 5, 5];
    let mut rows = Vec::new();
    let mut pass = true;
    for q in [32u64, 64, 128] {
        let qb = BigInt::from(q);
        let got: Vec<BigInt> = (4..=8).map(|i| e.poly(i).eval(&big(q as i64 / 2)).mod_floor(&qb)).collect();
        let expect: Vec<BigInt> = want.iter().map(|w| BigInt::from(w * q / 8)).collect();
        pass &= got == expect;
        rows.push(json!({"q": q, "residues": got.iter().map(num).collect::<Vec<_>>(), "expected": expect.iter().map(num).collect::<Vec<_>>()}));
    }
    outcome(pass, json!({"ids": [4, 5, 6, 7, 8], "rows": rows}))
}

// ---- representative vectors ----

fn rv_json(ctx: &GroupContext<BigInt>, v: &RepVector) -> Value {
    let nz: Vec<Value> = v
        .nonzero()
        .iter()
        .map(|(id, r)| json!({"id": id, "element": ctx.basis().flat_string(*id), "residue": r}))
        .collect();
    json!({"display": v.to_string(), "nonzero": nz, "length": v.len()})
}

fn spec13(q: u64) -> Result<(StratificationSpec, std::sync::Arc<GroupContext<BigInt>>)> {
    Ok((StratificationSpec::two_power(&BigInt::from(q), 13)?, shared_free_context(13)?))
}

fn rv_basic(p: &mut Params) -> Result<Outcome> {
    let q = p.u64("q", 32)?;
    let (spec, ctx) = spec13(q)?;
    let qb = BigInt::from(q);
    let ba = |k: &BigInt| ctx.basis_power(3, k.clone());
    let v = rv(&ctx, &ba(&(&qb * 4)), &spec)?;
    let mut want = RepVector::zero(8, rv_len(&ctx));
    want.entries[0] = 4;
    let k_not_n = in_k(&ctx, &ba(&qb), &spec)? && !in_n(&ctx, &ba(&qb), &spec)?;
    let n8 = in_n(&ctx, &ba(&(&qb * 8)), &spec)?;
    let id = in_k(&ctx, &ctx.identity(), &spec)? && in_n(&ctx, &ctx.identity(), &spec)?;
    let a = Expr::gen("a");
    let b = Expr::gen("b");
    let lead = rv_power_commutator(&a, &b, &spec)?;
    outcome(
        v == want && k_not_n && n8 && id && rv_len(&ctx) == 1375 && lead.at(3) == 1,
        json!({
            "rv": rv_json(&ctx, &v),
            "ba_q_in_k_not_n": k_not_n,
            "ba_8q_in_n": n8,
            "identity_in_k_and_n": id,
            "r": rv_len(&ctx),
            "power_commutator_b_a": rv_json(&ctx, &lead),
        }),
    )
}

fn rv_tail8q(p: &mut Params) -> Result<Outcome> {
    let q = p.u64("q", 32)?;
    let (spec, ctx) = spec13(q)?;
    let e = hall_expansion(13)?;
    let tail = e.tail(&BigInt::from(8 * q));
    let tail = ctx.from_exponents(tail.terms().iter().cloned())?;
    let v = rv(&ctx, &tail, &spec)?;
    let mut want = RepVector::zero(8, rv_len(&ctx));
    for i in [0, 3, 4, 5] {
        want.entries[i] = 4;
    }
    outcome(v == want, json!({"rv": rv_json(&ctx, &v), "expected": want.to_string()}))
}

fn rv_cicj(p: &mut Params) -> Result<Outcome> {
    let q = p.u64("q", 32)?;
    let (spec, ctx) = spec13(q)?;
    let b = ctx.basis();
    let find = |t: &str| b.find_tree(&Tree::parse(t).expect("valid")).ok_or_else(|| Error::InvalidArgument(t.into()));
    let ci = find("[b,a,a,a,a]")?;
    let cj = find("[b,a,a,a,b]")?;
    let ck = b.bracket_id(cj, ci).ok_or_else(|| Error::InvalidArgument("[c_j,c_i]".into()))?;
    let prod = ctx.multiply(&ctx.basis_power(ci, big(1)), &ctx.basis_power(cj, big(1)))?;
    let u = ctx.power(&prod, &BigInt::from(q / 4))?;
    let v = rv(&ctx, &u, &spec)?;
    let n = rv_len(&ctx);
    let want = RepVector::unit(8, n, ci, 1)
        .add(&RepVector::unit(8, n, cj, 1))
        .add(&RepVector::unit(8, n, ck, -1));
    outcome(
        v == want,
        json!({"i": ci, "j": cj, "k": ck, "k_element": b.nested_string(ck), "rv": rv_json(&ctx, &v)}),
    )
}

/// Deterministic sample of `(x, y)` pairs from words of length at most 2.
pub fn sample_pairs(count: usize, seed: u64) -> Vec<(Expr, Expr)> {
    let words = enumerate_words(2);
    let mut pairs: Vec<(Expr, Expr)> = words
        .iter()
        .flat_map(|x| words.iter().map(move |y| (x.clone(), y.clone())))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);
    pairs.truncate(count);
    pairs
}

fn q_independence(class: u32, count: usize, seed: u64, direct: bool) -> Result<Outcome> {
    let pairs = sample_pairs(count, seed);
    let qs = [32u64, 64, 128];
    let specs: Vec<StratificationSpec> = qs
        .iter()
        .map(|q| StratificationSpec::two_power(&BigInt::from(*q), class))
        .collect::<Result<_>>()?;
    let ctx = shared_free_context(class)?;
    let rows: Vec<Result<Value>> = pairs
        .par_iter()
        .map(|(x, y)| {
            let vs: Vec<RepVector> = specs
                .iter()
                .map(|s| rv_power_commutator(x, y, s))
                .collect::<Result<_>>()?;
            let equal = vs.iter().all(|v| *v == vs[0]);
            let direct_ok = if direct {
                Some(rv_power_commutator_direct(x, y, &specs[0])? == vs[0])
            } else {
                None
            };
            Ok(json!({
                "x": x.to_string(),
                "y": y.to_string(),
                "equal": equal,
                "direct_matches": direct_ok,
                "rv": rv_json(&ctx, &vs[0]),
            }))
        })
        .collect();
    let rows: Vec<Value> = rows.into_iter().collect::<Result<_>>()?;
    let pass = rows
        .iter()
        .all(|r| r["equal"] == json!(true) && r["direct_matches"] != json!(false));
    outcome(pass, json!({"class": class, "q": qs, "pairs": rows}))
}

fn rv_q_independence(p: &mut Params) -> Result<Outcome> {
    let n = p.u64("pairs", 20)? as usize;
    let seed = p.u64("seed", 7)?;
    q_independence(7, n, seed, true)
}

fn rv_q_independence_13(p: &mut Params) -> Result<Outcome> {
    let n = p.u64("pairs", 5)? as usize;
    let seed = p.u64("seed", 7)?;
    q_independence(13, n, seed, false)
}

/// Basis ids sampled from each band: the first, middle and last of the band.
pub fn band_representatives(ctx: &GroupContext<BigInt>, spec: &StratificationSpec) -> Vec<Vec<u32>> {
    let b = ctx.basis();
    let mut out = Vec::new();
    for (i, band) in spec.bands.iter().enumerate() {
        let hi = spec.bands.get(i + 1).map_or(spec.class_bound, |n| n.min_weight - 1);
        let ids: Vec<u32> = (1..=b.len() as u32)
            .filter(|&id| (band.min_weight..=hi).contains(&b.weight(id)))
            .collect();
        let mut pick = vec![ids[0], ids[ids.len() / 2], ids[ids.len() - 1]];
        pick.dedup();
        out.push(pick);
    }
    out
}

/// Random element of K: a product of band-scaled basis powers.
pub fn random_k_element(
    ctx: &GroupContext<BigInt>,
    spec: &StratificationSpec,
    rng: &mut impl Rng,
    in_n_only: bool,
) -> Result<ExponentVector<BigInt>> {
    let len = ctx.basis().len() as u32;
    let factors = rng.gen_range(1..=6);
    let mut acc = ctx.identity();
    for _ in 0..factors {
        // bias toward low weights, where the bands differ
        let id = if rng.gen_bool(0.5) { rng.gen_range(3..=41) } else { rng.gen_range(3..=len) };
        let band = spec.band_for(ctx.basis().weight(id)).expect("banded");
        let mut m = BigInt::from(rng.gen_range(-20i64..=20));
        if in_n_only {
            m *= spec.modulus;
        }
        let f = ctx.basis_power(id, &band.k_scale * m);
        acc = ctx.multiply(&acc, &f)?;
    }
    Ok(acc)
}

fn kn_structure(p: &mut Params) -> Result<Outcome> {
    let q = p.u64("q", 32)?;
    let samples = p.u64("samples", 200)? as usize;
    let seed = p.u64("seed", 3)?;
    let (spec, ctx) = spec13(q)?;
    // band generators commute modulo N
    let reps = band_representatives(&ctx, &spec);
    let mut commutators = 0;
    let mut not_in_n = Vec::new();
    for (bi, ids_i) in reps.iter().enumerate() {
        for (bj, ids_j) in reps.iter().enumerate().skip(bi) {
            for &i in ids_i {
                for &j in ids_j {
                    if i >= j && bi == bj {
                        continue;
                    }
                    let si = &spec.bands[bi].k_scale;
                    let sj = &spec.bands[bj].k_scale;
                    let u = ctx.basis_power(i, si.clone());
                    let v = ctx.basis_power(j, sj.clone());
                    let c = ctx.commutator(&u, &v)?;
                    commutators += 1;
                    if !in_n(&ctx, &c, &spec)? {
                        not_in_n.push(json!([i, j]));
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elems: Vec<ExponentVector<BigInt>> = (0..samples)
        .map(|k| random_k_element(&ctx, &spec, &mut rng, k % 4 == 3))
        .collect::<Result<_>>()?;
    let mut additivity_failures = Vec::new();
    let mut zero_failures = Vec::new();
    let mut zero_count = 0;
    for k in 0..samples {
        let u = &elems[k];
        let v = &elems[(k + 1) % samples];
        let ru = rv(&ctx, u, &spec)?;
        let rvv = rv(&ctx, v, &spec)?;
        let ruv = rv(&ctx, &ctx.multiply(u, v)?, &spec)?;
        if ruv != ru.add(&rvv) {
            additivity_failures.push(k);
        }
        let z = ru.is_zero();
        zero_count += z as usize;
        if z != in_n(&ctx, u, &spec)? {
            zero_failures.push(k);
        }
    }
    let r5 = rv_len(&*shared_free_context(10)?);
    outcome(
        not_in_n.is_empty() && additivity_failures.is_empty() && zero_failures.is_empty() && r5 == 224,
        json!({
            "r_2power_class13": rv_len(&ctx),
            "r_5power_class10": r5,
            "band_representatives": reps,
            "commutators_checked": commutators,
            "commutators_not_in_n": not_in_n,
            "samples": samples,
            "zero_vectors": zero_count,
            "additivity_failures": additivity_failures,
            "zero_test_failures": zero_failures,
        }),
    )
}

/// Keeps only the sign of exponents; used for quick summaries.
pub fn sign_pattern(u: &ExponentVector<BigInt>) -> Vec<(u32, i8)> {
    u.terms()
        .iter()
        .map(|(i, e)| (*i, if e.is_negative() { -1 } else { 1 }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_unique_and_sorted_output() {
        let reg = registry();
        let mut ids: Vec<&str> = reg.iter().map(|d| d.id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), reg.len());
        let recs = run_claims(&RunOptions {
            filter: Some("binres-*".into()),
            ..Default::default()
        })
        .unwrap();
        let got: Vec<&str> = recs.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(got, ["binres-2power", "binres-3power", "binres-bands"]);
    }

    #[test]
    fn empty_filter_match() {
        let recs = run_claims(&RunOptions {
            filter: Some("nonexistent-*".into()),
            ..Default::default()
        })
        .unwrap();
        assert!(recs.is_empty());
    }

    #[test]
    fn heavy_claims_skip() {
        let recs = run_claims(&RunOptions {
            filter: Some("rv-tail8q".into()),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(recs[0].verdict, Verdict::Skipped);
    }
}
