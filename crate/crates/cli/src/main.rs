use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nilcollect::claims::{any_failed, num, run_claims, RunOptions, Verdict};
use nilcollect::hallpoly::hall_expansion;
use nilcollect::residue::verify_residue_stability;
use nilcollect::strata::{enumerate_words, rv_power_commutator, span_accumulate, spec_context};
use nilcollect::{
    check_normal_form, rv, BigInt, Expr, GeneratorDecl, GroupContext, RepVector, SpanState,
    StratificationSpec,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "nilcollect", version, about = "Collection and Hall polynomials in free nilpotent groups")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct GroupArgs {
    /// Generators, e.g. `a,b` or `c:2,d:3`.
    #[arg(long, default_value = "a,b")]
    gens: String,
    #[arg(long, default_value_t = 6)]
    class: u32,
}

impl GroupArgs {
    fn context(&self) -> Result<GroupContext<BigInt>> {
        let gens = GeneratorDecl::parse_list(&self.gens)?;
        Ok(GroupContext::with_generators(&gens, self.class)?)
    }
}

#[derive(Args)]
struct SpecArgs {
    /// Built-in stratification: 2power, 3power or 5power.
    #[arg(long, default_value = "2power")]
    spec: String,
    #[arg(long, default_value = "32")]
    q: BigInt,
    #[arg(long, default_value_t = 13)]
    class: u32,
}

impl SpecArgs {
    fn build(&self) -> Result<StratificationSpec> {
        Ok(StratificationSpec::builtin(&self.spec, &self.q, self.class)?)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// List the basic commutators.
    Basis {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        json: bool,
    },
    /// Collect an expression into normal form.
    Collect {
        #[command(flatten)]
        group: GroupArgs,
        expr: String,
        #[arg(long)]
        json: bool,
    },
    /// Collect an expression and compare against the Magnus embedding.
    OracleCheck {
        #[command(flatten)]
        group: GroupArgs,
        expr: String,
    },
    /// Print the Hall polynomials of (ab)^t.
    Hallpoly {
        #[arg(long, default_value_t = 7)]
        class: u32,
        #[arg(long, default_value = "text", value_parser = ["text", "json"])]
        emit: String,
    },
    /// Residues of C(q, d) / (q / p^scale) modulo m over q = p^k.
    Binres {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        d: u64,
        #[arg(long, default_value_t = 0)]
        scale: u32,
        #[arg(long = "mod")]
        modulus: u64,
        /// `kmin:kmax`
        #[arg(long, default_value = "5:12")]
        krange: String,
        #[arg(long)]
        json: bool,
    },
    /// Representative vector of an element of K.
    Rv {
        #[command(flatten)]
        spec: SpecArgs,
        expr: String,
        #[arg(long)]
        json: bool,
    },
    /// Compare rv([y^q, x] N) across several q.
    RvScan {
        #[arg(long, default_value = "2power")]
        spec: String,
        #[arg(long, default_value_t = 7)]
        class: u32,
        #[arg(long, value_delimiter = ',', default_value = "32,64,128")]
        qs: Vec<BigInt>,
        /// Word length for the x, y enumeration.
        #[arg(long, default_value_t = 1)]
        len: usize,
    },
    /// Span of rv([y^q, x] N) over enumerated words, as a JSON report.
    Span {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 2)]
        len: usize,
        /// Expression whose rv is tested against the sampled span.
        #[arg(long)]
        query: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the claim registry.
    Verify {
        #[arg(long)]
        heavy: bool,
        #[arg(long)]
        filter: Option<String>,
        /// Emit one JSON record per claim.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parameter override `key=value`.
        #[arg(long = "param", value_parser = parse_kv)]
        params: Vec<(String, String)>,
    },
}

fn parse_kv(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .ok_or_else(|| format!("expected key=value, got `{s}`"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e)
            if e
                .downcast_ref::<io::Error>()
                .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn names(ctx: &GroupContext<BigInt>) -> Vec<String> {
    ctx.basis().generators().iter().map(|g| g.name.clone()).collect()
}

fn terms_json(ctx: &GroupContext<BigInt>, terms: &[(u32, BigInt)]) -> Value {
    terms
        .iter()
        .map(|(id, e)| json!({"id": id, "element": ctx.basis().flat_string(*id), "exponent": num(e)}))
        .collect()
}

fn rv_nonzero(ctx: &GroupContext<BigInt>, v: &RepVector) -> Vec<(String, u64)> {
    v.nonzero().into_iter().map(|(id, r)| (ctx.basis().flat_string(id), r)).collect()
}

fn run(cmd: Cmd) -> Result<bool> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cmd {
        Cmd::Basis { group, json } => {
            let ctx = group.context()?;
            let b = ctx.basis();
            for c in b.elements() {
                if json {
                    let row = json!({"id": c.id, "weight": c.weight, "element": b.flat_string(c.id), "nested": b.nested_string(c.id)});
                    writeln!(out, "{row}")?;
                } else {
                    writeln!(out, "{:>5} {:>3} {}", c.id, c.weight, b.flat_string(c.id))?;
                }
            }
            Ok(true)
        }
        Cmd::Collect { group, expr, json } => {
            let ctx = group.context()?;
            let e = Expr::parse(&expr, &names(&ctx))?;
            let u = ctx.eval(&e)?;
            if json {
                writeln!(out, "{}", json!({"expr": e.to_string(), "normal_form": terms_json(&ctx, u.terms())}))?;
            } else {
                writeln!(out, "{}", ctx.format(&u))?;
            }
            Ok(true)
        }
        Cmd::OracleCheck { group, expr } => {
            let ctx = group.context()?;
            let e = Expr::parse(&expr, &names(&ctx))?;
            let w = e.to_word(&ctx, 1 << 20)?;
            let nf = ctx.normal_form(&w)?;
            let ok = check_normal_form(&ctx, &w, &nf)?;
            writeln!(out, "{}  {}", if ok { "ok" } else { "MISMATCH" }, ctx.format(&nf))?;
            Ok(ok)
        }
        Cmd::Hallpoly { class, emit } => {
            let exp = hall_expansion(class)?;
            let b = exp.context().basis();
            for (id, p) in exp.polys() {
                if emit == "json" {
                    let coeffs: Vec<Value> = p.coeffs().iter().map(num).collect();
                    let row = json!({"id": id, "weight": b.weight(id), "element": b.flat_string(id), "coeffs": coeffs, "poly": p.to_string()});
                    writeln!(out, "{row}")?;
                } else {
                    writeln!(out, "{:>5} {:<24} {}", id, b.flat_string(id), p)?;
                }
            }
            Ok(true)
        }
        Cmd::Binres { p, d, scale, modulus, krange, json } => {
            let (k0, k1) = krange
                .split_once(':')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .ok_or_else(|| anyhow!("--krange must look like 5:12"))?;
            let r = verify_residue_stability(p, d, scale, modulus, k0, k1)?;
            if json {
                writeln!(out, "{}", serde_json::to_string(&r)?)?;
            } else {
                for row in &r.rows {
                    let mark = if row.below_threshold { " (below threshold)" } else { "" };
                    writeln!(out, "q={:<12} n={:<30} n mod {modulus} = {}{mark}", row.q, row.n, row.residue)?;
                }
                match r.residue {
                    Some(v) => writeln!(out, "stable: {v}")?,
                    None => writeln!(out, "not stable")?,
                }
            }
            Ok(r.stable)
        }
        Cmd::Rv { spec, expr, json } => {
            let s = spec.build()?;
            let ctx = spec_context(&s)?;
            let e = Expr::parse(&expr, &names(&ctx))?;
            let u = ctx.eval(&e)?;
            let v = rv(&ctx, &u, &s)?;
            if json {
                writeln!(out, "{}", json!({"expr": e.to_string(), "rv": v.to_string(), "nonzero": rv_nonzero(&ctx, &v)}))?;
            } else {
                for (name, r) in rv_nonzero(&ctx, &v) {
                    writeln!(out, "({name}, {r})")?;
                }
            }
            Ok(true)
        }
        Cmd::RvScan { spec, class, qs, len } => {
            if qs.is_empty() {
                bail!("--qs needs at least one value");
            }
            let specs: Vec<StratificationSpec> = qs
                .iter()
                .map(|q| StratificationSpec::builtin(&spec, q, class))
                .collect::<nilcollect::Result<_>>()?;
            let ctx = spec_context(&specs[0])?;
            let words = enumerate_words(len);
            let mut all_equal = true;
            for x in &words {
                for y in &words {
                    let vs: Vec<RepVector> = specs
                        .iter()
                        .map(|s| rv_power_commutator(x, y, s))
                        .collect::<nilcollect::Result<_>>()?;
                    let equal = vs.iter().all(|v| *v == vs[0]);
                    all_equal &= equal;
                    let row = json!({"x": x.to_string(), "y": y.to_string(), "equal": equal, "rv": rv_nonzero(&ctx, &vs[0])});
                    writeln!(out, "{row}")?;
                }
            }
            Ok(all_equal)
        }
        Cmd::Span { spec, len, query, out: path } => {
            let s = spec.build()?;
            let ctx = spec_context(&s)?;
            let words = enumerate_words(len);
            let pairs: Vec<(Expr, Expr)> = words
                .iter()
                .flat_map(|x| words.iter().map(move |y| (x.clone(), y.clone())))
                .collect();
            let state = span_accumulate(SpanState::for_spec(&s, &ctx)?, &pairs, &s)?;
            let mut report = json!({
                "spec": s.name,
                "q": num(&s.q),
                "class": s.class_bound,
                "word_length": len,
                "pairs": pairs.len(),
                "profile": state.profile(),
            });
            if let Some(q) = query {
                let e = Expr::parse(&q, &names(&ctx))?;
                let v = rv(&ctx, &ctx.eval(&e)?, &s)?;
                let answer = if state.contains(&v) { "in sampled span" } else { "not in sampled span" };
                report["query"] = json!({"expr": e.to_string(), "rv": v.to_string(), "answer": answer});
            }
            let text = serde_json::to_string_pretty(&report)?;
            match path {
                Some(p) => std::fs::write(&p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
                None => writeln!(out, "{text}")?,
            }
            Ok(true)
        }
        Cmd::Verify { heavy, filter, json, out: path, params } => {
            let opts = RunOptions {
                filter,
                heavy,
                params: params.into_iter().collect::<BTreeMap<_, _>>(),
            };
            let records = run_claims(&opts)?;
            let mut sink: Box<dyn Write> = match &path {
                Some(p) => Box::new(BufWriter::new(
                    File::create(p).with_context(|| format!("creating {}", p.display()))?,
                )),
                None => Box::new(&mut out),
            };
            for r in &records {
                if json || path.is_some() {
                    writeln!(sink, "{}", serde_json::to_string(r)?)?;
                } else {
                    let v = match r.verdict {
                        Verdict::Pass => "PASS",
                        Verdict::Fail => "FAIL",
                        Verdict::Skipped => "SKIP",
                    };
                    writeln!(sink, "{v:<5} {:<30} {:>10.1} ms  {}", r.id, r.runtime_ms, r.location)?;
                }
            }
            sink.flush()?;
            drop(sink);
            if path.is_some() && !json {
                let fails = records.iter().filter(|r| r.verdict == Verdict::Fail).count();
                writeln!(out, "{} claims, {} failed", records.len(), fails)?;
            }
            Ok(!any_failed(&records))
        }
    }
}
