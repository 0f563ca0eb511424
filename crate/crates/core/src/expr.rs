//! Expression syntax for group words.
//!
//! ```text
//! word   := factor+
//! factor := atom ('^' signed-integer)?
//! atom   := identifier | '(' word ')' | '[' word ',' word (',' word)* ']'
//! ```
//!
//! `[u,v,w]` is `[[u,v],w]`. Juxtaposed single-letter generators need no
//! separator (`ab` is `a b`); longer names must be separated by whitespace,
//! brackets or parentheses.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::collector::{ExponentVector, GroupContext, Word};
use crate::error::{Error, Result};
use crate::scalar::Exponent;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Gen(String),
    /// At least two factors.
    Product(Vec<Expr>),
    Power(Box<Expr>, BigInt),
    Bracket(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn gen(name: impl Into<String>) -> Self {
        Expr::Gen(name.into())
    }

    pub fn pow(self, n: impl Into<BigInt>) -> Self {
        Expr::Power(Box::new(self), n.into())
    }

    pub fn bracket(u: Expr, v: Expr) -> Self {
        Expr::Bracket(Box::new(u), Box::new(v))
    }

    /// Left-normed `[x1, x2, ..., xn]`.
    pub fn left_normed(items: Vec<Expr>) -> Self {
        let mut it = items.into_iter();
        let first = it.next().expect("left_normed needs an entry");
        it.fold(first, Expr::bracket)
    }

    pub fn product(mut items: Vec<Expr>) -> Self {
        if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Expr::Product(items)
        }
    }

    /// Parses with the given generator names.
    pub fn parse<S: AsRef<str>>(text: &str, generators: &[S]) -> Result<Expr> {
        let names: Vec<&str> = generators.iter().map(|s| s.as_ref()).collect();
        let mut p = Parser {
            chars: text.chars().collect(),
            pos: 0,
            names: &names,
        };
        p.skip_ws();
        let e = p.word()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(p.error("unexpected character"));
        }
        Ok(e)
    }

    /// Generator names used, in first-appearance order.
    pub fn generators(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_gens(&mut out);
        out
    }

    fn collect_gens(&self, out: &mut Vec<String>) {
        match self {
            Expr::Gen(g) => {
                if !out.contains(g) {
                    out.push(g.clone());
                }
            }
            Expr::Product(items) => items.iter().for_each(|i| i.collect_gens(out)),
            Expr::Power(b, _) => b.collect_gens(out),
            Expr::Bracket(u, v) => {
                u.collect_gens(out);
                v.collect_gens(out);
            }
        }
    }

    /// Expands into a flat word over generator ids, failing past `limit` factors.
    pub fn to_word<E: Exponent>(&self, ctx: &GroupContext<E>, limit: usize) -> Result<Word<E>> {
        let mut out = Vec::new();
        self.flatten(ctx, &mut out, limit)?;
        Ok(Word::new(out))
    }

    fn flatten<E: Exponent>(
        &self,
        ctx: &GroupContext<E>,
        out: &mut Vec<(u32, E)>,
        limit: usize,
    ) -> Result<()> {
        match self {
            Expr::Gen(g) => {
                let id = ctx
                    .basis()
                    .generator_id(g)
                    .ok_or_else(|| Error::UnknownGenerator(g.clone()))?;
                out.push((id, E::one()));
            }
            Expr::Product(items) => {
                for i in items {
                    i.flatten(ctx, out, limit)?;
                }
            }
            Expr::Power(b, n) => {
                if let Expr::Gen(g) = b.as_ref() {
                    let id = ctx
                        .basis()
                        .generator_id(g)
                        .ok_or_else(|| Error::UnknownGenerator(g.clone()))?;
                    out.push((id, convert(n)?));
                } else {
                    let mut inner = Vec::new();
                    b.flatten(ctx, &mut inner, limit)?;
                    if n.is_negative() {
                        inner = Word::new(inner).inverse().factors().to_vec();
                    }
                    let reps = n.abs().to_string().parse::<usize>().unwrap_or(usize::MAX);
                    let total = reps.saturating_mul(inner.len());
                    if out.len().saturating_add(total) > limit {
                        return Err(Error::WordTooLong(total));
                    }
                    for _ in 0..reps {
                        out.extend(inner.iter().cloned());
                    }
                }
            }
            Expr::Bracket(u, v) => {
                let mut wu = Vec::new();
                let mut wv = Vec::new();
                u.flatten(ctx, &mut wu, limit)?;
                v.flatten(ctx, &mut wv, limit)?;
                let c = Word::commutator(&Word::new(wu), &Word::new(wv));
                out.extend(c.factors().iter().cloned());
            }
        }
        if out.len() > limit {
            return Err(Error::WordTooLong(out.len()));
        }
        Ok(())
    }
}

fn convert<E: Exponent>(n: &BigInt) -> Result<E> {
    E::from_big(n).ok_or_else(|| Error::InvalidArgument(format!("exponent {n} does not fit")))
}

impl<E: Exponent> GroupContext<E> {
    /// Evaluates an expression directly, with powers computed in the group.
    pub fn eval(&self, e: &Expr) -> Result<ExponentVector<E>> {
        Ok(match e {
            Expr::Gen(g) => self.generator(g)?,
            Expr::Product(items) => {
                let vals = items.iter().map(|i| self.eval(i)).collect::<Result<Vec<_>>>()?;
                self.product(vals.iter())?
            }
            Expr::Power(b, n) => {
                let v = self.eval(b)?;
                self.power(&v, &convert(n)?)?
            }
            Expr::Bracket(u, v) => {
                let (x, y) = (self.eval(u)?, self.eval(v)?);
                self.commutator(&x, &y)?
            }
        })
    }

    /// Parses with this context's generators and evaluates.
    pub fn eval_str(&self, text: &str) -> Result<ExponentVector<E>> {
        let names: Vec<&str> = self.basis().generators().iter().map(|g| g.name.as_str()).collect();
        self.eval(&Expr::parse(text, &names)?)
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    names: &'a [&'a str],
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn at_atom_start(&self) -> bool {
        matches!(self.peek(), Some(c) if c == '(' || c == '[' || c.is_ascii_alphabetic() || c == '_')
    }

    fn word(&mut self) -> Result<Expr> {
        let mut items = Vec::new();
        loop {
            self.skip_ws();
            if !self.at_atom_start() {
                break;
            }
            items.extend(self.factor()?);
        }
        if items.is_empty() {
            return Err(self.error("expected a generator, '(' or '['"));
        }
        Ok(Expr::product(items))
    }

    /// One syntactic factor; a run like `ab` yields several.
    fn factor(&mut self) -> Result<Vec<Expr>> {
        let mut atoms = self.atom()?;
        self.skip_ws();
        if self.peek() == Some('^') {
            self.pos += 1;
            let n = self.signed_int()?;
            let last = atoms.pop().unwrap();
            atoms.push(last.pow(n));
        }
        Ok(atoms)
    }

    fn signed_int(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let mut neg = false;
        if let Some(c @ ('-' | '+')) = self.peek() {
            neg = c == '-';
            self.pos += 1;
            self.skip_ws();
        }
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer exponent"));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        let n: BigInt = digits.parse().expect("digits parse");
        Ok(if neg { -n } else { n })
    }

    fn atom(&mut self) -> Result<Vec<Expr>> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.word()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(vec![e])
            }
            Some('[') => {
                self.pos += 1;
                let mut items = vec![self.word()?];
                self.skip_ws();
                while self.peek() == Some(',') {
                    self.pos += 1;
                    items.push(self.word()?);
                    self.skip_ws();
                }
                if self.peek() != Some(']') {
                    return Err(self.error("expected ',' or ']'"));
                }
                if items.len() < 2 {
                    return Err(self.error("a bracket needs at least two entries"));
                }
                self.pos += 1;
                Ok(vec![Expr::left_normed(items)])
            }
            _ => self.identifier(),
        }
    }

    fn identifier(&mut self) -> Result<Vec<Expr>> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        let run: String = self.chars[start..self.pos].iter().collect();
        if self.names.contains(&run.as_str()) {
            return Ok(vec![Expr::Gen(run)]);
        }
        let mut out = Vec::new();
        for (i, c) in run.chars().enumerate() {
            let s = c.to_string();
            if !self.names.contains(&s.as_str()) {
                return Err(Error::Syntax {
                    pos: start + i,
                    msg: format!("undeclared identifier `{run}`"),
                });
            }
            out.push(Expr::Gen(s));
        }
        Ok(out)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Gen(g) => write!(f, "{g}"),
            Expr::Product(items) => {
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    match it {
                        Expr::Product(_) => write!(f, "({it})")?,
                        _ => write!(f, "{it}")?,
                    }
                }
                Ok(())
            }
            Expr::Power(b, n) => {
                match b.as_ref() {
                    Expr::Product(_) | Expr::Power(..) => write!(f, "({b})")?,
                    _ => write!(f, "{b}")?,
                }
                write!(f, "^{n}")
            }
            Expr::Bracket(..) => {
                let mut items = Vec::new();
                let mut cur = self;
                while let Expr::Bracket(u, v) = cur {
                    items.push(v.as_ref());
                    cur = u;
                }
                items.push(cur);
                items.reverse();
                write!(f, "[")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{it}")?;
                }
                write!(f, "]")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        Expr::parse(s, &["a", "b"]).unwrap()
    }

    #[test]
    fn commutator_word() {
        assert_eq!(
            p("b^-1 a^-1 b a"),
            Expr::Product(vec![
                Expr::gen("b").pow(-1),
                Expr::gen("a").pow(-1),
                Expr::gen("b"),
                Expr::gen("a")
            ])
        );
    }

    #[test]
    fn left_normed_sugar() {
        let ba = Expr::bracket(Expr::gen("b"), Expr::gen("a"));
        let want = Expr::bracket(Expr::bracket(ba.clone(), Expr::gen("a")), ba);
        assert_eq!(p("[b,a,a,[b,a]]"), want);
        assert_eq!(p("[b,a,a,[b,a]]").to_string(), "[b,a,a,[b,a]]");
    }

    #[test]
    fn juxtaposition_and_power() {
        let ab = Expr::Product(vec![Expr::gen("a"), Expr::gen("b")]);
        assert_eq!(p("(ab)^256"), ab.clone().pow(256));
        assert_eq!(p("( a b ) ^ 256"), ab.pow(256));
        assert_eq!(p("ab^2"), Expr::Product(vec![Expr::gen("a"), Expr::gen("b").pow(2)]));
    }

    #[test]
    fn multi_letter_names() {
        let names = ["x1", "y", "yy"];
        let e = Expr::parse("x1 yy y^3 [x1,y]", &names).unwrap();
        assert_eq!(e.to_string(), "x1 yy y^3 [x1,y]");
        assert_eq!(Expr::parse(&e.to_string(), &names).unwrap(), e);
        // "yyy" is not a name, so it splits into single letters
        assert_eq!(
            Expr::parse("yyy", &names).unwrap(),
            Expr::Product(vec![Expr::gen("y"); 3])
        );
    }

    #[test]
    fn errors_have_positions() {
        match Expr::parse("a b c", &["a", "b"]) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        match Expr::parse("(ab", &["a", "b"]) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 3),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("a^", &["a"]).is_err());
        assert!(Expr::parse("", &["a"]).is_err());
        assert!(Expr::parse("[a]", &["a"]).is_err());
    }

    #[test]
    fn big_exponent() {
        let e = p("a^123456789012345678901234567890");
        assert_eq!(e.to_string(), "a^123456789012345678901234567890");
    }

    #[test]
    fn eval_matches_flatten() {
        let g: GroupContext<i64> = GroupContext::free(&["a", "b"], 5).unwrap();
        for s in ["(ab)^3", "[b,a,a,[b,a]]", "[a^2 b, b^-1]^-2 a", "(a[b,a]^2)^-3"] {
            let e = p(s);
            let w = e.to_word(&g, 10_000).unwrap();
            assert_eq!(g.eval(&e).unwrap(), g.normal_form(&w).unwrap(), "{s}");
        }
    }
}
