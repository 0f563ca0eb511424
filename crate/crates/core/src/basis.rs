//! Hall basis of basic commutators.
//!
//! Generators occupy ids `1..=k` in declaration order. Brackets follow,
//! sorted by weight and, within a weight, lexicographically by
//! `(left id, right id)`. A bracket `[u, v]` is basic when `u > v` and, if
//! `u = [x, y]`, also `y <= v`. Weighted generators use graded truncation: an
//! element is kept iff the summed weight of its leaves is at most
//! `max_weight`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorDecl {
    pub name: String,
    pub weight: u32,
}

impl GeneratorDecl {
    pub fn new(name: impl Into<String>, weight: u32) -> Self {
        Self {
            name: name.into(),
            weight,
        }
    }

    pub fn unit(name: impl Into<String>) -> Self {
        Self::new(name, 1)
    }

    /// Parses `a`, `c:2`, ... comma separated.
    pub fn parse_list(text: &str) -> Result<Vec<GeneratorDecl>> {
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|item| match item.split_once(':') {
                Some((name, w)) => {
                    let weight = w
                        .trim()
                        .parse::<u32>()
                        .map_err(|_| Error::InvalidArgument(format!("bad weight in `{item}`")))?;
                    Ok(GeneratorDecl::new(name.trim(), weight))
                }
                None => Ok(GeneratorDecl::unit(item)),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Definition {
    /// Index into the generator list (0-based).
    Gen(u32),
    /// Bracket of two earlier basis ids.
    Bracket(u32, u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicCommutator {
    pub id: u32,
    pub weight: u32,
    pub definition: Definition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    generators: Vec<GeneratorDecl>,
    max_weight: u32,
    elements: Vec<BasicCommutator>,
    index: HashMap<(u32, u32), u32>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Builds the complete ordered Hall basis up to `max_weight`.
pub fn build_basis(generators: &[GeneratorDecl], max_weight: u32) -> Result<Basis> {
    if generators.is_empty() {
        return Err(Error::NoGenerators);
    }
    if max_weight == 0 {
        return Err(Error::ZeroMaxWeight);
    }
    for (i, g) in generators.iter().enumerate() {
        if !valid_name(&g.name) {
            return Err(Error::InvalidGeneratorName(g.name.clone()));
        }
        if g.weight == 0 {
            return Err(Error::ZeroWeight(g.name.clone()));
        }
        if generators[..i].iter().any(|h| h.name == g.name) {
            return Err(Error::DuplicateGenerator(g.name.clone()));
        }
    }

    let mut elements: Vec<BasicCommutator> = Vec::new();
    let mut index = HashMap::new();
    for (i, g) in generators.iter().enumerate() {
        // Generators heavier than the cap still get an id so that words
        // mentioning them parse; they simply never take part in brackets.
        elements.push(BasicCommutator {
            id: i as u32 + 1,
            weight: g.weight,
            definition: Definition::Gen(i as u32),
        });
    }

    let min_gen = generators.iter().map(|g| g.weight).min().unwrap();
    for w in (2 * min_gen)..=max_weight {
        let existing = elements.len();
        let mut fresh = Vec::new();
        for u in 0..existing {
            let eu = &elements[u];
            if eu.weight >= w || eu.weight > max_weight {
                continue;
            }
            let need = w - eu.weight;
            let right_bound = match eu.definition {
                Definition::Gen(_) => u32::MAX,
                Definition::Bracket(_, y) => y,
            };
            for ev in elements[..u].iter() {
                if ev.weight != need || ev.weight > max_weight {
                    continue;
                }
                if right_bound != u32::MAX && right_bound > ev.id {
                    continue;
                }
                fresh.push((eu.id, ev.id));
            }
        }
        for (l, r) in fresh {
            let id = elements.len() as u32 + 1;
            elements.push(BasicCommutator {
                id,
                weight: w,
                definition: Definition::Bracket(l, r),
            });
            index.insert((l, r), id);
        }
    }

    Ok(Basis {
        generators: generators.to_vec(),
        max_weight,
        elements,
        index,
    })
}

/// Unweighted generators with the given names.
pub fn free_basis(names: &[&str], max_weight: u32) -> Result<Basis> {
    let gens: Vec<_> = names.iter().map(|n| GeneratorDecl::unit(*n)).collect();
    build_basis(&gens, max_weight)
}

impl Basis {
    pub fn generators(&self) -> &[GeneratorDecl] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn max_weight(&self) -> u32 {
        self.max_weight
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[BasicCommutator] {
        &self.elements
    }

    /// Element by 1-based id.
    pub fn get(&self, id: u32) -> Option<&BasicCommutator> {
        id.checked_sub(1).and_then(|i| self.elements.get(i as usize))
    }

    pub fn element(&self, id: u32) -> &BasicCommutator {
        &self.elements[id as usize - 1]
    }

    pub fn weight(&self, id: u32) -> u32 {
        self.element(id).weight
    }

    /// Id of the basic commutator `[left, right]`, if it is in the basis.
    pub fn bracket_id(&self, left: u32, right: u32) -> Option<u32> {
        self.index.get(&(left, right)).copied()
    }

    pub fn generator_id(&self, name: &str) -> Option<u32> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .map(|i| i as u32 + 1)
    }

    /// Number of elements of each weight, indexed by weight.
    pub fn weight_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_weight as usize + 1];
        for e in &self.elements {
            if e.weight <= self.max_weight {
                counts[e.weight as usize] += 1;
            }
        }
        counts
    }

    /// Number of elements of weight at most `w`.
    pub fn count_up_to(&self, w: u32) -> usize {
        self.elements.iter().filter(|e| e.weight <= w).count()
    }

    /// Fully bracketed form, e.g. `[[b,a],a]`.
    pub fn nested_string(&self, id: u32) -> String {
        match self.element(id).definition {
            Definition::Gen(g) => self.generators[g as usize].name.clone(),
            Definition::Bracket(l, r) => {
                format!("[{},{}]", self.nested_string(l), self.nested_string(r))
            }
        }
    }

    /// Left-normed shorthand, e.g. `[b,a,a]` or `[b,a,a,[b,a]]`.
    pub fn flat_string(&self, id: u32) -> String {
        match self.element(id).definition {
            Definition::Gen(g) => self.generators[g as usize].name.clone(),
            Definition::Bracket(..) => {
                let mut parts = Vec::new();
                self.left_chain(id, &mut parts);
                format!("[{}]", parts.join(","))
            }
        }
    }

    fn left_chain(&self, id: u32, parts: &mut Vec<String>) {
        match self.element(id).definition {
            Definition::Gen(_) => parts.push(self.flat_string(id)),
            Definition::Bracket(l, r) => {
                self.left_chain(l, parts);
                parts.push(self.flat_string(r));
            }
        }
    }

    /// Finds the basis id whose bracket tree matches `tree`.
    pub fn find_tree(&self, tree: &Tree) -> Option<u32> {
        match tree {
            Tree::Leaf(name) => self.generator_id(name),
            Tree::Node(l, r) => {
                let l = self.find_tree(l)?;
                let r = self.find_tree(r)?;
                self.bracket_id(l, r)
            }
        }
    }

    /// Generator content of an element: how many times each generator occurs.
    pub fn content(&self, id: u32) -> Vec<u32> {
        let mut out = vec![0; self.rank()];
        self.add_content(id, &mut out);
        out
    }

    fn add_content(&self, id: u32, out: &mut [u32]) {
        match self.element(id).definition {
            Definition::Gen(g) => out[g as usize] += 1,
            Definition::Bracket(l, r) => {
                self.add_content(l, out);
                self.add_content(r, out);
            }
        }
    }
}

/// A bare bracket tree over generator names, used to look up basis elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tree {
    Leaf(String),
    Node(Box<Tree>, Box<Tree>),
}

impl Tree {
    /// Parses `[b,a,a,[b,a]]`-style notation (left-normed lists allowed).
    pub fn parse(text: &str) -> Result<Tree> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let t = Self::parse_at(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(Error::Syntax {
                pos,
                msg: "trailing input".into(),
            });
        }
        Ok(t)
    }

    fn parse_at(chars: &[char], pos: &mut usize) -> Result<Tree> {
        if chars.get(*pos) == Some(&'[') {
            *pos += 1;
            let mut acc = Self::parse_at(chars, pos)?;
            let mut n = 1;
            while chars.get(*pos) == Some(&',') {
                *pos += 1;
                let next = Self::parse_at(chars, pos)?;
                acc = Tree::Node(Box::new(acc), Box::new(next));
                n += 1;
            }
            if chars.get(*pos) != Some(&']') || n < 2 {
                return Err(Error::Syntax {
                    pos: *pos,
                    msg: "expected `,` or `]`".into(),
                });
            }
            *pos += 1;
            Ok(acc)
        } else {
            let start = *pos;
            while *pos < chars.len() && (chars[*pos].is_ascii_alphanumeric() || chars[*pos] == '_')
            {
                *pos += 1;
            }
            if start == *pos {
                return Err(Error::Syntax {
                    pos: start,
                    msg: "expected generator name".into(),
                });
            }
            Ok(Tree::Leaf(chars[start..*pos].iter().collect()))
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.elements {
            writeln!(
                f,
                "{}\t{}\t{}\t{}",
                e.id,
                e.weight,
                self.nested_string(e.id),
                self.flat_string(e.id)
            )?;
        }
        Ok(())
    }
}

fn mobius(mut n: u64) -> i64 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Witt's count of basic commutators of weight `weight` on `rank` generators.
pub fn witt_count(rank: u64, weight: u64) -> u128 {
    assert!(rank >= 1 && weight >= 1);
    let mut total: i128 = 0;
    for d in 1..=weight {
        if weight % d == 0 {
            total += mobius(d) as i128 * (rank as i128).pow((weight / d) as u32);
        }
    }
    (total / weight as i128) as u128
}
