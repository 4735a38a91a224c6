//! Finite ranked interpretations and model checking.
//!
//! Domains are `0..size` with `size <= 64`; sets of elements are bitmasks.
//! The preference relation is induced by the rank function: `x < y` iff
//! `rank(x) < rank(y)`.

use std::collections::BTreeMap;
use std::fmt;

use crate::concept::{Concept, LeftConcept, Name};
use crate::error::{Error, Result};
use crate::kb::{Assertion, KnowledgeBase, Query};

pub const MAX_DOMAIN: usize = 64;

/// A subset of a model's domain.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elements(pub u64);

impl Elements {
    pub fn empty() -> Self {
        Elements(0)
    }

    pub fn all(size: usize) -> Self {
        if size >= 64 {
            Elements(u64::MAX)
        } else {
            Elements((1u64 << size) - 1)
        }
    }

    pub fn from_slice(xs: &[usize]) -> Self {
        Elements(xs.iter().fold(0, |m, &x| m | (1 << x)))
    }

    pub fn contains(self, x: usize) -> bool {
        x < 64 && self.0 >> x & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: Elements) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: Elements) -> Elements {
        Elements(self.0 | other.0)
    }

    pub fn intersection(self, other: Elements) -> Elements {
        Elements(self.0 & other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&x| self.contains(x))
    }
}

impl fmt::Debug for Elements {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// All subsets of a domain of the given size.
pub fn all_subsets(size: usize) -> Vec<Elements> {
    assert!(size <= 16, "too many subsets");
    (0..1u64 << size).map(Elements).collect()
}

/// A concept compiled against a vocabulary of atom and role indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Expr {
    Top,
    Bot,
    Atom(usize),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Exists(usize, Box<Expr>),
    Forall(usize, Box<Expr>),
}

impl Expr {
    pub(crate) fn compile(c: &Concept, atoms: &[Name], roles: &[Name]) -> Result<Expr> {
        let atom = |n: &Name| {
            atoms.iter().position(|a| a == n).ok_or_else(|| Error::UnknownName(n.to_string()))
        };
        let role = |n: &Name| {
            roles.iter().position(|a| a == n).ok_or_else(|| Error::UnknownName(n.to_string()))
        };
        let sub = |c: &Concept| Expr::compile(c, atoms, roles).map(Box::new);
        Ok(match c {
            Concept::Top => Expr::Top,
            Concept::Bottom => Expr::Bot,
            Concept::Atom(n) => Expr::Atom(atom(n)?),
            Concept::Not(a) => Expr::Not(sub(a)?),
            Concept::And(a, b) => Expr::And(sub(a)?, sub(b)?),
            Concept::Or(a, b) => Expr::Or(sub(a)?, sub(b)?),
            Concept::Exists(r, f) => Expr::Exists(role(r)?, sub(f)?),
            Concept::Forall(r, f) => Expr::Forall(role(r)?, sub(f)?),
        })
    }

    pub(crate) fn role_free(&self) -> bool {
        match self {
            Expr::Top | Expr::Bot | Expr::Atom(_) => true,
            Expr::Not(a) => a.role_free(),
            Expr::And(a, b) | Expr::Or(a, b) => a.role_free() && b.role_free(),
            Expr::Exists(..) | Expr::Forall(..) => false,
        }
    }

    /// Role restrictions occurring in the expression, outermost first.
    pub(crate) fn role_restrictions<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        match self {
            Expr::Top | Expr::Bot | Expr::Atom(_) => {}
            Expr::Not(a) => a.role_restrictions(out),
            Expr::And(a, b) | Expr::Or(a, b) => {
                a.role_restrictions(out);
                b.role_restrictions(out);
            }
            Expr::Exists(_, f) | Expr::Forall(_, f) => {
                out.push(self);
                f.role_restrictions(out);
            }
        }
    }

    /// Truth at an element with atom mask `mask` whose `r`-successors carry
    /// exactly the masks in `succ[r]`. Fillers must be role-free.
    pub(crate) fn eval_local(&self, mask: u64, succ: &[Vec<u64>]) -> bool {
        match self {
            Expr::Top => true,
            Expr::Bot => false,
            Expr::Atom(i) => mask >> i & 1 == 1,
            Expr::Not(a) => !a.eval_local(mask, succ),
            Expr::And(a, b) => a.eval_local(mask, succ) && b.eval_local(mask, succ),
            Expr::Or(a, b) => a.eval_local(mask, succ) || b.eval_local(mask, succ),
            Expr::Exists(r, f) => succ[*r].iter().any(|&m| f.eval_local(m, &[])),
            Expr::Forall(r, f) => succ[*r].iter().all(|&m| f.eval_local(m, &[])),
        }
    }
}

/// A finite ranked interpretation.
#[derive(Clone, PartialEq, Eq)]
pub struct RankedInterpretation {
    pub(crate) size: usize,
    pub(crate) atom_names: Vec<Name>,
    pub(crate) atom_ext: Vec<u64>,
    pub(crate) role_names: Vec<Name>,
    pub(crate) role_succ: Vec<Vec<u64>>,
    pub(crate) ranks: Vec<u32>,
    pub(crate) individuals: BTreeMap<Name, usize>,
}

impl RankedInterpretation {
    /// A model of the given size with every element at rank 0 and no names.
    pub fn new(size: usize) -> Result<Self> {
        if size > MAX_DOMAIN {
            return Err(Error::GuardExceeded { what: "domain size", size, limit: MAX_DOMAIN });
        }
        Ok(RankedInterpretation {
            size,
            atom_names: Vec::new(),
            atom_ext: Vec::new(),
            role_names: Vec::new(),
            role_succ: Vec::new(),
            ranks: vec![0; size],
            individuals: BTreeMap::new(),
        })
    }

    pub(crate) fn with_vocabulary(size: usize, atoms: &[Name], roles: &[Name]) -> Self {
        RankedInterpretation {
            size,
            atom_names: atoms.to_vec(),
            atom_ext: vec![0; atoms.len()],
            role_names: roles.to_vec(),
            role_succ: vec![vec![0; size]; roles.len()],
            ranks: vec![0; size],
            individuals: BTreeMap::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn domain(&self) -> Elements {
        Elements::all(self.size)
    }

    pub fn rank(&self, x: usize) -> u32 {
        self.ranks[x]
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn individual(&self, name: &str) -> Option<usize> {
        self.individuals.get(name).copied()
    }

    pub fn atom(&self, name: &str) -> Option<Elements> {
        let i = self.atom_names.iter().position(|a| a.as_str() == name)?;
        Some(Elements(self.atom_ext[i]))
    }

    pub fn declare_atom(&mut self, name: &str) -> usize {
        match self.atom_names.iter().position(|a| a.as_str() == name) {
            Some(i) => i,
            None => {
                self.atom_names.push(Name::new(name));
                self.atom_ext.push(0);
                self.atom_names.len() - 1
            }
        }
    }

    pub fn declare_role(&mut self, name: &str) -> usize {
        match self.role_names.iter().position(|a| a.as_str() == name) {
            Some(i) => i,
            None => {
                self.role_names.push(Name::new(name));
                self.role_succ.push(vec![0; self.size]);
                self.role_names.len() - 1
            }
        }
    }

    pub fn set_atom(&mut self, name: &str, xs: &[usize]) {
        let i = self.declare_atom(name);
        self.atom_ext[i] = Elements::from_slice(xs).0 & self.domain().0;
    }

    pub fn add_edge(&mut self, role: &str, x: usize, y: usize) {
        let r = self.declare_role(role);
        self.role_succ[r][x] |= 1 << y;
    }

    pub fn set_rank(&mut self, x: usize, rank: u32) {
        self.ranks[x] = rank;
    }

    pub fn set_ranks(&mut self, ranks: &[u32]) {
        self.ranks.copy_from_slice(ranks);
    }

    pub fn map_individual(&mut self, name: &str, x: usize) {
        self.individuals.insert(Name::new(name), x);
    }

    /// Ranks are contiguous from 0.
    pub fn is_normalized(&self) -> bool {
        let max = self.ranks.iter().copied().max().unwrap_or(0);
        (0..=max).all(|r| self.ranks.contains(&r)) || self.size == 0
    }

    /// The same model with ranks compressed to `0..levels`; preserves the
    /// induced order.
    pub fn normalized(&self) -> Self {
        let mut levels: Vec<u32> = self.ranks.clone();
        levels.sort_unstable();
        levels.dedup();
        let mut out = self.clone();
        for r in &mut out.ranks {
            *r = levels.binary_search(r).expect("level exists") as u32;
        }
        out
    }

    pub fn precedes(&self, x: usize, y: usize) -> bool {
        self.ranks[x] < self.ranks[y]
    }

    /// Irreflexivity, transitivity and modularity of the induced order,
    /// checked on the relation itself.
    pub fn order_is_ranked(&self) -> bool {
        let n = self.size;
        for x in 0..n {
            if self.precedes(x, x) {
                return false;
            }
            for y in 0..n {
                for z in 0..n {
                    if self.precedes(x, y) && self.precedes(y, z) && !self.precedes(x, z) {
                        return false;
                    }
                    if self.precedes(x, y) && !(self.precedes(x, z) || self.precedes(z, y)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Length of the longest descending chain starting at `x`.
    pub fn chain_length(&self, x: usize) -> u32 {
        let mut memo = vec![None; self.size];
        self.chain_from(x, &mut memo)
    }

    fn chain_from(&self, x: usize, memo: &mut Vec<Option<u32>>) -> u32 {
        if let Some(v) = memo[x] {
            return v;
        }
        let v = (0..self.size)
            .filter(|&y| self.precedes(y, x))
            .map(|y| self.chain_from(y, memo) + 1)
            .max()
            .unwrap_or(0);
        memo[x] = Some(v);
        v
    }

    pub(crate) fn compile(&self, c: &Concept) -> Result<Expr> {
        Expr::compile(c, &self.atom_names, &self.role_names)
    }

    pub(crate) fn eval(&self, e: &Expr) -> u64 {
        let domain = self.domain().0;
        match e {
            Expr::Top => domain,
            Expr::Bot => 0,
            Expr::Atom(i) => self.atom_ext[*i],
            Expr::Not(a) => domain & !self.eval(a),
            Expr::And(a, b) => self.eval(a) & self.eval(b),
            Expr::Or(a, b) => self.eval(a) | self.eval(b),
            Expr::Exists(r, f) => {
                let f = self.eval(f);
                let succ = &self.role_succ[*r];
                (0..self.size).filter(|&x| succ[x] & f != 0).fold(0, |m, x| m | 1 << x)
            }
            Expr::Forall(r, f) => {
                let f = self.eval(f);
                let succ = &self.role_succ[*r];
                (0..self.size).filter(|&x| succ[x] & !f == 0).fold(0, |m, x| m | 1 << x)
            }
        }
    }

    /// Elements of `set` with minimal rank among them.
    pub fn minimal(&self, set: Elements) -> Elements {
        let Some(best) = set.iter().map(|x| self.ranks[x]).min() else {
            return Elements::empty();
        };
        Elements(set.iter().filter(|&x| self.ranks[x] == best).fold(0, |m, x| m | 1 << x))
    }

    pub(crate) fn minimal_mask(&self, set: u64) -> u64 {
        self.minimal(Elements(set)).0
    }

    fn individual_element(&self, name: &Name) -> Result<usize> {
        self.individuals
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnmappedIndividual(name.to_string()))
    }
}

pub fn extension(m: &RankedInterpretation, c: &Concept) -> Result<Elements> {
    Ok(Elements(m.eval(&m.compile(c)?)))
}

/// `(T(C))^I`: the minimal-rank elements of `C^I`.
pub fn typical_set(m: &RankedInterpretation, c: &Concept) -> Result<Elements> {
    Ok(m.minimal(extension(m, c)?))
}

fn left_extension(m: &RankedInterpretation, left: &LeftConcept) -> Result<Elements> {
    match left {
        LeftConcept::Plain(c) => extension(m, c),
        LeftConcept::Typical(c) => typical_set(m, c),
    }
}

fn assertion_holds(m: &RankedInterpretation, a: &Assertion) -> Result<bool> {
    match a {
        Assertion::Concept { left, individual } => {
            let x = m.individual_element(individual)?;
            Ok(left_extension(m, left)?.contains(x))
        }
        Assertion::Role { role, subject, object } => {
            let x = m.individual_element(subject)?;
            let y = m.individual_element(object)?;
            Ok(match m.role_names.iter().position(|r| r == role) {
                Some(r) => m.role_succ[r][x] >> y & 1 == 1,
                None => false,
            })
        }
    }
}

/// Every inclusion and assertion of the KB holds in `m`.
pub fn satisfies(m: &RankedInterpretation, kb: &KnowledgeBase) -> Result<bool> {
    for inc in kb.inclusions() {
        if !left_extension(m, &inc.left)?.is_subset(extension(m, &inc.right)?) {
            return Ok(false);
        }
    }
    for a in kb.abox() {
        if !assertion_holds(m, a)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn satisfies_query(m: &RankedInterpretation, q: &Query) -> Result<bool> {
    match q {
        Query::Inclusion { left, right } => Ok(left_extension(m, left)?.is_subset(extension(m, right)?)),
        Query::Assertion(a) => assertion_holds(m, a),
    }
}

impl fmt::Display for RankedInterpretation {
    /// One row per element: rank, atoms, role edges, individuals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut rows = vec![[
            "element".to_string(),
            "rank".to_string(),
            "atoms".to_string(),
            "edges".to_string(),
            "individuals".to_string(),
        ]];
        for x in 0..self.size {
            let atoms: Vec<&str> = self
                .atom_names
                .iter()
                .zip(&self.atom_ext)
                .filter(|(_, ext)| *ext >> x & 1 == 1)
                .map(|(n, _)| n.as_str())
                .collect();
            let mut edges = Vec::new();
            for (r, succ) in self.role_names.iter().zip(&self.role_succ) {
                for y in Elements(succ[x]).iter() {
                    edges.push(format!("{r}->{y}"));
                }
            }
            let inds: Vec<&str> = self
                .individuals
                .iter()
                .filter(|(_, &e)| e == x)
                .map(|(n, _)| n.as_str())
                .collect();
            let or_dash = |v: Vec<String>| if v.is_empty() { "-".to_string() } else { v.join(", ") };
            rows.push([
                x.to_string(),
                self.ranks[x].to_string(),
                or_dash(atoms.into_iter().map(String::from).collect()),
                or_dash(edges),
                or_dash(inds.into_iter().map(String::from).collect()),
            ]);
        }
        let widths: Vec<usize> = (0..5).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
        for row in &rows {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(cell, w)| format!("{cell:<w$}"))
                .collect();
            writeln!(f, "{}", line.join("  ").trim_end())?;
        }
        Ok(())
    }
}

impl fmt::Debug for RankedInterpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Postulate number, 1 to 6.
    pub postulate: u8,
    pub witnesses: Vec<Elements>,
}

#[derive(Clone, Debug, Default)]
pub struct PostulateReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl PostulateReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violated(&self, postulate: u8) -> bool {
        self.violations.iter().any(|v| v.postulate == postulate)
    }
}

/// Checks the six selection-function postulates for the model's own `f_T`
/// over every set and every pair of sets in `family`, and over the family
/// as a whole for the union postulates.
pub fn check_postulates(m: &RankedInterpretation, family: &[Elements]) -> PostulateReport {
    check_postulates_with(family, |s| m.minimal(s))
}

/// As [`check_postulates`] with an arbitrary selection function.
pub fn check_postulates_with<F: Fn(Elements) -> Elements>(family: &[Elements], f: F) -> PostulateReport {
    let mut report = PostulateReport::default();
    let fail = |report: &mut PostulateReport, postulate: u8, witnesses: Vec<Elements>| {
        report.violations.push(Violation { postulate, witnesses });
    };
    let selected: Vec<Elements> = family.iter().map(|&s| f(s)).collect();
    for (&s, &fs) in family.iter().zip(&selected) {
        report.checked += 2;
        if !fs.is_subset(s) {
            fail(&mut report, 1, vec![s]);
        }
        if !s.is_empty() && fs.is_empty() {
            fail(&mut report, 2, vec![s]);
        }
    }
    for (&s, &fs) in family.iter().zip(&selected) {
        for (&r, &fr) in family.iter().zip(&selected) {
            report.checked += 4;
            let meet = s.intersection(r);
            let join = s.union(r);
            if fs.is_subset(r) && fs != f(meet) {
                fail(&mut report, 3, vec![s, r]);
            }
            let fj = f(join);
            if !fj.is_subset(fs.union(fr)) {
                fail(&mut report, 4, vec![s, r]);
            }
            if !fs.intersection(fr).is_subset(fj) {
                fail(&mut report, 5, vec![s, r]);
            }
            if !fs.intersection(r).is_empty() && !f(meet).is_subset(fs) {
                fail(&mut report, 6, vec![s, r]);
            }
        }
    }
    if !family.is_empty() {
        report.checked += 2;
        let join = family.iter().fold(Elements::empty(), |a, &b| a.union(b));
        let fj = f(join);
        let union_sel = selected.iter().fold(Elements::empty(), |a, &b| a.union(b));
        let meet_sel = selected.iter().fold(Elements::all(64), |a, &b| a.intersection(b));
        if !fj.is_subset(union_sel) {
            fail(&mut report, 4, family.to_vec());
        }
        if !meet_sel.is_subset(fj) {
            fail(&mut report, 5, family.to_vec());
        }
    }
    report
}
