//! Inclusions, assertions, knowledge bases and queries.

use std::collections::BTreeSet;
use std::fmt;

use crate::concept::{canonical_form, Concept, LeftConcept, Name};
use crate::error::{Error, Result};
use crate::probability::Probability;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Dialect {
    /// ALC with typicality inclusions, no probabilities.
    #[default]
    Plain,
    /// Typicality inclusions annotated with probabilities of exceptions.
    AlcTp,
    /// Rigid properties plus probabilistic typical properties for concept
    /// combination.
    Tcl,
}

impl Dialect {
    pub fn keyword(self) -> &'static str {
        match self {
            Dialect::Plain => "plain",
            Dialect::AlcTp => "alctp",
            Dialect::Tcl => "tcl",
        }
    }

    /// Open interval allowed for probability annotations, if any.
    pub fn probability_range(self) -> Option<(Probability, Probability)> {
        match self {
            Dialect::Plain => None,
            Dialect::AlcTp => Some((Probability::zero(), Probability::one())),
            Dialect::Tcl => Some((Probability::from_ratio(1, 2), Probability::one())),
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Inclusion {
    pub left: LeftConcept,
    pub right: Concept,
    pub probability: Option<Probability>,
}

impl Inclusion {
    pub fn strict(left: Concept, right: Concept) -> Self {
        Inclusion { left: LeftConcept::Plain(left), right, probability: None }
    }

    pub fn typical(left: Concept, right: Concept) -> Self {
        Inclusion { left: LeftConcept::Typical(left), right, probability: None }
    }

    pub fn with_probability(mut self, p: Probability) -> Self {
        self.probability = Some(p);
        self
    }

    /// The concept under `T`, or the plain left-hand side.
    pub fn antecedent(&self) -> &Concept {
        self.left.concept()
    }

    pub fn is_defeasible(&self) -> bool {
        self.left.is_typical()
    }

    /// The same inclusion without its probability annotation.
    pub fn without_probability(&self) -> Self {
        Inclusion { probability: None, ..self.clone() }
    }
}

impl fmt::Display for Inclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = &self.probability {
            write!(f, "{p} :: ")?;
        }
        write!(f, "{} <= {}", self.left, self.right)
    }
}

impl fmt::Debug for Inclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Assertion {
    Concept { left: LeftConcept, individual: Name },
    Role { role: Name, subject: Name, object: Name },
}

impl Assertion {
    pub fn concept(individual: &str, c: Concept) -> Self {
        Assertion::Concept { left: LeftConcept::Plain(c), individual: Name::new(individual) }
    }

    pub fn typical(individual: &str, c: Concept) -> Self {
        Assertion::Concept { left: LeftConcept::Typical(c), individual: Name::new(individual) }
    }

    pub fn role(role: &str, subject: &str, object: &str) -> Self {
        Assertion::Role {
            role: Name::new(role),
            subject: Name::new(subject),
            object: Name::new(object),
        }
    }

    pub fn individuals(&self) -> Vec<&Name> {
        match self {
            Assertion::Concept { individual, .. } => vec![individual],
            Assertion::Role { subject, object, .. } => vec![subject, object],
        }
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assertion::Concept { left, individual } => write!(f, "{individual} : {left}"),
            Assertion::Role { role, subject, object } => write!(f, "({subject}, {object}) : {role}"),
        }
    }
}

impl fmt::Debug for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A query: an inclusion (strict or typicality) or an assertion.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Query {
    Inclusion { left: LeftConcept, right: Concept },
    Assertion(Assertion),
}

impl Query {
    pub fn strict(c: Concept, d: Concept) -> Self {
        Query::Inclusion { left: LeftConcept::Plain(c), right: d }
    }

    pub fn typical(c: Concept, d: Concept) -> Self {
        Query::Inclusion { left: LeftConcept::Typical(c), right: d }
    }

    pub fn concepts(&self) -> Vec<&Concept> {
        match self {
            Query::Inclusion { left, right } => vec![left.concept(), right],
            Query::Assertion(Assertion::Concept { left, .. }) => vec![left.concept()],
            Query::Assertion(Assertion::Role { .. }) => vec![],
        }
    }

    pub fn individuals(&self) -> Vec<&Name> {
        match self {
            Query::Inclusion { .. } => vec![],
            Query::Assertion(a) => a.individuals(),
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Inclusion { left, right } => write!(f, "{left} <= {right}"),
            Query::Assertion(a) => write!(f, "{a}"),
        }
    }
}

impl fmt::Debug for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A knowledge base in one of three dialects. Immutable once built; the
/// constructor enforces the dialect invariants.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct KnowledgeBase {
    dialect: Dialect,
    strict: Vec<Inclusion>,
    defeasible: Vec<Inclusion>,
    abox: Vec<Assertion>,
}

impl KnowledgeBase {
    pub fn new(
        dialect: Dialect,
        strict: Vec<Inclusion>,
        defeasible: Vec<Inclusion>,
        abox: Vec<Assertion>,
    ) -> Result<Self> {
        for inc in &strict {
            if inc.left.is_typical() || inc.probability.is_some() {
                return Err(Error::Malformed(format!("`{inc}` is not a strict inclusion")));
            }
        }
        for inc in &defeasible {
            if !inc.left.is_typical() {
                return Err(Error::Malformed(format!("`{inc}` is not a typicality inclusion")));
            }
            check_probability(dialect, inc)?;
        }
        Ok(KnowledgeBase { dialect, strict, defeasible, abox })
    }

    /// Builds a KB from a mixed list of inclusions, splitting strict and
    /// defeasible ones while keeping source order.
    pub fn from_parts(dialect: Dialect, inclusions: Vec<Inclusion>, abox: Vec<Assertion>) -> Result<Self> {
        let (defeasible, strict) = inclusions.into_iter().partition(|i| i.is_defeasible());
        Self::new(dialect, strict, defeasible, abox)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn dialect(&self) -> Dialect {
        self.dialect
    }

    pub fn strict(&self) -> &[Inclusion] {
        &self.strict
    }

    pub fn defeasible(&self) -> &[Inclusion] {
        &self.defeasible
    }

    pub fn abox(&self) -> &[Assertion] {
        &self.abox
    }

    pub fn is_empty(&self) -> bool {
        self.strict.is_empty() && self.defeasible.is_empty() && self.abox.is_empty()
    }

    /// The plain-dialect KB obtained by dropping every probability.
    pub fn without_probabilities(&self) -> Self {
        KnowledgeBase {
            dialect: Dialect::Plain,
            strict: self.strict.clone(),
            defeasible: self.defeasible.iter().map(Inclusion::without_probability).collect(),
            abox: self.abox.clone(),
        }
    }

    pub fn with_abox(&self, abox: Vec<Assertion>) -> Self {
        KnowledgeBase { abox, ..self.clone() }
    }

    pub fn with_extra_assertions<I: IntoIterator<Item = Assertion>>(&self, extra: I) -> Self {
        let mut abox = self.abox.clone();
        abox.extend(extra);
        self.with_abox(abox)
    }

    pub fn with_defeasible(&self, defeasible: Vec<Inclusion>) -> Result<Self> {
        Self::new(self.dialect, self.strict.clone(), defeasible, self.abox.clone())
    }

    /// All inclusions: strict first, then defeasible.
    pub fn inclusions(&self) -> impl Iterator<Item = &Inclusion> {
        self.strict.iter().chain(self.defeasible.iter())
    }

    /// Every concept occurring at the top of an inclusion side or assertion.
    pub fn top_level_concepts(&self) -> Vec<&Concept> {
        let mut out = Vec::new();
        for inc in self.inclusions() {
            out.push(inc.antecedent());
            out.push(&inc.right);
        }
        for a in &self.abox {
            if let Assertion::Concept { left, .. } = a {
                out.push(left.concept());
            }
        }
        out
    }
}

fn check_probability(dialect: Dialect, inc: &Inclusion) -> Result<()> {
    match (&inc.probability, dialect.probability_range()) {
        (None, _) if dialect == Dialect::Tcl => Err(Error::Malformed(format!(
            "typicality inclusion `{inc}` needs a probability in the tcl dialect"
        ))),
        (None, _) => Ok(()),
        (Some(_), None) => Err(Error::Malformed(format!(
            "`{inc}` carries a probability in the plain dialect"
        ))),
        (Some(p), Some((lo, hi))) if !p.in_open_interval(&lo, &hi) => Err(Error::Malformed(format!(
            "probability {p} of `{inc}` lies outside ({lo}, {hi}) required by the {dialect} dialect"
        ))),
        _ => Ok(()),
    }
}

impl fmt::Debug for KnowledgeBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::serialize_kb(self))
    }
}

/// Names occurring in a KB, each set sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub atoms: BTreeSet<Name>,
    pub roles: BTreeSet<Name>,
    pub individuals: BTreeSet<Name>,
}

impl Signature {
    pub fn add_concept(&mut self, c: &Concept) {
        c.collect_names(&mut self.atoms, &mut self.roles);
    }

    pub fn add_assertion(&mut self, a: &Assertion) {
        match a {
            Assertion::Concept { left, individual } => {
                self.add_concept(left.concept());
                self.individuals.insert(individual.clone());
            }
            Assertion::Role { role, subject, object } => {
                self.roles.insert(role.clone());
                self.individuals.insert(subject.clone());
                self.individuals.insert(object.clone());
            }
        }
    }

    pub fn add_query(&mut self, q: &Query) {
        match q {
            Query::Inclusion { left, right } => {
                self.add_concept(left.concept());
                self.add_concept(right);
            }
            Query::Assertion(a) => self.add_assertion(a),
        }
    }

    pub fn contains_name(&self, n: &str) -> bool {
        self.atoms.contains(n) || self.roles.contains(n) || self.individuals.contains(n)
    }
}

pub fn signature(kb: &KnowledgeBase) -> Signature {
    let mut sig = Signature::default();
    for inc in kb.inclusions() {
        sig.add_concept(inc.antecedent());
        sig.add_concept(&inc.right);
    }
    for a in kb.abox() {
        sig.add_assertion(a);
    }
    sig
}

/// The classical reading of a set of defaults: the canonical conjunction of
/// `~C | D` over each `T(C) <= D`; `Top` for none.
pub fn materialization<'a, I>(defaults: I) -> Concept
where
    I: IntoIterator<Item = &'a Inclusion>,
{
    let parts = defaults
        .into_iter()
        .map(|d| Concept::or(Concept::not(d.antecedent().clone()), d.right.clone()));
    canonical_form(&Concept::conjunction(parts))
}
