//! Concept terms and their canonical textual form.

use std::borrow::Borrow;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// An interned atom, role or individual name. Equality is by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl Borrow<str> for Name {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// An ALC concept. The typicality operator is deliberately not a constructor
/// here; it only appears through [`LeftConcept::Typical`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Concept {
    Atom(Name),
    Top,
    Bottom,
    Not(Box<Concept>),
    And(Box<Concept>, Box<Concept>),
    Or(Box<Concept>, Box<Concept>),
    Exists(Name, Box<Concept>),
    Forall(Name, Box<Concept>),
}

impl Concept {
    pub fn atom(name: &str) -> Self {
        Concept::Atom(Name::new(name))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Concept) -> Self {
        Concept::Not(Box::new(c))
    }

    pub fn and(l: Concept, r: Concept) -> Self {
        Concept::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Concept, r: Concept) -> Self {
        Concept::Or(Box::new(l), Box::new(r))
    }

    pub fn exists(role: &str, c: Concept) -> Self {
        Concept::Exists(Name::new(role), Box::new(c))
    }

    pub fn forall(role: &str, c: Concept) -> Self {
        Concept::Forall(Name::new(role), Box::new(c))
    }

    /// Right-nested conjunction of `parts`; `Top` when empty.
    pub fn conjunction<I: IntoIterator<Item = Concept>>(parts: I) -> Self {
        let mut parts: Vec<Concept> = parts.into_iter().collect();
        let Some(mut acc) = parts.pop() else {
            return Concept::Top;
        };
        while let Some(c) = parts.pop() {
            acc = Concept::and(c, acc);
        }
        acc
    }

    /// Right-nested disjunction of `parts`; `Bottom` when empty.
    pub fn disjunction<I: IntoIterator<Item = Concept>>(parts: I) -> Self {
        let mut parts: Vec<Concept> = parts.into_iter().collect();
        let Some(mut acc) = parts.pop() else {
            return Concept::Bottom;
        };
        while let Some(c) = parts.pop() {
            acc = Concept::or(c, acc);
        }
        acc
    }

    /// Collects atom names into `atoms` and role names into `roles`.
    pub fn collect_names(&self, atoms: &mut BTreeSet<Name>, roles: &mut BTreeSet<Name>) {
        match self {
            Concept::Atom(a) => {
                atoms.insert(a.clone());
            }
            Concept::Top | Concept::Bottom => {}
            Concept::Not(c) => c.collect_names(atoms, roles),
            Concept::And(l, r) | Concept::Or(l, r) => {
                l.collect_names(atoms, roles);
                r.collect_names(atoms, roles);
            }
            Concept::Exists(role, c) | Concept::Forall(role, c) => {
                roles.insert(role.clone());
                c.collect_names(atoms, roles);
            }
        }
    }

    /// True if no role restriction occurs anywhere in the term.
    pub fn is_role_free(&self) -> bool {
        match self {
            Concept::Atom(_) | Concept::Top | Concept::Bottom => true,
            Concept::Not(c) => c.is_role_free(),
            Concept::And(l, r) | Concept::Or(l, r) => l.is_role_free() && r.is_role_free(),
            Concept::Exists(..) | Concept::Forall(..) => false,
        }
    }

    /// Nesting depth of role restrictions.
    pub fn role_depth(&self) -> usize {
        match self {
            Concept::Atom(_) | Concept::Top | Concept::Bottom => 0,
            Concept::Not(c) => c.role_depth(),
            Concept::And(l, r) | Concept::Or(l, r) => l.role_depth().max(r.role_depth()),
            Concept::Exists(_, c) | Concept::Forall(_, c) => 1 + c.role_depth(),
        }
    }

    /// All subterms, including `self`.
    pub fn subconcepts(&self, out: &mut BTreeSet<Concept>) {
        if !out.insert(self.clone()) {
            return;
        }
        match self {
            Concept::Atom(_) | Concept::Top | Concept::Bottom => {}
            Concept::Not(c) | Concept::Exists(_, c) | Concept::Forall(_, c) => c.subconcepts(out),
            Concept::And(l, r) | Concept::Or(l, r) => {
                l.subconcepts(out);
                r.subconcepts(out);
            }
        }
    }

    /// Roles that occur directly under a universal restriction.
    pub fn universal_roles(&self, out: &mut BTreeSet<Name>) {
        match self {
            Concept::Atom(_) | Concept::Top | Concept::Bottom => {}
            Concept::Not(c) => c.existential_roles_under_not(out),
            Concept::And(l, r) | Concept::Or(l, r) => {
                l.universal_roles(out);
                r.universal_roles(out);
            }
            Concept::Exists(_, c) => c.universal_roles(out),
            Concept::Forall(role, c) => {
                out.insert(role.clone());
                c.universal_roles(out);
            }
        }
    }

    // ~some R. C is a universal restriction in disguise.
    fn existential_roles_under_not(&self, out: &mut BTreeSet<Name>) {
        match self {
            Concept::Atom(_) | Concept::Top | Concept::Bottom => {}
            Concept::Not(c) => c.universal_roles(out),
            Concept::And(l, r) | Concept::Or(l, r) => {
                l.existential_roles_under_not(out);
                r.existential_roles_under_not(out);
            }
            Concept::Exists(role, c) => {
                out.insert(role.clone());
                c.existential_roles_under_not(out);
            }
            Concept::Forall(_, c) => c.existential_roles_under_not(out),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Concept::Or(..) => 1,
            Concept::And(..) => 2,
            _ => 3,
        }
    }
}

/// Normalizes a concept: conjunctions and disjunctions are flattened, their
/// operands sorted and deduplicated, and double negations removed.
///
/// The result is rebuilt as a right-nested chain, so
/// `canonical_form(canonical_form(c)) == canonical_form(c)`.
pub fn canonical_form(c: &Concept) -> Concept {
    match c {
        Concept::Atom(_) | Concept::Top | Concept::Bottom => c.clone(),
        Concept::Not(inner) => match inner.as_ref() {
            Concept::Not(x) => canonical_form(x),
            other => match canonical_form(other) {
                Concept::Not(x) => *x,
                n => Concept::not(n),
            },
        },
        Concept::And(..) => {
            let mut parts = BTreeSet::new();
            flatten(c, true, &mut parts);
            Concept::conjunction(parts)
        }
        Concept::Or(..) => {
            let mut parts = BTreeSet::new();
            flatten(c, false, &mut parts);
            Concept::disjunction(parts)
        }
        Concept::Exists(r, inner) => Concept::Exists(r.clone(), Box::new(canonical_form(inner))),
        Concept::Forall(r, inner) => Concept::Forall(r.clone(), Box::new(canonical_form(inner))),
    }
}

fn flatten(c: &Concept, conj: bool, out: &mut BTreeSet<Concept>) {
    match (c, conj) {
        (Concept::And(l, r), true) | (Concept::Or(l, r), false) => {
            flatten(l, conj, out);
            flatten(r, conj, out);
        }
        _ => {
            let n = canonical_form(c);
            match (&n, conj) {
                (Concept::And(..), true) | (Concept::Or(..), false) => flatten(&n, conj, out),
                _ => {
                    out.insert(n);
                }
            }
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Concept::Atom(a) => write!(f, "{a}"),
            Concept::Top => f.write_str("Top"),
            Concept::Bottom => f.write_str("Bot"),
            Concept::Not(c) => {
                f.write_str("~")?;
                write_operand(f, c, 3, false)
            }
            Concept::And(l, r) => {
                write_operand(f, l, 2, true)?;
                f.write_str(" & ")?;
                write_operand(f, r, 2, false)
            }
            Concept::Or(l, r) => {
                write_operand(f, l, 1, true)?;
                f.write_str(" | ")?;
                write_operand(f, r, 1, false)
            }
            Concept::Exists(role, c) => {
                write!(f, "some {role}. ")?;
                write_operand(f, c, 3, false)
            }
            Concept::Forall(role, c) => {
                write!(f, "all {role}. ")?;
                write_operand(f, c, 3, false)
            }
        }
    }
}

impl fmt::Debug for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// Binary operators associate to the right, so a left operand built with the
// same operator needs parentheses to keep the tree shape on re-parse.
fn write_operand(f: &mut fmt::Formatter<'_>, c: &Concept, prec: u8, left: bool) -> fmt::Result {
    let p = c.precedence();
    if p < prec || (left && p == prec && prec < 3) {
        write!(f, "({c})")
    } else {
        write!(f, "{c}")
    }
}

/// Left-hand side of an inclusion or the concept of an assertion: either a
/// plain concept or a typicality-wrapped one.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LeftConcept {
    Plain(Concept),
    Typical(Concept),
}

impl LeftConcept {
    pub fn concept(&self) -> &Concept {
        match self {
            LeftConcept::Plain(c) | LeftConcept::Typical(c) => c,
        }
    }

    pub fn is_typical(&self) -> bool {
        matches!(self, LeftConcept::Typical(_))
    }
}

impl fmt::Display for LeftConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeftConcept::Plain(c) => write!(f, "{c}"),
            LeftConcept::Typical(c) => write!(f, "T({c})"),
        }
    }
}

impl fmt::Debug for LeftConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
