//! Tableau decision procedures for plain ALC with a general TBox.
//!
//! Concepts are put in negation normal form and interned per call. The TBox
//! is internalized as one conjunction added to every node label; ancestor
//! subset-blocking guarantees termination.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::RwLock;

use crate::concept::{canonical_form, Concept, Name};
use crate::error::{Error, Result};
use crate::kb::{Assertion, Inclusion};

/// Negation normal form: negation only in front of atoms.
pub fn nnf(c: &Concept) -> Concept {
    match c {
        Concept::Top | Concept::Bottom | Concept::Atom(_) => c.clone(),
        Concept::And(a, b) => Concept::and(nnf(a), nnf(b)),
        Concept::Or(a, b) => Concept::or(nnf(a), nnf(b)),
        Concept::Exists(r, f) => Concept::Exists(r.clone(), Box::new(nnf(f))),
        Concept::Forall(r, f) => Concept::Forall(r.clone(), Box::new(nnf(f))),
        Concept::Not(inner) => negated_nnf(inner),
    }
}

fn negated_nnf(c: &Concept) -> Concept {
    match c {
        Concept::Top => Concept::Bottom,
        Concept::Bottom => Concept::Top,
        Concept::Atom(_) => Concept::not(c.clone()),
        Concept::Not(inner) => nnf(inner),
        Concept::And(a, b) => Concept::or(negated_nnf(a), negated_nnf(b)),
        Concept::Or(a, b) => Concept::and(negated_nnf(a), negated_nnf(b)),
        Concept::Exists(r, f) => Concept::Forall(r.clone(), Box::new(negated_nnf(f))),
        Concept::Forall(r, f) => Concept::Exists(r.clone(), Box::new(negated_nnf(f))),
    }
}

/// `⨅ (~C | D)` over the strict inclusions, or `None` when there are none.
fn internalize(strict: &[Inclusion]) -> Option<Concept> {
    if strict.is_empty() {
        return None;
    }
    let parts = strict
        .iter()
        .map(|i| Concept::or(Concept::not(i.antecedent().clone()), i.right.clone()));
    Some(nnf(&Concept::conjunction(parts)))
}

type Id = u32;
type Label = BTreeSet<Id>;

#[derive(Clone, PartialEq, Eq, Hash)]
enum Node {
    Top,
    Bot,
    Lit(Name, bool),
    And(Vec<Id>),
    Or(Vec<Id>),
    Some(Name, Id),
    All(Name, Id),
}

struct Tableau {
    nodes: Vec<Node>,
    index: HashMap<Node, Id>,
    tbox: Option<Id>,
    unsat: HashSet<Label>,
    /// Child labels whose satisfiability does not rest on an ancestor that
    /// was still being expanded.
    sat: HashSet<Label>,
}

/// Outcome of expanding a node: `None` on a clash, otherwise the shallowest
/// ancestor the success relied on through blocking (`INDEPENDENT` if none).
type Expansion = Option<usize>;
const INDEPENDENT: usize = usize::MAX;

impl Tableau {
    fn new(tbox: Option<&Concept>) -> Self {
        let mut t = Tableau { nodes: Vec::new(), index: HashMap::new(), tbox: None, unsat: HashSet::new(), sat: HashSet::new() };
        t.tbox = tbox.map(|c| t.intern(c));
        t
    }

    fn add(&mut self, node: Node) -> Id {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len() as Id;
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        id
    }

    /// Interns a concept already in NNF.
    fn intern(&mut self, c: &Concept) -> Id {
        let node = match c {
            Concept::Top => Node::Top,
            Concept::Bottom => Node::Bot,
            Concept::Atom(n) => Node::Lit(n.clone(), true),
            Concept::Not(inner) => match inner.as_ref() {
                Concept::Atom(n) => Node::Lit(n.clone(), false),
                other => return self.intern(&nnf(&Concept::not(other.clone()))),
            },
            Concept::And(..) => {
                let mut parts = Vec::new();
                flatten(c, true, &mut parts);
                let mut ids: Vec<Id> = parts.iter().map(|p| self.intern(p)).collect();
                ids.sort_unstable();
                ids.dedup();
                Node::And(ids)
            }
            Concept::Or(..) => {
                let mut parts = Vec::new();
                flatten(c, false, &mut parts);
                let mut ids: Vec<Id> = parts.iter().map(|p| self.intern(p)).collect();
                ids.sort_unstable();
                ids.dedup();
                Node::Or(ids)
            }
            Concept::Exists(r, f) => {
                let f = self.intern(f);
                Node::Some(r.clone(), f)
            }
            Concept::Forall(r, f) => {
                let f = self.intern(f);
                Node::All(r.clone(), f)
            }
        };
        self.add(node)
    }

    fn complement_of(&self, id: Id) -> Option<Id> {
        match &self.nodes[id as usize] {
            Node::Lit(n, p) => self.index.get(&Node::Lit(n.clone(), !p)).copied(),
            _ => None,
        }
    }

    fn root_label(&self, seed: &[Id]) -> (Label, Vec<Id>) {
        let mut label = Label::new();
        let mut pending = Vec::new();
        for &id in seed.iter().chain(self.tbox.iter()) {
            if label.insert(id) {
                pending.push(id);
            }
        }
        (label, pending)
    }

    /// Applies the conjunction rule to `pending` and everything it yields.
    /// Returns false on a clash.
    fn saturate(&self, label: &mut Label, mut pending: Vec<Id>) -> bool {
        while let Some(id) = pending.pop() {
            match &self.nodes[id as usize] {
                Node::Bot => return false,
                Node::Lit(..) => {
                    if self.complement_of(id).is_some_and(|n| label.contains(&n)) {
                        return false;
                    }
                }
                Node::And(parts) => {
                    for &p in parts {
                        if label.insert(p) {
                            pending.push(p);
                        }
                    }
                }
                _ => {}
            }
        }
        true
    }

    fn first_open_or(&self, label: &Label) -> Option<Vec<Id>> {
        label.iter().find_map(|&id| match &self.nodes[id as usize] {
            Node::Or(ds) if !ds.iter().any(|d| label.contains(d)) => Some(ds.clone()),
            _ => None,
        })
    }

    fn hopeless(&self, d: Id, label: &Label) -> bool {
        matches!(self.nodes[d as usize], Node::Bot)
            || self.complement_of(d).is_some_and(|n| label.contains(&n))
    }

    fn existentials(&self, label: &Label) -> Vec<(Name, Id)> {
        label
            .iter()
            .filter_map(|&id| match &self.nodes[id as usize] {
                Node::Some(r, f) => Some((r.clone(), *f)),
                _ => None,
            })
            .collect()
    }

    fn successor_label(&self, label: &Label, role: &Name, filler: Id) -> Label {
        let mut child = Label::new();
        child.insert(filler);
        for &id in label {
            if let Node::All(r, f) = &self.nodes[id as usize] {
                if r == role {
                    child.insert(*f);
                }
            }
        }
        child.extend(self.tbox);
        child
    }

    fn sat(&mut self, mut label: Label, pending: Vec<Id>, ancestors: &mut Vec<Label>) -> Expansion {
        if !self.saturate(&mut label, pending) {
            return None;
        }
        if let Some(ds) = self.first_open_or(&label) {
            for d in ds {
                if self.hopeless(d, &label) {
                    continue;
                }
                let mut next = label.clone();
                next.insert(d);
                if let Some(dep) = self.sat(next, vec![d], ancestors) {
                    return Some(dep);
                }
            }
            return None;
        }
        if let Some(i) = ancestors.iter().position(|a| label.is_subset(a)) {
            return Some(i);
        }
        let children: Vec<Label> = self
            .existentials(&label)
            .into_iter()
            .map(|(role, filler)| self.successor_label(&label, &role, filler))
            .collect();
        // A child already known to clash fails the node before any sibling
        // is expanded.
        if children.iter().any(|c| self.unsat.contains(c)) {
            return None;
        }
        let mut dep = INDEPENDENT;
        for child in children {
            dep = dep.min(self.child_sat(child, &label, ancestors)?);
        }
        Some(dep)
    }

    fn child_sat(&mut self, child: Label, parent: &Label, ancestors: &mut Vec<Label>) -> Expansion {
        if self.unsat.contains(&child) {
            return None;
        }
        if self.sat.contains(&child) {
            return Some(INDEPENDENT);
        }
        let depth = ancestors.len();
        ancestors.push(parent.clone());
        let pending: Vec<Id> = child.iter().copied().collect();
        let result = self.sat(child.clone(), pending, ancestors);
        ancestors.pop();
        match result {
            None => {
                self.unsat.insert(child);
                None
            }
            // Blocked only by the child itself or its own descendants.
            Some(dep) if dep > depth => {
                self.sat.insert(child);
                Some(INDEPENDENT)
            }
            Some(dep) => Some(dep),
        }
    }

    /// ABox completion: one label per individual, role edges between them.
    fn abox_sat(&mut self, mut labels: Vec<Label>, mut pending: Vec<Vec<Id>>, edges: &[(Name, usize, usize)]) -> bool {
        loop {
            for (label, todo) in labels.iter_mut().zip(pending.iter_mut()) {
                if !self.saturate(label, std::mem::take(todo)) {
                    return false;
                }
            }
            let mut changed = false;
            for (role, a, b) in edges {
                let fillers: Vec<Id> = labels[*a]
                    .iter()
                    .filter_map(|&id| match &self.nodes[id as usize] {
                        Node::All(r, f) if r == role => Some(*f),
                        _ => None,
                    })
                    .collect();
                for f in fillers {
                    if labels[*b].insert(f) {
                        pending[*b].push(f);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for i in 0..labels.len() {
            if let Some(ds) = self.first_open_or(&labels[i]) {
                for d in ds {
                    if self.hopeless(d, &labels[i]) {
                        continue;
                    }
                    let mut next = labels.clone();
                    next[i].insert(d);
                    let mut todo = vec![Vec::new(); labels.len()];
                    todo[i].push(d);
                    if self.abox_sat(next, todo, edges) {
                        return true;
                    }
                }
                return false;
            }
        }
        for a in 0..labels.len() {
            for (role, filler) in self.existentials(&labels[a]) {
                let witnessed = edges
                    .iter()
                    .any(|(r, x, b)| r == &role && *x == a && labels[*b].contains(&filler));
                if witnessed {
                    continue;
                }
                let child = self.successor_label(&labels[a], &role, filler);
                let parent = labels[a].clone();
                if self.child_sat(child, &parent, &mut Vec::new()).is_none() {
                    return false;
                }
            }
        }
        true
    }
}

fn flatten<'a>(c: &'a Concept, conj: bool, out: &mut Vec<&'a Concept>) {
    match (c, conj) {
        (Concept::And(a, b), true) | (Concept::Or(a, b), false) => {
            flatten(a, conj, out);
            flatten(b, conj, out);
        }
        _ => out.push(c),
    }
}

/// ALC reasoning against a fixed set of strict inclusions, with an
/// append-only satisfiability memo safe to share between threads.
pub struct AlcReasoner {
    strict: Vec<Inclusion>,
    tbox: Option<Concept>,
    memo: Option<RwLock<HashMap<Concept, bool>>>,
}

impl AlcReasoner {
    pub fn new(strict: &[Inclusion]) -> Self {
        AlcReasoner {
            strict: strict.iter().map(Inclusion::without_probability).collect(),
            tbox: internalize(strict),
            memo: Some(RwLock::new(HashMap::new())),
        }
    }

    pub fn without_cache(strict: &[Inclusion]) -> Self {
        AlcReasoner { memo: None, ..Self::new(strict) }
    }

    pub fn strict(&self) -> &[Inclusion] {
        &self.strict
    }

    pub fn cached_entries(&self) -> usize {
        self.memo.as_ref().map_or(0, |m| m.read().map(|m| m.len()).unwrap_or(0))
    }

    pub fn is_satisfiable(&self, c: &Concept) -> bool {
        let key = canonical_form(c);
        if let Some(memo) = &self.memo {
            if let Some(&v) = memo.read().expect("memo lock").get(&key) {
                return v;
            }
        }
        let mut t = Tableau::new(self.tbox.as_ref());
        let root = t.intern(&nnf(&key));
        let (label, pending) = t.root_label(&[root]);
        let result = t.sat(label, pending, &mut Vec::new()).is_some();
        if let Some(memo) = &self.memo {
            memo.write().expect("memo lock").entry(key).or_insert(result);
        }
        result
    }

    /// `C ⊑ D` holds in every model of the strict inclusions.
    pub fn entails(&self, c: &Concept, d: &Concept) -> bool {
        !self.is_satisfiable(&Concept::and(c.clone(), Concept::not(d.clone())))
    }

    pub fn abox_consistent(&self, abox: &[Assertion]) -> Result<bool> {
        let mut individuals: Vec<&Name> = Vec::new();
        fn slot<'a>(n: &'a Name, individuals: &mut Vec<&'a Name>) -> usize {
            match individuals.iter().position(|m| *m == n) {
                Some(i) => i,
                None => {
                    individuals.push(n);
                    individuals.len() - 1
                }
            }
        }
        let mut t = Tableau::new(self.tbox.as_ref());
        let mut seeds: Vec<Vec<Id>> = Vec::new();
        let mut edges = Vec::new();
        for a in abox {
            match a {
                Assertion::Concept { left, individual } => {
                    if left.is_typical() {
                        return Err(Error::Invalid(format!(
                            "typicality assertion `{a}` must be translated before ALC reasoning"
                        )));
                    }
                    let i = slot(individual, &mut individuals);
                    seeds.resize(individuals.len(), Vec::new());
                    let id = t.intern(&nnf(left.concept()));
                    seeds[i].push(id);
                }
                Assertion::Role { role, subject, object } => {
                    let s = slot(subject, &mut individuals);
                    let o = slot(object, &mut individuals);
                    seeds.resize(individuals.len(), Vec::new());
                    edges.push((role.clone(), s, o));
                }
            }
        }
        if individuals.is_empty() {
            return Ok(self.is_satisfiable(&Concept::Top));
        }
        let (labels, pending): (Vec<Label>, Vec<Vec<Id>>) = seeds.iter().map(|s| t.root_label(s)).unzip();
        Ok(t.abox_sat(labels, pending, &edges))
    }

    /// `a` is an instance of `C` in every model of the strict part and `abox`.
    pub fn instance_of(&self, abox: &[Assertion], c: &Concept, individual: &str) -> Result<bool> {
        let mut extended = abox.to_vec();
        extended.push(Assertion::concept(individual, Concept::not(c.clone())));
        Ok(!self.abox_consistent(&extended)?)
    }
}

pub fn is_satisfiable(c: &Concept, strict: &[Inclusion]) -> bool {
    AlcReasoner::without_cache(strict).is_satisfiable(c)
}

pub fn entails(strict: &[Inclusion], c: &Concept, d: &Concept) -> bool {
    AlcReasoner::without_cache(strict).entails(c, d)
}

pub fn abox_consistent(strict: &[Inclusion], abox: &[Assertion]) -> Result<bool> {
    AlcReasoner::without_cache(strict).abox_consistent(abox)
}

pub fn instance_of(strict: &[Inclusion], abox: &[Assertion], c: &Concept, individual: &str) -> Result<bool> {
    AlcReasoner::without_cache(strict).instance_of(abox, c, individual)
}
