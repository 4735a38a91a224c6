//! Combining a HEAD and a MODIFIER concept into a compound prototype.
//!
//! Each probabilistic default is either kept or dropped in a scenario.
//! Scenarios are grouped into blocks of equal probability and scanned from
//! the most probable block down; the first block left with scenarios that
//! are consistent, not trivial and not overridden by the HEAD decides the
//! typical properties of the compound concept.

use std::collections::BTreeSet;
use std::fmt;

use crate::alc::{nnf, AlcReasoner};
use crate::concept::{canonical_form, Concept, Name};
use crate::error::{Error, Result};
use crate::kb::{Inclusion, KnowledgeBase};
use crate::probability::Probability;

pub const DEFAULT_SCENARIO_LIMIT: usize = 20;

/// A selection: one atomic choice `(index, kept)` per default, indices into
/// `kb.defeasible()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub choices: Vec<(usize, bool)>,
    pub probability: Probability,
}

impl Scenario {
    /// Indices of the kept defaults.
    pub fn kept(&self) -> impl Iterator<Item = usize> + '_ {
        self.choices.iter().filter(|(_, k)| *k).map(|(i, _)| *i)
    }

    fn contains(&self, i: usize) -> bool {
        self.choices.iter().any(|&(j, k)| j == i && k)
    }

    fn kept_set(&self) -> BTreeSet<usize> {
        self.kept().collect()
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.choices.iter().map(|(i, k)| format!("({},{})", i + 1, *k as u8)).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Inconsistent,
    Trivial,
    ModifierConflict,
    Selected,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Inconsistent => "inconsistent",
            Verdict::Trivial => "trivial",
            Verdict::ModifierConflict => "modifier-conflict",
            Verdict::Selected => "selected",
        })
    }
}

#[derive(Clone, Debug)]
pub struct TraceBlock {
    pub probability: Probability,
    pub entries: Vec<(Scenario, Verdict)>,
}

#[derive(Clone, Copy, Debug)]
pub struct CombineOptions {
    /// Add `some r. Top` for every universally restricted role before
    /// checking consistency.
    pub role_saturation: bool,
    pub limit: usize,
}

impl Default for CombineOptions {
    fn default() -> Self {
        CombineOptions { role_saturation: true, limit: DEFAULT_SCENARIO_LIMIT }
    }
}

#[derive(Clone, Debug)]
pub struct Selection {
    pub scenarios: Vec<Scenario>,
    pub trace: Vec<TraceBlock>,
}

#[derive(Clone, Debug)]
pub struct CombinationResult {
    pub head: Concept,
    pub modifier: Concept,
    pub compound: Concept,
    pub selected: Vec<Scenario>,
    pub additions: Vec<Inclusion>,
    pub revised: KnowledgeBase,
    pub trace: Vec<TraceBlock>,
}

fn choice_probability(d: &Inclusion, kept: bool) -> Probability {
    let p = d.probability.clone().unwrap_or_else(Probability::one);
    if kept {
        p
    } else {
        p.complement()
    }
}

fn scenarios_over(kb: &KnowledgeBase, indices: &[usize], limit: usize) -> Result<Vec<Scenario>> {
    let n = indices.len();
    if n > limit || n >= usize::BITS as usize {
        return Err(Error::GuardExceeded { what: "defaults in a scenario space", size: n, limit });
    }
    let defaults = kb.defeasible();
    Ok((0usize..1 << n)
        .map(|code| {
            let choices: Vec<(usize, bool)> =
                indices.iter().enumerate().map(|(pos, &i)| (i, code >> (n - 1 - pos) & 1 == 1)).collect();
            let factors: Vec<Probability> = choices.iter().map(|&(i, k)| choice_probability(&defaults[i], k)).collect();
            Scenario { choices, probability: factors.iter().product() }
        })
        .collect())
}

/// Every scenario of the KB, in binary counting order over its defaults.
pub fn enumerate_scenarios(kb: &KnowledgeBase) -> Result<Vec<Scenario>> {
    enumerate_scenarios_with_limit(kb, DEFAULT_SCENARIO_LIMIT)
}

pub fn enumerate_scenarios_with_limit(kb: &KnowledgeBase, limit: usize) -> Result<Vec<Scenario>> {
    let all: Vec<usize> = (0..kb.defeasible().len()).collect();
    scenarios_over(kb, &all, limit)
}

fn universal_roles(c: &Concept, out: &mut BTreeSet<Name>) {
    match c {
        Concept::Forall(r, f) => {
            out.insert(r.clone());
            universal_roles(f, out);
        }
        Concept::Exists(_, f) | Concept::Not(f) => universal_roles(f, out),
        Concept::And(a, b) | Concept::Or(a, b) => {
            universal_roles(a, out);
            universal_roles(b, out);
        }
        Concept::Atom(_) | Concept::Top | Concept::Bottom => {}
    }
}

/// Consistency of conjunctions of consequents for a fixed compound concept.
pub struct ScenarioChecker<'a> {
    kb: &'a KnowledgeBase,
    compound: Concept,
    reasoner: AlcReasoner,
    rigid_roles: BTreeSet<Name>,
    role_saturation: bool,
}

impl<'a> ScenarioChecker<'a> {
    pub fn new(kb: &'a KnowledgeBase, head: &Concept, modifier: &Concept, role_saturation: bool) -> Self {
        let compound = Concept::and(head.clone(), modifier.clone());
        let reasoner = AlcReasoner::new(kb.strict());
        let mut rigid_roles = BTreeSet::new();
        for r in kb.strict() {
            if reasoner.entails(&compound, r.antecedent()) {
                universal_roles(&nnf(&r.right), &mut rigid_roles);
            }
        }
        ScenarioChecker { kb, compound, reasoner, rigid_roles, role_saturation }
    }

    /// Satisfiability of the compound concept together with the
    /// consequents of the given defaults.
    pub fn consistent<I: IntoIterator<Item = usize>>(&self, defaults: I) -> bool {
        let mut parts = vec![self.compound.clone()];
        let mut roles = self.rigid_roles.clone();
        for i in defaults {
            let d = &self.kb.defeasible()[i].right;
            universal_roles(&nnf(d), &mut roles);
            parts.push(d.clone());
        }
        if self.role_saturation {
            parts.extend(roles.into_iter().map(|r| Concept::Exists(r, Box::new(Concept::Top))));
        }
        self.reasoner.is_satisfiable(&Concept::conjunction(parts))
    }
}

/// Consistency of one scenario for the combination of `head` and `modifier`.
pub fn is_consistent_scenario(
    kb: &KnowledgeBase,
    w: &Scenario,
    head: &Concept,
    modifier: &Concept,
    role_saturation: bool,
) -> bool {
    ScenarioChecker::new(kb, head, modifier, role_saturation).consistent(w.kept())
}

fn antecedent_is(d: &Inclusion, c: &Concept) -> bool {
    canonical_form(d.antecedent()) == *c
}

/// Scenarios over the defaults of `head` and `modifier`, filtered block by
/// block. Defaults about other concepts take no part in the combination.
pub fn select_scenarios(
    kb: &KnowledgeBase,
    head: &Concept,
    modifier: &Concept,
    opts: CombineOptions,
) -> Result<Selection> {
    let (h, m) = (canonical_form(head), canonical_form(modifier));
    let defaults = kb.defeasible();
    let is_head = |i: usize| antecedent_is(&defaults[i], &h);
    let is_modifier = |i: usize| !is_head(i) && antecedent_is(&defaults[i], &m);
    let relevant: Vec<usize> = (0..defaults.len()).filter(|&i| is_head(i) || is_modifier(i)).collect();
    let scenarios = scenarios_over(kb, &relevant, opts.limit)?;
    let checker = ScenarioChecker::new(kb, head, modifier, opts.role_saturation);

    let consistent: Vec<bool> = scenarios.iter().map(|w| checker.consistent(w.kept())).collect();
    let kept_sets: Vec<BTreeSet<usize>> = scenarios.iter().map(Scenario::kept_set).collect();
    let trivial: Vec<bool> = (0..scenarios.len())
        .map(|i| {
            consistent[i]
                && !(0..scenarios.len())
                    .any(|j| consistent[j] && kept_sets[j].len() > kept_sets[i].len() && kept_sets[i].is_subset(&kept_sets[j]))
        })
        .collect();

    let mut order: Vec<usize> = (0..scenarios.len()).collect();
    order.sort_by(|&a, &b| scenarios[b].probability.cmp(&scenarios[a].probability));
    let mut trace = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let p = &scenarios[order[start]].probability;
        let end = start + order[start..].iter().take_while(|&&i| &scenarios[i].probability == p).count();
        let block = &order[start..end];
        let mut entries = Vec::new();
        let mut survivors = Vec::new();
        for &i in block {
            let verdict = if !consistent[i] {
                Verdict::Inconsistent
            } else if trivial[i] {
                Verdict::Trivial
            } else if scenarios[i].kept().filter(|&d| is_modifier(d)).any(|md| {
                block.iter().filter(|&&j| j != i && consistent[j]).any(|&j| {
                    scenarios[j]
                        .kept()
                        .filter(|&hd| is_head(hd) && !scenarios[i].contains(hd))
                        .any(|hd| !checker.consistent([md, hd]))
                })
            }) {
                Verdict::ModifierConflict
            } else {
                survivors.push(scenarios[i].clone());
                Verdict::Selected
            };
            entries.push((scenarios[i].clone(), verdict));
        }
        trace.push(TraceBlock { probability: p.clone(), entries });
        if !survivors.is_empty() {
            return Ok(Selection { scenarios: survivors, trace });
        }
        start = end;
    }
    Err(Error::CombinationFailure)
}

/// The C-revised KB: the consequents kept in every selected scenario become
/// typical properties of `modifier & head`, with the HEAD's probability
/// whenever the HEAD has that property.
pub fn revise(kb: &KnowledgeBase, head: &Concept, modifier: &Concept, opts: CombineOptions) -> Result<CombinationResult> {
    let selection = select_scenarios(kb, head, modifier, opts)?;
    let h = canonical_form(head);
    let defaults = kb.defeasible();
    let mut common = selection.scenarios[0].kept_set();
    for w in &selection.scenarios[1..] {
        common = common.intersection(&w.kept_set()).copied().collect();
    }
    let compound = Concept::and(modifier.clone(), head.clone());
    let mut additions: Vec<Inclusion> = Vec::new();
    let mut seen: Vec<Concept> = Vec::new();
    for &i in &common {
        let d = canonical_form(&defaults[i].right);
        if seen.contains(&d) {
            continue;
        }
        seen.push(d.clone());
        let source = common
            .iter()
            .map(|&j| &defaults[j])
            .find(|e| antecedent_is(e, &h) && canonical_form(&e.right) == d)
            .unwrap_or(&defaults[i]);
        let mut inc = Inclusion::typical(compound.clone(), defaults[i].right.clone());
        inc.probability = source.probability.clone();
        additions.push(inc);
    }
    let mut all = defaults.to_vec();
    all.extend(additions.iter().cloned());
    let revised = kb.with_defeasible(all)?;
    Ok(CombinationResult {
        head: head.clone(),
        modifier: modifier.clone(),
        compound,
        selected: selection.scenarios,
        additions,
        revised,
        trace: selection.trace,
    })
}
