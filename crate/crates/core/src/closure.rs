//! Rational closure: the exceptionality ranking of defaults and concepts,
//! and entailment for typicality inclusions and assertions.

use std::collections::BTreeMap;

use crate::alc::AlcReasoner;
use crate::concept::{Concept, LeftConcept, Name};
use crate::error::{Error, Result};
use crate::kb::{materialization, signature, Assertion, Inclusion, KnowledgeBase, Query};

/// Largest number of rank assignments to individuals tried for ABox queries.
pub const MAX_ASSIGNMENTS: usize = 1 << 20;

/// `C` is exceptional w.r.t. `defaults`: no element satisfies `C` and the
/// materialization of the defaults.
pub fn exceptional(c: &Concept, defaults: &[Inclusion], strict: &[Inclusion]) -> bool {
    exceptional_with(&AlcReasoner::without_cache(strict), c, defaults)
}

fn exceptional_with(reasoner: &AlcReasoner, c: &Concept, defaults: &[Inclusion]) -> bool {
    !reasoner.is_satisfiable(&Concept::and(c.clone(), materialization(defaults)))
}

/// The nested default sets `E_0 ⊋ E_1 ⊋ … ⊋ E_k` and the concept ranks
/// they induce.
pub struct RankingResult {
    defaults: Vec<Inclusion>,
    /// Indices into `defaults`, one set per level; the last level is the
    /// fixpoint.
    levels: Vec<Vec<usize>>,
    level_mats: Vec<Concept>,
    /// Antecedents of defaults that stay exceptional at the fixpoint; no
    /// model has instances of them, so they are added as `C <= Bot`.
    absurd: Vec<Concept>,
    reasoner: AlcReasoner,
}

impl RankingResult {
    pub fn levels(&self) -> Vec<Vec<&Inclusion>> {
        self.levels.iter().map(|l| l.iter().map(|&i| &self.defaults[i]).collect()).collect()
    }

    /// Default indices per level, in KB order.
    pub fn level_indices(&self) -> &[Vec<usize>] {
        &self.levels
    }

    pub fn defaults(&self) -> &[Inclusion] {
        &self.defaults
    }

    pub fn absurd(&self) -> &[Concept] {
        &self.absurd
    }

    /// Strict inclusions plus `C <= Bot` for each absurd antecedent.
    pub fn strict(&self) -> &[Inclusion] {
        self.reasoner.strict()
    }

    pub fn reasoner(&self) -> &AlcReasoner {
        &self.reasoner
    }

    /// Index of the last level; every finite rank is at most this.
    pub fn height(&self) -> usize {
        self.levels.len() - 1
    }

    /// Least `i` such that `C` is not exceptional w.r.t. `E_i`; `None` for
    /// infinite rank.
    pub fn concept_rank(&self, c: &Concept) -> Option<usize> {
        self.level_mats
            .iter()
            .position(|m| self.reasoner.is_satisfiable(&Concept::and(c.clone(), m.clone())))
    }

    pub fn default_rank(&self, index: usize) -> Option<usize> {
        self.concept_rank(self.defaults[index].antecedent())
    }

    /// Materialization of the defaults at level `i` (the fixpoint beyond).
    pub fn level_materialization(&self, i: usize) -> &Concept {
        &self.level_mats[i.min(self.height())]
    }
}

fn levels_for(reasoner: &AlcReasoner, defaults: &[Inclusion], active: &[usize]) -> Vec<Vec<usize>> {
    let mut levels = vec![active.to_vec()];
    loop {
        let current = levels.last().expect("nonempty");
        let members: Vec<Inclusion> = current.iter().map(|&i| defaults[i].clone()).collect();
        let next: Vec<usize> = current
            .iter()
            .copied()
            .filter(|&i| exceptional_with(reasoner, defaults[i].antecedent(), &members))
            .collect();
        if next.len() == current.len() {
            return levels;
        }
        levels.push(next);
    }
}

/// Computes the ranking. Defaults whose antecedent is exceptional at the
/// fixpoint turn into `C <= Bot` and the ranking is recomputed without them.
pub fn compute_ranking(kb: &KnowledgeBase) -> RankingResult {
    let defaults: Vec<Inclusion> = kb.defeasible().iter().map(Inclusion::without_probability).collect();
    let mut strict: Vec<Inclusion> = kb.strict().to_vec();
    let mut absurd = Vec::new();
    let mut active: Vec<usize> = (0..defaults.len()).collect();
    loop {
        let reasoner = AlcReasoner::new(&strict);
        let levels = levels_for(&reasoner, &defaults, &active);
        let fixpoint = levels.last().expect("nonempty").clone();
        if fixpoint.is_empty() {
            let level_mats = levels
                .iter()
                .map(|l| materialization(l.iter().map(|&i| &defaults[i])))
                .collect();
            return RankingResult { defaults, levels, level_mats, absurd, reasoner };
        }
        for &i in &fixpoint {
            let c = defaults[i].antecedent().clone();
            if !absurd.contains(&c) {
                strict.push(Inclusion::strict(c.clone(), Concept::Bottom));
                absurd.push(c);
            }
        }
        active.retain(|i| !fixpoint.contains(i));
    }
}

/// Rational-closure entailment of an inclusion query.
pub fn rc_entails_tbox(kb: &KnowledgeBase, q: &Query) -> Result<bool> {
    rc_entails_tbox_with(&compute_ranking(kb), q)
}

pub fn rc_entails_tbox_with(ranking: &RankingResult, q: &Query) -> Result<bool> {
    match q {
        Query::Inclusion { left: LeftConcept::Plain(c), right } => Ok(ranking.reasoner.entails(c, right)),
        Query::Inclusion { left: LeftConcept::Typical(c), right } => {
            let Some(rc) = ranking.concept_rank(c) else {
                return Ok(true);
            };
            let exception = Concept::and(c.clone(), Concept::not(right.clone()));
            Ok(match ranking.concept_rank(&exception) {
                None => true,
                Some(re) => rc < re,
            })
        }
        Query::Assertion(_) => Err(Error::Invalid("expected an inclusion query".into())),
    }
}

/// A rank for each named individual.
pub type IndividualRankAssignment = BTreeMap<Name, usize>;

/// The ABox with existential restrictions at the top of concept assertions
/// replaced by fresh named witnesses, so that defaults apply to them too.
pub fn skolemize(kb: &KnowledgeBase, q: Option<&Query>) -> Vec<Assertion> {
    let mut taken = signature(kb);
    if let Some(q) = q {
        taken.add_query(q);
    }
    let mut counter = 0usize;
    let mut fresh = || loop {
        let name = format!("_sk{counter}");
        counter += 1;
        if !taken.contains_name(&name) {
            return Name::new(&name);
        }
    };
    let mut out = Vec::new();
    let mut queue: Vec<Assertion> = kb.abox().to_vec();
    queue.reverse();
    while let Some(a) = queue.pop() {
        match a {
            Assertion::Concept { left: LeftConcept::Plain(c), individual } => {
                let mut parts = Vec::new();
                conjuncts(&c, &mut parts);
                let mut kept = Vec::new();
                let mut spawned = Vec::new();
                for p in parts {
                    match p {
                        Concept::Exists(role, filler) => {
                            let w = fresh();
                            out.push(Assertion::Role { role: role.clone(), subject: individual.clone(), object: w.clone() });
                            spawned.push(Assertion::Concept { left: LeftConcept::Plain((**filler).clone()), individual: w });
                        }
                        other => kept.push(other.clone()),
                    }
                }
                if !kept.is_empty() || spawned.is_empty() {
                    out.push(Assertion::Concept { left: LeftConcept::Plain(Concept::conjunction(kept)), individual });
                }
                for s in spawned.into_iter().rev() {
                    queue.push(s);
                }
            }
            other => out.push(other),
        }
    }
    out
}

fn conjuncts<'a>(c: &'a Concept, out: &mut Vec<&'a Concept>) {
    match c {
        Concept::And(a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        _ => out.push(c),
    }
}

struct AboxProblem<'a> {
    ranking: &'a RankingResult,
    individuals: Vec<Name>,
    /// Plain assertions, typicality assertions rewritten as `a : C`.
    abox: Vec<Assertion>,
    /// Upper bounds on μ from typicality assertions.
    caps: Vec<usize>,
}

impl<'a> AboxProblem<'a> {
    fn new(kb: &KnowledgeBase, ranking: &'a RankingResult, q: Option<&Query>) -> Result<Self> {
        let mut abox = Vec::new();
        let mut individuals: Vec<Name> = Vec::new();
        let mut caps_by_name: BTreeMap<Name, usize> = BTreeMap::new();
        for a in skolemize(kb, q) {
            for n in a.individuals() {
                if !individuals.contains(n) {
                    individuals.push(n.clone());
                }
            }
            match a {
                Assertion::Concept { left: LeftConcept::Typical(c), individual } => {
                    let cap = ranking.concept_rank(&c).ok_or(Error::Inconsistent)?;
                    let entry = caps_by_name.entry(individual.clone()).or_insert(cap);
                    *entry = (*entry).min(cap);
                    abox.push(Assertion::Concept { left: LeftConcept::Plain(c), individual });
                }
                other => abox.push(other),
            }
        }
        if let Some(q) = q {
            for n in q.individuals() {
                if !individuals.contains(n) {
                    individuals.push(n.clone());
                }
            }
        }
        let height = ranking.height();
        let caps = individuals.iter().map(|n| caps_by_name.get(n).copied().unwrap_or(height)).collect();
        Ok(AboxProblem { ranking, individuals, abox, caps })
    }

    fn augmented(&self, mu: &[usize]) -> Vec<Assertion> {
        let mut abox = self.abox.clone();
        for (n, &m) in self.individuals.iter().zip(mu) {
            let mat = self.ranking.level_materialization(m);
            if *mat != Concept::Top {
                abox.push(Assertion::Concept { left: LeftConcept::Plain(mat.clone()), individual: n.clone() });
            }
        }
        abox
    }

    fn admissible(&self, mu: &[usize]) -> Result<bool> {
        self.ranking.reasoner.abox_consistent(&self.augmented(mu))
    }

    /// Pointwise-minimal admissible assignments.
    fn minimal_assignments(&self) -> Result<Vec<Vec<usize>>> {
        let total = self
            .caps
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c + 1))
            .filter(|&t| t <= MAX_ASSIGNMENTS)
            .ok_or(Error::GuardExceeded {
                what: "individual rank assignments",
                size: usize::MAX,
                limit: MAX_ASSIGNMENTS,
            })?;
        let mut all: Vec<Vec<usize>> = Vec::with_capacity(total);
        let mut mu = vec![0usize; self.caps.len()];
        loop {
            all.push(mu.clone());
            let mut i = 0;
            while i < mu.len() {
                mu[i] += 1;
                if mu[i] <= self.caps[i] {
                    break;
                }
                mu[i] = 0;
                i += 1;
            }
            if i == mu.len() {
                break;
            }
        }
        all.sort_by_key(|v| v.iter().sum::<usize>());
        let mut minimal: Vec<Vec<usize>> = Vec::new();
        for v in all {
            if minimal.iter().any(|m| m.iter().zip(&v).all(|(a, b)| a <= b)) {
                continue;
            }
            if self.admissible(&v)? {
                minimal.push(v);
            }
        }
        Ok(minimal)
    }

    fn holds(&self, mu: &[usize], q: &Query) -> Result<bool> {
        let abox = self.augmented(mu);
        let reasoner = &self.ranking.reasoner;
        match q {
            Query::Assertion(Assertion::Concept { left, individual }) => {
                let c = left.concept();
                if !reasoner.instance_of(&abox, c, individual.as_str())? {
                    return Ok(false);
                }
                if left.is_typical() {
                    let i = self.individuals.iter().position(|n| n == individual).expect("query individual");
                    return Ok(self.ranking.concept_rank(c) == Some(mu[i]));
                }
                Ok(true)
            }
            Query::Assertion(role @ Assertion::Role { .. }) => {
                Ok(self.abox.contains(role) || !reasoner.abox_consistent(&abox)?)
            }
            Query::Inclusion { .. } => Err(Error::Invalid("expected an assertion query".into())),
        }
    }
}

/// The minimal admissible rank assignments for the KB's individuals.
pub fn minimal_assignments(kb: &KnowledgeBase) -> Result<Vec<IndividualRankAssignment>> {
    let ranking = compute_ranking(kb);
    let p = AboxProblem::new(kb, &ranking, None)?;
    let minimal = p.minimal_assignments()?;
    Ok(minimal
        .into_iter()
        .map(|mu| p.individuals.iter().cloned().zip(mu).collect())
        .collect())
}

/// Rational-closure entailment of an assertion query: the query must hold
/// under every minimal admissible assignment of ranks to individuals.
pub fn rc_abox_entails(kb: &KnowledgeBase, q: &Query) -> Result<bool> {
    rc_abox_entails_with(kb, &compute_ranking(kb), q)
}

pub fn rc_abox_entails_with(kb: &KnowledgeBase, ranking: &RankingResult, q: &Query) -> Result<bool> {
    let p = AboxProblem::new(kb, ranking, Some(q))?;
    let minimal = p.minimal_assignments()?;
    if minimal.is_empty() {
        return Err(Error::Inconsistent);
    }
    for mu in &minimal {
        if !p.holds(mu, q)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Rational-closure entailment for any query. Fails with
/// [`Error::Inconsistent`] when the ABox admits no rank assignment.
pub fn rc_entails(kb: &KnowledgeBase, q: &Query) -> Result<bool> {
    let ranking = compute_ranking(kb);
    match q {
        Query::Inclusion { .. } => {
            if !kb.abox().is_empty() {
                let p = AboxProblem::new(kb, &ranking, None)?;
                if p.minimal_assignments()?.is_empty() {
                    return Err(Error::Inconsistent);
                }
            }
            rc_entails_tbox_with(&ranking, q)
        }
        Query::Assertion(_) => rc_abox_entails_with(kb, &ranking, q),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::Concept as C;
    use crate::parser::{parse_kb, parse_query};

    const PENGUIN: &str = "Penguin <= Bird.\nBabyPenguin <= Penguin.\nT(Bird) <= Fly.\n\
        T(Bird) <= NiceFeather.\nT(Penguin) <= ~Fly.\nT(Penguin) <= BlackFeather.\n\
        T(BabyPenguin) <= ~BlackFeather.\n";

    const WORKER: &str = "SmartWorker <= Worker.\nT(Worker) <= ReachableAtOffice.\n\
        T(SmartWorker) <= ~ReachableAtOffice.\n";

    fn a(n: &str) -> C {
        C::atom(n)
    }

    fn q(text: &str) -> Query {
        parse_query(text).unwrap()
    }

    #[test]
    fn exceptionality() {
        let kb = parse_kb(PENGUIN).unwrap();
        assert!(exceptional(&a("Penguin"), kb.defeasible(), kb.strict()));
        assert!(!exceptional(&a("Bird"), kb.defeasible(), kb.strict()));
        assert!(exceptional(&C::Bottom, &[], &[]));
    }

    #[test]
    fn penguin_ranks() {
        let r = compute_ranking(&parse_kb(PENGUIN).unwrap());
        assert_eq!(r.concept_rank(&a("Bird")), Some(0));
        assert_eq!(r.concept_rank(&a("Penguin")), Some(1));
        assert_eq!(r.concept_rank(&a("BabyPenguin")), Some(2));
        assert_eq!(r.level_indices(), &[vec![0, 1, 2, 3, 4], vec![2, 3, 4], vec![4], vec![]]);
        let ranks: Vec<_> = (0..5).map(|i| r.default_rank(i)).collect();
        assert_eq!(ranks, [Some(0), Some(0), Some(1), Some(1), Some(2)]);
    }

    #[test]
    fn old_eagle_ranks() {
        let kb = parse_kb(
            "T(Eagle) <= Fly.\nT(Eagle) <= NiceFeather.\nT(OldAnimal) <= ~NiceFeather.\n\
             OldEagle <= Eagle & OldAnimal.\nEagle & OldAnimal <= OldEagle.\n",
        )
        .unwrap();
        let r = compute_ranking(&kb);
        assert_eq!(r.concept_rank(&a("Eagle")), Some(0));
        assert_eq!(r.concept_rank(&a("OldAnimal")), Some(0));
        assert_eq!(r.concept_rank(&a("OldEagle")), Some(1));
        assert!((0..3).all(|i| r.default_rank(i) == Some(0)));
    }

    #[test]
    fn no_defaults() {
        let r = compute_ranking(&parse_kb("A <= B.").unwrap());
        assert_eq!(r.level_indices(), &[Vec::<usize>::new()]);
        assert_eq!(r.concept_rank(&a("A")), Some(0));
        assert_eq!(r.concept_rank(&C::and(a("A"), C::not(a("B")))), None);
    }

    #[test]
    fn infinite_ranks_become_strict() {
        let kb = parse_kb("T(A) <= B.\nT(A) <= ~B.\nT(C) <= D.").unwrap();
        let r = compute_ranking(&kb);
        assert_eq!(r.absurd(), &[a("A")]);
        assert_eq!(r.concept_rank(&a("A")), None);
        assert_eq!(r.concept_rank(&a("C")), Some(0));
        assert!(rc_entails_tbox(&kb, &q("A <= Bot")).unwrap());
        assert!(rc_entails_tbox(&kb, &q("T(A) <= E")).unwrap());
    }

    #[test]
    fn tbox_queries() {
        let worker = parse_kb(WORKER).unwrap();
        assert!(rc_entails_tbox(&worker, &q("T(Worker & Slim) <= ReachableAtOffice")).unwrap());
        assert!(rc_entails_tbox(&worker, &q("T(SmartWorker & Slim) <= ~ReachableAtOffice")).unwrap());
        assert!(rc_entails_tbox(&worker, &q("SmartWorker <= Worker")).unwrap());
        assert!(rc_entails_tbox(&worker, &q("T(Slim) <= Slim")).unwrap());
        let penguin = parse_kb(PENGUIN).unwrap();
        assert!(!rc_entails_tbox(&penguin, &q("T(Penguin) <= NiceFeather")).unwrap());
        assert!(!rc_entails_tbox(&penguin, &q("T(BabyPenguin) <= ~Fly")).unwrap());
        assert!(rc_entails_tbox(&penguin, &q("T(Penguin) <= ~Fly")).unwrap());
        assert!(rc_entails_tbox(&penguin, &q("T(Bird) <= NiceFeather")).unwrap());
    }

    #[test]
    fn abox_queries() {
        let kb = parse_kb(&format!("{WORKER}paola : Worker.")).unwrap();
        assert!(rc_abox_entails(&kb, &q("paola : ReachableAtOffice")).unwrap());
        assert!(rc_abox_entails(&kb, &q("paola : T(Worker)")).unwrap());
        let kb = parse_kb(&format!("{WORKER}paola : Worker.\npaola : SmartWorker.")).unwrap();
        assert!(rc_abox_entails(&kb, &q("paola : ~ReachableAtOffice")).unwrap());
        assert!(!rc_abox_entails(&kb, &q("paola : T(Worker)")).unwrap());
        let kb = parse_kb(&format!("{WORKER}fabrizio : some HasColleague. SmartWorker.")).unwrap();
        assert!(rc_abox_entails(&kb, &q("fabrizio : some HasColleague. ~ReachableAtOffice")).unwrap());
    }

    #[test]
    fn skolem_witnesses() {
        let kb = parse_kb("a : B & some r. (C & some s. D).").unwrap();
        let text: Vec<String> = skolemize(&kb, None).iter().map(|a| a.to_string()).collect();
        assert_eq!(text, ["(a, _sk0) : r", "a : B", "(_sk0, _sk1) : s", "_sk0 : C", "_sk1 : D"]);
    }

    #[test]
    fn incomparable_assignments_are_all_kept() {
        // Either a or b has to give up the default, not both.
        let kb = parse_kb("T(A) <= B.\na : A.\nb : A.\n(a, b) : r.\na : ~B | all r. ~B.").unwrap();
        let minimal = minimal_assignments(&kb).unwrap();
        assert_eq!(minimal.len(), 2);
        assert!(!rc_abox_entails(&kb, &q("a : B")).unwrap());
        assert!(!rc_abox_entails(&kb, &q("b : B")).unwrap());
    }

    #[test]
    fn inconsistent_abox_is_reported() {
        let kb = parse_kb("A <= Bot.\nx : A.").unwrap();
        assert_eq!(rc_entails(&kb, &q("x : B")), Err(Error::Inconsistent));
        let kb = parse_kb("T(A) <= B.\nT(A) <= ~B.\nx : T(A).").unwrap();
        assert_eq!(rc_entails(&kb, &q("x : B")), Err(Error::Inconsistent));
    }
}
