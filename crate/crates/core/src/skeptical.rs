//! Skeptical closure: a single base of defaults per queried concept,
//! built rank by rank downwards from the rank of the concept.

use std::fmt;

use crate::alc::AlcReasoner;
use crate::closure::{compute_ranking, rc_entails_tbox_with, RankingResult};
use crate::concept::{Concept, LeftConcept};
use crate::error::{Error, Result};
use crate::kb::{materialization, Inclusion, KnowledgeBase, Query};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Base {
    pub target: Concept,
    /// Accepted default indices per rank, highest rank first.
    pub accepted: Vec<(usize, Vec<usize>)>,
    /// Rank whose defaults conflicted and ended the construction.
    pub stop_rank: Option<usize>,
}

impl Base {
    pub fn defaults(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.accepted.iter().flat_map(|(_, d)| d.iter().copied()).collect();
        all.sort_unstable();
        all
    }

    pub fn describe(&self, kb: &KnowledgeBase) -> String {
        let mut out = format!("base for {}\n", self.target);
        for (rank, defaults) in &self.accepted {
            out.push_str(&format!("rank {rank}:"));
            for &i in defaults {
                out.push_str(&format!(" [{}] {};", i + 1, kb.defeasible()[i]));
            }
            out.push('\n');
        }
        match self.stop_rank {
            Some(k) => out.push_str(&format!("stopped at rank {k}\n")),
            None => out.push_str("no stop\n"),
        }
        out
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ranks: Vec<String> = self.accepted.iter().map(|(r, d)| format!("{r}:{d:?}")).collect();
        write!(f, "{} [{}]", self.target, ranks.join(" "))?;
        if let Some(k) = self.stop_rank {
            write!(f, " stop {k}")?;
        }
        Ok(())
    }
}

fn compatible_with(reasoner: &AlcReasoner, b: &Concept, defaults: &[&Inclusion]) -> bool {
    reasoner.is_satisfiable(&Concept::and(b.clone(), materialization(defaults.iter().copied())))
}

/// `d` together with the accepted defaults is satisfiable with `b`.
pub fn individually_compatible(d: &Inclusion, b: &Concept, accepted: &[Inclusion], strict: &[Inclusion]) -> bool {
    let mut all: Vec<&Inclusion> = accepted.iter().collect();
    all.push(d);
    compatible_with(&AlcReasoner::without_cache(strict), b, &all)
}

pub fn build_base(kb: &KnowledgeBase, b: &Concept) -> Result<Base> {
    build_base_with(&compute_ranking(kb), b)
}

pub fn build_base_with(ranking: &RankingResult, b: &Concept) -> Result<Base> {
    let rank = ranking.concept_rank(b).ok_or_else(|| Error::InfiniteRank(b.to_string()))?;
    let defaults = ranking.defaults();
    let ranks: Vec<Option<usize>> = (0..defaults.len()).map(|i| ranking.default_rank(i)).collect();
    let at = |k: usize| (0..defaults.len()).filter(|&i| ranks[i] == Some(k)).collect::<Vec<usize>>();
    let reasoner = ranking.reasoner();

    let top = at(rank);
    let mut accepted: Vec<&Inclusion> = top.iter().map(|&i| &defaults[i]).collect();
    let mut base = Base { target: b.clone(), accepted: vec![(rank, top)], stop_rank: None };
    for k in (0..rank).rev() {
        let candidates: Vec<usize> = at(k)
            .into_iter()
            .filter(|&i| {
                let mut with = accepted.clone();
                with.push(&defaults[i]);
                compatible_with(reasoner, b, &with)
            })
            .collect();
        let mut with = accepted.clone();
        with.extend(candidates.iter().map(|&i| &defaults[i]));
        if !compatible_with(reasoner, b, &with) {
            base.stop_rank = Some(k);
            break;
        }
        accepted = with;
        base.accepted.push((k, candidates));
    }
    Ok(base)
}

/// Skeptical-closure entailment. `T(B) <= D` holds iff `B` together with
/// the materialized base entails `D`; strict queries fall back to the
/// strict part.
pub fn sc_entails(kb: &KnowledgeBase, q: &Query) -> Result<bool> {
    let ranking = compute_ranking(kb);
    match q {
        Query::Inclusion { left: LeftConcept::Typical(b), right } => {
            let base = build_base_with(&ranking, b)?;
            let mat = materialization(base.defaults().into_iter().map(|i| &ranking.defaults()[i]));
            Ok(ranking.reasoner().entails(&Concept::and(b.clone(), mat), right))
        }
        _ => rc_entails_tbox_with(&ranking, q),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::rc_entails_tbox;
    use crate::concept::Concept as C;
    use crate::parser::{parse_kb, parse_query};

    const PENGUIN: &str = "Penguin <= Bird.\nBabyPenguin <= Penguin.\nT(Bird) <= Fly.\n\
        T(Bird) <= NiceFeather.\nT(Penguin) <= ~Fly.\nT(Penguin) <= BlackFeather.\n\
        T(BabyPenguin) <= ~BlackFeather.\n";

    const OLD_EAGLE: &str = "T(Eagle) <= Fly.\nT(Eagle) <= NiceFeather.\nT(OldAnimal) <= ~NiceFeather.\n\
        OldEagle <= Eagle & OldAnimal.\nEagle & OldAnimal <= OldEagle.\n";

    fn q(s: &str) -> Query {
        parse_query(s).unwrap()
    }

    #[test]
    fn compatibility_steps() {
        let kb = parse_kb(PENGUIN).unwrap();
        let d = kb.defeasible();
        let b = C::atom("BabyPenguin");
        assert!(individually_compatible(&d[2], &b, &[d[4].clone()], kb.strict()));
        assert!(!individually_compatible(&d[3], &b, &[d[4].clone()], kb.strict()));
        assert!(!individually_compatible(&d[0], &b, &[d[4].clone(), d[2].clone()], kb.strict()));
        let trivial = Inclusion::typical(C::atom("X"), C::Top);
        assert!(individually_compatible(&trivial, &b, &[], kb.strict()));
    }

    #[test]
    fn penguin_base() {
        let kb = parse_kb(PENGUIN).unwrap();
        let base = build_base(&kb, &C::atom("BabyPenguin")).unwrap();
        assert_eq!(base.defaults(), [1, 2, 4]);
        assert_eq!(base.stop_rank, None);
        assert_eq!(base.accepted, vec![(2, vec![4]), (1, vec![2]), (0, vec![1])]);
    }

    #[test]
    fn old_eagle_base_is_empty() {
        let kb = parse_kb(OLD_EAGLE).unwrap();
        let base = build_base(&kb, &C::atom("OldEagle")).unwrap();
        assert!(base.defaults().is_empty());
        assert_eq!(base.stop_rank, Some(0));
        assert!(!sc_entails(&kb, &q("T(OldEagle) <= Fly")).unwrap());
    }

    #[test]
    fn single_default() {
        let kb = parse_kb("T(A) <= B.").unwrap();
        let base = build_base(&kb, &C::atom("A")).unwrap();
        assert_eq!(base.defaults(), [0]);
        assert!(sc_entails(&kb, &q("T(A) <= B")).unwrap());
    }

    #[test]
    fn no_drowning() {
        let kb = parse_kb(PENGUIN).unwrap();
        for s in ["T(BabyPenguin) <= NiceFeather & ~Fly", "T(BabyPenguin) <= ~Fly", "T(Penguin) <= NiceFeather"] {
            assert!(sc_entails(&kb, &q(s)).unwrap(), "{s}");
        }
        assert!(!rc_entails_tbox(&kb, &q("T(BabyPenguin) <= ~Fly")).unwrap());
        assert!(!sc_entails(&kb, &q("T(BabyPenguin) <= BlackFeather")).unwrap());
        assert!(sc_entails(&kb, &q("T(BabyPenguin) <= BabyPenguin")).unwrap());
    }

    #[test]
    fn infinite_rank_is_reported() {
        let kb = parse_kb("A <= Bot.\nT(B) <= C.").unwrap();
        assert!(matches!(build_base(&kb, &C::atom("A")), Err(Error::InfiniteRank(_))));
    }
}
