//! Typicality inclusions with probabilities of exceptions: typicality
//! assumptions about individuals, ABox extensions and their probabilities.

use std::fmt;

use crate::closure::{compute_ranking, rc_abox_entails_with, rc_entails_tbox_with};
use crate::concept::{canonical_form, Concept, Name};
use crate::encoding::tr_entails;
use crate::error::{Error, Result};
use crate::kb::{signature, Assertion, KnowledgeBase, Query};
use crate::probability::Probability;

pub const DEFAULT_EXTENSION_LIMIT: usize = 20;

/// The typicality assumptions `T(C_i)(a_i)` that rational closure grants,
/// in order of individual name then concept text, with the probability
/// that each one holds.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AssumptionIndex {
    pub pairs: Vec<(Name, Concept)>,
    pub probabilities: Vec<Probability>,
}

impl AssumptionIndex {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AboxExtension {
    /// `kept[i]` selects the assumption `T(C_i)(a_i)`.
    pub kept: Vec<bool>,
    pub assertions: Vec<Assertion>,
    pub probability: Probability,
}

impl fmt::Display for AboxExtension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: String = self.kept.iter().map(|&k| if k { '1' } else { '0' }).collect();
        let items: Vec<String> = self.assertions.iter().map(|a| a.to_string()).collect();
        write!(f, "{bits} {{{}}} P = {}", items.join(", "), self.probability)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RangeVerdict {
    Entailed,
    NotEntailed,
    /// No extension has a probability inside the range.
    Vacuous,
}

/// Builds the assumption index from rational closure over the KB without
/// its probabilities.
pub fn build_index(kb: &KnowledgeBase) -> Result<AssumptionIndex> {
    let plain = kb.without_probabilities();
    let mut concepts: Vec<Concept> = Vec::new();
    for d in kb.defeasible() {
        let c = canonical_form(d.antecedent());
        if !concepts.contains(&c) {
            concepts.push(c);
        }
    }
    concepts.sort_by_key(|c| c.to_string());
    let individuals = signature(kb).individuals;
    if individuals.is_empty() || concepts.is_empty() {
        return Ok(AssumptionIndex::default());
    }
    let ranking = compute_ranking(&plain);
    let mut index = AssumptionIndex::default();
    for a in &individuals {
        for c in &concepts {
            let q = Query::Assertion(Assertion::typical(a.as_str(), c.clone()));
            if rc_abox_entails_with(&plain, &ranking, &q)? {
                let p: Probability = kb
                    .defeasible()
                    .iter()
                    .filter(|d| canonical_form(d.antecedent()) == *c)
                    .filter_map(|d| d.probability.as_ref())
                    .product();
                index.pairs.push((a.clone(), c.clone()));
                index.probabilities.push(p);
            }
        }
    }
    Ok(index)
}

pub fn enumerate_extensions(index: &AssumptionIndex) -> Result<Vec<AboxExtension>> {
    enumerate_extensions_with_limit(index, DEFAULT_EXTENSION_LIMIT)
}

/// All `2^n` extensions, counting in binary over the index order with the
/// first assumption as the most significant bit.
pub fn enumerate_extensions_with_limit(index: &AssumptionIndex, limit: usize) -> Result<Vec<AboxExtension>> {
    let n = index.len();
    if n > limit || n >= usize::BITS as usize {
        return Err(Error::GuardExceeded { what: "typicality assumptions", size: n, limit });
    }
    let mut out = Vec::with_capacity(1 << n);
    for code in 0usize..1 << n {
        let kept: Vec<bool> = (0..n).map(|i| code >> (n - 1 - i) & 1 == 1).collect();
        let factors: Vec<Probability> = kept
            .iter()
            .zip(&index.probabilities)
            .map(|(&k, p)| if k { p.clone() } else { p.complement() })
            .collect();
        let assertions = kept
            .iter()
            .zip(&index.pairs)
            .filter(|(&k, _)| k)
            .map(|(_, (a, c))| Assertion::typical(a.as_str(), c.clone()))
            .collect();
        out.push(AboxExtension { kept, assertions, probability: factors.iter().product() });
    }
    Ok(out)
}

fn entailed_from(plain: &KnowledgeBase, ext: &AboxExtension, q: &Query) -> bool {
    tr_entails(&plain.with_extra_assertions(ext.assertions.iter().cloned()), q)
}

/// Entailment in the probability range `[min, max]`. Inclusion queries
/// ignore the range and use rational closure.
pub fn prob_entails(kb: &KnowledgeBase, q: &Query, min: &Probability, max: &Probability) -> Result<RangeVerdict> {
    if min > max || *max > Probability::one() {
        return Err(Error::Invalid(format!("invalid probability range [{min}, {max}]")));
    }
    let plain = kb.without_probabilities();
    if let Query::Inclusion { .. } = q {
        let ranking = compute_ranking(&plain);
        return Ok(if rc_entails_tbox_with(&ranking, q)? { RangeVerdict::Entailed } else { RangeVerdict::NotEntailed });
    }
    let extensions = enumerate_extensions(&build_index(kb)?)?;
    let selected: Vec<&AboxExtension> =
        extensions.iter().filter(|e| &e.probability >= min && &e.probability <= max).collect();
    if selected.is_empty() {
        return Ok(RangeVerdict::Vacuous);
    }
    Ok(if selected.iter().all(|e| entailed_from(&plain, e, q)) {
        RangeVerdict::Entailed
    } else {
        RangeVerdict::NotEntailed
    })
}

/// Sum of the probabilities of the extensions that entail `q`.
pub fn query_probability(kb: &KnowledgeBase, q: &Query) -> Result<Probability> {
    let plain = kb.without_probabilities();
    let extensions = enumerate_extensions(&build_index(kb)?)?;
    let entailing: Vec<&Probability> = extensions
        .iter()
        .filter(|e| entailed_from(&plain, e, q))
        .map(|e| &e.probability)
        .collect();
    Ok(entailing.into_iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::Concept as C;
    use crate::parser::{parse_kb, parse_query};

    const STUDENT: &str = "mode alctp.\n0.6 :: T(Student) <= SportLover.\n\
        0.9 :: T(Student) <= SocialNetworkUser.\nann : Student.\n";

    fn p(n: i64, d: i64) -> Probability {
        Probability::from_ratio(n, d)
    }

    #[test]
    fn student_index() {
        let idx = build_index(&parse_kb(STUDENT).unwrap()).unwrap();
        assert_eq!(idx.pairs, vec![(Name::new("ann"), C::atom("Student"))]);
        assert_eq!(idx.probabilities, vec![p(27, 50)]);
    }

    #[test]
    fn empty_abox_gives_empty_index() {
        let kb = parse_kb("mode alctp.\n0.6 :: T(Student) <= SportLover.").unwrap();
        assert!(build_index(&kb).unwrap().is_empty());
        let ext = enumerate_extensions(&AssumptionIndex::default()).unwrap();
        assert_eq!(ext.len(), 1);
        assert!(ext[0].probability.is_one());
    }

    #[test]
    fn atypical_individuals_get_no_assumption() {
        let kb = parse_kb(
            "mode alctp.\nSmartWorker <= Worker.\n0.9 :: T(Worker) <= ReachableAtOffice.\n\
             0.7 :: T(SmartWorker) <= ~ReachableAtOffice.\npaola : SmartWorker.\nluca : Worker.",
        )
        .unwrap();
        let idx = build_index(&kb).unwrap();
        let pairs: Vec<String> = idx.pairs.iter().map(|(a, c)| format!("{a}:{c}")).collect();
        assert_eq!(pairs, ["luca:Worker", "paola:SmartWorker"]);
    }

    #[test]
    fn student_extensions() {
        let idx = build_index(&parse_kb(STUDENT).unwrap()).unwrap();
        let ext = enumerate_extensions(&idx).unwrap();
        let probs: Vec<_> = ext.iter().map(|e| e.probability.clone()).collect();
        assert_eq!(probs, [p(23, 50), p(27, 50)]);
        let total: Probability = probs.iter().sum();
        assert!(total.is_one());
        assert_eq!(ext[1].to_string(), "1 {ann : T(Student)} P = 0.54");
    }

    #[test]
    fn extension_guard() {
        let idx = AssumptionIndex {
            pairs: vec![(Name::new("a"), C::atom("A")); 3],
            probabilities: vec![p(1, 2); 3],
        };
        assert!(enumerate_extensions_with_limit(&idx, 2).is_err());
        let ext = enumerate_extensions_with_limit(&idx, 3).unwrap();
        assert_eq!(ext.len(), 8);
        assert!(ext.iter().map(|e| &e.probability).sum::<Probability>().is_one());
    }

    #[test]
    fn range_entailment() {
        let kb = parse_kb(STUDENT).unwrap();
        let q = parse_query("ann : SportLover").unwrap();
        assert_eq!(prob_entails(&kb, &q, &p(1, 2), &p(1, 1)).unwrap(), RangeVerdict::Entailed);
        assert_eq!(prob_entails(&kb, &q, &p(1, 10), &p(1, 1)).unwrap(), RangeVerdict::NotEntailed);
        assert_eq!(prob_entails(&kb, &q, &p(6, 10), &p(7, 10)).unwrap(), RangeVerdict::Vacuous);
        let t = parse_query("T(Student) <= SportLover").unwrap();
        assert_eq!(prob_entails(&kb, &t, &p(1, 10), &p(2, 10)).unwrap(), RangeVerdict::Entailed);
        assert!(prob_entails(&kb, &q, &p(1, 2), &p(1, 10)).is_err());
    }

    #[test]
    fn query_probabilities() {
        let kb = parse_kb(STUDENT).unwrap();
        assert_eq!(query_probability(&kb, &parse_query("ann : SportLover").unwrap()).unwrap(), p(27, 50));
        assert!(query_probability(&kb, &parse_query("ann : Student").unwrap()).unwrap().is_one());
        assert!(query_probability(&kb, &parse_query("ann : ~Student").unwrap()).unwrap().is_zero());
    }
}
