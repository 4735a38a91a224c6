mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;

use common::{bundled_kbs, Gen, Shape};
use typicality_core::closure::exceptional;
use typicality_core::{
    build_index, canonical_form, compute_ranking, enumerate_extensions, enumerate_scenarios, is_consistent_scenario, nnf,
    oracle_entails, parse_concept, parse_kb, rc_entails_tbox, sc_entails, select_scenarios, serialize_kb,
    tr_entails, AlcReasoner, CombineOptions, Concept, Dialect, Error, Inclusion, KnowledgeBase, Probability, Query,
};

fn equivalent(c: &Concept, d: &Concept) -> bool {
    let r = AlcReasoner::new(&[]);
    r.entails(c, d) && r.entails(d, c)
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn canonical_form_is_idempotent_and_equivalent(seed in any::<u64>()) {
        let c = Gen::new(seed, 4, 2).concept(3, true);
        let once = canonical_form(&c);
        prop_assert_eq!(canonical_form(&once), once.clone());
        prop_assert!(equivalent(&c, &once), "{} vs {}", c, once);
    }

    #[test]
    fn nnf_preserves_meaning(seed in any::<u64>()) {
        let c = Gen::new(seed, 4, 2).concept(3, true);
        prop_assert!(equivalent(&c, &nnf(&c)));
    }

    #[test]
    fn concept_text_round_trips(seed in any::<u64>()) {
        let c = Gen::new(seed, 5, 2).concept(4, true);
        prop_assert_eq!(parse_concept(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn kb_text_round_trips(seed in any::<u64>(), dialect in 0usize..3) {
        let shape = Shape { atoms: 4, roles: 2, max_strict: 3, max_defaults: 3, max_abox: 3, depth: 2, abox_roles: true };
        let k = Gen::new(seed, 4, 2).kb(shape, [Dialect::Plain, Dialect::AlcTp, Dialect::Tcl][dialect]);
        prop_assert!(parse_kb(&serialize_kb(&k)).unwrap() == k);
    }

    #[test]
    fn probability_complement_is_an_involution(num in 0i64..=1000) {
        let p = Probability::from_ratio(num, 1000);
        prop_assert_eq!(p.complement().complement(), p.clone());
        prop_assert_eq!(Probability::parse(&p.decimal_string()), Some(p));
    }
}

proptest! {
    #![proptest_config(config(100))]

    /// Without roles a countermodel needs one element, so the tableau and a
    /// two-element enumeration must agree exactly.
    #[test]
    fn tableau_matches_oracle_without_roles(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 3, 0);
        let strict: Vec<Inclusion> = (0..3).map(|_| Inclusion::strict(g.concept(2, false), g.concept(2, false))).collect();
        let (c, d) = (g.concept(2, false), g.concept(2, false));
        let k = KnowledgeBase::new(Dialect::Plain, strict.clone(), vec![], vec![]).unwrap();
        let tableau = AlcReasoner::new(&strict).entails(&c, &d);
        let oracle = oracle_entails(&k, &Query::strict(c, d), 2).unwrap().is_entailed();
        prop_assert_eq!(tableau, oracle);
    }

    /// With roles the bounded search can only miss countermodels.
    #[test]
    fn tableau_entailment_has_no_small_countermodel(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 2, 1);
        let strict: Vec<Inclusion> = (0..2).map(|_| Inclusion::strict(g.concept(2, true), g.concept(2, true))).collect();
        let (c, d) = (g.concept(2, true), g.concept(2, true));
        let k = KnowledgeBase::new(Dialect::Plain, strict.clone(), vec![], vec![]).unwrap();
        if AlcReasoner::new(&strict).entails(&c, &d) {
            prop_assert!(oracle_entails(&k, &Query::strict(c, d), 3).unwrap().is_entailed());
        }
    }

    #[test]
    fn monotonic_entailment_has_no_small_countermodel(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 3, 0);
        let shape = Shape { atoms: 3, roles: 0, max_strict: 2, max_defaults: 2, max_abox: 0, depth: 1, abox_roles: false };
        let k = g.kb(shape, Dialect::Plain);
        let q = g.query(&k, 1);
        if tr_entails(&k, &q) {
            prop_assert!(oracle_entails(&k, &q, 3).unwrap().is_entailed(), "{}", q);
        }
    }

    /// Each default sits at the first level where its antecedent stops being
    /// exceptional, against the strict part extended with the absurd
    /// antecedents.
    #[test]
    fn ranks_follow_exceptionality(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 3, 1);
        let shape = Shape { atoms: 3, roles: 1, max_strict: 2, max_defaults: 4, max_abox: 0, depth: 1, abox_roles: false };
        let k = g.kb(shape, Dialect::Plain);
        let ranking = compute_ranking(&k);
        let defaults = k.defeasible();
        let strict = ranking.strict();
        let from = |j: usize| -> Vec<Inclusion> {
            (0..defaults.len()).filter(|&i| ranking.default_rank(i).is_some_and(|r| r >= j)).map(|i| defaults[i].clone()).collect()
        };
        for (i, d) in defaults.iter().enumerate() {
            match ranking.default_rank(i) {
                Some(r) => {
                    prop_assert!(!exceptional(d.antecedent(), &from(r), strict));
                    for j in 0..r {
                        prop_assert!(exceptional(d.antecedent(), &from(j), strict));
                    }
                }
                None => prop_assert!(!AlcReasoner::new(strict).is_satisfiable(d.antecedent())),
            }
        }
    }
}

proptest! {
    #![proptest_config(config(60))]

    #[test]
    fn extension_probabilities_sum_to_one(seed in any::<u64>()) {
        let shape = Shape { atoms: 4, roles: 0, max_strict: 1, max_defaults: 4, max_abox: 4, depth: 1, abox_roles: false };
        let k = Gen::new(seed, 4, 0).kb(shape, Dialect::AlcTp);
        let index = match build_index(&k) {
            Err(Error::Inconsistent) => return Ok(()),
            other => other.unwrap(),
        };
        let extensions = enumerate_extensions(&index).unwrap();
        prop_assert_eq!(extensions.len(), 1usize << index.len());
        let total = extensions.iter().fold(Probability::zero().as_rational().clone(), |acc, e| acc + e.probability.as_rational());
        prop_assert_eq!(total, Probability::one().as_rational().clone());
    }

    #[test]
    fn scenario_probabilities_sum_to_one(seed in any::<u64>()) {
        let shape = Shape { atoms: 4, roles: 1, max_strict: 1, max_defaults: 12, max_abox: 0, depth: 1, abox_roles: false };
        let k = Gen::new(seed, 4, 1).kb(shape, Dialect::Tcl);
        let scenarios = enumerate_scenarios(&k).unwrap();
        prop_assert_eq!(scenarios.len(), 1usize << k.defeasible().len());
        let total = scenarios.iter().fold(Probability::zero().as_rational().clone(), |acc, w| acc + w.probability.as_rational());
        prop_assert_eq!(total, Probability::one().as_rational().clone());
    }

    /// Selected scenarios are consistent, and a consistent proper superset of
    /// a consistent scenario is strictly more probable since every default
    /// has probability above one half.
    #[test]
    fn selection_invariants(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 4, 1);
        let (h, m) = (Concept::atom("A"), Concept::atom("B"));
        let defaults: Vec<Inclusion> = (0..g.rng.gen_range(2..=6))
            .map(|i| {
                let left = if i % 2 == 0 { h.clone() } else { m.clone() };
                let p = g.probability(true);
                Inclusion::typical(left, g.concept(1, true)).with_probability(p)
            })
            .collect();
        let strict = vec![Inclusion::strict(g.concept(1, false), g.concept(1, false))];
        let k = KnowledgeBase::new(Dialect::Tcl, strict, defaults, vec![]).unwrap();
        let all = enumerate_scenarios(&k).unwrap();
        let consistent: Vec<_> = all.iter().filter(|w| is_consistent_scenario(&k, w, &h, &m, true)).collect();
        let kept = |w: &typicality_core::Scenario| w.kept().collect::<BTreeSet<usize>>();
        for a in &consistent {
            for b in &consistent {
                let (ka, kb) = (kept(a), kept(b));
                if ka.is_subset(&kb) && ka != kb {
                    prop_assert!(a.probability < b.probability);
                }
            }
        }
        if let Some(best) = consistent.iter().max_by(|a, b| a.probability.cmp(&b.probability)) {
            let kb_best = kept(best);
            let beaten = consistent.iter().any(|w| { let k = kept(w); kb_best.is_subset(&k) && kb_best != k });
            prop_assert!(!beaten, "the most probable consistent scenario is not maximal");
        }
        if let Ok(selection) = select_scenarios(&k, &h, &m, CombineOptions::default()) {
            for w in &selection.scenarios {
                prop_assert!(is_consistent_scenario(&k, w, &h, &m, true));
                let kw = kept(w);
                let maximal = consistent.iter().all(|v| { let kv = kept(v); !(kw.is_subset(&kv) && kw != kv) });
                prop_assert!(!maximal, "a set-maximal scenario was selected");
            }
        }
    }
}

fn plain(text: &str) -> Option<KnowledgeBase> {
    let k = parse_kb(text).ok()?;
    (k.dialect() == Dialect::Plain && k.abox().is_empty()).then_some(k)
}

/// On the bundled TBoxes every rational-closure consequence about a
/// default antecedent is also a skeptical-closure consequence.
#[test]
fn bundled_rc_implies_sc() {
    for (name, text) in bundled_kbs() {
        let Some(k) = plain(&text) else { continue };
        let antecedents: BTreeSet<Concept> = k.defeasible().iter().map(|d| d.antecedent().clone()).collect();
        let consequents: BTreeSet<Concept> = k.inclusions().map(|d| d.right.clone()).collect();
        for b in &antecedents {
            for d in &consequents {
                let q = Query::typical(b.clone(), d.clone());
                if rc_entails_tbox(&k, &q).unwrap() {
                    assert!(sc_entails(&k, &q).unwrap(), "{name}: {q}");
                }
            }
        }
    }
}

/// Cautious monotonicity and cut of skeptical closure on the bundled TBoxes.
#[test]
fn bundled_sc_cautious_monotonicity_and_cut() {
    for (name, text) in bundled_kbs() {
        let Some(k) = plain(&text) else { continue };
        let antecedents: BTreeSet<Concept> = k.defeasible().iter().map(|d| d.antecedent().clone()).collect();
        let consequents: BTreeSet<Concept> = k.inclusions().map(|d| d.right.clone()).collect();
        let sc = |b: &Concept, d: &Concept| sc_entails(&k, &Query::typical(b.clone(), d.clone())).unwrap();
        for b in &antecedents {
            for c in &consequents {
                if !sc(b, c) {
                    continue;
                }
                let bc = Concept::and(b.clone(), c.clone());
                for d in &consequents {
                    if sc(b, d) {
                        assert!(sc(&bc, d), "{name}: cautious monotonicity fails for {b}, {c}, {d}");
                    }
                    if sc(&bc, d) {
                        assert!(sc(b, d), "{name}: cut fails for {b}, {c}, {d}");
                    }
                }
            }
        }
    }
}
