//! Monotonic entailment for typicality KBs by translation into plain ALC.
//!
//! Each concept `C` under `T` gets a fresh atom `box_C`, read as "no
//! preferred element is a `C`", and a single fresh role `pref` links an
//! element to the elements preferred to it:
//!
//! ```text
//! box_C  <= all pref. (~C & box_C)
//! ~box_C <= some pref. (C & box_C)
//! ```
//!
//! `T(C)` is then `C & box_C`.

use std::collections::BTreeMap;

use crate::alc::AlcReasoner;
use crate::concept::{canonical_form, Concept, LeftConcept, Name};
use crate::kb::{signature, Assertion, Dialect, Inclusion, KnowledgeBase, Query, Signature};
use crate::parser::serialize_kb;

#[derive(Clone, Debug)]
pub struct EncodedKb {
    /// Plain ALC: strict inclusions and an ABox without typicality.
    pub kb: KnowledgeBase,
    /// Box atom for each canonical concept under `T`.
    pub boxes: BTreeMap<Concept, Name>,
    pub pref: Name,
}

impl EncodedKb {
    pub fn to_text(&self) -> String {
        serialize_kb(&self.kb)
    }
}

struct Encoder {
    taken: Signature,
    boxes: BTreeMap<Concept, Name>,
    pref: Name,
    axioms: Vec<Inclusion>,
}

impl Encoder {
    fn new(mut taken: Signature) -> Self {
        let pref = fresh(&taken, "pref");
        taken.roles.insert(pref.clone());
        Encoder { taken, boxes: BTreeMap::new(), pref, axioms: Vec::new() }
    }

    fn box_for(&mut self, c: &Concept) -> Concept {
        let key = canonical_form(c);
        if let Some(b) = self.boxes.get(&key) {
            return Concept::Atom(b.clone());
        }
        let base = match &key {
            Concept::Atom(n) => format!("box_{n}"),
            _ => format!("box_{}", self.boxes.len()),
        };
        let name = fresh(&self.taken, &base);
        self.taken.atoms.insert(name.clone());
        self.boxes.insert(key.clone(), name.clone());
        let b = Concept::Atom(name);
        self.axioms.push(Inclusion::strict(
            b.clone(),
            Concept::Forall(self.pref.clone(), Box::new(Concept::and(Concept::not(key.clone()), b.clone()))),
        ));
        self.axioms.push(Inclusion::strict(
            Concept::not(b.clone()),
            Concept::Exists(self.pref.clone(), Box::new(Concept::and(key, b.clone()))),
        ));
        b
    }

    /// The plain concept standing for a left-hand side.
    fn left(&mut self, left: &LeftConcept) -> Concept {
        match left {
            LeftConcept::Plain(c) => c.clone(),
            LeftConcept::Typical(c) => Concept::and(c.clone(), self.box_for(c)),
        }
    }
}

fn fresh(taken: &Signature, base: &str) -> Name {
    let mut candidate = base.to_string();
    while taken.contains_name(&candidate) {
        candidate.push('_');
    }
    Name::new(&candidate)
}

fn encode_with(kb: &KnowledgeBase, enc: &mut Encoder) -> (Vec<Inclusion>, Vec<Assertion>) {
    let mut strict: Vec<Inclusion> = kb.strict().iter().map(Inclusion::without_probability).collect();
    for d in kb.defeasible() {
        let left = enc.left(&d.left);
        strict.push(Inclusion::strict(left, d.right.clone()));
    }
    let abox = kb
        .abox()
        .iter()
        .map(|a| match a {
            Assertion::Concept { left, individual } => {
                Assertion::Concept { left: LeftConcept::Plain(enc.left(left)), individual: individual.clone() }
            }
            other => other.clone(),
        })
        .collect();
    (strict, abox)
}

pub fn encode(kb: &KnowledgeBase) -> EncodedKb {
    let mut enc = Encoder::new(signature(kb));
    let (mut strict, abox) = encode_with(kb, &mut enc);
    strict.extend(enc.axioms);
    let kb = KnowledgeBase::new(Dialect::Plain, strict, vec![], abox).expect("encoded KB is plain ALC");
    EncodedKb { kb, boxes: enc.boxes, pref: enc.pref }
}

/// `q` holds in every ranked model of `kb`.
pub fn tr_entails(kb: &KnowledgeBase, q: &Query) -> bool {
    let mut taken = signature(kb);
    taken.add_query(q);
    let mut enc = Encoder::new(taken);
    let (mut strict, mut abox) = encode_with(kb, &mut enc);
    let witness = fresh(&enc.taken, "x");
    match q {
        Query::Inclusion { left, right } => {
            let c = enc.left(left);
            abox.push(Assertion::Concept {
                left: LeftConcept::Plain(Concept::and(c, Concept::not(right.clone()))),
                individual: witness,
            });
        }
        Query::Assertion(Assertion::Concept { left, individual }) => {
            let c = enc.left(left);
            abox.push(Assertion::Concept {
                left: LeftConcept::Plain(Concept::not(c)),
                individual: individual.clone(),
            });
        }
        Query::Assertion(role @ Assertion::Role { .. }) => {
            // Without inverse roles an edge is entailed only if asserted
            // or if the KB is inconsistent.
            if kb.abox().contains(role) {
                return true;
            }
        }
    }
    strict.extend(enc.axioms);
    let reasoner = AlcReasoner::without_cache(&strict);
    !reasoner.abox_consistent(&abox).expect("encoded ABox has no typicality")
}
