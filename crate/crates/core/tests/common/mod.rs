//! Seeded generators of small concepts, knowledge bases and queries.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use typicality_core::{Assertion, Concept, Dialect, Inclusion, KnowledgeBase, Probability, Query};

pub struct Gen {
    pub rng: ChaCha8Rng,
    pub atoms: Vec<&'static str>,
    pub roles: Vec<&'static str>,
    pub individuals: Vec<&'static str>,
}

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub atoms: usize,
    pub roles: usize,
    pub max_strict: usize,
    pub max_defaults: usize,
    pub max_abox: usize,
    pub depth: usize,
    /// Allow role restrictions inside ABox concept assertions.
    pub abox_roles: bool,
}

const ATOMS: [&str; 6] = ["A", "B", "C", "D", "E", "F"];
const ROLES: [&str; 2] = ["r", "s"];
const INDIVIDUALS: [&str; 2] = ["a", "b"];

impl Gen {
    pub fn new(seed: u64, atoms: usize, roles: usize) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            atoms: ATOMS[..atoms].to_vec(),
            roles: ROLES[..roles].to_vec(),
            individuals: INDIVIDUALS.to_vec(),
        }
    }

    pub fn atom(&mut self) -> Concept {
        Concept::atom(self.atoms.choose(&mut self.rng).unwrap())
    }

    pub fn literal(&mut self) -> Concept {
        let a = self.atom();
        if self.rng.gen_bool(0.3) {
            Concept::not(a)
        } else {
            a
        }
    }

    /// Random concept; role restrictions only when `roles` is true and the
    /// generator has roles, with role-free fillers.
    pub fn concept(&mut self, depth: usize, roles: bool) -> Concept {
        if depth == 0 {
            return match self.rng.gen_range(0..20) {
                0 => Concept::Top,
                1 => Concept::Bottom,
                _ => self.literal(),
            };
        }
        let with_roles = roles && !self.roles.is_empty();
        match self.rng.gen_range(0..if with_roles { 7 } else { 5 }) {
            0 | 1 => self.concept(0, roles),
            2 => Concept::and(self.concept(depth - 1, roles), self.concept(depth - 1, roles)),
            3 => Concept::or(self.concept(depth - 1, roles), self.concept(depth - 1, roles)),
            4 => Concept::not(self.concept(depth - 1, roles)),
            5 => {
                let r = *self.roles.choose(&mut self.rng).unwrap();
                Concept::exists(r, self.concept(depth - 1, false))
            }
            _ => {
                let r = *self.roles.choose(&mut self.rng).unwrap();
                Concept::forall(r, self.concept(depth - 1, false))
            }
        }
    }

    pub fn probability(&mut self, lo_half: bool) -> Probability {
        let den = 10;
        let num = if lo_half { self.rng.gen_range(6..10) } else { self.rng.gen_range(1..10) };
        Probability::from_ratio(num, den)
    }

    pub fn kb(&mut self, shape: Shape, dialect: Dialect) -> KnowledgeBase {
        let strict: Vec<Inclusion> = (0..self.rng.gen_range(0..=shape.max_strict))
            .map(|_| Inclusion::strict(self.concept(shape.depth, true), self.concept(shape.depth, true)))
            .collect();
        let defaults: Vec<Inclusion> = (0..self.rng.gen_range(0..=shape.max_defaults))
            .map(|_| {
                let mut d = Inclusion::typical(self.concept(shape.depth.min(1), false), self.concept(shape.depth, true));
                match dialect {
                    Dialect::Plain => {}
                    Dialect::AlcTp => d.probability = Some(self.probability(false)),
                    Dialect::Tcl => d.probability = Some(self.probability(true)),
                }
                d
            })
            .collect();
        let abox: Vec<Assertion> = (0..self.rng.gen_range(0..=shape.max_abox))
            .map(|_| {
                let a = *self.individuals.choose(&mut self.rng).unwrap();
                if !shape.abox_roles && self.rng.gen_bool(0.2) {
                    Assertion::typical(a, self.concept(shape.depth.min(1), false))
                } else if shape.abox_roles && !self.roles.is_empty() && self.rng.gen_bool(0.2) {
                    let b = *self.individuals.choose(&mut self.rng).unwrap();
                    Assertion::role(self.roles[0], a, b)
                } else {
                    Assertion::concept(a, self.concept(shape.depth, shape.abox_roles))
                }
            })
            .collect();
        KnowledgeBase::new(dialect, strict, defaults, abox).expect("generated KB is well formed")
    }

    pub fn query(&mut self, kb: &KnowledgeBase, depth: usize) -> Query {
        let individuals: Vec<String> = kb.abox().iter().flat_map(|a| a.individuals()).map(|n| n.to_string()).collect();
        let antecedents: Vec<Concept> = kb.defeasible().iter().map(|d| d.antecedent().clone()).collect();
        let pick = self.rng.gen_range(0..if individuals.is_empty() { 2 } else { 4 });
        let left = if !antecedents.is_empty() && self.rng.gen_bool(0.5) {
            antecedents.choose(&mut self.rng).unwrap().clone()
        } else {
            self.concept(depth.min(1), false)
        };
        match pick {
            0 => Query::typical(left, self.concept(depth, true)),
            1 => Query::strict(self.concept(depth, true), self.concept(depth, true)),
            2 => {
                let a = individuals.choose(&mut self.rng).unwrap().clone();
                Query::Assertion(Assertion::concept(&a, self.concept(depth, false)))
            }
            _ => {
                let a = individuals.choose(&mut self.rng).unwrap().clone();
                Query::Assertion(Assertion::typical(&a, left))
            }
        }
    }
}

pub fn bundled_kbs() -> Vec<(String, String)> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../kbs");
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .expect("kbs directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "kb"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}
