//! Defeasible reasoning over ALC extended with a typicality operator.

pub mod alc;
pub mod closure;
pub mod combination;
pub mod concept;
pub mod encoding;
pub mod error;
pub mod kb;
pub mod models;
pub mod oracle;
pub mod parser;
pub mod probabilistic;
pub mod skeptical;
pub mod probability;

pub use alc::{nnf, AlcReasoner};
pub use closure::{compute_ranking, rc_abox_entails, rc_entails, rc_entails_tbox, RankingResult};
pub use concept::{canonical_form, Concept, LeftConcept, Name};
pub use error::{Error, ParseError, Result};
pub use encoding::{encode, tr_entails, EncodedKb};
pub use kb::{materialization, signature, Assertion, Dialect, Inclusion, KnowledgeBase, Query, Signature};
pub use models::{extension, typical_set, Elements, RankedInterpretation};
pub use oracle::{oracle_entails, oracle_min_canonical_entails, CanonicalVerdict, OracleVerdict};
pub use parser::{parse_concept, parse_kb, parse_query, serialize_kb};
pub use probability::Probability;
pub use probabilistic::{build_index, enumerate_extensions, prob_entails, query_probability, AboxExtension, AssumptionIndex, RangeVerdict};
pub use combination::{enumerate_scenarios, is_consistent_scenario, revise, select_scenarios, CombinationResult, CombineOptions, Scenario, Verdict};
pub use skeptical::{build_base, individually_compatible, sc_entails, Base};
