//! Brute-force entailment by enumerating small ranked models.
//!
//! A model is split into its *structure* (atom extensions, role edges,
//! individual map) and its rank vector. Structures are enumerated with the
//! elements' atom masks in nondecreasing order. When every role filler is
//! role-free, an element's role edges only matter through which masks its
//! successors carry, so edge choices are collapsed to distinct valuations of
//! the role restrictions and checked element by element before the product
//! is formed.
//!
//! For a fixed structure, the rank vectors satisfying the typicality
//! inclusions are closed under pointwise minimum; without typicality
//! assertions the least one is computed as a fixpoint instead of searched.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::ops::ControlFlow;

use crate::concept::{canonical_form, Concept, LeftConcept, Name};
use crate::error::{Error, Result};
use crate::kb::{signature, Assertion, KnowledgeBase, Query};
use crate::models::{Expr, RankedInterpretation};

pub const MAX_ORACLE_DOMAIN: usize = 12;
pub const MAX_ORACLE_ATOMS: usize = 8;
pub const MAX_ORACLE_ROLES: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    /// No model within the bound falsifies the query.
    NoCountermodel,
    Countermodel(RankedInterpretation),
}

impl OracleVerdict {
    pub fn is_entailed(&self) -> bool {
        matches!(self, OracleVerdict::NoCountermodel)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CanonicalVerdict {
    Entailed,
    NotEntailed(RankedInterpretation),
    /// Realizing every consistent type needs more elements than the bound.
    NoCanonicalModel { types: usize },
}

enum CQuery {
    Strict(Expr, Expr),
    Typical(Expr, Expr),
    Member(usize, Expr),
    TypicalMember(usize, Expr),
    Edge(usize, usize, usize),
}

struct Problem {
    atoms: Vec<Name>,
    roles: Vec<Name>,
    individuals: Vec<Name>,
    strict: Vec<(Expr, Expr)>,
    defaults: Vec<(Expr, Expr)>,
    members: Vec<(usize, Expr)>,
    typical_members: Vec<(usize, Expr)>,
    edges: Vec<(usize, usize, usize)>,
    query: CQuery,
    role_concepts: Vec<Expr>,
    local: bool,
    masks: Vec<u64>,
}

type Visit<'a> = dyn FnMut(&mut RankedInterpretation) -> ControlFlow<()> + 'a;

impl Problem {
    fn new(kb: &KnowledgeBase, q: &Query, bound: usize) -> Result<Problem> {
        if bound > MAX_ORACLE_DOMAIN {
            return Err(Error::GuardExceeded { what: "oracle domain bound", size: bound, limit: MAX_ORACLE_DOMAIN });
        }
        let mut sig = signature(kb);
        sig.add_query(q);
        let atoms: Vec<Name> = sig.atoms.into_iter().collect();
        let roles: Vec<Name> = sig.roles.into_iter().collect();
        let individuals: Vec<Name> = sig.individuals.into_iter().collect();
        if atoms.len() > MAX_ORACLE_ATOMS {
            return Err(Error::GuardExceeded { what: "oracle atoms", size: atoms.len(), limit: MAX_ORACLE_ATOMS });
        }
        if roles.len() > MAX_ORACLE_ROLES {
            return Err(Error::GuardExceeded { what: "oracle roles", size: roles.len(), limit: MAX_ORACLE_ROLES });
        }
        let compile = |c: &Concept| Expr::compile(c, &atoms, &roles);
        let ind = |n: &Name| individuals.iter().position(|m| m == n).expect("individual in signature");
        let role = |n: &Name| roles.iter().position(|m| m == n).expect("role in signature");

        let mut strict = Vec::new();
        let mut defaults = Vec::new();
        for inc in kb.inclusions() {
            let pair = (compile(inc.antecedent())?, compile(&inc.right)?);
            if inc.is_defeasible() {
                defaults.push(pair);
            } else {
                strict.push(pair);
            }
        }
        let mut members = Vec::new();
        let mut typical_members = Vec::new();
        let mut edges = Vec::new();
        for a in kb.abox() {
            match a {
                Assertion::Concept { left: LeftConcept::Plain(c), individual } => {
                    members.push((ind(individual), compile(c)?))
                }
                Assertion::Concept { left: LeftConcept::Typical(c), individual } => {
                    typical_members.push((ind(individual), compile(c)?))
                }
                Assertion::Role { role: r, subject, object } => edges.push((role(r), ind(subject), ind(object))),
            }
        }
        let query = match q {
            Query::Inclusion { left: LeftConcept::Plain(c), right } => CQuery::Strict(compile(c)?, compile(right)?),
            Query::Inclusion { left: LeftConcept::Typical(c), right } => CQuery::Typical(compile(c)?, compile(right)?),
            Query::Assertion(Assertion::Concept { left: LeftConcept::Plain(c), individual }) => {
                CQuery::Member(ind(individual), compile(c)?)
            }
            Query::Assertion(Assertion::Concept { left: LeftConcept::Typical(c), individual }) => {
                CQuery::TypicalMember(ind(individual), compile(c)?)
            }
            Query::Assertion(Assertion::Role { role: r, subject, object }) => {
                CQuery::Edge(role(r), ind(subject), ind(object))
            }
        };

        let mut all: Vec<&Expr> = Vec::new();
        for (c, d) in strict.iter().chain(&defaults) {
            all.push(c);
            all.push(d);
        }
        all.extend(members.iter().chain(&typical_members).map(|(_, e)| e));
        match &query {
            CQuery::Strict(c, d) | CQuery::Typical(c, d) => all.extend([c, d]),
            CQuery::Member(_, e) | CQuery::TypicalMember(_, e) => all.push(e),
            CQuery::Edge(..) => {}
        }
        let mut restrictions = Vec::new();
        for e in &all {
            e.role_restrictions(&mut restrictions);
        }
        let local = !matches!(query, CQuery::Edge(..))
            && restrictions.iter().all(|r| match r {
                Expr::Exists(_, f) | Expr::Forall(_, f) => f.role_free(),
                _ => true,
            });
        let mut role_concepts: Vec<Expr> = Vec::new();
        for r in restrictions {
            if !role_concepts.contains(r) {
                role_concepts.push(r.clone());
            }
        }
        let role_free_strict: Vec<&(Expr, Expr)> =
            strict.iter().filter(|(c, d)| c.role_free() && d.role_free()).collect();
        let masks = (0..1u64 << atoms.len())
            .filter(|&m| role_free_strict.iter().all(|(c, d)| !c.eval_local(m, &[]) || d.eval_local(m, &[])))
            .collect();
        Ok(Problem {
            atoms,
            roles,
            individuals,
            strict,
            defaults,
            members,
            typical_members,
            edges,
            query,
            role_concepts,
            local,
            masks,
        })
    }

    fn for_each_structure(&self, sizes: std::ops::RangeInclusive<usize>, f: &mut Visit<'_>) -> ControlFlow<()> {
        for n in sizes {
            let mut seq = Vec::with_capacity(n);
            self.masks_rec(n, 0, &mut seq, f)?;
        }
        ControlFlow::Continue(())
    }

    fn masks_rec(&self, n: usize, start: usize, seq: &mut Vec<u64>, f: &mut Visit<'_>) -> ControlFlow<()> {
        if seq.len() == n {
            return self.with_individuals(seq, f);
        }
        for i in start..self.masks.len() {
            seq.push(self.masks[i]);
            self.masks_rec(n, i, seq, f)?;
            seq.pop();
        }
        ControlFlow::Continue(())
    }

    fn with_individuals(&self, masks: &[u64], f: &mut Visit<'_>) -> ControlFlow<()> {
        let n = masks.len();
        let k = self.individuals.len();
        let mut map = vec![0usize; k];
        loop {
            let plausible = self
                .members
                .iter()
                .all(|(a, e)| !e.role_free() || e.eval_local(masks[map[*a]], &[]));
            if plausible {
                if self.local {
                    self.local_roles(masks, &map, f)?;
                } else {
                    self.full_roles(masks, &map, f)?;
                }
            }
            let mut i = 0;
            while i < k {
                map[i] += 1;
                if map[i] < n {
                    break;
                }
                map[i] = 0;
                i += 1;
            }
            if i == k {
                return ControlFlow::Continue(());
            }
        }
    }

    fn skeleton(&self, masks: &[u64], map: &[usize]) -> RankedInterpretation {
        let n = masks.len();
        let mut m = RankedInterpretation::with_vocabulary(n, &self.atoms, &self.roles);
        for (x, &mask) in masks.iter().enumerate() {
            for (i, ext) in m.atom_ext.iter_mut().enumerate() {
                if mask >> i & 1 == 1 {
                    *ext |= 1 << x;
                }
            }
        }
        for (a, &x) in self.individuals.iter().zip(map) {
            m.individuals.insert(a.clone(), x);
        }
        m
    }

    /// Edge choices per element, one representative per valuation of the
    /// role restrictions, filtered by the element-local axioms.
    fn local_roles(&self, masks: &[u64], map: &[usize], f: &mut Visit<'_>) -> ControlFlow<()> {
        let n = masks.len();
        let mut present: Vec<u64> = masks.to_vec();
        present.dedup();
        let mut choices: Vec<Vec<Vec<Vec<u64>>>> = Vec::with_capacity(n);
        for x in 0..n {
            let mut required = vec![Vec::new(); self.roles.len()];
            for &(r, a, b) in &self.edges {
                if map[a] == x {
                    required[r].push(masks[map[b]]);
                }
            }
            let here: Vec<&Expr> = self
                .members
                .iter()
                .filter(|(a, _)| map[*a] == x)
                .map(|(_, e)| e)
                .collect();
            let mut seen = HashSet::new();
            let mut options = Vec::new();
            let mut per_role: Vec<Vec<u64>> = vec![Vec::new(); self.roles.len()];
            self.role_subsets(0, &present, &required, &mut per_role, &mut |succ| {
                let mask = masks[x];
                let ok = self.strict.iter().all(|(c, d)| !c.eval_local(mask, succ) || d.eval_local(mask, succ))
                    && here.iter().all(|e| e.eval_local(mask, succ));
                if ok {
                    let key: Vec<bool> = self.role_concepts.iter().map(|e| e.eval_local(mask, succ)).collect();
                    if seen.insert(key) {
                        options.push(succ.to_vec());
                    }
                }
            });
            if options.is_empty() {
                return ControlFlow::Continue(());
            }
            choices.push(options);
        }
        // Elements agreeing on mask and named individuals are interchangeable.
        let ids: Vec<(u64, Vec<usize>)> = (0..n)
            .map(|x| (masks[x], (0..map.len()).filter(|&a| map[a] == x).collect()))
            .collect();
        let twin: Vec<Option<usize>> = (0..n).map(|x| (0..x).rev().find(|&y| ids[y] == ids[x])).collect();
        let mut picked = vec![0usize; n];
        self.product(0, masks, map, &choices, &twin, &mut picked, f)
    }

    fn role_subsets(
        &self,
        r: usize,
        present: &[u64],
        required: &[Vec<u64>],
        acc: &mut Vec<Vec<u64>>,
        emit: &mut dyn FnMut(&[Vec<u64>]),
    ) {
        if r == self.roles.len() {
            emit(acc);
            return;
        }
        for bits in 0..1u64 << present.len() {
            let chosen: Vec<u64> = present
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .map(|(_, &m)| m)
                .collect();
            if required[r].iter().all(|m| chosen.contains(m)) {
                acc[r] = chosen;
                self.role_subsets(r + 1, present, required, acc, emit);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn product(
        &self,
        x: usize,
        masks: &[u64],
        map: &[usize],
        choices: &[Vec<Vec<Vec<u64>>>],
        twin: &[Option<usize>],
        picked: &mut Vec<usize>,
        f: &mut Visit<'_>,
    ) -> ControlFlow<()> {
        let n = masks.len();
        if x == n {
            let mut m = self.skeleton(masks, map);
            for y in 0..n {
                for (r, succ_masks) in choices[y][picked[y]].iter().enumerate() {
                    m.role_succ[r][y] = (0..n).filter(|&z| succ_masks.contains(&masks[z])).fold(0, |a, z| a | 1 << z);
                }
            }
            if self.structure_ok(&m) {
                return f(&mut m);
            }
            return ControlFlow::Continue(());
        }
        let from = twin[x].map_or(0, |y| picked[y]);
        for c in from..choices[x].len() {
            picked[x] = c;
            self.product(x + 1, masks, map, choices, twin, picked, f)?;
        }
        ControlFlow::Continue(())
    }

    /// Every edge set for every element and role; used when fillers nest
    /// roles or the query asks for a specific edge.
    fn full_roles(&self, masks: &[u64], map: &[usize], f: &mut Visit<'_>) -> ControlFlow<()> {
        let n = masks.len();
        let slots = n * self.roles.len();
        let base = self.skeleton(masks, map);
        let mut required = vec![0u64; slots];
        for &(r, a, b) in &self.edges {
            required[r * n + map[a]] |= 1 << map[b];
        }
        let mut current = required.clone();
        loop {
            let mut m = base.clone();
            for r in 0..self.roles.len() {
                m.role_succ[r].copy_from_slice(&current[r * n..(r + 1) * n]);
            }
            if self.structure_ok(&m) {
                f(&mut m)?;
            }
            // Next edge assignment: odometer over supersets of the required edges.
            let full = (1u64 << n) - 1;
            let mut i = 0;
            while i < slots {
                let free = full & !required[i];
                let next = ((current[i] | !free).wrapping_add(1) & free) | required[i];
                if next != required[i] {
                    current[i] = next;
                    break;
                }
                current[i] = required[i];
                i += 1;
            }
            if i == slots {
                return ControlFlow::Continue(());
            }
        }
    }

    fn structure_ok(&self, m: &RankedInterpretation) -> bool {
        self.strict.iter().all(|(c, d)| m.eval(c) & !m.eval(d) == 0)
            && self.members.iter().all(|(a, e)| m.eval(e) >> self.element(m, *a) & 1 == 1)
            && self
                .edges
                .iter()
                .all(|&(r, a, b)| m.role_succ[r][self.element(m, a)] >> self.element(m, b) & 1 == 1)
    }

    fn element(&self, m: &RankedInterpretation, a: usize) -> usize {
        m.individuals[&self.individuals[a]]
    }

    fn default_exts(&self, m: &RankedInterpretation) -> Vec<(u64, u64)> {
        self.defaults.iter().map(|(c, d)| (m.eval(c), m.eval(d))).collect()
    }

    fn ranks_valid(&self, m: &RankedInterpretation, dext: &[(u64, u64)], texts: &[(usize, u64)]) -> bool {
        dext.iter().all(|&(c, d)| m.minimal_mask(c) & !d == 0)
            && texts.iter().all(|&(x, c)| m.minimal_mask(c) >> x & 1 == 1)
    }

    fn typical_exts(&self, m: &RankedInterpretation) -> Vec<(usize, u64)> {
        self.typical_members.iter().map(|(a, e)| (self.element(m, *a), m.eval(e))).collect()
    }

    /// The least rank vector satisfying the typicality inclusions.
    fn least_ranking(&self, m: &RankedInterpretation, dext: &[(u64, u64)]) -> Option<Vec<u32>> {
        let n = m.size;
        let mut r = vec![0u32; n];
        loop {
            let mut changed = false;
            for &(c, d) in dext {
                let Some(low) = (0..n).filter(|&x| c >> x & 1 == 1).map(|x| r[x]).min() else {
                    continue;
                };
                for y in (0..n).filter(|&y| c >> y & 1 == 1 && d >> y & 1 == 0) {
                    if r[y] <= low {
                        r[y] = low + 1;
                        changed = true;
                        if r[y] as usize >= n {
                            return None;
                        }
                    }
                }
            }
            if !changed {
                return Some(r);
            }
        }
    }

    /// Every normalized rank vector that makes `m` a model of the KB.
    fn for_each_ranking(&self, m: &mut RankedInterpretation, f: &mut Visit<'_>) -> ControlFlow<()> {
        let dext = self.default_exts(m);
        let texts = self.typical_exts(m);
        let n = m.size;
        let mut r = vec![0u32; n];
        loop {
            let max = r.iter().copied().max().unwrap_or(0);
            if (0..=max).all(|l| r.contains(&l)) {
                m.ranks.copy_from_slice(&r);
                if self.ranks_valid(m, &dext, &texts) {
                    f(m)?;
                }
            }
            let mut i = 0;
            while i < n {
                r[i] += 1;
                if (r[i] as usize) < n {
                    break;
                }
                r[i] = 0;
                i += 1;
            }
            if i == n {
                return ControlFlow::Continue(());
            }
        }
    }

    /// Some rank vector making `m` a model, if any.
    fn admits(&self, m: &mut RankedInterpretation) -> Option<Vec<u32>> {
        if self.typical_members.is_empty() {
            return self.least_ranking(m, &self.default_exts(m));
        }
        let mut found = None;
        let _ = self.for_each_ranking(m, &mut |mm| {
            found = Some(mm.ranks.clone());
            ControlFlow::Break(())
        });
        found
    }

    /// The pointwise-minimal rank vectors making `m` a model.
    fn minimal_rankings(&self, m: &mut RankedInterpretation) -> Vec<Vec<u32>> {
        if self.typical_members.is_empty() {
            return self.least_ranking(m, &self.default_exts(m)).into_iter().collect();
        }
        let mut all = Vec::new();
        let _ = self.for_each_ranking(m, &mut |mm| {
            all.push(mm.ranks.clone());
            ControlFlow::Continue(())
        });
        pointwise_minimal(&all)
    }

    fn query_uses_ranks(&self) -> bool {
        matches!(self.query, CQuery::Typical(..) | CQuery::TypicalMember(..))
    }

    fn query_holds(&self, m: &RankedInterpretation) -> bool {
        match &self.query {
            CQuery::Strict(c, d) => m.eval(c) & !m.eval(d) == 0,
            CQuery::Typical(c, d) => m.minimal_mask(m.eval(c)) & !m.eval(d) == 0,
            CQuery::Member(a, e) => m.eval(e) >> self.element(m, *a) & 1 == 1,
            CQuery::TypicalMember(a, e) => m.minimal_mask(m.eval(e)) >> self.element(m, *a) & 1 == 1,
            CQuery::Edge(r, a, b) => m.role_succ[*r][self.element(m, *a)] >> self.element(m, *b) & 1 == 1,
        }
    }
}

fn pointwise_minimal(vectors: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let below = |a: &Vec<u32>, b: &Vec<u32>| a != b && a.iter().zip(b).all(|(x, y)| x <= y);
    vectors
        .iter()
        .filter(|v| !vectors.iter().any(|w| below(w, v)))
        .cloned()
        .collect()
}

/// Searches every ranked model of `kb` with at most `bound` elements for
/// one falsifying `q`.
pub fn oracle_entails(kb: &KnowledgeBase, q: &Query, bound: usize) -> Result<OracleVerdict> {
    let p = Problem::new(kb, q, bound)?;
    let mut counter = None;
    let _ = p.for_each_structure(1..=bound, &mut |m| {
        if p.query_uses_ranks() {
            p.for_each_ranking(m, &mut |mm| {
                if p.query_holds(mm) {
                    ControlFlow::Continue(())
                } else {
                    counter = Some(mm.clone());
                    ControlFlow::Break(())
                }
            })
        } else if p.query_holds(m) {
            ControlFlow::Continue(())
        } else if let Some(r) = p.admits(m) {
            m.ranks.copy_from_slice(&r);
            counter = Some(m.clone());
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    Ok(match counter {
        Some(m) => OracleVerdict::Countermodel(m),
        None => OracleVerdict::NoCountermodel,
    })
}

/// Entailment in the minimal canonical models of `kb` within `bound`.
///
/// Types are valuations of the concepts occurring in `kb` and `q`. A type
/// is consistent when some model within the bound realizes it; canonical
/// models realize every consistent type. Among canonical models, those with
/// a pointwise-minimal rank vector for their structure are kept, and then
/// those whose individuals' ranks are pointwise minimal.
pub fn oracle_min_canonical_entails(kb: &KnowledgeBase, q: &Query, bound: usize) -> Result<CanonicalVerdict> {
    let p = Problem::new(kb, q, bound)?;
    let mut relevant: BTreeSet<Concept> = kb.top_level_concepts().into_iter().map(canonical_form).collect();
    relevant.extend(q.concepts().into_iter().map(canonical_form));
    if relevant.len() > 64 {
        return Err(Error::GuardExceeded { what: "oracle relevant concepts", size: relevant.len(), limit: 64 });
    }
    let relevant: Vec<Expr> = relevant
        .iter()
        .map(|c| Expr::compile(c, &p.atoms, &p.roles))
        .collect::<Result<_>>()?;
    let types_of = |m: &RankedInterpretation| -> BTreeSet<u64> {
        let exts: Vec<u64> = relevant.iter().map(|e| m.eval(e)).collect();
        (0..m.size)
            .map(|x| exts.iter().enumerate().fold(0u64, |t, (i, ext)| t | (ext >> x & 1) << i))
            .collect()
    };
    let ceiling: Option<BTreeSet<u64>> = (p.roles.is_empty()).then(|| {
        p.masks
            .iter()
            .map(|&mask| relevant.iter().enumerate().fold(0u64, |t, (i, e)| t | (e.eval_local(mask, &[]) as u64) << i))
            .collect()
    });

    let mut consistent: BTreeSet<u64> = BTreeSet::new();
    let mut overflow = false;
    let _ = p.for_each_structure(1..=bound, &mut |m| {
        if p.admits(m).is_none() {
            return ControlFlow::Continue(());
        }
        consistent.extend(types_of(m));
        if consistent.len() > bound {
            overflow = true;
            return ControlFlow::Break(());
        }
        if ceiling.as_ref() == Some(&consistent) {
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    });
    if overflow {
        return Ok(CanonicalVerdict::NoCanonicalModel { types: consistent.len() });
    }
    if consistent.is_empty() {
        return Ok(CanonicalVerdict::Entailed);
    }

    // Individual rank vector -> (query holds in all such models, a countermodel).
    let mut outcomes: BTreeMap<Vec<u32>, (bool, Option<RankedInterpretation>)> = BTreeMap::new();
    let _ = p.for_each_structure(consistent.len()..=bound, &mut |m| {
        if types_of(m) != consistent {
            return ControlFlow::Continue(());
        }
        for ranks in p.minimal_rankings(m) {
            m.ranks.copy_from_slice(&ranks);
            let key: Vec<u32> = p.individuals.iter().map(|a| m.ranks[m.individuals[a]]).collect();
            let holds = p.query_holds(m);
            let entry = outcomes.entry(key).or_insert((true, None));
            if !holds && entry.0 {
                *entry = (false, Some(m.clone()));
            }
        }
        ControlFlow::Continue(())
    });
    if outcomes.is_empty() {
        return Ok(CanonicalVerdict::NoCanonicalModel { types: consistent.len() });
    }
    let keys: Vec<Vec<u32>> = outcomes.keys().cloned().collect();
    for key in pointwise_minimal(&keys) {
        if let (false, Some(m)) = &outcomes[&key] {
            return Ok(CanonicalVerdict::NotEntailed(m.clone()));
        }
    }
    Ok(CanonicalVerdict::Entailed)
}
