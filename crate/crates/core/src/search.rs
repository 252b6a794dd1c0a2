//! Bounded enumeration of candidate products and parallel closure search.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::calculus::{is_closed, CalculusError, ClosureVerdict, Mode};
use crate::rules::{Condition, FactorPattern, RuleSet};
use crate::terms::{
    normalize_word, AtomId, Factor, LabelId, Letter, Monomial, OperatorWord, Product,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("search bound `{0}` must be at least 1")]
    ZeroBound(&'static str),
    #[error("search needs at least one {0}")]
    EmptySubset(&'static str),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBounds {
    pub max_distinct_factors: usize,
    pub max_word_length: usize,
    pub max_order_per_letter: u32,
    pub max_multiplicity: u32,
    pub atoms: Vec<AtomId>,
    pub labels: Vec<LabelId>,
}

impl SearchBounds {
    pub fn new(
        max_distinct_factors: usize,
        max_word_length: usize,
        max_order_per_letter: u32,
        max_multiplicity: u32,
        atoms: Vec<AtomId>,
        labels: Vec<LabelId>,
    ) -> Result<Self, SearchError> {
        let b = SearchBounds {
            max_distinct_factors,
            max_word_length,
            max_order_per_letter,
            max_multiplicity,
            atoms,
            labels,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.max_distinct_factors == 0 {
            return Err(SearchError::ZeroBound("factors"));
        }
        if self.max_word_length == 0 {
            return Err(SearchError::ZeroBound("word"));
        }
        if self.max_order_per_letter == 0 {
            return Err(SearchError::ZeroBound("order"));
        }
        if self.max_multiplicity == 0 {
            return Err(SearchError::ZeroBound("mult"));
        }
        if self.atoms.is_empty() {
            return Err(SearchError::EmptySubset("atom"));
        }
        if self.labels.is_empty() {
            return Err(SearchError::EmptySubset("label"));
        }
        Ok(())
    }
}

fn words(labels: &[LabelId], max_len: usize, max_order: u32) -> Vec<OperatorWord> {
    let mut out = vec![OperatorWord::empty()];
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &l in labels {
                if w.last().is_some_and(|x| x.label == l) {
                    continue;
                }
                for r in 1..=max_order {
                    let mut v = w.clone();
                    v.push(Letter::new(l, r));
                    next.push(v);
                }
            }
        }
        out.extend(
            next.iter().map(|v| {
                OperatorWord::from_letters(v.iter().copied()).expect("orders are positive")
            }),
        );
        layer = next;
    }
    out
}

/// Nonzero factors in normal form within the bounds, ascending.
pub fn candidate_factors(rules: &RuleSet, bounds: &SearchBounds) -> Vec<Factor> {
    let ws = words(
        &bounds.labels,
        bounds.max_word_length,
        bounds.max_order_per_letter,
    );
    let mut out = Vec::new();
    for &a in &bounds.atoms {
        for w in &ws {
            let (s, n) = normalize_word(w, rules);
            if s.is_zero() || n != *w {
                continue;
            }
            let f = Factor::new(w.clone(), a);
            if !rules.factor_is_zero(&f) {
                out.push(f);
            }
        }
    }
    out.sort();
    out
}

/// Every nonvanishing product within the bounds, coefficient 1, ascending.
pub fn enumerate_candidates(
    rules: &RuleSet,
    bounds: &SearchBounds,
) -> Result<Vec<Monomial>, SearchError> {
    bounds.validate()?;
    let factors = candidate_factors(rules, bounds);
    let mut out = Vec::new();
    let mut chosen: Vec<(Factor, u32)> = Vec::new();
    grow(rules, bounds, &factors, 0, &mut chosen, &mut out);
    out.sort_by(|a: &Monomial, b| a.product.cmp(&b.product));
    Ok(out)
}

fn grow(
    rules: &RuleSet,
    bounds: &SearchBounds,
    factors: &[Factor],
    start: usize,
    chosen: &mut Vec<(Factor, u32)>,
    out: &mut Vec<Monomial>,
) {
    if chosen.len() == bounds.max_distinct_factors {
        return;
    }
    for i in start..factors.len() {
        for k in 1..=bounds.max_multiplicity {
            chosen.push((factors[i].clone(), k));
            let p = Product::from_factors(chosen.iter().cloned());
            // Vanishing is monotone, so no extension of `p` can be live either.
            let live = rules.product_vanishes(&p).is_none();
            if live {
                out.push(Monomial::unit(p));
                grow(rules, bounds, factors, i + 1, chosen, out);
            }
            chosen.pop();
            if !live {
                break;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub monomial: Monomial,
    /// Verdict for every label searched, in the order given.
    pub verdicts: Vec<(LabelId, ClosureVerdict)>,
    pub closed_under: Vec<LabelId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Catalog {
    pub entries: Vec<CatalogEntry>,
    pub bounds: SearchBounds,
    pub labels: Vec<LabelId>,
    pub mode: Mode,
    pub ruleset_fingerprint: String,
}

/// Checks every candidate under every label and keeps the ones closed under at least one.
///
/// `workers == 0` uses the default thread count. The result does not depend on it.
pub fn search_closed(
    rules: &RuleSet,
    bounds: &SearchBounds,
    labels: &[LabelId],
    mode: Mode,
    workers: usize,
) -> Result<Catalog, SearchError> {
    bounds.validate()?;
    if labels.is_empty() {
        return Err(SearchError::EmptySubset("label"));
    }
    for &l in labels {
        rules
            .complex()
            .check_label(l)
            .map_err(CalculusError::from)?;
    }
    let candidates = enumerate_candidates(rules, bounds)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SearchError::Pool(e.to_string()))?;
    let checked: Vec<Result<Option<CatalogEntry>, CalculusError>> = pool.install(|| {
        candidates
            .par_iter()
            .map(|m| {
                let mut verdicts = Vec::with_capacity(labels.len());
                for &l in labels {
                    verdicts.push((l, is_closed(rules, l, m, mode)?));
                }
                let closed_under: Vec<LabelId> = verdicts
                    .iter()
                    .filter(|(_, v)| v.closed)
                    .map(|(l, _)| *l)
                    .collect();
                Ok((!closed_under.is_empty()).then(|| CatalogEntry {
                    monomial: m.clone(),
                    verdicts,
                    closed_under,
                }))
            })
            .collect()
    });
    let mut entries = Vec::new();
    for c in checked {
        if let Some(e) = c? {
            entries.push(e);
        }
    }
    Ok(Catalog {
        entries,
        bounds: bounds.clone(),
        labels: labels.to_vec(),
        mode,
        ruleset_fingerprint: rules.fingerprint(),
    })
}

fn rename_factor(f: &Factor, perm: &[AtomId]) -> Factor {
    Factor::new(f.word.clone(), perm[f.atom.0 as usize])
}

fn rename_product(p: &Product, perm: &[AtomId]) -> Product {
    Product::from_factors(p.iter().map(|(f, k)| (rename_factor(f, perm), k)))
}

fn rename_pattern(p: &FactorPattern, perm: &[AtomId]) -> FactorPattern {
    FactorPattern {
        atom: p.atom.map(|a| perm[a.0 as usize]),
        word: p.word.clone(),
    }
}

type Signature = (
    Vec<(LabelId, FactorPattern, u32)>,
    Vec<(FactorPattern, u32)>,
    Vec<Vec<FactorPattern>>,
    Vec<(Factor, Vec<(Product, String)>)>,
);

fn signature(rules: &RuleSet, perm: &[AtomId]) -> Signature {
    let mut orders: Vec<_> = rules
        .max_order_rules()
        .iter()
        .map(|r| (r.label, rename_pattern(&r.pattern, perm), r.bound))
        .collect();
    orders.sort();
    let mut powers: Vec<_> = rules
        .max_power_rules()
        .iter()
        .map(|r| (rename_pattern(&r.pattern, perm), r.bound))
        .collect();
    powers.sort();
    let mut ideals: Vec<Vec<FactorPattern>> = rules
        .ideals()
        .iter()
        .map(|i| {
            let mut m: Vec<_> = i
                .members()
                .iter()
                .map(|p| rename_pattern(p, perm))
                .collect();
            m.sort();
            m
        })
        .collect();
    ideals.sort();
    let mut conds: Vec<_> = rules
        .conditions()
        .iter()
        .map(|c: &Condition| rename_condition(c, perm))
        .collect();
    conds.sort();
    (orders, powers, ideals, conds)
}

fn rename_condition(c: &Condition, perm: &[AtomId]) -> (Factor, Vec<(Product, String)>) {
    let mut rhs: Vec<(Product, String)> = c
        .rhs
        .terms()
        .map(|(p, s)| (rename_product(p, perm), s.to_string()))
        .collect();
    rhs.sort();
    (rename_factor(&c.lhs, perm), rhs)
}

/// Atom permutations that fix base indices and every rule.
pub fn atom_symmetries(rules: &RuleSet) -> Vec<Vec<AtomId>> {
    let complex = rules.complex();
    let n = complex.atoms().len();
    let identity: Vec<AtomId> = complex.atom_ids().collect();
    // Beyond this the permutation group is too large to list; only the identity is used.
    if n > 8 {
        return vec![identity];
    }
    let base = signature(rules, &identity);
    let mut out = Vec::new();
    let mut perm = identity.clone();
    permute(&mut perm, 0, &mut |p| {
        let same_index = p
            .iter()
            .enumerate()
            .all(|(i, a)| complex.atoms()[i].base_index == complex.atom(*a).base_index);
        if same_index && signature(rules, p) == base {
            out.push(p.to_vec());
        }
    });
    out.sort();
    out
}

fn permute(v: &mut Vec<AtomId>, k: usize, visit: &mut dyn FnMut(&[AtomId])) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, visit);
        v.swap(k, i);
    }
}

/// Merges entries that differ only by a rule-preserving renaming of atoms,
/// keeping the smallest product of each orbit.
pub fn dedup_by_symmetry(rules: &RuleSet, catalog: &Catalog) -> Catalog {
    let group = atom_symmetries(rules);
    let mut seen: HashSet<Product> = HashSet::new();
    let mut by_product: BTreeMap<Product, &CatalogEntry> = BTreeMap::new();
    for e in &catalog.entries {
        by_product.insert(e.monomial.product.clone(), e);
    }
    let mut entries = Vec::new();
    for (p, e) in by_product {
        let key = group
            .iter()
            .map(|perm| rename_product(&p, perm))
            .min()
            .expect("group contains the identity");
        if seen.insert(key) {
            entries.push(e.clone());
        }
    }
    Catalog {
        entries,
        ..catalog.clone()
    }
}
