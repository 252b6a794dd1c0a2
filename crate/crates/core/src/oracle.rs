//! Positional model of products used to cross-check the multiset engine.
//!
//! Products here are explicit sequences, the Leibniz rule is a literal sum
//! over positions, and words are handled one unit differential at a time.
//! Nothing below calls into `calculus`.

use std::collections::HashMap;

use thiserror::Error;

use crate::rules::RuleSet;
use crate::terms::{Expression, Factor, LabelId, Letter, Monomial, OperatorWord, Product, Scalar};

pub const DEFAULT_SLOT_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("positional product has {len} slots, cap is {cap}")]
    SlotCapExceeded { len: usize, cap: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PositionedProduct {
    slots: Vec<Factor>,
    cap: usize,
}

impl PositionedProduct {
    pub fn new(slots: Vec<Factor>) -> Result<Self, OracleError> {
        PositionedProduct::with_cap(slots, DEFAULT_SLOT_CAP)
    }

    pub fn with_cap(slots: Vec<Factor>, cap: usize) -> Result<Self, OracleError> {
        if slots.len() > cap {
            return Err(OracleError::SlotCapExceeded {
                len: slots.len(),
                cap,
            });
        }
        Ok(PositionedProduct { slots, cap })
    }

    /// Lays out each factor as many times as its multiplicity.
    pub fn from_monomial(m: &Monomial) -> Result<Self, OracleError> {
        PositionedProduct::from_monomial_capped(m, DEFAULT_SLOT_CAP)
    }

    pub fn from_monomial_capped(m: &Monomial, cap: usize) -> Result<Self, OracleError> {
        let mut slots = Vec::new();
        for (f, k) in m.product.iter() {
            for _ in 0..k {
                slots.push(f.clone());
            }
        }
        PositionedProduct::with_cap(slots, cap)
    }

    /// The same factors in a different order; `order` must be a permutation of slot positions.
    pub fn rearranged(&self, order: &[usize]) -> PositionedProduct {
        PositionedProduct {
            slots: order.iter().map(|&i| self.slots[i].clone()).collect(),
            cap: self.cap,
        }
    }

    pub fn slots(&self) -> &[Factor] {
        &self.slots
    }
}

fn units(word: &OperatorWord) -> Vec<LabelId> {
    let mut out = Vec::new();
    for l in word.letters() {
        for _ in 0..l.order {
            out.push(l.label);
        }
    }
    out
}

fn runs(units: &[LabelId]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    for &u in units {
        match out.last_mut() {
            Some(last) if last.label == u => last.order += 1,
            _ => out.push(Letter::new(u, 1)),
        }
    }
    out
}

fn commutation(rules: &RuleSet, a: LabelId, b: LabelId) -> Option<Scalar> {
    let table = rules.commutations();
    if let Some(v) = table.get(&(a, b)) {
        return Some(v.clone());
    }
    table
        .get(&(b, a))
        .filter(|v| !v.is_zero())
        .map(|v| Scalar::one().checked_div(v).expect("nonzero"))
}

fn zero_adjacent(rules: &RuleSet, units: &[LabelId]) -> bool {
    units
        .windows(2)
        .any(|w| w[0] != w[1] && commutation(rules, w[0], w[1]).is_some_and(|a| a.is_zero()))
}

/// Bubble sort over unit differentials; `None` when the word is zero.
fn sort_units(rules: &RuleSet, word: &[LabelId]) -> Option<(Scalar, Vec<LabelId>)> {
    if zero_adjacent(rules, word) {
        return None;
    }
    let mut v = word.to_vec();
    let mut scalar = Scalar::one();
    let mut swapped = true;
    while swapped {
        swapped = false;
        for i in 0..v.len().saturating_sub(1) {
            if v[i] > v[i + 1] {
                match commutation(rules, v[i], v[i + 1]) {
                    Some(a) => scalar = &scalar * &a,
                    None => return Some((Scalar::one(), word.to_vec())),
                }
                v.swap(i, i + 1);
                swapped = true;
            }
        }
    }
    if scalar.is_zero() || zero_adjacent(rules, &v) {
        return None;
    }
    Some((scalar, v))
}

fn over_order(rules: &RuleSet, units: &[LabelId], atom: crate::terms::AtomId) -> bool {
    let rs = runs(units);
    for j in 0..rs.len() {
        let inner =
            OperatorWord::from_letters(rs[j + 1..].iter().copied()).expect("runs are positive");
        let bound = rules
            .max_order_of(rs[j].label, &Factor::new(inner, atom))
            .expect("labels come from the rule set");
        if bound.is_some_and(|p| rs[j].order >= p) {
            return true;
        }
    }
    false
}

fn to_factor(units: &[LabelId], atom: crate::terms::AtomId) -> Factor {
    Factor::new(
        OperatorWord::from_letters(runs(units)).expect("runs are positive"),
        atom,
    )
}

fn oracle_dead(rules: &RuleSet, f: &Factor) -> bool {
    let u = units(&f.word);
    if over_order(rules, &u, f.atom) {
        return true;
    }
    match sort_units(rules, &u) {
        None => true,
        Some((_, sorted)) => over_order(rules, &sorted, f.atom),
    }
}

/// One term per slot with that slot differentiated; zero terms are dropped, nothing is merged.
pub fn positional_expand(
    rules: &RuleSet,
    label: LabelId,
    p: &PositionedProduct,
) -> Result<Vec<(Scalar, PositionedProduct)>, OracleError> {
    if p.slots.len() > p.cap {
        return Err(OracleError::SlotCapExceeded {
            len: p.slots.len(),
            cap: p.cap,
        });
    }
    let mut out = Vec::new();
    for i in 0..p.slots.len() {
        let f = &p.slots[i];
        let mut u = vec![label];
        u.extend(units(&f.word));
        if over_order(rules, &u, f.atom) {
            continue;
        }
        let Some((s, sorted)) = sort_units(rules, &u) else {
            continue;
        };
        if over_order(rules, &sorted, f.atom) {
            continue;
        }
        let mut slots = p.slots.clone();
        slots[i] = to_factor(&sorted, f.atom);
        out.push((s, PositionedProduct { slots, cap: p.cap }));
    }
    Ok(out)
}

/// Counts positional terms by content and applies the vanishing rules.
pub fn collapse(rules: &RuleSet, terms: &[(Scalar, PositionedProduct)]) -> Expression {
    let mut by_content: HashMap<Vec<(Factor, u32)>, Scalar> = HashMap::new();
    for (s, p) in terms {
        let mut counts: HashMap<&Factor, u32> = HashMap::new();
        for f in &p.slots {
            *counts.entry(f).or_insert(0) += 1;
        }
        let mut key: Vec<(Factor, u32)> = counts.into_iter().map(|(f, k)| (f.clone(), k)).collect();
        key.sort();
        let entry = by_content.entry(key).or_default();
        *entry = &*entry + s;
    }
    let mut e = Expression::zero(rules.complex().clone());
    for (key, s) in by_content {
        let slots = expand_key(&key);
        let cap = slots.len();
        if positional_vanishes(rules, &PositionedProduct { slots, cap }) {
            continue;
        }
        e.add_term(Product::from_factors(key), s);
    }
    e
}

fn expand_key(key: &[(Factor, u32)]) -> Vec<Factor> {
    key.iter()
        .flat_map(|(f, k)| std::iter::repeat_n(f.clone(), *k as usize))
        .collect()
}

/// Vanishing decided directly on positions: dead slots, repeated slots
/// reaching a maximal power, or an injection of an ideal's members into slots.
pub fn positional_vanishes(rules: &RuleSet, p: &PositionedProduct) -> bool {
    if p.slots.iter().any(|f| oracle_dead(rules, f)) {
        return true;
    }
    for f in &p.slots {
        let copies = p.slots.iter().filter(|g| *g == f).count() as u32;
        if rules.max_power_of(f).is_some_and(|q| copies >= q) {
            return true;
        }
    }
    rules.ideals().iter().any(|ideal| {
        let mut used = vec![false; p.slots.len()];
        inject(ideal.members(), &p.slots, &mut used)
    })
}

fn inject(members: &[crate::rules::FactorPattern], slots: &[Factor], used: &mut [bool]) -> bool {
    let Some((first, rest)) = members.split_first() else {
        return true;
    };
    for i in 0..slots.len() {
        if !used[i] && first.matches(&slots[i]) {
            used[i] = true;
            let ok = inject(rest, slots, used);
            used[i] = false;
            if ok {
                return true;
            }
        }
    }
    false
}
