//! Leibniz differentiation, identities derived from vanishing seeds,
//! hierarchies, closure checks and condition saturation.

mod saturate;
mod transfer;

pub use saturate::{saturate_conditions, IndexCoherence, Relation};
pub use transfer::transfer_cancel;

use std::collections::HashSet;

use thiserror::Error;

use crate::rules::{RuleError, RuleSet};
use crate::terms::{
    normalize_word, Expression, Factor, LabelId, Monomial, Product, Scalar, TermError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalculusError {
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("seed product does not vanish, so its derivative is not known to be zero")]
    SeedNotVanishing,
    #[error("product vanishes and cannot be a closure candidate")]
    SeedVanishes,
    #[error("rule set declares no conditions")]
    NoConditions,
}

impl From<TermError> for CalculusError {
    fn from(e: TermError) -> Self {
        CalculusError::Rule(e.into())
    }
}

/// `d_label f` in normal form with the scalar from reordering, or `None` if it is zero.
pub fn apply_letter(rules: &RuleSet, label: LabelId, f: &Factor) -> Option<(Scalar, Factor)> {
    let raw = Factor::new(f.word.prepend(label), f.atom);
    if rules.factor_is_zero(&raw) {
        return None;
    }
    let (s, word) = normalize_word(&raw.word, rules);
    Some((s, Factor::new(word, f.atom)))
}

/// Leibniz expansion without any reduction.
fn expand_into(
    rules: &RuleSet,
    label: LabelId,
    product: &Product,
    coeff: &Scalar,
    out: &mut Expression,
) {
    for (f, m) in product.iter() {
        if let Some((s, df)) = apply_letter(rules, label, f) {
            let c = &(coeff * &Scalar::from_int(i64::from(m))) * &s;
            out.add_term(product.replace_one(f, df), c);
        }
    }
}

/// Applies `d_label` to every term by the Leibniz rule and reduces.
pub fn differentiate(
    rules: &RuleSet,
    label: LabelId,
    e: &Expression,
) -> Result<Expression, CalculusError> {
    rules.complex().check_label(label)?;
    let mut out = Expression::zero(e.complex().clone());
    for (p, c) in e.terms() {
        expand_into(rules, label, p, c, &mut out);
    }
    Ok(rules.reduce(&out))
}

/// An expression known to equal zero, with how it was obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Identity {
    pub expression: Expression,
    pub seed: Monomial,
    /// Labels in the order they were applied to the seed.
    pub applied: Vec<LabelId>,
    pub depth: usize,
}

/// Differentiates a vanishing product formally, reducing only the summands.
pub fn derive_identity(
    rules: &RuleSet,
    label: LabelId,
    seed: &Monomial,
) -> Result<Option<Identity>, CalculusError> {
    rules.complex().check_label(label)?;
    if !rules.vanishes(seed).vanishes() {
        return Err(CalculusError::SeedNotVanishing);
    }
    let e = Expression::from_monomial(rules.complex().clone(), seed.clone());
    let expression = differentiate(rules, label, &e)?;
    if expression.is_zero() {
        return Ok(None);
    }
    Ok(Some(Identity {
        expression,
        seed: seed.clone(),
        applied: vec![label],
        depth: 1,
    }))
}

fn scaling_key(e: &Expression) -> Vec<(Product, Scalar)> {
    e.monic()
        .terms()
        .map(|(p, c)| (p.clone(), c.clone()))
        .collect()
}

/// Breadth-first tree of identities from a vanishing seed.
///
/// Each layer applies every label, in the given order, to every identity of
/// the previous layer. Results equal up to a scalar multiple are kept once.
pub fn hierarchy(
    rules: &RuleSet,
    seed: &Monomial,
    labels: &[LabelId],
    depth: usize,
) -> Result<Vec<Identity>, CalculusError> {
    for &l in labels {
        rules.complex().check_label(l)?;
    }
    if !rules.vanishes(seed).vanishes() {
        return Err(CalculusError::SeedNotVanishing);
    }
    let mut seen = HashSet::new();
    let mut out: Vec<Identity> = Vec::new();
    let mut frontier: Vec<Identity> = Vec::new();
    for &l in labels {
        if let Some(id) = derive_identity(rules, l, seed)? {
            if seen.insert(scaling_key(&id.expression)) {
                frontier.push(id);
            }
        }
    }
    let mut level = 1;
    while !frontier.is_empty() {
        out.extend(frontier.iter().cloned());
        if level >= depth {
            break;
        }
        let mut next = Vec::new();
        for parent in &frontier {
            for &l in labels {
                let expression = differentiate(rules, l, &parent.expression)?;
                if expression.is_zero() || !seen.insert(scaling_key(&expression)) {
                    continue;
                }
                let mut applied = parent.applied.clone();
                applied.push(l);
                next.push(Identity {
                    expression,
                    seed: seed.clone(),
                    applied,
                    depth: level + 1,
                });
            }
        }
        frontier = next;
        level += 1;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Plain,
    /// Also cancels terms related by identities from vanishing products.
    Transfer,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureVerdict {
    pub closed: bool,
    pub mode: Mode,
    /// Surviving terms of the expansion; zero exactly when closed.
    pub witness: Expression,
}

pub fn is_closed(
    rules: &RuleSet,
    label: LabelId,
    m: &Monomial,
    mode: Mode,
) -> Result<ClosureVerdict, CalculusError> {
    if rules.vanishes(m).vanishes() {
        return Err(CalculusError::SeedVanishes);
    }
    let e = Expression::from_monomial(rules.complex().clone(), m.clone());
    let mut witness = differentiate(rules, label, &e)?;
    if mode == Mode::Transfer && !witness.is_zero() {
        witness = transfer_cancel(rules, &witness);
    }
    Ok(ClosureVerdict {
        closed: witness.is_zero(),
        mode,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specdsl::{parse_expr, parse_spec};

    const BASE: &str = "slots 2; diff e up 2 down 2; diff d up 1 down 1;
        atom phi; atom psi; atom chi;";

    fn rules(extra: &str) -> RuleSet {
        parse_spec(&format!("{BASE}{extra}")).unwrap()
    }

    fn mono(r: &RuleSet, s: &str) -> Monomial {
        let e = parse_expr(r, s).unwrap();
        assert_eq!(e.len(), 1);
        e.monomials().remove(0)
    }

    fn d_of(r: &RuleSet, label: &str, s: &str) -> String {
        let l = r.complex().label_id(label).unwrap();
        differentiate(r, l, &parse_expr(r, s).unwrap())
            .unwrap()
            .to_string()
    }

    #[test]
    fn power_rule_collapses_placements() {
        let r = rules("");
        assert_eq!(d_of(&r, "d", "{phi^3}"), "3*{[d]phi, phi^2}");
    }

    #[test]
    fn max_order_kills_merged_letter() {
        let r = rules("maxorder d on [*]phi = 2;");
        assert_eq!(d_of(&r, "d", "{[d]phi}"), "0");
    }

    #[test]
    fn two_atoms_two_terms() {
        let r = rules("");
        assert_eq!(d_of(&r, "d", "{phi, psi}"), "{[d]phi, psi} + {phi, [d]psi}");
    }

    #[test]
    fn transfer_identity() {
        let r = rules("ideal { phi, psi };");
        let d = r.complex().label_id("d").unwrap();
        let id = derive_identity(&r, d, &mono(&r, "{phi, psi}"))
            .unwrap()
            .unwrap();
        assert_eq!(id.expression.to_string(), "{[d]phi, psi} + {phi, [d]psi}");
        assert_eq!(id.applied, vec![d]);
    }

    #[test]
    fn identity_requires_vanishing_seed() {
        let r = rules("");
        let d = r.complex().label_id("d").unwrap();
        assert_eq!(
            derive_identity(&r, d, &mono(&r, "{phi, psi}")),
            Err(CalculusError::SeedNotVanishing)
        );
    }

    #[test]
    fn trivial_identity_is_none() {
        let r = rules("maxpower [d]phi = 2; maxorder d on [*]phi = 1;");
        let d = r.complex().label_id("d").unwrap();
        assert_eq!(derive_identity(&r, d, &mono(&r, "{[d]phi^2}")), Ok(None));
    }

    #[test]
    fn second_layer_of_power_identity() {
        let r = rules("maxpower phi = 3; commute e d = 0;");
        let d = r.complex().label_id("d").unwrap();
        let e = r.complex().label_id("e").unwrap();
        let ids = hierarchy(&r, &mono(&r, "{phi^3}"), &[d, e], 2).unwrap();
        let shown: Vec<String> = ids.iter().map(|i| i.expression.to_string()).collect();
        assert!(shown.contains(&"3*{[d]phi, phi^2}".to_string()));
        let second = ids.iter().find(|i| i.applied == vec![d, e]).unwrap();
        assert_eq!(second.expression.to_string(), "6*{[d]phi, [e]phi, phi}");
        assert_eq!(second.depth, 2);
    }

    #[test]
    fn hierarchy_of_dead_seed_is_empty() {
        let r = rules("maxpower [d]phi = 2; maxorder d on [*]phi = 1;");
        let d = r.complex().label_id("d").unwrap();
        assert!(hierarchy(&r, &mono(&r, "{[d]phi^2}"), &[d], 3)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn closure_plain() {
        let r = rules("maxorder d on [*]phi = 1; maxpower phi = 4;");
        let d = r.complex().label_id("d").unwrap();
        let v = is_closed(&r, d, &mono(&r, "{phi^3}"), Mode::Plain).unwrap();
        assert!(v.closed);
        assert!(v.witness.is_zero());
        let r = rules("maxorder d on [*]phi = 2; maxpower [d]phi = 3;");
        for rr in 1..4 {
            let m = mono(&r, &format!("{{[d]phi^2, phi^{rr}}}"));
            assert!(is_closed(&r, d, &m, Mode::Plain).unwrap().closed);
        }
    }

    #[test]
    fn closure_rejects_vanishing_candidate() {
        let r = rules("maxpower phi = 2;");
        let d = r.complex().label_id("d").unwrap();
        assert_eq!(
            is_closed(&r, d, &mono(&r, "{phi^2}"), Mode::Plain),
            Err(CalculusError::SeedVanishes)
        );
    }

    #[test]
    fn closure_needs_transfer() {
        let r = rules(
            "commute d e = 1; ideal { [d]phi, psi }; ideal { phi, [d]psi }; ideal { phi, [e]psi };",
        );
        let d = r.complex().label_id("d").unwrap();
        let m = mono(&r, "{[e]phi, psi}");
        let plain = is_closed(&r, d, &m, Mode::Plain).unwrap();
        assert!(!plain.closed);
        assert_eq!(plain.witness.len(), 2);
        assert!(is_closed(&r, d, &m, Mode::Transfer).unwrap().closed);
    }

    #[test]
    fn unknown_label_rejected() {
        let r = rules("");
        let e = parse_expr(&r, "{phi}").unwrap();
        assert!(matches!(
            differentiate(&r, LabelId(9), &e),
            Err(CalculusError::Rule(RuleError::Term(
                TermError::UnknownLabel(_)
            )))
        ));
    }
}
