use std::collections::HashSet;

use super::{differentiate, scaling_key, CalculusError};
use crate::rules::RuleSet;
use crate::terms::{Expression, LabelId, MultiIndex, Product};

/// Whether all terms of a relation carry the same multi-index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexCoherence {
    Uniform(MultiIndex),
    /// Distinct indices that occur, in ascending order.
    Mixed(Vec<MultiIndex>),
}

impl IndexCoherence {
    pub fn of(e: &Expression) -> Self {
        let mut seen: Vec<MultiIndex> =
            e.terms().map(|(p, _)| p.multi_index(e.complex())).collect();
        seen.sort();
        seen.dedup();
        if seen.len() == 1 {
            IndexCoherence::Uniform(seen.remove(0))
        } else {
            IndexCoherence::Mixed(seen)
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, IndexCoherence::Uniform(_))
    }
}

/// A consequence `expression = 0` of one declared condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub condition: usize,
    pub applied: Vec<LabelId>,
    pub expression: Expression,
    pub coherence: IndexCoherence,
}

/// Differentiates every condition's residual `lhs - rhs` along all label
/// sequences up to `depth`, substituting conditions after each step.
///
/// Relations equal up to a scalar multiple are reported once.
pub fn saturate_conditions(rules: &RuleSet, depth: usize) -> Result<Vec<Relation>, CalculusError> {
    if rules.conditions().is_empty() {
        return Err(CalculusError::NoConditions);
    }
    let complex = rules.complex().clone();
    let labels: Vec<LabelId> = complex.label_ids().collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (ci, cond) in rules.conditions().iter().enumerate() {
        let lhs = Expression::from_product(complex.clone(), Product::single(cond.lhs.clone()));
        let residual = lhs.sub(&cond.rhs)?;
        let mut frontier = vec![(Vec::new(), rules.reduce(&residual))];
        for _ in 0..depth {
            let mut next = Vec::new();
            for (applied, current) in &frontier {
                for &l in &labels {
                    let mut e = differentiate(rules, l, current)?;
                    for c in rules.conditions() {
                        e = rules.apply_condition(&e, c)?;
                    }
                    if e.is_zero() {
                        continue;
                    }
                    let mut path: Vec<LabelId> = applied.clone();
                    path.push(l);
                    if seen.insert(scaling_key(&e)) {
                        out.push(Relation {
                            condition: ci,
                            applied: path.clone(),
                            coherence: IndexCoherence::of(&e),
                            expression: e.clone(),
                        });
                    }
                    next.push((path, e));
                }
            }
            frontier = next;
        }
    }
    Ok(out)
}
