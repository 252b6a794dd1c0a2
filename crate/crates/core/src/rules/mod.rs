//! Declared rule system of a complex and the vanishing decision.

mod pattern;

pub use pattern::FactorPattern;

use std::collections::BTreeMap;
use std::sync::Arc;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::terms::{
    normalize_word, Commutation, Complex, Expression, Factor, LabelId, Monomial, OperatorWord,
    Product, Scalar, TermError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("bounds must be at least 1")]
    BoundTooSmall,
    #[error("duplicate rule: {0}")]
    Duplicate(String),
    #[error("ideal needs at least 2 members, got {0}")]
    IdealArity(usize),
    #[error("a label cannot be commuted with itself")]
    SelfCommutation,
}

/// `d_label^p` kills any factor whose inner part matches `pattern`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderRule {
    pub label: LabelId,
    pub pattern: FactorPattern,
    pub bound: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerRule {
    pub pattern: FactorPattern,
    pub bound: u32,
}

/// Any product into which all members can be placed at once vanishes.
///
/// Members form a multiset; repeated patterns each consume one unit of
/// multiplicity when matched.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ideal {
    members: Vec<FactorPattern>,
}

impl Ideal {
    pub fn new(mut members: Vec<FactorPattern>) -> Result<Self, RuleError> {
        if members.len() < 2 {
            return Err(RuleError::IdealArity(members.len()));
        }
        members.sort();
        Ok(Ideal { members })
    }

    pub fn members(&self) -> &[FactorPattern] {
        &self.members
    }

    pub fn arity(&self) -> usize {
        self.members.len()
    }

    /// Tries to assign each member to a distinct unit of the product's factors.
    pub fn matches(&self, product: &Product) -> bool {
        let factors: Vec<(&Factor, u32)> = product.iter().collect();
        if (product.total() as usize) < self.members.len() {
            return false;
        }
        let mut left: Vec<u32> = factors.iter().map(|(_, k)| *k).collect();
        assign(&self.members, &factors, &mut left)
    }
}

fn assign(members: &[FactorPattern], factors: &[(&Factor, u32)], left: &mut [u32]) -> bool {
    let Some((first, rest)) = members.split_first() else {
        return true;
    };
    for i in 0..factors.len() {
        if left[i] > 0 && first.matches(factors[i].0) {
            left[i] -= 1;
            let ok = assign(rest, factors, left);
            left[i] += 1;
            if ok {
                return true;
            }
        }
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionKind {
    Differential,
    Orthogonality,
}

/// `lhs = rhs`, used as a rewrite from left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition {
    pub lhs: Factor,
    pub rhs: Expression,
}

impl Condition {
    pub fn kind(&self) -> ConditionKind {
        if self.rhs.is_zero() {
            ConditionKind::Orthogonality
        } else {
            ConditionKind::Differential
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VanishReason {
    ZeroCoefficient,
    /// A factor is itself zero: some letter reached its maximal order, or
    /// its word composes through a zero commutation constant.
    DeadFactor(Factor),
    MaxPower(FactorPattern),
    Ideal(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VanishVerdict {
    pub reason: Option<VanishReason>,
}

impl VanishVerdict {
    pub fn vanishes(&self) -> bool {
        self.reason.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    complex: Arc<Complex>,
    max_order: Vec<OrderRule>,
    max_power: Vec<PowerRule>,
    ideals: Vec<Ideal>,
    commutation: BTreeMap<(LabelId, LabelId), Scalar>,
    conditions: Vec<Condition>,
}

impl RuleSet {
    pub fn new(complex: Complex) -> Self {
        RuleSet::with_complex(Arc::new(complex))
    }

    pub fn with_complex(complex: Arc<Complex>) -> Self {
        RuleSet {
            complex,
            max_order: Vec::new(),
            max_power: Vec::new(),
            ideals: Vec::new(),
            commutation: BTreeMap::new(),
            conditions: Vec::new(),
        }
    }

    pub fn complex(&self) -> &Arc<Complex> {
        &self.complex
    }

    pub fn max_order_rules(&self) -> &[OrderRule] {
        &self.max_order
    }

    pub fn max_power_rules(&self) -> &[PowerRule] {
        &self.max_power
    }

    pub fn ideals(&self) -> &[Ideal] {
        &self.ideals
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    /// Explicitly declared constants only, keyed in reading order.
    pub fn commutations(&self) -> &BTreeMap<(LabelId, LabelId), Scalar> {
        &self.commutation
    }

    fn check_pattern(&self, p: &FactorPattern) -> Result<(), RuleError> {
        if let Some(a) = p.atom {
            if a.0 as usize >= self.complex.atoms().len() {
                return Err(TermError::UnknownAtom(format!("#{}", a.0)).into());
            }
        }
        if let Some(w) = &p.word {
            self.check_word(w)?;
        }
        Ok(())
    }

    fn check_word(&self, w: &OperatorWord) -> Result<(), RuleError> {
        for l in w.letters() {
            self.complex.check_label(l.label)?;
        }
        Ok(())
    }

    fn check_factor(&self, f: &Factor) -> Result<(), RuleError> {
        self.check_pattern(&FactorPattern::exact(f))
    }

    pub fn add_max_order(
        &mut self,
        label: LabelId,
        pattern: FactorPattern,
        bound: u32,
    ) -> Result<(), RuleError> {
        self.complex.check_label(label)?;
        self.check_pattern(&pattern)?;
        if bound < 1 {
            return Err(RuleError::BoundTooSmall);
        }
        if self
            .max_order
            .iter()
            .any(|r| r.label == label && r.pattern == pattern)
        {
            return Err(RuleError::Duplicate(format!(
                "maxorder {} on {}",
                self.complex.label_name(label),
                pattern.display(&self.complex)
            )));
        }
        self.max_order.push(OrderRule {
            label,
            pattern,
            bound,
        });
        Ok(())
    }

    pub fn add_max_power(&mut self, pattern: FactorPattern, bound: u32) -> Result<(), RuleError> {
        self.check_pattern(&pattern)?;
        if bound < 1 {
            return Err(RuleError::BoundTooSmall);
        }
        if self.max_power.iter().any(|r| r.pattern == pattern) {
            return Err(RuleError::Duplicate(format!(
                "maxpower {}",
                pattern.display(&self.complex)
            )));
        }
        self.max_power.push(PowerRule { pattern, bound });
        Ok(())
    }

    pub fn add_ideal(&mut self, members: Vec<FactorPattern>) -> Result<usize, RuleError> {
        for m in &members {
            self.check_pattern(m)?;
        }
        let ideal = Ideal::new(members)?;
        if self.ideals.contains(&ideal) {
            return Err(RuleError::Duplicate("ideal".into()));
        }
        self.ideals.push(ideal);
        Ok(self.ideals.len() - 1)
    }

    /// Declares `d_a d_b = value · d_b d_a`.
    pub fn set_commutation(
        &mut self,
        a: LabelId,
        b: LabelId,
        value: Scalar,
    ) -> Result<(), RuleError> {
        self.complex.check_label(a)?;
        self.complex.check_label(b)?;
        if a == b {
            return Err(RuleError::SelfCommutation);
        }
        if self.commutation.contains_key(&(a, b)) {
            return Err(RuleError::Duplicate(format!(
                "commute {} {}",
                self.complex.label_name(a),
                self.complex.label_name(b)
            )));
        }
        self.commutation.insert((a, b), value);
        Ok(())
    }

    pub fn add_condition(&mut self, lhs: Factor, rhs: Expression) -> Result<(), RuleError> {
        self.check_factor(&lhs)?;
        if !Arc::ptr_eq(rhs.complex(), &self.complex) && **rhs.complex() != *self.complex {
            return Err(TermError::MixedComplex.into());
        }
        if self.conditions.iter().any(|c| c.lhs == lhs) {
            return Err(RuleError::Duplicate(format!(
                "cond {}",
                lhs.display(&self.complex)
            )));
        }
        self.conditions.push(Condition { lhs, rhs });
        Ok(())
    }

    pub fn remove_max_order(&mut self, i: usize) -> OrderRule {
        self.max_order.remove(i)
    }

    pub fn remove_max_power(&mut self, i: usize) -> PowerRule {
        self.max_power.remove(i)
    }

    pub fn remove_ideal(&mut self, i: usize) -> Ideal {
        self.ideals.remove(i)
    }

    pub fn remove_commutation(&mut self, a: LabelId, b: LabelId) -> Option<Scalar> {
        self.commutation.remove(&(a, b))
    }

    pub fn remove_condition(&mut self, i: usize) -> Condition {
        self.conditions.remove(i)
    }

    /// Bound `p` with `d_label^p inner = 0`; `None` means unbounded.
    pub fn max_order_of(&self, label: LabelId, inner: &Factor) -> Result<Option<u32>, RuleError> {
        self.complex.check_label(label)?;
        Ok(self.order_bound(label, inner))
    }

    pub(crate) fn order_bound(&self, label: LabelId, inner: &Factor) -> Option<u32> {
        self.max_order
            .iter()
            .filter(|r| r.label == label && r.pattern.matches(inner))
            .max_by_key(|r| r.pattern.specificity())
            .map(|r| r.bound)
    }

    /// Bound `q` with `f^q` vanishing; `None` means unbounded.
    pub fn max_power_of(&self, f: &Factor) -> Option<u32> {
        self.power_rule(f).map(|r| r.bound)
    }

    fn power_rule(&self, f: &Factor) -> Option<&PowerRule> {
        self.max_power
            .iter()
            .filter(|r| r.pattern.matches(f))
            .max_by_key(|r| r.pattern.specificity())
    }

    /// True if some letter of `word` acting on `atom` has reached its maximal order.
    pub fn word_exceeds_order(&self, factor: &Factor) -> bool {
        let letters = factor.word.letters();
        (0..letters.len()).any(|j| {
            let inner = Factor::new(factor.word.suffix(j + 1), factor.atom);
            self.order_bound(letters[j].label, &inner)
                .is_some_and(|p| letters[j].order >= p)
        })
    }

    /// A factor is zero if its word, as written or normalized, is killed.
    pub fn factor_is_zero(&self, factor: &Factor) -> bool {
        if self.word_exceeds_order(factor) {
            return true;
        }
        let (s, w) = normalize_word(&factor.word, self);
        if s.is_zero() {
            return true;
        }
        w != factor.word && self.word_exceeds_order(&Factor::new(w, factor.atom))
    }

    pub fn product_vanishes(&self, product: &Product) -> Option<VanishReason> {
        for (f, _) in product.iter() {
            if self.factor_is_zero(f) {
                return Some(VanishReason::DeadFactor(f.clone()));
            }
        }
        for (f, k) in product.iter() {
            if let Some(rule) = self.power_rule(f) {
                if k >= rule.bound {
                    return Some(VanishReason::MaxPower(rule.pattern.clone()));
                }
            }
        }
        self.ideals
            .iter()
            .position(|i| i.matches(product))
            .map(VanishReason::Ideal)
    }

    pub fn vanishes(&self, m: &Monomial) -> VanishVerdict {
        let reason = if m.coeff.is_zero() {
            Some(VanishReason::ZeroCoefficient)
        } else {
            self.product_vanishes(&m.product)
        };
        VanishVerdict { reason }
    }

    /// Drops every vanishing term.
    pub fn reduce(&self, e: &Expression) -> Expression {
        let mut out = e.clone();
        out.retain(|p, _| self.product_vanishes(p).is_none());
        out
    }

    /// Substitutes the condition's right side for each occurrence of its left side.
    pub fn apply_condition(&self, e: &Expression, c: &Condition) -> Result<Expression, RuleError> {
        e.check_same(&c.rhs)?;
        let mut out = Expression::zero(e.complex().clone());
        for (p, coeff) in e.terms() {
            let m = p.multiplicity(&c.lhs);
            if m == 0 {
                out.add_term(p.clone(), coeff.clone());
                continue;
            }
            let rest: Product = Product::from_factors(
                p.iter()
                    .filter(|(f, _)| **f != c.lhs)
                    .map(|(f, k)| (f.clone(), k)),
            );
            let mut acc =
                Expression::from_monomial(e.complex().clone(), Monomial::new(coeff.clone(), rest));
            for _ in 0..m {
                acc = acc.mul(&c.rhs)?;
            }
            out.add_assign_unchecked(&acc);
        }
        Ok(self.reduce(&out))
    }

    /// SHA-256 of the canonical DSL rendering, hex encoded.
    pub fn fingerprint(&self) -> String {
        let text = crate::specdsl::render_spec(self);
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

impl Commutation for RuleSet {
    fn constant(&self, a: LabelId, b: LabelId) -> Option<Scalar> {
        if let Some(v) = self.commutation.get(&(a, b)) {
            return Some(v.clone());
        }
        self.commutation.get(&(b, a)).and_then(Scalar::inverse)
    }
}
