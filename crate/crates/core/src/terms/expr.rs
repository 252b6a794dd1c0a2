use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::complex::{Complex, MultiIndex};
use super::scalar::Scalar;
use super::word::Factor;
use super::TermError;

/// A multiset of factors: the content of a distributed product with its
/// placement positions forgotten. Multiplicities are always at least 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Product(BTreeMap<Factor, u32>);

impl Product {
    pub fn new() -> Self {
        Product::default()
    }

    pub fn from_factors<I: IntoIterator<Item = (Factor, u32)>>(factors: I) -> Self {
        let mut p = Product::new();
        for (f, k) in factors {
            p.insert(f, k);
        }
        p
    }

    pub fn single(f: Factor) -> Self {
        Product::from_factors([(f, 1)])
    }

    pub fn insert(&mut self, f: Factor, k: u32) {
        if k > 0 {
            *self.0.entry(f).or_insert(0) += k;
        }
    }

    /// Removes one occurrence; returns false if the factor was absent.
    pub fn remove_one(&mut self, f: &Factor) -> bool {
        match self.0.get_mut(f) {
            Some(k) if *k > 1 => {
                *k -= 1;
                true
            }
            Some(_) => {
                self.0.remove(f);
                true
            }
            None => false,
        }
    }

    pub fn multiplicity(&self, f: &Factor) -> u32 {
        self.0.get(f).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Factor, u32)> + '_ {
        self.0.iter().map(|(f, &k)| (f, k))
    }

    pub fn distinct(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self` with one `from` replaced by `to`.
    pub fn replace_one(&self, from: &Factor, to: Factor) -> Product {
        let mut p = self.clone();
        let removed = p.remove_one(from);
        debug_assert!(removed);
        p.insert(to, 1);
        p
    }

    pub fn union(&self, other: &Product) -> Product {
        let mut p = self.clone();
        for (f, k) in other.iter() {
            p.insert(f.clone(), k);
        }
        p
    }

    /// Multiplicity-weighted sum of the factors' multi-indices.
    pub fn multi_index(&self, complex: &Complex) -> MultiIndex {
        let mut idx = MultiIndex::zero(complex.slot_count());
        for (f, k) in self.iter() {
            idx += &factor_index(complex, f).scaled(k);
        }
        idx
    }

    pub fn display<'a>(&'a self, complex: &'a Complex) -> impl fmt::Display + 'a {
        ProductDisplay {
            product: self,
            complex,
        }
    }
}

/// Atom base index shifted by every letter of the word.
pub fn factor_index(complex: &Complex, f: &Factor) -> MultiIndex {
    let mut idx = complex.atom(f.atom).base_index.clone();
    for l in f.word.letters() {
        idx.shift(complex.label(l.label), l.order);
    }
    idx
}

struct ProductDisplay<'a> {
    product: &'a Product,
    complex: &'a Complex,
}

impl fmt::Display for ProductDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (factor, k)) in self.product.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", factor.display(self.complex))?;
            if k != 1 {
                write!(f, "^{k}")?;
            }
        }
        f.write_str("}")
    }
}

/// A coefficient times a product.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub coeff: Scalar,
    pub product: Product,
}

impl Monomial {
    pub fn new(coeff: Scalar, product: Product) -> Self {
        Monomial { coeff, product }
    }

    pub fn unit(product: Product) -> Self {
        Monomial::new(Scalar::one(), product)
    }

    pub fn multi_index(&self, complex: &Complex) -> MultiIndex {
        self.product.multi_index(complex)
    }
}

/// A formal sum of monomials over one complex, like terms collected.
#[derive(Clone, Debug)]
pub struct Expression {
    complex: Arc<Complex>,
    terms: BTreeMap<Product, Scalar>,
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        same_complex(&self.complex, &other.complex) && self.terms == other.terms
    }
}

impl Eq for Expression {}

fn same_complex(a: &Arc<Complex>, b: &Arc<Complex>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Expression {
    pub fn zero(complex: Arc<Complex>) -> Self {
        Expression {
            complex,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_monomial(complex: Arc<Complex>, m: Monomial) -> Self {
        let mut e = Expression::zero(complex);
        e.add_term(m.product, m.coeff);
        e
    }

    pub fn from_product(complex: Arc<Complex>, p: Product) -> Self {
        Expression::from_monomial(complex, Monomial::unit(p))
    }

    /// Collects an arbitrary list of monomials.
    pub fn collect<I: IntoIterator<Item = Monomial>>(complex: Arc<Complex>, monomials: I) -> Self {
        let mut e = Expression::zero(complex);
        for m in monomials {
            e.add_term(m.product, m.coeff);
        }
        e
    }

    pub fn complex(&self) -> &Arc<Complex> {
        &self.complex
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Product, &Scalar)> + '_ {
        self.terms.iter()
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        self.terms
            .iter()
            .map(|(p, c)| Monomial::new(c.clone(), p.clone()))
            .collect()
    }

    pub fn coefficient(&self, p: &Product) -> Scalar {
        self.terms.get(p).cloned().unwrap_or_default()
    }

    /// Adds `coeff * product`, dropping the term if it cancels.
    pub fn add_term(&mut self, product: Product, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(product) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn check_same(&self, other: &Expression) -> Result<(), TermError> {
        if same_complex(&self.complex, &other.complex) {
            Ok(())
        } else {
            Err(TermError::MixedComplex)
        }
    }

    pub fn add(&self, other: &Expression) -> Result<Expression, TermError> {
        self.check_same(other)?;
        let mut out = self.clone();
        out.add_assign_unchecked(other);
        Ok(out)
    }

    pub fn sub(&self, other: &Expression) -> Result<Expression, TermError> {
        self.check_same(other)?;
        Ok(self.add_unchecked(&other.scale(&-Scalar::one())))
    }

    pub(crate) fn add_unchecked(&self, other: &Expression) -> Expression {
        let mut out = self.clone();
        out.add_assign_unchecked(other);
        out
    }

    pub(crate) fn add_assign_unchecked(&mut self, other: &Expression) {
        for (p, c) in &other.terms {
            self.add_term(p.clone(), c.clone());
        }
    }

    pub fn scale(&self, s: &Scalar) -> Expression {
        let mut out = Expression::zero(self.complex.clone());
        if s.is_zero() {
            return out;
        }
        for (p, c) in &self.terms {
            out.terms.insert(p.clone(), c * s);
        }
        out
    }

    /// Product of two sums, distributing over terms.
    pub fn mul(&self, other: &Expression) -> Result<Expression, TermError> {
        self.check_same(other)?;
        let mut out = Expression::zero(self.complex.clone());
        for (p, c) in &self.terms {
            for (q, d) in &other.terms {
                out.add_term(p.union(q), c * d);
            }
        }
        Ok(out)
    }

    /// Keeps only the terms for which `keep` returns true.
    pub fn retain<F: FnMut(&Product, &Scalar) -> bool>(&mut self, mut keep: F) {
        self.terms.retain(|p, c| keep(p, c));
    }

    /// Divides by the first coefficient so scalar multiples compare equal.
    pub fn monic(&self) -> Expression {
        match self.terms.values().next() {
            Some(lead) => self.scale(&lead.inverse().expect("stored coefficients are nonzero")),
            None => self.clone(),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (p, c)) in self.terms.iter().enumerate() {
            let (negative, mag) = if c.is_negative_real() {
                (true, -c)
            } else {
                (false, c.clone())
            };
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if !mag.is_one() {
                write!(f, "{mag}*")?;
            }
            write!(f, "{}", p.display(&self.complex))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{AtomId, LabelId, Letter, OperatorWord};

    fn complex() -> Arc<Complex> {
        let mut c = Complex::new(2).unwrap();
        c.add_label("d", 1, 1).unwrap();
        c.add_atom("phi", MultiIndex::zero(2)).unwrap();
        c.add_atom("psi", MultiIndex::zero(2)).unwrap();
        Arc::new(c)
    }

    fn phi() -> Factor {
        Factor::bare(AtomId(0))
    }

    fn d_phi() -> Factor {
        Factor::new(
            OperatorWord::from_letters([Letter::new(LabelId(0), 1)]).unwrap(),
            AtomId(0),
        )
    }

    #[test]
    fn cancellation_gives_zero() {
        let c = complex();
        let p = Product::from_factors([(phi(), 1), (Factor::bare(AtomId(1)), 1)]);
        let e = Expression::from_product(c.clone(), p.clone());
        let neg = e.scale(&Scalar::from_int(-1));
        assert!(e.add(&neg).unwrap().is_zero());
    }

    #[test]
    fn like_terms_collect() {
        let c = complex();
        let p = Product::single(phi());
        let a = Expression::from_monomial(c.clone(), Monomial::new(2.into(), p.clone()));
        let b = Expression::from_monomial(c.clone(), Monomial::new(3.into(), p.clone()));
        let s = a.add(&b).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.coefficient(&p), Scalar::from_int(5));
    }

    #[test]
    fn zero_scale_is_zero() {
        let c = complex();
        let e = Expression::from_product(c, Product::single(phi()));
        assert!(e.scale(&Scalar::zero()).is_zero());
    }

    #[test]
    fn mixed_complex_rejected() {
        let a = Expression::from_product(complex(), Product::single(phi()));
        let mut other = Complex::new(1).unwrap();
        other.add_atom("phi", MultiIndex::zero(1)).unwrap();
        let b = Expression::from_product(Arc::new(other), Product::single(phi()));
        assert_eq!(a.add(&b), Err(TermError::MixedComplex));
    }

    #[test]
    fn monomial_index_is_weighted_sum() {
        let c = complex();
        let p = Product::from_factors([(d_phi(), 2)]);
        let idx = p.multi_index(&c);
        assert_eq!(idx.upper, vec![2, 0]);
        assert_eq!(idx.lower, vec![-2, 0]);
        assert_eq!(factor_index(&c, &phi()), MultiIndex::zero(2));
        let single = factor_index(&c, &d_phi());
        assert_eq!(single.upper, vec![1, 0]);
        assert_eq!(single.lower, vec![-1, 0]);
    }

    #[test]
    fn rendering() {
        let c = complex();
        let mut e = Expression::zero(c.clone());
        e.add_term(
            Product::from_factors([(d_phi(), 1), (phi(), 2)]),
            Scalar::from_int(3),
        );
        assert_eq!(e.to_string(), "3*{[d]phi, phi^2}");
        e.add_term(
            Product::single(Factor::bare(AtomId(1))),
            Scalar::from_int(-1),
        );
        assert_eq!(e.to_string(), "3*{[d]phi, phi^2} - {psi}");
        assert_eq!(Expression::zero(c).to_string(), "0");
    }
}
