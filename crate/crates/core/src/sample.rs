//! Seeded random rule sets, words and products for randomized checking.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::rules::{FactorPattern, RuleSet};
use crate::terms::{
    AtomId, Complex, Expression, Factor, LabelId, Letter, Monomial, MultiIndex, OperatorWord,
    Product, Scalar,
};

/// Size limits for generated products.
#[derive(Clone, Copy, Debug)]
pub struct ProductShape {
    pub max_distinct: usize,
    pub max_multiplicity: u32,
    pub max_word_length: usize,
    pub max_order: u32,
}

impl Default for ProductShape {
    fn default() -> Self {
        ProductShape {
            max_distinct: 4,
            max_multiplicity: 3,
            max_word_length: 2,
            max_order: 2,
        }
    }
}

const ATOM_NAMES: [&str; 4] = ["phi", "psi", "chi", "gamma"];
const LABEL_NAMES: [&str; 3] = ["e", "d", "f"];

pub fn random_scalar<R: Rng>(rng: &mut R) -> Scalar {
    match rng.gen_range(0..8) {
        0 => Scalar::ratio(rng.gen_range(-5..=5), rng.gen_range(1..=4)),
        1 => Scalar::new(
            Scalar::from_int(rng.gen_range(-3..=3)).re().clone(),
            Scalar::ratio(rng.gen_range(1..=3), rng.gen_range(1..=2))
                .re()
                .clone(),
        ),
        _ => {
            let n = rng.gen_range(1..=6);
            Scalar::from_int(if rng.gen_bool(0.3) { -n } else { n })
        }
    }
}

fn random_commutation<R: Rng>(rng: &mut R) -> Option<Scalar> {
    match rng.gen_range(0..7) {
        0 | 1 => None,
        2 => Some(Scalar::zero()),
        3 => Some(Scalar::one()),
        4 => Some(Scalar::from_int(-1)),
        _ => Some(random_scalar(rng)).filter(|s| !s.is_zero()),
    }
}

pub fn random_word<R: Rng>(
    rng: &mut R,
    labels: &[LabelId],
    max_len: usize,
    max_order: u32,
) -> OperatorWord {
    let len = rng.gen_range(0..=max_len);
    let letters: Vec<Letter> = (0..len)
        .map(|_| {
            Letter::new(
                *labels.choose(rng).expect("labels nonempty"),
                rng.gen_range(1..=max_order),
            )
        })
        .collect();
    OperatorWord::from_letters(letters).expect("orders are positive")
}

pub fn random_factor<R: Rng>(
    rng: &mut R,
    complex: &Complex,
    max_len: usize,
    max_order: u32,
) -> Factor {
    let labels: Vec<LabelId> = complex.label_ids().collect();
    let atom = AtomId(rng.gen_range(0..complex.atoms().len()) as u16);
    Factor::new(random_word(rng, &labels, max_len, max_order), atom)
}

fn random_pattern<R: Rng>(rng: &mut R, complex: &Complex) -> FactorPattern {
    let labels: Vec<LabelId> = complex.label_ids().collect();
    let atom = rng
        .gen_bool(0.8)
        .then(|| AtomId(rng.gen_range(0..complex.atoms().len()) as u16));
    let word = rng.gen_bool(0.6).then(|| random_word(rng, &labels, 1, 2));
    FactorPattern { atom, word }
}

/// A random product within `shape`, coefficient 1.
pub fn random_product<R: Rng>(rng: &mut R, complex: &Complex, shape: ProductShape) -> Product {
    let distinct = rng.gen_range(1..=shape.max_distinct);
    let mut p = Product::new();
    for _ in 0..distinct {
        let f = random_factor(rng, complex, shape.max_word_length, shape.max_order);
        if p.multiplicity(&f) == 0 {
            p.insert(f, rng.gen_range(1..=shape.max_multiplicity));
        }
    }
    p
}

pub fn random_monomial<R: Rng>(rng: &mut R, complex: &Complex, shape: ProductShape) -> Monomial {
    Monomial::new(random_scalar(rng), random_product(rng, complex, shape))
}

pub fn random_expression<R: Rng>(
    rng: &mut R,
    rules: &RuleSet,
    terms: usize,
    shape: ProductShape,
) -> Expression {
    let ms: Vec<Monomial> = (0..terms)
        .map(|_| random_monomial(rng, rules.complex(), shape))
        .collect();
    Expression::collect(rules.complex().clone(), ms)
}

/// A random complex with a random rule system over it.
///
/// With `conditions` false no differential or orthogonality conditions are drawn.
pub fn random_rules<R: Rng>(rng: &mut R, conditions: bool) -> RuleSet {
    let slots = rng.gen_range(1..=3);
    let mut c = Complex::new(slots).expect("positive");
    let n_labels = rng.gen_range(1..=LABEL_NAMES.len());
    for name in &LABEL_NAMES[..n_labels] {
        c.add_label(name, rng.gen_range(1..=slots), rng.gen_range(1..=slots))
            .expect("distinct names, slots in range");
    }
    let n_atoms = rng.gen_range(1..=ATOM_NAMES.len());
    for name in &ATOM_NAMES[..n_atoms] {
        let mut idx = MultiIndex::zero(slots);
        for v in idx.upper.iter_mut().chain(idx.lower.iter_mut()) {
            *v = rng.gen_range(-2..=2);
        }
        c.add_atom(name, idx).expect("distinct names");
    }
    let mut rules = RuleSet::new(c);
    let complex = rules.complex().clone();
    let labels: Vec<LabelId> = complex.label_ids().collect();

    for _ in 0..rng.gen_range(0..=3) {
        let l = *labels.choose(rng).expect("nonempty");
        let _ = rules.add_max_order(l, random_pattern(rng, &complex), rng.gen_range(1..=4));
    }
    for _ in 0..rng.gen_range(0..=2) {
        let _ = rules.add_max_power(random_pattern(rng, &complex), rng.gen_range(2..=4));
    }
    for _ in 0..rng.gen_range(0..=2) {
        let arity = rng.gen_range(2..=3);
        let members = (0..arity).map(|_| random_pattern(rng, &complex)).collect();
        let _ = rules.add_ideal(members);
    }
    for &a in &labels {
        for &b in &labels {
            if a != b {
                if let Some(v) = random_commutation(rng) {
                    rules.set_commutation(a, b, v).expect("fresh pair");
                }
            }
        }
    }
    if conditions {
        let shape = ProductShape {
            max_distinct: 2,
            max_multiplicity: 2,
            max_word_length: 1,
            max_order: 1,
        };
        for _ in 0..rng.gen_range(0..=2) {
            let lhs = random_factor(rng, &complex, 2, 2);
            let terms = rng.gen_range(0..=2);
            let rhs = random_expression(rng, &rules, terms, shape);
            let _ = rules.add_condition(lhs, rhs);
        }
    }
    rules
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn same_seed_same_rules() {
        let a = random_rules(&mut ChaCha8Rng::seed_from_u64(7), true);
        let b = random_rules(&mut ChaCha8Rng::seed_from_u64(7), true);
        assert_eq!(a, b);
    }

    #[test]
    fn products_respect_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = random_rules(&mut rng, false);
        let shape = ProductShape::default();
        for _ in 0..200 {
            let p = random_product(&mut rng, r.complex(), shape);
            assert!(p.distinct() >= 1 && p.distinct() <= shape.max_distinct);
            for (f, k) in p.iter() {
                assert!(k <= shape.max_multiplicity);
                assert!(f.word.len() <= shape.max_word_length);
            }
        }
    }
}
