use std::collections::{BTreeMap, HashMap, VecDeque};

use super::expand_into;
use crate::rules::RuleSet;
use crate::terms::{Expression, Factor, LabelId, Product, Scalar};

/// Largest number of products explored in one equivalence class.
const CLASS_CAP: usize = 256;

/// Cancels terms that are proportional modulo identities from vanishing products.
///
/// For a product `M`, stripping the outermost letter from one or two of its
/// factors gives a smaller product `S`. When `S` vanishes, re-applying the
/// stripped letters to `S` gives an identity; if that identity has exactly
/// two terms, `M` is a fixed multiple of the other one. Products linked this
/// way are collected into classes and each class is rewritten onto its
/// smallest member. A class whose links disagree on a ratio is left alone.
pub fn transfer_cancel(rules: &RuleSet, e: &Expression) -> Expression {
    let mut links = LinkCache::default();
    let mut class_of: HashMap<Product, usize> = HashMap::new();
    let mut classes: Vec<Option<BTreeMap<Product, Scalar>>> = Vec::new();

    for (p, _) in e.terms() {
        if class_of.contains_key(p) {
            continue;
        }
        let id = classes.len();
        let class = explore(rules, &mut links, p);
        if let Some(members) = &class {
            for q in members.keys() {
                if e.coefficient(q).is_zero() {
                    continue;
                }
                class_of.entry(q.clone()).or_insert(id);
            }
        }
        class_of.entry(p.clone()).or_insert(id);
        classes.push(class);
    }

    let mut out = Expression::zero(e.complex().clone());
    let mut sums: Vec<Scalar> = vec![Scalar::zero(); classes.len()];
    for (p, c) in e.terms() {
        let id = class_of[p];
        match &classes[id] {
            Some(members) => sums[id] = &sums[id] + &(c * &members[p]),
            None => out.add_term(p.clone(), c.clone()),
        }
    }
    for (id, class) in classes.iter().enumerate() {
        if let Some(members) = class {
            let (rep, k) = members.iter().next().expect("class contains its root");
            let coeff = sums[id].checked_div(k).expect("ratios are nonzero");
            out.add_term(rep.clone(), coeff);
        }
    }
    rules.reduce(&out)
}

/// Each member `X` maps to `k_X` with `X = k_X · root`.
fn explore(
    rules: &RuleSet,
    links: &mut LinkCache,
    root: &Product,
) -> Option<BTreeMap<Product, Scalar>> {
    let mut ratio: BTreeMap<Product, Scalar> = BTreeMap::new();
    ratio.insert(root.clone(), Scalar::one());
    let mut queue = VecDeque::from([root.clone()]);
    while let Some(x) = queue.pop_front() {
        let kx = ratio[&x].clone();
        for (y, r) in links.get(rules, &x).to_vec() {
            // x = r · y
            let ky = kx.checked_div(&r).expect("link ratios are nonzero");
            match ratio.get(&y) {
                Some(existing) if *existing != ky => return None,
                Some(_) => {}
                None => {
                    if ratio.len() >= CLASS_CAP {
                        continue;
                    }
                    ratio.insert(y.clone(), ky);
                    queue.push_back(y);
                }
            }
        }
    }
    Some(ratio)
}

#[derive(Default)]
struct LinkCache {
    links: HashMap<Product, Vec<(Product, Scalar)>>,
}

impl LinkCache {
    fn get(&mut self, rules: &RuleSet, p: &Product) -> &[(Product, Scalar)] {
        if !self.links.contains_key(p) {
            let found = find_links(rules, p);
            self.links.insert(p.clone(), found);
        }
        &self.links[p]
    }
}

/// Products obtained by removing the outermost letter of one factor,
/// with the label that was removed.
fn strips(p: &Product) -> Vec<(LabelId, Product)> {
    let mut out = Vec::new();
    for (f, _) in p.iter() {
        if let Some((label, rest)) = f.word.strip_leading() {
            out.push((label, p.replace_one(f, Factor::new(rest, f.atom))));
        }
    }
    out
}

/// Pairs `(N, r)` with `p = r · N` from two-term identities.
fn find_links(rules: &RuleSet, p: &Product) -> Vec<(Product, Scalar)> {
    let mut found: Vec<(Product, Scalar)> = Vec::new();
    let mut push = |identity: &Expression| {
        if identity.len() != 2 {
            return;
        }
        let a = identity.coefficient(p);
        if a.is_zero() {
            return;
        }
        for (q, b) in identity.terms() {
            if q != p {
                // a·p + b·q = 0
                let r = -(b.checked_div(&a).expect("nonzero"));
                if !found.iter().any(|(n, _)| n == q) {
                    found.push((q.clone(), r));
                }
            }
        }
    };
    let complex = rules.complex().clone();
    for (l1, once) in strips(p) {
        if rules.product_vanishes(&once).is_some() {
            let mut id = Expression::zero(complex.clone());
            expand_into(rules, l1, &once, &Scalar::one(), &mut id);
            push(&rules.reduce(&id));
            continue;
        }
        for (l2, twice) in strips(&once) {
            if rules.product_vanishes(&twice).is_none() {
                continue;
            }
            let mut inner = Expression::zero(complex.clone());
            expand_into(rules, l2, &twice, &Scalar::one(), &mut inner);
            let inner = rules.reduce(&inner);
            let mut id = Expression::zero(complex.clone());
            for (q, c) in inner.terms() {
                expand_into(rules, l1, q, c, &mut id);
            }
            push(&rules.reduce(&id));
        }
    }
    found
}
