//! JSON form of search catalogs.
//!
//! Object keys are written in sorted order and entries in product order, so
//! equal catalogs serialize to identical bytes.

use mcde_core::{
    parse_expr, Catalog, CatalogEntry, ClosureVerdict, Factor, Letter, Mode, Monomial,
    OperatorWord, Product, RuleSet, Scalar, SearchBounds,
};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const CATALOG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("malformed catalog: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported catalog version {0}")]
    Version(u32),
    #[error("catalog was built for rule system {found}, not {expected}")]
    Fingerprint { expected: String, found: String },
    #[error("unknown {kind} `{name}` in catalog")]
    UnknownName { kind: &'static str, name: String },
    #[error("coefficient {0} does not fit a 64-bit ratio")]
    Coefficient(String),
    #[error("bad entry: {0}")]
    Entry(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorDoc {
    pub atom: String,
    pub mult: u32,
    /// Letters outermost first, as `[label, order]`.
    pub word: Vec<(String, u32)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialDoc {
    /// Real coefficient as `[numerator, denominator]`.
    pub coeff: (i64, i64),
    pub factors: Vec<FactorDoc>,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDoc {
    pub monomial: MonomialDoc,
    pub closed_under: Vec<String>,
    /// Surviving terms per label checked; `0` when closed.
    pub witness: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsDoc {
    pub factors: usize,
    pub word: usize,
    pub order: u32,
    pub mult: u32,
    pub atoms: Vec<String>,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogDoc {
    pub version: u32,
    pub ruleset_fingerprint: String,
    pub mode: String,
    pub bounds: BoundsDoc,
    pub labels: Vec<String>,
    pub entries: Vec<EntryDoc>,
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Plain => "plain",
        Mode::Transfer => "transfer",
    }
}

fn coeff_pair(s: &Scalar) -> Result<(i64, i64), CatalogError> {
    let bad = || CatalogError::Coefficient(s.to_string());
    if !s.is_real() {
        return Err(bad());
    }
    let n = s.re().numer().to_i64().ok_or_else(bad)?;
    let d = s.re().denom().to_i64().ok_or_else(bad)?;
    Ok((n, d))
}

impl CatalogDoc {
    pub fn from_catalog(rules: &RuleSet, cat: &Catalog) -> Result<Self, CatalogError> {
        let c = rules.complex();
        let label_names =
            |ls: &[mcde_core::LabelId]| ls.iter().map(|&l| c.label_name(l).to_string()).collect();
        let mut entries = Vec::with_capacity(cat.entries.len());
        for e in &cat.entries {
            let factors = e
                .monomial
                .product
                .iter()
                .map(|(f, k)| FactorDoc {
                    atom: c.atom_name(f.atom).to_string(),
                    mult: k,
                    word: f
                        .word
                        .letters()
                        .iter()
                        .map(|l| (c.label_name(l.label).to_string(), l.order))
                        .collect(),
                })
                .collect();
            let text =
                mcde_core::Expression::from_monomial(c.clone(), e.monomial.clone()).to_string();
            entries.push(EntryDoc {
                monomial: MonomialDoc {
                    coeff: coeff_pair(&e.monomial.coeff)?,
                    factors,
                    text,
                },
                closed_under: label_names(&e.closed_under),
                witness: e
                    .verdicts
                    .iter()
                    .map(|(l, v)| (c.label_name(*l).to_string(), v.witness.to_string()))
                    .collect(),
            });
        }
        Ok(CatalogDoc {
            version: CATALOG_VERSION,
            ruleset_fingerprint: cat.ruleset_fingerprint.clone(),
            mode: mode_name(cat.mode).to_string(),
            bounds: BoundsDoc {
                factors: cat.bounds.max_distinct_factors,
                word: cat.bounds.max_word_length,
                order: cat.bounds.max_order_per_letter,
                mult: cat.bounds.max_multiplicity,
                atoms: cat
                    .bounds
                    .atoms
                    .iter()
                    .map(|&a| c.atom_name(a).to_string())
                    .collect(),
                labels: label_names(&cat.bounds.labels),
            },
            labels: label_names(&cat.labels),
            entries,
        })
    }

    pub fn to_json(&self) -> String {
        // Going through `Value` sorts object keys.
        let v = serde_json::to_value(self).expect("catalog documents always serialize");
        let mut s = serde_json::to_string_pretty(&v).expect("values always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let doc: CatalogDoc = serde_json::from_str(text)?;
        if doc.version != CATALOG_VERSION {
            return Err(CatalogError::Version(doc.version));
        }
        Ok(doc)
    }

    /// Rebuilds the engine catalog, checking the document belongs to `rules`.
    pub fn to_catalog(&self, rules: &RuleSet) -> Result<Catalog, CatalogError> {
        let expected = rules.fingerprint();
        if expected != self.ruleset_fingerprint {
            return Err(CatalogError::Fingerprint {
                expected,
                found: self.ruleset_fingerprint.clone(),
            });
        }
        let c = rules.complex();
        let label = |n: &str| {
            c.label_id(n).ok_or_else(|| CatalogError::UnknownName {
                kind: "label",
                name: n.to_string(),
            })
        };
        let atom = |n: &str| {
            c.atom_id(n).ok_or_else(|| CatalogError::UnknownName {
                kind: "atom",
                name: n.to_string(),
            })
        };
        let labels = |ns: &[String]| ns.iter().map(|n| label(n)).collect::<Result<Vec<_>, _>>();
        let mode = match self.mode.as_str() {
            "plain" => Mode::Plain,
            "transfer" => Mode::Transfer,
            other => return Err(CatalogError::Entry(format!("unknown mode `{other}`"))),
        };
        let bounds = SearchBounds {
            max_distinct_factors: self.bounds.factors,
            max_word_length: self.bounds.word,
            max_order_per_letter: self.bounds.order,
            max_multiplicity: self.bounds.mult,
            atoms: self
                .bounds
                .atoms
                .iter()
                .map(|n| atom(n))
                .collect::<Result<_, _>>()?,
            labels: labels(&self.bounds.labels)?,
        };
        let searched = labels(&self.labels)?;
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let mut product = Product::new();
            for f in &e.monomial.factors {
                let letters = f
                    .word
                    .iter()
                    .map(|(l, k)| Ok(Letter::new(label(l)?, *k)))
                    .collect::<Result<Vec<_>, CatalogError>>()?;
                let word = OperatorWord::from_letters(letters)
                    .map_err(|e| CatalogError::Entry(e.to_string()))?;
                if f.mult == 0 {
                    return Err(CatalogError::Entry("zero multiplicity".into()));
                }
                product.insert(Factor::new(word, atom(&f.atom)?), f.mult);
            }
            let (n, d) = e.monomial.coeff;
            if d == 0 {
                return Err(CatalogError::Entry("zero denominator".into()));
            }
            let monomial = Monomial::new(Scalar::ratio(n, d), product);
            let mut verdicts = Vec::new();
            for &l in &searched {
                let name = c.label_name(l);
                let text = e
                    .witness
                    .get(name)
                    .ok_or_else(|| CatalogError::Entry(format!("no witness for `{name}`")))?;
                let witness =
                    parse_expr(rules, text).map_err(|e| CatalogError::Entry(e.to_string()))?;
                let closed = witness.is_zero();
                verdicts.push((
                    l,
                    ClosureVerdict {
                        closed,
                        mode,
                        witness,
                    },
                ));
            }
            let closed_under = labels(&e.closed_under)?;
            let implied: Vec<_> = verdicts
                .iter()
                .filter(|(_, v)| v.closed)
                .map(|(l, _)| *l)
                .collect();
            if implied != closed_under {
                return Err(CatalogError::Entry(
                    "closed_under disagrees with witnesses".into(),
                ));
            }
            entries.push(CatalogEntry {
                monomial,
                verdicts,
                closed_under,
            });
        }
        Ok(Catalog {
            entries,
            bounds,
            labels: searched,
            mode,
            ruleset_fingerprint: self.ruleset_fingerprint.clone(),
        })
    }
}
