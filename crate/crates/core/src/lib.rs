//! Symbolic differentiation of distributed products in multi-index complexes.
//!
//! Products are multisets of factors `D_J φ` (an operator word applied to an
//! atom). Differentials act by the Leibniz rule, words are kept in a canonical
//! order using declared commutation constants, and products vanish according
//! to declared maximal orders, maximal powers and ideals. On top of that the
//! crate derives identities from vanishing products, checks whether a product
//! is closed under a differential, and searches bounded spaces for closed
//! products.
//!
//! ```
//! use mcde_core::{differentiate, parse_expr, parse_spec};
//!
//! let rules = parse_spec("slots 1; diff d up 1 down 1; atom phi; maxpower phi = 3;").unwrap();
//! let d = rules.complex().label_id("d").unwrap();
//! let e = parse_expr(&rules, "{phi^2}").unwrap();
//! assert_eq!(differentiate(&rules, d, &e).unwrap().to_string(), "2*{[d]phi, phi}");
//! ```

pub mod calculus;
pub mod oracle;
pub mod rules;
pub mod sample;
pub mod search;
pub mod specdsl;
pub mod terms;

pub use calculus::{
    apply_letter, derive_identity, differentiate, hierarchy, is_closed, saturate_conditions,
    transfer_cancel, CalculusError, ClosureVerdict, Identity, IndexCoherence, Mode, Relation,
};
pub use rules::{
    Condition, ConditionKind, FactorPattern, Ideal, RuleError, RuleSet, VanishReason, VanishVerdict,
};
pub use search::{
    dedup_by_symmetry, enumerate_candidates, search_closed, Catalog, CatalogEntry, SearchBounds,
    SearchError,
};
pub use specdsl::{
    parse_expr, parse_spec, parse_spec_source, render_spec, ErrorKind, ParseError, SpecSource,
};
pub use terms::{
    normalize_word, Atom, AtomId, Complex, DifferentialLabel, Expression, Factor, LabelId, Letter,
    Monomial, MultiIndex, OperatorWord, Product, Scalar, TermError,
};
