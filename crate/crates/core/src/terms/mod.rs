//! Term language: labels, operator words, factors, monomials and expressions.

mod complex;
mod expr;
mod scalar;
mod word;

pub use complex::{Atom, AtomId, Complex, DifferentialLabel, LabelId, MultiIndex};
pub use expr::{factor_index, Expression, Monomial, Product};
pub use scalar::Scalar;
pub use word::{normalize_word, Commutation, Factor, Letter, OperatorWord};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("slot count must be at least 1")]
    BadSlotCount,
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("slot {slot} out of range 1..={slots}")]
    SlotOutOfRange { slot: usize, slots: usize },
    #[error("too many declarations")]
    TooMany,
    #[error("index of atom `{atom}` must have exactly {slots} slots")]
    IndexWidth { atom: String, slots: usize },
    #[error("unknown differential label `{0}`")]
    UnknownLabel(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("orders must be positive")]
    NonPositiveOrder,
    #[error("expressions belong to different complexes")]
    MixedComplex,
}
