use std::fmt;

use crate::terms::{AtomId, Complex, Factor, OperatorWord};

/// Matches factors by atom and word; `None` in either position is a wildcard.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactorPattern {
    pub atom: Option<AtomId>,
    pub word: Option<OperatorWord>,
}

impl FactorPattern {
    pub fn exact(f: &Factor) -> Self {
        FactorPattern {
            atom: Some(f.atom),
            word: Some(f.word.clone()),
        }
    }

    /// Any word applied to `atom`.
    pub fn atom(atom: AtomId) -> Self {
        FactorPattern {
            atom: Some(atom),
            word: None,
        }
    }

    pub fn any() -> Self {
        FactorPattern {
            atom: None,
            word: None,
        }
    }

    pub fn matches(&self, f: &Factor) -> bool {
        self.atom.is_none_or(|a| a == f.atom) && self.word.as_ref().is_none_or(|w| *w == f.word)
    }

    /// Higher is more specific: exact factor 3, exact atom 2, exact word 1, full wildcard 0.
    pub fn specificity(&self) -> u8 {
        match (&self.atom, &self.word) {
            (Some(_), Some(_)) => 3,
            (Some(_), None) => 2,
            (None, Some(_)) => 1,
            (None, None) => 0,
        }
    }

    pub fn display<'a>(&'a self, complex: &'a Complex) -> impl fmt::Display + 'a {
        PatternDisplay {
            pattern: self,
            complex,
        }
    }
}

struct PatternDisplay<'a> {
    pattern: &'a FactorPattern,
    complex: &'a Complex,
}

impl fmt::Display for PatternDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.pattern.word {
            None => f.write_str("[*]")?,
            Some(w) if !w.is_empty() => write!(f, "[{}]", w.display(self.complex))?,
            Some(_) => {}
        }
        match self.pattern.atom {
            Some(a) => f.write_str(self.complex.atom_name(a)),
            None => f.write_str("*"),
        }
    }
}
