use std::cmp::Ordering;
use std::fmt;

use super::complex::{AtomId, Complex, LabelId};
use super::scalar::Scalar;
use super::TermError;

/// One `d_label^order` in an operator word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub label: LabelId,
    pub order: u32,
}

impl Letter {
    pub fn new(label: LabelId, order: u32) -> Self {
        Letter { label, order }
    }
}

/// A composition `d_{a1}^{r1} ... d_{an}^{rn}`, leftmost letter applied last.
///
/// Adjacent letters never share a label; the empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OperatorWord {
    letters: Vec<Letter>,
}

impl OperatorWord {
    pub fn empty() -> Self {
        OperatorWord::default()
    }

    /// Builds a word, merging adjacent same-label letters by adding orders.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Result<Self, TermError> {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if l.order == 0 {
                return Err(TermError::NonPositiveOrder);
            }
            push_merged(&mut out, l);
        }
        Ok(OperatorWord { letters: out })
    }

    /// Trusted constructor for letters already known to be positive; still merges.
    pub(crate) fn merged(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out = Vec::new();
        for l in letters {
            debug_assert!(l.order > 0);
            push_merged(&mut out, l);
        }
        OperatorWord { letters: out }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    /// Total number of single differentials in the word.
    pub fn total_order(&self) -> u64 {
        self.letters.iter().map(|l| u64::from(l.order)).sum()
    }

    pub fn leading(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    /// `d_label ∘ self`, merged with the leading letter when labels agree.
    pub fn prepend(&self, label: LabelId) -> OperatorWord {
        OperatorWord::merged(
            std::iter::once(Letter::new(label, 1)).chain(self.letters.iter().copied()),
        )
    }

    /// Removes one order of the leading letter. Inverse of `prepend` on the leading label.
    pub fn strip_leading(&self) -> Option<(LabelId, OperatorWord)> {
        let first = *self.letters.first()?;
        let mut letters = self.letters.clone();
        if first.order == 1 {
            letters.remove(0);
        } else {
            letters[0].order -= 1;
        }
        Some((first.label, OperatorWord { letters }))
    }

    /// The word with the first `n` letters removed (what letter `n` acts on).
    pub fn suffix(&self, n: usize) -> OperatorWord {
        OperatorWord {
            letters: self.letters[n..].to_vec(),
        }
    }

    pub fn concat(&self, other: &OperatorWord) -> OperatorWord {
        OperatorWord::merged(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn display<'a>(&'a self, complex: &'a Complex) -> impl fmt::Display + 'a {
        WordDisplay {
            word: self,
            complex,
        }
    }
}

fn push_merged(out: &mut Vec<Letter>, l: Letter) {
    match out.last_mut() {
        Some(last) if last.label == l.label => last.order += l.order,
        _ => out.push(l),
    }
}

struct WordDisplay<'a> {
    word: &'a OperatorWord,
    complex: &'a Complex,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.word.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(self.complex.label_name(l.label))?;
            if l.order != 1 {
                write!(f, "^{}", l.order)?;
            }
        }
        Ok(())
    }
}

/// Source of commutation constants `A_{a,b}` in `d_a d_b = A_{a,b} d_b d_a`.
pub trait Commutation {
    /// `None` means the constant is undefined and the pair must not be swapped.
    fn constant(&self, a: LabelId, b: LabelId) -> Option<Scalar>;
}

/// Sorts a word into canonical label order using the commutation constants.
///
/// Returns `(0, empty)` when the word is annihilated: an adjacent pair with a
/// zero constant in the input or the sorted output, or a zero accumulated
/// scalar. If any inverted pair has an undefined constant the word is returned
/// unchanged with scalar 1.
pub fn normalize_word<C: Commutation + ?Sized>(
    word: &OperatorWord,
    table: &C,
) -> (Scalar, OperatorWord) {
    if has_zero_adjacency(&word.letters, table) {
        return (Scalar::zero(), OperatorWord::empty());
    }
    let mut scalar = Scalar::one();
    let ls = &word.letters;
    for i in 0..ls.len() {
        for j in i + 1..ls.len() {
            if ls[i].label > ls[j].label {
                match table.constant(ls[i].label, ls[j].label) {
                    None => return (Scalar::one(), word.clone()),
                    Some(a) => {
                        let exp = u64::from(ls[i].order) * u64::from(ls[j].order);
                        scalar = &scalar * &a.pow(exp);
                    }
                }
            }
        }
    }
    if scalar.is_zero() {
        return (Scalar::zero(), OperatorWord::empty());
    }
    let mut sorted = ls.clone();
    sorted.sort_by_key(|l| l.label);
    let sorted = OperatorWord::merged(sorted);
    if has_zero_adjacency(&sorted.letters, table) {
        return (Scalar::zero(), OperatorWord::empty());
    }
    (scalar, sorted)
}

fn has_zero_adjacency<C: Commutation + ?Sized>(letters: &[Letter], table: &C) -> bool {
    letters.windows(2).any(|w| {
        table
            .constant(w[0].label, w[1].label)
            .is_some_and(|a| a.is_zero())
    })
}

/// An operator word applied to an atom, `D_J φ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub word: OperatorWord,
    pub atom: AtomId,
}

impl Factor {
    pub fn new(word: OperatorWord, atom: AtomId) -> Self {
        Factor { word, atom }
    }

    pub fn bare(atom: AtomId) -> Self {
        Factor {
            word: OperatorWord::empty(),
            atom,
        }
    }

    pub fn display<'a>(&'a self, complex: &'a Complex) -> impl fmt::Display + 'a {
        FactorDisplay {
            factor: self,
            complex,
        }
    }
}

/// Atoms ascend; within an atom, longer and higher-order words come first.
impl Ord for Factor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.atom
            .cmp(&other.atom)
            .then_with(|| other.word.cmp(&self.word))
    }
}

impl PartialOrd for Factor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct FactorDisplay<'a> {
    factor: &'a Factor,
    complex: &'a Complex,
}

impl fmt::Display for FactorDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.factor.word.is_empty() {
            write!(f, "[{}]", self.factor.word.display(self.complex))?;
        }
        f.write_str(self.complex.atom_name(self.factor.atom))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    const D: LabelId = LabelId(1);
    const E: LabelId = LabelId(0);

    struct Table(HashMap<(LabelId, LabelId), Scalar>);

    impl Commutation for Table {
        fn constant(&self, a: LabelId, b: LabelId) -> Option<Scalar> {
            self.0.get(&(a, b)).cloned()
        }
    }

    fn table(entries: &[((LabelId, LabelId), i64)]) -> Table {
        Table(
            entries
                .iter()
                .map(|&(k, v)| (k, Scalar::from_int(v)))
                .collect(),
        )
    }

    fn word(ls: &[(LabelId, u32)]) -> OperatorWord {
        OperatorWord::from_letters(ls.iter().map(|&(l, r)| Letter::new(l, r))).unwrap()
    }

    #[test]
    fn make_word_merges_adjacent_labels() {
        assert_eq!(word(&[(D, 1), (D, 1)]).letters(), &[Letter::new(D, 2)]);
        assert_eq!(
            word(&[(D, 2), (E, 1)]).letters(),
            &[Letter::new(D, 2), Letter::new(E, 1)]
        );
        assert_eq!(
            word(&[(D, 1), (E, 3), (E, 2)]).letters(),
            &[Letter::new(D, 1), Letter::new(E, 5)]
        );
    }

    #[test]
    fn zero_order_rejected() {
        assert_eq!(
            OperatorWord::from_letters([Letter::new(D, 0)]),
            Err(TermError::NonPositiveOrder)
        );
    }

    #[test]
    fn zero_constant_annihilates() {
        let t = table(&[((D, E), 0)]);
        let (s, w) = normalize_word(&word(&[(D, 1), (E, 1)]), &t);
        assert!(s.is_zero());
        assert!(w.is_empty());
    }

    #[test]
    fn single_swap_with_unit_constant() {
        let t = table(&[((D, E), 1)]);
        let (s, w) = normalize_word(&word(&[(D, 1), (E, 1)]), &t);
        assert!(s.is_one());
        assert_eq!(w, word(&[(E, 1), (D, 1)]));
    }

    #[test]
    fn higher_order_swap_sign() {
        let t = table(&[((D, E), -1)]);
        let (s, w) = normalize_word(&word(&[(D, 2), (E, 3)]), &t);
        assert_eq!(s, Scalar::one());
        assert_eq!(w, word(&[(E, 3), (D, 2)]));
        let (s, _) = normalize_word(&word(&[(D, 1), (E, 3)]), &t);
        assert_eq!(s, Scalar::from_int(-1));
    }

    #[test]
    fn undefined_swap_leaves_word_free() {
        let t = table(&[]);
        let w = word(&[(D, 1), (E, 1)]);
        assert_eq!(normalize_word(&w, &t), (Scalar::one(), w));
    }

    #[test]
    fn swap_merges_equal_labels() {
        let t = table(&[((D, E), 2)]);
        let (s, w) = normalize_word(&word(&[(E, 1), (D, 1), (E, 1)]), &t);
        assert_eq!(s, Scalar::from_int(2));
        assert_eq!(w, word(&[(E, 2), (D, 1)]));
    }

    #[test]
    fn strip_inverts_prepend() {
        let w = word(&[(D, 2), (E, 1)]);
        let (l, rest) = w.strip_leading().unwrap();
        assert_eq!(l, D);
        assert_eq!(rest.prepend(D), w);
        assert!(OperatorWord::empty().strip_leading().is_none());
    }

    #[test]
    fn factor_order_puts_bigger_words_first() {
        let phi = AtomId(0);
        let psi = AtomId(1);
        let d_phi = Factor::new(word(&[(D, 1)]), phi);
        assert!(d_phi < Factor::bare(phi));
        assert!(Factor::bare(phi) < Factor::new(word(&[(D, 1)]), psi));
    }
}
