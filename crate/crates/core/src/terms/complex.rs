use std::fmt;
use std::ops::AddAssign;

use super::TermError;

/// Index of a differential label in its complex. Declaration order is the
/// canonical label order used by word normalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelId(pub u16);

/// Index of an atom in its complex, in declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(pub u16);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DifferentialLabel {
    pub name: String,
    /// 1-based slot whose upper index the differential raises.
    pub up_slot: usize,
    /// 1-based slot whose lower index the differential lowers.
    pub down_slot: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub name: String,
    pub base_index: MultiIndex,
}

/// Upper (`n`) and lower (`m`) integer index vectors of a complex element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    pub upper: Vec<i64>,
    pub lower: Vec<i64>,
}

impl MultiIndex {
    pub fn zero(slots: usize) -> Self {
        MultiIndex {
            upper: vec![0; slots],
            lower: vec![0; slots],
        }
    }

    pub fn slots(&self) -> usize {
        self.upper.len()
    }

    /// Shift produced by `order` applications of `label`.
    pub fn shift(&mut self, label: &DifferentialLabel, order: u32) {
        self.upper[label.up_slot - 1] += i64::from(order);
        self.lower[label.down_slot - 1] -= i64::from(order);
    }

    pub fn scaled(&self, k: u32) -> MultiIndex {
        let k = i64::from(k);
        MultiIndex {
            upper: self.upper.iter().map(|x| x * k).collect(),
            lower: self.lower.iter().map(|x| x * k).collect(),
        }
    }
}

impl AddAssign<&MultiIndex> for MultiIndex {
    fn add_assign(&mut self, rhs: &MultiIndex) {
        for (a, b) in self.upper.iter_mut().zip(&rhs.upper) {
            *a += b;
        }
        for (a, b) in self.lower.iter_mut().zip(&rhs.lower) {
            *a += b;
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
        write!(f, "n [{}] m [{}]", join(&self.upper), join(&self.lower))
    }
}

/// The declared shape of a complex: slot count, differential labels and atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Complex {
    slot_count: usize,
    labels: Vec<DifferentialLabel>,
    atoms: Vec<Atom>,
}

impl Complex {
    pub fn new(slot_count: usize) -> Result<Self, TermError> {
        if slot_count == 0 {
            return Err(TermError::BadSlotCount);
        }
        Ok(Complex {
            slot_count,
            labels: Vec::new(),
            atoms: Vec::new(),
        })
    }

    pub fn slot_count(&self) -> usize {
        self.slot_count
    }

    pub fn add_label(
        &mut self,
        name: &str,
        up_slot: usize,
        down_slot: usize,
    ) -> Result<LabelId, TermError> {
        if self.label_id(name).is_some() {
            return Err(TermError::DuplicateName(name.to_string()));
        }
        for slot in [up_slot, down_slot] {
            if slot == 0 || slot > self.slot_count {
                return Err(TermError::SlotOutOfRange {
                    slot,
                    slots: self.slot_count,
                });
            }
        }
        if self.labels.len() >= u16::MAX as usize {
            return Err(TermError::TooMany);
        }
        self.labels.push(DifferentialLabel {
            name: name.to_string(),
            up_slot,
            down_slot,
        });
        Ok(LabelId(self.labels.len() as u16 - 1))
    }

    pub fn add_atom(&mut self, name: &str, base_index: MultiIndex) -> Result<AtomId, TermError> {
        if self.atom_id(name).is_some() {
            return Err(TermError::DuplicateName(name.to_string()));
        }
        if base_index.upper.len() != self.slot_count || base_index.lower.len() != self.slot_count {
            return Err(TermError::IndexWidth {
                atom: name.to_string(),
                slots: self.slot_count,
            });
        }
        if self.atoms.len() >= u16::MAX as usize {
            return Err(TermError::TooMany);
        }
        self.atoms.push(Atom {
            name: name.to_string(),
            base_index,
        });
        Ok(AtomId(self.atoms.len() as u16 - 1))
    }

    pub fn labels(&self) -> &[DifferentialLabel] {
        &self.labels
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn label_ids(&self) -> impl Iterator<Item = LabelId> {
        (0..self.labels.len() as u16).map(LabelId)
    }

    pub fn atom_ids(&self) -> impl Iterator<Item = AtomId> {
        (0..self.atoms.len() as u16).map(AtomId)
    }

    pub fn label(&self, id: LabelId) -> &DifferentialLabel {
        &self.labels[id.0 as usize]
    }

    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id.0 as usize]
    }

    pub fn label_id(&self, name: &str) -> Option<LabelId> {
        self.labels
            .iter()
            .position(|l| l.name == name)
            .map(|i| LabelId(i as u16))
    }

    pub fn atom_id(&self, name: &str) -> Option<AtomId> {
        self.atoms
            .iter()
            .position(|a| a.name == name)
            .map(|i| AtomId(i as u16))
    }

    pub fn require_label(&self, name: &str) -> Result<LabelId, TermError> {
        self.label_id(name)
            .ok_or_else(|| TermError::UnknownLabel(name.to_string()))
    }

    pub fn require_atom(&self, name: &str) -> Result<AtomId, TermError> {
        self.atom_id(name)
            .ok_or_else(|| TermError::UnknownAtom(name.to_string()))
    }

    pub fn check_label(&self, id: LabelId) -> Result<(), TermError> {
        if (id.0 as usize) < self.labels.len() {
            Ok(())
        } else {
            Err(TermError::UnknownLabel(format!("#{}", id.0)))
        }
    }

    pub fn label_name(&self, id: LabelId) -> &str {
        &self.label(id).name
    }

    pub fn atom_name(&self, id: AtomId) -> &str {
        &self.atom(id).name
    }
}
