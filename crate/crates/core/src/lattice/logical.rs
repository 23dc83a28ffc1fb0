use serde::{Deserialize, Serialize};

use super::{Sector, SpinConfig, TorusLattice};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomologyLabel {
    Horizontal,
    Vertical,
}

/// A Pauli string along a noncontractible loop.
///
/// The label names the encoded qubit: Zlike/Horizontal is the primal row
/// `{h(0, c)}`, Xlike/Horizontal the dual column `{h(r, 0)}` that crosses it
/// once; Zlike/Vertical is the primal column `{v(r, 0)}`, Xlike/Vertical the
/// dual row `{v(0, c)}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogicalOperator {
    pub support: Vec<usize>,
    pub sector: Sector,
    pub label: HomologyLabel,
}

impl LogicalOperator {
    pub fn canonical(lattice: &TorusLattice, sector: Sector, label: HomologyLabel) -> Self {
        let l = lattice.size() as isize;
        let support = match (sector, label) {
            (Sector::Zlike, HomologyLabel::Horizontal) => (0..l).map(|c| lattice.h(0, c)).collect(),
            (Sector::Zlike, HomologyLabel::Vertical) => (0..l).map(|r| lattice.v(r, 0)).collect(),
            (Sector::Xlike, HomologyLabel::Horizontal) => (0..l).map(|r| lattice.h(r, 0)).collect(),
            (Sector::Xlike, HomologyLabel::Vertical) => (0..l).map(|c| lattice.v(0, c)).collect(),
        };
        Self { support, sector, label }
    }

    /// Number of shared edges with another logical.
    pub fn intersection(&self, other: &LogicalOperator) -> usize {
        self.support.iter().filter(|e| other.support.contains(e)).count()
    }

    /// Whether the support commutes with every check of the opposite Pauli
    /// type and is itself check-free, i.e. is a closed loop.
    pub fn is_closed(&self, lattice: &TorusLattice) -> bool {
        // a Z string must overlap each star evenly; an X string each plaquette
        let checks = self.sector.other();
        (0..lattice.n_cells()).all(|cell| {
            lattice.check(checks, cell).iter().filter(|e| self.support.contains(e)).count() % 2 == 0
        })
    }
}

/// Product of the configuration over the logical's support.
pub fn bare_logical_value(config: &SpinConfig, logical: &LogicalOperator) -> Result<i8> {
    if let Some(&e) = logical.support.iter().find(|&&e| e >= config.len()) {
        return Err(Error::domain("logical", format!("edge {e} outside a config of {} entries", config.len())));
    }
    Ok(logical.support.iter().map(|&e| config.get(e)).product())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_loops_are_closed() {
        for l in 2..=6 {
            let t = TorusLattice::new(l).unwrap();
            for s in [Sector::Zlike, Sector::Xlike] {
                for lab in [HomologyLabel::Horizontal, HomologyLabel::Vertical] {
                    let op = LogicalOperator::canonical(&t, s, lab);
                    assert_eq!(op.support.len(), l);
                    assert!(op.is_closed(&t), "L={l} {s:?} {lab:?}");
                }
            }
        }
    }

    #[test]
    fn label_pairs_intersect_oddly() {
        let t = TorusLattice::new(5).unwrap();
        let z = |lab| LogicalOperator::canonical(&t, Sector::Zlike, lab);
        let x = |lab| LogicalOperator::canonical(&t, Sector::Xlike, lab);
        use HomologyLabel::*;
        assert_eq!(z(Horizontal).intersection(&x(Horizontal)), 1);
        assert_eq!(z(Vertical).intersection(&x(Vertical)), 1);
        assert_eq!(z(Horizontal).intersection(&x(Vertical)), 0);
        assert_eq!(z(Vertical).intersection(&x(Horizontal)), 0);
    }

    #[test]
    fn bare_values() {
        let t = TorusLattice::new(3).unwrap();
        let op = LogicalOperator::canonical(&t, Sector::Zlike, HomologyLabel::Horizontal);
        let mut c = SpinConfig::all_up(t.n_edges());
        assert_eq!(bare_logical_value(&c, &op).unwrap(), 1);
        c.flip(op.support[1]);
        assert_eq!(bare_logical_value(&c, &op).unwrap(), -1);
        c.flip(op.support[2]);
        assert_eq!(bare_logical_value(&c, &op).unwrap(), 1);
        assert!(bare_logical_value(&SpinConfig::all_up(2), &op).is_err());
    }
}
