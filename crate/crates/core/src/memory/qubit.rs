use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{HomologyLabel, LogicalOperator, Sector, TorusLattice};

/// An encoded qubit: a pair of logical operators on a torus, or the Ising
/// analog where the bare observable is one designated spin.
#[derive(Debug, Clone, PartialEq)]
pub enum EncodedQubit {
    Kitaev { lattice: TorusLattice, z: LogicalOperator, x: LogicalOperator },
    Ising { n_sites: usize, designated: usize },
}

impl EncodedQubit {
    /// The Horizontal qubit: the primal row of Z's and the dual column of
    /// X's (a vertical loop on the dual lattice), which cross once.
    pub fn canonical_kitaev(lattice: TorusLattice) -> Self {
        let z = LogicalOperator::canonical(&lattice, Sector::Zlike, HomologyLabel::Horizontal);
        let x = LogicalOperator::canonical(&lattice, Sector::Xlike, HomologyLabel::Horizontal);
        Self::Kitaev { lattice, z, x }
    }

    pub fn ising(n_sites: usize, designated: usize) -> Result<Self> {
        if designated >= n_sites {
            return Err(Error::domain("designated", format!("site {designated} outside {n_sites} sites")));
        }
        Ok(Self::Ising { n_sites, designated })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct M1Verdict {
    /// Both operators square to the identity (products of ±1 values).
    pub involutions: bool,
    pub intersection: usize,
    pub same_type: bool,
    /// Closed loops of the right type with odd overlap.
    pub anticommute: bool,
    pub valid_pair: bool,
}

/// Qubit-algebra check: `X² = Z² = 1` and `XZ = −ZX`.
pub fn m1_check(q: &EncodedQubit) -> Result<M1Verdict> {
    let EncodedQubit::Kitaev { lattice, z, x } = q else {
        return Err(Error::Precondition("M1 is checked on toric-code logicals".into()));
    };
    let same_type = z.sector == x.sector;
    let intersection = z.intersection(x);
    let closed = z.is_closed(lattice) && x.is_closed(lattice);
    // Paulis of one type always commute; mixed types anticommute on odd overlap
    let anticommute = !same_type && intersection % 2 == 1;
    Ok(M1Verdict {
        involutions: true,
        intersection,
        same_type,
        anticommute,
        valid_pair: closed && anticommute,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_pair_is_a_qubit() {
        let lat = TorusLattice::new(3).unwrap();
        let v = m1_check(&EncodedQubit::canonical_kitaev(lat)).unwrap();
        assert_eq!(v.intersection, 1);
        assert!(v.anticommute && v.valid_pair);
    }

    #[test]
    fn mismatched_labels_commute() {
        let lat = TorusLattice::new(3).unwrap();
        let z = LogicalOperator::canonical(&lat, Sector::Zlike, HomologyLabel::Horizontal);
        let x = LogicalOperator::canonical(&lat, Sector::Xlike, HomologyLabel::Vertical);
        let v = m1_check(&EncodedQubit::Kitaev { lattice: lat, z, x }).unwrap();
        assert_eq!(v.intersection % 2, 0);
        assert!(!v.valid_pair);
    }

    #[test]
    fn same_type_pair_rejected() {
        let lat = TorusLattice::new(3).unwrap();
        let z = LogicalOperator::canonical(&lat, Sector::Zlike, HomologyLabel::Horizontal);
        let z2 = LogicalOperator::canonical(&lat, Sector::Zlike, HomologyLabel::Vertical);
        let v = m1_check(&EncodedQubit::Kitaev { lattice: lat, z, x: z2 }).unwrap();
        assert!(v.same_type && !v.anticommute && !v.valid_pair);
    }
}
