use super::{HomologyLabel, LogicalOperator, Sector, TorusLattice};
use crate::error::{Error, Result};

/// Winding parities of a primal cycle, counted against the dual cuts
/// `{h(r, 0)}` (horizontal winding) and `{v(0, c)}` (vertical winding).
pub fn homology_class(lattice: &TorusLattice, chain: &[usize]) -> Result<(u8, u8)> {
    error_homology(lattice, Sector::Xlike, chain)
}

/// Winding parities of a dual cycle (a set of edges crossed by a closed
/// path of plaquettes), counted against the primal cuts `{h(0, c)}` and
/// `{v(r, 0)}`.
pub fn dual_homology_class(lattice: &TorusLattice, chain: &[usize]) -> Result<(u8, u8)> {
    error_homology(lattice, Sector::Zlike, chain)
}

fn parity(chain: &[usize], support: &[usize]) -> u8 {
    (chain.iter().filter(|e| support.contains(e)).count() % 2) as u8
}

/// Homology of an error chain in `sector` as (h, v): bit h is set when the
/// chain flips the bare logical labelled Horizontal of that sector, bit v
/// likewise for Vertical.
///
/// Zlike errors are dual chains (boundary on plaquettes); Xlike errors are
/// primal chains (boundary on vertices).
pub fn error_homology(lattice: &TorusLattice, sector: Sector, chain: &[usize]) -> Result<(u8, u8)> {
    let mut boundary = vec![false; lattice.n_cells()];
    for &e in chain {
        if e >= lattice.n_edges() {
            return Err(Error::domain("chain", format!("edge {e} out of range")));
        }
        for c in lattice.edge_cells(sector, e) {
            boundary[c] ^= true;
        }
    }
    if let Some(c) = boundary.iter().position(|&b| b) {
        return Err(Error::Precondition(format!("chain has nonempty boundary (cell {c})")));
    }
    let h = LogicalOperator::canonical(lattice, sector, HomologyLabel::Horizontal);
    let v = LogicalOperator::canonical(lattice, sector, HomologyLabel::Vertical);
    Ok((parity(chain, &h.support), parity(chain, &v.support)))
}
