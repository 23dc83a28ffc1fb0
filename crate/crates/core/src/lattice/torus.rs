use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which Pauli type a classical sector tracks.
///
/// `Zlike`: configurations are σ^z values on the edges, checks are
/// plaquettes, error chains live on the dual lattice. `Xlike`: σ^x values,
/// star checks, error chains on the primal lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Zlike,
    Xlike,
}

impl Sector {
    pub fn other(self) -> Sector {
        match self {
            Sector::Zlike => Sector::Xlike,
            Sector::Xlike => Sector::Zlike,
        }
    }
}

/// Periodic L×L square lattice with qubits on the edges.
///
/// Edge numbering: horizontal edge `h(r, c) = r·L + c` joins vertices
/// (r, c) and (r, c+1); vertical edge `v(r, c) = L² + r·L + c` joins (r, c)
/// and (r+1, c). Plaquette (r, c) has corners (r, c) and (r+1, c+1); star
/// (r, c) sits on vertex (r, c). Cells of either kind are numbered `r·L + c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusLattice {
    l: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Horizontal,
    Vertical,
}

pub fn build_torus(l: usize) -> Result<TorusLattice> {
    TorusLattice::new(l)
}

impl TorusLattice {
    pub fn new(l: usize) -> Result<Self> {
        if l < 2 {
            return Err(Error::domain("L", format!("torus size must be ≥ 2, got {l}")));
        }
        if l > 1 << 12 {
            return Err(Error::domain("L", format!("torus size {l} is unreasonably large")));
        }
        Ok(Self { l })
    }

    pub fn size(&self) -> usize {
        self.l
    }

    pub fn n_edges(&self) -> usize {
        2 * self.l * self.l
    }

    pub fn n_cells(&self) -> usize {
        self.l * self.l
    }

    fn wrap(&self, x: isize) -> usize {
        x.rem_euclid(self.l as isize) as usize
    }

    pub fn h(&self, r: isize, c: isize) -> usize {
        self.wrap(r) * self.l + self.wrap(c)
    }

    pub fn v(&self, r: isize, c: isize) -> usize {
        self.l * self.l + self.wrap(r) * self.l + self.wrap(c)
    }

    pub fn cell(&self, r: isize, c: isize) -> usize {
        self.wrap(r) * self.l + self.wrap(c)
    }

    pub fn cell_coords(&self, cell: usize) -> (usize, usize) {
        (cell / self.l, cell % self.l)
    }

    /// Kind and (row, column) of an edge.
    pub fn edge_coords(&self, e: usize) -> (EdgeKind, usize, usize) {
        let n = self.l * self.l;
        if e < n {
            (EdgeKind::Horizontal, e / self.l, e % self.l)
        } else {
            (EdgeKind::Vertical, (e - n) / self.l, (e - n) % self.l)
        }
    }

    /// The two vertices joined by an edge, as vertex (= star) indices.
    pub fn edge_endpoints(&self, e: usize) -> [usize; 2] {
        let (kind, r, c) = self.edge_coords(e);
        let (r, c) = (r as isize, c as isize);
        match kind {
            EdgeKind::Horizontal => [self.cell(r, c), self.cell(r, c + 1)],
            EdgeKind::Vertical => [self.cell(r, c), self.cell(r + 1, c)],
        }
    }

    pub fn plaquette(&self, cell: usize) -> [usize; 4] {
        let (r, c) = self.cell_coords(cell);
        let (r, c) = (r as isize, c as isize);
        [self.h(r, c), self.h(r + 1, c), self.v(r, c), self.v(r, c + 1)]
    }

    pub fn star(&self, cell: usize) -> [usize; 4] {
        let (r, c) = self.cell_coords(cell);
        let (r, c) = (r as isize, c as isize);
        [self.h(r, c), self.h(r, c - 1), self.v(r, c), self.v(r - 1, c)]
    }

    pub fn check(&self, sector: Sector, cell: usize) -> [usize; 4] {
        match sector {
            Sector::Zlike => self.plaquette(cell),
            Sector::Xlike => self.star(cell),
        }
    }

    pub fn plaquettes(&self) -> Vec<[usize; 4]> {
        (0..self.n_cells()).map(|i| self.plaquette(i)).collect()
    }

    pub fn stars(&self) -> Vec<[usize; 4]> {
        (0..self.n_cells()).map(|i| self.star(i)).collect()
    }

    /// The two checks of `sector` containing edge `e`.
    pub fn edge_cells(&self, sector: Sector, e: usize) -> [usize; 2] {
        let (kind, r, c) = self.edge_coords(e);
        let (r, c) = (r as isize, c as isize);
        match (sector, kind) {
            (Sector::Zlike, EdgeKind::Horizontal) => [self.cell(r, c), self.cell(r - 1, c)],
            (Sector::Zlike, EdgeKind::Vertical) => [self.cell(r, c), self.cell(r, c - 1)],
            (Sector::Xlike, EdgeKind::Horizontal) => [self.cell(r, c), self.cell(r, c + 1)],
            (Sector::Xlike, EdgeKind::Vertical) => [self.cell(r, c), self.cell(r + 1, c)],
        }
    }

    /// Edge shared by two neighbouring checks of the same sector, if any.
    pub fn shared_edge(&self, sector: Sector, a: usize, b: usize) -> Option<usize> {
        let ea = self.check(sector, a);
        let eb = self.check(sector, b);
        ea.iter().copied().find(|e| eb.contains(e))
    }

    /// Torus Manhattan distance between two cells.
    pub fn cell_distance(&self, a: usize, b: usize) -> usize {
        let (ra, ca) = self.cell_coords(a);
        let (rb, cb) = self.cell_coords(b);
        let d = |x: usize, y: usize| {
            let d = x.abs_diff(y);
            d.min(self.l - d)
        };
        d(ra, rb) + d(ca, cb)
    }

    /// Edges crossed by a shortest path between two checks of `sector`:
    /// columns first, then rows, each the short way round the torus (ties go
    /// in the positive direction).
    pub fn correction_path(&self, sector: Sector, a: usize, b: usize) -> Vec<usize> {
        let l = self.l as isize;
        let (ra, ca) = self.cell_coords(a);
        let (rb, cb) = self.cell_coords(b);
        let steps = |from: usize, to: usize| -> isize {
            let fwd = (to as isize - from as isize).rem_euclid(l);
            if fwd <= l - fwd {
                fwd
            } else {
                fwd - l
            }
        };
        let (dr, dc) = (steps(ra, rb), steps(ca, cb));
        let (mut r, mut c) = (ra as isize, ca as isize);
        let mut path = Vec::with_capacity((dr.abs() + dc.abs()) as usize);
        for _ in 0..dc.abs() {
            let plus = dc > 0;
            path.push(match (sector, plus) {
                (Sector::Zlike, true) => self.v(r, c + 1),
                (Sector::Zlike, false) => self.v(r, c),
                (Sector::Xlike, true) => self.h(r, c),
                (Sector::Xlike, false) => self.h(r, c - 1),
            });
            c += if plus { 1 } else { -1 };
        }
        for _ in 0..dr.abs() {
            let plus = dr > 0;
            path.push(match (sector, plus) {
                (Sector::Zlike, true) => self.h(r + 1, c),
                (Sector::Zlike, false) => self.h(r, c),
                (Sector::Xlike, true) => self.v(r, c),
                (Sector::Xlike, false) => self.v(r - 1, c),
            });
            r += if plus { 1 } else { -1 };
        }
        path
    }
}
