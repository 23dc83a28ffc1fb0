use serde::Serialize;

use super::{HomologyLabel, LogicalOperator, Sector, TorusLattice};

#[derive(Debug, Clone, Serialize)]
pub struct EdgeRecord {
    pub index: usize,
    pub kind: &'static str,
    pub row: usize,
    pub col: usize,
    pub endpoints: [usize; 2],
}

/// Plain description of a torus for fixtures and external tools.
#[derive(Debug, Clone, Serialize)]
pub struct LatticeDescription {
    pub l: usize,
    pub edges: Vec<EdgeRecord>,
    pub stars: Vec<[usize; 4]>,
    pub plaquettes: Vec<[usize; 4]>,
    pub logicals: Vec<LogicalOperator>,
}

impl TorusLattice {
    pub fn describe(&self) -> LatticeDescription {
        let edges = (0..self.n_edges())
            .map(|e| {
                let (kind, row, col) = self.edge_coords(e);
                EdgeRecord {
                    index: e,
                    kind: match kind {
                        super::EdgeKind::Horizontal => "h",
                        super::EdgeKind::Vertical => "v",
                    },
                    row,
                    col,
                    endpoints: self.edge_endpoints(e),
                }
            })
            .collect();
        let mut logicals = Vec::new();
        for s in [Sector::Zlike, Sector::Xlike] {
            for lab in [HomologyLabel::Horizontal, HomologyLabel::Vertical] {
                logicals.push(LogicalOperator::canonical(self, s, lab));
            }
        }
        LatticeDescription { l: self.size(), edges, stars: self.stars(), plaquettes: self.plaquettes(), logicals }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.describe()).expect("lattice description serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_has_expected_shape() {
        let t = TorusLattice::new(2).unwrap();
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["edges"].as_array().unwrap().len(), 8);
        assert_eq!(v["stars"].as_array().unwrap().len(), 4);
        assert_eq!(v["plaquettes"][0], serde_json::json!([0, 2, 4, 5]));
        assert_eq!(v["logicals"][0]["sector"], "zlike");
    }
}
