use serde::{Deserialize, Serialize};

use crate::lattice::LogicalOperator;

/// A ±1-valued function of a spin configuration, sampled along trajectories.
pub trait SignObservable: Sync {
    fn name(&self) -> String;
    fn evaluate(&self, spins: &[i8]) -> i8;
}

/// Built-in observables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservableSpec {
    Constant,
    Site { site: usize },
    /// Sign of the total magnetization, ties to +1.
    Majority,
    /// Product of spins over a support, e.g. a bare logical operator.
    Product { name: String, sites: Vec<usize> },
}

impl ObservableSpec {
    pub fn bare_logical(logical: &LogicalOperator) -> Self {
        let sector = match logical.sector {
            crate::lattice::Sector::Zlike => "z",
            crate::lattice::Sector::Xlike => "x",
        };
        let label = match logical.label {
            crate::lattice::HomologyLabel::Horizontal => "h",
            crate::lattice::HomologyLabel::Vertical => "v",
        };
        Self::Product { name: format!("bare_{sector}{label}"), sites: logical.support.clone() }
    }
}

pub(crate) fn majority(spins: &[i8]) -> i8 {
    if spins.iter().map(|&s| s as i64).sum::<i64>() >= 0 {
        1
    } else {
        -1
    }
}

impl SignObservable for ObservableSpec {
    fn name(&self) -> String {
        match self {
            Self::Constant => "constant".into(),
            Self::Site { site } => format!("site_{site}"),
            Self::Majority => "majority".into(),
            Self::Product { name, .. } => name.clone(),
        }
    }

    fn evaluate(&self, spins: &[i8]) -> i8 {
        match self {
            Self::Constant => 1,
            Self::Site { site } => spins[*site],
            Self::Majority => majority(spins),
            Self::Product { sites, .. } => sites.iter().map(|&i| spins[i]).product(),
        }
    }
}
