use serde::{Deserialize, Serialize};

use super::decode::{decode_majority, decode_matching};
use crate::dynamics::SignObservable;
use crate::error::{Error, Result};
use crate::lattice::{bare_logical_value, syndrome, LogicalOperator, Sector, SpinConfig, TorusLattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoder {
    MajorityVote,
    MinWeightMatching,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BareObservable {
    Site(usize),
    Logical(LogicalOperator),
}

/// A bare observable multiplied by a decoder's ±1 correction.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedObservable {
    pub bare: BareObservable,
    pub decoder: Decoder,
    pub sector: Option<Sector>,
    lattice: Option<TorusLattice>,
}

/// The three recorded values of one measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Measurement {
    pub bare: i8,
    pub correction: i8,
    pub dressed: i8,
}

impl DressedObservable {
    pub fn ising_majority(designated: usize) -> Self {
        Self { bare: BareObservable::Site(designated), decoder: Decoder::MajorityVote, sector: None, lattice: None }
    }

    pub fn kitaev(lattice: TorusLattice, logical: LogicalOperator) -> Self {
        let sector = logical.sector;
        Self {
            bare: BareObservable::Logical(logical),
            decoder: Decoder::MinWeightMatching,
            sector: Some(sector),
            lattice: Some(lattice),
        }
    }

    /// Reads all values, takes the bare value, computes the correction from
    /// the same data and returns their product.
    pub fn measure(&self, config: &SpinConfig) -> Result<Measurement> {
        let bare = match &self.bare {
            BareObservable::Site(i) => {
                if *i >= config.len() {
                    return Err(Error::domain("designated", format!("site {i} outside {} sites", config.len())));
                }
                config.get(*i)
            }
            BareObservable::Logical(l) => bare_logical_value(config, l)?,
        };
        let correction = match (self.decoder, &self.bare) {
            (Decoder::MajorityVote, BareObservable::Site(i)) => decode_majority(config, *i),
            (Decoder::MinWeightMatching, BareObservable::Logical(l)) => {
                let lattice = self.lattice.as_ref().expect("matching decoder carries its lattice");
                let s = syndrome(lattice, config, l.sector)?;
                decode_matching(&s, lattice)?.correction_sign(l)
            }
            _ => return Err(Error::Precondition("decoder does not apply to this bare observable".into())),
        };
        Ok(Measurement { bare, correction, dressed: bare * correction })
    }
}

pub fn measure_dressed(config: &SpinConfig, obs: &DressedObservable) -> Result<i8> {
    Ok(obs.measure(config)?.dressed)
}

impl SignObservable for DressedObservable {
    fn name(&self) -> String {
        match (&self.bare, self.decoder) {
            (BareObservable::Site(i), _) => format!("dressed_majority_{i}"),
            (BareObservable::Logical(_), _) => "dressed_logical".into(),
        }
    }

    fn evaluate(&self, spins: &[i8]) -> i8 {
        let config = SpinConfig::from_values(spins.to_vec()).expect("±1 configuration");
        // sector configurations always have even syndromes
        self.measure(&config).expect("decoding an even syndrome").dressed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::HomologyLabel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ising_ground_state_and_flipped_site() {
        let obs = DressedObservable::ising_majority(0);
        let up = SpinConfig::all_up(10);
        assert_eq!(obs.measure(&up).unwrap(), Measurement { bare: 1, correction: 1, dressed: 1 });
        let mut c = up.clone();
        for i in [0, 3, 7] {
            c.flip(i);
        }
        // 7 of 10 up, designated spin down
        let m = obs.measure(&c).unwrap();
        assert_eq!((m.bare, m.correction, m.dressed), (-1, -1, 1));
    }

    fn combinations(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
            if cur.len() == k {
                f(cur);
                return;
            }
            for e in start..n {
                cur.push(e);
                rec(e + 1, n, k, cur, f);
                cur.pop();
            }
        }
        rec(0, n, k, &mut Vec::new(), f);
    }

    /// Whenever every minimum-weight correction found by exhaustive search
    /// gives the same logical sign, the matching decoder must give it too.
    #[test]
    fn kitaev_dressed_agrees_with_exhaustive_minimum_corrections() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut decided = 0;
        for l in [3usize, 4] {
            let lat = TorusLattice::new(l).unwrap();
            let z = LogicalOperator::canonical(&lat, Sector::Zlike, HomologyLabel::Horizontal);
            let obs = DressedObservable::kitaev(lat.clone(), z.clone());
            let n = lat.n_edges();
            for _ in 0..30 {
                let k = rng.random_range(1..=3);
                let mut c = SpinConfig::all_up(n);
                for _ in 0..k {
                    c.flip(rng.random_range(0..n));
                }
                let s = syndrome(&lat, &c, Sector::Zlike).unwrap();
                let mut signs = std::collections::BTreeSet::new();
                for size in 0..=4 {
                    combinations(n, size, &mut |chain| {
                        let mut t = c.clone();
                        t.apply_chain(chain);
                        if syndrome(&lat, &t, Sector::Zlike).unwrap().is_empty() {
                            signs.insert(bare_logical_value(&t, &z).unwrap());
                        }
                    });
                    if !signs.is_empty() {
                        let dec = decode_matching(&s, &lat).unwrap();
                        assert_eq!(dec.weight, size);
                        break;
                    }
                }
                if signs.len() == 1 {
                    decided += 1;
                    assert_eq!(obs.measure(&c).unwrap().dressed, *signs.iter().next().unwrap());
                }
            }
        }
        assert!(decided > 30);
    }

    #[test]
    fn single_crossing_error_is_corrected() {
        let lat = TorusLattice::new(4).unwrap();
        let z = LogicalOperator::canonical(&lat, Sector::Zlike, HomologyLabel::Horizontal);
        let obs = DressedObservable::kitaev(lat.clone(), z);
        let mut c = SpinConfig::all_up(lat.n_edges());
        c.flip(lat.h(0, 2));
        let m = obs.measure(&c).unwrap();
        assert_eq!((m.bare, m.correction, m.dressed), (-1, -1, 1));
        // a contractible loop (a star) leaves the outcome unchanged
        c.apply_chain(&lat.star(lat.cell(0, 1)));
        assert_eq!(obs.measure(&c).unwrap().dressed, 1);
    }
}
