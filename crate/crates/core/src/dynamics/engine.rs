use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::davies::FlipModel;

/// Rejection-free single-flip kinetic Monte Carlo state.
///
/// Sites are kept in buckets by their class `k` (ΔE = 2Jk); a bucket is
/// chosen with probability proportional to `size × rate`, then a member
/// uniformly.
#[derive(Debug, Clone)]
pub struct KmcEngine {
    spins: Vec<i8>,
    terms: Vec<Vec<usize>>,
    site_terms: Vec<Vec<usize>>,
    term_val: Vec<i8>,
    class: Vec<i32>,
    max_class: i32,
    class_rates: Vec<f64>,
    buckets: Vec<Vec<u32>>,
    pos: Vec<u32>,
    time: f64,
    events: u64,
}

impl KmcEngine {
    /// `class_rates[(k + max_class) / 2]` is the flip rate of class `k`.
    pub fn new(model: &FlipModel, class_rates: Vec<f64>, spins: Vec<i8>) -> Self {
        let n = model.n_sites();
        assert_eq!(spins.len(), n, "configuration length");
        assert_eq!(class_rates.len(), model.classes().len(), "one rate per class");
        let terms = model.terms();
        let mut site_terms = vec![Vec::new(); n];
        for (t, sites) in terms.iter().enumerate() {
            for &i in sites {
                site_terms[i].push(t);
            }
        }
        let max_class = model.max_class();
        let mut e = Self {
            spins,
            term_val: vec![1; terms.len()],
            terms,
            site_terms,
            class: vec![0; n],
            max_class,
            buckets: vec![Vec::new(); class_rates.len()],
            class_rates,
            pos: vec![0; n],
            time: 0.0,
            events: 0,
        };
        for t in 0..e.terms.len() {
            e.term_val[t] = e.terms[t].iter().map(|&i| e.spins[i]).product();
        }
        for i in 0..n {
            let k = e.local_class(i);
            e.class[i] = k;
            let b = e.bucket_of(k);
            e.pos[i] = e.buckets[b].len() as u32;
            e.buckets[b].push(i as u32);
        }
        e
    }

    fn local_class(&self, i: usize) -> i32 {
        self.site_terms[i].iter().map(|&t| self.term_val[t] as i32).sum()
    }

    fn bucket_of(&self, k: i32) -> usize {
        ((k + self.max_class) / 2) as usize
    }

    fn move_site(&mut self, i: usize, k: i32) {
        let old = self.bucket_of(self.class[i]);
        let new = self.bucket_of(k);
        self.class[i] = k;
        if old == new {
            return;
        }
        let p = self.pos[i] as usize;
        let last = *self.buckets[old].last().unwrap();
        self.buckets[old][p] = last;
        self.pos[last as usize] = p as u32;
        self.buckets[old].pop();
        self.pos[i] = self.buckets[new].len() as u32;
        self.buckets[new].push(i as u32);
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn class_of(&self, i: usize) -> i32 {
        self.class[i]
    }

    pub fn set_class_rates(&mut self, rates: Vec<f64>) {
        assert_eq!(rates.len(), self.class_rates.len());
        self.class_rates = rates;
    }

    pub fn total_rate(&self) -> f64 {
        self.buckets.iter().zip(&self.class_rates).map(|(b, r)| b.len() as f64 * r).sum()
    }

    /// Flips site `i` and updates every class it touches. Does not advance time.
    pub fn flip(&mut self, i: usize) {
        self.spins[i] = -self.spins[i];
        for idx in 0..self.site_terms[i].len() {
            let t = self.site_terms[i][idx];
            self.term_val[t] = -self.term_val[t];
            for jdx in 0..self.terms[t].len() {
                let j = self.terms[t][jdx];
                let k = self.local_class(j);
                if k != self.class[j] {
                    self.move_site(j, k);
                }
            }
        }
    }

    fn choose(&self, rng: &mut ChaCha8Rng, total: f64) -> usize {
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (b, (members, r)) in self.buckets.iter().zip(&self.class_rates).enumerate() {
            if members.is_empty() || *r <= 0.0 {
                continue;
            }
            acc += members.len() as f64 * r;
            pick = Some(b);
            if u < acc {
                break;
            }
        }
        let members = &self.buckets[pick.expect("positive total rate")];
        members[rng.random_range(0..members.len())] as usize
    }

    /// Runs events until the clock reaches `t`. The pending waiting time at
    /// the boundary is discarded, which is exact for exponential clocks.
    pub fn advance_to(&mut self, t: f64, rng: &mut ChaCha8Rng) {
        while self.time < t {
            let total = self.total_rate();
            if total <= 0.0 {
                self.time = t;
                return;
            }
            let dt = -(1.0 - rng.random::<f64>()).ln() / total;
            if self.time + dt > t {
                self.time = t;
                return;
            }
            self.time += dt;
            let i = self.choose(rng, total);
            self.flip(i);
            self.events += 1;
        }
    }

    /// Performs exactly `n` events, advancing the clock.
    pub fn run_events(&mut self, n: u64, rng: &mut ChaCha8Rng) {
        for _ in 0..n {
            let total = self.total_rate();
            if total <= 0.0 {
                return;
            }
            self.time += -(1.0 - rng.random::<f64>()).ln() / total;
            let i = self.choose(rng, total);
            self.flip(i);
            self.events += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{IsingLattice, Sector, SpinConfig, TorusLattice};
    use rand::SeedableRng;

    #[test]
    fn classes_track_the_configuration() {
        let models = [
            FlipModel::ising(IsingLattice::square(4).unwrap(), 1.0).unwrap(),
            FlipModel::kitaev(TorusLattice::new(3).unwrap(), Sector::Zlike, 1.0).unwrap(),
        ];
        for m in &models {
            let n = m.n_sites();
            let rates = vec![1.0; m.classes().len()];
            let mut e = KmcEngine::new(m, rates, vec![1; n]);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            e.run_events(500, &mut rng);
            let cfg = SpinConfig::from_values(e.spins().to_vec()).unwrap();
            for i in 0..n {
                assert_eq!(e.class_of(i), m.class(&cfg, i));
            }
            let counted: usize = e.buckets.iter().map(Vec::len).sum();
            assert_eq!(counted, n);
        }
    }

    #[test]
    fn frozen_when_all_rates_vanish() {
        let m = FlipModel::ising(IsingLattice::ring(6).unwrap(), 1.0).unwrap();
        // ground state: every site has class 2, which is uphill
        let mut e = KmcEngine::new(&m, vec![1.0, 1.0, 0.0], vec![1; 6]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        e.advance_to(100.0, &mut rng);
        assert_eq!(e.events(), 0);
        assert_eq!(e.time(), 100.0);
    }
}
