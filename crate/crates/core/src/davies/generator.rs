use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::sparse::CsrMatrix;
use super::{DaviesRateTable, FlipModel};
use crate::error::{Error, Result};

/// Default limit on generator state counts.
pub const DEFAULT_STATE_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    ClassicalSector,
    FullDavies,
}

/// How a coupling operator S_α acts on the state labels of a generator.
#[derive(Debug, Clone, PartialEq)]
pub enum FlipStructure {
    /// States are bit strings; S_α flips bit α.
    BitFlips { n_sites: usize },
    /// States are even syndromes with the last cell dropped; S_α toggles
    /// the cells in `masks[α]`.
    Syndrome { n_cells: usize, masks: Vec<u64> },
}

impl FlipStructure {
    pub fn n_couplings(&self) -> usize {
        match self {
            FlipStructure::BitFlips { n_sites } => *n_sites,
            FlipStructure::Syndrome { masks, .. } => masks.len(),
        }
    }

    pub fn target(&self, state: usize, alpha: usize) -> usize {
        match self {
            FlipStructure::BitFlips { .. } => state ^ (1 << alpha),
            FlipStructure::Syndrome { n_cells, masks } => {
                let low = (1u64 << (n_cells - 1)) - 1;
                ((state as u64) ^ (masks[alpha] & low)) as usize
            }
        }
    }
}

/// Continuous-time Markov generator with its Gibbs measure.
///
/// Stores out-rates `q(x → y)`; the forward generator is `W_yx = q(x → y)`,
/// `W_xx = −Σ_y q(x → y)`, so columns of `W` sum to zero. Its transpose
/// acts on observables as `𝓛*`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    pub kind: GeneratorKind,
    pub beta: f64,
    energies: Vec<f64>,
    gibbs: Vec<f64>,
    log_partition: f64,
    out: CsrMatrix,
    exit: Vec<f64>,
    flips: Option<FlipStructure>,
}

impl GeneratorMatrix {
    /// `rows[x]` lists `(y, q(x → y))`; duplicates are summed, self loops dropped.
    pub fn from_transitions(
        kind: GeneratorKind,
        beta: f64,
        energies: Vec<f64>,
        rows: Vec<Vec<(usize, f64)>>,
        flips: Option<FlipStructure>,
    ) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::domain("beta", format!("generator needs finite β ≥ 0, got {beta}")));
        }
        if energies.len() != rows.len() {
            return Err(Error::GridMismatch(format!("{} energies for {} states", energies.len(), rows.len())));
        }
        let n = rows.len();
        let rows: Vec<Vec<(usize, f64)>> =
            rows.into_iter().enumerate().map(|(x, r)| r.into_iter().filter(|&(y, _)| y != x).collect()).collect();
        for (x, r) in rows.iter().enumerate() {
            if let Some(&(y, q)) = r.iter().find(|&&(y, q)| y >= n || !(q >= 0.0) || !q.is_finite()) {
                return Err(Error::domain("rates", format!("bad transition {x} → {y} with rate {q}")));
            }
        }
        let out = CsrMatrix::from_rows(rows);
        let exit = (0..n).map(|x| out.row(x).map(|(_, q)| q).sum()).collect();
        let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = energies.iter().map(|e| (-beta * (e - e_min)).exp()).collect();
        let z: f64 = weights.iter().sum();
        let gibbs: Vec<f64> = weights.iter().map(|w| w / z).collect();
        if gibbs.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::numerical("gibbs", "Gibbs weight underflowed to zero; lower β"));
        }
        let log_partition = z.ln() - beta * e_min;
        Ok(Self { kind, beta, energies, gibbs, log_partition, out, exit, flips })
    }

    pub fn dim(&self) -> usize {
        self.exit.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn gibbs(&self) -> &[f64] {
        &self.gibbs
    }

    /// ln Σ_x e^{−βE_x}.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    pub fn exit_rates(&self) -> &[f64] {
        &self.exit
    }

    pub fn flips(&self) -> Option<&FlipStructure> {
        self.flips.as_ref()
    }

    pub fn transitions(&self, x: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.out.row(x)
    }

    pub fn rate(&self, x: usize, y: usize) -> f64 {
        self.out.get(x, y)
    }

    pub fn nnz(&self) -> usize {
        self.out.nnz()
    }

    /// `(𝓛* f)(x) = Σ_y q(x → y)(f(y) − f(x))`.
    pub fn apply_observable(&self, f: &[f64], out: &mut [f64]) {
        for x in 0..self.dim() {
            out[x] = self.out.row(x).map(|(y, q)| q * (f[y] - f[x])).sum();
        }
    }

    /// `(W p)(y) = Σ_x p(x) q(x → y) − p(y)·exit(y)`.
    pub fn apply_forward(&self, p: &[f64], out: &mut [f64]) {
        for (y, o) in out.iter_mut().enumerate() {
            *o = -p[y] * self.exit[y];
        }
        for x in 0..self.dim() {
            for (y, q) in self.out.row(x) {
                out[y] += p[x] * q;
            }
        }
    }

    /// ‖W π‖₁.
    pub fn stationarity_residual(&self) -> f64 {
        let mut r = vec![0.0; self.dim()];
        self.apply_forward(&self.gibbs, &mut r);
        r.iter().map(|v| v.abs()).sum()
    }

    /// Largest |Σ_y W_yx| over columns, summed independently of the cached exit rates.
    pub fn column_sum_residual(&self) -> f64 {
        (0..self.dim())
            .map(|x| {
                let mut s = -self.exit[x];
                for (_, q) in self.out.row(x).collect::<Vec<_>>().into_iter().rev() {
                    s += q;
                }
                s.abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest relative mismatch `|π_x q(x→y) − π_y q(y→x)| / max(…)` over pairs.
    pub fn detailed_balance_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..self.dim() {
            for (y, q) in self.out.row(x) {
                let a = self.gibbs[x] * q;
                let b = self.gibbs[y] * self.out.get(y, x);
                let scale = a.max(b);
                if scale > 0.0 {
                    worst = worst.max((a - b).abs() / scale);
                }
            }
        }
        worst
    }

    /// `−Π^{1/2} 𝓛* Π^{−1/2}` as a sparse matrix: positive semidefinite and
    /// symmetric when detailed balance holds.
    pub fn symmetrized(&self) -> CsrMatrix {
        let half = 0.5 * self.beta;
        let rows = (0..self.dim())
            .map(|x| {
                let mut r: Vec<(usize, f64)> = self
                    .out
                    .row(x)
                    .map(|(y, q)| (y, -q * (-half * (self.energies[x] - self.energies[y])).exp()))
                    .collect();
                r.push((x, self.exit[x]));
                r
            })
            .collect();
        CsrMatrix::from_rows(rows)
    }

    /// Copy with `q(x → y)` multiplied by `factor`.
    pub fn with_perturbed_rate(&self, x: usize, y: usize, factor: f64) -> Result<Self> {
        if self.rate(x, y) == 0.0 {
            return Err(Error::domain("transition", format!("no transition {x} → {y}")));
        }
        let rows = (0..self.dim())
            .map(|s| self.out.row(s).map(|(t, q)| if (s, t) == (x, y) { (t, q * factor) } else { (t, q) }).collect())
            .collect();
        Self::from_transitions(self.kind, self.beta, self.energies.clone(), rows, self.flips.clone())
    }

    /// Writes `row,col,value` triplets of the forward generator W.
    pub fn write_triplets<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["row", "col", "value"])?;
        for x in 0..self.dim() {
            let mut col: Vec<(usize, f64)> = self.out.row(x).map(|(y, q)| (y, q)).collect();
            col.push((x, -self.exit[x]));
            col.sort_by_key(|p| p.0);
            for (y, v) in col {
                wtr.write_record(&[y.to_string(), x.to_string(), format!("{v:e}")])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn sidecar(&self) -> GeneratorSidecar {
        GeneratorSidecar {
            kind: self.kind,
            dimension: self.dim(),
            nnz: self.nnz() + self.dim(),
            beta: self.beta,
            log_partition: self.log_partition,
            orientation: "column-stochastic forward generator: W[row=y, col=x] = rate(x -> y)",
        }
    }

    /// Triplet CSV plus JSON sidecar at `<stem>.csv` / `<stem>.json`.
    pub fn export(&self, stem: impl AsRef<Path>) -> Result<()> {
        let stem = stem.as_ref();
        let csv_path = stem.with_extension("csv");
        self.write_triplets(std::fs::File::create(&csv_path)?)?;
        std::fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&self.sidecar())?)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorSidecar {
    pub kind: GeneratorKind,
    pub dimension: usize,
    pub nnz: usize,
    pub beta: f64,
    pub log_partition: f64,
    pub orientation: &'static str,
}

pub fn build_classical_generator(model: &FlipModel, rates: &DaviesRateTable) -> Result<GeneratorMatrix> {
    build_classical_generator_with_cap(model, rates, DEFAULT_STATE_CAP)
}

/// Single-flip generator on all `2^n` configurations: flipping site `i`
/// happens at rate `rate(−ΔE_i)`.
pub fn build_classical_generator_with_cap(
    model: &FlipModel,
    rates: &DaviesRateTable,
    cap: usize,
) -> Result<GeneratorMatrix> {
    let n = model.n_sites();
    let states = if n >= 64 { u128::MAX } else { 1u128 << n };
    if states > cap as u128 {
        return Err(Error::Capacity { requested: states, cap: cap as u128 });
    }
    let by_class = model.flip_rates(rates)?;
    let dim = states as usize;
    let mut rows = Vec::with_capacity(dim);
    let mut energies = Vec::with_capacity(dim);
    for x in 0..dim as u64 {
        energies.push(model.energy_bits(x));
        rows.push(
            (0..n)
                .filter_map(|i| {
                    let q = by_class[model.class_index(model.class_bits(x, i))];
                    (q > 0.0).then_some(((x ^ 1 << i) as usize, q))
                })
                .collect(),
        );
    }
    GeneratorMatrix::from_transitions(
        GeneratorKind::ClassicalSector,
        rates.beta,
        energies,
        rows,
        Some(FlipStructure::BitFlips { n_sites: n }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::SpectralDensityModel;
    use crate::davies::build_rates;
    use crate::lattice::{IsingLattice, Sector, TorusLattice};

    fn flat(beta: f64) -> SpectralDensityModel {
        SpectralDensityModel::flat_kms(1.0, 10.0, beta).unwrap()
    }

    #[test]
    fn ising_ring_infinite_temperature() {
        let m = FlipModel::ising(IsingLattice::ring(3).unwrap(), 1.0).unwrap();
        let t = build_rates(&flat(0.0), &m.bohr_frequencies(), 1.0).unwrap();
        let g = build_classical_generator(&m, &t).unwrap();
        assert_eq!(g.dim(), 8);
        assert!(g.exit_rates().iter().all(|&e| e == 3.0));
        assert!(g.gibbs().iter().all(|&p| (p - 0.125).abs() < 1e-15));
        assert!(g.stationarity_residual() < 1e-15);
    }

    #[test]
    fn kitaev_columns_sum_to_zero() {
        for beta in [0.0, 0.5, 1.0, 3.0] {
            let m = FlipModel::kitaev(TorusLattice::new(2).unwrap(), Sector::Zlike, 1.0).unwrap();
            let t = build_rates(&flat(beta), &m.bohr_frequencies(), 1.0).unwrap();
            let g = build_classical_generator(&m, &t).unwrap();
            assert_eq!(g.dim(), 256);
            assert!(g.column_sum_residual() < 1e-12);
            assert!(g.detailed_balance_residual() < 1e-10);
            assert!(g.stationarity_residual() < 1e-10);
            assert!(g.symmetrized().asymmetry() < 1e-12);
        }
    }

    #[test]
    fn capacity_error() {
        let m = FlipModel::ising(IsingLattice::square(5).unwrap(), 1.0).unwrap();
        let t = build_rates(&flat(1.0), &m.bohr_frequencies(), 1.0).unwrap();
        assert!(matches!(build_classical_generator(&m, &t), Err(Error::Capacity { .. })));
    }

    #[test]
    fn perturbation_breaks_balance() {
        let m = FlipModel::ising(IsingLattice::ring(4).unwrap(), 1.0).unwrap();
        let t = build_rates(&flat(1.0), &m.bohr_frequencies(), 1.0).unwrap();
        let g = build_classical_generator(&m, &t).unwrap().with_perturbed_rate(0, 1, 1.1).unwrap();
        assert!(g.detailed_balance_residual() > 0.05);
        assert!(g.stationarity_residual() > 1e-4);
    }

    #[test]
    fn triplets_and_sidecar() {
        let m = FlipModel::ising(IsingLattice::ring(3).unwrap(), 1.0).unwrap();
        let t = build_rates(&flat(1.0), &m.bohr_frequencies(), 1.0).unwrap();
        let g = build_classical_generator(&m, &t).unwrap();
        let mut buf = Vec::new();
        g.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 8 * 4);
        let mut col_sums = [0.0f64; 8];
        for line in text.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            col_sums[f[1].parse::<usize>().unwrap()] += f[2].parse::<f64>().unwrap();
        }
        assert!(col_sums.iter().all(|s| s.abs() < 1e-14));
        assert_eq!(g.sidecar().dimension, 8);
    }
}
