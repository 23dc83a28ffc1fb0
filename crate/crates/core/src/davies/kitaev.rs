use serde::{Deserialize, Serialize};

use super::eigen::{lowest_eigenvalues, spectral_gap, EigenMethod, SpectralReport};
use super::generator::{FlipStructure, GeneratorKind, GeneratorMatrix, DEFAULT_STATE_CAP};
use super::sparse::CsrMatrix;
use super::{build_rates, DaviesRateTable, FlipModel, SpinSystem};
use crate::bath::SpectralDensityModel;
use crate::error::{Error, Result};
use crate::lattice::{HomologyLabel, LogicalOperator, Sector, TorusLattice};

/// Which bare logicals of the sector an observable carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Twist {
    None,
    Horizontal,
    Vertical,
    Both,
}

impl Twist {
    pub const ALL: [Twist; 4] = [Twist::None, Twist::Horizontal, Twist::Vertical, Twist::Both];
}

/// Syndrome-level description of a toric-code sector.
///
/// Observables commuting with the full Hamiltonian are, in the sector's
/// basis, functions `Z_u(x)·g(s(x))` of the syndrome `s` times a product
/// `Z_u` of bare logicals. 𝓛* maps each twist `u` into itself, acting on `g`
/// as `(T_u g)(s) = Σ_j q_j(s)(−1)^{u_j} g(s ⊕ ∂e_j) − exit(s) g(s)`, where
/// `u_j` marks edges on the chosen logical supports. `T_None` is the
/// lumped Markov chain of the anyon configuration.
#[derive(Debug, Clone)]
pub struct AnyonChain {
    lattice: TorusLattice,
    sector: Sector,
    coupling: f64,
    /// Cells toggled by each edge.
    masks: Vec<u64>,
    horizontal: Vec<bool>,
    vertical: Vec<bool>,
    by_class: Vec<f64>,
    beta: f64,
}

impl AnyonChain {
    pub fn new(model: &FlipModel, rates: &DaviesRateTable) -> Result<Self> {
        Self::with_cap(model, rates, DEFAULT_STATE_CAP)
    }

    pub fn with_cap(model: &FlipModel, rates: &DaviesRateTable, cap: usize) -> Result<Self> {
        let SpinSystem::KitaevSector { lattice, sector } = &model.system else {
            return Err(Error::domain("model", "anyon chain needs a toric-code sector"));
        };
        let cells = lattice.n_cells();
        let states = 1u128 << (cells - 1).min(127);
        if cells > 63 || states > cap as u128 {
            return Err(Error::Capacity { requested: states, cap: cap as u128 });
        }
        let masks = (0..lattice.n_edges())
            .map(|e| lattice.edge_cells(*sector, e).iter().fold(0u64, |m, &c| m | 1 << c))
            .collect();
        let on = |label| {
            let op = LogicalOperator::canonical(lattice, *sector, label);
            (0..lattice.n_edges()).map(|e| op.support.contains(&e)).collect::<Vec<bool>>()
        };
        Ok(Self {
            lattice: lattice.clone(),
            sector: *sector,
            coupling: model.coupling,
            masks,
            horizontal: on(HomologyLabel::Horizontal),
            vertical: on(HomologyLabel::Vertical),
            by_class: model.flip_rates(rates)?,
            beta: rates.beta,
        })
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn n_states(&self) -> usize {
        1 << (self.lattice.n_cells() - 1)
    }

    /// Full syndrome bits of a state index (the dropped last cell restores even parity).
    pub fn syndrome_bits(&self, state: usize) -> u64 {
        let s = state as u64;
        s | ((s.count_ones() as u64 & 1) << (self.lattice.n_cells() - 1))
    }

    pub fn state_index(&self, syndrome: u64) -> usize {
        (syndrome & ((1u64 << (self.lattice.n_cells() - 1)) - 1)) as usize
    }

    pub fn energy(&self, syndrome: u64) -> f64 {
        -self.coupling * (self.lattice.n_cells() as f64 - 2.0 * syndrome.count_ones() as f64)
    }

    fn rate(&self, syndrome: u64, edge: usize) -> f64 {
        let k: i32 = 2 - 2 * (syndrome & self.masks[edge]).count_ones() as i32;
        self.by_class[((k + 2) / 2) as usize]
    }

    fn sign(&self, twist: Twist, edge: usize) -> f64 {
        let flip = match twist {
            Twist::None => false,
            Twist::Horizontal => self.horizontal[edge],
            Twist::Vertical => self.vertical[edge],
            Twist::Both => self.horizontal[edge] ^ self.vertical[edge],
        };
        if flip {
            -1.0
        } else {
            1.0
        }
    }

    /// The untwisted block as a Markov generator on even syndromes.
    pub fn generator(&self) -> Result<GeneratorMatrix> {
        let n = self.n_states();
        let mut energies = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n);
        for x in 0..n {
            let s = self.syndrome_bits(x);
            energies.push(self.energy(s));
            rows.push(
                (0..self.masks.len())
                    .filter_map(|e| {
                        let q = self.rate(s, e);
                        (q > 0.0).then(|| (self.state_index(s ^ self.masks[e]), q))
                    })
                    .collect(),
            );
        }
        GeneratorMatrix::from_transitions(
            GeneratorKind::ClassicalSector,
            self.beta,
            energies,
            rows,
            Some(FlipStructure::Syndrome { n_cells: self.lattice.n_cells(), masks: self.masks.clone() }),
        )
    }

    /// Symmetrized `−T_u`: off-diagonal entries `−(−1)^{u_j}·√(q_j(s) q_j(s'))`
    /// summed over edges joining the same pair of syndromes.
    pub fn block(&self, twist: Twist) -> CsrMatrix {
        let n = self.n_states();
        let rows = (0..n)
            .map(|x| {
                let s = self.syndrome_bits(x);
                let mut exit = 0.0;
                let mut row: Vec<(usize, f64)> = Vec::with_capacity(self.masks.len() + 1);
                for e in 0..self.masks.len() {
                    let q = self.rate(s, e);
                    exit += q;
                    let t = s ^ self.masks[e];
                    let back = self.rate(t, e);
                    row.push((self.state_index(t), -self.sign(twist, e) * (q * back).sqrt()));
                }
                row.push((x, exit));
                row
            })
            .collect();
        CsrMatrix::from_rows(rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSpectrum {
    pub twist: Twist,
    /// Lowest eigenvalues of −T_u, ascending.
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub method: EigenMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KitaevGapReport {
    pub l: usize,
    pub beta: f64,
    pub states_per_block: usize,
    /// Gap of the lumped anyon chain.
    pub untwisted_gap: f64,
    pub untwisted: SpectralReport,
    pub twisted: Vec<BlockSpectrum>,
    /// Smallest decay rate of any commuting observable orthogonal to the identity.
    pub gap: f64,
    pub limiting_block: Twist,
}

/// Flat KMS bath and sizes for a sweep of [`kitaev_sector_gap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KitaevGapConfig {
    pub sizes: Vec<usize>,
    pub beta: f64,
    pub coupling: f64,
    pub lambda2: f64,
    pub amplitude: f64,
    pub cutoff: f64,
    /// Eigenvalues requested per block.
    pub eigenpairs: usize,
}

impl Default for KitaevGapConfig {
    fn default() -> Self {
        Self { sizes: vec![2, 3, 4], beta: 1.0, coupling: 1.0, lambda2: 1.0, amplitude: 1.0, cutoff: 10.0, eigenpairs: 2 }
    }
}

/// One [`KitaevGapReport`] per size, Zlike sector.
pub fn kitaev_gaps(cfg: &KitaevGapConfig) -> Result<Vec<KitaevGapReport>> {
    if cfg.sizes.is_empty() {
        return Err(Error::domain("sizes", "list at least one lattice size"));
    }
    if cfg.eigenpairs == 0 {
        return Err(Error::domain("eigenpairs", "must be ≥ 1"));
    }
    let bath = SpectralDensityModel::flat_kms(cfg.amplitude, cfg.cutoff, cfg.beta)?;
    cfg.sizes
        .iter()
        .map(|&l| {
            let model = FlipModel::kitaev(TorusLattice::new(l)?, Sector::Zlike, cfg.coupling)?;
            let rates = build_rates(&bath, &model.bohr_frequencies(), cfg.lambda2)?;
            kitaev_sector_gap(&model, &rates, cfg.eigenpairs)
        })
        .collect()
}

/// Spectral gap of 𝓛* on observables commuting with the toric-code
/// Hamiltonian, restricted to one Pauli sector.
pub fn kitaev_sector_gap(model: &FlipModel, rates: &DaviesRateTable, k: usize) -> Result<KitaevGapReport> {
    let chain = AnyonChain::new(model, rates)?;
    let untwisted = spectral_gap(&chain.generator()?, k.max(2))?;
    let mut gap = untwisted.gap;
    let mut limiting = Twist::None;
    let mut twisted = Vec::new();
    for twist in [Twist::Horizontal, Twist::Vertical, Twist::Both] {
        let block = chain.block(twist);
        let kk = k.max(1).min(chain.n_states());
        let pairs = lowest_eigenvalues(&block, kk, &[])?;
        if pairs.values[0] < gap {
            gap = pairs.values[0];
            limiting = twist;
        }
        twisted.push(BlockSpectrum { twist, eigenvalues: pairs.values, residuals: pairs.residuals, method: pairs.method });
    }
    Ok(KitaevGapReport {
        l: chain.lattice.size(),
        beta: rates.beta,
        states_per_block: chain.n_states(),
        untwisted_gap: untwisted.gap,
        untwisted,
        twisted,
        gap,
        limiting_block: limiting,
    })
}
