//! Metropolis sampling over discrete auxiliary fields.
//!
//! Expanding both Gutzwiller factors of `<psi_g|O|psi_g>` with the pair identity gives a
//! sum over ket fields `s1` and bra fields `s2` of `<psi0| U(s2) O U(s1) |psi0>`, where
//! `U(s)` is the ordered product of fermionic Givens rotations by `+-lambda` over sites
//! and color pairs. The `O = I` terms are the configuration weights. Generators are real,
//! so the bra side `<psi0| U(s2)` is the transpose of `U(s2)^T psi0`: the same gate
//! sequence reversed with negated angles. Weights are dot products of a bra-layer state
//! and a ket-layer state.

use std::borrow::Cow;
use std::io::{self, Write};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::encoding::{Labeling, Observables, PauliSum, QubitLabeling};
use crate::error::{Error, Result};
use crate::gutzwiller::{hs_params, GutzwillerParams};
use crate::model::{LatticeSpec, COLOR_PAIRS, N_COLORS};
use crate::oracle::InteractionTable;
use crate::rng::{stream_rng, task_stream, Rng};
use crate::statevector::{apply_fgivens_real, StateVector};

/// Weights at or below this value break the sampling contract.
pub const MIN_WEIGHT: f64 = 1e-12;

/// Largest per-layer state table, in stored amplitudes, built before falling back to
/// applying gates for every proposal.
pub const TABLE_LIMIT: usize = 1 << 24;

/// Color-pair visiting order within a site during a sweep: 12, 23, 13.
pub const SWEEP_PAIR_ORDER: [usize; 3] = [0, 2, 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Layer {
    /// Fields of the Gutzwiller factor acting on the ket.
    Ket,
    /// Fields of the factor acting on the bra.
    Bra,
}

/// Auxiliary fields `s[site][pair][layer]`, stored as one bit mask per layer with bit
/// `3 site + pair` set when the field is `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AuxFieldConfig {
    n_site: usize,
    ket: u64,
    bra: u64,
}

impl AuxFieldConfig {
    /// All fields `+1`.
    pub fn new(n_site: usize) -> Result<Self> {
        if n_site == 0 || N_COLORS * n_site > 63 {
            return Err(Error::CapacityExceeded { requested: N_COLORS * n_site, max: 63 });
        }
        Ok(Self { n_site, ket: 0, bra: 0 })
    }

    pub fn from_masks(n_site: usize, ket: u64, bra: u64) -> Result<Self> {
        let c = Self::new(n_site)?;
        if (ket | bra) >> c.fields_per_layer() != 0 {
            return Err(Error::Config(format!("field mask exceeds {} bits", c.fields_per_layer())));
        }
        Ok(Self { ket, bra, ..c })
    }

    pub fn n_site(&self) -> usize {
        self.n_site
    }

    pub fn fields_per_layer(&self) -> usize {
        N_COLORS * self.n_site
    }

    /// Total number of fields, `6 n_site`.
    pub fn len(&self) -> usize {
        2 * self.fields_per_layer()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mask(&self, layer: Layer) -> u64 {
        match layer {
            Layer::Ket => self.ket,
            Layer::Bra => self.bra,
        }
    }

    pub fn get(&self, site: usize, pair: usize, layer: Layer) -> i8 {
        if self.mask(layer) >> (N_COLORS * site + pair) & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn flip(&mut self, site: usize, pair: usize, layer: Layer) {
        let bit = 1u64 << (N_COLORS * site + pair);
        match layer {
            Layer::Ket => self.ket ^= bit,
            Layer::Bra => self.bra ^= bit,
        }
    }

    /// Index in `0..2^(6N)`: ket mask in the low bits.
    pub fn index(&self) -> usize {
        (self.ket | self.bra << self.fields_per_layer()) as usize
    }
}

/// Metropolis protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub n_warmup: usize,
    pub n_measure: usize,
    pub n_chains: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { n_warmup: 2000, n_measure: 2000, n_chains: 16, seed: 0 }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_warmup == 0 || self.n_measure == 0 || self.n_chains == 0 {
            return Err(Error::Config("n_warmup, n_measure and n_chains must be positive".into()));
        }
        Ok(())
    }
}

/// Pooled estimate over independent chains.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorRecord {
    pub chain_means: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation of the chain means over `sqrt(n_chains)`.
    pub stderr: f64,
}

impl EstimatorRecord {
    pub fn from_chain_means(chain_means: Vec<f64>) -> Self {
        let n = chain_means.len() as f64;
        let mean = chain_means.iter().sum::<f64>() / n;
        let stderr = if chain_means.len() > 1 {
            let var = chain_means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Self { chain_means, mean, stderr }
    }
}

/// Local estimators of one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalEstimates {
    pub weight: f64,
    pub kinetic: f64,
    pub double_occupancy: f64,
    pub triple: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    /// Pick `Table` when it fits in [`TABLE_LIMIT`].
    Auto,
    /// Precompute `U(s) psi0` for every layer mask.
    Table,
    /// Apply the gate sequence for every proposal.
    Direct,
}

#[derive(Debug, Clone)]
enum Storage {
    Table { width: usize, kets: Vec<f64>, bras: Vec<f64>, kinetic: Vec<f64> },
    Direct,
}

/// Configuration weights and local estimators for one trial state and one `g`.
///
/// Everything lives in the color-uniform labeling; in table mode the stored vectors are
/// restricted to the particle-number sectors reachable from the trial state.
#[derive(Debug, Clone)]
pub struct WeightModel {
    n_site: usize,
    params: GutzwillerParams,
    rotations: Vec<(usize, usize)>,
    trial: Vec<f64>,
    support: Vec<usize>,
    interaction: Vec<f64>,
    triple: Vec<f64>,
    kinetic: PauliSum,
    storage: Storage,
}

fn real_amplitudes(state: &StateVector) -> Result<Vec<f64>> {
    let worst = state.amplitudes().iter().map(|a| a.im.abs()).fold(0.0, f64::max);
    if worst > 1e-12 {
        return Err(Error::InvalidTrialState(format!("amplitudes must be real (imaginary part {worst:e})")));
    }
    Ok(state.amplitudes().iter().map(|a| a.re).collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn weighted_dot(a: &[f64], w: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(w).zip(b).map(|((x, d), y)| x * d * y).sum()
}

impl WeightModel {
    pub fn new(lattice: &LatticeSpec, hopping: f64, trial: &StateVector, g: f64, mode: WeightMode) -> Result<Self> {
        let n = lattice.n_site();
        let labeling = QubitLabeling::new(Labeling::ColorUniform, n);
        if trial.n_qubits() != labeling.n_qubits() {
            return Err(Error::InvalidTrialState(format!(
                "{} qubits for a {}-mode lattice",
                trial.n_qubits(),
                labeling.n_qubits()
            )));
        }
        AuxFieldConfig::new(n)?;
        let params = hs_params(g)?;
        let trial = real_amplitudes(trial)?;
        let rotations = (0..n)
            .flat_map(|i| COLOR_PAIRS.iter().map(move |&(a, b)| (labeling.qubit(i, a), labeling.qubit(i, b))))
            .collect();
        let table = InteractionTable::new(labeling)?;
        let kinetic = Observables::new(lattice, hopping, labeling).kinetic;

        let counts: Vec<u32> = {
            let mut c: Vec<u32> = trial
                .iter()
                .enumerate()
                .filter(|(_, a)| a.abs() > 0.0)
                .map(|(z, _)| z.count_ones())
                .collect();
            c.sort_unstable();
            c.dedup();
            c
        };
        let sector: Vec<usize> = (0..trial.len()).filter(|z| counts.contains(&z.count_ones())).collect();
        let n_masks = 1usize << (N_COLORS * n);
        let use_table = match mode {
            WeightMode::Table => true,
            WeightMode::Direct => false,
            WeightMode::Auto => n_masks.saturating_mul(sector.len()) <= TABLE_LIMIT,
        };
        let support = if use_table { sector } else { (0..trial.len()).collect() };
        let mut model = Self {
            n_site: n,
            params,
            rotations,
            interaction: support.iter().map(|&z| table.interaction()[z]).collect(),
            triple: support.iter().map(|&z| table.triple()[z]).collect(),
            support,
            trial,
            kinetic,
            storage: Storage::Direct,
        };
        if use_table {
            model.storage = model.build_table(n_masks);
        }
        Ok(model)
    }

    fn build_table(&self, n_masks: usize) -> Storage {
        let width = self.support.len();
        let mut kets = vec![0.0; n_masks * width];
        let mut bras = vec![0.0; n_masks * width];
        let mut kinetic = vec![0.0; n_masks * width];
        let fill = |mask: usize, (ket, (bra, kin)): (&mut [f64], (&mut [f64], &mut [f64]))| {
            let full = self.full_layer_state(mask as u64, Layer::Ket);
            let mut k = vec![0.0; full.len()];
            self.kinetic.apply_real(&full, &mut k);
            let full_bra = self.full_layer_state(mask as u64, Layer::Bra);
            for (j, &z) in self.support.iter().enumerate() {
                ket[j] = full[z];
                kin[j] = k[z];
                bra[j] = full_bra[z];
            }
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            kets.par_chunks_mut(width)
                .zip(bras.par_chunks_mut(width).zip(kinetic.par_chunks_mut(width)))
                .enumerate()
                .for_each(|(m, rows)| fill(m, rows));
        }
        #[cfg(not(feature = "parallel"))]
        for (m, rows) in kets.chunks_mut(width).zip(bras.chunks_mut(width).zip(kinetic.chunks_mut(width))).enumerate() {
            fill(m, rows);
        }
        Storage::Table { width, kets, bras, kinetic }
    }

    pub fn n_site(&self) -> usize {
        self.n_site
    }

    pub fn params(&self) -> GutzwillerParams {
        self.params
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self.storage, Storage::Table { .. })
    }

    fn angle(&self, mask: u64, bit: usize) -> f64 {
        if mask >> bit & 1 == 1 {
            -self.params.lambda
        } else {
            self.params.lambda
        }
    }

    /// `U(s) psi0` for the ket layer, `U(s)^T psi0` for the bra layer, over the full register.
    pub fn full_layer_state(&self, mask: u64, layer: Layer) -> Vec<f64> {
        let mut v = self.trial.clone();
        match layer {
            Layer::Ket => {
                for (bit, &(a, b)) in self.rotations.iter().enumerate() {
                    apply_fgivens_real(&mut v, a, b, self.angle(mask, bit));
                }
            }
            Layer::Bra => {
                for (bit, &(a, b)) in self.rotations.iter().enumerate().rev() {
                    apply_fgivens_real(&mut v, a, b, -self.angle(mask, bit));
                }
            }
        }
        v
    }

    /// [`Self::full_layer_state`] restricted to the stored support.
    pub fn layer_state(&self, mask: u64, layer: Layer) -> Cow<'_, [f64]> {
        match &self.storage {
            Storage::Table { width, kets, bras, .. } => {
                let m = mask as usize;
                let table = match layer {
                    Layer::Ket => kets,
                    Layer::Bra => bras,
                };
                Cow::Borrowed(&table[m * width..(m + 1) * width])
            }
            Storage::Direct => Cow::Owned(self.full_layer_state(mask, layer)),
        }
    }

    fn kinetic_state(&self, mask: u64, state: &[f64]) -> Cow<'_, [f64]> {
        match &self.storage {
            Storage::Table { width, kinetic, .. } => {
                let m = mask as usize;
                Cow::Borrowed(&kinetic[m * width..(m + 1) * width])
            }
            Storage::Direct => {
                let mut k = vec![0.0; state.len()];
                self.kinetic.apply_real(state, &mut k);
                Cow::Owned(k)
            }
        }
    }

    fn checked(&self, weight: f64, config: &AuxFieldConfig) -> Result<f64> {
        if weight > MIN_WEIGHT {
            Ok(weight)
        } else {
            Err(Error::NonpositiveWeight {
                weight,
                context: format!("g = {}, ket mask {:#x}, bra mask {:#x}", self.params.g, config.ket, config.bra),
            })
        }
    }

    fn check_config(&self, config: &AuxFieldConfig) -> Result<()> {
        if config.n_site != self.n_site {
            return Err(Error::Config(format!("configuration for {} sites, model has {}", config.n_site, self.n_site)));
        }
        Ok(())
    }

    /// `<psi0| U(s2) U(s1) |psi0>`, which must exceed [`MIN_WEIGHT`].
    pub fn weight(&self, config: &AuxFieldConfig) -> Result<f64> {
        self.check_config(config)?;
        let w = dot(&self.layer_state(config.bra, Layer::Bra), &self.layer_state(config.ket, Layer::Ket));
        self.checked(w, config)
    }

    /// The weight by applying the ket sequence, then the bra sequence, to `psi0` and
    /// projecting back onto `psi0`. Independent of the layer-state tables.
    pub fn weight_by_application(&self, config: &AuxFieldConfig) -> Result<f64> {
        self.check_config(config)?;
        let mut v = self.full_layer_state(config.ket, Layer::Ket);
        for (bit, &(a, b)) in self.rotations.iter().enumerate() {
            apply_fgivens_real(&mut v, a, b, self.angle(config.bra, bit));
        }
        Ok(dot(&self.trial, &v))
    }

    /// `<psi0|U(s2) O U(s1)|psi0> / weight` for any real observable.
    pub fn local_estimator(&self, config: &AuxFieldConfig, op: &PauliSum) -> Result<f64> {
        let w = self.weight(config)?;
        let ket = self.full_layer_state(config.ket, Layer::Ket);
        let bra = self.full_layer_state(config.bra, Layer::Bra);
        let mut o = vec![0.0; ket.len()];
        op.apply_real(&ket, &mut o);
        Ok(dot(&bra, &o) / w)
    }

    /// Weight and the kinetic, `D` and `P3` local estimators.
    pub fn local_estimates(&self, config: &AuxFieldConfig) -> Result<LocalEstimates> {
        self.check_config(config)?;
        let ket = self.layer_state(config.ket, Layer::Ket);
        let bra = self.layer_state(config.bra, Layer::Bra);
        self.estimates_from(config, &bra, &ket)
    }

    fn estimates_from(&self, config: &AuxFieldConfig, bra: &[f64], ket: &[f64]) -> Result<LocalEstimates> {
        let w = self.checked(dot(bra, ket), config)?;
        let k = self.kinetic_state(config.ket, ket);
        Ok(LocalEstimates {
            weight: w,
            kinetic: dot(bra, &k) / w,
            double_occupancy: weighted_dot(bra, &self.interaction, ket) / w,
            triple: weighted_dot(bra, &self.triple, ket) / w,
        })
    }

    /// Exhaustive sum over all `2^(6N)` configurations, for at most two sites.
    pub fn enumerate(&self) -> Result<Enumeration> {
        if self.n_site > 2 {
            return Err(Error::CapacityExceeded { requested: self.n_site, max: 2 });
        }
        let n_masks = 1u64 << (N_COLORS * self.n_site);
        let mut weights = Vec::with_capacity((n_masks * n_masks) as usize);
        let (mut k, mut d, mut p3) = (0.0, 0.0, 0.0);
        for bra in 0..n_masks {
            for ket in 0..n_masks {
                let e = self.local_estimates(&AuxFieldConfig { n_site: self.n_site, ket, bra })?;
                weights.push(e.weight);
                k += e.weight * e.kinetic;
                d += e.weight * e.double_occupancy;
                p3 += e.weight * e.triple;
            }
        }
        let total: f64 = weights.iter().sum();
        Ok(Enumeration {
            probabilities: weights.iter().map(|w| w / total).collect(),
            total_weight: total,
            kinetic: k / total,
            double_occupancy: d / total,
            triple: p3 / total,
        })
    }
}

/// Exact distribution and expectation values from the full configuration sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    /// `P_s`, indexed by [`AuxFieldConfig::index`].
    pub probabilities: Vec<f64>,
    pub total_weight: f64,
    pub kinetic: f64,
    pub double_occupancy: f64,
    pub triple: f64,
}

/// A Markov chain over auxiliary fields with its cached layer states.
#[derive(Debug, Clone)]
pub struct Chain<'a> {
    config: AuxFieldConfig,
    ket: Cow<'a, [f64]>,
    bra: Cow<'a, [f64]>,
    weight: f64,
    proposals: u64,
    accepted: u64,
    vanishing: u64,
}

impl<'a> Chain<'a> {
    /// Starts from the all-`+1` configuration.
    pub fn new(model: &'a WeightModel) -> Result<Self> {
        let config = AuxFieldConfig::new(model.n_site)?;
        let ket = model.layer_state(0, Layer::Ket);
        let bra = model.layer_state(0, Layer::Bra);
        let weight = model.checked(dot(&bra, &ket), &config)?;
        Ok(Self { config, ket, bra, weight, proposals: 0, accepted: 0, vanishing: 0 })
    }

    pub fn config(&self) -> &AuxFieldConfig {
        &self.config
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Proposals rejected for a roundoff-level weight.
    pub fn vanishing_proposals(&self) -> u64 {
        self.vanishing
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.proposals.max(1) as f64
    }

    pub fn estimates(&self, model: &WeightModel) -> Result<LocalEstimates> {
        model.estimates_from(&self.config, &self.bra, &self.ket)
    }
}

/// One sweep of single-field proposals: sites in order, pairs 12, 23, 13 within a site,
/// ket field before bra field. Returns the number of accepted proposals.
///
/// Proposals with `|weight| <= MIN_WEIGHT` are rejected; a proposal weight below
/// `-MIN_WEIGHT` aborts with [`Error::NonpositiveWeight`].
pub fn metropolis_sweep<'a>(model: &'a WeightModel, chain: &mut Chain<'a>, rng: &mut Rng) -> Result<usize> {
    let mut accepted = 0;
    for site in 0..model.n_site {
        for &pair in &SWEEP_PAIR_ORDER {
            for layer in [Layer::Ket, Layer::Bra] {
                let mut proposal = chain.config;
                proposal.flip(site, pair, layer);
                let state = model.layer_state(proposal.mask(layer), layer);
                let other = match layer {
                    Layer::Ket => &chain.bra,
                    Layer::Bra => &chain.ket,
                };
                let w = dot(other, &state);
                chain.proposals += 1;
                if w <= MIN_WEIGHT {
                    if w < -MIN_WEIGHT {
                        model.checked(w, &proposal)?;
                    }
                    // Roundoff-level weight of a configuration with vanishing probability.
                    chain.vanishing += 1;
                    continue;
                }
                let ratio = w / chain.weight;
                if ratio >= 1.0 || rng.gen::<f64>() < ratio {
                    chain.config = proposal;
                    chain.weight = w;
                    match layer {
                        Layer::Ket => chain.ket = state,
                        Layer::Bra => chain.bra = state,
                    }
                    chain.accepted += 1;
                    accepted += 1;
                }
            }
        }
    }
    Ok(accepted)
}

/// One row of a chain trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub sweep: usize,
    pub estimates: LocalEstimates,
}

pub fn write_trace_csv(rows: &[TraceRow], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "sweep,weight,O_K,O_D,O_P3")?;
    for r in rows {
        let e = r.estimates;
        writeln!(w, "{},{:e},{:e},{:e},{:e}", r.sweep, e.weight, e.kinetic, e.double_occupancy, e.triple)?;
    }
    Ok(())
}

/// Per-chain averages of the measured local estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSummary {
    pub kinetic: f64,
    pub double_occupancy: f64,
    pub triple: f64,
    pub acceptance_rate: f64,
    pub vanishing_proposals: u64,
}

/// Runs one chain on random stream `stream`, optionally recording every measured sweep.
pub fn run_chain(
    model: &WeightModel,
    mc: &McConfig,
    stream: u64,
    mut trace: Option<&mut Vec<TraceRow>>,
) -> Result<ChainSummary> {
    let mut rng = stream_rng(mc.seed, stream);
    let mut chain = Chain::new(model)?;
    for _ in 0..mc.n_warmup {
        metropolis_sweep(model, &mut chain, &mut rng)?;
    }
    let (mut k, mut d, mut p3) = (0.0, 0.0, 0.0);
    for sweep in 0..mc.n_measure {
        metropolis_sweep(model, &mut chain, &mut rng)?;
        let e = chain.estimates(model)?;
        k += e.kinetic;
        d += e.double_occupancy;
        p3 += e.triple;
        if let Some(rows) = trace.as_deref_mut() {
            rows.push(TraceRow { sweep, estimates: e });
        }
    }
    let n = mc.n_measure as f64;
    Ok(ChainSummary {
        kinetic: k / n,
        double_occupancy: d / n,
        triple: p3 / n,
        acceptance_rate: chain.acceptance_rate(),
        vanishing_proposals: chain.vanishing_proposals(),
    })
}

/// Pooled results of independent chains.
#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    pub kinetic: EstimatorRecord,
    pub double_occupancy: EstimatorRecord,
    pub triple: EstimatorRecord,
    /// `K + U D` per chain.
    pub energy: EstimatorRecord,
    pub acceptance_rate: f64,
    /// Proposals rejected for a roundoff-level weight, summed over chains.
    pub vanishing_proposals: u64,
}

/// Runs `mc.n_chains` chains; chain `c` uses stream `task_stream(grid_index, c)`.
pub fn run_chains(model: &WeightModel, mc: &McConfig, interaction: f64, grid_index: usize) -> Result<McResult> {
    mc.validate()?;
    let run = |c: usize| run_chain(model, mc, task_stream(grid_index, c), None);
    #[cfg(feature = "parallel")]
    let chains: Vec<ChainSummary> = {
        use rayon::prelude::*;
        (0..mc.n_chains).into_par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let chains: Vec<ChainSummary> = (0..mc.n_chains).map(run).collect::<Result<_>>()?;
    let field = |f: fn(&ChainSummary) -> f64| EstimatorRecord::from_chain_means(chains.iter().map(f).collect());
    Ok(McResult {
        kinetic: field(|c| c.kinetic),
        double_occupancy: field(|c| c.double_occupancy),
        triple: field(|c| c.triple),
        energy: EstimatorRecord::from_chain_means(
            chains.iter().map(|c| c.kinetic + interaction * c.double_occupancy).collect(),
        ),
        acceptance_rate: chains.iter().map(|c| c.acceptance_rate).sum::<f64>() / chains.len() as f64,
        vanishing_proposals: chains.iter().map(|c| c.vanishing_proposals).sum(),
    })
}

/// `Re <psi0| U(s2) U(s1) |psi0>` from the ancilla reading of a Hadamard test of the
/// unitary `U(s2) U(s1)` on the trial state, without relabeling networks.
pub fn hadamard_test_weight(model: &WeightModel, config: &AuxFieldConfig) -> Result<f64> {
    use crate::statevector::{Circuit, Gate};
    if model.n_site > 2 {
        return Err(Error::CapacityExceeded { requested: model.n_site, max: 2 });
    }
    let n = N_COLORS * model.n_site;
    let anc = n;
    let mut circuit = Circuit::new(n + 1);
    circuit.push(Gate::H(anc))?;
    for (bit, &(a, b)) in model.rotations.iter().enumerate() {
        circuit.push(Gate::controlled(anc, Gate::FGivens { a, b, theta: model.angle(config.ket, bit) }))?;
    }
    for (bit, &(a, b)) in model.rotations.iter().enumerate() {
        circuit.push(Gate::controlled(anc, Gate::FGivens { a, b, theta: model.angle(config.bra, bit) }))?;
    }
    circuit.push(Gate::H(anc))?;
    let trial = StateVector::from_amplitudes(model.trial.iter().map(|&x| x.into()).collect())?;
    let mut state = trial.extend_with_zeros(1)?;
    state.apply_circuit(&circuit)?;
    let zero = state.probability(&[anc], &[false])?;
    Ok(2.0 * zero - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::Observables;
    use crate::model::{build_lattice, Geometry};
    use crate::oracle;
    use crate::trialstate::fermi_sea_state;

    fn two_site(g: f64) -> (WeightModel, StateVector, LatticeSpec) {
        let l = build_lattice(Geometry::ChainOpen, &[2]).unwrap();
        let trial = fermi_sea_state(&l, 1.0, 1).unwrap();
        (WeightModel::new(&l, 1.0, &trial, g, WeightMode::Auto).unwrap(), trial, l)
    }

    #[test]
    fn config_bits() {
        let mut c = AuxFieldConfig::new(2).unwrap();
        assert_eq!(c.len(), 12);
        c.flip(1, 2, Layer::Bra);
        assert_eq!(c.get(1, 2, Layer::Bra), -1);
        assert_eq!(c.get(1, 2, Layer::Ket), 1);
        assert_eq!(c.index(), 1 << 11);
        assert!(AuxFieldConfig::from_masks(2, 64, 0).is_err());
    }

    #[test]
    fn zero_coupling_weights_are_one() {
        let (m, _, _) = two_site(0.0);
        for (ket, bra) in [(0, 0), (5, 63), (17, 2)] {
            let c = AuxFieldConfig::from_masks(2, ket, bra).unwrap();
            assert!((m.weight(&c).unwrap() - 1.0).abs() < 1e-14);
            let e = m.local_estimates(&c).unwrap();
            assert!(e.double_occupancy.abs() < 1e-14);
        }
    }

    #[test]
    fn weight_matches_sequential_application_and_dense_product() {
        let (m, trial, _) = two_site(-1.0);
        let direct = {
            let l = build_lattice(Geometry::ChainOpen, &[2]).unwrap();
            WeightModel::new(&l, 1.0, &trial, -1.0, WeightMode::Direct).unwrap()
        };
        assert!(m.is_tabulated() && !direct.is_tabulated());
        for (ket, bra) in [(0, 0), (9, 40), (63, 1)] {
            let c = AuxFieldConfig::from_masks(2, ket, bra).unwrap();
            let w = m.weight(&c).unwrap();
            assert!((w - m.weight_by_application(&c).unwrap()).abs() < 1e-13);
            assert!((w - direct.weight(&c).unwrap()).abs() < 1e-13);
            assert!((w - hadamard_test_weight(&m, &c).unwrap()).abs() < 1e-12);
            let a = m.local_estimates(&c).unwrap();
            let b = direct.local_estimates(&c).unwrap();
            assert!((a.kinetic - b.kinetic).abs() < 1e-12 && (a.triple - b.triple).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_estimator_is_one() {
        let (m, _, _) = two_site(-1.3);
        let id = PauliSum::new([crate::encoding::PauliString::identity(1.0)]);
        let c = AuxFieldConfig::from_masks(2, 11, 52).unwrap();
        assert!((m.local_estimator(&c, &id).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn enumeration_matches_oracle() {
        for g in [-0.3, -1.0, -2.5] {
            let (m, trial, l) = two_site(g);
            let e = m.enumerate().unwrap();
            assert!((e.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(e.probabilities.iter().all(|&p| p > 0.0));
            let table = oracle::InteractionTable::uniform(2).unwrap();
            let obs = Observables::new(&l, 1.0, table.labeling());
            let exact = |op| oracle::gutzwiller_expectation_exact(op, g, &trial, &table).unwrap();
            assert!((e.kinetic - exact(&obs.kinetic)).abs() < 1e-10);
            assert!((e.double_occupancy - exact(&obs.interaction)).abs() < 1e-10);
            assert!((e.triple - exact(&obs.triple)).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_coupling_accepts_everything() {
        let (m, _, _) = two_site(0.0);
        let mut chain = Chain::new(&m).unwrap();
        let mut rng = stream_rng(1, 0);
        for _ in 0..10 {
            assert_eq!(metropolis_sweep(&m, &mut chain, &mut rng).unwrap(), 12);
        }
    }

    #[test]
    fn chains_match_oracle() {
        let (m, trial, l) = two_site(-1.0);
        let mc = McConfig { seed: 4, ..McConfig::default() };
        let r = run_chains(&m, &mc, -1.0, 0).unwrap();
        let table = oracle::InteractionTable::uniform(2).unwrap();
        let k = Observables::new(&l, 1.0, table.labeling()).kinetic;
        let exact = oracle::gutzwiller_expectation_exact(&k, -1.0, &trial, &table).unwrap();
        assert!((r.kinetic.mean - exact).abs() < 3.0 * r.kinetic.stderr, "{:?} {exact}", r.kinetic);
        assert_eq!(r.energy.chain_means.len(), 16);
        for (e, (kc, dc)) in r.energy.chain_means.iter().zip(r.kinetic.chain_means.iter().zip(&r.double_occupancy.chain_means)) {
            assert!((e - (kc - dc)).abs() < 1e-12);
        }
        let again = run_chains(&m, &mc, -1.0, 0).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn zero_coupling_chains_have_no_variance() {
        let (m, _, _) = two_site(0.0);
        let r = run_chains(&m, &McConfig { n_warmup: 10, n_measure: 10, n_chains: 4, seed: 1 }, -1.0, 3).unwrap();
        assert!((r.kinetic.mean + 3.0).abs() < 1e-12 && r.kinetic.stderr < 1e-12);
        assert!(r.double_occupancy.mean.abs() < 1e-12 && r.double_occupancy.stderr < 1e-12);
        assert!((r.triple.mean - 0.25).abs() < 1e-12 && r.triple.stderr < 1e-12);
    }

    #[test]
    fn small_coupling_accepts_almost_everything() {
        let (m, _, _) = two_site(-1e-6);
        let mut chain = Chain::new(&m).unwrap();
        let mut rng = stream_rng(2, 0);
        for _ in 0..200 {
            metropolis_sweep(&m, &mut chain, &mut rng).unwrap();
        }
        assert!(chain.acceptance_rate() > 0.99, "{}", chain.acceptance_rate());
    }

    #[test]
    fn detailed_balance() {
        let (m, _, _) = two_site(-1.5);
        let e = m.enumerate().unwrap();
        let accept = |from: f64, to: f64| (to / from).min(1.0);
        for idx in [0usize, 77, 1234, 4095] {
            let c = AuxFieldConfig::from_masks(2, (idx & 63) as u64, (idx >> 6) as u64).unwrap();
            for site in 0..2 {
                for pair in 0..3 {
                    for layer in [Layer::Ket, Layer::Bra] {
                        let mut d = c;
                        d.flip(site, pair, layer);
                        let (p, q) = (e.probabilities[c.index()], e.probabilities[d.index()]);
                        assert!((p * accept(p, q) - q * accept(q, p)).abs() < 1e-18);
                    }
                }
            }
        }
    }

    fn total_variation(model: &WeightModel, exact: &[f64], sweeps: usize, seed: u64) -> f64 {
        let mut chain = Chain::new(model).unwrap();
        let mut rng = stream_rng(seed, 0);
        for _ in 0..1000 {
            metropolis_sweep(model, &mut chain, &mut rng).unwrap();
        }
        let mut hist = vec![0u64; exact.len()];
        for _ in 0..sweeps {
            metropolis_sweep(model, &mut chain, &mut rng).unwrap();
            hist[chain.config().index()] += 1;
        }
        0.5 * hist.iter().zip(exact).map(|(&h, &p)| (h as f64 / sweeps as f64 - p).abs()).sum::<f64>()
    }

    #[test]
    fn chain_distribution_converges() {
        let (m, _, _) = two_site(-1.0);
        let exact = m.enumerate().unwrap().probabilities;
        // Expected distance of an ideal sample of the same size.
        let floor = |n: f64| {
            0.5 * exact.iter().map(|p| (2.0 * p * (1.0 - p) / (std::f64::consts::PI * n)).sqrt()).sum::<f64>()
        };
        let tv = total_variation(&m, &exact, 100_000, 5);
        assert!(tv < 1.3 * floor(1e5) && tv > 0.7 * floor(1e5), "{tv} vs floor {}", floor(1e5));
        let tv = total_variation(&m, &exact, 4_000_000, 6);
        assert!(tv < 0.02, "{tv}");
    }

    #[test]
    fn trace_csv() {
        let (m, _, _) = two_site(-0.5);
        let mc = McConfig { n_warmup: 3, n_measure: 4, n_chains: 1, seed: 2 };
        let mut rows = Vec::new();
        run_chain(&m, &mc, 0, Some(&mut rows)).unwrap();
        let mut out = Vec::new();
        write_trace_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("sweep,weight,O_K,O_D,O_P3\n0,"));
    }

    #[test]
    fn complex_trial_rejected() {
        let l = build_lattice(Geometry::ChainOpen, &[2]).unwrap();
        let mut t = fermi_sea_state(&l, 1.0, 1).unwrap();
        t.apply_gate(&crate::statevector::Gate::Rz(0, 0.3)).unwrap();
        assert!(matches!(
            WeightModel::new(&l, 1.0, &t, -1.0, WeightMode::Auto),
            Err(Error::InvalidTrialState(_))
        ));
    }
}
