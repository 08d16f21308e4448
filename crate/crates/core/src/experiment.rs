//! Experiment configuration, g sweeps and result tables.
//!
//! A configuration is a flat TOML document:
//!
//! ```toml
//! schema = 1
//! geometry = "chain-open"      # chain-open | chain-periodic | square-periodic
//! dims = [4]
//! hopping = 1.0
//! interaction = -1.0
//! trial = "fermi-sea"          # fermi-sea | bcs
//! # per_color = 2              # default: half filling
//! # delta = 0.4                # bcs only
//! g_min = -4.0
//! g_max = 0.0
//! g_points = 17                # or: g_values = [-1.0, -0.5]
//! method = "approach1-exact"   # approach1-exact | approach1-shots | approach2-mc | approach2-enum | oracle
//! # shots = 100000             # approach1-shots
//! # n_warmup = 2000            # approach2-mc
//! # n_measure = 2000
//! # n_chains = 16
//! seed = 0
//! # output = "results.csv"
//! ```

use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::encoding::{Labeling, Observables, QubitLabeling};
use crate::error::{Error, Result};
use crate::gutzwiller::{self, build_lcu_circuit, direct_measurement, gate_counts, Estimate, GateCountReport};
use crate::model::{build_lattice, Geometry, LatticeSpec, ModelParams, N_COLORS};
use crate::oracle::{self, InteractionTable};
use crate::rng::{stream_rng, task_stream};
use crate::sampling::{run_chain, run_chains, McConfig, TraceRow, WeightMode, WeightModel};
use crate::statevector::{StateVector, MAX_QUBITS};
use crate::trialstate::{prepare_trial, TrialStateSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Statevector memory allowed for grid points running at the same time.
const PARALLEL_MEMORY_BUDGET: usize = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Approach1Exact,
    Approach1Shots,
    Approach2Mc,
    Approach2Enum,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::Approach1Exact, Method::Approach1Shots, Method::Approach2Mc, Method::Approach2Enum, Method::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Method::Approach1Exact => "approach1-exact",
            Method::Approach1Shots => "approach1-shots",
            Method::Approach2Mc => "approach2-mc",
            Method::Approach2Enum => "approach2-enum",
            Method::Oracle => "oracle",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialKind {
    #[default]
    FermiSea,
    Bcs,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub geometry: Geometry,
    pub dims: Vec<usize>,
    #[serde(default = "one")]
    pub hopping: f64,
    pub interaction: f64,
    #[serde(default)]
    pub trial: TrialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_color: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_points: Option<usize>,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_warmup: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_measure: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_chains: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses and validates a configuration document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn lattice(&self) -> Result<LatticeSpec> {
        build_lattice(self.geometry, &self.dims)
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.hopping, self.interaction)
    }

    pub fn trial_spec(&self, n_site: usize) -> Result<TrialStateSpec> {
        let filling = self.per_color.unwrap_or(n_site / 2);
        if filling > n_site {
            return Err(Error::Config(format!("per_color {filling} exceeds {n_site} sites")));
        }
        match self.trial {
            TrialKind::FermiSea => {
                if self.delta.is_some() {
                    return Err(Error::Config("delta applies to bcs trial states only".into()));
                }
                Ok(TrialStateSpec::FermiSea { per_color: filling })
            }
            TrialKind::Bcs => {
                let delta = self.delta.ok_or_else(|| Error::Config("bcs trial state needs delta".into()))?;
                Ok(TrialStateSpec::Bcs { delta, color3_filling: filling })
            }
        }
    }

    /// The g grid: explicit values, or `g_points` evenly spaced from `g_min` to `g_max`.
    pub fn g_grid(&self) -> Result<Vec<f64>> {
        let grid = match (&self.g_values, self.g_min, self.g_max, self.g_points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(lo), Some(hi), Some(n)) => {
                if n == 0 {
                    return Err(Error::Config("g_points must be positive".into()));
                }
                if n == 1 {
                    vec![lo]
                } else {
                    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
                }
            }
            _ => return Err(Error::Config("give either g_values or all of g_min, g_max, g_points".into())),
        };
        if grid.is_empty() {
            return Err(Error::Config("empty g grid".into()));
        }
        if let Some(g) = grid.iter().find(|g| !(**g <= 0.0)) {
            return Err(Error::Config(format!("g grid values must be <= 0, got {g}")));
        }
        Ok(grid)
    }

    pub fn mc_config(&self) -> McConfig {
        let d = McConfig::default();
        McConfig {
            n_warmup: self.n_warmup.unwrap_or(d.n_warmup),
            n_measure: self.n_measure.unwrap_or(d.n_measure),
            n_chains: self.n_chains.unwrap_or(d.n_chains),
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!("schema {} unsupported, expected {SCHEMA_VERSION}", self.schema)));
        }
        let lattice = self.lattice().map_err(|e| Error::Config(e.to_string()))?;
        self.params()?;
        self.trial_spec(lattice.n_site())?;
        self.g_grid()?;
        if self.seed > i64::MAX as u64 {
            return Err(Error::Config(format!("seed {} does not fit in a TOML integer", self.seed)));
        }
        let n = lattice.n_site();
        let register = N_COLORS * n;
        let needed = match self.method {
            Method::Approach1Exact | Method::Approach1Shots => 2 * register,
            _ => register,
        };
        if needed > MAX_QUBITS {
            return Err(Error::CapacityExceeded { requested: needed, max: MAX_QUBITS });
        }
        match self.method {
            Method::Approach2Enum if n > 2 => {
                return Err(Error::Config(format!("approach2-enum needs at most 2 sites, got {n}")));
            }
            Method::Approach1Shots if self.shots.unwrap_or(0) == 0 => {
                return Err(Error::Config("approach1-shots needs a positive shots value".into()));
            }
            Method::Approach2Mc => self.mc_config().validate()?,
            _ => {}
        }
        Ok(())
    }
}

/// One row of a g sweep. Exact methods report zero standard errors; `p0` is `None`
/// for Monte Carlo rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultRow {
    pub g: f64,
    pub p0: Option<Estimate>,
    pub kinetic: Estimate,
    pub double_occupancy: Estimate,
    /// `U <D>`
    pub interaction_energy: Estimate,
    pub energy: Estimate,
    pub triple_per_site: Estimate,
}

fn exact(x: f64) -> Estimate {
    Estimate { mean: x, stderr: 0.0 }
}

/// Loaded lattice, trial state and observables shared by all grid points.
struct Setup {
    lattice: LatticeSpec,
    params: ModelParams,
    trial: StateVector,
    observables: Observables,
    table: InteractionTable,
}

impl Setup {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        let lattice = config.lattice()?;
        let params = config.params()?;
        let spec = config.trial_spec(lattice.n_site())?;
        let trial = prepare_trial(&lattice, params.hopping, &spec)?;
        let labeling = QubitLabeling::new(Labeling::ColorUniform, lattice.n_site());
        let observables = Observables::new(&lattice, params.hopping, labeling);
        let table = InteractionTable::new(labeling)?;
        Ok(Self { lattice, params, trial, observables, table })
    }

    fn row_from_state(&self, g: f64, p0: Option<Estimate>, state: &StateVector) -> Result<ResultRow> {
        let k = state.expectation(&self.observables.kinetic)?;
        let d = state.expectation(&self.observables.interaction)?;
        let p3 = state.expectation(&self.observables.triple)?;
        Ok(self.row(g, p0, exact(k), exact(d), None, exact(p3)))
    }

    fn row(
        &self,
        g: f64,
        p0: Option<Estimate>,
        kinetic: Estimate,
        d: Estimate,
        energy: Option<Estimate>,
        p3: Estimate,
    ) -> ResultRow {
        let u = self.params.interaction;
        let n = self.lattice.n_site() as f64;
        let energy = energy.unwrap_or(Estimate {
            mean: kinetic.mean + u * d.mean,
            stderr: kinetic.stderr.hypot(u * d.stderr),
        });
        ResultRow {
            g,
            p0,
            kinetic,
            double_occupancy: d,
            interaction_energy: Estimate { mean: u * d.mean, stderr: u.abs() * d.stderr },
            energy,
            triple_per_site: Estimate { mean: p3.mean / n, stderr: p3.stderr / n },
        }
    }

    fn run_point(&self, config: &ExperimentConfig, index: usize, g: f64) -> Result<ResultRow> {
        let n = self.lattice.n_site();
        match config.method {
            Method::Oracle => {
                let p0 = oracle::success_probability(&self.trial, g, &self.table)?;
                let (_, psi) = oracle::gutzwiller_state(&self.trial, g, &self.table)?;
                self.row_from_state(g, Some(exact(p0)), &psi)
            }
            Method::Approach1Exact => {
                let layout = build_lcu_circuit(n, g, None, false)?;
                let run = gutzwiller::run_approach1_exact(&layout, &self.trial)?;
                self.row_from_state(g, Some(exact(run.p0)), &run.register)
            }
            Method::Approach1Shots => {
                let shots = config.shots.unwrap_or(0);
                let layout = build_lcu_circuit(n, g, None, false)?;
                let run = gutzwiller::run_approach1_exact(&layout, &self.trial)?;
                let mut rng = stream_rng(config.seed, task_stream(index, 0));
                let successes = gutzwiller::draw_successes(run.p0, shots, &mut rng);
                let p0 = gutzwiller::estimate_p0(successes, shots);
                let h = self.observables.hamiltonian(self.params.interaction);
                let o = &self.observables;
                let est = direct_measurement(&run.register, &[&o.kinetic, &o.interaction, &o.triple, &h], successes, &mut rng)?;
                Ok(self.row(g, Some(p0), est[0], est[1], Some(est[3]), est[2]))
            }
            Method::Approach2Enum | Method::Approach2Mc => {
                let model = WeightModel::new(&self.lattice, self.params.hopping, &self.trial, g, WeightMode::Auto)?;
                if config.method == Method::Approach2Enum {
                    let e = model.enumerate()?;
                    // Sum of weights is gamma^{-6N} <exp(-2 g D)>.
                    let gamma = model.params().gamma;
                    let p0 = (1.5 * g * n as f64).exp() * gamma.powi(6 * n as i32) * e.total_weight;
                    return Ok(self.row(g, Some(exact(p0)), exact(e.kinetic), exact(e.double_occupancy), None, exact(e.triple)));
                }
                let r = run_chains(&model, &config.mc_config(), self.params.interaction, index)?;
                let est = |rec: &crate::sampling::EstimatorRecord| Estimate { mean: rec.mean, stderr: rec.stderr };
                Ok(self.row(g, None, est(&r.kinetic), est(&r.double_occupancy), Some(est(&r.energy)), est(&r.triple)))
            }
        }
    }
}

/// Runs every grid point. Rows come back in grid order; results depend only on the
/// configuration, including the seed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let setup = Setup::new(config)?;
    let grid = config.g_grid()?;
    let run = |(i, &g): (usize, &f64)| setup.run_point(config, i, g);
    let qubits = match config.method {
        Method::Approach1Exact | Method::Approach1Shots => 2 * setup.trial.n_qubits(),
        _ => setup.trial.n_qubits(),
    };
    let state_bytes = 16usize << qubits;
    #[cfg(feature = "parallel")]
    {
        let workers = rayon::current_num_threads().max(1);
        if state_bytes.saturating_mul(workers) <= PARALLEL_MEMORY_BUDGET {
            use rayon::prelude::*;
            return grid.par_iter().enumerate().map(run).collect();
        }
    }
    let _ = (state_bytes, PARALLEL_MEMORY_BUDGET);
    grid.iter().enumerate().map(run).collect()
}

/// Trace of chain `chain` at grid point `grid_index` of an approach2-mc configuration,
/// on the same random stream [`run_experiment`] uses.
pub fn chain_trace(config: &ExperimentConfig, grid_index: usize, chain: usize) -> Result<Vec<TraceRow>> {
    config.validate()?;
    let mc = config.mc_config();
    if chain >= mc.n_chains {
        return Err(Error::Config(format!("chain {chain} out of range for {} chains", mc.n_chains)));
    }
    let grid = config.g_grid()?;
    let &g = grid
        .get(grid_index)
        .ok_or_else(|| Error::Config(format!("grid index {grid_index} out of range for {} points", grid.len())))?;
    let setup = Setup::new(config)?;
    let model = WeightModel::new(&setup.lattice, setup.params.hopping, &setup.trial, g, WeightMode::Auto)?;
    let mut rows = Vec::with_capacity(mc.n_measure);
    run_chain(&model, &mc, task_stream(grid_index, chain), Some(&mut rows))?;
    Ok(rows)
}

pub const CSV_COLUMNS: [&str; 13] = [
    "g",
    "p0",
    "p0_err",
    "kinetic",
    "kinetic_err",
    "double_occupancy",
    "double_occupancy_err",
    "interaction_energy",
    "interaction_energy_err",
    "energy",
    "energy_err",
    "triple_per_site",
    "triple_per_site_err",
];

/// Writes rows as CSV after a `# `-prefixed header holding the configuration and revision.
pub fn write_csv(config: &ExperimentConfig, revision: &str, rows: &[ResultRow], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "# git_revision = {revision:?}")?;
    for line in config.to_toml().lines() {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "{}", CSV_COLUMNS.join(","))?;
    let num = |x: f64| if x.is_nan() { "nan".to_string() } else { format!("{x:.15e}") };
    for r in rows {
        let p0 = r.p0.unwrap_or(Estimate { mean: f64::NAN, stderr: f64::NAN });
        let cells = [
            r.g,
            p0.mean,
            p0.stderr,
            r.kinetic.mean,
            r.kinetic.stderr,
            r.double_occupancy.mean,
            r.double_occupancy.stderr,
            r.interaction_energy.mean,
            r.interaction_energy.stderr,
            r.energy.mean,
            r.energy.stderr,
            r.triple_per_site.mean,
            r.triple_per_site.stderr,
        ];
        writeln!(w, "{}", cells.map(num).join(","))?;
    }
    Ok(())
}

/// Shots needed for error `epsilon` at success probability `p0` and circuit fidelity `f`:
/// `ceil(p0^-1 f^-2 epsilon^-2)`.
pub fn shot_budget(p0: f64, fidelity: f64, epsilon: f64) -> Result<u64> {
    for (name, x) in [("p0", p0), ("fidelity", fidelity), ("epsilon", epsilon)] {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::Config(format!("{name} must lie in (0, 1], got {x}")));
        }
    }
    let inv = 1.0 / epsilon;
    Ok((inv * inv / (p0 * fidelity * fidelity)).ceil() as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceReport {
    pub gates: GateCountReport,
    pub g: f64,
    /// Oracle success probability at `g`, when the register fits in memory.
    pub p0: Option<f64>,
    pub fidelity: f64,
    pub epsilon: f64,
    pub shots: Option<u64>,
}

/// Gate counts and shot budget for the half-filled Fermi sea on `lattice`.
///
/// `fidelity` defaults to `per_gate^total` with a per-gate fidelity of 0.999.
pub fn resource_report(
    lattice: &LatticeSpec,
    params: &ModelParams,
    g: f64,
    epsilon: f64,
    fidelity: Option<f64>,
) -> Result<ResourceReport> {
    gutzwiller::hs_params(g)?;
    let gates = gate_counts(lattice, params.hopping)?;
    let fidelity = fidelity.unwrap_or_else(|| gates.fidelity(0.999));
    let n = lattice.n_site();
    let p0 = if N_COLORS * n <= 24 {
        let trial = prepare_trial(lattice, params.hopping, &TrialStateSpec::half_filled_fermi_sea(n))?;
        Some(oracle::success_probability(&trial, g, &InteractionTable::uniform(n)?)?)
    } else {
        None
    };
    let shots = p0.map(|p| shot_budget(p, fidelity, epsilon)).transpose()?;
    Ok(ResourceReport { gates, g, p0, fidelity, epsilon, shots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ClosedFormSet;

    const BASE: &str = r#"
schema = 1
geometry = "chain-open"
dims = [2]
interaction = -1.0
g_min = -2.0
g_max = 0.0
g_points = 5
method = "oracle"
"#;

    fn config(extra: &str, method: &str) -> ExperimentConfig {
        let text = BASE.replace("\"oracle\"", &format!("{method:?}")) + extra;
        ExperimentConfig::from_toml(&text).unwrap()
    }

    #[test]
    fn parse_and_roundtrip() {
        let c = config("", "oracle");
        assert_eq!(c.g_grid().unwrap(), vec![-2.0, -1.5, -1.0, -0.5, 0.0]);
        assert_eq!(c.hopping, 1.0);
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert_eq!("approach2-mc".parse::<Method>().unwrap(), Method::Approach2Mc);
    }

    #[test]
    fn invalid_configs() {
        let bad = |text: String| ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(matches!(bad(BASE.replace("schema = 1", "schema = 2")), Error::Config(_)));
        assert!(matches!(bad(format!("{BASE}colour = 1\n")), Error::Config(_)));
        assert!(matches!(bad(BASE.replace("g_max = 0.0", "g_max = 0.5")), Error::Config(_)));
        assert!(matches!(bad(BASE.replace("dims = [2]", "dims = [4]").replace("oracle", "approach2-enum")), Error::Config(_)));
        assert!(matches!(bad(BASE.replace("oracle", "approach1-shots")), Error::Config(_)));
        assert!(matches!(bad(format!("{BASE}g_values = [-1.0]\n")), Error::Config(_)));
        assert!(matches!(
            bad(BASE.replace("dims = [2]", "dims = [6]").replace("oracle", "approach1-exact")),
            Error::CapacityExceeded { .. }
        ));
    }

    #[test]
    fn methods_agree_on_two_sites() {
        let rows: Vec<Vec<ResultRow>> = ["oracle", "approach1-exact", "approach2-enum"]
            .iter()
            .map(|m| run_experiment(&config("", m)).unwrap())
            .collect();
        for k in 0..5 {
            let o = &rows[0][k];
            assert!((o.p0.unwrap().mean - ClosedFormSet::p0(o.g)).abs() < 1e-12);
            for r in rows[1..].iter().map(|rs| &rs[k]) {
                for (a, b) in [
                    (r.p0.unwrap().mean, o.p0.unwrap().mean),
                    (r.kinetic.mean, o.kinetic.mean),
                    (r.interaction_energy.mean, o.interaction_energy.mean),
                    (r.energy.mean, o.energy.mean),
                    (r.triple_per_site.mean, o.triple_per_site.mean),
                ] {
                    assert!((a - b).abs() < 1e-9, "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn shot_rows_are_reproducible() {
        let c = config("shots = 20000\nseed = 3\n", "approach1-shots");
        let a = run_experiment(&c).unwrap();
        assert_eq!(a, run_experiment(&c).unwrap());
        let o = run_experiment(&config("", "oracle")).unwrap();
        for (r, e) in a.iter().zip(&o) {
            let p0 = r.p0.unwrap();
            assert!((p0.mean - e.p0.unwrap().mean).abs() < 5.0 * p0.stderr.max(1e-3));
            assert!((r.energy.mean - e.energy.mean).abs() < 5.0 * r.energy.stderr.max(1e-3));
        }
    }

    #[test]
    fn csv_layout() {
        let c = config("n_warmup = 5\nn_measure = 5\nn_chains = 2\n", "approach2-mc");
        let rows = run_experiment(&c).unwrap();
        let mut out = Vec::new();
        write_csv(&c, "abc123", &rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("# git_revision = \"abc123\"\n# schema = 1\n"));
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0], CSV_COLUMNS.join(","));
        assert_eq!(data.len(), 6);
        assert!(data[1].starts_with("-2.000000000000000e0,nan,nan,"));
    }

    #[test]
    fn trace_uses_the_run_stream() {
        let c = config("n_warmup = 20\nn_measure = 30\nn_chains = 2\n", "approach2-mc");
        let rows = run_experiment(&c).unwrap();
        let trace = chain_trace(&c, 1, 0).unwrap();
        let other = chain_trace(&c, 1, 1).unwrap();
        let mean = |t: &[TraceRow]| t.iter().map(|r| r.estimates.kinetic).sum::<f64>() / t.len() as f64;
        assert!(((mean(&trace) + mean(&other)) / 2.0 - rows[1].kinetic.mean).abs() < 1e-12);
        assert!(chain_trace(&c, 1, 2).is_err() && chain_trace(&c, 9, 0).is_err());
    }

    #[test]
    fn shot_budgets() {
        assert_eq!(shot_budget(1.0, 1.0, 0.01).unwrap(), 10_000);
        assert_eq!(shot_budget(ClosedFormSet::p0(-1.0), 1.0, 0.01).unwrap(), 37_917);
        assert!(shot_budget(0.0, 1.0, 0.1).is_err());
        let l = build_lattice(Geometry::ChainOpen, &[2]).unwrap();
        let r = resource_report(&l, &ModelParams::default(), 0.0, 0.01, Some(1.0)).unwrap();
        assert_eq!(r.shots, Some(10_000));
        let l = build_lattice(Geometry::ChainOpen, &[16]).unwrap();
        let r = resource_report(&l, &ModelParams::default(), -1.0, 0.01, None).unwrap();
        assert_eq!(r.gates.total, 2144.0);
        assert_eq!((r.p0, r.shots), (None, None));
        assert!((r.fidelity - 0.117).abs() < 5e-4);
    }
}
