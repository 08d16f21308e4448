//! WebAssembly entry points for the demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`, one record per g value, so the page can
//! plot it without a serialization layer. The plain functions behind the exports are
//! public for native tests.

use su3_gutzwiller::experiment::{run_experiment, ExperimentConfig, Method, ResultRow, TrialKind, SCHEMA_VERSION};
use su3_gutzwiller::model::Geometry;
use wasm_bindgen::prelude::*;

/// Largest lattice the page may request; the oracle state has `2^(3N)` amplitudes.
pub const MAX_SITES: usize = 6;

/// Record length of [`observable_curves`]: g, K, U D, H, P3 per site.
pub const OBSERVABLE_RECORD: usize = 5;

/// Record length of [`monte_carlo_curves`]: g, then (mc, stderr, exact) for K, U D, H, P3 per site.
pub const MC_RECORD: usize = 13;

fn geometry(name: &str) -> Result<Geometry, String> {
    match name {
        "chain-open" => Ok(Geometry::ChainOpen),
        "chain-periodic" => Ok(Geometry::ChainPeriodic),
        "square-periodic" => Ok(Geometry::SquarePeriodic),
        _ => Err(format!("unknown geometry {name:?}")),
    }
}

fn grid(g_min: f64, g_max: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(2..=401).contains(&points) || !(g_min < g_max) || g_max > 0.0 {
        return Err("need 2..=401 points with g_min < g_max <= 0".into());
    }
    Ok((0..points).map(|i| g_min + (g_max - g_min) * i as f64 / (points - 1) as f64).collect())
}

fn base_config(geometry_name: &str, dims: &[usize], interaction: f64, g_values: Vec<f64>) -> Result<ExperimentConfig, String> {
    let n: usize = dims.iter().product();
    if n > MAX_SITES {
        return Err(format!("{n} sites; the page allows at most {MAX_SITES}"));
    }
    Ok(ExperimentConfig {
        schema: SCHEMA_VERSION,
        geometry: geometry(geometry_name)?,
        dims: dims.to_vec(),
        hopping: 1.0,
        interaction,
        trial: TrialKind::FermiSea,
        per_color: None,
        delta: None,
        g_values: Some(g_values),
        g_min: None,
        g_max: None,
        g_points: None,
        method: Method::Oracle,
        shots: None,
        n_warmup: None,
        n_measure: None,
        n_chains: None,
        seed: 0,
        output: None,
    })
}

fn run(config: &ExperimentConfig) -> Result<Vec<ResultRow>, String> {
    run_experiment(config).map_err(|e| e.to_string())
}

fn values(r: &ResultRow) -> [f64; 4] {
    [r.kinetic.mean, r.interaction_energy.mean, r.energy.mean, r.triple_per_site.mean]
}

/// Postselection probability p0(g) for the half-filled Fermi sea and for the BCS state
/// with gap `delta`: records of (g, p0 Fermi sea, p0 BCS).
pub fn success_probability_curves(
    geometry_name: &str,
    dims: &[usize],
    delta: f64,
    g_min: f64,
    g_max: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    let g = grid(g_min, g_max, points)?;
    let fermi_sea = base_config(geometry_name, dims, -1.0, g.clone())?;
    let mut bcs = fermi_sea.clone();
    bcs.trial = TrialKind::Bcs;
    bcs.delta = Some(delta);
    let (a, b) = (run(&fermi_sea)?, run(&bcs)?);
    Ok(a.iter()
        .zip(&b)
        .flat_map(|(x, y)| [x.g, x.p0.map_or(f64::NAN, |p| p.mean), y.p0.map_or(f64::NAN, |p| p.mean)])
        .collect())
}

/// Exact Gutzwiller-state expectations over g, records of [`OBSERVABLE_RECORD`] values.
pub fn observable_curves(
    geometry_name: &str,
    dims: &[usize],
    interaction: f64,
    g_min: f64,
    g_max: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    let config = base_config(geometry_name, dims, interaction, grid(g_min, g_max, points)?)?;
    Ok(run(&config)?.iter().flat_map(|r| std::iter::once(r.g).chain(values(r))).collect())
}

/// Auxiliary-field Monte Carlo on the two-site chain against the exact values, records of
/// [`MC_RECORD`] values.
pub fn monte_carlo_curves(
    interaction: f64,
    g_min: f64,
    g_max: f64,
    points: usize,
    n_sweeps: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let mut config = base_config("chain-open", &[2], interaction, grid(g_min, g_max, points)?)?;
    let exact = run(&config)?;
    config.method = Method::Approach2Mc;
    config.n_warmup = Some(n_sweeps);
    config.n_measure = Some(n_sweeps);
    config.n_chains = Some(16);
    config.seed = seed;
    let mc = run(&config)?;
    let mut out = Vec::with_capacity(mc.len() * MC_RECORD);
    for (m, e) in mc.iter().zip(&exact) {
        out.push(m.g);
        let errs = [m.kinetic.stderr, m.interaction_energy.stderr, m.energy.stderr, m.triple_per_site.stderr];
        for ((x, err), y) in values(m).into_iter().zip(errs).zip(values(e)) {
            out.extend([x, err, y]);
        }
    }
    Ok(out)
}

#[wasm_bindgen(js_name = successProbabilityCurves)]
pub fn success_probability_curves_js(
    geometry_name: &str,
    dims: Vec<usize>,
    delta: f64,
    g_min: f64,
    g_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    success_probability_curves(geometry_name, &dims, delta, g_min, g_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = observableCurves)]
pub fn observable_curves_js(
    geometry_name: &str,
    dims: Vec<usize>,
    interaction: f64,
    g_min: f64,
    g_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    observable_curves(geometry_name, &dims, interaction, g_min, g_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = monteCarloCurves)]
pub fn monte_carlo_curves_js(
    interaction: f64,
    g_min: f64,
    g_max: f64,
    points: usize,
    n_sweeps: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    monte_carlo_curves(interaction, g_min, g_max, points, n_sweeps, seed as u64).map_err(|e| JsError::new(&e))
}
