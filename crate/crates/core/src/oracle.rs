//! Reference results: the Gutzwiller operator applied as a diagonal, exact ground
//! energies, Slater-determinant amplitudes and two-site closed forms.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use crate::encoding::{Labeling, PauliSum, QubitLabeling};
use crate::error::{Error, Result};
use crate::model::{self, LatticeSpec, ModelParams, N_COLORS};
use crate::rng::stream_rng;
use crate::statevector::StateVector;
use crate::trialstate::OrbitalMatrix;

/// Largest symmetry sector diagonalized densely; larger sectors use Lanczos.
pub const DENSE_SECTOR_LIMIT: usize = 1500;

/// Eigenvalues of D and of P3 on every basis state of a register.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTable {
    labeling: QubitLabeling,
    interaction: Vec<f64>,
    triple: Vec<f64>,
}

impl InteractionTable {
    pub fn new(labeling: QubitLabeling) -> Result<Self> {
        let n_qubits = labeling.n_qubits();
        if n_qubits > crate::statevector::MAX_QUBITS {
            return Err(Error::CapacityExceeded {
                requested: n_qubits,
                max: crate::statevector::MAX_QUBITS,
            });
        }
        let n = labeling.n_site;
        let dim = 1usize << n_qubits;
        let mut interaction = Vec::with_capacity(dim);
        let mut triple = Vec::with_capacity(dim);
        for z in 0..dim {
            let occupied = |site: usize, color: usize| z >> labeling.qubit(site, color) & 1 == 1;
            interaction.push(model::interaction_eigenvalue(n, occupied));
            triple.push((0..n).filter(|&i| (0..N_COLORS).all(|c| occupied(i, c))).count() as f64);
        }
        Ok(Self { labeling, interaction, triple })
    }

    pub fn uniform(n_site: usize) -> Result<Self> {
        Self::new(QubitLabeling::new(Labeling::ColorUniform, n_site))
    }

    pub fn labeling(&self) -> QubitLabeling {
        self.labeling
    }

    pub fn n_site(&self) -> usize {
        self.labeling.n_site
    }

    /// D(z) for every basis index z.
    pub fn interaction(&self) -> &[f64] {
        &self.interaction
    }

    /// Number of triply occupied sites for every basis index.
    pub fn triple(&self) -> &[f64] {
        &self.triple
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        if state.n_qubits() != self.labeling.n_qubits() {
            return Err(Error::QubitOutOfRange {
                qubit: state.n_qubits().max(self.labeling.n_qubits()) - 1,
                n_qubits: state.n_qubits().min(self.labeling.n_qubits()),
            });
        }
        Ok(())
    }
}

/// `exp(-g D) |state>`, unnormalized.
pub fn apply_exp_gd(state: &StateVector, g: f64, table: &InteractionTable) -> Result<StateVector> {
    table.check(state)?;
    let amps: Vec<Complex64> = state
        .amplitudes()
        .iter()
        .zip(&table.interaction)
        .map(|(a, d)| a * (-g * d).exp())
        .collect();
    StateVector::from_amplitudes(amps)
}

/// `<psi0| exp(-2 g D) |psi0>`.
pub fn exp_2gd_expectation(trial: &StateVector, g: f64, table: &InteractionTable) -> Result<f64> {
    table.check(trial)?;
    Ok(trial
        .amplitudes()
        .iter()
        .zip(&table.interaction)
        .map(|(a, d)| a.norm_sqr() * (-2.0 * g * d).exp())
        .sum())
}

/// Normalized Gutzwiller state and its squared norm `<psi0| exp(-2 g D) |psi0>`.
pub fn gutzwiller_state(trial: &StateVector, g: f64, table: &InteractionTable) -> Result<(f64, StateVector)> {
    let mut s = apply_exp_gd(trial, g, table)?;
    let norm = s.normalize()?;
    Ok((norm * norm, s))
}

/// `<psi_g| op |psi_g>` for the normalized Gutzwiller state.
pub fn gutzwiller_expectation_exact(
    op: &PauliSum,
    g: f64,
    trial: &StateVector,
    table: &InteractionTable,
) -> Result<f64> {
    gutzwiller_state(trial, g, table)?.1.expectation(op)
}

/// Postselection probability of the ancilla circuit, `exp(3 g N / 2) <exp(-2 g D)>`.
pub fn success_probability(trial: &StateVector, g: f64, table: &InteractionTable) -> Result<f64> {
    let n = table.n_site() as f64;
    Ok((1.5 * g * n).exp() * exp_2gd_expectation(trial, g, table)?)
}

/// `d log p0 / d|g| = -3N/2 + 2 <D>_g`.
pub fn success_logderivative(trial: &StateVector, g: f64, table: &InteractionTable) -> Result<f64> {
    let (_, psi) = gutzwiller_state(trial, g, table)?;
    let d: f64 = psi
        .amplitudes()
        .iter()
        .zip(&table.interaction)
        .map(|(a, d)| a.norm_sqr() * d)
        .sum();
    Ok(-1.5 * table.n_site() as f64 + 2.0 * d)
}

/// Slater determinant with amplitude `det Q[:, S]` on each occupied set `S`.
pub fn slater_determinant_state(q: &OrbitalMatrix) -> Result<StateVector> {
    let nf = q.n_particles();
    let nm = q.n_modes();
    if nm > crate::statevector::MAX_QUBITS {
        return Err(Error::CapacityExceeded { requested: nm, max: crate::statevector::MAX_QUBITS });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << nm];
    for (z, amp) in amps.iter_mut().enumerate() {
        if z.count_ones() as usize != nf {
            continue;
        }
        let cols: Vec<usize> = (0..nm).filter(|&c| z >> c & 1 == 1).collect();
        let m = DMatrix::from_fn(nf, nf, |r, k| q.rows()[r][cols[k]]);
        *amp = Complex64::new(m.determinant(), 0.0);
    }
    StateVector::from_amplitudes(amps)
}

/// Basis states of the register with `per_color` fermions in every color, ascending.
pub fn sector_basis(n_site: usize, per_color: usize) -> Vec<usize> {
    let block = (1usize << n_site) - 1;
    (0..1usize << (N_COLORS * n_site))
        .filter(|z| (0..N_COLORS).all(|c| (z >> (c * n_site) & block).count_ones() as usize == per_color))
        .collect()
}

/// Sparse Hamiltonian restricted to a sector, color-uniform labeling.
struct SectorHamiltonian {
    diagonal: Vec<f64>,
    /// `(row, column, value)` off-diagonal entries.
    hops: Vec<(usize, usize, f64)>,
}

impl SectorHamiltonian {
    fn new(lattice: &LatticeSpec, params: &ModelParams, per_color: usize) -> Self {
        let n = lattice.n_site();
        let labeling = QubitLabeling::new(Labeling::ColorUniform, n);
        let basis = sector_basis(n, per_color);
        let index: HashMap<usize, usize> = basis.iter().enumerate().map(|(k, &z)| (z, k)).collect();
        let mut diagonal = Vec::with_capacity(basis.len());
        let mut hops = Vec::new();
        for (row, &z) in basis.iter().enumerate() {
            let occupied = |site: usize, color: usize| z >> labeling.qubit(site, color) & 1 == 1;
            diagonal.push(params.interaction * model::interaction_eigenvalue(n, occupied));
            for &(i, j) in lattice.edges() {
                for color in 0..N_COLORS {
                    let (p, q) = (labeling.qubit(i, color), labeling.qubit(j, color));
                    let (lo, hi) = (p.min(q), p.max(q));
                    if (z >> lo & 1) == (z >> hi & 1) {
                        continue;
                    }
                    let between = ((1usize << hi) - 1) & !((1usize << (lo + 1)) - 1);
                    let sign = if (z & between).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
                    let col = index[&(z ^ (1 << lo | 1 << hi))];
                    hops.push((row, col, -params.hopping * sign));
                }
            }
        }
        Self { diagonal, hops }
    }

    fn dim(&self) -> usize {
        self.diagonal.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diagonal) {
            *yi = d * xi;
        }
        for &(r, c, v) in &self.hops {
            y[r] += v * x[c];
        }
    }

    fn dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.diagonal.clone()));
        for &(r, c, v) in &self.hops {
            m[(r, c)] += v;
        }
        m
    }
}

/// Lowest eigenvalue of a symmetric operator by Lanczos iteration without reorthogonalization.
fn lanczos_lowest(dim: usize, apply: impl Fn(&[f64], &mut [f64])) -> f64 {
    let mut rng = stream_rng(0x5eed, 0);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut v_prev = vec![0.0; dim];
    let mut w = vec![0.0; dim];
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    let mut beta = 0.0;
    let mut last = f64::INFINITY;
    for step in 0..dim.min(500) {
        apply(&v, &mut w);
        let alpha: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        for k in 0..dim {
            w[k] -= alpha * v[k] + beta * v_prev[k];
        }
        alphas.push(alpha);
        beta = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if step % 5 == 4 || beta < 1e-12 {
            let m = alphas.len();
            let t = DMatrix::from_fn(m, m, |i, j| {
                if i == j {
                    alphas[i]
                } else if i + 1 == j {
                    betas[i]
                } else if j + 1 == i {
                    betas[j]
                } else {
                    0.0
                }
            });
            let lowest = SymmetricEigen::new(t).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            if (lowest - last).abs() < 1e-13 * (1.0 + lowest.abs()) || beta < 1e-12 {
                return lowest;
            }
            last = lowest;
        }
        betas.push(beta);
        for k in 0..dim {
            v_prev[k] = v[k];
            v[k] = w[k] / beta;
        }
    }
    last
}

/// Ground-state energy in the sector with `per_color` fermions of each color.
pub fn exact_ground_energy(lattice: &LatticeSpec, params: &ModelParams, per_color: usize) -> Result<f64> {
    let n_qubits = lattice.n_modes();
    if n_qubits > 24 {
        return Err(Error::CapacityExceeded { requested: n_qubits, max: 24 });
    }
    if per_color > lattice.n_site() {
        return Err(Error::InvalidTrialState(format!(
            "{per_color} fermions per color exceed {} sites",
            lattice.n_site()
        )));
    }
    let h = SectorHamiltonian::new(lattice, params, per_color);
    if h.dim() <= DENSE_SECTOR_LIMIT {
        let eig = SymmetricEigen::new(h.dense());
        return Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min));
    }
    Ok(lanczos_lowest(h.dim(), |x, y| h.apply(x, y)))
}

/// Two-site closed forms for the half-filled Fermi sea.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormSet {
    pub hopping: f64,
    pub interaction: f64,
}

impl ClosedFormSet {
    pub fn new(params: &ModelParams) -> Self {
        Self { hopping: params.hopping, interaction: params.interaction }
    }

    fn denominator(g: f64) -> f64 {
        (-3.0 * g).exp() + 3.0 * g.exp()
    }

    /// `<K>` in the Gutzwiller state.
    pub fn kinetic(&self, g: f64) -> f64 {
        -12.0 * self.hopping * g.cosh() / Self::denominator(g)
    }

    /// `U <D>` in the Gutzwiller state.
    pub fn interaction_energy(&self, g: f64) -> f64 {
        -3.0 * self.interaction * (-g).exp() * (2.0 * g).sinh() / Self::denominator(g)
    }

    /// `<D>` in the Gutzwiller state.
    pub fn double_occupancy_sum(&self, g: f64) -> f64 {
        -3.0 * (-g).exp() * (2.0 * g).sinh() / Self::denominator(g)
    }

    pub fn energy(&self, g: f64) -> f64 {
        self.kinetic(g) + self.interaction_energy(g)
    }

    /// Stationary point of [`ClosedFormSet::energy`].
    pub fn g_opt(&self) -> f64 {
        let (u, j) = (self.interaction, self.hopping);
        0.5 * ((u + j + ((u + j).powi(2) + 3.0 * j * j).sqrt()) / (3.0 * j)).ln()
    }

    /// Optimal energy, equal to the exact two-site ground energy.
    pub fn e_opt(&self) -> f64 {
        let (u, j) = (self.interaction, self.hopping);
        0.5 * (u - 2.0 * j - 2.0 * ((u + j).powi(2) + 3.0 * j * j).sqrt())
    }

    /// Ancilla postselection probability.
    pub fn p0(g: f64) -> f64 {
        0.25 + 0.75 * (4.0 * g).exp()
    }
}

/// Two-site unnormalized expectation values in the BCS state with coherence factors
/// `u`, `v` at the occupied momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcsClosedForms {
    pub hopping: f64,
    pub interaction: f64,
    pub u: f64,
    pub v: f64,
}

impl BcsClosedForms {
    /// `<psi0| exp(-gD) K exp(-gD) |psi0>`
    pub fn kinetic(&self, g: f64) -> f64 {
        let (j, u2, v2) = (self.hopping, self.u * self.u, self.v * self.v);
        -3.0 * j * g.cosh() + 4.0 * j * u2 * (g.cosh() + v2 * g.sinh())
    }

    /// `<psi0| exp(-gD) U D exp(-gD) |psi0>`
    pub fn interaction_energy(&self, g: f64) -> f64 {
        let (u2, v2) = (self.u * self.u, self.v * self.v);
        -0.75 * self.interaction * (-g).exp() * (2.0 * g).sinh() + 2.0 * u2 * v2 * self.interaction * g.cosh()
    }

    /// `<psi0| exp(-2gD) |psi0>`
    pub fn norm(&self, g: f64) -> f64 {
        let (u2, v2) = (self.u * self.u, self.v * self.v);
        0.25 * ((-3.0 * g).exp() + 3.0 * g.exp()) - 4.0 * u2 * v2 * g.sinh()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::Observables;
    use crate::model::{build_lattice, Geometry};
    use crate::trialstate::{fermi_sea_orbitals, fermi_sea_state};

    fn two_site() -> LatticeSpec {
        build_lattice(Geometry::ChainOpen, &[2]).unwrap()
    }

    #[test]
    fn diagonal_factors() {
        let table = InteractionTable::uniform(2).unwrap();
        let g = -0.8;
        // Both sites triply occupied.
        let full = StateVector::basis(6, 0b111111).unwrap();
        let out = apply_exp_gd(&full, g, &table).unwrap();
        assert!((out.amplitudes()[63].re - (-1.5 * g).exp()).abs() < 1e-14);
        // Site 1 holds colors 1 and 2, site 2 holds color 3.
        let z = 0b10_01_01;
        let out = apply_exp_gd(&StateVector::basis(6, z).unwrap(), g, &table).unwrap();
        assert!((out.amplitudes()[z].re - (0.5 * g).exp()).abs() < 1e-14);
        let s = fermi_sea_state(&two_site(), 1.0, 1).unwrap();
        assert_eq!(apply_exp_gd(&s, 0.0, &table).unwrap(), s);
    }

    #[test]
    fn two_site_oracle_matches_closed_forms() {
        let l = two_site();
        let table = InteractionTable::uniform(2).unwrap();
        let s = fermi_sea_state(&l, 1.0, 1).unwrap();
        let obs = Observables::new(&l, 1.0, table.labeling());
        let cf = ClosedFormSet::new(&ModelParams::new(1.0, -1.0).unwrap());
        for g in [0.0, -0.3, -1.0, -2.5] {
            let k = gutzwiller_expectation_exact(&obs.kinetic, g, &s, &table).unwrap();
            let d = gutzwiller_expectation_exact(&obs.interaction, g, &s, &table).unwrap();
            assert!((k - cf.kinetic(g)).abs() < 1e-12, "{g}: {k} {}", cf.kinetic(g));
            assert!((-d - cf.interaction_energy(g)).abs() < 1e-12);
            let p0 = success_probability(&s, g, &table).unwrap();
            assert!((p0 - ClosedFormSet::p0(g)).abs() < 1e-12);
        }
        let p3 = gutzwiller_expectation_exact(&obs.triple, 0.0, &s, &table).unwrap();
        assert!((p3 / 2.0 - 0.125).abs() < 1e-12);
        let d = gutzwiller_expectation_exact(&obs.interaction, -40.0, &s, &table).unwrap();
        assert!((d - 1.5).abs() < 1e-10);
    }

    #[test]
    fn closed_form_optimum() {
        let cf = ClosedFormSet::new(&ModelParams::new(1.0, -1.0).unwrap());
        assert!((cf.g_opt() + 0.25 * 3f64.ln()).abs() < 1e-14);
        assert!((cf.e_opt() + (3.0 + 2.0 * 3f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!((cf.energy(cf.g_opt()) - cf.e_opt()).abs() < 1e-12);
        let h = 1e-5;
        let slope = (cf.energy(cf.g_opt() + h) - cf.energy(cf.g_opt() - h)) / (2.0 * h);
        assert!(slope.abs() < 1e-8);
        let free = ClosedFormSet::new(&ModelParams::new(1.0, 0.0).unwrap());
        assert!(free.g_opt().abs() < 1e-15);
        assert!((cf.energy(0.0) + 3.0).abs() < 1e-14);
    }

    #[test]
    fn two_site_ground_energy() {
        let l = two_site();
        for u in [-1.0, 0.0, -3.0] {
            let params = ModelParams::new(1.0, u).unwrap();
            let e = exact_ground_energy(&l, &params, 1).unwrap();
            assert!((e - ClosedFormSet::new(&params).e_opt()).abs() < 1e-12, "{u}: {e}");
        }
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let l = build_lattice(Geometry::ChainPeriodic, &[4]).unwrap();
        let params = ModelParams::new(1.0, -1.0).unwrap();
        let h = SectorHamiltonian::new(&l, &params, 2);
        let dense = SymmetricEigen::new(h.dense()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let lanczos = lanczos_lowest(h.dim(), |x, y| h.apply(x, y));
        assert!((dense - lanczos).abs() < 1e-10, "{dense} {lanczos}");
    }

    #[test]
    fn free_ground_energy_is_fermi_sea() {
        let l = build_lattice(Geometry::ChainOpen, &[4]).unwrap();
        let e = exact_ground_energy(&l, &ModelParams::new(1.0, 0.0).unwrap(), 2).unwrap();
        assert!((e + 3.0 * 5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn slater_oracle_matches_circuit() {
        for (geometry, dims) in [(Geometry::ChainOpen, vec![2]), (Geometry::ChainOpen, vec![4]), (Geometry::SquarePeriodic, vec![2, 2])] {
            let l = build_lattice(geometry, &dims).unwrap();
            let n = l.n_site();
            let q = fermi_sea_orbitals(&l, 1.0, n / 2, QubitLabeling::new(Labeling::ColorUniform, n)).unwrap();
            let oracle = slater_determinant_state(&q).unwrap();
            let circuit = fermi_sea_state(&l, 1.0, n / 2).unwrap();
            assert!((oracle.norm_sqr() - 1.0).abs() < 1e-12);
            assert!((oracle.inner(&circuit).norm() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn derivative_identity() {
        let l = build_lattice(Geometry::ChainOpen, &[4]).unwrap();
        let table = InteractionTable::uniform(4).unwrap();
        let s = fermi_sea_state(&l, 1.0, 2).unwrap();
        let obs = Observables::new(&l, 1.0, table.labeling());
        for g in [-0.2, -1.3] {
            let h = 1e-5;
            let fd = -0.5 * (exp_2gd_expectation(&s, g + h, &table).unwrap() - exp_2gd_expectation(&s, g - h, &table).unwrap()) / (2.0 * h);
            let direct = apply_exp_gd(&s, g, &table).unwrap().expectation(&obs.interaction).unwrap();
            assert!((fd - direct).abs() < 1e-6 * direct.abs().max(1.0), "{fd} {direct}");
        }
    }

    #[test]
    fn bcs_closed_forms_match_dense_oracle() {
        let l = two_site();
        let table = InteractionTable::uniform(2).unwrap();
        let obs = Observables::new(&l, 1.0, table.labeling());
        for delta in [0.0, 0.4] {
            let s = crate::trialstate::prepare_bcs(&l, 1.0, delta, 1).unwrap();
            let (u, v) = crate::trialstate::coherence_factors(-1.0, delta);
            let cf = BcsClosedForms { hopping: 1.0, interaction: -1.0, u, v };
            for g in [0.0, -0.5, -1.7] {
                let w = apply_exp_gd(&s, g, &table).unwrap();
                let k = w.expectation(&obs.kinetic).unwrap();
                let ud = -w.expectation(&obs.interaction).unwrap();
                let norm = exp_2gd_expectation(&s, g, &table).unwrap();
                assert!((k - cf.kinetic(g)).abs() < 1e-9, "{delta} {g}: {k} {}", cf.kinetic(g));
                assert!((ud - cf.interaction_energy(g)).abs() < 1e-9, "{delta} {g}: {ud} {}", cf.interaction_energy(g));
                assert!((norm - cf.norm(g)).abs() < 1e-9);
            }
        }
    }
}
