//! Trial states: Fermi seas prepared by Givens-rotation circuits and BCS-like pairing
//! states built directly from their momentum-space form.
//!
//! All states live in the color-uniform labeling.

use std::cmp::Ordering;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encoding::{Labeling, QubitLabeling};
use crate::error::{Error, Result};
use crate::model::{LatticeSpec, N_COLORS};
use crate::statevector::{Circuit, Gate, StateVector};

const DEGENERACY_TOL: f64 = 1e-9;
const ORTHONORMAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrialStateSpec {
    /// Lowest `per_color` orbitals filled in every color.
    FermiSea { per_color: usize },
    /// Colors 1 and 2 paired with gap `delta`; color 3 a Fermi sea of `color3_filling`.
    Bcs { delta: f64, color3_filling: usize },
}

impl TrialStateSpec {
    /// Half filling: `n_site / 2` fermions per color.
    pub fn half_filled_fermi_sea(n_site: usize) -> Self {
        TrialStateSpec::FermiSea { per_color: n_site / 2 }
    }

    pub fn half_filled_bcs(n_site: usize, delta: f64) -> Self {
        TrialStateSpec::Bcs { delta, color3_filling: n_site / 2 }
    }
}

/// Eigenpairs of the single-color hopping matrix, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbitals {
    pub energies: Vec<f64>,
    /// `vectors[k][site]`, real and normalized.
    pub vectors: Vec<Vec<f64>>,
}

/// Diagonalizes the hopping matrix.
///
/// Degenerate levels are given a canonical basis: the degenerate eigenspace is
/// projected onto the site basis vectors in order and Gram-Schmidt orthonormalized,
/// each vector gets a positive first nonzero entry, and the level is sorted
/// lexicographically by entries.
pub fn single_particle_orbitals(lattice: &LatticeSpec, hopping: f64) -> Orbitals {
    let n = lattice.n_site();
    let h = lattice.hopping_matrix(hopping);
    let eig = SymmetricEigen::new(DMatrix::from_fn(n, n, |i, j| h[i][j]));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut energies = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let e0 = eig.eigenvalues[order[start]];
        let mut end = start + 1;
        while end < n && (eig.eigenvalues[order[end]] - e0).abs() < DEGENERACY_TOL * (1.0 + e0.abs()) {
            end += 1;
        }
        let level: Vec<Vec<f64>> = order[start..end]
            .iter()
            .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
            .collect();
        let mut basis = canonical_basis(&level, n);
        basis.iter_mut().for_each(|v| fix_sign(v));
        basis.sort_by(|a, b| lexicographic(a, b));
        for (k, v) in basis.into_iter().enumerate() {
            energies.push(eig.eigenvalues[order[start + k]]);
            vectors.push(v);
        }
        start = end;
    }
    Orbitals { energies, vectors }
}

fn canonical_basis(level: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    if level.len() == 1 {
        return level.to_vec();
    }
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(level.len());
    for j in 0..n {
        if out.len() == level.len() {
            break;
        }
        // Projection of e_j onto the level.
        let mut v = vec![0.0; n];
        for u in level {
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi += u[j] * ui;
            }
        }
        for w in &out {
            let d: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(w).for_each(|(a, b)| *a -= d * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            out.push(v);
        }
    }
    out
}

fn fix_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > DEGENERACY_TOL {
            return x.total_cmp(y);
        }
    }
    Ordering::Equal
}

/// Occupied orbitals of a Slater determinant, one row per particle, columns indexed by qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalMatrix {
    rows: Vec<Vec<f64>>,
    n_modes: usize,
}

impl OrbitalMatrix {
    pub fn new(rows: Vec<Vec<f64>>, n_modes: usize) -> Result<Self> {
        let mut worst = 0.0f64;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_modes {
                return Err(Error::InvalidTrialState(format!(
                    "orbital row {i} has {} entries, expected {n_modes}",
                    r.len()
                )));
            }
            for (j, s) in rows.iter().enumerate().take(i + 1) {
                let d: f64 = r.iter().zip(s).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - target).abs());
            }
        }
        if worst > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal(worst));
        }
        Ok(Self { rows, n_modes })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n_particles(&self) -> usize {
        self.rows.len()
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }
}

/// Orbital matrix of the Fermi sea with the lowest `per_color` orbitals of every color.
pub fn fermi_sea_orbitals(
    lattice: &LatticeSpec,
    hopping: f64,
    per_color: usize,
    labeling: QubitLabeling,
) -> Result<OrbitalMatrix> {
    let n = lattice.n_site();
    if per_color > n {
        return Err(Error::InvalidTrialState(format!(
            "{per_color} fermions per color exceed {n} sites"
        )));
    }
    let orbitals = single_particle_orbitals(lattice, hopping);
    let mut rows = Vec::with_capacity(N_COLORS * per_color);
    for color in 0..N_COLORS {
        for v in &orbitals.vectors[..per_color] {
            let mut row = vec![0.0; labeling.n_qubits()];
            for (site, &x) in v.iter().enumerate() {
                row[labeling.qubit(site, color)] = x;
            }
            rows.push(row);
        }
    }
    OrbitalMatrix::new(rows, labeling.n_qubits())
}

/// Splits rows into groups supported on disjoint contiguous qubit ranges.
fn segments(q: &OrbitalMatrix) -> Vec<(usize, usize, Vec<usize>)> {
    let mut spans: Vec<(usize, usize, usize)> = q
        .rows
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let lo = row.iter().position(|x| x.abs() > 1e-14).unwrap_or(0);
            let hi = row.iter().rposition(|x| x.abs() > 1e-14).unwrap_or(0);
            (lo, hi, r)
        })
        .collect();
    spans.sort();
    let mut out: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for (lo, hi, r) in spans {
        match out.last_mut() {
            Some((_, shi, rows)) if lo <= *shi => {
                *shi = (*shi).max(hi);
                rows.push(r);
            }
            _ => out.push((lo, hi, vec![r])),
        }
    }
    out
}

/// Rotations `(a, a + 1, theta)` that reduce the block to its reference configuration.
fn eliminate(mut m: Vec<Vec<f64>>) -> Vec<(usize, f64)> {
    let nf = m.len();
    let nm = m[0].len();
    // Row rotations clear the upper-right corner; they only change a global phase.
    for c in (nm - nf + 1..nm).rev() {
        for r in 0..c + nf - nm {
            let (a, b) = (m[r][c], m[r + 1][c]);
            let rho = a.hypot(b);
            if rho < 1e-300 {
                continue;
            }
            let (ra, rb) = (m[r].clone(), m[r + 1].clone());
            for k in 0..nm {
                m[r][k] = (b * ra[k] - a * rb[k]) / rho;
                m[r + 1][k] = (a * ra[k] + b * rb[k]) / rho;
            }
        }
    }
    let mut rotations = Vec::with_capacity(nf * (nm - nf));
    for r in 0..nf {
        for c in (r + 1..=nm - nf + r).rev() {
            let theta = m[r][c].atan2(m[r][c - 1]);
            let (cs, sn) = (theta.cos(), theta.sin());
            for row in m.iter_mut() {
                let (x, y) = (row[c - 1], row[c]);
                row[c - 1] = x * cs + y * sn;
                row[c] = -x * sn + y * cs;
            }
            rotations.push((c - 1, theta));
        }
    }
    rotations
}

/// Circuit preparing the Slater determinant of `q` from `|0...0>`.
///
/// Rows supported on disjoint qubit ranges (for example the color blocks of a
/// color-uniform Fermi sea) are reduced independently. Each block starts from its
/// lowest modes filled and is rotated into place with nearest-neighbor Givens gates.
pub fn slater_givens_circuit(q: &OrbitalMatrix) -> Result<Circuit> {
    let mut circuit = Circuit::new(q.n_modes);
    let mut rotations = Vec::new();
    for (lo, hi, rows) in segments(q) {
        let block: Vec<Vec<f64>> = rows.iter().map(|&r| q.rows[r][lo..=hi].to_vec()).collect();
        if block.len() > hi - lo + 1 {
            return Err(Error::NotOrthonormal(1.0));
        }
        for k in 0..block.len() {
            circuit.push(Gate::X(lo + k))?;
        }
        rotations.extend(eliminate(block).into_iter().map(|(a, t)| (lo + a, t)));
    }
    // Gates must appear in reverse elimination order per block; blocks commute.
    for &(a, theta) in rotations.iter().rev() {
        circuit.push(Gate::Givens { a, b: a + 1, theta: -theta })?;
    }
    Ok(circuit)
}

/// Fermi-sea circuit in the color-uniform labeling.
pub fn fermi_sea_circuit(lattice: &LatticeSpec, hopping: f64, per_color: usize) -> Result<Circuit> {
    let labeling = QubitLabeling::new(Labeling::ColorUniform, lattice.n_site());
    slater_givens_circuit(&fermi_sea_orbitals(lattice, hopping, per_color, labeling)?)
}

pub fn fermi_sea_state(lattice: &LatticeSpec, hopping: f64, per_color: usize) -> Result<StateVector> {
    let circuit = fermi_sea_circuit(lattice, hopping, per_color)?;
    let mut s = StateVector::zero(circuit.n_qubits())?;
    s.apply_circuit(&circuit)?;
    Ok(s)
}

/// Applies `sum_q coeff_q c†_q` under the Jordan-Wigner encoding.
fn create(amps: &[Complex64], orbital: &[(usize, Complex64)]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for &(q, coeff) in orbital {
        let bit = 1usize << q;
        let below = bit - 1;
        for (z, &a) in amps.iter().enumerate() {
            if z & bit != 0 || a.norm_sqr() == 0.0 {
                continue;
            }
            let sign = if (z & below).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
            out[z | bit] += coeff * a * sign;
        }
    }
    out
}

/// BCS coherence factors `(u_k, v_k)` at band energy `eps` and gap `delta`.
pub fn coherence_factors(eps: f64, delta: f64) -> (f64, f64) {
    let e = eps.hypot(delta);
    // Rounding leaves the Fermi-level energies of a ring at about 1e-16, not 0.
    let u2 = if e > 1e-12 { 0.5 * (1.0 + eps / e) } else { 0.5 };
    let v = (1.0 - u2).max(0.0).sqrt();
    (u2.sqrt(), if delta > 0.0 { -v } else { v })
}

/// Ground state of `K + delta sum_i (c†_{i1} c†_{i2} + h.c.)` for colors 1 and 2, on a
/// color-3 Fermi sea of `color3_filling` orbitals.
///
/// On-site pairing is diagonal in any real orbital basis, `sum_i c†_{i1} c†_{i2} =
/// sum_n b†_{n1} b†_{n2}`, so the state is `prod_n (u_n + v_n b†_{n1} b†_{n2})` with
/// coherence factors at the orbital energies. On rings this is the momentum-space
/// product over `(k, -k)` pairs.
pub fn prepare_bcs(
    lattice: &LatticeSpec,
    hopping: f64,
    delta: f64,
    color3_filling: usize,
) -> Result<StateVector> {
    let n = lattice.n_site();
    if !delta.is_finite() || color3_filling > n {
        return Err(Error::InvalidTrialState(format!(
            "bad BCS parameters: delta {delta}, color-3 filling {color3_filling}"
        )));
    }
    let labeling = QubitLabeling::new(Labeling::ColorUniform, n);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << labeling.n_qubits()];
    amps[0] = Complex64::new(1.0, 0.0);
    let orbitals = single_particle_orbitals(lattice, hopping);
    let orbital = |v: &[f64], color: usize| -> Vec<(usize, Complex64)> {
        v.iter().enumerate().map(|(i, &x)| (labeling.qubit(i, color), Complex64::new(x, 0.0))).collect()
    };
    for v in &orbitals.vectors[..color3_filling] {
        amps = create(&amps, &orbital(v, 2));
    }
    for (&eps, v) in orbitals.energies.iter().zip(&orbitals.vectors) {
        let (u, w) = coherence_factors(eps, delta);
        let pair = create(&create(&amps, &orbital(v, 1)), &orbital(v, 0));
        amps.iter_mut().zip(pair).for_each(|(a, p)| *a = *a * u + p * w);
    }
    let mut s = StateVector::from_amplitudes(amps)?;
    s.normalize()?;
    Ok(s)
}

/// Prepares a trial state in the color-uniform labeling.
pub fn prepare_trial(lattice: &LatticeSpec, hopping: f64, spec: &TrialStateSpec) -> Result<StateVector> {
    match *spec {
        TrialStateSpec::FermiSea { per_color } => fermi_sea_state(lattice, hopping, per_color),
        TrialStateSpec::Bcs { delta, color3_filling } => prepare_bcs(lattice, hopping, delta, color3_filling),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{Observables, PauliSum};
    use crate::model::{build_lattice, Geometry};

    fn color_number(labeling: QubitLabeling, color: usize) -> PauliSum {
        let mut total = PauliSum::new([]);
        for site in 0..labeling.n_site {
            total = total.plus(&crate::encoding::jw_number(site, color, labeling));
        }
        total
    }

    #[test]
    fn two_site_orbitals() {
        let l = build_lattice(Geometry::ChainOpen, &[2]).unwrap();
        let o = single_particle_orbitals(&l, 1.0);
        assert!((o.energies[0] + 1.0).abs() < 1e-14 && (o.energies[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((o.vectors[0][0] - s).abs() < 1e-14 && (o.vectors[0][1] - s).abs() < 1e-14);
    }

    #[test]
    fn four_site_open_chain_spectrum() {
        let l = build_lattice(Geometry::ChainOpen, &[4]).unwrap();
        let o = single_particle_orbitals(&l, 1.0);
        let c1 = 2.0 * (std::f64::consts::PI / 5.0).cos();
        let c2 = 2.0 * (2.0 * std::f64::consts::PI / 5.0).cos();
        for (e, x) in o.energies.iter().zip([-c1, -c2, c2, c1]) {
            assert!((e - x).abs() < 1e-12);
        }
    }

    #[test]
    fn square_degenerate_level_is_canonical() {
        let l = build_lattice(Geometry::SquarePeriodic, &[2, 2]).unwrap();
        let o = single_particle_orbitals(&l, 1.0);
        for (e, x) in o.energies.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((e - x).abs() < 1e-12);
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [[0.0, s, -s, 0.0], [s, 0.0, 0.0, -s]];
        for (v, x) in o.vectors[1..3].iter().zip(expect) {
            for (a, b) in v.iter().zip(x) {
                assert!((a - b).abs() < 1e-12, "{v:?}");
            }
        }
    }

    #[test]
    fn two_site_fermi_sea_is_a_bell_pair_per_color() {
        let l = build_lattice(Geometry::ChainOpen, &[2]).unwrap();
        let s = fermi_sea_state(&l, 1.0, 1).unwrap();
        // Per color: (|10> + |01>)/sqrt 2 on the color's two qubits.
        for (z, a) in s.amplitudes().iter().enumerate() {
            let ok = (0..3).all(|c| ((z >> (2 * c)) & 3).count_ones() == 1);
            let expect = if ok { 0.125f64.sqrt() } else { 0.0 };
            assert!((a.norm() - expect).abs() < 1e-14, "{z:06b}");
        }
    }

    #[test]
    fn fermi_sea_energy_and_numbers() {
        let l = build_lattice(Geometry::ChainOpen, &[4]).unwrap();
        let circuit = fermi_sea_circuit(&l, 1.0, 2).unwrap();
        assert_eq!(circuit.count("givens"), 3 * 2 * 2);
        let s = fermi_sea_state(&l, 1.0, 2).unwrap();
        let labeling = QubitLabeling::new(Labeling::ColorUniform, 4);
        let obs = Observables::new(&l, 1.0, labeling);
        assert!((s.expectation(&obs.kinetic).unwrap() + 3.0 * 5f64.sqrt()).abs() < 1e-10);
        for c in 0..3 {
            let nc = color_number(labeling, c);
            assert!((s.expectation(&nc).unwrap() - 2.0).abs() < 1e-10);
            assert!(s.expectation(&nc.mul(&nc)).unwrap() - 4.0 < 1e-10);
        }
    }

    #[test]
    fn empty_fermi_sea_is_vacuum() {
        let l = build_lattice(Geometry::ChainOpen, &[3]).unwrap();
        assert!(fermi_sea_circuit(&l, 1.0, 0).unwrap().is_empty());
        assert!(fermi_sea_orbitals(&l, 1.0, 4, QubitLabeling::new(Labeling::ColorUniform, 3)).is_err());
    }

    #[test]
    fn rejects_non_orthonormal_rows() {
        assert!(matches!(
            OrbitalMatrix::new(vec![vec![1.0, 0.0], vec![0.6, 0.8]], 2),
            Err(Error::NotOrthonormal(_))
        ));
    }

    #[test]
    fn bcs_conserves_color_imbalance() {
        for (geometry, dims) in [(Geometry::ChainPeriodic, vec![4]), (Geometry::ChainOpen, vec![4]), (Geometry::SquarePeriodic, vec![2, 2])] {
            let l = build_lattice(geometry, &dims).unwrap();
            let labeling = QubitLabeling::new(Labeling::ColorUniform, 4);
            for delta in [0.0, 0.4, -0.7] {
                let s = prepare_bcs(&l, 1.0, delta, 2).unwrap();
                assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
                let imbalance = color_number(labeling, 0).plus(&color_number(labeling, 1).scaled(-1.0));
                assert!(s.expectation(&imbalance.mul(&imbalance)).unwrap().abs() < 1e-10);
                assert!(s.amplitudes().iter().all(|a| a.im.abs() < 1e-12));
            }
        }
    }

    /// `prod_k (u_k + v_k c†_{k,1} c†_{-k,2})` on a ring, with plane waves and the ring
    /// dispersion `-2J cos k`.
    fn momentum_space_bcs(n: usize, hopping: f64, delta: f64, color3_filling: usize) -> StateVector {
        let l = build_lattice(Geometry::ChainPeriodic, &[n]).unwrap();
        let labeling = QubitLabeling::new(Labeling::ColorUniform, n);
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << labeling.n_qubits()];
        amps[0] = Complex64::new(1.0, 0.0);
        let orbitals = single_particle_orbitals(&l, hopping);
        for v in &orbitals.vectors[..color3_filling] {
            let o: Vec<_> = v.iter().enumerate().map(|(i, &x)| (labeling.qubit(i, 2), Complex64::new(x, 0.0))).collect();
            amps = create(&amps, &o);
        }
        let norm = 1.0 / (n as f64).sqrt();
        for m in 0..n {
            let k = 2.0 * std::f64::consts::PI * m as f64 / n as f64;
            let (u, v) = coherence_factors(-2.0 * hopping * k.cos(), delta);
            let up: Vec<_> = (0..n).map(|i| (labeling.qubit(i, 0), Complex64::from_polar(norm, k * i as f64))).collect();
            let down: Vec<_> = (0..n).map(|j| (labeling.qubit(j, 1), Complex64::from_polar(norm, -k * j as f64))).collect();
            let pair = create(&create(&amps, &down), &up);
            amps.iter_mut().zip(pair).for_each(|(a, p)| *a = *a * u + p * v);
        }
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.normalize().unwrap();
        s
    }

    #[test]
    fn bcs_matches_momentum_space_product_on_rings() {
        for (n, delta) in [(4, 0.4), (4, 1.3), (6, 0.4)] {
            let l = build_lattice(Geometry::ChainPeriodic, &[n]).unwrap();
            let a = prepare_bcs(&l, 1.0, delta, n / 2).unwrap();
            let b = momentum_space_bcs(n, 1.0, delta, n / 2);
            assert!((a.inner(&b).norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn bcs_is_the_mean_field_ground_state() {
        // Color 3 fills its one negative-energy orbital in the exact ground state.
        let l = build_lattice(Geometry::ChainOpen, &[3]).unwrap();
        let labeling = QubitLabeling::new(Labeling::ColorUniform, 3);
        let delta = 0.4;
        let s = prepare_bcs(&l, 1.0, delta, 1).unwrap();
        let kinetic = Observables::new(&l, 1.0, labeling).kinetic;
        let mut h = kinetic;
        for i in 0..3 {
            let (a, b) = (crate::encoding::jw_annihilation(labeling.qubit(i, 0)), crate::encoding::jw_annihilation(labeling.qubit(i, 1)));
            let pair = b.mul(&a).scaled(delta);
            h = h.plus(&pair).plus(&pair.adjoint());
        }
        let dense = h.to_dense(9);
        let dim = dense.len();
        let m = nalgebra::DMatrix::from_fn(dim, dim, |r, c| dense[c][r].re);
        let eig = nalgebra::SymmetricEigen::new(m);
        let e0 = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
        let e = s.expectation(&h).unwrap();
        assert!((e - e0).abs() < 1e-10, "{e} vs {e0}");
    }

    #[test]
    fn gapless_bcs_is_the_fermi_sea() {
        let l = build_lattice(Geometry::ChainOpen, &[2]).unwrap();
        let bcs = prepare_bcs(&l, 1.0, 0.0, 1).unwrap();
        let fs = fermi_sea_state(&l, 1.0, 1).unwrap();
        assert!((bcs.inner(&fs).norm() - 1.0).abs() < 1e-12);
    }
}
