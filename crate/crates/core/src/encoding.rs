//! Jordan-Wigner encoding of fermion modes on qubits.
//!
//! Two labelings are supported. Color-uniform places all modes of color 1 first, then
//! color 2, then color 3. Color-alternating places the three colors of site 1 first,
//! then site 2, and so on. Qubit 0 is the least significant bit of an amplitude index.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, FermionTerm, LatticeSpec, TermKind, N_COLORS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Labeling {
    ColorUniform,
    ColorAlternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitLabeling {
    pub scheme: Labeling,
    pub n_site: usize,
}

impl QubitLabeling {
    pub fn new(scheme: Labeling, n_site: usize) -> Self {
        Self { scheme, n_site }
    }

    pub fn n_qubits(&self) -> usize {
        N_COLORS * self.n_site
    }

    /// Qubit of a (0-indexed) mode. Callers guarantee the range.
    #[inline]
    pub fn qubit(&self, site: usize, color: usize) -> usize {
        debug_assert!(site < self.n_site && color < N_COLORS);
        match self.scheme {
            Labeling::ColorUniform => color * self.n_site + site,
            Labeling::ColorAlternating => N_COLORS * site + color,
        }
    }

    /// Inverse of [`QubitLabeling::qubit`]: the `(site, color)` stored on a qubit.
    pub fn mode(&self, qubit: usize) -> (usize, usize) {
        match self.scheme {
            Labeling::ColorUniform => (qubit % self.n_site, qubit / self.n_site),
            Labeling::ColorAlternating => (qubit / N_COLORS, qubit % N_COLORS),
        }
    }
}

/// Qubit index of site `site` and color `color`, both 1-indexed as in user input.
pub fn qubit_index(site: usize, color: usize, labeling: QubitLabeling) -> Result<usize> {
    if site == 0 || site > labeling.n_site || color == 0 || color > N_COLORS {
        return Err(Error::ModeOutOfRange { site, color, n_site: labeling.n_site });
    }
    Ok(labeling.qubit(site - 1, color - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// A complex coefficient times a tensor product of Pauli letters (identity elsewhere).
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub coefficient: Complex64,
    letters: Vec<(usize, Pauli)>,
}

impl PauliString {
    /// Letters are sorted by qubit. Repeated qubits are multiplied together.
    pub fn new(coefficient: impl Into<Complex64>, letters: &[(usize, Pauli)]) -> Self {
        let mut by_qubit: BTreeMap<usize, Pauli> = BTreeMap::new();
        let mut coefficient = coefficient.into();
        for &(q, p) in letters {
            match by_qubit.remove(&q) {
                None => {
                    by_qubit.insert(q, p);
                }
                Some(prev) => {
                    let (phase, product) = multiply_letters(prev, p);
                    coefficient *= phase;
                    if let Some(product) = product {
                        by_qubit.insert(q, product);
                    }
                }
            }
        }
        Self { coefficient, letters: by_qubit.into_iter().collect() }
    }

    pub fn identity(coefficient: impl Into<Complex64>) -> Self {
        Self { coefficient: coefficient.into(), letters: Vec::new() }
    }

    pub fn letters(&self) -> &[(usize, Pauli)] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.letters.last().map(|&(q, _)| q)
    }

    /// Bit masks `(flip, sign)`: qubits carrying X/Y flip, qubits carrying Y/Z pick up a sign.
    pub fn masks(&self) -> (usize, usize) {
        let mut flip = 0usize;
        let mut sign = 0usize;
        for &(q, p) in &self.letters {
            match p {
                Pauli::X => flip |= 1 << q,
                Pauli::Y => {
                    flip |= 1 << q;
                    sign |= 1 << q;
                }
                Pauli::Z => sign |= 1 << q,
            }
        }
        (flip, sign)
    }

    /// Coefficient times `i^(number of Y letters)`; the string maps `|z>` to
    /// `base_phase * (-1)^popcount(z & sign) |z ^ flip>`.
    pub fn base_phase(&self) -> Complex64 {
        let n_y = self.letters.iter().filter(|(_, p)| *p == Pauli::Y).count();
        self.coefficient * Complex64::i().powu(n_y as u32)
    }

    /// Image of a computational basis state.
    #[inline]
    pub fn apply_to_basis(&self, z: usize) -> (usize, Complex64) {
        let (flip, sign) = self.masks();
        let s = if (z & sign).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
        (z ^ flip, self.base_phase() * s)
    }

    /// Product `self * other`.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        PauliString::new(self.coefficient * other.coefficient, &letters)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:+}{:+}i)", self.coefficient.re, self.coefficient.im)?;
        if self.letters.is_empty() {
            return write!(f, " I");
        }
        for &(q, p) in &self.letters {
            write!(f, " {:?}{}", p, q)?;
        }
        Ok(())
    }
}

fn multiply_letters(a: Pauli, b: Pauli) -> (Complex64, Option<Pauli>) {
    use Pauli::*;
    let i = Complex64::i();
    match (a, b) {
        (X, X) | (Y, Y) | (Z, Z) => (Complex64::new(1.0, 0.0), None),
        (X, Y) => (i, Some(Z)),
        (Y, X) => (-i, Some(Z)),
        (Y, Z) => (i, Some(X)),
        (Z, Y) => (-i, Some(X)),
        (Z, X) => (i, Some(Y)),
        (X, Z) => (-i, Some(Y)),
    }
}

/// A sum of Pauli strings with merged duplicates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PauliSum {
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(terms: impl IntoIterator<Item = PauliString>) -> Self {
        let mut merged: BTreeMap<Vec<(usize, Pauli)>, Complex64> = BTreeMap::new();
        for t in terms {
            *merged.entry(t.letters).or_default() += t.coefficient;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.norm() > 1e-14)
            .map(|(letters, coefficient)| PauliString { coefficient, letters })
            .collect();
        Self { terms }
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.terms.iter().map(|t| PauliString {
            coefficient: t.coefficient * factor,
            letters: t.letters.clone(),
        }))
    }

    pub fn plus(&self, other: &PauliSum) -> Self {
        Self::new(self.terms.iter().chain(other.terms.iter()).cloned())
    }

    pub fn mul(&self, other: &PauliSum) -> Self {
        Self::new(
            self.terms
                .iter()
                .flat_map(|a| other.terms.iter().map(move |b| a.mul(b))),
        )
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.terms.iter().map(|t| PauliString {
            coefficient: t.coefficient.conj(),
            letters: t.letters.clone(),
        }))
    }

    /// Diagonal in the computational basis (only Z letters).
    pub fn is_diagonal(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.letters.iter().all(|&(_, p)| p == Pauli::Z))
    }

    /// All basis-state matrix elements are real.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| t.base_phase().im.abs() < 1e-14)
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.terms.iter().filter_map(|t| t.max_qubit()).max()
    }

    /// Eigenvalue on a basis state; only meaningful for diagonal sums.
    pub fn diagonal_value(&self, z: usize) -> f64 {
        debug_assert!(self.is_diagonal());
        self.terms.iter().map(|t| t.apply_to_basis(z).1.re).sum()
    }

    /// `out = self * input` on a complex amplitude vector.
    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for t in &self.terms {
            let (flip, sign) = t.masks();
            let phase = t.base_phase();
            for (z, &a) in input.iter().enumerate() {
                let s = if (z & sign).count_ones() & 1 == 1 { -phase } else { phase };
                out[z ^ flip] += s * a;
            }
        }
    }

    /// `out = self * input` on a real amplitude vector. Requires [`PauliSum::is_real`].
    pub fn apply_real(&self, input: &[f64], out: &mut [f64]) {
        assert!(self.is_real(), "apply_real on an operator with complex matrix elements");
        out.iter_mut().for_each(|x| *x = 0.0);
        for t in &self.terms {
            let (flip, sign) = t.masks();
            let phase = t.base_phase().re;
            for (z, &a) in input.iter().enumerate() {
                let s = if (z & sign).count_ones() & 1 == 1 { -phase } else { phase };
                out[z ^ flip] += s * a;
            }
        }
    }

    /// Dense `2^n x 2^n` matrix, row-major. For small test systems.
    pub fn to_dense(&self, n_qubits: usize) -> Vec<Vec<Complex64>> {
        let dim = 1usize << n_qubits;
        let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for t in &self.terms {
            for z in 0..dim {
                let (w, phase) = t.apply_to_basis(z);
                m[w][z] += phase;
            }
        }
        m
    }
}

impl FromIterator<PauliString> for PauliSum {
    fn from_iter<I: IntoIterator<Item = PauliString>>(iter: I) -> Self {
        PauliSum::new(iter)
    }
}

fn z_string(lo: usize, hi: usize) -> impl Iterator<Item = (usize, Pauli)> {
    (lo + 1..hi).map(|q| (q, Pauli::Z))
}

/// `n_{site,color} -> (I - Z)/2`.
pub fn jw_number(site: usize, color: usize, labeling: QubitLabeling) -> PauliSum {
    let q = labeling.qubit(site, color);
    PauliSum::new([PauliString::identity(0.5), PauliString::new(-0.5, &[(q, Pauli::Z)])])
}

/// `c†_{i,color} c_{j,color} + h.c. -> (XX + YY)/2` with a Z string strictly between.
pub fn jw_hop(i: usize, j: usize, color: usize, labeling: QubitLabeling) -> PauliSum {
    let (p, r) = (labeling.qubit(i, color), labeling.qubit(j, color));
    let (lo, hi) = (p.min(r), p.max(r));
    let mut xx = vec![(lo, Pauli::X), (hi, Pauli::X)];
    let mut yy = vec![(lo, Pauli::Y), (hi, Pauli::Y)];
    xx.extend(z_string(lo, hi));
    yy.extend(z_string(lo, hi));
    PauliSum::new([PauliString::new(0.5, &xx), PauliString::new(0.5, &yy)])
}

/// `(n_a - 1/2)(n_b - 1/2) -> Z_a Z_b / 4`.
pub fn jw_pair_density(site: usize, a: usize, b: usize, labeling: QubitLabeling) -> PauliSum {
    let (qa, qb) = (labeling.qubit(site, a), labeling.qubit(site, b));
    PauliSum::new([PauliString::new(0.25, &[(qa, Pauli::Z), (qb, Pauli::Z)])])
}

/// `n_1 n_2 n_3 -> (I - Z_1)(I - Z_2)(I - Z_3)/8`, eight strings.
pub fn jw_triple(site: usize, labeling: QubitLabeling) -> PauliSum {
    let qs: Vec<usize> = (0..N_COLORS).map(|c| labeling.qubit(site, c)).collect();
    let mut terms = Vec::with_capacity(8);
    for subset in 0..8u32 {
        let letters: Vec<(usize, Pauli)> = (0..3)
            .filter(|k| subset >> k & 1 == 1)
            .map(|k| (qs[k], Pauli::Z))
            .collect();
        let sign = if subset.count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        terms.push(PauliString::new(sign / 8.0, &letters));
    }
    PauliSum::new(terms)
}

/// Annihilation operator `c_q = (X_q + iY_q)/2 * prod_{j<q} Z_j` of the mode on qubit `q`.
pub fn jw_annihilation(q: usize) -> PauliSum {
    let mut x: Vec<(usize, Pauli)> = (0..q).map(|j| (j, Pauli::Z)).collect();
    let mut y = x.clone();
    x.push((q, Pauli::X));
    y.push((q, Pauli::Y));
    PauliSum::new([
        PauliString::new(0.5, &x),
        PauliString::new(Complex64::new(0.0, 0.5), &y),
    ])
}

/// Encodes a list of fermion terms.
pub fn encode_terms(terms: &[FermionTerm], labeling: QubitLabeling) -> PauliSum {
    let mut out = Vec::new();
    for t in terms {
        let encoded = match t.kind {
            TermKind::Hop { i, j, color } => jw_hop(i, j, color, labeling),
            TermKind::PairDensity { site, a, b } => jw_pair_density(site, a, b, labeling),
            TermKind::TripleDensity { site } => jw_triple(site, labeling),
        };
        out.extend(encoded.scaled(t.coefficient).terms);
    }
    PauliSum::new(out)
}

/// Encoded kinetic, interaction and triple-occupancy operators of one lattice.
#[derive(Debug, Clone)]
pub struct Observables {
    pub kinetic: PauliSum,
    pub interaction: PauliSum,
    pub triple: PauliSum,
}

impl Observables {
    pub fn new(lattice: &LatticeSpec, hopping: f64, labeling: QubitLabeling) -> Self {
        Self {
            kinetic: encode_terms(&model::kinetic_terms(lattice, hopping), labeling),
            interaction: encode_terms(&model::interaction_terms(lattice), labeling),
            triple: encode_terms(&model::triple_occupancy_terms(lattice), labeling),
        }
    }

    pub fn hamiltonian(&self, interaction: f64) -> PauliSum {
        self.kinetic.plus(&self.interaction.scaled(interaction))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapDirection {
    /// Color-uniform order to color-alternating order.
    ToAlternating,
    /// Color-alternating order back to color-uniform order.
    ToUniform,
}

/// Adjacent fermionic swaps; entry `q` swaps qubits `q` and `q + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapNetwork {
    pub n_site: usize,
    pub direction: SwapDirection,
    pub swaps: Vec<usize>,
}

impl SwapNetwork {
    pub fn len(&self) -> usize {
        self.swaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.swaps.is_empty()
    }

    pub fn reversed(&self) -> SwapNetwork {
        SwapNetwork {
            n_site: self.n_site,
            direction: match self.direction {
                SwapDirection::ToAlternating => SwapDirection::ToUniform,
                SwapDirection::ToUniform => SwapDirection::ToAlternating,
            },
            swaps: self.swaps.iter().rev().copied().collect(),
        }
    }
}

/// Bubble-sort network between the two labelings.
pub fn fswap_network(n_site: usize, direction: SwapDirection) -> SwapNetwork {
    let uniform = QubitLabeling::new(Labeling::ColorUniform, n_site);
    let alternating = QubitLabeling::new(Labeling::ColorAlternating, n_site);
    // keys[q]: target position of the mode currently on qubit q.
    let mut keys: Vec<usize> = (0..uniform.n_qubits())
        .map(|q| {
            let (site, color) = uniform.mode(q);
            alternating.qubit(site, color)
        })
        .collect();
    let mut swaps = Vec::new();
    let n = keys.len();
    for pass in 0..n {
        let mut swapped = false;
        for q in 0..n.saturating_sub(pass + 1) {
            if keys[q] > keys[q + 1] {
                keys.swap(q, q + 1);
                swaps.push(q);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    let forward = SwapNetwork { n_site, direction: SwapDirection::ToAlternating, swaps };
    match direction {
        SwapDirection::ToAlternating => forward,
        SwapDirection::ToUniform => forward.reversed(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_lattice, Geometry};

    fn cu(n: usize) -> QubitLabeling {
        QubitLabeling::new(Labeling::ColorUniform, n)
    }

    fn ca(n: usize) -> QubitLabeling {
        QubitLabeling::new(Labeling::ColorAlternating, n)
    }

    #[test]
    fn qubit_indices() {
        assert_eq!(qubit_index(2, 1, cu(2)).unwrap(), 1);
        assert_eq!(qubit_index(2, 1, ca(2)).unwrap(), 3);
        assert_eq!(qubit_index(1, 3, cu(4)).unwrap(), 8);
        assert!(qubit_index(0, 1, cu(2)).is_err());
        assert!(qubit_index(3, 1, cu(2)).is_err());
        assert!(qubit_index(1, 4, cu(2)).is_err());
        for l in [cu(3), ca(3)] {
            for q in 0..9 {
                let (s, c) = l.mode(q);
                assert_eq!(l.qubit(s, c), q);
            }
        }
    }

    #[test]
    fn hop_strings() {
        let h = jw_hop(0, 1, 0, cu(2));
        assert_eq!(h.len(), 2);
        assert!(h.terms().iter().all(|t| t.letters().len() == 2));
        let h = jw_hop(0, 2, 0, cu(4));
        for t in h.terms() {
            assert!(t.letters().contains(&(1, Pauli::Z)));
            assert_eq!(t.letters().len(), 3);
        }
    }

    #[test]
    fn number_and_pair_density_on_basis_states() {
        let n = jw_number(1, 2, cu(2));
        let q = cu(2).qubit(1, 2);
        assert_eq!(n.diagonal_value(0), 0.0);
        assert_eq!(n.diagonal_value(1 << q), 1.0);
        let d = jw_pair_density(0, 0, 1, cu(1));
        assert_eq!(d.diagonal_value(0b000), 0.25);
        assert_eq!(d.diagonal_value(0b010), -0.25);
        let all: PauliSum = (0..3)
            .flat_map(|k| {
                let (a, b) = crate::model::COLOR_PAIRS[k];
                jw_pair_density(0, a, b, cu(1)).terms().to_vec()
            })
            .collect();
        assert_eq!(all.diagonal_value(0b111), 0.75);
    }

    #[test]
    fn pair_density_sum_matches_enumeration() {
        let l = build_lattice(Geometry::ChainOpen, &[2]).unwrap();
        let d = encode_terms(&crate::model::interaction_terms(&l), cu(2));
        for z in 0..64usize {
            let expected =
                crate::model::interaction_eigenvalue(2, |s, c| z >> cu(2).qubit(s, c) & 1 == 1);
            assert!((d.diagonal_value(z) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn triple_is_projector() {
        let p = jw_triple(0, cu(1));
        assert_eq!(p.len(), 8);
        assert!((p.diagonal_value(0b111) - 1.0).abs() < 1e-15);
        for z in 0..7 {
            assert!(p.diagonal_value(z).abs() < 1e-15);
        }
    }

    #[test]
    fn pauli_products() {
        let x = PauliString::new(1.0, &[(0, Pauli::X)]);
        let y = PauliString::new(1.0, &[(0, Pauli::Y)]);
        let xy = x.mul(&y);
        assert_eq!(xy.letters(), &[(0, Pauli::Z)]);
        assert_eq!(xy.coefficient, Complex64::i());
        let xx = x.mul(&x);
        assert!(xx.is_identity());
        let merged = PauliSum::new([x.clone(), x.clone(), PauliString::new(-2.0, &[(0, Pauli::X)])]);
        assert!(merged.is_empty());
    }

    #[test]
    fn fswap_network_lengths() {
        assert!(fswap_network(1, SwapDirection::ToAlternating).is_empty());
        assert_eq!(fswap_network(2, SwapDirection::ToAlternating).len(), 3);
        assert_eq!(fswap_network(4, SwapDirection::ToAlternating).len(), 18);
        for n in 1..7 {
            assert_eq!(fswap_network(n, SwapDirection::ToUniform).len(), 3 * n * (n - 1) / 2);
        }
    }

    #[test]
    fn fswap_network_permutes_labels() {
        for n in 1..6 {
            let net = fswap_network(n, SwapDirection::ToAlternating);
            let (uniform, alternating) = (cu(n), ca(n));
            let mut modes: Vec<(usize, usize)> = (0..3 * n).map(|q| uniform.mode(q)).collect();
            for &q in &net.swaps {
                modes.swap(q, q + 1);
            }
            for (q, &(s, c)) in modes.iter().enumerate() {
                assert_eq!(alternating.qubit(s, c), q);
            }
        }
    }
}
