//! Lattice geometry and the attractive SU(3) Hubbard Hamiltonian as fermionic terms.
//!
//! Sites are 0-indexed here and 1-indexed in anything printed for users. Colors are
//! 0, 1, 2 internally and 1, 2, 3 in user-facing output.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of fermion colors.
pub const N_COLORS: usize = 3;

/// On-site color pairs in the global operator order (12), (13), (23).
pub const COLOR_PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    ChainOpen,
    ChainPeriodic,
    SquarePeriodic,
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::ChainOpen => "chain-open",
            Geometry::ChainPeriodic => "chain-periodic",
            Geometry::SquarePeriodic => "square-periodic",
        })
    }
}

impl std::str::FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain-open" => Ok(Geometry::ChainOpen),
            "chain-periodic" => Ok(Geometry::ChainPeriodic),
            "square-periodic" => Ok(Geometry::SquarePeriodic),
            other => Err(Error::InvalidLattice(format!("unknown geometry '{other}'"))),
        }
    }
}

/// A lattice with its nearest-neighbor bonds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSpec {
    geometry: Geometry,
    dims: Vec<usize>,
    n_site: usize,
    edges: Vec<(usize, usize)>,
}

impl LatticeSpec {
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_site(&self) -> usize {
        self.n_site
    }

    /// Bonds as `(min, max)` site pairs, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Number of fermion modes, `3 * n_site`.
    pub fn n_modes(&self) -> usize {
        N_COLORS * self.n_site
    }

    /// Single-particle hopping matrix for one color: `-J` on every bond.
    pub fn hopping_matrix(&self, hopping: f64) -> Vec<Vec<f64>> {
        let mut h = vec![vec![0.0; self.n_site]; self.n_site];
        for &(i, j) in &self.edges {
            h[i][j] -= hopping;
            h[j][i] -= hopping;
        }
        h
    }
}

impl fmt::Display for LatticeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "{} {}", self.geometry, dims.join("x"))
    }
}

/// Builds a lattice. Chains take one dimension (the length), square lattices two.
pub fn build_lattice(geometry: Geometry, dims: &[usize]) -> Result<LatticeSpec> {
    let mut edges = BTreeSet::new();
    let mut add = |a: usize, b: usize| {
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    };
    let n_site = match geometry {
        Geometry::ChainOpen | Geometry::ChainPeriodic => {
            let &[len] = dims else {
                return Err(Error::InvalidLattice(format!(
                    "a chain takes one dimension, got {}",
                    dims.len()
                )));
            };
            if len < 2 {
                return Err(Error::InvalidLattice(format!(
                    "chain length must be at least 2, got {len}"
                )));
            }
            for i in 0..len - 1 {
                add(i, i + 1);
            }
            if geometry == Geometry::ChainPeriodic {
                add(len - 1, 0);
            }
            len
        }
        Geometry::SquarePeriodic => {
            let &[lx, ly] = dims else {
                return Err(Error::InvalidLattice(format!(
                    "a square lattice takes two dimensions, got {}",
                    dims.len()
                )));
            };
            if lx < 2 || ly < 2 {
                return Err(Error::InvalidLattice(format!(
                    "square dimensions must be at least 2, got {lx}x{ly}"
                )));
            }
            let site = |x: usize, y: usize| x + lx * y;
            for y in 0..ly {
                for x in 0..lx {
                    add(site(x, y), site((x + 1) % lx, y));
                    add(site(x, y), site(x, (y + 1) % ly));
                }
            }
            lx * ly
        }
    };
    Ok(LatticeSpec {
        geometry,
        dims: dims.to_vec(),
        n_site,
        edges: edges.into_iter().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Hopping amplitude J.
    pub hopping: f64,
    /// On-site interaction U (negative for attraction).
    pub interaction: f64,
}

impl ModelParams {
    pub fn new(hopping: f64, interaction: f64) -> Result<Self> {
        if !(hopping > 0.0) || !hopping.is_finite() {
            return Err(Error::Config(format!("hopping J must be positive, got {hopping}")));
        }
        if !interaction.is_finite() {
            return Err(Error::Config(format!("interaction U must be finite, got {interaction}")));
        }
        Ok(Self { hopping, interaction })
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { hopping: 1.0, interaction: -1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    /// `c†_{i,color} c_{j,color} + h.c.`
    Hop { i: usize, j: usize, color: usize },
    /// `(n_{site,a} - 1/2)(n_{site,b} - 1/2)` with `a < b`.
    PairDensity { site: usize, a: usize, b: usize },
    /// `n_{site,1} n_{site,2} n_{site,3}`
    TripleDensity { site: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermionTerm {
    pub kind: TermKind,
    pub coefficient: f64,
}

/// Hopping terms (coefficient `-J`) followed by pair-density terms (coefficient `U`).
pub fn hamiltonian_terms(lattice: &LatticeSpec, params: &ModelParams) -> Vec<FermionTerm> {
    let mut terms = kinetic_terms(lattice, params.hopping);
    terms.extend(
        interaction_terms(lattice)
            .into_iter()
            .map(|t| FermionTerm { coefficient: params.interaction, ..t }),
    );
    terms
}

/// The kinetic operator K with hopping amplitude `hopping`.
pub fn kinetic_terms(lattice: &LatticeSpec, hopping: f64) -> Vec<FermionTerm> {
    let mut terms = Vec::with_capacity(N_COLORS * lattice.edges.len());
    for &(i, j) in &lattice.edges {
        for color in 0..N_COLORS {
            terms.push(FermionTerm { kind: TermKind::Hop { i, j, color }, coefficient: -hopping });
        }
    }
    terms
}

/// The interaction operator D with unit coefficients.
pub fn interaction_terms(lattice: &LatticeSpec) -> Vec<FermionTerm> {
    let mut terms = Vec::with_capacity(N_COLORS * lattice.n_site);
    for site in 0..lattice.n_site {
        for &(a, b) in &COLOR_PAIRS {
            terms.push(FermionTerm { kind: TermKind::PairDensity { site, a, b }, coefficient: 1.0 });
        }
    }
    terms
}

/// The triple-occupancy operator P3, one term per site.
pub fn triple_occupancy_terms(lattice: &LatticeSpec) -> Vec<FermionTerm> {
    (0..lattice.n_site)
        .map(|site| FermionTerm { kind: TermKind::TripleDensity { site }, coefficient: 1.0 })
        .collect()
}

/// Eigenvalue of D on an occupation pattern, `occupied(site, color)`.
pub fn interaction_eigenvalue(n_site: usize, occupied: impl Fn(usize, usize) -> bool) -> f64 {
    let mut d = 0.0;
    for site in 0..n_site {
        for &(a, b) in &COLOR_PAIRS {
            let za = if occupied(site, a) { 0.5 } else { -0.5 };
            let zb = if occupied(site, b) { 0.5 } else { -0.5 };
            d += za * zb;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_chain_edges() {
        let l = build_lattice(Geometry::ChainOpen, &[4]).unwrap();
        assert_eq!(l.edges(), &[(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn periodic_chain_of_two_has_one_bond() {
        let l = build_lattice(Geometry::ChainPeriodic, &[2]).unwrap();
        assert_eq!(l.edges(), &[(0, 1)]);
        let l = build_lattice(Geometry::ChainPeriodic, &[5]).unwrap();
        assert_eq!(l.edges().len(), 5);
    }

    #[test]
    fn square_two_by_two_is_a_four_ring() {
        let sq = build_lattice(Geometry::SquarePeriodic, &[2, 2]).unwrap();
        assert_eq!(sq.edges().len(), 4);
        // Relabel the square's cycle 0-1-3-2 as a ring 0-1-2-3.
        let ring = build_lattice(Geometry::ChainPeriodic, &[4]).unwrap();
        let perm = [0, 1, 3, 2];
        let mut mapped: Vec<(usize, usize)> = ring
            .edges()
            .iter()
            .map(|&(a, b)| (perm[a].min(perm[b]), perm[a].max(perm[b])))
            .collect();
        mapped.sort();
        assert_eq!(mapped, sq.edges());
        let big = build_lattice(Geometry::SquarePeriodic, &[3, 4]).unwrap();
        assert_eq!(big.edges().len(), 24);
        let thin = build_lattice(Geometry::SquarePeriodic, &[2, 3]).unwrap();
        assert_eq!(thin.edges().len(), 3 + 6);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(build_lattice(Geometry::ChainOpen, &[1]).is_err());
        assert!(build_lattice(Geometry::ChainOpen, &[0]).is_err());
        assert!(build_lattice(Geometry::SquarePeriodic, &[2, 1]).is_err());
        assert!(build_lattice(Geometry::SquarePeriodic, &[4]).is_err());
        assert!(ModelParams::new(0.0, -1.0).is_err());
    }

    #[test]
    fn term_counts() {
        let params = ModelParams::new(1.0, -1.0).unwrap();
        let two = build_lattice(Geometry::ChainOpen, &[2]).unwrap();
        let terms = hamiltonian_terms(&two, &params);
        let hops: Vec<_> = terms.iter().filter(|t| matches!(t.kind, TermKind::Hop { .. })).collect();
        assert_eq!(hops.len(), 3);
        assert!(hops.iter().all(|t| t.coefficient == -1.0));
        assert_eq!(terms.len() - hops.len(), 6);

        let four = build_lattice(Geometry::ChainOpen, &[4]).unwrap();
        let terms = hamiltonian_terms(&four, &params);
        assert_eq!(terms.len(), 9 + 12);
        assert_eq!(triple_occupancy_terms(&four).len(), 4);
        assert_eq!(
            triple_occupancy_terms(&two).iter().map(|t| t.kind).collect::<Vec<_>>(),
            vec![TermKind::TripleDensity { site: 0 }, TermKind::TripleDensity { site: 1 }]
        );
    }

    #[test]
    fn interaction_eigenvalue_patterns() {
        assert_eq!(interaction_eigenvalue(1, |_, _| true), 0.75);
        assert_eq!(interaction_eigenvalue(1, |_, _| false), 0.75);
        assert_eq!(interaction_eigenvalue(1, |_, c| c < 2), -0.25);
        assert_eq!(interaction_eigenvalue(1, |_, c| c == 0), -0.25);
    }
}
