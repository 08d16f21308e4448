//! The Gutzwiller operator as a linear combination of unitaries.
//!
//! Each on-site color pair contributes
//! `exp(-g (n_a - 1/2)(n_b - 1/2)) = gamma * sum_{s = +-1} exp(s lambda (c†_a c_b - c†_b c_a))`,
//! realized with one ancilla: `H`, a Givens rotation by `+lambda`, a rotation by
//! `-2 lambda` controlled on the ancilla, `H`. Postselecting every ancilla on `|0>`
//! leaves `(2 gamma)^{-3N} exp(-g D)` acting on the register.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::Rng;

use crate::encoding::{fswap_network, Labeling, Pauli, PauliString, PauliSum, QubitLabeling, SwapDirection};
use crate::error::{Error, Result};
use crate::model::{LatticeSpec, COLOR_PAIRS, N_COLORS};
use crate::oracle::InteractionTable;
use crate::statevector::{apply_fgivens_real, circuit_matrix, Circuit, Gate, StateVector};
use crate::trialstate::fermi_sea_circuit;

/// Variational parameter and the derived auxiliary-field constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GutzwillerParams {
    pub g: f64,
    /// `exp(-g/4) / 2`
    pub gamma: f64,
    /// `arccos(exp(g/2))`
    pub lambda: f64,
}

pub fn hs_params(g: f64) -> Result<GutzwillerParams> {
    if !(g <= 0.0) {
        return Err(Error::RepulsiveCoupling(g));
    }
    Ok(GutzwillerParams { g, gamma: 0.5 * (-g / 4.0).exp(), lambda: (g / 2.0).exp().acos() })
}

/// Largest elementwise deviation between both sides of the single-pair identity on two modes.
pub fn hs_identity_check(g: f64) -> Result<f64> {
    let p = hs_params(g)?;
    let plus = circuit_matrix(2, &[Gate::Givens { a: 0, b: 1, theta: p.lambda }])?;
    let minus = circuit_matrix(2, &[Gate::Givens { a: 0, b: 1, theta: -p.lambda }])?;
    let mut worst = 0.0f64;
    for col in 0..4usize {
        for row in 0..4usize {
            let equal = col.count_ones() != 1;
            let lhs = if row != col {
                0.0
            } else if equal {
                (-g / 4.0).exp()
            } else {
                (g / 4.0).exp()
            };
            let rhs = (plus[col][row] + minus[col][row]) * p.gamma;
            worst = worst.max((rhs - Complex64::new(lhs, 0.0)).norm());
        }
    }
    Ok(worst)
}

/// Qubit map and gates of the ancilla circuit.
///
/// Qubits `0..3N` hold the register in the color-uniform labeling, `3N..6N` the
/// ancillas (ancilla `3N + 3 i + p` for site `i` and color pair `p`), and qubit `6N`
/// the optional Hadamard-test ancilla.
#[derive(Debug, Clone, PartialEq)]
pub struct LcuLayout {
    pub n_site: usize,
    pub params: GutzwillerParams,
    pub hadamard: Option<usize>,
    pub circuit: Circuit,
}

impl LcuLayout {
    pub fn n_register(&self) -> usize {
        N_COLORS * self.n_site
    }

    pub fn ancilla(&self, site: usize, pair: usize) -> usize {
        self.n_register() + N_COLORS * site + pair
    }

    pub fn ancillas(&self) -> Vec<usize> {
        (self.n_register()..2 * self.n_register()).collect()
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits()
    }
}

fn push_network(circuit: &mut Circuit, n_site: usize, direction: SwapDirection) -> Result<()> {
    for &q in &fswap_network(n_site, direction).swaps {
        circuit.push(Gate::Fswap(q, q + 1))?;
    }
    Ok(())
}

/// Builds the ancilla circuit, optionally preceded by a trial-state circuit on the register.
pub fn build_lcu_circuit(
    n_site: usize,
    g: f64,
    trial: Option<&Circuit>,
    hadamard_ancilla: bool,
) -> Result<LcuLayout> {
    let params = hs_params(g)?;
    let n_register = N_COLORS * n_site;
    let n_qubits = 2 * n_register + usize::from(hadamard_ancilla);
    let mut circuit = Circuit::new(n_qubits);
    if let Some(t) = trial {
        circuit.append(t)?;
    }
    push_network(&mut circuit, n_site, SwapDirection::ToAlternating)?;
    let alternating = QubitLabeling::new(Labeling::ColorAlternating, n_site);
    for site in 0..n_site {
        for (p, &(ca, cb)) in COLOR_PAIRS.iter().enumerate() {
            let (a, b) = (alternating.qubit(site, ca), alternating.qubit(site, cb));
            let anc = n_register + N_COLORS * site + p;
            circuit.push(Gate::H(anc))?;
            circuit.push(Gate::FGivens { a, b, theta: params.lambda })?;
            circuit.push(Gate::controlled(anc, Gate::FGivens { a, b, theta: -2.0 * params.lambda }))?;
            circuit.push(Gate::H(anc))?;
        }
    }
    push_network(&mut circuit, n_site, SwapDirection::ToUniform)?;
    Ok(LcuLayout {
        n_site,
        params,
        hadamard: hadamard_ancilla.then_some(2 * n_register),
        circuit,
    })
}

/// The ancilla block compiled to CZ, controlled rotations and single-qubit rotations.
///
/// Each fermionic rotation pair `FGivens(lambda)` followed by the controlled
/// `FGivens(-2 lambda)` shares its basis changes and CZ gates, leaving two CZ, one
/// controlled Rx and one controlled Ry per pair, plus two CZ for the Jordan-Wigner
/// string of the (13) pair.
pub fn lcu_native_circuit(n_site: usize, g: f64) -> Result<Circuit> {
    let params = hs_params(g)?;
    let lambda = params.lambda;
    let n_register = N_COLORS * n_site;
    let mut circuit = Circuit::new(2 * n_register);
    push_network(&mut circuit, n_site, SwapDirection::ToAlternating)?;
    let alternating = QubitLabeling::new(Labeling::ColorAlternating, n_site);
    for site in 0..n_site {
        for (p, &(ca, cb)) in COLOR_PAIRS.iter().enumerate() {
            let (a, b) = (alternating.qubit(site, ca), alternating.qubit(site, cb));
            let anc = n_register + N_COLORS * site + p;
            let ladder: Vec<Gate> = (a.min(b) + 1..a.max(b)).map(|l| Gate::Cz(b, l)).collect();
            let gates = ladder
                .iter()
                .cloned()
                .chain([
                    Gate::H(anc),
                    Gate::Rx(a, FRAC_PI_2),
                    Gate::Ry(b, FRAC_PI_2),
                    Gate::Rx(b, FRAC_PI_2),
                    Gate::Cz(a, b),
                    Gate::Rx(a, -lambda),
                    Gate::Ry(b, lambda),
                    Gate::controlled(anc, Gate::Rx(a, 2.0 * lambda)),
                    Gate::controlled(anc, Gate::Ry(b, -2.0 * lambda)),
                    Gate::Cz(a, b),
                    Gate::Rx(a, -FRAC_PI_2),
                    Gate::Rx(b, -FRAC_PI_2),
                    Gate::Ry(b, -FRAC_PI_2),
                    Gate::H(anc),
                ])
                .chain(ladder.iter().cloned());
            for gate in gates {
                circuit.push(gate)?;
            }
        }
    }
    push_network(&mut circuit, n_site, SwapDirection::ToUniform)?;
    Ok(circuit)
}

/// CNOT-equivalent cost of a gate: CZ and CNOT 1, f-SWAP and Givens 2 (iSWAP class),
/// SWAP 3, controlled single-qubit rotations 2, single-qubit gates 0.
pub fn cnot_cost(gate: &Gate) -> usize {
    match gate {
        Gate::Cz(..) | Gate::Cnot { .. } => 1,
        Gate::Fswap(..) | Gate::Givens { .. } => 2,
        Gate::FGivens { .. } => 2 + 2 * gate.string_mask().count_ones() as usize,
        Gate::Swap(..) => 3,
        Gate::Controlled { gate, .. } => match **gate {
            Gate::X(_) | Gate::Z(_) => 1,
            Gate::Y(_) | Gate::H(_) | Gate::Rx(..) | Gate::Ry(..) | Gate::Rz(..) => 2,
            ref other => 2 * cnot_cost(other).max(1),
        },
        _ => 0,
    }
}

pub fn circuit_cnot_cost(circuit: &Circuit) -> usize {
    circuit.gates().iter().map(cnot_cost).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateCountReport {
    pub n_site: usize,
    /// CNOT equivalents of the compiled ancilla block.
    pub gutzwiller_block: usize,
    /// f-SWAP gates in one relabeling network.
    pub fswaps_per_network: usize,
    /// CNOT equivalents of both relabeling networks.
    pub relabeling: usize,
    /// Bound on trial-state preparation, `(3/2) N^2`.
    pub trial_prep_bound: f64,
    /// CNOT equivalents of the half-filled open-chain Fermi-sea circuit, for even `N`.
    pub trial_prep_actual: Option<usize>,
    /// Block, relabeling and trial-preparation bound together.
    pub total: f64,
}

impl GateCountReport {
    /// Success fidelity of the whole circuit at a uniform per-gate fidelity.
    pub fn fidelity(&self, per_gate: f64) -> f64 {
        per_gate.powf(self.total)
    }
}

/// Gate counts of the ancilla circuit for `n_site` sites, with the trial-preparation
/// bound in place of an actual circuit.
pub fn ancilla_gate_counts(n_site: usize) -> Result<GateCountReport> {
    let n = n_site;
    let native = lcu_native_circuit(n, -1.0)?;
    let fswaps_per_network = fswap_network(n, SwapDirection::ToAlternating).len();
    let relabeling = native.count("fswap") * 2;
    let gutzwiller_block = circuit_cnot_cost(&native) - relabeling;
    let trial_prep_bound = 1.5 * (n * n) as f64;
    Ok(GateCountReport {
        n_site: n,
        gutzwiller_block,
        fswaps_per_network,
        relabeling,
        trial_prep_bound,
        trial_prep_actual: None,
        total: (gutzwiller_block + relabeling) as f64 + trial_prep_bound,
    })
}

/// [`ancilla_gate_counts`] plus the cost of the half-filled Fermi-sea circuit on `lattice`.
pub fn gate_counts(lattice: &LatticeSpec, hopping: f64) -> Result<GateCountReport> {
    let n = lattice.n_site();
    let mut report = ancilla_gate_counts(n)?;
    if n.is_multiple_of(2) {
        report.trial_prep_actual = Some(circuit_cnot_cost(&fermi_sea_circuit(lattice, hopping, n / 2)?));
    }
    Ok(report)
}

/// Postselected outcome of the ancilla circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct Approach1Exact {
    /// Probability that every ancilla reads 0.
    pub p0: f64,
    /// Normalized register state after postselection, color-uniform labeling.
    pub register: StateVector,
}

/// Runs the ancilla circuit on `trial` (register qubits only) and postselects exactly.
pub fn run_approach1_exact(layout: &LcuLayout, trial: &StateVector) -> Result<Approach1Exact> {
    if layout.hadamard.is_some() {
        return Err(Error::Config("exact postselection takes a layout without a Hadamard ancilla".into()));
    }
    if trial.n_qubits() != layout.n_register() {
        return Err(Error::QubitOutOfRange { qubit: layout.n_register(), n_qubits: trial.n_qubits() });
    }
    let mut full = trial.extend_with_zeros(layout.n_register())?;
    full.apply_circuit(&layout.circuit)?;
    let ancillas = layout.ancillas();
    let mut register = full.reduce(&ancillas, &vec![false; ancillas.len()])?;
    drop(full);
    let norm = register.normalize()?;
    Ok(Approach1Exact { p0: norm * norm, register })
}

/// `d log p0 / d|g|` from the oracle, `-3N/2 + 2 <D>_g`.
pub fn success_logderivative(g: f64, trial: &StateVector, table: &InteractionTable) -> Result<f64> {
    if !(g < 0.0) {
        return Err(Error::RepulsiveCoupling(g));
    }
    crate::oracle::success_logderivative(trial, g, table)
}

/// An estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Binomial draw of postselection successes.
pub fn draw_successes<R: Rng + ?Sized>(p0: f64, n_shots: u64, rng: &mut R) -> u64 {
    (0..n_shots).filter(|_| rng.gen::<f64>() < p0).count() as u64
}

/// Postselection estimator from a shot record: `p0_hat` with stderr `sqrt((p0_hat - p0_hat^2) / n)`.
pub fn estimate_p0(n_success: u64, n_shots: u64) -> Estimate {
    let p = n_success as f64 / n_shots as f64;
    Estimate { mean: p, stderr: ((p - p * p) / n_shots as f64).sqrt() }
}

/// An observable measured by a Hadamard test: a Pauli string with coefficient `+-1`,
/// or the CCZ gate on three qubits.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitaryObservable {
    Pauli(PauliString),
    Ccz([usize; 3]),
}

impl UnitaryObservable {
    pub fn identity() -> Self {
        UnitaryObservable::Pauli(PauliString::identity(1.0))
    }

    pub fn from_pauli(p: &PauliString) -> Result<Self> {
        let c = p.coefficient;
        if c.im.abs() > 1e-14 || (c.re.abs() - 1.0).abs() > 1e-14 {
            return Err(Error::NotUnitary(format!("Pauli coefficient {c} is not +-1")));
        }
        Ok(UnitaryObservable::Pauli(p.clone()))
    }

    /// Single-term sums only.
    pub fn from_sum(op: &PauliSum) -> Result<Self> {
        match op.terms() {
            [t] => Self::from_pauli(t),
            terms => Err(Error::NotUnitary(format!("sum of {} Pauli strings", terms.len()))),
        }
    }

    fn controlled_gates(&self, control: usize) -> Vec<Gate> {
        match self {
            UnitaryObservable::Pauli(p) => {
                let mut gates: Vec<Gate> = p
                    .letters()
                    .iter()
                    .map(|&(q, letter)| {
                        let g = match letter {
                            Pauli::X => Gate::X(q),
                            Pauli::Y => Gate::Y(q),
                            Pauli::Z => Gate::Z(q),
                        };
                        Gate::controlled(control, g)
                    })
                    .collect();
                if p.coefficient.re < 0.0 {
                    gates.push(Gate::Z(control));
                }
                gates
            }
            &UnitaryObservable::Ccz([a, b, c]) => {
                vec![Gate::controlled(control, Gate::controlled(a, Gate::Cz(b, c)))]
            }
        }
    }
}

/// Exact Hadamard-test statistics on the postselected branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HadamardTest {
    pub p0: f64,
    /// `<Z>` of the test ancilla given successful postselection, i.e. `Re <psi_g|O|psi_g>`.
    pub expectation: f64,
}

impl HadamardTest {
    /// Shot estimate from `n_shots` runs; only postselected runs enter the estimator.
    pub fn sample<R: Rng + ?Sized>(&self, n_shots: u64, rng: &mut R) -> Result<(Estimate, u64)> {
        let n_success = draw_successes(self.p0, n_shots, rng);
        if n_success == 0 {
            return Err(Error::ZeroProbability);
        }
        let p_zero = 0.5 * (1.0 + self.expectation);
        let zeros = (0..n_success).filter(|_| rng.gen::<f64>() < p_zero).count() as f64;
        let n = n_success as f64;
        let mean = (2.0 * zeros - n) / n;
        Ok((Estimate { mean, stderr: ((1.0 - mean * mean).max(0.0) / n).sqrt() }, n_success))
    }
}

/// Runs the ancilla circuit with a Hadamard test of `observable` appended.
pub fn hadamard_test(layout: &LcuLayout, trial: &StateVector, observable: &UnitaryObservable) -> Result<HadamardTest> {
    let h = layout
        .hadamard
        .ok_or_else(|| Error::Config("layout has no Hadamard-test ancilla".into()))?;
    let mut circuit = layout.circuit.clone();
    circuit.push(Gate::H(h))?;
    for g in observable.controlled_gates(h) {
        circuit.push(g)?;
    }
    circuit.push(Gate::H(h))?;
    let mut full = trial.extend_with_zeros(layout.n_qubits() - trial.n_qubits())?;
    full.apply_circuit(&circuit)?;
    let mut qubits = layout.ancillas();
    qubits.push(h);
    let mut bits = vec![false; qubits.len()];
    let zero = full.probability(&qubits, &bits)?;
    *bits.last_mut().expect("test ancilla") = true;
    let one = full.probability(&qubits, &bits)?;
    let p0 = zero + one;
    if p0 <= f64::MIN_POSITIVE {
        return Err(Error::ZeroProbability);
    }
    Ok(HadamardTest { p0, expectation: (zero - one) / p0 })
}

/// CCZ observables whose expectation gives `<P3_i> = (1 - <CCZ_i>) / 2` per site.
pub fn triple_occupancy_unitaries(n_site: usize) -> Vec<UnitaryObservable> {
    let labeling = QubitLabeling::new(Labeling::ColorUniform, n_site);
    (0..n_site)
        .map(|i| UnitaryObservable::Ccz([labeling.qubit(i, 0), labeling.qubit(i, 1), labeling.qubit(i, 2)]))
        .collect()
}

/// Greedy grouping of Pauli strings into qubit-wise commuting sets.
pub fn qubitwise_groups(terms: &[PauliString]) -> Vec<Vec<usize>> {
    let mut groups: Vec<(Vec<Option<Pauli>>, Vec<usize>)> = Vec::new();
    let width = terms.iter().filter_map(PauliString::max_qubit).max().map_or(0, |q| q + 1);
    for (k, t) in terms.iter().enumerate() {
        let fits = |basis: &Vec<Option<Pauli>>| {
            t.letters().iter().all(|&(q, l)| basis[q].is_none_or(|b| b == l))
        };
        match groups.iter_mut().find(|(basis, _)| fits(basis)) {
            Some((basis, members)) => {
                for &(q, l) in t.letters() {
                    basis[q] = Some(l);
                }
                members.push(k);
            }
            None => {
                let mut basis = vec![None; width];
                for &(q, l) in t.letters() {
                    basis[q] = Some(l);
                }
                groups.push((basis, vec![k]));
            }
        }
    }
    groups.into_iter().map(|(_, m)| m).collect()
}

/// Estimates each observable from computational-basis shots on the postselected register.
///
/// Terms of all observables are grouped into qubit-wise commuting sets; each set is
/// measured with `n_success` shots after rotating X to Z (H) and Y to Z (Rx(pi/2)).
/// Variances are propagated per set and summed.
pub fn direct_measurement<R: Rng + ?Sized>(
    register: &StateVector,
    observables: &[&PauliSum],
    n_success: u64,
    rng: &mut R,
) -> Result<Vec<Estimate>> {
    if n_success < 2 {
        return Err(Error::ZeroProbability);
    }
    let mut terms: Vec<PauliString> = Vec::new();
    let mut owners: Vec<(usize, f64)> = Vec::new();
    let mut estimates: Vec<Estimate> = vec![Estimate { mean: 0.0, stderr: 0.0 }; observables.len()];
    for (k, op) in observables.iter().enumerate() {
        if !op.is_real() {
            return Err(Error::NotHermitian(f64::NAN));
        }
        for t in op.terms() {
            if t.is_identity() {
                estimates[k].mean += t.coefficient.re;
            } else {
                owners.push((k, t.coefficient.re));
                terms.push(t.clone());
            }
        }
    }
    let mut variances = vec![0.0; observables.len()];
    for group in qubitwise_groups(&terms) {
        let mut rotated = register.clone();
        let mut done = vec![false; register.n_qubits()];
        for &k in &group {
            for &(q, l) in terms[k].letters() {
                if !done[q] {
                    done[q] = true;
                    match l {
                        Pauli::X => rotated.apply_gate(&Gate::H(q))?,
                        Pauli::Y => rotated.apply_gate(&Gate::Rx(q, FRAC_PI_2))?,
                        Pauli::Z => {}
                    }
                }
            }
        }
        let counts = rotated.sample_counts(n_success, rng);
        let supports: Vec<usize> = group
            .iter()
            .map(|&k| terms[k].letters().iter().fold(0usize, |m, &(q, _)| m | 1 << q))
            .collect();
        for (obs, est) in estimates.iter_mut().enumerate() {
            let members: Vec<(usize, f64)> = group
                .iter()
                .zip(&supports)
                .filter(|(&k, _)| owners[k].0 == obs)
                .map(|(&k, &m)| (m, owners[k].1))
                .collect();
            if members.is_empty() {
                continue;
            }
            let (mut sum, mut sum2) = (0.0, 0.0);
            for (&z, &c) in &counts {
                let value: f64 = members
                    .iter()
                    .map(|&(m, coeff)| if (z & m).count_ones() & 1 == 1 { -coeff } else { coeff })
                    .sum();
                sum += value * c as f64;
                sum2 += value * value * c as f64;
            }
            let n = n_success as f64;
            let mean = sum / n;
            est.mean += mean;
            variances[obs] += (sum2 / n - mean * mean) * n / (n - 1.0) / n;
        }
    }
    for (e, v) in estimates.iter_mut().zip(variances) {
        e.stderr = v.max(0.0).sqrt();
    }
    Ok(estimates)
}

/// Maximum elementwise deviation between `gamma^{3N L} sum_s prod FGivens(s lambda)` over
/// `layers` stacked layers and the diagonal `exp(-L g D)`, color-alternating labeling.
pub fn lcu_sum_deviation(n_site: usize, g: f64, layers: usize) -> Result<f64> {
    let p = hs_params(g)?;
    let labeling = QubitLabeling::new(Labeling::ColorAlternating, n_site);
    let table = InteractionTable::new(labeling)?;
    let n_fields = N_COLORS * n_site * layers;
    if n_fields > 24 {
        return Err(Error::CapacityExceeded { requested: n_fields, max: 24 });
    }
    let dim = 1usize << labeling.n_qubits();
    let rotations: Vec<(usize, usize)> = (0..n_site)
        .flat_map(|i| COLOR_PAIRS.iter().map(move |&(a, b)| (labeling.qubit(i, a), labeling.qubit(i, b))))
        .collect();
    let scale = p.gamma.powi(n_fields as i32);
    let mut worst = 0.0f64;
    let mut column = vec![0.0; dim];
    for k in 0..dim {
        let mut sum = vec![0.0; dim];
        for s in 0..1u64 << n_fields {
            column.iter_mut().for_each(|x| *x = 0.0);
            column[k] = 1.0;
            for layer in 0..layers {
                for (r, &(a, b)) in rotations.iter().enumerate() {
                    let bit = layer * rotations.len() + r;
                    let theta = if s >> bit & 1 == 1 { -p.lambda } else { p.lambda };
                    apply_fgivens_real(&mut column, a, b, theta);
                }
            }
            sum.iter_mut().zip(&column).for_each(|(acc, x)| *acc += x);
        }
        let diag = (-(layers as f64) * g * table.interaction()[k]).exp();
        for (row, &x) in sum.iter().enumerate() {
            let expect = if row == k { diag } else { 0.0 };
            worst = worst.max((scale * x - expect).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::Observables;
    use crate::model::{build_lattice, Geometry};
    use crate::oracle::{self, ClosedFormSet};
    use crate::rng::stream_rng;
    use crate::trialstate::fermi_sea_state;

    #[test]
    fn params() {
        let p = hs_params(0.0).unwrap();
        assert_eq!((p.gamma, p.lambda), (0.5, 0.0));
        let p = hs_params(-1.0).unwrap();
        assert!((p.gamma - 0.642013).abs() < 1e-6);
        assert!((p.lambda - 0.9191).abs() < 1e-4);
        assert!((2.0 * p.gamma * p.lambda.cos() - (-0.25f64).exp()).abs() < 1e-15);
        assert!(matches!(hs_params(0.1), Err(Error::RepulsiveCoupling(_))));
        assert!(hs_params(0.1).unwrap_err().to_string().contains("repulsive g unsupported"));
    }

    #[test]
    fn identity_holds() {
        for g in [0.0, -1.0, -0.01, -3.9] {
            assert!(hs_identity_check(g).unwrap() < 1e-12);
        }
    }

    #[test]
    fn layout_counts() {
        let layout = build_lcu_circuit(2, -1.0, None, false).unwrap();
        assert_eq!(layout.n_qubits(), 12);
        assert_eq!(layout.circuit.count("fgivens"), 6);
        assert_eq!(layout.circuit.count("cfgivens"), 6);
        assert_eq!(layout.circuit.count("fswap"), 6);
        assert_eq!(layout.ancilla(1, 2), 11);
        let single = build_lcu_circuit(1, -1.0, None, true).unwrap();
        assert_eq!(single.circuit.count("fswap"), 0);
        assert_eq!(single.ancillas(), vec![3, 4, 5]);
        assert_eq!(single.hadamard, Some(6));
    }

    #[test]
    fn native_circuit_matches() {
        for g in [-0.4, -2.0] {
            let exact = build_lcu_circuit(1, g, None, false).unwrap();
            let native = lcu_native_circuit(1, g).unwrap();
            let a = circuit_matrix(6, exact.circuit.gates()).unwrap();
            let b = circuit_matrix(6, native.gates()).unwrap();
            let dev = a
                .iter()
                .zip(&b)
                .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).norm()))
                .fold(0.0, f64::max);
            assert!(dev < 1e-12, "{dev}");
        }
        // Two sites exercise the relabeling networks.
        let l = build_lattice(Geometry::ChainOpen, &[2]).unwrap();
        let trial = fermi_sea_state(&l, 1.0, 1).unwrap();
        let layout = build_lcu_circuit(2, -0.7, None, false).unwrap();
        let mut full = trial.extend_with_zeros(6).unwrap();
        full.apply_circuit(&lcu_native_circuit(2, -0.7).unwrap()).unwrap();
        let reduced = full.reduce(&layout.ancillas(), &[false; 6]).unwrap();
        let exact = run_approach1_exact(&layout, &trial).unwrap();
        assert!((reduced.norm_sqr() - exact.p0).abs() < 1e-12);
    }

    #[test]
    fn two_site_postselection() {
        let l = build_lattice(Geometry::ChainOpen, &[2]).unwrap();
        let trial = fermi_sea_state(&l, 1.0, 1).unwrap();
        let table = oracle::InteractionTable::uniform(2).unwrap();
        let obs = Observables::new(&l, 1.0, table.labeling());
        for g in [0.0, -0.5, -1.0, -3.0] {
            let layout = build_lcu_circuit(2, g, None, false).unwrap();
            let run = run_approach1_exact(&layout, &trial).unwrap();
            assert!((run.p0 - ClosedFormSet::p0(g)).abs() < 1e-12);
            let (_, psi) = oracle::gutzwiller_state(&trial, g, &table).unwrap();
            assert!(1.0 - run.register.inner(&psi).norm() < 1e-10);
            let k = run.register.expectation(&obs.kinetic).unwrap();
            assert!((k - ClosedFormSet::new(&Default::default()).kinetic(g)).abs() < 1e-10);
        }
        let run = run_approach1_exact(&build_lcu_circuit(2, -1.0, None, false).unwrap(), &trial).unwrap();
        assert!((run.p0 - 0.2637367).abs() < 1e-6);
    }

    #[test]
    fn gate_count_formulas() {
        for n in [1usize, 2, 4, 16] {
            let l = build_lattice(Geometry::ChainOpen, &[n.max(2)]).unwrap();
            let l = if n == 1 { None } else { Some(l) };
            let report = match l {
                Some(l) => gate_counts(&l, 1.0).unwrap(),
                None => {
                    let native = lcu_native_circuit(1, -1.0).unwrap();
                    assert_eq!(circuit_cnot_cost(&native), 20);
                    continue;
                }
            };
            let nf = n as f64;
            assert_eq!(report.gutzwiller_block, 20 * n);
            assert_eq!(report.fswaps_per_network, 3 * n * (n - 1) / 2);
            assert_eq!(report.relabeling, 6 * n * (n - 1));
            assert_eq!(report.total, 7.5 * nf * nf + 14.0 * nf);
            assert!(report.trial_prep_actual.unwrap() as f64 <= report.trial_prep_bound);
        }
    }

    #[test]
    fn hadamard_test_exact_values() {
        let l = build_lattice(Geometry::ChainOpen, &[2]).unwrap();
        let trial = fermi_sea_state(&l, 1.0, 1).unwrap();
        let layout = build_lcu_circuit(2, 0.0, None, true).unwrap();
        let id = hadamard_test(&layout, &trial, &UnitaryObservable::identity()).unwrap();
        assert!((id.expectation - 1.0).abs() < 1e-12);
        let (est, _) = id.sample(1000, &mut stream_rng(1, 0)).unwrap();
        assert_eq!((est.mean, est.stderr), (1.0, 0.0));
        for u in triple_occupancy_unitaries(2) {
            let t = hadamard_test(&layout, &trial, &u).unwrap();
            assert!((0.5 * (1.0 - t.expectation) - 0.125).abs() < 1e-12);
        }
        let bad = PauliString::new(0.5, &[(0, Pauli::Z)]);
        assert!(matches!(UnitaryObservable::from_pauli(&bad), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn hadamard_test_matches_oracle() {
        let l = build_lattice(Geometry::ChainOpen, &[2]).unwrap();
        let trial = fermi_sea_state(&l, 1.0, 1).unwrap();
        let table = oracle::InteractionTable::uniform(2).unwrap();
        let layout = build_lcu_circuit(2, -1.0, None, true).unwrap();
        // Z on the color-1 and color-2 modes of site 1.
        let zz = PauliString::new(1.0, &[(0, Pauli::Z), (2, Pauli::Z)]);
        let test = hadamard_test(&layout, &trial, &UnitaryObservable::from_pauli(&zz).unwrap()).unwrap();
        let exact = oracle::gutzwiller_expectation_exact(&PauliSum::new([zz]), -1.0, &trial, &table).unwrap();
        assert!((test.expectation - exact).abs() < 1e-12);
        assert!((test.p0 - ClosedFormSet::p0(-1.0)).abs() < 1e-12);
        let (est, n) = test.sample(8192, &mut stream_rng(3, 0)).unwrap();
        assert!((est.mean - exact).abs() < 3.0 * est.stderr, "{est:?} {exact}");
        assert!(n < 8192);
    }

    #[test]
    fn direct_measurement_matches() {
        let l = build_lattice(Geometry::ChainOpen, &[2]).unwrap();
        let trial = fermi_sea_state(&l, 1.0, 1).unwrap();
        let table = oracle::InteractionTable::uniform(2).unwrap();
        let obs = Observables::new(&l, 1.0, table.labeling());
        let run = run_approach1_exact(&build_lcu_circuit(2, -1.0, None, false).unwrap(), &trial).unwrap();
        let ops = [&obs.kinetic, &obs.interaction, &obs.triple];
        let est = direct_measurement(&run.register, &ops, 20000, &mut stream_rng(9, 0)).unwrap();
        for (e, op) in est.iter().zip(ops) {
            let exact = run.register.expectation(op).unwrap();
            assert!((e.mean - exact).abs() < 4.0 * e.stderr.max(1e-12), "{e:?} {exact}");
        }
        // Trial state: kinetic bond energy is -1 per color.
        let est = direct_measurement(&trial, &[&obs.kinetic], 20000, &mut stream_rng(9, 1)).unwrap();
        assert!((est[0].mean + 3.0).abs() < 1e-12 && est[0].stderr < 1e-12);
    }

    #[test]
    fn lcu_sum_is_the_gutzwiller_operator() {
        assert!(lcu_sum_deviation(1, -0.8, 1).unwrap() < 1e-12);
        assert!(lcu_sum_deviation(2, -1.0, 1).unwrap() < 1e-12);
    }
}
