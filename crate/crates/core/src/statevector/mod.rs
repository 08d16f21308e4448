//! Dense statevector simulation.
//!
//! Qubit 0 is the least significant bit of an amplitude index. Amplitudes are stored
//! as a flat array of `2^n` complex doubles.

mod gate;

use std::collections::BTreeMap;
use std::io::{self, Write};

use num_complex::Complex64;
use rand::Rng;

pub use gate::{fgivens_native, givens_native, Circuit, Gate};

use crate::encoding::PauliSum;
use crate::error::{Error, Result};

/// Largest register the simulator will allocate (1 GiB of amplitudes).
pub const MAX_QUBITS: usize = 26;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

fn check_capacity(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_QUBITS {
        return Err(Error::CapacityExceeded { requested: n_qubits, max: MAX_QUBITS });
    }
    Ok(())
}

/// Calls `f` on every index whose bits in `fixed` equal the bits of `values`.
#[inline]
fn for_each_index(n_qubits: usize, fixed: usize, values: usize, mut f: impl FnMut(usize)) {
    let n_fixed = fixed.count_ones() as usize;
    let positions: Vec<usize> = (0..n_qubits).filter(|&q| fixed >> q & 1 == 1).collect();
    for k in 0..1usize << (n_qubits - n_fixed) {
        let mut idx = k;
        for &p in &positions {
            let low = idx & ((1 << p) - 1);
            idx = ((idx >> p) << (p + 1)) | low;
        }
        f(idx | values);
    }
}

impl StateVector {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_capacity(n_qubits)?;
        let mut amps = vec![ZERO; 1 << n_qubits];
        if index >= amps.len() {
            return Err(Error::QubitOutOfRange { qubit: index, n_qubits });
        }
        amps[index] = ONE;
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two. No normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n_qubits = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n_qubits {
            return Err(Error::InvalidTrialState(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        check_capacity(n_qubits)?;
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroProbability);
        }
        self.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(norm)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.n_qubits, other.n_qubits, "inner product across register sizes");
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `self ⊗ |0...0>` with the new qubits placed above the existing ones.
    pub fn extend_with_zeros(&self, extra: usize) -> Result<StateVector> {
        check_capacity(self.n_qubits + extra)?;
        let mut amps = vec![ZERO; 1 << (self.n_qubits + extra)];
        amps[..self.amps.len()].copy_from_slice(&self.amps);
        Ok(StateVector { n_qubits: self.n_qubits + extra, amps })
    }

    /// Amplitudes of the remaining qubits with `qubits` fixed to `bits` (no renormalization).
    pub fn reduce(&self, qubits: &[usize], bits: &[bool]) -> Result<StateVector> {
        let (fixed, values) = self.mask_of(qubits, bits)?;
        let mut amps = Vec::with_capacity(1 << (self.n_qubits - qubits.len()));
        for_each_index(self.n_qubits, fixed, values, |idx| amps.push(self.amps[idx]));
        Ok(StateVector { n_qubits: self.n_qubits - qubits.len(), amps })
    }

    fn mask_of(&self, qubits: &[usize], bits: &[bool]) -> Result<(usize, usize)> {
        assert_eq!(qubits.len(), bits.len(), "one bit per postselected qubit");
        let mut fixed = 0usize;
        let mut values = 0usize;
        for (&q, &b) in qubits.iter().zip(bits) {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits });
            }
            if fixed >> q & 1 == 1 {
                return Err(Error::DuplicateQubit(q));
            }
            fixed |= 1 << q;
            if b {
                values |= 1 << q;
            }
        }
        Ok((fixed, values))
    }

    /// Probability of measuring `bits` on `qubits`, and the projected, renormalized state.
    pub fn postselect(&self, qubits: &[usize], bits: &[bool]) -> Result<(f64, StateVector)> {
        let (fixed, values) = self.mask_of(qubits, bits)?;
        let mut out = vec![ZERO; self.amps.len()];
        let mut prob = 0.0;
        for_each_index(self.n_qubits, fixed, values, |idx| {
            out[idx] = self.amps[idx];
            prob += self.amps[idx].norm_sqr();
        });
        if prob <= f64::MIN_POSITIVE {
            return Err(Error::ZeroProbability);
        }
        let scale = 1.0 / prob.sqrt();
        out.iter_mut().for_each(|a| *a *= scale);
        Ok((prob, StateVector { n_qubits: self.n_qubits, amps: out }))
    }

    /// Probability that all of `qubits` read `bits`.
    pub fn probability(&self, qubits: &[usize], bits: &[bool]) -> Result<f64> {
        let (fixed, values) = self.mask_of(qubits, bits)?;
        let mut prob = 0.0;
        for_each_index(self.n_qubits, fixed, values, |idx| prob += self.amps[idx].norm_sqr());
        Ok(prob)
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() > self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: circuit.n_qubits() - 1,
                n_qubits: self.n_qubits,
            });
        }
        for g in circuit.gates() {
            self.apply_unchecked(g);
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    fn apply_unchecked(&mut self, gate: &Gate) {
        let mut controls = 0usize;
        let mut g = gate;
        while let Gate::Controlled { control, gate } = g {
            controls |= 1 << control;
            g = gate;
        }
        self.apply_base(g, controls);
    }

    fn apply_base(&mut self, gate: &Gate, controls: usize) {
        let n = self.n_qubits;
        let amps = &mut self.amps;
        match *gate {
            Gate::X(q) => for_each_index(n, controls | 1 << q, controls, |i| {
                amps.swap(i, i | 1 << q);
            }),
            Gate::Y(q) => for_each_index(n, controls | 1 << q, controls, |i| {
                let j = i | 1 << q;
                let (a0, a1) = (amps[i], amps[j]);
                amps[i] = Complex64::new(a1.im, -a1.re);
                amps[j] = Complex64::new(-a0.im, a0.re);
            }),
            Gate::Z(q) => for_each_index(n, controls | 1 << q, controls | 1 << q, |i| {
                amps[i] = -amps[i];
            }),
            Gate::H(q) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let m = [[ONE * s, ONE * s], [ONE * s, -ONE * s]];
                single_qubit(amps, n, q, controls, m);
            }
            Gate::Rx(q, t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                let m = [
                    [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                    [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
                ];
                single_qubit(amps, n, q, controls, m);
            }
            Gate::Ry(q, t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                let m = [
                    [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                ];
                single_qubit(amps, n, q, controls, m);
            }
            Gate::Rz(q, t) => {
                let m = [
                    [Complex64::from_polar(1.0, -t / 2.0), ZERO],
                    [ZERO, Complex64::from_polar(1.0, t / 2.0)],
                ];
                single_qubit(amps, n, q, controls, m);
            }
            Gate::Cnot { control, target } => {
                self.apply_base(&Gate::X(target), controls | 1 << control);
            }
            Gate::Cz(a, b) => {
                let m = controls | 1 << a | 1 << b;
                for_each_index(n, m, m, |i| amps[i] = -amps[i]);
            }
            Gate::Swap(a, b) | Gate::Fswap(a, b) => {
                let fixed = controls | 1 << a | 1 << b;
                for_each_index(n, fixed, controls | 1 << b, |i| {
                    amps.swap(i, i ^ (1 << a | 1 << b));
                });
                if matches!(gate, Gate::Fswap(..)) {
                    for_each_index(n, fixed, fixed, |i| amps[i] = -amps[i]);
                }
            }
            Gate::Givens { a, b, theta } | Gate::FGivens { a, b, theta } => {
                let string = gate.string_mask();
                let (c, s) = (theta.cos(), theta.sin());
                let fixed = controls | 1 << a | 1 << b;
                for_each_index(n, fixed, controls | 1 << b, |i01| {
                    let i10 = i01 ^ (1 << a | 1 << b);
                    let s = if (i01 & string).count_ones() & 1 == 1 { -s } else { s };
                    let (x01, x10) = (amps[i01], amps[i10]);
                    amps[i01] = x01 * c - x10 * s;
                    amps[i10] = x01 * s + x10 * c;
                });
            }
            Gate::Controlled { .. } => unreachable!("controls are peeled before dispatch"),
        }
    }

    /// `<self| op |self>` including any imaginary part.
    pub fn expectation_complex(&self, op: &PauliSum) -> Complex64 {
        let mut total = ZERO;
        for t in op.terms() {
            let (flip, sign) = t.masks();
            let phase = t.base_phase();
            let mut acc = ZERO;
            for (z, &a) in self.amps.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let term = self.amps[z ^ flip].conj() * a;
                if (z & sign).count_ones() & 1 == 1 {
                    acc -= term;
                } else {
                    acc += term;
                }
            }
            total += phase * acc;
        }
        total
    }

    /// Real expectation value of a Hermitian Pauli sum.
    pub fn expectation(&self, op: &PauliSum) -> Result<f64> {
        if let Some(q) = op.max_qubit() {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits });
            }
        }
        let e = self.expectation_complex(op);
        if e.im.abs() > 1e-10 {
            return Err(Error::NotHermitian(e.im));
        }
        Ok(e.re)
    }

    /// Outcome probabilities of a computational-basis measurement of every qubit.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Multinomial draw of `n_shots` computational-basis outcomes, keyed by basis index.
    pub fn sample_counts<R: Rng + ?Sized>(&self, n_shots: u64, rng: &mut R) -> BTreeMap<usize, u64> {
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let total = acc;
        let mut counts = BTreeMap::new();
        for _ in 0..n_shots {
            let u = rng.gen::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            *counts.entry(idx).or_insert(0) += 1;
        }
        counts
    }

    /// Writes `bitstring re im` per basis state, qubit `n-1` leftmost, 17 significant digits.
    pub fn write_amplitudes(&self, mut w: impl Write) -> io::Result<()> {
        for (idx, a) in self.amps.iter().enumerate() {
            writeln!(
                w,
                "{} {:.16e} {:.16e}",
                bitstring(idx, self.n_qubits),
                a.re,
                a.im
            )?;
        }
        Ok(())
    }
}

fn single_qubit(amps: &mut [Complex64], n: usize, q: usize, controls: usize, m: [[Complex64; 2]; 2]) {
    for_each_index(n, controls | 1 << q, controls, |i| {
        let j = i | 1 << q;
        let (a0, a1) = (amps[i], amps[j]);
        amps[i] = m[0][0] * a0 + m[0][1] * a1;
        amps[j] = m[1][0] * a0 + m[1][1] * a1;
    });
}

/// Fermionic Givens rotation on a real amplitude array, same convention as [`Gate::FGivens`].
pub fn apply_fgivens_real(amps: &mut [f64], a: usize, b: usize, theta: f64) {
    let n = amps.len().trailing_zeros() as usize;
    let string = Gate::FGivens { a, b, theta }.string_mask();
    let (c, s) = (theta.cos(), theta.sin());
    for_each_index(n, 1 << a | 1 << b, 1 << b, |i01| {
        let i10 = i01 ^ (1 << a | 1 << b);
        let s = if (i01 & string).count_ones() & 1 == 1 { -s } else { s };
        let (x01, x10) = (amps[i01], amps[i10]);
        amps[i01] = c * x01 - s * x10;
        amps[i10] = s * x01 + c * x10;
    });
}

/// Basis index as a bitstring with qubit `n-1` leftmost.
pub fn bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Dense matrix of a gate sequence on `n_qubits` qubits, column `k` = image of `|k>`.
pub fn circuit_matrix(n_qubits: usize, gates: &[Gate]) -> Result<Vec<Vec<Complex64>>> {
    let dim = 1usize << n_qubits;
    let mut cols = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut s = StateVector::basis(n_qubits, k)?;
        for g in gates {
            s.apply_gate(g)?;
        }
        cols.push(s.amps);
    }
    Ok(cols)
}
