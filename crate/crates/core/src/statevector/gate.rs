use std::fmt;

use crate::error::{Error, Result};

/// A gate acting on named qubits.
///
/// Two-qubit Givens gates act on the ordered basis `|z_a z_b>` as
/// `|01> -> cos t |01> + sin t |10>` and `|10> -> -sin t |01> + cos t |10>`,
/// i.e. `exp[t (c†_a c_b - c†_b c_a)]` for Jordan-Wigner modes on adjacent qubits.
/// The fermionic variant flips the sign of `sin t` when the qubits strictly between
/// `a` and `b` hold an odd number of excitations.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
    Swap(usize, usize),
    /// SWAP followed by a `-1` phase on `|11>`.
    Fswap(usize, usize),
    Givens { a: usize, b: usize, theta: f64 },
    FGivens { a: usize, b: usize, theta: f64 },
    /// `gate` applied on the subspace where `control` is `|1>`.
    Controlled { control: usize, gate: Box<Gate> },
}

impl Gate {
    pub fn controlled(control: usize, gate: Gate) -> Gate {
        Gate::Controlled { control, gate: Box::new(gate) }
    }

    /// Every qubit the gate touches, controls included.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X(q) | Gate::Y(q) | Gate::Z(q) | Gate::H(q) => vec![q],
            Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Cz(a, b) | Gate::Swap(a, b) | Gate::Fswap(a, b) => vec![a, b],
            Gate::Givens { a, b, .. } | Gate::FGivens { a, b, .. } => vec![a, b],
            Gate::Controlled { control, ref gate } => {
                let mut qs = vec![control];
                qs.extend(gate.qubits());
                qs
            }
        }
    }

    /// Qubits of the Jordan-Wigner string of a fermionic Givens gate, as a bit mask.
    pub fn string_mask(&self) -> usize {
        match *self {
            Gate::FGivens { a, b, .. } => {
                let (lo, hi) = (a.min(b), a.max(b));
                ((1usize << hi) - 1) & !((1usize << (lo + 1)) - 1)
            }
            _ => 0,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for (k, &q) in qs.iter().enumerate() {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
            }
            if qs[..k].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        if let Gate::Controlled { control, ref gate } = *self {
            // The control may not sit on the string of a controlled fermionic gate.
            if gate.string_mask().checked_shr(control as u32).unwrap_or(0) & 1 == 1 {
                return Err(Error::DuplicateQubit(control));
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rx(q, t) => Gate::Rx(q, -t),
            Gate::Ry(q, t) => Gate::Ry(q, -t),
            Gate::Rz(q, t) => Gate::Rz(q, -t),
            Gate::Givens { a, b, theta } => Gate::Givens { a, b, theta: -theta },
            Gate::FGivens { a, b, theta } => Gate::FGivens { a, b, theta: -theta },
            Gate::Controlled { control, ref gate } => Gate::controlled(control, gate.inverse()),
            ref self_inverse => self_inverse.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::X(_) => "x",
            Gate::Y(_) => "y",
            Gate::Z(_) => "z",
            Gate::H(_) => "h",
            Gate::Rx(..) => "rx",
            Gate::Ry(..) => "ry",
            Gate::Rz(..) => "rz",
            Gate::Cnot { .. } => "cx",
            Gate::Cz(..) => "cz",
            Gate::Swap(..) => "swap",
            Gate::Fswap(..) => "fswap",
            Gate::Givens { .. } => "givens",
            Gate::FGivens { .. } => "fgivens",
            Gate::Controlled { .. } => "controlled",
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Rx(q, t) | Gate::Ry(q, t) | Gate::Rz(q, t) => write!(f, "{}({t}) {q}", self.name()),
            Gate::Givens { a, b, theta } | Gate::FGivens { a, b, theta } => {
                write!(f, "{}({theta}) {a} {b}", self.name())
            }
            Gate::Controlled { control, gate } => write!(f, "c[{control}] {gate}"),
            other => {
                let qs: Vec<String> = other.qubits().iter().map(|q| q.to_string()).collect();
                write!(f, "{} {}", other.name(), qs.join(" "))
            }
        }
    }
}

/// An ordered gate list over a fixed register.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    /// Appends `other`, which must fit in this register.
    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self> {
        for g in &other.gates {
            self.push(g.clone())?;
        }
        Ok(self)
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Number of gates with the given name; controlled gates count as `c<name>`.
    pub fn count(&self, name: &str) -> usize {
        self.gates
            .iter()
            .filter(|g| match g {
                Gate::Controlled { gate, .. } => name.strip_prefix('c') == Some(gate.name()),
                other => other.name() == name,
            })
            .count()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "circuit on {} qubits", self.n_qubits)?;
        for g in &self.gates {
            writeln!(f, "  {g}")?;
        }
        Ok(())
    }
}

/// Givens rotation as two CZ gates and single-qubit rotations, exact including phase.
///
/// With `controlled = Some(c)` the two central rotations become controlled on `c`,
/// which realizes the controlled Givens gate.
pub fn givens_native(a: usize, b: usize, theta: f64, controlled: Option<usize>) -> Vec<Gate> {
    use std::f64::consts::FRAC_PI_2;
    let wrap = |g: Gate| match controlled {
        Some(c) => Gate::controlled(c, g),
        None => g,
    };
    vec![
        Gate::Rx(a, FRAC_PI_2),
        Gate::Ry(b, FRAC_PI_2),
        Gate::Rx(b, FRAC_PI_2),
        Gate::Cz(a, b),
        wrap(Gate::Rx(a, -theta)),
        wrap(Gate::Ry(b, theta)),
        Gate::Cz(a, b),
        Gate::Rx(a, -FRAC_PI_2),
        Gate::Rx(b, -FRAC_PI_2),
        Gate::Ry(b, -FRAC_PI_2),
    ]
}

/// Fermionic Givens rotation as a Givens rotation between CZ ladders onto the string.
pub fn fgivens_native(a: usize, b: usize, theta: f64, controlled: Option<usize>) -> Vec<Gate> {
    let (lo, hi) = (a.min(b), a.max(b));
    let ladder: Vec<Gate> = (lo + 1..hi).map(|l| Gate::Cz(b, l)).collect();
    let mut gates = ladder.clone();
    gates.extend(givens_native(a, b, theta, controlled));
    gates.extend(ladder);
    gates
}
