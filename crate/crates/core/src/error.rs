use thiserror::Error;

/// Errors raised by lattice construction, simulation and sampling.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("site {site} or color {color} out of range for {n_site} sites")]
    ModeOutOfRange { site: usize, color: usize, n_site: usize },

    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("gate references qubit {0} more than once")]
    DuplicateQubit(usize),

    #[error("register of {requested} qubits exceeds the supported maximum of {max}")]
    CapacityExceeded { requested: usize, max: usize },

    #[error("postselection has zero probability")]
    ZeroProbability,

    #[error("observable is not Hermitian: imaginary part {0:e} of expectation value")]
    NotHermitian(f64),

    #[error("observable is not unitary: {0}")]
    NotUnitary(String),

    #[error("repulsive g unsupported: g = {0} must be <= 0")]
    RepulsiveCoupling(f64),

    #[error("orbital rows are not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("invalid trial state: {0}")]
    InvalidTrialState(String),

    #[error("nonpositive weight: phase-problem breach (weight {weight:e} at {context})")]
    NonpositiveWeight { weight: f64, context: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// True for violations of a numerical contract, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroProbability
                | Error::NotHermitian(_)
                | Error::NonpositiveWeight { .. }
                | Error::NotOrthonormal(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
