use thiserror::Error;

use cvclifford::circuit::Diagnostic;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("cutoff {cutoff} is below the minimum {min}")]
    CutoffTooSmall { cutoff: usize, min: usize },
    #[error("{what} needs {needed} entries, above the budget of {budget}")]
    BudgetExceeded { what: &'static str, needed: usize, budget: usize },
    #[error("population {population:e} in the top five Fock levels of axis {axis} exceeds 1e-8; raise the cutoff")]
    Truncation { axis: usize, population: f64 },
    #[error("mode index {index} out of range for {n} modes")]
    ModeOutOfRange { index: usize, n: usize },
    #[error("instr {instruction}: {reason}")]
    Unsupported { instruction: usize, reason: String },
    #[error("circuit failed validation: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Core(#[from] cvclifford::Error),
}

pub type Result<T, E = FockError> = std::result::Result<T, E>;
