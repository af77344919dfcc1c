//! Warning codes attached to run reports.

use serde::Serialize;

/// Every warning the runner can emit. Codes are stable across versions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Code {
    /// A coefficient matrix has a negative eigenvalue beyond `psd_tol`.
    NotCompletelyPositive,
    /// Eigenvalues in `(-psd_tol, 0)` were clamped to zero.
    ClampedEigenvalues,
    /// `C_jk(w)` varies noticeably across the Bohr frequencies.
    MarkovSmoothness,
    /// A fitted coherence decay is not a single exponential.
    NonExponentialDecay,
    /// Bohr-frequency gaps are not large compared to the decay rates.
    SecularRatio,
}

pub const ALL_CODES: [Code; 5] = [
    Code::NotCompletelyPositive,
    Code::ClampedEigenvalues,
    Code::MarkovSmoothness,
    Code::NonExponentialDecay,
    Code::SecularRatio,
];

/// Relative spread of `C_jk(w)` above which `W003` fires.
pub const MARKOV_SMOOTHNESS_LIMIT: f64 = 0.1;

/// Gap-to-rate ratio below which `W005` fires.
pub const SECULAR_RATIO_LIMIT: f64 = 100.0;

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::NotCompletelyPositive => "W001",
            Code::ClampedEigenvalues => "W002",
            Code::MarkovSmoothness => "W003",
            Code::NonExponentialDecay => "W004",
            Code::SecularRatio => "W005",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Code::NotCompletelyPositive => "generator or kernel matrix is not completely positive",
            Code::ClampedEigenvalues => "tiny negative eigenvalues clamped to zero",
            Code::MarkovSmoothness => "spectral function varies across Bohr frequencies",
            Code::NonExponentialDecay => "coherence decay is not a single exponential",
            Code::SecularRatio => "secular approximation poorly justified",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: Code, message: impl Into<String>) -> Self {
        Self {
            code: code.as_str(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "warning[{}]: {}", self.code, self.message)
    }
}
