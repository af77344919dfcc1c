use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator is not Hermitian (max |A - A^dagger| = {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("site {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("spectral function is singular at the band edge (omega = {omega})")]
    BandEdge { omega: f64 },

    #[error("spectral evaluation failed for couplings (j={j}, k={k}) at omega={omega}: {source}")]
    Spectral {
        j: usize,
        k: usize,
        omega: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("eps_tol = {eps_tol:.3e} is not below the smallest nonzero level spacing {spacing:.3e}")]
    SecularTolerance { eps_tol: f64, spacing: f64 },

    #[error("correction Hamiltonian is not Hermitian (defect {0:.3e}); imaginary spectral parts are inconsistent")]
    NonHermitianCorrection(f64),

    #[error("trace drifted by {drift:.3e} at t = {t}")]
    TraceDrift { t: f64, drift: f64 },

    #[error("invalid time grid: {0}")]
    TimeGrid(String),

    #[error("coherence ({bra}, {ket}) is {magnitude:.3e} at the start of the fit window")]
    VanishingCoherence { bra: usize, ket: usize, magnitude: f64 },

    #[error("Fourier tail bound {bound:.3e} exceeds requested precision {tol:.3e}")]
    TailBound { bound: f64, tol: f64 },

    #[error("table: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
