//! Markovian master equations for qubits in spatially correlated
//! environments.
//!
//! The pipeline runs from a [`SystemSpec`] and a [`SpectralModel`] through the
//! Bloch-Redfield or secular generator ([`redfield`]), an optional Lindblad
//! mapping with a complete-positivity verdict ([`lindblad`]), to propagated
//! trajectories and fitted dephasing rates ([`dynamics`]).
//!
//! Units: `hbar = 1`; positions and separations are integers in units of the
//! environment's lattice spacing.

pub mod dynamics;
pub mod error;
pub mod lindblad;
pub mod numerics;
pub mod quantum;
pub mod redfield;
pub mod spectral;

pub use dynamics::{
    extract_decay_rate, ising_two_qubit_rates, propagate, scaling_experiment, simulate_two_qubit_rates,
    two_qubit_rates, RateFit, Regime, ScalingPrediction, ScalingResult, Trajectory, TwoQubitRates,
};
pub use error::{Error, Result};
pub use lindblad::{
    eigenvalue_bound_check, map_to_lindblad, positivity_audit, psd_check, toeplitz_fourier_bounds, AuditReport,
    CPVerdict, LindbladForm, Mapping, ToeplitzKernel,
};
pub use quantum::{embed_site, eigh, tensor, DensityMatrix, Operator, Superoperator, C64};
pub use redfield::{
    build_br_generator, build_secular_generator, lamb_shift, secular_decompose, CoefficientMatrix, Coupling,
    RedfieldGenerator, SecularDecomposition, SecularGenerator, SystemSpec,
};
pub use spectral::{
    BathOperator, BathSite, BosonicChainParams, IsingParams, Kernel, PhenomenologicalKind, SpectralModel,
    SpectralTable,
};
