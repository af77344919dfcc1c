//! Shared fixtures for the benchmarks.

use corrdeco_core::quantum::pauli;
use corrdeco_core::redfield::Coupling;
use corrdeco_core::{embed_site, Operator, SystemSpec};

/// `n` qubits with splittings `1, 1.3, 1.6, ...`, each coupled through
/// `sigma_x` and `sigma_z` to the bath at its own site.
pub fn mixed_qubits(n: usize) -> SystemSpec {
    let mut h = Operator::zeros(1 << n);
    let mut couplings = Vec::new();
    for j in 0..n {
        let z = embed_site(&pauli::sigma_z(), j, n).unwrap();
        let x = embed_site(&pauli::sigma_x(), j, n).unwrap();
        h = &h + &z.scale(0.5 * (1.0 + 0.3 * j as f64));
        couplings.push(Coupling::hermitian(x, j as i64));
        couplings.push(Coupling::hermitian(z, j as i64));
    }
    SystemSpec::new(h, couplings).unwrap()
}
