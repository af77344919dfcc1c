//! Spatial-temporal spectral functions `C_jk(omega, r_j, r_k)`.
//!
//! Every bath model is evaluated through [`SpectralModel`], which takes the
//! two bath operators' positions, group labels and operator type. Operators in
//! different groups are uncorrelated and give exactly zero.

mod bosonic;
mod ising;
mod phenomenological;
mod tabulated;

pub use bosonic::{
    bosonic_correlation_exact, bosonic_spectral, bosonic_tau0_profile, BosonChannel, BosonCorrelations,
    BosonicChainParams, Dispersion, Occupation,
};
pub use ising::{ising_spatial, ising_spatiotemporal, ising_spectral_zero, BesselSum, IsingParams};
pub use phenomenological::{phenomenological_kernel, PhenomenologicalKind};
pub use tabulated::{SpectralTable, TABLE_HEADER};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Type of the bath operator `B_j` that a system operator couples to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BathOperator {
    /// `B_j = B_j^dagger`.
    #[default]
    Hermitian,
    /// Local lowering operator `a_x`.
    Annihilation,
    /// Local raising operator `a_x^dagger`.
    Creation,
}

impl BathOperator {
    pub fn adjoint(self) -> Self {
        match self {
            Self::Hermitian => Self::Hermitian,
            Self::Annihilation => Self::Creation,
            Self::Creation => Self::Annihilation,
        }
    }
}

/// Where and how a coupling enters the bath.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BathSite {
    /// Position in lattice units.
    pub position: i64,
    /// Independent-bath label.
    pub group: u32,
    pub op: BathOperator,
}

impl BathSite {
    pub fn hermitian(position: i64) -> Self {
        Self {
            position,
            group: 0,
            op: BathOperator::Hermitian,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            op: self.op.adjoint(),
            ..*self
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Kernel {
    /// Frequency-independent homogeneous kernel.
    Phenomenological(PhenomenologicalKind),
    Ising(IsingParams),
    BosonicChain(BosonicChainParams),
    Tabulated(SpectralTable),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralModel {
    pub kernel: Kernel,
    /// Overall prefactor of both real and imaginary parts.
    pub strength: f64,
    /// Amplitude of the imaginary part for phenomenological kernels,
    /// `F(dx) = imag_strength * kernel(dx)`. Ignored for other kinds.
    pub imag_strength: f64,
}

impl SpectralModel {
    pub fn new(kernel: Kernel) -> Self {
        Self {
            kernel,
            strength: 1.0,
            imag_strength: 0.0,
        }
    }

    pub fn phenomenological(kind: PhenomenologicalKind, strength: f64) -> Self {
        Self {
            strength,
            ..Self::new(Kernel::Phenomenological(kind))
        }
    }

    pub fn exponential(a: f64) -> Self {
        Self::phenomenological(PhenomenologicalKind::Exponential { a }, 1.0)
    }

    pub fn gaussian(a: f64) -> Self {
        Self::phenomenological(PhenomenologicalKind::Gaussian { a }, 1.0)
    }

    pub fn step() -> Self {
        Self::phenomenological(PhenomenologicalKind::Step { width: 2 }, 1.0)
    }

    /// `C == 0` everywhere.
    pub fn zero() -> Self {
        Self::phenomenological(PhenomenologicalKind::Step { width: 1 }, 0.0)
    }

    pub fn with_strength(mut self, strength: f64) -> Self {
        self.strength = strength;
        self
    }

    pub fn with_imag_strength(mut self, imag_strength: f64) -> Self {
        self.imag_strength = imag_strength;
        self
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kernel {
            Kernel::Phenomenological(k) => k.name(),
            Kernel::Ising(_) => "ising",
            Kernel::BosonicChain(_) => "bosonic-chain",
            Kernel::Tabulated(_) => "tabulated",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.strength.is_finite() || self.strength < 0.0 {
            return Err(invalid("strength", format!("must be finite and >= 0, got {}", self.strength)));
        }
        if !self.imag_strength.is_finite() {
            return Err(invalid("imag_strength", "must be finite"));
        }
        match &self.kernel {
            Kernel::Phenomenological(k) => k.validate(),
            Kernel::Ising(p) => p.validate(),
            Kernel::BosonicChain(p) => p.validate(),
            Kernel::Tabulated(_) => Ok(()),
        }
    }

    /// Real spectral function `C_jk(omega)` for bath operators `B_j`, `B_k`.
    pub fn spectral(&self, omega: f64, j: &BathSite, k: &BathSite) -> Result<f64> {
        if j.group != k.group || self.strength == 0.0 {
            return Ok(0.0);
        }
        let dx = j.position - k.position;
        let value = match &self.kernel {
            Kernel::Phenomenological(kind) => {
                require_hermitian(self, j, k)?;
                kind.eval(dx)?
            }
            Kernel::Ising(p) => {
                require_hermitian(self, j, k)?;
                p.spectral(omega, dx)
            }
            Kernel::Tabulated(t) => {
                require_hermitian(self, j, k)?;
                t.eval(omega, dx as f64)?.re
            }
            Kernel::BosonicChain(p) => p.spectral(omega, dx, boson_channel(j, k)?)?,
        };
        Ok(self.strength * value)
    }

    /// Imaginary part `F_jk(omega)` of the one-sided transform.
    pub fn imaginary(&self, omega: f64, j: &BathSite, k: &BathSite) -> Result<f64> {
        if j.group != k.group {
            return Ok(0.0);
        }
        let dx = j.position - k.position;
        match &self.kernel {
            Kernel::Phenomenological(kind) => {
                require_hermitian(self, j, k)?;
                Ok(self.imag_strength * kind.eval(dx)?)
            }
            Kernel::Ising(p) => {
                require_hermitian(self, j, k)?;
                Ok(self.strength * p.one_sided(omega, dx).im)
            }
            Kernel::Tabulated(t) => {
                require_hermitian(self, j, k)?;
                Ok(self.strength * t.eval(omega, dx as f64)?.im)
            }
            Kernel::BosonicChain(_) => {
                boson_channel(j, k)?;
                Ok(0.0)
            }
        }
    }

    /// One-sided transform `D_jk = C_jk / 2 + i F_jk`.
    pub fn one_sided(&self, omega: f64, j: &BathSite, k: &BathSite, with_imaginary: bool) -> Result<C64> {
        let re = 0.5 * self.spectral(omega, j, k)?;
        let im = if with_imaginary { self.imaginary(omega, j, k)? } else { 0.0 };
        Ok(C64::new(re, im))
    }

    pub fn has_imaginary_part(&self) -> bool {
        match &self.kernel {
            Kernel::Phenomenological(_) => self.imag_strength != 0.0,
            Kernel::Ising(_) | Kernel::Tabulated(_) => true,
            Kernel::BosonicChain(_) => false,
        }
    }
}

fn require_hermitian(model: &SpectralModel, j: &BathSite, k: &BathSite) -> Result<()> {
    if j.op != BathOperator::Hermitian || k.op != BathOperator::Hermitian {
        return Err(invalid(
            "bath operator",
            format!("{} kernels only couple to Hermitian bath operators", model.kind_name()),
        ));
    }
    Ok(())
}

fn boson_channel(j: &BathSite, k: &BathSite) -> Result<BosonChannel> {
    use BathOperator::*;
    Ok(match (j.op, k.op) {
        (Creation, Annihilation) => BosonChannel::CreationAnnihilation,
        (Annihilation, Creation) => BosonChannel::AnnihilationCreation,
        (Annihilation, Annihilation) => BosonChannel::AnnihilationAnnihilation,
        (Creation, Creation) => BosonChannel::CreationCreation,
        _ => {
            return Err(Error::InvalidParameter {
                name: "bath operator",
                reason: "bosonic-chain couplings must use annihilation/creation bath operators".into(),
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn site(position: i64, group: u32) -> BathSite {
        BathSite {
            position,
            group,
            op: BathOperator::Hermitian,
        }
    }

    fn models() -> Vec<SpectralModel> {
        let table = SpectralTable::from_rows(&[
            [-5.0, 0.0, 1.0, 0.0],
            [-5.0, 4.0, 0.2, 0.0],
            [5.0, 0.0, 2.0, 0.0],
            [5.0, 4.0, 0.4, 0.0],
        ])
        .unwrap();
        vec![
            SpectralModel::exponential(0.3),
            SpectralModel::gaussian(0.2),
            SpectralModel::step(),
            SpectralModel::new(Kernel::Ising(IsingParams::new(1.0, 0.7, 1.3).unwrap())),
            SpectralModel::new(Kernel::Tabulated(table)),
        ]
    }

    #[test]
    fn cross_group_is_exactly_zero() {
        for m in models() {
            for omega in [-1.0, 0.0, 2.0] {
                assert_eq!(m.spectral(omega, &site(0, 0), &site(1, 1)).unwrap(), 0.0);
                assert_eq!(m.imaginary(omega, &site(0, 0), &site(0, 1)).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn homogeneous_and_symmetric() {
        for m in models() {
            for omega in [-1.5, 0.0, 0.5] {
                for dx in 0..4 {
                    let a = m.spectral(omega, &site(10, 0), &site(10 + dx, 0)).unwrap();
                    let b = m.spectral(omega, &site(10 + dx, 0), &site(10, 0)).unwrap();
                    let c = m.spectral(omega, &site(-3, 0), &site(-3 + dx, 0)).unwrap();
                    assert!(a.is_finite());
                    assert!((a - b).abs() < 1e-14 && (a - c).abs() < 1e-14, "{}", m.kind_name());
                }
            }
        }
    }

    #[test]
    fn self_correlation_nonnegative() {
        let boson = SpectralModel::new(Kernel::BosonicChain(BosonicChainParams::new(0.3, 1.0, 1.0, 64).unwrap()));
        let cr = BathSite {
            op: BathOperator::Creation,
            ..site(0, 0)
        };
        let an = cr.adjoint();
        for i in -40..=40 {
            let omega = i as f64 * 0.1 + 0.013;
            for m in models() {
                assert!(m.spectral(omega, &site(2, 0), &site(2, 0)).unwrap() >= 0.0);
            }
            assert!(boson.spectral(omega, &cr, &an).unwrap() >= 0.0);
            assert!(boson.spectral(omega, &an, &cr).unwrap() >= 0.0);
        }
    }

    #[test]
    fn channel_type_checks() {
        let boson = SpectralModel::new(Kernel::BosonicChain(BosonicChainParams::new(0.0, 1.0, 1.0, 8).unwrap()));
        assert!(boson.spectral(0.1, &site(0, 0), &site(0, 0)).is_err());
        let an = BathSite {
            op: BathOperator::Annihilation,
            ..site(0, 0)
        };
        assert_eq!(boson.spectral(0.1, &an, &an).unwrap(), 0.0);
        assert!(SpectralModel::exponential(1.0).spectral(0.0, &an, &site(0, 0)).is_err());
    }

    #[test]
    fn zero_model_and_strength() {
        let z = SpectralModel::zero();
        assert_eq!(z.spectral(0.3, &site(0, 0), &site(0, 0)).unwrap(), 0.0);
        let m = SpectralModel::exponential(1.0).with_strength(2.5);
        assert!((m.spectral(0.0, &site(0, 0), &site(1, 0)).unwrap() - 2.5 * (-1f64).exp()).abs() < 1e-15);
        assert!(SpectralModel::exponential(1.0).with_strength(-1.0).validate().is_err());
    }
}
