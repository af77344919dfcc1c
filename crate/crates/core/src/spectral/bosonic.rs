//! Tight-binding chain of coupled oscillators as a bath, probed by the local
//! ladder operators `B(x) = a_x` and `B^dagger(x) = a_x^dagger`.
//!
//! Separations are integers in units of the chain spacing, so lattice momenta
//! are `k_n = 2 pi n / N` for `n` in `[-N/2, N/2)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::CompensatedSum;

/// Mode occupation model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Occupation {
    /// `exp(-beta omega)`, the large-energy limit.
    #[default]
    Boltzmann,
    /// `1 / (exp(beta omega) - 1)`.
    BoseEinstein,
}

/// Mode energies of the finite chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dispersion {
    /// `omega_0 - 2 g cos k`
    #[default]
    Cosine,
    /// `omega_0 + 2 g (|k| - pi/2)`, linearized around the band centre.
    Linearized,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BosonicChainParams {
    pub omega0: f64,
    pub g: f64,
    pub beta: f64,
    /// Number of chain sites (= number of modes); even.
    pub n_modes: usize,
    #[serde(default)]
    pub occupation: Occupation,
    #[serde(default)]
    pub dispersion: Dispersion,
}

/// Which ordered pair of ladder operators a correlator involves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BosonChannel {
    /// `<B^dagger(tau, x) B(0, x')>`
    CreationAnnihilation,
    /// `<B(tau, x) B^dagger(0, x')>`
    AnnihilationCreation,
    /// `<B(tau, x) B(0, x')>`
    AnnihilationAnnihilation,
    /// `<B^dagger(tau, x) B^dagger(0, x')>`
    CreationCreation,
}

/// All four correlators at one `(dx, tau)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BosonCorrelations {
    pub creation_annihilation: C64,
    pub annihilation_creation: C64,
    pub annihilation_annihilation: C64,
    pub creation_creation: C64,
}

impl BosonCorrelations {
    pub fn channel(&self, ch: BosonChannel) -> C64 {
        match ch {
            BosonChannel::CreationAnnihilation => self.creation_annihilation,
            BosonChannel::AnnihilationCreation => self.annihilation_creation,
            BosonChannel::AnnihilationAnnihilation => self.annihilation_annihilation,
            BosonChannel::CreationCreation => self.creation_creation,
        }
    }
}

impl BosonicChainParams {
    pub fn new(omega0: f64, g: f64, beta: f64, n_modes: usize) -> Result<Self> {
        let p = Self {
            omega0,
            g,
            beta,
            n_modes,
            occupation: Occupation::Boltzmann,
            dispersion: Dispersion::Cosine,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_dispersion(mut self, dispersion: Dispersion) -> Self {
        self.dispersion = dispersion;
        self
    }

    pub fn with_occupation(mut self, occupation: Occupation) -> Self {
        self.occupation = occupation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes < 2 || self.n_modes % 2 != 0 {
            return Err(invalid("n_modes", format!("must be even and >= 2, got {}", self.n_modes)));
        }
        if !self.omega0.is_finite() || !self.beta.is_finite() || !self.g.is_finite() {
            return Err(invalid("omega0/g/beta", "chain parameters must be finite"));
        }
        if self.beta < 0.0 {
            return Err(invalid("beta", "inverse temperature must be >= 0"));
        }
        if self.g == 0.0 {
            return Err(invalid("g", "hopping must be nonzero"));
        }
        Ok(())
    }

    pub fn mode_energy(&self, k: f64) -> f64 {
        match self.dispersion {
            Dispersion::Cosine => self.omega0 - 2.0 * self.g * k.cos(),
            Dispersion::Linearized => self.omega0 + 2.0 * self.g * (k.abs() - PI / 2.0),
        }
    }

    /// Mean occupation at energy `omega`.
    pub fn occupation_at(&self, omega: f64) -> Result<f64> {
        match self.occupation {
            Occupation::Boltzmann => Ok((-self.beta * omega).exp()),
            Occupation::BoseEinstein => {
                let x = self.beta * omega;
                if !(x > 0.0) {
                    return Err(invalid(
                        "occupation",
                        format!("Bose-Einstein occupation diverges at beta*omega = {x}"),
                    ));
                }
                Ok(1.0 / x.exp_m1())
            }
        }
    }

    fn momenta(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n_modes as i64;
        (-n / 2..n / 2).map(move |m| 2.0 * PI * m as f64 / n as f64)
    }

    /// Finite-chain correlators as explicit mode sums.
    pub fn correlation_exact(&self, dx: i64, tau: f64) -> Result<BosonCorrelations> {
        self.validate()?;
        let mut ca_re = CompensatedSum::default();
        let mut ca_im = CompensatedSum::default();
        let mut ac_re = CompensatedSum::default();
        let mut ac_im = CompensatedSum::default();
        let d = dx as f64;
        for k in self.momenta() {
            let w = self.mode_energy(k);
            let n = self.occupation_at(w)?;
            // B^dagger B: e^{-i k dx} e^{i w tau} <n>
            let phase = -k * d + w * tau;
            ca_re.add(phase.cos() * n);
            ca_im.add(phase.sin() * n);
            // B B^dagger: conjugate phase, (1 + <n>)
            ac_re.add(phase.cos() * (1.0 + n));
            ac_im.add(-phase.sin() * (1.0 + n));
        }
        let inv = 1.0 / self.n_modes as f64;
        Ok(BosonCorrelations {
            creation_annihilation: C64::new(ca_re.value() * inv, ca_im.value() * inv),
            annihilation_creation: C64::new(ac_re.value() * inv, ac_im.value() * inv),
            annihilation_annihilation: C64::new(0.0, 0.0),
            creation_creation: C64::new(0.0, 0.0),
        })
    }

    /// Closed-form large-chain spectral function with a Boltzmann occupation,
    ///
    /// `Theta(2|g| - |omega + omega0|) cos[dx arccos(-(omega + omega0) / 2g)]
    ///  <n(|omega|)> / (pi sqrt(4 g^2 - (omega + omega0)^2))`
    ///
    /// for `CreationAnnihilation`. `AnnihilationCreation` uses `omega -> -omega`
    /// and `<n> -> 1 + <n>`; the two same-operator channels vanish. Evaluating
    /// exactly on the band edge is an error since the expression diverges there.
    pub fn spectral(&self, omega: f64, dx: i64, channel: BosonChannel) -> Result<f64> {
        self.validate()?;
        let (x, plus_one) = match channel {
            BosonChannel::CreationAnnihilation => (omega + self.omega0, false),
            BosonChannel::AnnihilationCreation => (-omega + self.omega0, true),
            BosonChannel::AnnihilationAnnihilation | BosonChannel::CreationCreation => return Ok(0.0),
        };
        let edge = 2.0 * self.g.abs();
        if x.abs() > edge {
            return Ok(0.0);
        }
        let gap = edge * edge - x * x;
        if x.abs() == edge || gap <= edge * edge * 1e-15 {
            return Err(Error::BandEdge { omega });
        }
        let n = self.occupation_at(omega.abs())?;
        let occ = if plus_one { 1.0 + n } else { n };
        let arg = (-x / (2.0 * self.g)).clamp(-1.0, 1.0);
        Ok((dx as f64 * arg.acos()).cos() * occ / (PI * gap.sqrt()))
    }

    /// Normalized equal-time profile `(2 beta g)^2 / ((2 beta g)^2 + dx^2)`
    /// of the linearized chain in the `beta g >> 1` regime.
    pub fn tau0_profile(&self, dx: i64) -> f64 {
        let xi = 2.0 * self.beta * self.g;
        let xi2 = xi * xi;
        let d = dx as f64;
        xi2 / (xi2 + d * d)
    }
}

pub fn bosonic_correlation_exact(params: &BosonicChainParams, dx: i64, tau: f64) -> Result<BosonCorrelations> {
    params.correlation_exact(dx, tau)
}

pub fn bosonic_spectral(params: &BosonicChainParams, omega: f64, dx: i64) -> Result<f64> {
    params.spectral(omega, dx, BosonChannel::CreationAnnihilation)
}

pub fn bosonic_tau0_profile(params: &BosonicChainParams, dx: i64) -> f64 {
    params.tau0_profile(dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::bessel_i_scaled;

    #[test]
    fn same_operator_channels_vanish() {
        let p = BosonicChainParams::new(1.0, 0.4, 2.0, 64).unwrap();
        for (dx, tau) in [(0, 0.0), (3, 1.7), (-5, 40.0)] {
            let c = p.correlation_exact(dx, tau).unwrap();
            assert_eq!(c.annihilation_annihilation, C64::new(0.0, 0.0));
            assert_eq!(c.creation_creation, C64::new(0.0, 0.0));
            assert_eq!(p.spectral(0.1, dx, BosonChannel::AnnihilationAnnihilation).unwrap(), 0.0);
            assert_eq!(p.spectral(0.1, dx, BosonChannel::CreationCreation).unwrap(), 0.0);
        }
    }

    #[test]
    fn equal_time_self_correlation_is_mean_occupation() {
        let p = BosonicChainParams::new(4.0, 1.0, 1.0, 128).unwrap();
        let c = p.correlation_exact(0, 0.0).unwrap().creation_annihilation;
        let mean: f64 = p.momenta().map(|k| (-p.mode_energy(k)).exp()).sum::<f64>() / 128.0;
        assert!((c.re - mean).abs() < 1e-15 && c.im.abs() < 1e-15 && c.re > 0.0);
    }

    #[test]
    fn exact_sum_matches_reordered_oracle() {
        // pairing +k with -k turns the sum into a real cosine series; summing
        // from the band edge inwards gives an independent order
        let g = 1.0;
        let p = BosonicChainParams::new(4.0 * g, g, 1.0, 1024).unwrap();
        let (dx, tau) = (3i64, 0.7);
        let got = p.correlation_exact(dx, tau).unwrap().creation_annihilation;
        let n = 1024i64;
        let mut re = CompensatedSum::default();
        let mut im = CompensatedSum::default();
        for m in (0..=n / 2).rev() {
            let k = 2.0 * PI * m as f64 / n as f64;
            let w = p.mode_energy(k);
            let occ = (-w).exp();
            let mult = if m == 0 || m == n / 2 { 1.0 } else { 2.0 };
            // e^{-ik dx} + e^{ik dx} = 2 cos(k dx); k = 0 and k = -pi appear once
            let spatial = (k * dx as f64).cos();
            re.add(mult * spatial * (w * tau).cos() * occ);
            im.add(mult * spatial * (w * tau).sin() * occ);
        }
        let want = C64::new(re.value() / n as f64, im.value() / n as f64);
        assert!((got - want).norm() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn cosine_chain_equal_time_profile_is_bessel_ratio() {
        // sum_k e^{-ik dx} e^{2 beta g cos k} / N -> I_dx(2 beta g) for large N
        let p = BosonicChainParams::new(0.0, 5.0, 1.0, 4096).unwrap();
        let i = bessel_i_scaled(10.0, 20);
        let c0 = p.correlation_exact(0, 0.0).unwrap().creation_annihilation.re;
        for dx in 0..=20 {
            let c = p.correlation_exact(dx, 0.0).unwrap().creation_annihilation.re;
            assert!((c / c0 - i[dx as usize] / i[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_cutoff_and_band_centre() {
        let g = 0.5;
        let p = BosonicChainParams::new(2.0, g, 1.5, 64).unwrap();
        assert_eq!(p.spectral(0.5, 0, BosonChannel::CreationAnnihilation).unwrap(), 0.0);
        assert_eq!(p.spectral(-3.5, 2, BosonChannel::CreationAnnihilation).unwrap(), 0.0);
        let centre = p.spectral(-2.0, 0, BosonChannel::CreationAnnihilation).unwrap();
        let want = (-1.5f64 * 2.0).exp() / (2.0 * PI * g);
        assert!((centre - want).abs() < 1e-14);
        assert!(matches!(
            p.spectral(-1.0, 0, BosonChannel::CreationAnnihilation),
            Err(Error::BandEdge { .. })
        ));
        // BB^dagger mirrors omega and adds one quantum
        let mirrored = p.spectral(2.0, 0, BosonChannel::AnnihilationCreation).unwrap();
        assert!((mirrored - (1.0 + (-3.0f64).exp()) / (2.0 * PI * g)).abs() < 1e-14);
    }

    #[test]
    fn band_centre_spatial_structure() {
        let p = BosonicChainParams::new(0.0, 1.0, 1.0, 64).unwrap();
        let c0 = p.spectral(0.0, 0, BosonChannel::CreationAnnihilation).unwrap();
        for dx in 0..5 {
            let c = p.spectral(0.0, dx, BosonChannel::CreationAnnihilation).unwrap();
            assert!((c / c0 - (dx as f64 * PI / 2.0).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn tau0_profile_half_width() {
        let p = BosonicChainParams::new(0.0, 2.5, 2.0, 64).unwrap();
        assert_eq!(p.tau0_profile(0), 1.0);
        assert!((p.tau0_profile(10) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bose_einstein_is_opt_in() {
        let p = BosonicChainParams::new(4.0, 1.0, 1.0, 32).unwrap();
        assert_eq!(p.occupation, Occupation::Boltzmann);
        let be = p.with_occupation(Occupation::BoseEinstein);
        assert!((be.occupation_at(1.0).unwrap() - 1.0 / (1f64.exp() - 1.0)).abs() < 1e-15);
        assert!(be.occupation_at(0.0).is_err());
    }

    #[test]
    fn validation() {
        assert!(BosonicChainParams::new(1.0, 1.0, 1.0, 3).is_err());
        assert!(BosonicChainParams::new(1.0, 0.0, 1.0, 4).is_err());
    }
}
