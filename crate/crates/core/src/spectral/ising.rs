//! Classical Ising chain bath with Glauber single-spin-flip dynamics.
//!
//! Separations are integers in units of the Ising lattice spacing.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::{bessel_i_scaled, CompensatedSum};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    /// Nearest-neighbour coupling energy.
    pub j: f64,
    /// Inverse temperature.
    pub beta: f64,
    /// Twice the single-spin switching rate.
    pub alpha: f64,
}

/// Truncated Bessel sum together with a bound on the discarded tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselSum {
    pub value: f64,
    pub bound: f64,
    pub l_max: usize,
}

impl IsingParams {
    pub fn new(j: f64, beta: f64, alpha: f64) -> Result<Self> {
        let p = Self { j, beta, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.j.is_finite() || !self.beta.is_finite() || !(self.j * self.beta).is_finite() {
            return Err(invalid("j*beta", "coupling and inverse temperature must be finite"));
        }
        if self.beta < 0.0 {
            return Err(invalid("beta", "inverse temperature must be >= 0"));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(invalid("alpha", format!("switching rate must be > 0, got {}", self.alpha)));
        }
        Ok(())
    }

    /// `tanh(beta J)`
    pub fn eta(&self) -> f64 {
        (self.beta * self.j).tanh()
    }

    /// `cosh(2 beta J)`
    pub fn zeta(&self) -> f64 {
        (2.0 * self.beta * self.j).cosh()
    }

    /// `tanh(2 beta J)`
    pub fn gamma(&self) -> f64 {
        (2.0 * self.beta * self.j).tanh()
    }

    /// Equal-time correlation `<S_x S_x'> = tanh^|dx|(beta J)`.
    pub fn spatial(&self, dx: i64) -> f64 {
        pow_abs(self.eta(), dx.unsigned_abs())
    }

    /// Space-time correlation, summing Bessel orders `|l| <= l_max`.
    ///
    /// The reported `bound` covers the discarded orders. It uses
    /// `|eta|^|dx+l| <= |eta|^(|l|-|dx|)` together with the ratio bound
    /// `I_{l+1}(x) / I_l(x) <= x / (2l + 2)`, which makes the tail a geometric
    /// series starting at order `l_max + 1`. It is infinite when that series
    /// does not converge yet (`l_max` too small for the argument).
    pub fn spatiotemporal(&self, dx: i64, tau: f64, l_max: usize) -> BesselSum {
        let l_max = l_max.max(1);
        let dx_abs = dx.unsigned_abs() as usize;
        let eta = self.eta();
        let g = self.gamma();
        let x = g.abs() * self.alpha * tau.abs();
        let damp = (-self.alpha * tau.abs() + x).exp();
        let scaled = bessel_i_scaled(x, l_max + 1);

        let mut sum = CompensatedSum::default();
        for l in -(l_max as i64)..=(l_max as i64) {
            let order = l.unsigned_abs() as usize;
            let mut term = pow_abs(eta, (dx + l).unsigned_abs()) * scaled[order];
            if g < 0.0 && order % 2 == 1 {
                term = -term;
            }
            sum.add(term);
        }
        let value = sum.value() * damp;

        let ratio = x / (2.0 * l_max as f64 + 4.0);
        let eta_abs = eta.abs();
        let bound = if l_max + 1 > dx_abs && eta_abs * ratio < 1.0 {
            2.0 * pow_abs(eta_abs, (l_max + 1 - dx_abs) as u64) * scaled[l_max + 1] * damp
                / (1.0 - eta_abs * ratio)
        } else {
            f64::INFINITY
        };
        BesselSum {
            value,
            bound,
            l_max,
        }
    }

    /// Doubles the truncation order until the tail bound drops below `tol`.
    pub fn spatiotemporal_adaptive(&self, dx: i64, tau: f64, tol: f64) -> BesselSum {
        let mut l_max = (dx.unsigned_abs() as usize + 1).max(8);
        loop {
            let s = self.spatiotemporal(dx, tau, l_max);
            if s.bound < tol || l_max >= 1 << 20 {
                return s;
            }
            l_max *= 2;
        }
    }

    /// Zero-frequency spectral function `2 (|dx| + zeta) zeta eta^|dx| / alpha`.
    /// Defined for ferromagnetic coupling `J > 0`.
    pub fn spectral_zero(&self, dx: i64) -> Result<f64> {
        self.validate()?;
        if !(self.j > 0.0) {
            return Err(invalid("j", "zero-frequency closed form requires J > 0"));
        }
        let d = dx.unsigned_abs();
        let zeta = self.zeta();
        Ok(2.0 * (d as f64 + zeta) * zeta * pow_abs(self.eta(), d) / self.alpha)
    }

    /// One-sided transform `D(omega) = int_0^inf e^{i omega tau} <S(tau) S(0)> dtau`.
    ///
    /// Each Bessel order integrates to `r^|l| / S` with `p = alpha - i omega`,
    /// `c = gamma alpha`, `S = sqrt(p - c) sqrt(p + c)` and `r = c / (p + S)`;
    /// the remaining sum over `l` is geometric. The spectral function is
    /// `C = 2 Re D` and the Lamb-shift part is `F = Im D`. At `omega = 0`,
    /// `r = eta` and `2 Re D` equals [`Self::spectral_zero`].
    pub fn one_sided(&self, omega: f64, dx: i64) -> C64 {
        let p = C64::new(self.alpha, -omega);
        let c = C64::new(self.gamma() * self.alpha, 0.0);
        let s = (p - c).sqrt() * (p + c).sqrt();
        let r = c / (p + s);
        let eta = C64::new(self.eta(), 0.0);
        let d = dx.unsigned_abs();
        let one = C64::new(1.0, 0.0);
        let denom = one - eta * r;
        let sum = if d == 0 {
            (one + eta * r) / denom
        } else {
            let mut mid = C64::new(0.0, 0.0);
            for m in 1..d {
                mid += eta.powu((d - m) as u32) * r.powu(m as u32);
            }
            (eta.powu(d as u32) + r.powu(d as u32)) / denom + mid
        };
        sum / s
    }

    /// `C(omega, dx) = 2 Re D(omega, dx)`.
    pub fn spectral(&self, omega: f64, dx: i64) -> f64 {
        2.0 * self.one_sided(omega, dx).re
    }
}

fn pow_abs(base: f64, exp: u64) -> f64 {
    if exp <= i32::MAX as u64 {
        base.powi(exp as i32)
    } else {
        base.powf(exp as f64)
    }
}

pub fn ising_spatial(params: &IsingParams, dx: i64) -> f64 {
    params.spatial(dx)
}

pub fn ising_spatiotemporal(params: &IsingParams, dx: i64, tau: f64, l_max: usize) -> BesselSum {
    params.spatiotemporal(dx, tau, l_max)
}

pub fn ising_spectral_zero(params: &IsingParams, dx: i64) -> Result<f64> {
    params.spectral_zero(dx)
}
