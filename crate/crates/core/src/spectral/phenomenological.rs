use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Homogeneous spatial kernels in units of the site separation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhenomenologicalKind {
    /// `exp(-a |m|)`
    Exponential { a: f64 },
    /// `exp(-a m^2)`
    Gaussian { a: f64 },
    /// `1` for `|m| < width`, else `0`.
    Step { width: u32 },
}

impl PhenomenologicalKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Exponential { a } | Self::Gaussian { a } => {
                if !(a > 0.0) || !a.is_finite() {
                    return Err(invalid("a", format!("decay parameter must be finite and > 0, got {a}")));
                }
            }
            Self::Step { width } => {
                if width == 0 {
                    return Err(invalid("width", "step width must be >= 1"));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exponential",
            Self::Gaussian { .. } => "gaussian",
            Self::Step { .. } => "step",
        }
    }

    /// Kernel value at integer separation `m`; `m = 0` always gives 1.
    pub fn eval(&self, m: i64) -> Result<f64> {
        self.validate()?;
        let m = m.unsigned_abs();
        if m == 0 {
            return Ok(1.0);
        }
        let mf = m as f64;
        Ok(match *self {
            Self::Exponential { a } => (-a * mf).exp(),
            Self::Gaussian { a } => (-a * mf * mf).exp(),
            Self::Step { width } => {
                if m < width as u64 {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }
}

/// Free-function form of [`PhenomenologicalKind::eval`].
pub fn phenomenological_kernel(kind: PhenomenologicalKind, m: i64) -> Result<f64> {
    kind.eval(m)
}
