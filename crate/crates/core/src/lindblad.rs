//! Complete-positivity checks and Lindblad mapping of coefficient matrices,
//! plus eigenvalue bounds for homogeneous (Toeplitz) kernels from their
//! Fourier symbol.
//!
//! A dissipator `sum_jk C_jk (s_k rho s_j^dag - {s_j^dag s_k, rho}/2)` is of
//! Lindblad form exactly when `C` is positive semi-definite. Diagonalizing
//! `C = U diag(lambda) U^dag` gives rates `lambda_l` and operators
//! `L_l = sum_j W_jl s_j` with `W = conj(U)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;
use crate::quantum::{eigh, Operator};
use crate::spectral::PhenomenologicalKind;

/// Relative PSD tolerance: eigenvalues above `-PSD_REL_TOL * max|lambda|`
/// count as non-negative.
pub const PSD_REL_TOL: f64 = 1e-10;

/// Default number of Fourier-grid points.
pub const DEFAULT_GRID: usize = 4096;

fn hermitian_matrix(m: &DMatrix<C64>) -> Result<Operator> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("{}x{} coefficient matrix", m.nrows(), m.ncols())));
    }
    let op = Operator::from_matrix(m.clone())?;
    let defect = op.hermiticity_defect();
    if defect > 1e-12 * op.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(op.hermitian_part())
}

/// Principal submatrix with negative determinant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinorWitness {
    pub order: usize,
    /// Row (= column) indices of the submatrix, ascending.
    pub rows: Vec<usize>,
    pub determinant: f64,
    /// Row-major real parts; imaginary parts in `entries_imag`.
    pub entries: Vec<Vec<f64>>,
    pub entries_imag: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CPVerdict {
    pub mappable: bool,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub negative_eigenvalues: Vec<f64>,
    pub psd_tol: f64,
    /// Eigenvalues in `(-psd_tol, 0)` that a mapping would clamp to zero.
    pub clamped: usize,
    /// Principal submatrix with negative determinant: the smallest leading
    /// one if any, otherwise the first of order 2 or 3 found.
    pub minor: Option<MinorWitness>,
    /// Eigenvector of the most negative eigenvalue, as `[re, im]` pairs.
    pub eigenvector: Option<Vec<[f64; 2]>>,
}

impl CPVerdict {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

/// `PSD_REL_TOL` times the largest eigenvalue magnitude.
pub fn default_psd_tol(eigenvalues: &[f64]) -> f64 {
    PSD_REL_TOL * eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Eigenvalue-based PSD decision with a human-readable witness on failure.
/// `psd_tol = None` uses [`default_psd_tol`].
pub fn psd_check(matrix: &DMatrix<C64>, psd_tol: Option<f64>) -> Result<CPVerdict> {
    let op = hermitian_matrix(matrix)?;
    let eig = eigh(&op)?;
    Ok(verdict_from(&op, &eig.values, &eig.vectors, psd_tol))
}

fn verdict_from(op: &Operator, values: &[f64], vectors: &Operator, psd_tol: Option<f64>) -> CPVerdict {
    let tol = psd_tol.unwrap_or_else(|| default_psd_tol(values));
    let negative: Vec<f64> = values.iter().copied().filter(|&v| v < -tol).collect();
    let clamped = values.iter().filter(|&&v| v < 0.0 && v >= -tol).count();
    let mappable = negative.is_empty();
    let (minor, eigenvector) = if mappable {
        (None, None)
    } else {
        let v = vectors.matrix().column(0).iter().map(|z| [z.re, z.im]).collect();
        (minor_witness(op.matrix(), tol), Some(v))
    };
    CPVerdict {
        mappable,
        eigenvalues: values.to_vec(),
        negative_eigenvalues: negative,
        psd_tol: tol,
        clamped,
        minor,
        eigenvector,
    }
}

/// Largest order searched exhaustively once the leading minors fail.
const WITNESS_SEARCH_ORDER: usize = 3;

fn minor_witness(m: &DMatrix<C64>, tol: f64) -> Option<MinorWitness> {
    let n = m.nrows();
    let scale = m.iter().fold(0.0f64, |s, z| s.max(z.norm())).max(f64::MIN_POSITIVE);
    let leading = (1..=n).map(|k| (0..k).collect::<Vec<_>>());
    let rest = (2..=WITNESS_SEARCH_ORDER.min(n)).flat_map(move |k| combinations(n, k));
    leading.chain(rest).find_map(|rows| {
        let k = rows.len();
        let sub = m.select_rows(&rows).select_columns(&rows);
        let det = sub.clone().determinant().re;
        (det < -tol * scale.powi(k as i32 - 1)).then(|| MinorWitness {
            order: k,
            determinant: det,
            entries: (0..k).map(|i| (0..k).map(|j| sub[(i, j)].re).collect()).collect(),
            entries_imag: (0..k).map(|i| (0..k).map(|j| sub[(i, j)].im).collect()).collect(),
            rows,
        })
    })
}

/// `k`-element subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next = (k <= n).then(|| (0..k).collect::<Vec<_>>());
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut c = cur.clone();
        if let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            next = Some(c);
        }
        Some(cur)
    })
}

#[derive(Clone, Debug)]
pub struct LindbladForm {
    /// Non-negative; eigenvalues in `(-psd_tol, 0)` are clamped to zero.
    pub rates: Vec<f64>,
    pub lindblad_ops: Vec<Operator>,
    /// `L_k = sum_j w[(j, k)] s_j`.
    pub w: DMatrix<C64>,
    pub verdict: CPVerdict,
}

impl LindbladForm {
    /// `sum_k rate_k (L_k rho L_k^dag - {L_k^dag L_k, rho}/2)`.
    pub fn dissipator(&self) -> crate::quantum::Superoperator {
        let n = self.rates.len();
        let diag = DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(self.rates[i], 0.0) } else { C64::new(0.0, 0.0) });
        crate::redfield::kossakowski_dissipator(&diag, &self.lindblad_ops)
    }
}

#[derive(Clone, Debug)]
pub enum Mapping {
    Lindblad(LindbladForm),
    NotCompletelyPositive(CPVerdict),
}

impl Mapping {
    pub fn verdict(&self) -> &CPVerdict {
        match self {
            Self::Lindblad(l) => &l.verdict,
            Self::NotCompletelyPositive(v) => v,
        }
    }

    pub fn is_mappable(&self) -> bool {
        matches!(self, Self::Lindblad(_))
    }
}

/// Unitary diagonalization of `coeff`; Lindblad rates and operators when it
/// is PSD within `psd_tol`, otherwise the negative spectrum and a witness.
pub fn map_to_lindblad(coeff: &DMatrix<C64>, ops: &[Operator], psd_tol: Option<f64>) -> Result<Mapping> {
    if ops.len() != coeff.nrows() {
        return Err(Error::Dimension(format!(
            "{} operators for a {}x{} coefficient matrix",
            ops.len(),
            coeff.nrows(),
            coeff.ncols()
        )));
    }
    let op = hermitian_matrix(coeff)?;
    let eig = eigh(&op)?;
    let verdict = verdict_from(&op, &eig.values, &eig.vectors, psd_tol);
    if !verdict.mappable {
        return Ok(Mapping::NotCompletelyPositive(verdict));
    }
    let w = eig.vectors.matrix().conjugate();
    let d = ops.first().map(Operator::dim).unwrap_or(1);
    let lindblad_ops = (0..ops.len())
        .map(|k| {
            let mut l = DMatrix::<C64>::zeros(d, d);
            for (j, s) in ops.iter().enumerate() {
                l += s.matrix() * w[(j, k)];
            }
            Operator::from_matrix(l).expect("square")
        })
        .collect();
    let rates = eig.values.iter().map(|&v| v.max(0.0)).collect();
    Ok(Mapping::Lindblad(LindbladForm {
        rates,
        lindblad_ops,
        w,
        verdict,
    }))
}

/// Hermitian Toeplitz kernel `t_m`, `t_{-m} = conj(t_m)`, stored for
/// `0 <= m <= m_max`, with a bound on `sum_{|m| > m_max} |t_m|`.
#[derive(Clone, Debug, PartialEq)]
pub struct ToeplitzKernel {
    elements: Vec<C64>,
    tail_bound: f64,
    kind: Option<PhenomenologicalKind>,
}

impl ToeplitzKernel {
    pub fn from_elements(elements: Vec<C64>, tail_bound: f64) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidParameter {
                name: "elements",
                reason: "need at least t_0".into(),
            });
        }
        if elements.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) || !(tail_bound >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "elements",
                reason: "elements and tail bound must be finite".into(),
            });
        }
        if elements[0].im.abs() > 1e-12 * elements[0].norm().max(1.0) {
            return Err(Error::NotHermitian(elements[0].im.abs()));
        }
        Ok(Self {
            elements,
            tail_bound,
            kind: None,
        })
    }

    /// Elements `t_m = kernel(m)` for `m <= m_max` and the analytic bound on
    /// the discarded tail.
    pub fn from_phenomenological(kind: PhenomenologicalKind, m_max: usize) -> Result<Self> {
        kind.validate()?;
        let elements = (0..=m_max)
            .map(|m| kind.eval(m as i64).map(|v| C64::new(v, 0.0)))
            .collect::<Result<Vec<_>>>()?;
        let next = (m_max + 1) as f64;
        let tail_bound = 2.0
            * match kind {
                PhenomenologicalKind::Exponential { a } => (-a * next).exp() / -(-a).exp_m1(),
                PhenomenologicalKind::Gaussian { a } => (-a * next * next).exp() / -(-2.0 * a * next).exp_m1(),
                PhenomenologicalKind::Step { width } => {
                    if (width as usize) <= m_max + 1 {
                        0.0
                    } else {
                        (width as usize - m_max - 1) as f64
                    }
                }
            };
        Ok(Self {
            elements,
            tail_bound,
            kind: Some(kind),
        })
    }

    /// Smallest `m_max` whose tail bound is below `tol`.
    pub fn phenomenological_with_tail(kind: PhenomenologicalKind, tol: f64) -> Result<Self> {
        let mut m = 8;
        loop {
            let k = Self::from_phenomenological(kind, m)?;
            if k.tail_bound < tol || m > 1 << 22 {
                return Ok(k);
            }
            m *= 2;
        }
    }

    pub fn m_max(&self) -> usize {
        self.elements.len() - 1
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn kind(&self) -> Option<PhenomenologicalKind> {
        self.kind
    }

    /// `t_m` for any integer `m`. Beyond `m_max` this is the exact kernel
    /// value for phenomenological kernels and zero otherwise.
    pub fn element(&self, m: i64) -> C64 {
        let t = match (self.elements.get(m.unsigned_abs() as usize), self.kind) {
            (Some(t), _) => *t,
            (None, Some(kind)) => C64::new(kind.eval(m).unwrap_or(0.0), 0.0),
            (None, None) => C64::new(0.0, 0.0),
        };
        if m < 0 {
            t.conj()
        } else {
            t
        }
    }

    /// `sum_m |t_m|` over the stored elements plus the tail bound.
    pub fn summability(&self) -> f64 {
        let s: CompensatedSum = self.elements.iter().skip(1).map(|z| 2.0 * z.norm()).collect();
        self.elements[0].norm() + s.value() + self.tail_bound
    }

    /// `T_jk = t_{j-k}`. Fails if `n - 1` exceeds `m_max` for a kernel given
    /// only by its elements and a nonzero tail.
    pub fn matrix(&self, n: usize) -> Result<DMatrix<C64>> {
        if n > self.elements.len() && self.tail_bound > 0.0 && self.kind.is_none() {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: format!("{n}x{n} matrix needs elements up to m = {}, kernel stops at {}", n - 1, self.m_max()),
            });
        }
        Ok(DMatrix::from_fn(n, n, |j, k| self.element(j as i64 - k as i64)))
    }

    /// Fourier symbol `f(lambda) = sum_m t_m e^{-i m lambda}` (real).
    pub fn symbol(&self, lambda: f64) -> f64 {
        let mut s = CompensatedSum::default();
        s.add(self.elements[0].re);
        for (m, t) in self.elements.iter().enumerate().skip(1) {
            let ph = C64::from_polar(1.0, -(m as f64) * lambda);
            s.add(2.0 * (t * ph).re);
        }
        s.value()
    }

    /// Analytic extremes of the symbol of the untruncated kernel, if known.
    pub fn closed_form_bounds(&self) -> Option<(f64, f64)> {
        match self.kind? {
            PhenomenologicalKind::Exponential { a } => Some(((0.5 * a).tanh(), 1.0 / (0.5 * a).tanh())),
            PhenomenologicalKind::Step { width: 1 } => Some((1.0, 1.0)),
            PhenomenologicalKind::Step { width: 2 } => Some((-1.0, 3.0)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FourierBounds {
    /// Lower and upper bounds on every Toeplitz eigenvalue.
    pub f_min: f64,
    pub f_max: f64,
    /// Extremes of the truncated symbol over the grid.
    pub grid_min: f64,
    pub grid_max: f64,
    pub closed_min: Option<f64>,
    pub closed_max: Option<f64>,
    pub tail_bound: f64,
    pub grid_size: usize,
}

/// Extremes of `f(lambda)` on `grid_size` points of `[0, 2 pi)`.
///
/// The returned `f_min`/`f_max` use the closed form where one exists and
/// otherwise widen the grid extremes by the tail bound. `tol` caps the tail
/// bound.
pub fn toeplitz_fourier_bounds(kernel: &ToeplitzKernel, grid_size: usize, tol: f64) -> Result<FourierBounds> {
    if grid_size == 0 {
        return Err(Error::InvalidParameter {
            name: "grid_size",
            reason: "must be >= 1".into(),
        });
    }
    if kernel.tail_bound > tol {
        return Err(Error::TailBound {
            bound: kernel.tail_bound,
            tol,
        });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..grid_size {
        let f = kernel.symbol(2.0 * PI * i as f64 / grid_size as f64);
        lo = lo.min(f);
        hi = hi.max(f);
    }
    let closed = kernel.closed_form_bounds();
    let (f_min, f_max) = match closed {
        Some((a, b)) => (a, b),
        None => (lo - kernel.tail_bound, hi + kernel.tail_bound),
    };
    Ok(FourierBounds {
        f_min,
        f_max,
        grid_min: lo,
        grid_max: hi,
        closed_min: closed.map(|c| c.0),
        closed_max: closed.map(|c| c.1),
        tail_bound: kernel.tail_bound,
        grid_size,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub within: bool,
    pub eig_min: f64,
    pub eig_max: f64,
    pub f_min: f64,
    pub f_max: f64,
}

/// Whether all eigenvalues of the `n x n` Toeplitz matrix lie in
/// `[f_min - tol, f_max + tol]`.
pub fn eigenvalue_bound_check(kernel: &ToeplitzKernel, n: usize, tol: f64) -> Result<BoundCheck> {
    let b = toeplitz_fourier_bounds(kernel, DEFAULT_GRID, tol.max(kernel.tail_bound))?;
    let t = hermitian_matrix(&kernel.matrix(n)?)?;
    let vals = t.hermitian_eigenvalues();
    let (eig_min, eig_max) = (vals[0], vals[vals.len() - 1]);
    Ok(BoundCheck {
        within: eig_min >= b.f_min - tol && eig_max <= b.f_max + tol,
        eig_min,
        eig_max,
        f_min: b.f_min,
        f_max: b.f_max,
    })
}

/// Machine-readable positivity verdict for one kernel and size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub kernel: PhenomenologicalKind,
    pub n: usize,
    pub mappable: bool,
    pub eig_min: f64,
    pub eig_max: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub eigenvalues_within_bounds: bool,
    pub negative_count: usize,
    /// Eigenvalues in `(-psd_tol, 0)`, treated as zero.
    pub clamped: usize,
    pub witness: Option<MinorWitness>,
}

/// PSD check of the `n x n` homogeneous kernel matrix with Fourier bounds.
pub fn positivity_audit(kind: PhenomenologicalKind, n: usize, bound_tol: f64) -> Result<AuditReport> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "must be >= 1".into(),
        });
    }
    let kernel = ToeplitzKernel::phenomenological_with_tail(kind, 1e-13)?;
    let verdict = psd_check(&kernel.matrix(n)?, None)?;
    let bounds = eigenvalue_bound_check(&kernel, n, bound_tol)?;
    Ok(AuditReport {
        kernel: kind,
        n,
        mappable: verdict.mappable,
        eig_min: verdict.min_eigenvalue(),
        eig_max: verdict.max_eigenvalue(),
        f_min: bounds.f_min,
        f_max: bounds.f_max,
        eigenvalues_within_bounds: bounds.within,
        negative_count: verdict.negative_eigenvalues.len(),
        clamped: verdict.clamped,
        witness: verdict.minor,
    })
}
