//! Dense complex operator algebra.
//!
//! Operators are dense `dim x dim` complex matrices with hbar = 1.
//! Superoperators act on column-stacked density matrices: the entry
//! `rho[(i, j)]` sits at position `i + dim * j` of the stacked vector, so that
//! `vec(A rho B) = (B^T kron A) vec(rho)`.
//!
//! Multi-site operators use site-0-leftmost Kronecker ordering.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Maximum entry of `|A - A^dagger|` for an operator to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, PartialEq)]
pub struct Operator {
    mat: DMatrix<C64>,
    hermitian: bool,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator(dim={}, hermitian={}){}", self.dim(), self.hermitian, self.mat)
    }
}

impl Operator {
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "operator must be square with dim >= 1, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self {
            mat,
            hermitian: false,
        })
    }

    /// Builds an operator and marks it Hermitian after checking it is.
    pub fn hermitian(mat: DMatrix<C64>) -> Result<Self> {
        let mut op = Self::from_matrix(mat)?;
        let defect = op.hermiticity_defect();
        if defect >= HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        op.hermitian = true;
        Ok(op)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut mat = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension("ragged rows".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                mat[(i, j)] = C64::new(v, 0.0);
            }
        }
        Self::from_matrix(mat)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
            hermitian: true,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: DMatrix::zeros(dim, dim),
            hermitian: true,
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut mat = DMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            mat[(i, i)] = C64::new(v, 0.0);
        }
        Self {
            mat,
            hermitian: true,
        }
    }

    /// Projector `|psi><psi|` onto a (not necessarily normalized) vector.
    pub fn outer(ket: &DVector<C64>, bra: &DVector<C64>) -> Self {
        Self {
            mat: ket * bra.adjoint(),
            hermitian: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Largest entry of `|A - A^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn dagger(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            mat: &self.mat * C64::new(c, 0.0),
            hermitian: self.hermitian,
        }
    }

    pub fn scale_complex(&self, c: C64) -> Self {
        Self {
            mat: &self.mat * c,
            hermitian: self.hermitian && c.im == 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mat.iter().all(|z| *z == ZERO)
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Symmetrizes `(A + A^dagger) / 2` and marks the result Hermitian.
    pub fn hermitian_part(&self) -> Self {
        Self {
            mat: (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0),
            hermitian: true,
        }
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = self.hermitian_part();
        let mut v: Vec<f64> = SymmetricEigen::new(h.mat).eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Operator) -> Operator {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Operator) -> Operator {
        &(self * other) + &(other * self)
    }

    pub fn apply(&self, ket: &DVector<C64>) -> DVector<C64> {
        &self.mat * ket
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator {
            mat: &self.mat * &rhs.mat,
            hermitian: false,
        }
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            mat: &self.mat + &rhs.mat,
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator {
            mat: &self.mat - &rhs.mat,
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

/// Single-qubit operators in the `{|0>, |1>}` basis with `sigma_z = diag(1, -1)`.
pub mod pauli {
    use super::*;

    pub fn identity() -> Operator {
        Operator::identity(2)
    }

    pub fn sigma_x() -> Operator {
        Operator::hermitian(DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])).unwrap()
    }

    pub fn sigma_y() -> Operator {
        let i = C64::new(0.0, 1.0);
        Operator::hermitian(DMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO])).unwrap()
    }

    pub fn sigma_z() -> Operator {
        Operator::diagonal(&[1.0, -1.0])
    }

    /// `|0><1|`, raises the `sigma_z` eigenvalue.
    pub fn sigma_plus() -> Operator {
        Operator::from_matrix(DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])).unwrap()
    }

    /// `|1><0|`.
    pub fn sigma_minus() -> Operator {
        Operator::from_matrix(DMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO])).unwrap()
    }
}

/// Kronecker product with `a` acting on the leftmost factor.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    Operator {
        mat: a.mat.kronecker(&b.mat),
        hermitian: a.hermitian && b.hermitian,
    }
}

/// Places `op` on `site` of an `n_sites` register, identities elsewhere.
pub fn embed_site(op: &Operator, site: usize, n_sites: usize) -> Result<Operator> {
    if site >= n_sites {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    let local = op.dim();
    let left = local.pow(site as u32);
    let right = local.pow((n_sites - site - 1) as u32);
    let mut out = tensor(&Operator::identity(left), op);
    out = tensor(&out, &Operator::identity(right));
    Ok(out)
}

/// Computational basis vector `|index>` in dimension `dim`.
pub fn basis_ket(index: usize, dim: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    v[index] = ONE;
    v
}

/// Parses a bitstring like `"0011"` into a basis index, site 0 leftmost.
pub fn bitstring_index(bits: &str) -> Result<usize> {
    if bits.is_empty() {
        return Err(Error::Dimension("empty bitstring".into()));
    }
    bits.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::Dimension(format!("invalid bit `{c}` in `{bits}`"))),
    })
}

/// Hermitian eigendecomposition `h = V diag(values) V^dagger`.
#[derive(Clone, Debug)]
pub struct Eigh {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unitary whose columns are the eigenvectors.
    pub vectors: Operator,
}

impl Eigh {
    pub fn vector(&self, n: usize) -> DVector<C64> {
        self.vectors.mat.column(n).into_owned()
    }

    /// `V^dagger A V`: matrix elements of `a` in the eigenbasis.
    pub fn to_eigenbasis(&self, a: &Operator) -> DMatrix<C64> {
        self.vectors.mat.adjoint() * &a.mat * &self.vectors.mat
    }

    /// `V A V^dagger`: maps eigenbasis matrix elements back to the original basis.
    pub fn from_eigenbasis(&self, a: &DMatrix<C64>) -> DMatrix<C64> {
        &self.vectors.mat * a * self.vectors.mat.adjoint()
    }
}

/// Diagonalizes a Hermitian operator.
///
/// Eigenvalues come back ascending. Inside a degenerate cluster the basis is
/// rebuilt from the projections of the computational basis vectors `e_0, e_1,
/// ...` (Gram-Schmidt in that order), and every eigenvector has its first
/// largest-magnitude component made real and positive, so the result does not
/// depend on the eigensolver's internal choices.
pub fn eigh(h: &Operator) -> Result<Eigh> {
    let defect = h.hermiticity_defect();
    if defect >= HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let n = h.dim();
    let sym = h.hermitian_part();
    let eig = SymmetricEigen::new(sym.mat);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let raw: Vec<DVector<C64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();

    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let degeneracy_tol = 1e-11 * scale;

    let mut vectors: Vec<DVector<C64>> = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= degeneracy_tol {
            end += 1;
        }
        if end - start == 1 {
            vectors.push(raw[start].clone());
        } else {
            vectors.extend(canonical_subspace_basis(&raw[start..end]));
        }
        start = end;
    }

    let mut vmat = DMatrix::zeros(n, n);
    for (c, v) in vectors.iter_mut().enumerate() {
        fix_phase(v);
        vmat.set_column(c, v);
    }
    Ok(Eigh {
        values,
        vectors: Operator {
            mat: vmat,
            hermitian: false,
        },
    })
}

fn canonical_subspace_basis(span: &[DVector<C64>]) -> Vec<DVector<C64>> {
    let k = span.len();
    let n = span[0].len();
    let mut out: Vec<DVector<C64>> = Vec::with_capacity(k);
    // Candidates in computational-basis order; keep the ones with the largest
    // residual norm first would be less reproducible, so take them in order
    // and require a clearly nonzero residual.
    for threshold in [0.5, 1e-3, 1e-8] {
        for e in 0..n {
            if out.len() == k {
                break;
            }
            let mut v: DVector<C64> = DVector::zeros(n);
            for u in span {
                v += u * u[e].conj();
            }
            for _ in 0..2 {
                for w in &out {
                    let overlap = w.dotc(&v);
                    v -= w * overlap;
                }
            }
            let norm = v.norm();
            if norm > threshold / (k as f64).sqrt() {
                out.push(v / C64::new(norm, 0.0));
            }
        }
        if out.len() == k {
            break;
        }
    }
    out
}

fn fix_phase(v: &mut DVector<C64>) {
    let max = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if max == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-9)).copied() {
        let phase = z.conj() / z.norm();
        *v *= phase;
    }
}

/// Quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-10;

    pub fn new(op: Operator) -> Result<Self> {
        let defect = op.hermiticity_defect();
        if defect >= Self::HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian ({defect:.3e})")));
        }
        let tr = op.trace();
        if (tr - ONE).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let min = op.hermitian_eigenvalues()[0];
        if min < -Self::POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self {
            op: Operator {
                mat: op.mat,
                hermitian: true,
            },
        })
    }

    /// Pure state from an unnormalized ket.
    pub fn pure(ket: &DVector<C64>) -> Result<Self> {
        let norm = ket.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero ket".into()));
        }
        let k = ket / C64::new(norm, 0.0);
        Self::new(Operator::outer(&k, &k).hermitian_part())
    }

    /// Equal superposition of two basis states, so that only the
    /// `(a, b)` coherence (and its conjugate) is populated off the diagonal.
    pub fn coherent_pair(a: usize, b: usize, dim: usize) -> Result<Self> {
        if a >= dim || b >= dim {
            return Err(Error::Dimension(format!("basis index out of range for dim {dim}")));
        }
        Self::pure(&(basis_ket(a, dim) + basis_ket(b, dim)))
    }

    pub fn maximally_coherent(dim: usize) -> Self {
        let v = DVector::from_element(dim, ONE);
        Self::pure(&v).expect("nonzero ket")
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

/// Linear map on column-stacked `dim x dim` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    mat: DMatrix<C64>,
}

impl Superoperator {
    pub fn zeros(dim: usize) -> Self {
        let d2 = dim * dim;
        Self {
            dim,
            mat: DMatrix::zeros(d2, d2),
        }
    }

    pub fn from_matrix(dim: usize, mat: DMatrix<C64>) -> Result<Self> {
        let d2 = dim * dim;
        if mat.nrows() != d2 || mat.ncols() != d2 {
            return Err(Error::Dimension(format!(
                "superoperator on dim {dim} must be {d2}x{d2}"
            )));
        }
        Ok(Self { dim, mat })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn apply(&self, rho: &Operator) -> Operator {
        let v = vectorize(rho.matrix());
        Operator {
            mat: unvectorize(&(&self.mat * v), self.dim),
            hermitian: false,
        }
    }

    /// Adds `coeff * (left rho right)`.
    pub fn add_sandwich(&mut self, coeff: C64, left: &DMatrix<C64>, right: &DMatrix<C64>) {
        let d = self.dim;
        for l in 0..d {
            for j in 0..d {
                let b = right[(l, j)];
                if b == ZERO {
                    continue;
                }
                let cb = coeff * b;
                let col_base = d * l;
                let row_base = d * j;
                for k in 0..d {
                    let col = col_base + k;
                    for i in 0..d {
                        let a = left[(i, k)];
                        if a != ZERO {
                            self.mat[(row_base + i, col)] += a * cb;
                        }
                    }
                }
            }
        }
    }

    /// Adds `coeff * (a rho)`.
    pub fn add_left(&mut self, coeff: C64, a: &DMatrix<C64>) {
        let d = self.dim;
        for j in 0..d {
            for k in 0..d {
                for i in 0..d {
                    let x = a[(i, k)];
                    if x != ZERO {
                        self.mat[(i + d * j, k + d * j)] += coeff * x;
                    }
                }
            }
        }
    }

    /// Adds `coeff * (rho b)`.
    pub fn add_right(&mut self, coeff: C64, b: &DMatrix<C64>) {
        let d = self.dim;
        for l in 0..d {
            for j in 0..d {
                let x = b[(l, j)];
                if x != ZERO {
                    for i in 0..d {
                        self.mat[(i + d * j, i + d * l)] += coeff * x;
                    }
                }
            }
        }
    }

    /// Adds the coherent part `-i [h, rho]`.
    pub fn add_hamiltonian(&mut self, h: &Operator) {
        let i = C64::new(0.0, 1.0);
        self.add_left(-i, h.matrix());
        self.add_right(i, h.matrix());
    }

    /// Generator of `-i [h, rho]` alone.
    pub fn coherent(h: &Operator) -> Self {
        let mut s = Self::zeros(h.dim());
        s.add_hamiltonian(h);
        s
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            mat: &self.mat * C64::new(c, 0.0),
        }
    }

    pub fn max_abs_diff(&self, other: &Superoperator) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.mat.nrows();
        (0..n).all(|c| (0..n).all(|r| r == c || self.mat[(r, c)] == ZERO))
    }
}

impl Add for &Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            mat: &self.mat - &rhs.mat,
        }
    }
}

pub fn vectorize(m: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &DVector<C64>, dim: usize) -> DMatrix<C64> {
    DMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Trace distance `||a - b||_1 / 2` for Hermitian arguments.
pub fn trace_distance(a: &Operator, b: &Operator) -> f64 {
    let diff = a - b;
    0.5 * diff.hermitian_eigenvalues().iter().map(|v| v.abs()).sum::<f64>()
}
