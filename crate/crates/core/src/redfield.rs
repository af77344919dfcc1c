//! Bloch-Redfield generators, the secular decomposition and Lamb-shift
//! corrections.
//!
//! Conventions: `hbar = 1`, column-stacked superoperators, eigenbasis matrix
//! `V` with eigenvectors as columns. For couplings `H_int = sum_j s_j B_j` and
//! `D_jk(w) = int_0^inf e^{i w t} <B_j(t) B_k(0)> dt = C_jk(w)/2 + i F_jk(w)`:
//!
//! ```text
//! drho/dt = -i[H_S, rho] + sum_jk ( -s_j Q_jk rho + Q_jk rho s_j
//!                                   - rho Qh_jk s_j + s_j rho Qh_jk )
//! <n|V^dag Q_jk V|m>  = <n|V^dag s_k V|m> D_jk(w_m - w_n)
//! <n|V^dag Qh_jk V|m> = <n|V^dag s_k V|m> conj(D(w_n - w_m; B_j^dag, B_k^dag))
//! ```
//!
//! For Hermitian bath operators the last argument pair reduces to `(B_j, B_k)`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::quantum::{eigh, embed_site, pauli, Eigh, Operator, Superoperator, HERMITIAN_TOL};
use crate::spectral::{BathOperator, BathSite, SpectralModel};

/// Simulated coherence decay rates are `1 / RATE_CALIBRATION` times the
/// literature two-qubit rates `gamma_-`, `gamma_+`, `gamma_0`.
///
/// With `sigma_z` couplings (eigenvalues `+-1`) a coherence between states
/// whose `sigma_z` eigenvalues differ by `dz_j` decays at
/// `(1/2) sum_jk C_jk dz_j dz_k`; for two qubits this is `4 (C_0 -+ C_d)` for
/// the single-excitation and `|11><00|` coherences. Multiplying by `0.25` maps
/// these onto `C_0 -+ C_d`.
pub const RATE_CALIBRATION: f64 = 0.25;

/// Relative `eps_tol` default, multiplied by the spectral range of `H_S`.
pub const DEFAULT_EPS_REL: f64 = 1e-9;

/// A system operator coupled to one bath operator.
#[derive(Clone, Debug)]
pub struct Coupling {
    pub op: Operator,
    pub site: BathSite,
}

impl Coupling {
    pub fn new(op: Operator, site: BathSite) -> Self {
        Self { op, site }
    }

    /// Hermitian `s` coupled to a Hermitian bath operator at `position`.
    pub fn hermitian(op: Operator, position: i64) -> Self {
        Self::new(op, BathSite::hermitian(position))
    }
}

#[derive(Clone, Debug)]
pub struct SystemSpec {
    h_s: Operator,
    couplings: Vec<Coupling>,
    labels: Vec<String>,
}

impl SystemSpec {
    /// Validates dimensions and Hermiticity of the total interaction.
    ///
    /// Hermitian `s_j` coupled to Hermitian bath operators need nothing else.
    /// Any other coupling `(s, B)` must come with its conjugate partner
    /// `(s^dagger, B^dagger)` at the same position and group.
    pub fn new(h_s: Operator, couplings: Vec<Coupling>) -> Result<Self> {
        let d = h_s.dim();
        let defect = h_s.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        if couplings.is_empty() {
            return Err(Error::InvalidSystem("at least one coupling is required".into()));
        }
        for (j, c) in couplings.iter().enumerate() {
            if c.op.dim() != d {
                return Err(Error::Dimension(format!("coupling {j} has dim {}, H_S has dim {d}", c.op.dim())));
            }
            let op_hermitian = c.op.hermiticity_defect() <= HERMITIAN_TOL;
            if op_hermitian && c.site.op == BathOperator::Hermitian {
                continue;
            }
            let partner = c.op.dagger();
            let want = c.site.adjoint();
            let found = couplings
                .iter()
                .enumerate()
                .any(|(i, o)| i != j && o.site == want && o.op.max_abs_diff(&partner) <= HERMITIAN_TOL);
            if !found {
                return Err(Error::InvalidSystem(format!(
                    "coupling {j} (bath operator {:?}) needs its conjugate partner (s^dagger, B^dagger) at position {}",
                    c.site.op, c.site.position
                )));
            }
        }
        let labels = (0..d).map(|i| i.to_string()).collect();
        Ok(Self {
            h_s: h_s.hermitian_part(),
            couplings,
            labels,
        })
    }

    /// Qubits with `H_S = sum_j omega_j sigma_z^(j)`, each dephasing through
    /// `sigma_z^(j)` coupled to a Hermitian bath operator at `positions[j]`.
    pub fn dephasing_qubits(omegas: &[f64], positions: &[i64]) -> Result<Self> {
        let n = omegas.len();
        if positions.len() != n {
            return Err(Error::Dimension(format!("{n} splittings but {} positions", positions.len())));
        }
        let d = 1usize << n;
        let mut h = Operator::zeros(d);
        let mut couplings = Vec::with_capacity(n);
        for (j, (&w, &r)) in omegas.iter().zip(positions).enumerate() {
            let z = embed_site(&pauli::sigma_z(), j, n)?;
            h = &h + &z.scale(w);
            couplings.push(Coupling::hermitian(z, r));
        }
        Self::new(h, couplings).map(|s| s.with_bit_labels(n))
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim() {
            return Err(Error::Dimension(format!("{} labels for dim {}", labels.len(), self.dim())));
        }
        self.labels = labels;
        Ok(self)
    }

    fn with_bit_labels(mut self, n: usize) -> Self {
        self.labels = (0..self.dim()).map(|i| format!("{i:0n$b}")).collect();
        self
    }

    pub fn dim(&self) -> usize {
        self.h_s.dim()
    }

    pub fn h_s(&self) -> &Operator {
        &self.h_s
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

fn spectral_ctx(model: &SpectralModel, omega: f64, j: usize, k: usize, a: &BathSite, b: &BathSite) -> Result<f64> {
    model.spectral(omega, a, b).map_err(|e| Error::Spectral {
        j,
        k,
        omega,
        source: Box::new(e),
    })
}

fn one_sided_ctx(
    model: &SpectralModel,
    omega: f64,
    j: usize,
    k: usize,
    a: &BathSite,
    b: &BathSite,
    imaginary: bool,
) -> Result<C64> {
    model.one_sided(omega, a, b, imaginary).map_err(|e| Error::Spectral {
        j,
        k,
        omega,
        source: Box::new(e),
    })
}

/// `q_jk` and `q_hat_jk` in the eigenbasis, indexed `j * n_couplings + k`.
#[derive(Clone, Debug)]
pub struct QMatrices {
    pub n_couplings: usize,
    pub q: Vec<DMatrix<C64>>,
    pub q_hat: Vec<DMatrix<C64>>,
}

impl QMatrices {
    pub fn q(&self, j: usize, k: usize) -> &DMatrix<C64> {
        &self.q[j * self.n_couplings + k]
    }

    pub fn q_hat(&self, j: usize, k: usize) -> &DMatrix<C64> {
        &self.q_hat[j * self.n_couplings + k]
    }
}

/// Builds `q_jk`, `q_hat_jk`; only the real part `C/2` of `D` unless
/// `imaginary` is set.
pub fn build_q_matrices(system: &SystemSpec, model: &SpectralModel, imaginary: bool) -> Result<(Eigh, QMatrices)> {
    let eig = eigh(system.h_s())?;
    let q = q_matrices_in(&eig, system, model, imaginary)?;
    Ok((eig, q))
}

fn q_matrices_in(eig: &Eigh, system: &SystemSpec, model: &SpectralModel, imaginary: bool) -> Result<QMatrices> {
    let d = system.dim();
    let cs = system.couplings();
    let n = cs.len();
    let w = &eig.values;
    let s_eig: Vec<DMatrix<C64>> = cs.iter().map(|c| eig.to_eigenbasis(&c.op)).collect();
    let mut q = Vec::with_capacity(n * n);
    let mut q_hat = Vec::with_capacity(n * n);
    for (j, cj) in cs.iter().enumerate() {
        let (bj, bj_dag) = (cj.site, cj.site.adjoint());
        for (k, ck) in cs.iter().enumerate() {
            let (bk, bk_dag) = (ck.site, ck.site.adjoint());
            let sk = &s_eig[k];
            let mut qm = DMatrix::zeros(d, d);
            let mut qh = DMatrix::zeros(d, d);
            if bj.group == bk.group {
                for nn in 0..d {
                    for m in 0..d {
                        let s = sk[(nn, m)];
                        if s == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let dq = one_sided_ctx(model, w[m] - w[nn], j, k, &bj, &bk, imaginary)?;
                        let dh = one_sided_ctx(model, w[nn] - w[m], j, k, &bj_dag, &bk_dag, imaginary)?;
                        qm[(nn, m)] = s * dq;
                        qh[(nn, m)] = s * dh.conj();
                    }
                }
            }
            q.push(qm);
            q_hat.push(qh);
        }
    }
    Ok(QMatrices { n_couplings: n, q, q_hat })
}

#[derive(Clone, Debug)]
pub struct RedfieldGenerator {
    /// Coherent part plus dissipator.
    pub superop: Superoperator,
    /// Dissipative part alone.
    pub dissipator: Superoperator,
    pub q: QMatrices,
    pub eig: Eigh,
}

impl RedfieldGenerator {
    pub fn v(&self) -> &Operator {
        &self.eig.vectors
    }

    pub fn omegas(&self) -> &[f64] {
        &self.eig.values
    }
}

/// Full Bloch-Redfield generator from the real part of `D` only.
pub fn build_br_generator(system: &SystemSpec, model: &SpectralModel) -> Result<RedfieldGenerator> {
    build_br_generator_with(system, model, false)
}

/// Full Bloch-Redfield generator; `imaginary` keeps `F_jk` in `D_jk`.
pub fn build_br_generator_with(system: &SystemSpec, model: &SpectralModel, imaginary: bool) -> Result<RedfieldGenerator> {
    let (eig, q) = build_q_matrices(system, model, imaginary)?;
    let d = system.dim();
    let one = C64::new(1.0, 0.0);
    let n = q.n_couplings;
    let mut dissipator = Superoperator::zeros(d);
    let mut left = DMatrix::<C64>::zeros(d, d);
    let mut right = DMatrix::<C64>::zeros(d, d);
    for (j, cj) in system.couplings().iter().enumerate() {
        let sj = cj.op.matrix();
        let mut lam = DMatrix::<C64>::zeros(d, d);
        let mut lam_hat = DMatrix::<C64>::zeros(d, d);
        for k in 0..n {
            lam += q.q(j, k);
            lam_hat += q.q_hat(j, k);
        }
        let lam = eig.from_eigenbasis(&lam);
        let lam_hat = eig.from_eigenbasis(&lam_hat);
        left += sj * &lam;
        right += &lam_hat * sj;
        dissipator.add_sandwich(one, &lam, sj);
        dissipator.add_sandwich(one, sj, &lam_hat);
    }
    dissipator.add_left(-one, &left);
    dissipator.add_right(-one, &right);
    let superop = &Superoperator::coherent(system.h_s()) + &dissipator;
    Ok(RedfieldGenerator {
        superop,
        dissipator,
        q,
        eig,
    })
}

/// Largest relative variation of `C_jk(w)` across the Bohr frequencies of
/// `H_S`, over all coupling pairs. Zero for frequency-independent kernels;
/// values near 1 mean the Markov smoothness assumption is doubtful.
pub fn markov_smoothness(system: &SystemSpec, model: &SpectralModel) -> Result<f64> {
    let eig = eigh(system.h_s())?;
    let mut bohr: Vec<f64> = Vec::new();
    for &a in &eig.values {
        for &b in &eig.values {
            bohr.push(a - b);
        }
    }
    bohr.sort_by(f64::total_cmp);
    bohr.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    let cs = system.couplings();
    let mut scale = 0.0f64;
    let mut spread = 0.0f64;
    for (j, cj) in cs.iter().enumerate() {
        for (k, ck) in cs.iter().enumerate() {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &w in &bohr {
                let c = spectral_ctx(model, w, j, k, &cj.site, &ck.site)?;
                lo = lo.min(c);
                hi = hi.max(c);
                scale = scale.max(c.abs());
            }
            spread = spread.max(hi - lo);
        }
    }
    Ok(if scale > 0.0 { spread / scale } else { 0.0 })
}

/// Bohr frequencies `w_m - w_n` that the secular approximation treats as equal.
#[derive(Clone, Debug)]
pub struct BohrGroup {
    /// Mean of the member frequencies.
    pub epsilon: f64,
    /// Eigenbasis element positions `(n, m)` with `w_m - w_n` in this group.
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct SecularDecomposition {
    pub eps_tol: f64,
    pub eig: Eigh,
    pub groups: Vec<BohrGroup>,
    /// `parts[g][j] = s_j(epsilon_g)` in the original basis.
    pub parts: Vec<Vec<Operator>>,
    /// Smallest gap between distinct group frequencies (infinite for one group).
    pub min_separation: f64,
}

impl SecularDecomposition {
    pub fn epsilons(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.epsilon).collect()
    }

    /// Index of the group whose frequency is closest to `epsilon`.
    pub fn group_of(&self, epsilon: f64) -> Option<usize> {
        self.groups
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.epsilon - epsilon).abs().total_cmp(&(b.1.epsilon - epsilon).abs()))
            .filter(|(_, g)| (g.epsilon - epsilon).abs() <= self.eps_tol)
            .map(|(i, _)| i)
    }
}

/// `1e-9` times the spectral range of `h`, with an absolute floor.
pub fn default_eps_tol(eig: &Eigh) -> f64 {
    let range = eig.values.last().unwrap_or(&0.0) - eig.values.first().unwrap_or(&0.0);
    (DEFAULT_EPS_REL * range).max(1e-13)
}

/// Splits every `s_j` into `s_j(eps) = sum_{w_m - w_n = eps} |n><n|s_j|m><m|`.
///
/// Bohr frequencies closer than `eps_tol` (single linkage) share a group.
/// `eps_tol` must stay below the smallest nonzero level spacing of `H_S`.
pub fn secular_decompose(system: &SystemSpec, eps_tol: Option<f64>) -> Result<SecularDecomposition> {
    let eig = eigh(system.h_s())?;
    let eps_tol = eps_tol.unwrap_or_else(|| default_eps_tol(&eig));
    if !(eps_tol >= 0.0) || !eps_tol.is_finite() {
        return Err(Error::InvalidParameter {
            name: "eps_tol",
            reason: format!("must be finite and >= 0, got {eps_tol}"),
        });
    }
    let w = &eig.values;
    let d = w.len();
    let floor = 1e-11 * w.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let spacing = w
        .windows(2)
        .map(|p| p[1] - p[0])
        .filter(|&s| s > floor)
        .fold(f64::INFINITY, f64::min);
    if eps_tol >= spacing {
        return Err(Error::SecularTolerance { eps_tol, spacing });
    }

    let mut freqs: Vec<(f64, usize, usize)> = Vec::with_capacity(d * d);
    for n in 0..d {
        for m in 0..d {
            freqs.push((w[m] - w[n], n, m));
        }
    }
    freqs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut groups: Vec<BohrGroup> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (f, n, m) in freqs {
        if groups.is_empty() || f - last > eps_tol {
            groups.push(BohrGroup {
                epsilon: 0.0,
                pairs: Vec::new(),
            });
            sums.push(0.0);
        }
        let g = groups.len() - 1;
        groups[g].pairs.push((n, m));
        sums[g] += f;
        last = f;
    }
    for (g, s) in groups.iter_mut().zip(sums) {
        g.epsilon = s / g.pairs.len() as f64;
    }
    // snap the group containing exact zero onto zero so that s(0) is labelled 0
    for g in groups.iter_mut() {
        if g.pairs.iter().any(|&(n, m)| n == m) {
            g.epsilon = 0.0;
        }
    }
    let min_separation = groups
        .windows(2)
        .map(|p| p[1].epsilon - p[0].epsilon)
        .fold(f64::INFINITY, f64::min);

    let s_eig: Vec<DMatrix<C64>> = system.couplings().iter().map(|c| eig.to_eigenbasis(&c.op)).collect();
    let parts = groups
        .iter()
        .map(|g| {
            s_eig
                .iter()
                .map(|s| {
                    let mut p = DMatrix::zeros(d, d);
                    for &(n, m) in &g.pairs {
                        p[(n, m)] = s[(n, m)];
                    }
                    Operator::from_matrix(eig.from_eigenbasis(&p)).expect("square by construction")
                })
                .collect()
        })
        .collect();
    Ok(SecularDecomposition {
        eps_tol,
        eig,
        groups,
        parts,
        min_separation,
    })
}

/// Per-frequency coefficient matrix `C~_jk = C(eps; B_j^dagger, B_k)` with
/// its operators `s_j(eps)`.
///
/// Entries whose operator pair contains an identically vanishing `s_j(eps)`
/// are exactly zero.
#[derive(Clone, Debug)]
pub struct CoefficientMatrix {
    pub epsilon: f64,
    pub matrix: DMatrix<C64>,
    pub ops: Vec<Operator>,
}

impl CoefficientMatrix {
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn dissipator(&self) -> Superoperator {
        kossakowski_dissipator(&self.matrix, &self.ops)
    }

    fn add_to(&self, out: &mut Superoperator) {
        add_kossakowski(out, &self.matrix, &self.ops)
    }
}

/// `sum_jk c_jk (s_k rho s_j^dagger - {s_j^dagger s_k, rho} / 2)`.
pub fn kossakowski_dissipator(coeff: &DMatrix<C64>, ops: &[Operator]) -> Superoperator {
    let d = ops.first().map(Operator::dim).unwrap_or(1);
    let mut out = Superoperator::zeros(d);
    add_kossakowski(&mut out, coeff, ops);
    out
}

/// Adds [`kossakowski_dissipator`] into `out`.
pub fn add_kossakowski(out: &mut Superoperator, coeff: &DMatrix<C64>, ops: &[Operator]) {
    let d = out.dim();
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let half = C64::new(-0.5, 0.0);
    let mut anti = DMatrix::<C64>::zeros(d, d);
    let mut any = false;
    for (j, sj) in ops.iter().enumerate() {
        let mut r = DMatrix::<C64>::zeros(d, d);
        let mut used = false;
        for (k, sk) in ops.iter().enumerate() {
            let c = coeff[(j, k)];
            if c != zero {
                r += sk.matrix() * c;
                used = true;
            }
        }
        if !used {
            continue;
        }
        let sj_dag = sj.matrix().adjoint();
        out.add_sandwich(one, &r, &sj_dag);
        anti += &sj_dag * &r;
        any = true;
    }
    if any {
        out.add_left(half, &anti);
        out.add_right(half, &anti);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecularDiagnostics {
    /// Smallest gap between distinct Bohr frequencies.
    pub min_separation: f64,
    /// Largest diagonal entry magnitude of the dissipator.
    pub max_rate: f64,
    /// `min_separation / max_rate`; the approximation wants this large.
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct SecularGenerator {
    pub decomposition: SecularDecomposition,
    pub coefficients: Vec<CoefficientMatrix>,
    pub dissipator: Superoperator,
    /// Lamb-shift correction, when requested.
    pub h_cor: Option<Operator>,
    pub superop: Superoperator,
    pub diagnostics: SecularDiagnostics,
}

fn coefficient_matrices(
    dec: &SecularDecomposition,
    system: &SystemSpec,
    mut eval: impl FnMut(f64, usize, usize, &BathSite, &BathSite) -> Result<f64>,
) -> Result<Vec<CoefficientMatrix>> {
    let cs = system.couplings();
    let n = cs.len();
    let mut out = Vec::with_capacity(dec.groups.len());
    for (g, group) in dec.groups.iter().enumerate() {
        let ops = &dec.parts[g];
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            if ops[j].is_zero() {
                continue;
            }
            let bj = cs[j].site.adjoint();
            for k in 0..n {
                if ops[k].is_zero() {
                    continue;
                }
                m[(j, k)] = C64::new(eval(group.epsilon, j, k, &bj, &cs[k].site)?, 0.0);
            }
        }
        out.push(CoefficientMatrix {
            epsilon: group.epsilon,
            matrix: m,
            ops: ops.clone(),
        });
    }
    Ok(out)
}

/// Secular Bloch-Redfield generator
/// `-i[H_S (+ H_cor), rho] + sum_eps sum_jk C~_jk(eps) (s_k(eps) rho s_j(eps)^dag - {s_j(eps)^dag s_k(eps), rho}/2)`.
pub fn build_secular_generator(
    system: &SystemSpec,
    model: &SpectralModel,
    eps_tol: Option<f64>,
    with_lamb_shift: bool,
) -> Result<SecularGenerator> {
    let dec = secular_decompose(system, eps_tol)?;
    let coefficients = coefficient_matrices(&dec, system, |w, j, k, a, b| spectral_ctx(model, w, j, k, a, b))?;
    let d = system.dim();
    let mut dissipator = Superoperator::zeros(d);
    for c in &coefficients {
        c.add_to(&mut dissipator);
    }
    let h_cor = if with_lamb_shift {
        Some(lamb_shift_from(&dec, system, model)?)
    } else {
        None
    };
    let h = match &h_cor {
        Some(hc) => system.h_s() + hc,
        None => system.h_s().clone(),
    };
    let superop = &Superoperator::coherent(&h) + &dissipator;
    let max_rate = (0..d * d).fold(0.0f64, |m, i| m.max(dissipator.matrix()[(i, i)].norm()));
    let diagnostics = SecularDiagnostics {
        min_separation: dec.min_separation,
        max_rate,
        ratio: if max_rate > 0.0 { dec.min_separation / max_rate } else { f64::INFINITY },
    };
    Ok(SecularGenerator {
        decomposition: dec,
        coefficients,
        dissipator,
        h_cor,
        superop,
        diagnostics,
    })
}

/// `H_cor = sum_eps sum_jk F~_jk(eps) s_j(eps)^dagger s_k(eps)` with
/// `F~_jk = F(eps; B_j^dagger, B_k)`.
pub fn lamb_shift(system: &SystemSpec, model: &SpectralModel, eps_tol: Option<f64>) -> Result<Operator> {
    let dec = secular_decompose(system, eps_tol)?;
    lamb_shift_from(&dec, system, model)
}

fn lamb_shift_from(dec: &SecularDecomposition, system: &SystemSpec, model: &SpectralModel) -> Result<Operator> {
    let d = system.dim();
    let mut h = DMatrix::<C64>::zeros(d, d);
    if !model.has_imaginary_part() {
        return Operator::hermitian(h);
    }
    let coeffs = coefficient_matrices(dec, system, |w, j, k, a, b| {
        model.imaginary(w, a, b).map_err(|e| Error::Spectral {
            j,
            k,
            omega: w,
            source: Box::new(e),
        })
    })?;
    for c in &coeffs {
        for (j, sj) in c.ops.iter().enumerate() {
            let sj_dag = sj.matrix().adjoint();
            for (k, sk) in c.ops.iter().enumerate() {
                let f = c.matrix[(j, k)];
                if f != C64::new(0.0, 0.0) {
                    h += &sj_dag * sk.matrix() * f;
                }
            }
        }
    }
    let op = Operator::from_matrix(h)?;
    let defect = op.hermiticity_defect();
    if defect > 1e-10 * op.max_abs().max(1.0) {
        return Err(Error::NonHermitianCorrection(defect));
    }
    Ok(op.hermitian_part())
}
