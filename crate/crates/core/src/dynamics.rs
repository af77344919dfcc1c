//! Propagation under time-independent generators, decay-rate extraction and
//! the two-qubit and n-qubit dephasing experiments.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{unvectorize, vectorize, DensityMatrix, Operator, Superoperator};
use crate::redfield::{build_br_generator, SystemSpec, RATE_CALIBRATION};
use crate::spectral::{BathOperator, BathSite, IsingParams, Kernel, SpectralModel};

/// Propagation aborts when `|tr rho(t) - tr rho(0)|` exceeds this.
pub const TRACE_DRIFT_TOL: f64 = 1e-6;

/// Fit residuals above this flag non-exponential decay.
pub const NON_EXPONENTIAL_TOL: f64 = 1e-3;

/// Fraction of the trajectory skipped before fitting.
pub const FIT_SKIP_FRACTION: f64 = 0.05;

/// The fit window ends once the coherence drops below this fraction of its
/// value at the window start.
pub const FIT_FLOOR: f64 = 1e-6;

/// Time-stamped states. States are kept as plain operators because
/// non-CP generators can drive them out of the positive cone.
#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Operator>,
    pub generator_hash: u64,
    pub scenario: Option<String>,
}

/// `n` equally spaced times on `[0, t_end]`.
pub fn linspace(t_end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect(),
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::TimeGrid("no times".into()));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::TimeGrid("times must be finite and >= 0".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::TimeGrid("times must be strictly ascending".into()));
    }
    Ok(())
}

/// Hash of the generator's entries, stable for a given build.
pub fn generator_hash(gen: &Superoperator) -> u64 {
    let mut h = DefaultHasher::new();
    gen.dim().hash(&mut h);
    for z in gen.matrix().iter() {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    h.finish()
}

impl Trajectory {
    /// Wraps precomputed states, e.g. synthetic signals.
    pub fn new(times: Vec<f64>, states: Vec<Operator>) -> Result<Self> {
        check_times(&times)?;
        if times.len() != states.len() {
            return Err(Error::Dimension(format!("{} times but {} states", times.len(), states.len())));
        }
        Ok(Self {
            times,
            states,
            generator_hash: 0,
            scenario: None,
        })
    }

    pub fn with_scenario(mut self, scenario: impl Into<String>) -> Self {
        self.scenario = Some(scenario.into());
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Operator] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `<bra| rho(t) |ket>` over time.
    pub fn coherence(&self, bra: usize, ket: usize) -> Vec<C64> {
        self.states.iter().map(|s| s.matrix()[(bra, ket)]).collect()
    }

    /// Smallest eigenvalue of the Hermitian part of each state.
    pub fn min_eigenvalues(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.hermitian_eigenvalues()[0]).collect()
    }

    /// CSV with `t` then `re(rho_i_j),im(rho_i_j)` per requested pair.
    pub fn write_csv<W: Write>(&self, out: W, pairs: &[(usize, usize)]) -> Result<()> {
        let d = self.states.first().map(Operator::dim).unwrap_or(0);
        if let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| i >= d || j >= d) {
            return Err(Error::Dimension(format!("pair ({i}, {j}) out of range for dim {d}")));
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        for &(i, j) in pairs {
            header.push(format!("re(rho_{i}_{j})"));
            header.push(format!("im(rho_{i}_{j})"));
        }
        w.write_record(&header).map_err(csv_err)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut row = vec![fmt_f64(*t)];
            for &(i, j) in pairs {
                let z = s.matrix()[(i, j)];
                row.push(fmt_f64(z.re));
                row.push(fmt_f64(z.im));
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// 17 significant digits, round-trip exact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// States `exp(L t) rho0` at each `t` (with `rho0` the state at `t = 0`).
///
/// Diagonal generators are exponentiated entry-wise. Otherwise the step
/// propagator `exp(L dt)` is computed by scaling-and-squaring Pade and reused
/// while consecutive steps agree to 1e-12 relative.
pub fn propagate(gen: &Superoperator, rho0: &DensityMatrix, times: &[f64]) -> Result<Trajectory> {
    check_times(times)?;
    let d = gen.dim();
    if rho0.dim() != d {
        return Err(Error::Dimension(format!("state dim {} vs generator dim {d}", rho0.dim())));
    }
    let v0 = vectorize(rho0.operator().matrix());
    let tr0 = rho0.operator().trace();
    let mut states = Vec::with_capacity(times.len());
    let check = |t: f64, v: &DVector<C64>| -> Result<Operator> {
        let m = unvectorize(v, d);
        let drift = (m.trace() - tr0).norm();
        if drift > TRACE_DRIFT_TOL || !drift.is_finite() {
            return Err(Error::TraceDrift { t, drift });
        }
        Operator::from_matrix(m)
    };
    if gen.is_diagonal() {
        let diag = gen.matrix().diagonal();
        for &t in times {
            let v = DVector::from_iterator(d * d, diag.iter().zip(v0.iter()).map(|(l, x)| (l * t).exp() * x));
            states.push(check(t, &v)?);
        }
    } else {
        let mut v = v0.clone();
        let mut last_t = 0.0;
        let mut step: Option<(f64, DMatrix<C64>)> = None;
        for &t in times {
            let dt = t - last_t;
            if dt > 0.0 {
                let reuse = matches!(&step, Some((h, _)) if (h - dt).abs() <= 1e-12 * dt);
                if !reuse {
                    step = Some((dt, (gen.matrix() * C64::new(dt, 0.0)).exp()));
                }
                v = &step.as_ref().expect("set above").1 * v;
            }
            states.push(check(t, &v)?);
            last_t = t;
        }
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        generator_hash: generator_hash(gen),
        scenario: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub rate: f64,
    /// RMS deviation of `ln|rho_ij|` from the fitted line.
    pub residual: f64,
    pub non_exponential: bool,
    /// Index range `[start, end)` used for the fit.
    pub window: (usize, usize),
}

/// Least-squares slope of `ln|rho_{bra,ket}(t)|`.
///
/// The first 5% of the samples are skipped; the window then runs until the
/// coherence falls below `1e-6` of its value at the window start.
pub fn extract_decay_rate(traj: &Trajectory, bra: usize, ket: usize) -> Result<RateFit> {
    let d = traj.states.first().map(Operator::dim).unwrap_or(0);
    if bra >= d || ket >= d {
        return Err(Error::Dimension(format!("coherence ({bra}, {ket}) out of range for dim {d}")));
    }
    let c = traj.coherence(bra, ket);
    let initial = c[0].norm();
    if !(initial > 1e-8) {
        return Err(Error::VanishingCoherence {
            bra,
            ket,
            magnitude: initial,
        });
    }
    let start = (FIT_SKIP_FRACTION * traj.len() as f64).floor() as usize;
    let floor = FIT_FLOOR * c[start.min(c.len() - 1)].norm();
    let mut end = start;
    while end < c.len() && c[end].norm() >= floor && c[end].norm() > 0.0 {
        end += 1;
    }
    if end - start < 2 {
        return Err(Error::TimeGrid(format!(
            "only {} usable samples for the ({bra}, {ket}) fit",
            end - start
        )));
    }
    let xs = &traj.times[start..end];
    let ys: Vec<f64> = c[start..end].iter().map(|z| z.norm().ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (my + slope * (x - mx));
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit {
        rate: -slope,
        residual,
        non_exponential: residual > NON_EXPONENTIAL_TOL,
        window: (start, end),
    })
}

/// Reduced, enhanced and generic two-qubit dephasing rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoQubitRates {
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub gamma_zero: f64,
}

impl TwoQubitRates {
    /// `C(0,0) -+ C(0,d)` and `C(0,0)/2`.
    pub fn from_spectral(c0: f64, cd: f64) -> Self {
        Self {
            gamma_minus: c0 - cd,
            gamma_plus: c0 + cd,
            gamma_zero: 0.5 * c0,
        }
    }

    /// `|gamma_- + gamma_+ - 4 gamma_0|`
    pub fn sum_defect(&self) -> f64 {
        (self.gamma_minus + self.gamma_plus - 4.0 * self.gamma_zero).abs()
    }
}

/// Bath operators that carry the dephasing noise for a given model: the
/// `B^dagger B` channel for the bosonic chain, Hermitian otherwise.
fn rate_sites(model: &SpectralModel, d: i64) -> (BathSite, BathSite, BathSite) {
    let (a, b) = match model.kernel {
        Kernel::BosonicChain(_) => (BathOperator::Creation, BathOperator::Annihilation),
        _ => (BathOperator::Hermitian, BathOperator::Hermitian),
    };
    let s = |position, op| BathSite { position, group: 0, op };
    (s(0, a), s(0, b), s(d, b))
}

/// Analytic rates `C(0,0) -+ C(0,d)`, `C(0,0)/2`, scaled by `coupling^2`.
pub fn two_qubit_rates(model: &SpectralModel, d: i64, coupling: f64) -> Result<TwoQubitRates> {
    let (j, k0, kd) = rate_sites(model, d);
    let c0 = model.spectral(0.0, &j, &k0)?;
    let cd = model.spectral(0.0, &j, &kd)?;
    let g2 = coupling * coupling;
    Ok(TwoQubitRates::from_spectral(g2 * c0, g2 * cd))
}

/// Closed-form Ising rates with `zeta = cosh(2 beta J)`, `eta = tanh(beta J)`.
pub fn ising_two_qubit_rates(params: &IsingParams, d: u32) -> Result<TwoQubitRates> {
    params.validate()?;
    let zeta = params.zeta();
    let eta_d = params.eta().powi(d as i32);
    let a = params.alpha;
    let corr = eta_d * (d as f64 + zeta);
    Ok(TwoQubitRates {
        gamma_minus: 2.0 * zeta / a * (zeta - corr),
        gamma_plus: 2.0 * zeta / a * (zeta + corr),
        gamma_zero: zeta * zeta / a,
    })
}

/// Basis indices (site 0 leftmost) of the coherences that define the rates.
pub mod coherences {
    /// `|10><01|`
    pub const REDUCED: (usize, usize) = (0b10, 0b01);
    /// `|11><00|`
    pub const ENHANCED: (usize, usize) = (0b11, 0b00);
    /// `|11><10|`
    pub const GENERIC: (usize, usize) = (0b11, 0b10);
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulatedRates {
    /// Calibrated onto the analytic convention.
    pub rates: TwoQubitRates,
    pub fits: [RateFit; 3],
}

/// Propagates two dephasing qubits at distance `d` under the full
/// Bloch-Redfield generator and fits the three coherence decay rates.
pub fn simulate_two_qubit_rates(model: &SpectralModel, d: i64, coupling: f64, omega_q: f64) -> Result<SimulatedRates> {
    let sys = SystemSpec::dephasing_qubits(&[omega_q, omega_q], &[0, d])?;
    let sys = scale_couplings(sys, coupling)?;
    let gen = build_br_generator(&sys, model)?;
    let analytic = two_qubit_rates(model, d, coupling)?;
    let slowest = [analytic.gamma_minus, analytic.gamma_plus, analytic.gamma_zero]
        .into_iter()
        .filter(|r| *r > 1e-300)
        .fold(f64::INFINITY, f64::min);
    let fastest = analytic.gamma_plus.max(analytic.gamma_zero);
    if !(fastest > 0.0) {
        return Err(Error::InvalidParameter {
            name: "kernel",
            reason: "all two-qubit rates vanish".into(),
        });
    }
    // cover at least a few e-folds of the slowest nonzero rate
    let t_end = (8.0 / (fastest / RATE_CALIBRATION)).max((2.0 / (slowest / RATE_CALIBRATION)).min(1e6));
    let traj = propagate(&gen.superop, &DensityMatrix::maximally_coherent(4), &linspace(t_end, 401))?;
    let fit = |(b, k): (usize, usize)| extract_decay_rate(&traj, b, k);
    let fits = [fit(coherences::REDUCED)?, fit(coherences::ENHANCED)?, fit(coherences::GENERIC)?];
    Ok(SimulatedRates {
        rates: TwoQubitRates {
            gamma_minus: RATE_CALIBRATION * fits[0].rate,
            gamma_plus: RATE_CALIBRATION * fits[1].rate,
            gamma_zero: RATE_CALIBRATION * fits[2].rate,
        },
        fits,
    })
}

fn scale_couplings(sys: SystemSpec, coupling: f64) -> Result<SystemSpec> {
    if coupling == 1.0 {
        return Ok(sys);
    }
    let labels = sys.labels().to_vec();
    let cs = sys
        .couplings()
        .iter()
        .map(|c| crate::redfield::Coupling::new(c.op.scale(coupling), c.site))
        .collect();
    SystemSpec::new(sys.h_s().clone(), cs)?.with_labels(labels)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Uncorrelated,
    FullyCorrelated,
}

/// Limiting-regime prediction for one coherence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingPrediction {
    /// Number of qubits whose bit differs between bra and ket.
    pub n_f: u32,
    /// Difference of the excitation numbers.
    pub n_e: u32,
    /// Single-qubit dephasing rate.
    pub gamma: f64,
    pub regime: Regime,
}

impl ScalingPrediction {
    pub fn new(bra: usize, ket: usize, gamma: f64, regime: Regime) -> Self {
        let n_f = (bra ^ ket).count_ones();
        let n_e = (bra.count_ones() as i64 - ket.count_ones() as i64).unsigned_abs() as u32;
        Self { n_f, n_e, gamma, regime }
    }

    pub fn predicted(&self) -> f64 {
        match self.regime {
            Regime::Uncorrelated => self.n_f as f64 * self.gamma,
            Regime::FullyCorrelated => (self.n_e * self.n_e) as f64 * self.gamma,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingResult {
    pub simulated: f64,
    pub fit: RateFit,
    pub prediction: ScalingPrediction,
}

/// Maximum register size for the scaling experiment.
pub const MAX_SCALING_QUBITS: usize = 6;

/// Single-qubit dephasing rate measured with the same kernel, used as the
/// baseline `gamma`.
pub fn single_qubit_rate(model: &SpectralModel, omega_q: f64) -> Result<RateFit> {
    let sys = SystemSpec::dephasing_qubits(&[omega_q], &[0])?;
    let gen = build_br_generator(&sys, model)?;
    let rate = -gen.superop.matrix()[(2, 2)].re;
    if !(rate > 0.0) {
        return Err(Error::InvalidParameter {
            name: "kernel",
            reason: "single-qubit dephasing rate vanishes".into(),
        });
    }
    let traj = propagate(&gen.superop, &DensityMatrix::maximally_coherent(2), &linspace(10.0 / rate, 401))?;
    extract_decay_rate(&traj, 0, 1)
}

/// Dephasing of `n_qubits` qubits at positions `0, 1, ...` with the decay
/// rate of `<bra| rho |ket>` compared against the limiting-regime law.
pub fn scaling_experiment(
    n_qubits: usize,
    model: &SpectralModel,
    bra: usize,
    ket: usize,
    regime: Regime,
    omega_q: f64,
) -> Result<ScalingResult> {
    if n_qubits == 0 || n_qubits > MAX_SCALING_QUBITS {
        return Err(Error::InvalidParameter {
            name: "n_qubits",
            reason: format!("must be in 1..={MAX_SCALING_QUBITS}, got {n_qubits}"),
        });
    }
    let d = 1usize << n_qubits;
    if bra >= d || ket >= d {
        return Err(Error::Dimension(format!("coherence ({bra}, {ket}) out of range for {n_qubits} qubits")));
    }
    let gamma = single_qubit_rate(model, omega_q)?.rate;
    let positions: Vec<i64> = (0..n_qubits as i64).collect();
    let sys = SystemSpec::dephasing_qubits(&vec![omega_q; n_qubits], &positions)?;
    let gen = build_br_generator(&sys, model)?;
    let prediction = ScalingPrediction::new(bra, ket, gamma, regime);
    // long enough to resolve rates down to ~1e-3 gamma relative to the scale n_f gamma
    let t_end = 10.0 / (gamma * prediction.n_f.max(1) as f64);
    let traj = propagate(&gen.superop, &DensityMatrix::maximally_coherent(d), &linspace(t_end, 801))?;
    let fit = extract_decay_rate(&traj, bra, ket)?;
    Ok(ScalingResult {
        simulated: fit.rate,
        fit,
        prediction,
    })
}
