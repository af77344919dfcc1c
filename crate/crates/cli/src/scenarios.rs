//! Scenario execution. Each scenario turns a validated config into a
//! results table, a JSON results object and a list of warnings.

use corrdeco_core::dynamics::{generator_hash, linspace, simulate_two_qubit_rates, Trajectory};
use corrdeco_core::lindblad::{map_to_lindblad, psd_check, toeplitz_fourier_bounds, Mapping, ToeplitzKernel};
use corrdeco_core::quantum::{basis_ket, bitstring_index, pauli};
use corrdeco_core::redfield::{build_br_generator_with, markov_smoothness, Coupling};
use corrdeco_core::spectral::bosonic_tau0_profile;
use corrdeco_core::{
    build_secular_generator, embed_site, extract_decay_rate, ising_two_qubit_rates, positivity_audit, propagate,
    scaling_experiment, two_qubit_rates, DensityMatrix, Operator, PhenomenologicalKind, Regime, ScalingPrediction,
    SpectralModel, Superoperator, SystemSpec, C64,
};
use nalgebra::DVector;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};

use crate::config::{CouplingKind, Generator, InitialState, KernelConfig, ScenarioConfig, Scenario};
use crate::diagnostics::{Code, Diagnostic, MARKOV_SMOOTHNESS_LIMIT, SECULAR_RATIO_LIMIT};
use crate::output::Table;

/// Smallest eigenvalue along a trajectory still accepted as positive.
const TRAJECTORY_POSITIVITY_TOL: f64 = 1e-8;

pub enum Body {
    Table(Table),
    Trajectory { traj: Trajectory, pairs: Vec<(usize, usize)> },
}

pub struct Outcome {
    pub body: Body,
    pub results: Value,
    pub warnings: Vec<Diagnostic>,
    /// 2 when a positivity audit finds a non-CP kernel, else 0.
    pub exit_status: i32,
}

pub fn run_scenario(cfg: &ScenarioConfig) -> corrdeco_core::Result<Outcome> {
    let mut warnings = cfg.warnings.clone();
    let mut outcome = match cfg.scenario {
        Scenario::TwoQubitRates => two_qubit(cfg, &mut warnings),
        Scenario::IsingRates => ising(cfg),
        Scenario::BosonicRates => bosonic(cfg),
        Scenario::Scaling => scaling(cfg, &mut warnings),
        Scenario::PositivityAudit => audit(cfg, &mut warnings),
        Scenario::Propagate => propagate_scenario(cfg, &mut warnings),
    }?;
    outcome.warnings = warnings;
    Ok(outcome)
}

fn done(table: Table, results: Value) -> Outcome {
    Outcome {
        body: Body::Table(table),
        results,
        warnings: Vec::new(),
        exit_status: 0,
    }
}

fn non_exponential(w: &mut Vec<Diagnostic>, what: &str, residual: f64) {
    w.push(Diagnostic::new(
        Code::NonExponentialDecay,
        format!("{what}: log-linear fit residual {residual:.3e}; the reported rate is an average"),
    ));
}

fn two_qubit(cfg: &ScenarioConfig, warnings: &mut Vec<Diagnostic>) -> corrdeco_core::Result<Outcome> {
    let model = cfg.kernel.model();
    let g = cfg.system.coupling_strength;
    let mut cols = vec!["dx", "gamma_minus", "gamma_plus", "gamma_zero", "sum_defect"];
    if cfg.run.simulate {
        cols.extend(["simulated_gamma_minus", "simulated_gamma_plus", "simulated_gamma_zero"]);
        let sys = SystemSpec::dephasing_qubits(&[0.5 * cfg.run.omega_q; 2], &[0, 1])?;
        smoothness(&sys, &model, warnings)?;
    }
    let mut table = Table::new(&cols);
    let mut rows = Vec::new();
    for &d in &cfg.run.separations {
        let r = two_qubit_rates(&model, d, g)?;
        let mut row = vec![d.into(), r.gamma_minus.into(), r.gamma_plus.into(), r.gamma_zero.into(), r.sum_defect().into()];
        let mut entry = json!({"dx": d, "analytic": r, "sum_defect": r.sum_defect()});
        if cfg.run.simulate {
            let s = simulate_two_qubit_rates(&model, d, g, 0.5 * cfg.run.omega_q)?;
            for (fit, name) in s.fits.iter().zip(["reduced", "enhanced", "single-flip"]) {
                if fit.non_exponential {
                    non_exponential(warnings, &format!("{name} coherence at dx = {d}"), fit.residual);
                }
            }
            row.extend([s.rates.gamma_minus.into(), s.rates.gamma_plus.into(), s.rates.gamma_zero.into()]);
            entry["simulated"] = json!(s);
        }
        table.push(row);
        rows.push(entry);
    }
    Ok(done(table, json!({"kernel": cfg.kernel.name(), "rates": rows})))
}

fn ising(cfg: &ScenarioConfig) -> corrdeco_core::Result<Outcome> {
    let params = cfg.kernel.ising().expect("validated");
    let model = cfg.kernel.model();
    let g = cfg.system.coupling_strength;
    let scale = g * g * cfg.kernel.strength;
    let mut table = Table::new(&[
        "dx",
        "gamma_minus",
        "gamma_plus",
        "gamma_zero",
        "numeric_gamma_minus",
        "numeric_gamma_plus",
        "numeric_gamma_zero",
    ]);
    let mut rows = Vec::new();
    for &d in &cfg.run.separations {
        let c = ising_two_qubit_rates(&params, d as u32)?;
        let n = two_qubit_rates(&model, d, g)?;
        let (m, p, z) = (scale * c.gamma_minus, scale * c.gamma_plus, scale * c.gamma_zero);
        table.push(vec![
            d.into(),
            m.into(),
            p.into(),
            z.into(),
            n.gamma_minus.into(),
            n.gamma_plus.into(),
            n.gamma_zero.into(),
        ]);
        rows.push(json!({
            "dx": d,
            "closed_form": {"gamma_minus": m, "gamma_plus": p, "gamma_zero": z},
            "numeric": n,
        }));
    }
    Ok(done(
        table,
        json!({"eta": params.eta(), "zeta": params.zeta(), "rates": rows}),
    ))
}

fn bosonic(cfg: &ScenarioConfig) -> corrdeco_core::Result<Outcome> {
    let params = cfg.kernel.bosonic().expect("validated");
    let model = cfg.kernel.model();
    let g = cfg.system.coupling_strength;
    let mut table = Table::new(&["dx", "gamma_minus", "gamma_plus", "gamma_zero", "tau0_profile"]);
    let mut rows = Vec::new();
    for &d in &cfg.run.separations {
        let r = two_qubit_rates(&model, d, g)?;
        let profile = bosonic_tau0_profile(&params, d);
        table.push(vec![d.into(), r.gamma_minus.into(), r.gamma_plus.into(), r.gamma_zero.into(), profile.into()]);
        rows.push(json!({"dx": d, "rates": r, "tau0_profile": profile}));
    }
    Ok(done(table, json!({"channel": "creation-annihilation", "rates": rows})))
}

/// The configured kernel, or one copy per entry of `run.a_values`.
fn kernel_sweep(cfg: &ScenarioConfig) -> Vec<(Option<f64>, KernelConfig)> {
    let a_of = |k: &KernelConfig| match k.phenomenological() {
        Some(PhenomenologicalKind::Exponential { a } | PhenomenologicalKind::Gaussian { a }) => Some(a),
        _ => None,
    };
    if cfg.run.a_values.is_empty() {
        return vec![(a_of(&cfg.kernel), cfg.kernel.clone())];
    }
    cfg.run
        .a_values
        .iter()
        .map(|&a| (Some(a), cfg.kernel.with_a(a).expect("validated")))
        .collect()
}

fn scaling(cfg: &ScenarioConfig, warnings: &mut Vec<Diagnostic>) -> corrdeco_core::Result<Outcome> {
    let n = cfg.system.n_qubits;
    let omega = 0.5 * cfg.system.splittings[0];
    let mut table = Table::new(&[
        "a",
        "bra",
        "ket",
        "n_f",
        "n_e",
        "gamma",
        "simulated",
        "uncorrelated_prediction",
        "correlated_prediction",
    ]);
    let mut rows = Vec::new();
    for (a, kernel) in kernel_sweep(cfg) {
        let model = kernel.model();
        for [bra_s, ket_s] in &cfg.run.coherences {
            let (bra, ket) = (bitstring_index(bra_s)?, bitstring_index(ket_s)?);
            let r = scaling_experiment(n, &model, bra, ket, Regime::Uncorrelated, omega)?;
            if r.fit.non_exponential {
                non_exponential(warnings, &format!("coherence {bra_s}/{ket_s}"), r.fit.residual);
            }
            let p = r.prediction;
            let corr = ScalingPrediction::new(bra, ket, p.gamma, Regime::FullyCorrelated).predicted();
            table.push(vec![
                a.into(),
                bra_s.as_str().into(),
                ket_s.as_str().into(),
                (p.n_f as i64).into(),
                (p.n_e as i64).into(),
                p.gamma.into(),
                r.simulated.into(),
                p.predicted().into(),
                corr.into(),
            ]);
            rows.push(json!({
                "a": a,
                "bra": bra_s,
                "ket": ket_s,
                "n_f": p.n_f,
                "n_e": p.n_e,
                "gamma": p.gamma,
                "simulated": r.simulated,
                "fit": r.fit,
                "uncorrelated_prediction": p.predicted(),
                "correlated_prediction": corr,
            }));
        }
    }
    Ok(done(table, json!({"n_qubits": n, "coherences": rows})))
}

fn audit(cfg: &ScenarioConfig, warnings: &mut Vec<Diagnostic>) -> corrdeco_core::Result<Outcome> {
    let mut table = Table::new(&[
        "a",
        "n",
        "mappable",
        "eig_min",
        "eig_max",
        "f_min",
        "f_max",
        "within_bounds",
        "negative_count",
        "clamped",
        "witness_order",
        "witness_det",
    ]);
    let mut reports = Vec::new();
    let mut bounds = Vec::new();
    let mut exit_status = 0;
    for (a, kernel) in kernel_sweep(cfg) {
        let kind = kernel.phenomenological().expect("validated");
        let toeplitz = ToeplitzKernel::phenomenological_with_tail(kind, 1e-13)?;
        let fb = toeplitz_fourier_bounds(&toeplitz, cfg.run.grid_size, cfg.run.bound_tol.max(toeplitz.tail_bound()))?;
        bounds.push(json!({"a": a, "bounds": fb}));
        let mut non_cp = Vec::new();
        let mut clamped = Vec::new();
        for &n in &cfg.run.sizes {
            let mut r = positivity_audit(kind, n, cfg.run.bound_tol)?;
            if cfg.run.psd_tol.is_some() {
                let v = psd_check(&toeplitz.matrix(n)?, cfg.run.psd_tol)?;
                r.mappable = v.mappable;
                r.negative_count = v.negative_eigenvalues.len();
                r.clamped = v.clamped;
                r.witness = v.minor;
            }
            if !r.mappable {
                non_cp.push(n);
                exit_status = 2;
            }
            if r.clamped > 0 {
                clamped.push(n);
            }
            let w = r.witness.as_ref();
            table.push(vec![
                a.into(),
                n.into(),
                r.mappable.into(),
                r.eig_min.into(),
                r.eig_max.into(),
                r.f_min.into(),
                r.f_max.into(),
                r.eigenvalues_within_bounds.into(),
                r.negative_count.into(),
                r.clamped.into(),
                w.map(|w| w.order).into(),
                w.map(|w| w.determinant).into(),
            ]);
            reports.push(json!({"a": a, "report": r}));
        }
        let label = a.map(|a| format!(" (a = {a})")).unwrap_or_default();
        if !non_cp.is_empty() {
            warnings.push(Diagnostic::new(
                Code::NotCompletelyPositive,
                format!("{} kernel{label} is not positive semi-definite for n = {non_cp:?}", kind.name()),
            ));
        }
        if !clamped.is_empty() {
            warnings.push(Diagnostic::new(
                Code::ClampedEigenvalues,
                format!("{} kernel{label}: eigenvalues within psd_tol of zero clamped for n = {clamped:?}", kind.name()),
            ));
        }
    }
    let mut out = done(table, json!({"fourier_bounds": bounds, "audits": reports}));
    out.exit_status = exit_status;
    Ok(out)
}

/// `H = sum_j (splitting_j / 2) sigma_z^(j)` with the configured couplings.
pub fn build_system(cfg: &ScenarioConfig) -> corrdeco_core::Result<SystemSpec> {
    let s = &cfg.system;
    let n = s.n_qubits;
    let mut h = Operator::zeros(1 << n);
    let mut couplings = Vec::new();
    for j in 0..n {
        let z = embed_site(&pauli::sigma_z(), j, n)?;
        h = &h + &z.scale(0.5 * s.splittings[j]);
        let x = embed_site(&pauli::sigma_x(), j, n)?;
        let ops = match s.couplings {
            CouplingKind::Dephasing => vec![z],
            CouplingKind::Transverse => vec![x],
            CouplingKind::Mixed => vec![x, z],
        };
        for op in ops {
            couplings.push(Coupling::hermitian(op.scale(s.coupling_strength), s.positions[j]));
        }
    }
    SystemSpec::new(h, couplings)
}

fn initial_state(cfg: &ScenarioConfig, dim: usize) -> corrdeco_core::Result<DensityMatrix> {
    match &cfg.run.initial {
        InitialState::MaximallyCoherent => Ok(DensityMatrix::maximally_coherent(dim)),
        InitialState::RandomPure => {
            let mut rng = StdRng::seed_from_u64(cfg.run.seed);
            let ket = DVector::from_fn(dim, |_, _| {
                C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
            });
            DensityMatrix::pure(&ket)
        }
        InitialState::Superposition(bits) => {
            let mut ket = DVector::zeros(dim);
            for b in bits {
                ket += basis_ket(bitstring_index(b)?, dim);
            }
            DensityMatrix::pure(&ket)
        }
    }
}

fn smoothness(sys: &SystemSpec, model: &SpectralModel, warnings: &mut Vec<Diagnostic>) -> corrdeco_core::Result<f64> {
    let s = markov_smoothness(sys, model)?;
    if s > MARKOV_SMOOTHNESS_LIMIT {
        warnings.push(Diagnostic::new(
            Code::MarkovSmoothness,
            format!(
                "C(w) varies by {s:.3e} (relative) across the Bohr frequencies; the Markov approximation may not hold"
            ),
        ));
    }
    Ok(s)
}

fn max_rate(gen: &Superoperator) -> f64 {
    let m = gen.matrix();
    (0..m.nrows()).fold(0.0f64, |acc, i| acc.max(m[(i, i)].re.abs()))
}

fn propagate_scenario(cfg: &ScenarioConfig, warnings: &mut Vec<Diagnostic>) -> corrdeco_core::Result<Outcome> {
    let sys = build_system(cfg)?;
    let model = cfg.kernel.model();
    let smooth = smoothness(&sys, &model, warnings)?;
    let mut info = json!({"markov_smoothness": smooth});
    let (superop, dissipator) = match cfg.run.generator {
        Generator::BlochRedfield => {
            let g = build_br_generator_with(&sys, &model, cfg.run.lamb_shift)?;
            (g.superop, g.dissipator)
        }
        Generator::Secular => {
            let g = build_secular_generator(&sys, &model, cfg.run.eps_tol, cfg.run.lamb_shift)?;
            let d = g.diagnostics;
            if d.ratio < SECULAR_RATIO_LIMIT {
                warnings.push(Diagnostic::new(
                    Code::SecularRatio,
                    format!(
                        "smallest Bohr-frequency gap {:.3e} is only {:.3e} times the largest rate {:.3e}",
                        d.min_separation, d.ratio, d.max_rate
                    ),
                ));
            }
            let mut groups = Vec::new();
            for c in &g.coefficients {
                let verdict = match map_to_lindblad(&c.matrix, &c.ops, cfg.run.psd_tol)? {
                    Mapping::Lindblad(l) => l.verdict,
                    Mapping::NotCompletelyPositive(v) => v,
                };
                if !verdict.mappable {
                    warnings.push(Diagnostic::new(
                        Code::NotCompletelyPositive,
                        format!(
                            "secular coefficient matrix at Bohr frequency {:.6e} has eigenvalue {:.6e}",
                            c.epsilon,
                            verdict.min_eigenvalue()
                        ),
                    ));
                }
                if verdict.clamped > 0 {
                    warnings.push(Diagnostic::new(
                        Code::ClampedEigenvalues,
                        format!(
                            "{} eigenvalue(s) of the coefficient matrix at Bohr frequency {:.6e} clamped to zero",
                            verdict.clamped, c.epsilon
                        ),
                    ));
                }
                groups.push(json!({"epsilon": c.epsilon, "mappable": verdict.mappable, "min_eigenvalue": verdict.min_eigenvalue()}));
            }
            info["secular"] = json!({
                "min_separation": d.min_separation,
                "max_rate": d.max_rate,
                "ratio": d.ratio,
                "groups": groups,
            });
            (g.superop, g.dissipator)
        }
    };
    let rate = max_rate(&dissipator);
    let t_end = match cfg.run.t_end {
        Some(t) => t,
        None if rate > 0.0 => 10.0 / rate,
        None => {
            return Err(corrdeco_core::Error::InvalidParameter {
                name: "run.t_end",
                reason: "the dissipator vanishes; set t_end explicitly".into(),
            })
        }
    };
    let rho0 = initial_state(cfg, sys.dim())?;
    let traj = propagate(&superop, &rho0, &linspace(t_end, cfg.run.n_times))?.with_scenario(cfg.scenario.name());
    let mins = traj.min_eigenvalues();
    let (worst_t, worst) = traj
        .times()
        .iter()
        .zip(&mins)
        .fold((0.0, f64::INFINITY), |acc, (&t, &m)| if m < acc.1 { (t, m) } else { acc });
    if worst < -TRAJECTORY_POSITIVITY_TOL {
        warnings.push(Diagnostic::new(
            Code::NotCompletelyPositive,
            format!("state has eigenvalue {worst:.6e} at t = {worst_t}; the trajectory leaves the state space"),
        ));
    }
    let pairs: Vec<(usize, usize)> = cfg.run.pairs.iter().map(|p| (p[0], p[1])).collect();
    let fits: Vec<Value> = pairs
        .iter()
        .map(|&(b, k)| match extract_decay_rate(&traj, b, k) {
            Ok(f) => json!({"pair": [b, k], "fit": f}),
            Err(e) => json!({"pair": [b, k], "error": e.to_string()}),
        })
        .collect();
    let last = traj.states().last().expect("n_times >= 2");
    info["t_end"] = json!(t_end);
    info["max_rate"] = json!(rate);
    info["generator_hash"] = json!(format!("{:016x}", generator_hash(&superop)));
    info["min_eigenvalue"] = json!(worst);
    info["final_trace"] = json!(last.trace().re);
    info["decay_fits"] = json!(fits);
    Ok(Outcome {
        body: Body::Trajectory { traj, pairs },
        results: info,
        warnings: Vec::new(),
        exit_status: 0,
    })
}
