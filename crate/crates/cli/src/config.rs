//! Scenario configuration: TOML parsing, defaults and validation.
//!
//! Parsing never stops at the first problem. Every schema violation is
//! collected and reported together, each naming the offending field.

use std::fmt;
use std::path::{Path, PathBuf};

use corrdeco_core::dynamics::MAX_SCALING_QUBITS;
use corrdeco_core::lindblad::{psd_check, ToeplitzKernel, DEFAULT_GRID};
use corrdeco_core::quantum::bitstring_index;
use corrdeco_core::spectral::{BathSite, Dispersion, Occupation};
use corrdeco_core::{BosonicChainParams, IsingParams, Kernel, PhenomenologicalKind, SpectralModel, SpectralTable, C64};
use nalgebra::DMatrix;
use serde::Serialize;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::diagnostics::{Code, Diagnostic};

/// Name and one-line description of every scenario.
pub const SCENARIOS: [(&str, &str); 6] = [
    ("two-qubit-rates", "reduced, enhanced and single-flip dephasing rates of two qubits per separation"),
    ("ising-rates", "closed-form two-qubit rates for the Glauber Ising chain bath"),
    ("bosonic-rates", "two-qubit rates and equal-time spatial profile of the oscillator-chain bath"),
    ("scaling", "n-qubit coherence decay against the flipped-qubit and excitation-number laws"),
    ("positivity-audit", "PSD verdict and Fourier-symbol bounds for homogeneous kernel matrices"),
    ("propagate", "density-matrix trajectory under the Bloch-Redfield or secular generator"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    TwoQubitRates,
    IsingRates,
    BosonicRates,
    Scaling,
    PositivityAudit,
    Propagate,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        SCENARIOS[self as usize].0
    }

    fn parse(s: &str) -> Option<Self> {
        use Scenario::*;
        [TwoQubitRates, IsingRates, BosonicRates, Scaling, PositivityAudit, Propagate]
            .into_iter()
            .find(|v| v.name() == s)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// System-bath coupling operators per qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingKind {
    /// `sigma_z`
    Dephasing,
    /// `sigma_x`
    Transverse,
    /// `sigma_x` and `sigma_z`, both to the bath at the qubit's position.
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemConfig {
    pub n_qubits: usize,
    /// Level splittings; `H_S = sum_j (splitting_j / 2) sigma_z^(j)`.
    pub splittings: Vec<f64>,
    /// Lattice positions of the qubits.
    pub positions: Vec<i64>,
    pub couplings: CouplingKind,
    pub coupling_strength: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KernelParams {
    Exponential {
        a: f64,
    },
    Gaussian {
        a: f64,
    },
    Step {
        width: u32,
    },
    Ising {
        j: f64,
        beta: f64,
        alpha: f64,
    },
    BosonicChain {
        omega0: f64,
        g: f64,
        beta: f64,
        n_modes: usize,
        occupation: Occupation,
        dispersion: Dispersion,
    },
    Tabulated {
        path: PathBuf,
        /// Hex SHA-256 of the table file, so edits change the run hash.
        sha256: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelConfig {
    #[serde(flatten)]
    pub params: KernelParams,
    pub strength: f64,
    pub imag_strength: f64,
    #[serde(skip)]
    pub table: Option<SpectralTable>,
}

impl KernelConfig {
    pub fn phenomenological(&self) -> Option<PhenomenologicalKind> {
        match self.params {
            KernelParams::Exponential { a } => Some(PhenomenologicalKind::Exponential { a }),
            KernelParams::Gaussian { a } => Some(PhenomenologicalKind::Gaussian { a }),
            KernelParams::Step { width } => Some(PhenomenologicalKind::Step { width }),
            _ => None,
        }
    }

    pub fn ising(&self) -> Option<IsingParams> {
        match self.params {
            KernelParams::Ising { j, beta, alpha } => Some(IsingParams { j, beta, alpha }),
            _ => None,
        }
    }

    pub fn bosonic(&self) -> Option<BosonicChainParams> {
        match self.params {
            KernelParams::BosonicChain {
                omega0,
                g,
                beta,
                n_modes,
                occupation,
                dispersion,
            } => Some(BosonicChainParams {
                omega0,
                g,
                beta,
                n_modes,
                occupation,
                dispersion,
            }),
            _ => None,
        }
    }

    pub fn is_bosonic(&self) -> bool {
        matches!(self.params, KernelParams::BosonicChain { .. })
    }

    pub fn name(&self) -> &'static str {
        match self.params {
            KernelParams::Exponential { .. } => "exponential",
            KernelParams::Gaussian { .. } => "gaussian",
            KernelParams::Step { .. } => "step",
            KernelParams::Ising { .. } => "ising",
            KernelParams::BosonicChain { .. } => "bosonic-chain",
            KernelParams::Tabulated { .. } => "tabulated",
        }
    }

    pub fn model(&self) -> SpectralModel {
        let kernel = if let Some(k) = self.phenomenological() {
            Kernel::Phenomenological(k)
        } else if let Some(p) = self.ising() {
            Kernel::Ising(p)
        } else if let Some(p) = self.bosonic() {
            Kernel::BosonicChain(p)
        } else {
            Kernel::Tabulated(self.table.clone().expect("table loaded during validation"))
        };
        SpectralModel::new(kernel)
            .with_strength(self.strength)
            .with_imag_strength(self.imag_strength)
    }

    /// Same kernel with the decay parameter replaced; `None` for kernels
    /// without one.
    pub fn with_a(&self, a: f64) -> Option<KernelConfig> {
        let params = match self.params {
            KernelParams::Exponential { .. } => KernelParams::Exponential { a },
            KernelParams::Gaussian { .. } => KernelParams::Gaussian { a },
            _ => return None,
        };
        Some(KernelConfig {
            params,
            ..self.clone()
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    BlochRedfield,
    Secular,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// Uniform superposition of all basis states.
    MaximallyCoherent,
    /// Random pure state drawn from `run.seed`.
    RandomPure,
    /// Equal superposition of the listed basis states.
    Superposition(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    /// End time; `None` means ten times the inverse largest decay rate.
    pub t_end: Option<f64>,
    pub n_times: usize,
    /// Density-matrix elements exported by `propagate`.
    pub pairs: Vec<[usize; 2]>,
    /// Qubit separations for the rate scenarios.
    pub separations: Vec<i64>,
    /// Also fit rates from full propagation (`two-qubit-rates`).
    pub simulate: bool,
    /// Qubit frequency for simulated rates.
    pub omega_q: f64,
    /// Matrix sizes for `positivity-audit`.
    pub sizes: Vec<usize>,
    pub grid_size: usize,
    pub bound_tol: f64,
    pub psd_tol: Option<f64>,
    pub eps_tol: Option<f64>,
    pub generator: Generator,
    pub lamb_shift: bool,
    pub initial: InitialState,
    /// `[bra, ket]` bitstrings for `scaling`.
    pub coherences: Vec<[String; 2]>,
    /// Decay parameters swept by `scaling`.
    pub a_values: Vec<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub system: SystemConfig,
    pub kernel: KernelConfig,
    pub run: RunConfig,
    #[serde(skip)]
    pub warnings: Vec<Diagnostic>,
}

impl ScenarioConfig {
    /// First 16 hex digits of the SHA-256 of the resolved config.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Everything wrong with a config file.
#[derive(Debug)]
pub enum ConfigError {
    Missing(PathBuf, std::io::Error),
    Syntax(PathBuf, String),
    Invalid(PathBuf, Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Missing(p, e) => write!(f, "{}: cannot read config: {e}", p.display()),
            Self::Syntax(p, e) => write!(f, "{}: not valid TOML: {e}", p.display()),
            Self::Invalid(p, errs) => {
                write!(f, "{}: {} schema violation(s)", p.display(), errs.len())?;
                for e in errs {
                    write!(f, "\n  - {e}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Missing(path.to_path_buf(), e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_str(&text, base).map_err(|e| match e {
        Parse::Syntax(s) => ConfigError::Syntax(path.to_path_buf(), s),
        Parse::Invalid(v) => ConfigError::Invalid(path.to_path_buf(), v),
    })
}

#[derive(Debug)]
pub enum Parse {
    Syntax(String),
    Invalid(Vec<String>),
}

/// Parses config text; relative table paths resolve against `base`.
pub fn parse_str(text: &str, base: &Path) -> Result<ScenarioConfig, Parse> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| Parse::Syntax(e.to_string()))?;
    let mut r = Reader::default();
    r.known("", &root, &["scenario", "system", "kernel", "run"]);

    let scenario = match root.get("scenario") {
        None => {
            r.err("scenario", "missing; expected one of ".to_string() + &scenario_list());
            None
        }
        Some(Value::String(s)) => {
            let sc = Scenario::parse(s);
            if sc.is_none() {
                r.err("scenario", format!("unknown scenario `{s}`; expected one of {}", scenario_list()));
            }
            sc
        }
        Some(_) => {
            r.err("scenario", "must be a string");
            None
        }
    };

    let empty = Table::new();
    let system_t = r.section(&root, "system").unwrap_or(&empty);
    let kernel_t = r.section(&root, "kernel");
    let run_t = r.section(&root, "run").unwrap_or(&empty);

    let system = r.system(system_t, scenario);
    let kernel = match kernel_t {
        Some(t) => r.kernel(t, base),
        None => {
            r.err("kernel", "missing section");
            None
        }
    };
    let run = r.run(run_t, system.as_ref(), kernel.as_ref(), scenario);

    if let (Some(sc), Some(k)) = (scenario, kernel.as_ref()) {
        r.compatible(sc, k, run.as_ref());
    }
    if !r.errors.is_empty() {
        return Err(Parse::Invalid(r.errors));
    }
    let mut cfg = ScenarioConfig {
        scenario: scenario.unwrap(),
        system: system.unwrap(),
        kernel: kernel.unwrap(),
        run: run.unwrap(),
        warnings: Vec::new(),
    };
    cfg.warnings = parse_warnings(&cfg);
    Ok(cfg)
}

fn scenario_list() -> String {
    SCENARIOS.iter().map(|s| s.0).collect::<Vec<_>>().join(", ")
}

/// Complete-positivity warnings known before running: the zero-frequency
/// coefficient matrix over the configured positions, and for phenomenological
/// kernels the homogeneous 3x3 matrix on equally spaced sites.
fn parse_warnings(cfg: &ScenarioConfig) -> Vec<Diagnostic> {
    let dynamic = matches!(cfg.scenario, Scenario::Propagate) || cfg.run.simulate;
    if !dynamic || cfg.kernel.is_bosonic() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let model = cfg.kernel.model();
    let pos = &cfg.system.positions;
    let n = pos.len();
    let mut m = DMatrix::<C64>::zeros(n, n);
    let mut ok = true;
    for i in 0..n {
        for j in 0..n {
            match model.spectral(0.0, &BathSite::hermitian(pos[i]), &BathSite::hermitian(pos[j])) {
                Ok(c) => m[(i, j)] = C64::new(c, 0.0),
                Err(_) => ok = false,
            }
        }
    }
    let mut flagged = false;
    if ok {
        if let Ok(v) = psd_check(&m, cfg.run.psd_tol) {
            if !v.mappable {
                flagged = true;
                let det = v.minor.as_ref().map(|w| format!(", principal minor of order {} has det {}", w.order, w.determinant));
                out.push(Diagnostic::new(
                    Code::NotCompletelyPositive,
                    format!(
                        "zero-frequency coefficient matrix over positions {pos:?} has eigenvalue {:.6e}{}; the generator is not completely positive",
                        v.min_eigenvalue(),
                        det.unwrap_or_default()
                    ),
                ));
            }
        }
    }
    if let (false, Some(kind)) = (flagged, cfg.kernel.phenomenological()) {
        if let Ok(v) = ToeplitzKernel::from_phenomenological(kind, 2)
            .and_then(|k| k.matrix(3))
            .and_then(|m| psd_check(&m, None))
        {
            if !v.mappable {
                let det = v.minor.as_ref().map(|w| w.determinant).unwrap_or(f64::NAN);
                out.push(Diagnostic::new(
                    Code::NotCompletelyPositive,
                    format!(
                        "{} kernel is not positive semi-definite on three equally spaced sites (witness det {det}); dynamics may leave the state space",
                        cfg.kernel.name()
                    ),
                ));
            }
        }
    }
    out
}

#[derive(Default)]
struct Reader {
    errors: Vec<String>,
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

impl Reader {
    fn err(&mut self, field: &str, msg: impl Into<String>) {
        self.errors.push(format!("`{field}`: {}", msg.into()));
    }

    fn known(&mut self, prefix: &str, t: &Table, keys: &[&str]) {
        for k in t.keys() {
            if !keys.contains(&k.as_str()) {
                self.err(&join(prefix, k), format!("unknown key; allowed: {}", keys.join(", ")));
            }
        }
    }

    fn section<'a>(&mut self, root: &'a Table, name: &str) -> Option<&'a Table> {
        match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.err(name, "must be a table");
                None
            }
        }
    }

    fn f64_opt(&mut self, t: &Table, prefix: &str, key: &str) -> Option<f64> {
        let field = join(prefix, key);
        match t.get(key) {
            None => None,
            Some(Value::Float(x)) if x.is_finite() => Some(*x),
            Some(Value::Float(_)) => {
                self.err(&field, "must be finite");
                None
            }
            Some(Value::Integer(i)) => Some(*i as f64),
            Some(_) => {
                self.err(&field, "must be a number");
                None
            }
        }
    }

    /// Required number satisfying `check`; returns `fallback` after recording an error.
    fn f64_req(&mut self, t: &Table, prefix: &str, key: &str, rule: Rule) -> Option<f64> {
        let field = join(prefix, key);
        if !t.contains_key(key) {
            self.err(&field, "missing");
            return None;
        }
        let v = self.f64_opt(t, prefix, key)?;
        self.check(&field, v, rule)
    }

    fn f64_or(&mut self, t: &Table, prefix: &str, key: &str, default: f64, rule: Rule) -> Option<f64> {
        if !t.contains_key(key) {
            return Some(default);
        }
        let v = self.f64_opt(t, prefix, key)?;
        self.check(&join(prefix, key), v, rule)
    }

    fn check(&mut self, field: &str, v: f64, rule: Rule) -> Option<f64> {
        let ok = match rule {
            Rule::Any => true,
            Rule::Positive => v > 0.0,
            Rule::NonNegative => v >= 0.0,
            Rule::NonZero => v != 0.0,
        };
        if ok {
            Some(v)
        } else {
            self.err(field, format!("must be {}, got {v}", rule.describe()));
            None
        }
    }

    fn int_opt(&mut self, t: &Table, prefix: &str, key: &str, min: i64) -> Option<i64> {
        let field = join(prefix, key);
        match t.get(key) {
            None => None,
            Some(Value::Integer(i)) if *i >= min => Some(*i),
            Some(Value::Integer(i)) => {
                self.err(&field, format!("must be >= {min}, got {i}"));
                None
            }
            Some(_) => {
                self.err(&field, "must be an integer");
                None
            }
        }
    }

    fn bool_or(&mut self, t: &Table, prefix: &str, key: &str, default: bool) -> bool {
        match t.get(key) {
            None => default,
            Some(Value::Boolean(b)) => *b,
            Some(_) => {
                self.err(&join(prefix, key), "must be true or false");
                default
            }
        }
    }

    fn str_opt<'a>(&mut self, t: &'a Table, prefix: &str, key: &str) -> Option<&'a str> {
        match t.get(key) {
            None => None,
            Some(Value::String(s)) => Some(s),
            Some(_) => {
                self.err(&join(prefix, key), "must be a string");
                None
            }
        }
    }

    fn array<'a>(&mut self, t: &'a Table, prefix: &str, key: &str) -> Option<&'a Vec<Value>> {
        match t.get(key) {
            None => None,
            Some(Value::Array(a)) => Some(a),
            Some(_) => {
                self.err(&join(prefix, key), "must be an array");
                None
            }
        }
    }

    fn f64_list(&mut self, t: &Table, prefix: &str, key: &str, rule: Rule) -> Option<Vec<f64>> {
        let a = self.array(t, prefix, key)?;
        let mut out = Vec::with_capacity(a.len());
        let mut ok = true;
        for (i, v) in a.iter().enumerate() {
            let field = format!("{}[{i}]", join(prefix, key));
            let x = match v {
                Value::Float(x) if x.is_finite() => Some(*x),
                Value::Integer(n) => Some(*n as f64),
                _ => {
                    self.err(&field, "must be a finite number");
                    None
                }
            };
            match x.and_then(|x| self.check(&field, x, rule)) {
                Some(x) => out.push(x),
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn int_list(&mut self, t: &Table, prefix: &str, key: &str, min: i64) -> Option<Vec<i64>> {
        let a = self.array(t, prefix, key)?;
        let mut out = Vec::with_capacity(a.len());
        let mut ok = true;
        for (i, v) in a.iter().enumerate() {
            match v {
                Value::Integer(n) if *n >= min => out.push(*n),
                _ => {
                    self.err(&format!("{}[{i}]", join(prefix, key)), format!("must be an integer >= {min}"));
                    ok = false;
                }
            }
        }
        ok.then_some(out)
    }

    fn system(&mut self, t: &Table, scenario: Option<Scenario>) -> Option<SystemConfig> {
        let p = "system";
        self.known(p, t, &["n_qubits", "splittings", "positions", "couplings", "coupling_strength"]);
        let default_n = match scenario {
            Some(Scenario::Scaling) => 4,
            _ => 2,
        };
        let n = match self.int_opt(t, p, "n_qubits", 1) {
            Some(n) if n as usize > MAX_SCALING_QUBITS => {
                self.err("system.n_qubits", format!("at most {MAX_SCALING_QUBITS} qubits, got {n}"));
                None
            }
            Some(n) => Some(n as usize),
            None if t.contains_key("n_qubits") => None,
            None => Some(default_n),
        };
        let splittings = if t.contains_key("splittings") {
            self.f64_list(t, p, "splittings", Rule::Any)
        } else {
            n.map(|n| vec![2.0; n])
        };
        let positions = if t.contains_key("positions") {
            self.int_list(t, p, "positions", i64::MIN)
        } else {
            n.map(|n| (0..n as i64).collect())
        };
        let couplings = match self.str_opt(t, p, "couplings") {
            None => Some(CouplingKind::Dephasing),
            Some("dephasing") => Some(CouplingKind::Dephasing),
            Some("transverse") => Some(CouplingKind::Transverse),
            Some("mixed") => Some(CouplingKind::Mixed),
            Some(other) => {
                self.err("system.couplings", format!("unknown `{other}`; expected dephasing, transverse or mixed"));
                None
            }
        };
        let strength = self.f64_or(t, p, "coupling_strength", 1.0, Rule::Positive);
        let n = n?;
        let (splittings, positions) = (splittings?, positions?);
        let mut ok = true;
        if splittings.len() != n {
            self.err("system.splittings", format!("expected {n} entries (one per qubit), got {}", splittings.len()));
            ok = false;
        }
        if positions.len() != n {
            self.err("system.positions", format!("expected {n} entries (one per qubit), got {}", positions.len()));
            ok = false;
        }
        if scenario == Some(Scenario::Scaling) {
            let eq = positions.iter().enumerate().all(|(i, &x)| x == i as i64);
            if !eq {
                self.err("system.positions", "scaling places qubits at 0, 1, ..., n-1; omit the key or use that layout");
                ok = false;
            }
            if splittings.windows(2).any(|w| w[0] != w[1]) {
                self.err("system.splittings", "scaling requires identical splittings");
                ok = false;
            }
        }
        (ok && couplings.is_some() && strength.is_some()).then(|| SystemConfig {
            n_qubits: n,
            splittings,
            positions,
            couplings: couplings.unwrap(),
            coupling_strength: strength.unwrap(),
        })
    }

    fn kernel(&mut self, t: &Table, base: &Path) -> Option<KernelConfig> {
        let p = "kernel";
        let common = ["kind", "strength", "imag_strength"];
        let kind = match self.str_opt(t, p, "kind") {
            Some(k) => k,
            None => {
                if !t.contains_key("kind") {
                    self.err("kernel.kind", "missing; expected exponential, gaussian, step, ising, bosonic-chain or tabulated");
                }
                return None;
            }
        };
        let strength = self.f64_or(t, p, "strength", 1.0, Rule::NonNegative);
        let imag_strength = self.f64_or(t, p, "imag_strength", 0.0, Rule::Any);
        let with = |extra: &[&'static str]| common.iter().copied().chain(extra.iter().copied()).collect::<Vec<_>>();
        let mut table = None;
        let params = match kind {
            "exponential" | "gaussian" => {
                self.known(p, t, &with(&["a"]));
                let a = self.f64_req(t, p, "a", Rule::Positive);
                a.map(|a| {
                    if kind == "exponential" {
                        KernelParams::Exponential { a }
                    } else {
                        KernelParams::Gaussian { a }
                    }
                })
            }
            "step" => {
                self.known(p, t, &with(&["width"]));
                let w = match self.int_opt(t, p, "width", 1) {
                    Some(w) if w > u32::MAX as i64 => {
                        self.err("kernel.width", "too large");
                        None
                    }
                    Some(w) => Some(w as u32),
                    None if t.contains_key("width") => None,
                    None => Some(2),
                };
                w.map(|width| KernelParams::Step { width })
            }
            "ising" => {
                self.known(p, t, &with(&["j", "beta", "alpha"]));
                let j = self.f64_req(t, p, "j", Rule::Any);
                let beta = self.f64_req(t, p, "beta", Rule::NonNegative);
                let alpha = self.f64_req(t, p, "alpha", Rule::Positive);
                match (j, beta, alpha) {
                    (Some(j), Some(beta), Some(alpha)) => Some(KernelParams::Ising { j, beta, alpha }),
                    _ => None,
                }
            }
            "bosonic-chain" => {
                self.known(p, t, &with(&["omega0", "g", "beta", "n_modes", "occupation", "dispersion"]));
                let omega0 = self.f64_req(t, p, "omega0", Rule::Any);
                let g = self.f64_req(t, p, "g", Rule::NonZero);
                let beta = self.f64_req(t, p, "beta", Rule::NonNegative);
                let n_modes = match self.int_opt(t, p, "n_modes", 2) {
                    Some(n) if n % 2 != 0 => {
                        self.err("kernel.n_modes", format!("must be even, got {n}"));
                        None
                    }
                    Some(n) => Some(n as usize),
                    None if t.contains_key("n_modes") => None,
                    None => Some(4096),
                };
                let occupation = match self.str_opt(t, p, "occupation") {
                    None | Some("boltzmann") => Some(Occupation::Boltzmann),
                    Some("bose-einstein") => Some(Occupation::BoseEinstein),
                    Some(o) => {
                        self.err("kernel.occupation", format!("unknown `{o}`; expected boltzmann or bose-einstein"));
                        None
                    }
                };
                let dispersion = match self.str_opt(t, p, "dispersion") {
                    None | Some("cosine") => Some(Dispersion::Cosine),
                    Some("linearized") => Some(Dispersion::Linearized),
                    Some(o) => {
                        self.err("kernel.dispersion", format!("unknown `{o}`; expected cosine or linearized"));
                        None
                    }
                };
                match (omega0, g, beta, n_modes, occupation, dispersion) {
                    (Some(omega0), Some(g), Some(beta), Some(n_modes), Some(occupation), Some(dispersion)) => {
                        Some(KernelParams::BosonicChain {
                            omega0,
                            g,
                            beta,
                            n_modes,
                            occupation,
                            dispersion,
                        })
                    }
                    _ => None,
                }
            }
            "tabulated" => {
                self.known(p, t, &with(&["path"]));
                match self.str_opt(t, p, "path") {
                    None => {
                        if !t.contains_key("path") {
                            self.err("kernel.path", "missing");
                        }
                        None
                    }
                    Some(rel) => {
                        let path = base.join(rel);
                        match std::fs::read(&path) {
                            Err(e) => {
                                self.err("kernel.path", format!("cannot read {}: {e}", path.display()));
                                None
                            }
                            Ok(bytes) => match SpectralTable::from_reader(bytes.as_slice()) {
                                Err(e) => {
                                    self.err("kernel.path", e.to_string());
                                    None
                                }
                                Ok(tab) => {
                                    table = Some(tab);
                                    let sha256 = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
                                    Some(KernelParams::Tabulated {
                                        path: PathBuf::from(rel),
                                        sha256,
                                    })
                                }
                            },
                        }
                    }
                }
            }
            other => {
                self.err(
                    "kernel.kind",
                    format!("unknown `{other}`; expected exponential, gaussian, step, ising, bosonic-chain or tabulated"),
                );
                None
            }
        };
        Some(KernelConfig {
            params: params?,
            strength: strength?,
            imag_strength: imag_strength?,
            table,
        })
    }

    fn run(
        &mut self,
        t: &Table,
        system: Option<&SystemConfig>,
        kernel: Option<&KernelConfig>,
        scenario: Option<Scenario>,
    ) -> Option<RunConfig> {
        let p = "run";
        self.known(
            p,
            t,
            &[
                "t_end",
                "n_times",
                "pairs",
                "separations",
                "simulate",
                "omega_q",
                "sizes",
                "grid_size",
                "bound_tol",
                "psd_tol",
                "eps_tol",
                "generator",
                "lamb_shift",
                "initial",
                "coherences",
                "a_values",
                "seed",
            ],
        );
        let n_qubits = system.map(|s| s.n_qubits);
        let dim = n_qubits.map(|n| 1usize << n);
        let mut ok = true;

        let t_end = match self.f64_opt(t, p, "t_end") {
            Some(v) => self.check("run.t_end", v, Rule::Positive).map(Some),
            None => (!t.contains_key("t_end")).then_some(None),
        };
        let n_times = match self.int_opt(t, p, "n_times", 2) {
            Some(n) => Some(n as usize),
            None => (!t.contains_key("n_times")).then_some(401),
        };

        let mut pairs = Vec::new();
        if let Some(a) = self.array(t, p, "pairs") {
            for (i, v) in a.iter().enumerate() {
                let pair = v.as_array().and_then(|x| match x.as_slice() {
                    [Value::Integer(b), Value::Integer(k)] if *b >= 0 && *k >= 0 => Some([*b as usize, *k as usize]),
                    _ => None,
                });
                match pair {
                    Some(pr) if dim.map_or(true, |d| pr[0] < d && pr[1] < d) => pairs.push(pr),
                    Some(pr) => {
                        self.err(&format!("run.pairs[{i}]"), format!("index out of range for dimension {}", dim.unwrap_or(0)));
                        let _ = pr;
                        ok = false;
                    }
                    None => {
                        self.err(&format!("run.pairs[{i}]"), "must be a pair [bra, ket] of non-negative integers");
                        ok = false;
                    }
                }
            }
        } else if let Some(d) = dim {
            pairs.push([0, d - 1]);
        }

        let separations = match self.int_list(t, p, "separations", 0) {
            Some(s) => s,
            None if t.contains_key("separations") => {
                ok = false;
                Vec::new()
            }
            None => vec![1],
        };
        let simulate = self.bool_or(t, p, "simulate", false);
        let omega_q = self.f64_or(t, p, "omega_q", 1.0, Rule::Positive);
        let sizes = match self.int_list(t, p, "sizes", 1) {
            Some(s) => s.into_iter().map(|n| n as usize).collect(),
            None if t.contains_key("sizes") => {
                ok = false;
                Vec::new()
            }
            None => vec![3],
        };
        if sizes.iter().any(|&n| n > 512) {
            self.err("run.sizes", "sizes above 512 are not supported");
            ok = false;
        }
        let grid_size = match self.int_opt(t, p, "grid_size", 1) {
            Some(g) => g as usize,
            None if t.contains_key("grid_size") => {
                ok = false;
                0
            }
            None => DEFAULT_GRID,
        };
        let bound_tol = self.f64_or(t, p, "bound_tol", 1e-9, Rule::Positive);
        let psd_tol = match self.f64_opt(t, p, "psd_tol") {
            Some(v) => self.check("run.psd_tol", v, Rule::NonNegative).map(Some),
            None => (!t.contains_key("psd_tol")).then_some(None),
        };
        let eps_tol = match self.f64_opt(t, p, "eps_tol") {
            Some(v) => self.check("run.eps_tol", v, Rule::Positive).map(Some),
            None => (!t.contains_key("eps_tol")).then_some(None),
        };
        let generator = match self.str_opt(t, p, "generator") {
            None | Some("bloch-redfield") => Some(Generator::BlochRedfield),
            Some("secular") => Some(Generator::Secular),
            Some(g) => {
                self.err("run.generator", format!("unknown `{g}`; expected bloch-redfield or secular"));
                None
            }
        };
        let lamb_shift = self.bool_or(t, p, "lamb_shift", false);

        let initial = match t.get("initial") {
            None => Some(InitialState::MaximallyCoherent),
            Some(Value::String(s)) if s == "maximally-coherent" => Some(InitialState::MaximallyCoherent),
            Some(Value::String(s)) if s == "random-pure" => Some(InitialState::RandomPure),
            Some(Value::Array(a)) => {
                let mut states = Vec::new();
                for (i, v) in a.iter().enumerate() {
                    match v.as_str() {
                        Some(s) if self.bits_ok(&format!("run.initial[{i}]"), s, n_qubits) => states.push(s.to_string()),
                        Some(_) => {}
                        None => self.err(&format!("run.initial[{i}]"), "must be a bitstring"),
                    }
                }
                if states.is_empty() {
                    self.err("run.initial", "needs at least one bitstring");
                }
                (states.len() == a.len() && !states.is_empty()).then_some(InitialState::Superposition(states))
            }
            Some(_) => {
                self.err(
                    "run.initial",
                    "expected \"maximally-coherent\", \"random-pure\" or a list of bitstrings",
                );
                None
            }
        };

        let mut coherences = Vec::new();
        if let Some(a) = self.array(t, p, "coherences") {
            for (i, v) in a.iter().enumerate() {
                let field = format!("run.coherences[{i}]");
                let pair = v.as_array().and_then(|x| match x.as_slice() {
                    [Value::String(b), Value::String(k)] => Some([b.clone(), k.clone()]),
                    _ => None,
                });
                match pair {
                    Some([b, k]) => {
                        let good = self.bits_ok(&field, &b, n_qubits) & self.bits_ok(&field, &k, n_qubits);
                        if good {
                            coherences.push([b, k]);
                        } else {
                            ok = false;
                        }
                    }
                    None => {
                        self.err(&field, "must be a pair [bra, ket] of bitstrings");
                        ok = false;
                    }
                }
            }
        } else if let Some(n) = n_qubits {
            let half = n / 2;
            let bra: String = (0..n).map(|i| if i >= n - half { '1' } else { '0' }).collect();
            let ket: String = (0..n).map(|i| if i < half { '1' } else { '0' }).collect();
            coherences.push([bra, ket]);
            coherences.push(["0".repeat(n), "1".repeat(n)]);
        }

        let a_values = match self.f64_list(t, p, "a_values", Rule::Positive) {
            Some(v) => {
                if !v.is_empty() && kernel.is_some_and(|k| k.with_a(1.0).is_none()) {
                    self.err("run.a_values", "only exponential and gaussian kernels have a decay parameter");
                    ok = false;
                }
                v
            }
            None if t.contains_key("a_values") => {
                ok = false;
                Vec::new()
            }
            None => Vec::new(),
        };
        let seed = match self.int_opt(t, p, "seed", 0) {
            Some(s) => s as u64,
            None if t.contains_key("seed") => {
                ok = false;
                0
            }
            None => 0,
        };

        if scenario == Some(Scenario::Propagate) && pairs.is_empty() && t.contains_key("pairs") {
            self.err("run.pairs", "needs at least one pair");
            ok = false;
        }
        if scenario == Some(Scenario::Scaling) && coherences.is_empty() {
            self.err("run.coherences", "needs at least one [bra, ket] pair");
            ok = false;
        }

        Some(RunConfig {
            t_end: t_end?,
            n_times: n_times?,
            pairs,
            separations,
            simulate,
            omega_q: omega_q?,
            sizes,
            grid_size,
            bound_tol: bound_tol?,
            psd_tol: psd_tol?,
            eps_tol: eps_tol?,
            generator: generator?,
            lamb_shift,
            initial: initial?,
            coherences,
            a_values,
            seed,
        })
        .filter(|_| ok)
    }

    fn bits_ok(&mut self, field: &str, s: &str, n_qubits: Option<usize>) -> bool {
        if bitstring_index(s).is_err() {
            self.err(field, format!("`{s}` is not a bitstring of 0 and 1"));
            return false;
        }
        if let Some(n) = n_qubits {
            if s.len() != n {
                self.err(field, format!("`{s}` has {} bits, system has {n} qubits", s.len()));
                return false;
            }
        }
        true
    }

    fn compatible(&mut self, sc: Scenario, k: &KernelConfig, run: Option<&RunConfig>) {
        let name = k.name();
        match sc {
            Scenario::IsingRates if k.ising().is_none() => {
                self.err("kernel.kind", format!("ising-rates needs an ising kernel, got {name}"))
            }
            Scenario::IsingRates if k.ising().is_some_and(|p| !(p.j > 0.0)) => {
                self.err("kernel.j", "ising-rates uses the ferromagnetic closed form; j must be > 0")
            }
            Scenario::BosonicRates if !k.is_bosonic() => {
                self.err("kernel.kind", format!("bosonic-rates needs a bosonic-chain kernel, got {name}"))
            }
            Scenario::PositivityAudit | Scenario::Scaling if k.phenomenological().is_none() => self.err(
                "kernel.kind",
                format!("{sc} needs an exponential, gaussian or step kernel, got {name}"),
            ),
            Scenario::Propagate if k.is_bosonic() => self.err(
                "kernel.kind",
                "propagate couples Hermitian qubit operators; bosonic-chain kernels are only available in bosonic-rates and two-qubit-rates",
            ),
            Scenario::TwoQubitRates if k.is_bosonic() && run.is_some_and(|r| r.simulate) => self.err(
                "run.simulate",
                "simulated rates are not available for bosonic-chain kernels (analytic B^dagger B channel only)",
            ),
            _ => {}
        }
        if k.strength == 0.0 && matches!(sc, Scenario::Scaling | Scenario::Propagate) {
            self.err("kernel.strength", "must be > 0 for dynamics");
        }
        if let (Some(r), Scenario::PositivityAudit) = (run, sc) {
            if r.sizes.is_empty() {
                self.err("run.sizes", "needs at least one size");
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Rule {
    Any,
    Positive,
    NonNegative,
    NonZero,
}

impl Rule {
    fn describe(self) -> &'static str {
        match self {
            Rule::Any => "a number",
            Rule::Positive => "> 0",
            Rule::NonNegative => ">= 0",
            Rule::NonZero => "nonzero",
        }
    }
}
