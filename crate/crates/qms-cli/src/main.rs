//! Batch front end for the semigroup toolkit: load a model spec, run an
//! analysis, a verification suite, or an asymptotic sweep, and emit a
//! deterministic JSON or CSV report.
//!
//! Exit codes: 0 success, 2 property/invariant violation, 3 input error.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use qms_core::channels::QuantumChannel;
use qms_core::concentration::{self, BernsteinRecord};
use qms_core::entropy;
use qms_core::matcore::{DensityMatrix, MatrixJson, SuperOperator};
use qms_core::sampling;
use qms_core::semigroups::{self, BoundReport, Lindbladian};
use qms_core::zoo::{self, Axis, ClassicalChain, RMat, RVec};
use qms_core::{QmsError, Tolerances};

const CSV_VERSION: &str = "qms-csv v1";

#[derive(Parser)]
#[command(name = "qms", version, about = "Quantum Markov semigroup analysis front end")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one model: gap, CB return time, index, MLSI lower bounds.
    Analyze(CommonArgs),
    /// Run the seeded property-verification suites.
    Verify(CommonArgs),
    /// Sweep a model family over a range and fit log-log asymptotics.
    Sweep(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Model spec: a path to a JSON file or an inline JSON object.
    #[arg(long)]
    model: Option<String>,
    /// CP-sandwich width ε for return-time computations.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// RNG seed for randomized suites.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<String>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Inclusive dimension range "lo:hi" for cyclic/Bernstein sweeps.
    #[arg(long)]
    d_range: Option<String>,
    /// Inclusive size range "lo:hi" for birth–death sweeps.
    #[arg(long)]
    n_range: Option<String>,
    /// Inverse temperature for birth–death models.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Override the PSD slack tolerance.
    #[arg(long)]
    tol_psd: Option<f64>,
    /// Override the bisection relative width.
    #[arg(long)]
    tol_bisect: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

/// The fully resolved run configuration, embedded verbatim in every report.
#[derive(Clone, serde::Serialize)]
struct EffectiveConfig {
    command: String,
    model: Option<serde_json::Value>,
    epsilon: f64,
    seed: u64,
    format: Format,
    d_range: Option<(usize, usize)>,
    n_range: Option<(usize, usize)>,
    beta: f64,
    tol_psd: f64,
    tol_bisect: f64,
    threads: usize,
}

#[derive(serde::Deserialize, serde::Serialize, Clone)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum ModelSpec {
    Depolarizing {
        d: usize,
        #[serde(default)]
        probs: Option<Vec<f64>>,
    },
    CyclicGraph {
        d: usize,
    },
    GraphWalk {
        weights: Vec<Vec<f64>>,
    },
    NcBirthDeath {
        n: usize,
        #[serde(default)]
        beta: Option<f64>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
    Su2Transference {
        two_j: usize,
        axes: Vec<String>,
    },
    CustomGns {
        jumps: Vec<MatrixJson>,
        bohr_weights: Vec<f64>,
        reference: MatrixJson,
    },
    /// Monte Carlo matrix-concentration family — accepted by `sweep` only.
    Bernstein {
        #[serde(default)]
        n: Option<usize>,
        #[serde(default)]
        m_bound: Option<f64>,
        #[serde(default)]
        trials: Option<usize>,
    },
    /// A raw channel payload — accepted by `verify` as a CP/symmetry fixture.
    Channel {
        kind: String,
        dim: usize,
        payload: Vec<MatrixJson>,
        #[serde(default)]
        reference: Option<MatrixJson>,
    },
}

/// A constructed model, ready for analysis on the appropriate path.
enum ModelInstance {
    Quantum { name: String, lind: Lindbladian },
    Classical { name: String, chain: ClassicalChain },
    BirthDeath { name: String, bd: zoo::BirthDeath },
    Channel { channel: QuantumChannel },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = std::env::var("QMS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .is_err()
    {
        // The global pool can only be configured once; keep the default.
    }
    let (name, args) = match &cli.command {
        Command::Analyze(a) => ("analyze", a),
        Command::Verify(a) => ("verify", a),
        Command::Sweep(a) => ("sweep", a),
    };
    match run(name, args, threads) {
        Ok(output) => match write_output(args, &output) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("output error: {e}");
                ExitCode::from(3)
            }
        },
        Err(RunError::Input(msg)) => {
            eprintln!("input error: {msg}");
            ExitCode::from(3)
        }
        Err(RunError::Violation { msg, output }) => {
            eprintln!("property violation: {msg}");
            if let Some(text) = output {
                let _ = write_output(args, &text);
            }
            ExitCode::from(2)
        }
    }
}

enum RunError {
    /// Malformed flags, unreadable files, unparseable or invalid model specs.
    Input(String),
    /// The model parsed but an invariant or verified property failed; a
    /// diagnostic report may still be emitted.
    Violation { msg: String, output: Option<String> },
}

fn run(command: &str, args: &CommonArgs, threads: usize) -> Result<String, RunError> {
    if !(args.epsilon > 0.0 && args.epsilon < 1.0) {
        return Err(RunError::Input("--epsilon must lie in (0,1)".into()));
    }
    let mut tols = Tolerances::default();
    if let Some(p) = args.tol_psd {
        if !(p > 0.0) {
            return Err(RunError::Input("--tol-psd must be positive".into()));
        }
        tols.psd_tol = p;
    }
    if let Some(b) = args.tol_bisect {
        if !(b > 0.0) {
            return Err(RunError::Input("--tol-bisect must be positive".into()));
        }
        tols.bisect_rel = b;
    }
    let spec = args
        .model
        .as_deref()
        .map(load_model_spec)
        .transpose()
        .map_err(RunError::Input)?;
    let config = EffectiveConfig {
        command: command.to_string(),
        model: spec
            .as_ref()
            .map(|s| serde_json::to_value(s).expect("model spec serializes")),
        epsilon: args.epsilon,
        seed: args.seed,
        format: args.format,
        d_range: parse_range(args.d_range.as_deref()).map_err(RunError::Input)?,
        n_range: parse_range(args.n_range.as_deref()).map_err(RunError::Input)?,
        beta: args.beta,
        tol_psd: tols.psd_tol,
        tol_bisect: tols.bisect_rel,
        threads,
    };
    match command {
        "analyze" => cmd_analyze(&config, spec.as_ref(), &tols),
        "verify" => cmd_verify(&config, spec.as_ref(), &tols),
        "sweep" => cmd_sweep(&config, spec.as_ref(), &tols),
        _ => unreachable!(),
    }
}

fn load_model_spec(arg: &str) -> Result<ModelSpec, String> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| format!("cannot read model file {arg}: {e}"))?
    };
    serde_json::from_str(&text).map_err(|e| format!("model spec parse error: {e}"))
}

fn parse_range(arg: Option<&str>) -> Result<Option<(usize, usize)>, String> {
    let Some(text) = arg else { return Ok(None) };
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return Err(format!("range must be \"lo:hi\", got {text:?}"));
    }
    let lo: usize = parts[0]
        .trim()
        .parse()
        .map_err(|_| format!("bad range start {:?}", parts[0]))?;
    let hi: usize = parts[1]
        .trim()
        .parse()
        .map_err(|_| format!("bad range end {:?}", parts[1]))?;
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok(Some((lo, hi)))
}

/// Instantiate a model spec.  Construction failures are input errors.
fn build_model(spec: &ModelSpec, beta_flag: f64, tols: &Tolerances) -> Result<ModelInstance, String> {
    let build = |r: Result<ModelInstance, QmsError>| r.map_err(|e| e.to_string());
    match spec {
        ModelSpec::Depolarizing { d, probs } => build((|| {
            let reference = match probs {
                Some(p) => DensityMatrix::from_probs(p)?,
                None => DensityMatrix::maximally_mixed(*d),
            };
            if reference.dim() != *d {
                return Err(QmsError::SpecParseError(
                    "probs length must equal d".into(),
                ));
            }
            Ok(ModelInstance::Quantum {
                name: format!("depolarizing_d{d}"),
                lind: zoo::depolarizing(&reference, tols)?,
            })
        })()),
        ModelSpec::CyclicGraph { d } => build((|| {
            Ok(ModelInstance::Classical {
                name: format!("cyclic_d{d}"),
                chain: zoo::cyclic_laplacian(*d)?,
            })
        })()),
        ModelSpec::GraphWalk { weights } => build((|| {
            Ok(ModelInstance::Classical {
                name: format!("graph_walk_n{}", weights.len()),
                chain: graph_walk_chain(weights)?,
            })
        })()),
        ModelSpec::NcBirthDeath { n, beta, weights } => build((|| {
            let beta = beta.unwrap_or(beta_flag);
            Ok(ModelInstance::BirthDeath {
                name: format!("birth_death_n{n}"),
                bd: zoo::nc_birth_death(*n, beta, weights.as_deref())?,
            })
        })()),
        ModelSpec::Su2Transference { two_j, axes } => build((|| {
            let axes: Vec<Axis> = axes
                .iter()
                .map(|a| match a.to_ascii_lowercase().as_str() {
                    "x" => Ok(Axis::X),
                    "y" => Ok(Axis::Y),
                    "z" => Ok(Axis::Z),
                    other => Err(QmsError::SpecParseError(format!("unknown axis {other:?}"))),
                })
                .collect::<Result<_, _>>()?;
            Ok(ModelInstance::Quantum {
                name: format!("su2_twoj{two_j}"),
                lind: zoo::su2_transference(*two_j, &axes, tols)?,
            })
        })()),
        ModelSpec::CustomGns {
            jumps,
            bohr_weights,
            reference,
        } => build((|| {
            let jumps: Vec<_> = jumps.iter().map(|j| j.to_mat()).collect::<Result<_, _>>()?;
            let reference = DensityMatrix::new(reference.to_mat()?, tols)?;
            Ok(ModelInstance::Quantum {
                name: format!("custom_gns_d{}", reference.dim()),
                lind: semigroups::lindbladian_gns(&jumps, bohr_weights, &reference, tols)?,
            })
        })()),
        ModelSpec::Bernstein { .. } => Err(
            "the bernstein family is a sweep-only model (use `qms sweep`)".into(),
        ),
        ModelSpec::Channel {
            kind,
            dim,
            payload,
            reference,
        } => build((|| {
            let reference = reference
                .as_ref()
                .map(|r| DensityMatrix::new(r.to_mat()?, tols))
                .transpose()?;
            let channel = match kind.as_str() {
                "superop" => {
                    if payload.len() != 1 {
                        return Err(QmsError::SpecParseError(
                            "superop payload must hold exactly one matrix".into(),
                        ));
                    }
                    let s = SuperOperator::from_matrix(*dim, payload[0].to_mat()?)?;
                    QuantumChannel::from_superop(s, reference, tols)?
                }
                "kraus" => {
                    let kraus: Vec<_> =
                        payload.iter().map(|m| m.to_mat()).collect::<Result<_, _>>()?;
                    QuantumChannel::from_kraus(
                        &kraus,
                        qms_core::channels::KrausDirection::Heisenberg,
                        reference,
                        tols,
                    )?
                }
                other => {
                    return Err(QmsError::SpecParseError(format!(
                        "unknown channel kind {other:?}"
                    )))
                }
            };
            Ok(ModelInstance::Channel { channel })
        })()),
    }
}

/// Random walk on a weighted graph: `K(u,v) = w(u,v)/deg(u)`, stationary
/// `μ(u) ∝ deg(u)`, generator `L = I − K` (reversible by construction).
fn graph_walk_chain(weights: &[Vec<f64>]) -> Result<ClassicalChain, QmsError> {
    let n = weights.len();
    if n < 2 || weights.iter().any(|row| row.len() != n) {
        return Err(QmsError::SpecParseError(
            "weights must be a square matrix of size ≥ 2".into(),
        ));
    }
    for u in 0..n {
        for v in 0..n {
            if weights[u][v] < 0.0 || (weights[u][v] - weights[v][u]).abs() > 1e-12 {
                return Err(QmsError::SpecParseError(
                    "weights must be symmetric and nonnegative".into(),
                ));
            }
        }
    }
    let deg: Vec<f64> = (0..n).map(|u| weights[u].iter().sum()).collect();
    if deg.iter().any(|&d| d <= 0.0) {
        return Err(QmsError::SpecParseError(
            "every vertex needs positive total weight".into(),
        ));
    }
    let total: f64 = deg.iter().sum();
    let gen = RMat::from_fn(n, n, |u, v| {
        let k = weights[u][v] / deg[u];
        if u == v {
            1.0 - k
        } else {
            -k
        }
    });
    let mu = RVec::from_iterator(n, deg.iter().map(|&d| d / total));
    ClassicalChain::new(gen, mu)
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

fn cmd_analyze(
    config: &EffectiveConfig,
    spec: Option<&ModelSpec>,
    tols: &Tolerances,
) -> Result<String, RunError> {
    let Some(spec) = spec else {
        return Err(RunError::Input("analyze requires --model".into()));
    };
    let inst = build_model(spec, config.beta, tols).map_err(RunError::Input)?;
    let report = analyze_instance(&inst, config.epsilon, tols).map_err(|e| RunError::Violation {
        msg: e.to_string(),
        output: None,
    })?;
    if !report.decay_pass {
        let text = render_reports(config, std::slice::from_ref(&report), None, config.format);
        return Err(RunError::Violation {
            msg: format!("decay check failed for {}: {}", report.model, report.diagnostics),
            output: Some(text),
        });
    }
    Ok(render_reports(config, std::slice::from_ref(&report), None, config.format))
}

fn analyze_instance(
    inst: &ModelInstance,
    eps: f64,
    tols: &Tolerances,
) -> Result<BoundReport, QmsError> {
    match inst {
        ModelInstance::Quantum { name, lind } => {
            semigroups::mlsi_lower_bounds(lind, name, tols)
        }
        ModelInstance::Classical { name, chain } => classical_report(name, chain, eps, tols),
        ModelInstance::BirthDeath { name, bd } => {
            // Dense machinery for small chains; the structured Choi
            // decomposition beyond that.
            if bd.n <= 6 {
                semigroups::mlsi_lower_bounds(&bd.lindbladian(tols)?, name, tols)
            } else {
                birth_death_report(name, bd, eps, tols)
            }
        }
        ModelInstance::Channel { .. } => Err(QmsError::PreconditionFailed(
            "channel specs are fixtures for `verify`; analyze needs a generator model".into(),
        )),
    }
}

/// BoundReport for a reversible classical chain: `t_cb` via the exact
/// `L₁→L_∞` distance, `C_cb = ‖μ^{-1}‖_∞` (the commutative index).
fn classical_report(
    name: &str,
    chain: &ClassicalChain,
    eps: f64,
    tols: &Tolerances,
) -> Result<BoundReport, QmsError> {
    let lambda = chain.spectral_gap(tols)?;
    let t_eps = zoo::classical_mixing_time(chain, eps, tols)?;
    let t01 = if (eps - 0.1).abs() < 1e-15 {
        t_eps
    } else {
        zoo::classical_mixing_time(chain, 0.1, tols)?
    };
    let c_cb = chain.stationary.iter().map(|&m| 1.0 / m).fold(0.0, f64::max);
    finish_fast_path_report(name, chain.n, lambda, t_eps, t01, c_cb, eps, true, |t| {
        chain.linf_distance(t)
    })
}

/// BoundReport for a birth–death chain via the structured Choi fast path:
/// gap from the classical block and the off-diagonal `γ` spectrum, decay
/// from the diagonal/off-diagonal decomposition norms.
fn birth_death_report(
    name: &str,
    bd: &zoo::BirthDeath,
    eps: f64,
    tols: &Tolerances,
) -> Result<BoundReport, QmsError> {
    let n = bd.n;
    let chain = ClassicalChain::new(bd.classical_block(), RVec::from_vec(bd.mu.clone()))?;
    let mut lambda = chain.spectral_gap(tols)?;
    for r in 0..n {
        for s in 0..n {
            if r != s {
                lambda = lambda.min(bd.gamma(r, s));
            }
        }
    }
    let t_eps = zoo::bd_tcb_structured(bd, eps, tols)?;
    let t01 = if (eps - 0.1).abs() < 1e-15 {
        t_eps
    } else {
        zoo::bd_tcb_structured(bd, 0.1, tols)?
    };
    // Index of the ergodic expectation onto C·I of M_n: the Choi condition
    // c·diag(μ)⊗I ⪰ |Ω⟩⟨Ω| reduces by a rank-one Schur complement to
    // c ≥ Σ_j 1/μ_j (the trace expectation's d² as the uniform special case).
    let c_cb = bd.mu.iter().map(|&m| 1.0 / m).sum();
    // The decomposition norms upper-bound the distance to equilibrium but
    // are not tight at t_cb, so only their monotone decrease is asserted.
    finish_fast_path_report(name, n, lambda, t_eps, t01, c_cb, eps, false, |t| {
        let (diag, offdiag, _) = zoo::bd_decomposition_bound(bd, t)?;
        Ok(diag.max(offdiag))
    })
}

/// Shared tail of the classical-path reports: bounds, the return-time/index
/// consistency inequality, and a monotone-decay spot check of the supplied
/// distance function.
#[allow(clippy::too_many_arguments)]
fn finish_fast_path_report(
    name: &str,
    d: usize,
    lambda: f64,
    t_eps: f64,
    t01: f64,
    c_cb: f64,
    eps: f64,
    distance_is_exact: bool,
    distance: impl Fn(f64) -> Result<f64, QmsError>,
) -> Result<BoundReport, QmsError> {
    if t01 > (10.0 * c_cb).ln() / lambda + 1e-6 {
        return Err(QmsError::PreconditionFailed(format!(
            "t_cb consistency violated: t_cb = {t01} > ln(10 C_cb)/λ = {}",
            (10.0 * c_cb).ln() / lambda
        )));
    }
    let bound_tcb = 1.0 / (2.0 * t01);
    let bound_index = lambda / (2.0 * (10.0 * c_cb).ln());
    let best_lower = bound_tcb.max(bound_index);
    if best_lower > lambda + 1e-9 {
        return Err(QmsError::PreconditionFailed(format!(
            "ordering chain violated: best lower bound {best_lower} exceeds gap {lambda}"
        )));
    }
    let mut decay_pass = true;
    let mut prev = f64::INFINITY;
    for k in 1..=8 {
        let m = distance(k as f64 * t_eps / 2.0)?;
        if m > prev + 1e-9 {
            decay_pass = false;
        }
        if distance_is_exact && k >= 2 && m > eps * (1.0 + 1e-6) {
            // By t ≥ t_cb the exact distance must sit at or below ε.
            decay_pass = false;
        }
        prev = m;
    }
    Ok(BoundReport {
        model: name.to_string(),
        d,
        lambda,
        t_cb: t_eps,
        k_cb_of_snapshot: None,
        c_cb,
        bound_tcb,
        bound_index,
        best_lower,
        decay_pass,
        diagnostics: String::new(),
    })
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(serde::Serialize)]
struct PropertyResult {
    property: String,
    trials: usize,
    pass: bool,
    worst_slack: f64,
}

#[derive(serde::Serialize)]
struct VerifySummary<'a> {
    config: &'a EffectiveConfig,
    properties: Vec<PropertyResult>,
    all_pass: bool,
}

fn cmd_verify(
    config: &EffectiveConfig,
    spec: Option<&ModelSpec>,
    tols: &Tolerances,
) -> Result<String, RunError> {
    let mut properties = verify_suites(config.seed, tols).map_err(|e| RunError::Violation {
        msg: e.to_string(),
        output: None,
    })?;
    if let Some(spec) = spec {
        let inst = build_model(spec, config.beta, tols).map_err(RunError::Input)?;
        properties.push(verify_model_fixture(&inst, tols));
    }
    let all_pass = properties.iter().all(|p| p.pass);
    let summary = VerifySummary {
        config,
        properties,
        all_pass,
    };
    let text = match config.format {
        Format::Json => to_json(&summary),
        Format::Csv => {
            let mut out = csv_header(config);
            out.push_str("property,trials,pass,worst_slack\n");
            for p in &summary.properties {
                out.push_str(&format!(
                    "{},{},{},{:.12e}\n",
                    p.property, p.trials, p.pass, p.worst_slack
                ));
            }
            out
        }
    };
    if all_pass {
        Ok(text)
    } else {
        let failed: Vec<&str> = summary
            .properties
            .iter()
            .filter(|p| !p.pass)
            .map(|p| p.property.as_str())
            .collect();
        Err(RunError::Violation {
            msg: format!("failed properties: {}", failed.join(", ")),
            output: Some(text),
        })
    }
}

/// CP/unital/symmetry verification of a user-supplied fixture.  A channel
/// payload is judged on its computed flags, so a non-CP map fails cleanly.
fn verify_model_fixture(inst: &ModelInstance, tols: &Tolerances) -> PropertyResult {
    match inst {
        ModelInstance::Channel { channel, .. } => PropertyResult {
            property: "model_cp_unital_symmetric".into(),
            trials: 1,
            pass: channel.cp_verified && channel.unital_verified && channel.gns_verified,
            worst_slack: 0.0,
        },
        ModelInstance::Quantum { lind, .. } => {
            // Constructor invariants already passed; re-check the semigroup
            // at a sampled time.
            let pass = semigroups::evolve(lind, 0.1, tols)
                .map(|c| c.cp_verified && c.unital_verified && c.gns_verified)
                .unwrap_or(false);
            PropertyResult {
                property: "model_semigroup_cp".into(),
                trials: 1,
                pass,
                worst_slack: 0.0,
            }
        }
        ModelInstance::Classical { chain, .. } => PropertyResult {
            property: "model_chain_reversible".into(),
            trials: 1,
            pass: chain.spectral_gap(tols).is_ok(),
            worst_slack: 0.0,
        },
        ModelInstance::BirthDeath { bd, .. } => PropertyResult {
            property: "model_birth_death_invariants".into(),
            trials: 1,
            pass: bd.lindbladian(tols).is_ok(),
            worst_slack: 0.0,
        },
    }
}

/// The built-in property suites, each reporting its worst-case slack
/// (how far the tightest sampled instance sat from violating the bound;
/// negative values mean a violation).
fn verify_suites(seed: u64, tols: &Tolerances) -> Result<Vec<PropertyResult>, QmsError> {
    let mut out = Vec::new();
    let mut rng = sampling::rng(seed);

    // Random GNS models reused across the semigroup suites.
    let mut models = Vec::new();
    for k in 0..3u64 {
        use rand::Rng;
        let d = rng.gen_range(2..=4usize);
        let probs = sampling::random_probs(&mut rng, d);
        models.push(zoo::random_gns_lindbladian(d, d, &probs, seed ^ (k + 1), tols)?);
    }

    // Semigroup CP/unital/GNS at sampled times.
    {
        let mut pass = true;
        let mut trials = 0;
        for l in &models {
            for &t in &[0.1, 0.7] {
                let c = semigroups::evolve(l, t, tols)?;
                pass &= c.cp_verified && c.unital_verified && c.gns_verified;
                trials += 1;
            }
        }
        out.push(PropertyResult {
            property: "semigroup_cp_unital_gns".into(),
            trials,
            pass,
            worst_slack: 0.0,
        });
    }

    // Poincaré inequality on random observables.
    {
        let mut worst = f64::INFINITY;
        let mut trials = 0;
        for l in &models {
            let e = semigroups::fixed_point_expectation(l, tols)?;
            for _ in 0..20 {
                let x = sampling::random_hermitian(&mut rng, l.dim);
                let (lhs, rhs) = semigroups::poincare_check(l, &e, &x, tols)?;
                worst = worst.min(rhs - lhs);
                trials += 1;
            }
        }
        out.push(PropertyResult {
            property: "poincare".into(),
            trials,
            pass: worst >= -1e-9,
            worst_slack: worst,
        });
    }

    // Entropy contraction for trace-symmetric channels.
    {
        let mut worst = f64::INFINITY;
        let mut trials = 0;
        for _ in 0..10 {
            use rand::Rng;
            let d = rng.gen_range(2..=4usize);
            let s = sampling::random_trace_symmetric(&mut rng, d, d);
            let phi = QuantumChannel::from_superop(s, None, tols)?;
            let e = qms_core::channels::multiplicative_domain(&phi, tols)?;
            let k = qms_core::channels::k_cb(&phi, &e, 0.1, 400, tols)?;
            for _ in 0..2 {
                let rho = sampling::random_density(&mut rng, d);
                let chk = qms_core::channels::entropy_contraction_check(&phi, &e, k, &rho, tols)?;
                worst = worst.min(chk.rhs - chk.lhs);
                trials += 1;
            }
        }
        out.push(PropertyResult {
            property: "entropy_contraction".into(),
            trials,
            pass: worst >= -1e-9,
            worst_slack: worst,
        });
    }

    // Lipschitz seminorm triangle inequality.
    {
        let mut worst = f64::INFINITY;
        let mut trials = 0;
        for l in &models {
            for _ in 0..15 {
                let x = sampling::random_hermitian(&mut rng, l.dim);
                let y = sampling::random_hermitian(&mut rng, l.dim);
                let lx = semigroups::lipschitz_seminorm(l, &x);
                let ly = semigroups::lipschitz_seminorm(l, &y);
                let lxy = semigroups::lipschitz_seminorm(l, &(&x + &y));
                worst = worst.min(lx + ly - lxy);
                trials += 1;
            }
        }
        out.push(PropertyResult {
            property: "lipschitz_triangle".into(),
            trials,
            pass: worst >= -1e-9,
            worst_slack: worst,
        });
    }

    // Relative entropy against its BKM integral representation.
    {
        let mut worst = f64::INFINITY;
        let mut trials = 0;
        for _ in 0..10 {
            use rand::Rng;
            let d = rng.gen_range(2..=4usize);
            let rho = sampling::random_faithful_density(&mut rng, d);
            let sigma = sampling::random_faithful_density(&mut rng, d);
            let direct = entropy::relative_entropy(&rho, &sigma, tols)?;
            let via = entropy::relative_entropy_via_bkm(&rho, &sigma, &entropy::QuadratureSpec::default(), tols)?;
            worst = worst.min(1e-6 - (direct - via).abs() / direct.abs().max(1e-12));
            trials += 1;
        }
        out.push(PropertyResult {
            property: "bkm_identity".into(),
            trials,
            pass: worst >= 0.0,
            worst_slack: worst,
        });
    }

    // Closed-form value k(2) = 2 ln 2 − 1.
    {
        let k2 = entropy::k_of_c(2.0)?;
        let slack = 1e-12 - (k2 - (2.0 * (2.0_f64).ln() - 1.0)).abs();
        out.push(PropertyResult {
            property: "k_constant".into(),
            trials: 1,
            pass: slack >= 0.0,
            worst_slack: slack,
        });
    }

    // Entropy decay trajectories at rate 1/t_cb.
    {
        let mut pass = true;
        let mut trials = 0;
        for l in &models {
            for _ in 0..2 {
                let rho = sampling::random_density(&mut rng, l.dim);
                let times: Vec<f64> = (1..=4).map(|k| 0.4 * k as f64).collect();
                let rec = semigroups::decay_check(l, &rho, &times, tols)?;
                pass &= rec.pass;
                trials += 1;
            }
        }
        out.push(PropertyResult {
            property: "entropy_decay".into(),
            trials,
            pass,
            worst_slack: 0.0,
        });
    }

    Ok(out)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(serde::Serialize)]
struct FitRecord {
    slope: f64,
    stderr: f64,
}

fn fit_loglog(xs: &[f64], ys: &[f64]) -> FitRecord {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| {
            let r = b - (slope * a + intercept);
            r * r
        })
        .sum();
    let stderr = if xs.len() > 2 {
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    FitRecord { slope, stderr }
}

fn cmd_sweep(
    config: &EffectiveConfig,
    spec: Option<&ModelSpec>,
    tols: &Tolerances,
) -> Result<String, RunError> {
    let Some(spec) = spec else {
        return Err(RunError::Input("sweep requires --model".into()));
    };
    match spec {
        ModelSpec::CyclicGraph { .. } => {
            let (lo, hi) = config.d_range.unwrap_or((5, 41));
            let points: Vec<usize> = (lo..=hi).filter(|d| d % 2 == 1 && *d >= 3).collect();
            if points.is_empty() {
                return Err(RunError::Input(format!(
                    "no odd d ≥ 3 in sweep range {lo}:{hi}"
                )));
            }
            let rows: Vec<BoundReport> = points
                .par_iter()
                .map(|&d| {
                    let chain = zoo::cyclic_laplacian(d)?;
                    classical_report(&format!("cyclic_d{d}"), &chain, config.epsilon, tols)
                })
                .collect::<Result<_, QmsError>>()
                .map_err(|e| RunError::Violation {
                    msg: e.to_string(),
                    output: None,
                })?;
            let xs: Vec<f64> = points.iter().map(|&d| d as f64).collect();
            let ys: Vec<f64> = rows.iter().map(|r| r.t_cb).collect();
            Ok(render_reports(config, &rows, Some(fit_loglog(&xs, &ys)), config.format))
        }
        ModelSpec::NcBirthDeath { beta, weights, .. } => {
            if weights.is_some() {
                return Err(RunError::Input(
                    "birth–death sweeps use unit edge weights; omit \"weights\"".into(),
                ));
            }
            let (lo, hi) = config.n_range.unwrap_or((4, 20));
            let points: Vec<usize> = (lo.max(2)..=hi).collect();
            if points.is_empty() {
                return Err(RunError::Input(format!("empty sweep range {lo}:{hi}")));
            }
            let beta = beta.unwrap_or(config.beta);
            let rows: Vec<BoundReport> = points
                .par_iter()
                .map(|&n| {
                    let bd = zoo::nc_birth_death(n, beta, None)?;
                    birth_death_report(&format!("birth_death_n{n}"), &bd, config.epsilon, tols)
                })
                .collect::<Result<_, QmsError>>()
                .map_err(|e| RunError::Violation {
                    msg: e.to_string(),
                    output: None,
                })?;
            let xs: Vec<f64> = points.iter().map(|&n| n as f64).collect();
            let ys: Vec<f64> = rows.iter().map(|r| r.t_cb).collect();
            Ok(render_reports(config, &rows, Some(fit_loglog(&xs, &ys)), config.format))
        }
        ModelSpec::Bernstein {
            n,
            m_bound,
            trials,
        } => {
            let (lo, hi) = config.d_range.unwrap_or((2, 64));
            let points: Vec<usize> = (1..=16)
                .map(|k| 1usize << k)
                .filter(|d| (lo..=hi).contains(d))
                .collect();
            if points.is_empty() {
                return Err(RunError::Input(format!(
                    "no power-of-two d in sweep range {lo}:{hi}"
                )));
            }
            let n = n.unwrap_or(50);
            let m_bound = m_bound.unwrap_or(1.0);
            let trials = trials.unwrap_or(200);
            let rows: Vec<BernsteinRecord> = points
                .par_iter()
                .map(|&d| concentration::matrix_bernstein_mc(d, n, m_bound, trials, config.seed))
                .collect::<Result<_, QmsError>>()
                .map_err(|e| RunError::Violation {
                    msg: e.to_string(),
                    output: None,
                })?;
            let xs: Vec<f64> = points.iter().map(|&d| d as f64).collect();
            let ys: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
            let fit = fit_loglog(&xs, &ys);
            Ok(render_bernstein(config, &rows, fit, config.format))
        }
        _ => Err(RunError::Input(
            "sweep supports the cyclic_graph, nc_birth_death, and bernstein families".into(),
        )),
    }
}

fn render_bernstein(
    config: &EffectiveConfig,
    rows: &[BernsteinRecord],
    fit: FitRecord,
    format: Format,
) -> String {
    match format {
        Format::Json => {
            #[derive(serde::Serialize)]
            struct Out<'a> {
                config: &'a EffectiveConfig,
                reports: &'a [BernsteinRecord],
                fit: FitRecord,
            }
            to_json(&Out {
                config,
                reports: rows,
                fit,
            })
        }
        Format::Csv => {
            let mut out = csv_header(config);
            out.push_str(&format!(
                "# fit: slope={:.12e} stderr={:.12e}\n",
                fit.slope, fit.stderr
            ));
            out.push_str(BernsteinRecord::CSV_COLUMNS);
            out.push('\n');
            for r in rows {
                out.push_str(&r.csv_row());
                out.push('\n');
            }
            out
        }
    }
}

// ---------------------------------------------------------------------------
// output
// ---------------------------------------------------------------------------

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

fn csv_header(config: &EffectiveConfig) -> String {
    format!(
        "# {CSV_VERSION}\n# config: {}\n",
        serde_json::to_string(config).expect("config serializes")
    )
}

fn render_reports(
    config: &EffectiveConfig,
    rows: &[BoundReport],
    fit: Option<FitRecord>,
    format: Format,
) -> String {
    match format {
        Format::Json => {
            #[derive(serde::Serialize)]
            struct Out<'a> {
                config: &'a EffectiveConfig,
                reports: &'a [BoundReport],
                #[serde(skip_serializing_if = "Option::is_none")]
                fit: Option<FitRecord>,
            }
            to_json(&Out {
                config,
                reports: rows,
                fit,
            })
        }
        Format::Csv => {
            let mut out = csv_header(config);
            if let Some(f) = &fit {
                out.push_str(&format!(
                    "# fit: slope={:.12e} stderr={:.12e}\n",
                    f.slope, f.stderr
                ));
            }
            out.push_str(&BoundReport::CSV_COLUMNS.join(","));
            out.push('\n');
            for r in rows {
                out.push_str(&r.csv_row().join(","));
                out.push('\n');
            }
            out
        }
    }
}

fn write_output(args: &CommonArgs, text: &str) -> Result<(), String> {
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {path}: {e}")),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
