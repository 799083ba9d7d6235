//! `testvector`: construct the minimal-type section for an inducing weight,
//! evaluate the twisted functional (closed form, quadrature, Monte-Carlo),
//! and run the verification suites.
//!
//! Output contract: one JSON envelope per run on stdout,
//! `{"config": ..., "meta": {"command", "unix_ms", "version"}, "result": ...}`;
//! diagnostics go to stderr. Exit codes: 0 success, 1 a verification claim
//! failed, 2 invalid input. Runs are deterministic for a fixed config
//! (including across `TESTVECTOR_THREADS` settings) except for `meta.unix_ms`.

mod config;

use clap::{Parser, Subcommand, ValueEnum};
use config::{ConfigError, RunConfig};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};
use testvector_core::spectral_params::modular_symbol_dimension;
use testvector_core::{
    build_phi, haar_sample_k, haar_suite, hecke_integral, iwasawa_suite, l_factor_pi,
    lambda_exact, lambda_montecarlo, run_all, weyl_dimension, weyl_element, Combo,
    LFactorError, LinearFunctionalError, SpectralError, SuiteReport, TestVectorError,
    TestVectorSection, VerifierError,
};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    TestVector(#[from] TestVectorError),
    #[error(transparent)]
    LFactor(#[from] LFactorError),
    #[error(transparent)]
    Functional(#[from] LinearFunctionalError),
    #[error(transparent)]
    Verifier(#[from] VerifierError),
    #[error("TESTVECTOR_THREADS must be a positive integer, got {0:?}")]
    BadThreads(String),
    #[error("could not initialize the thread pool: {0}")]
    ThreadPool(String),
    #[error("could not encode output: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Parser)]
#[command(
    name = "testvector",
    version,
    about = "Minimal-type test vectors and the twisted functional: construction, evaluation, verification"
)]
struct Cli {
    /// Key=value config file; individual flags override file values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Inducing integer weight, comma-separated, even length (e.g. 2,1,1,0).
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    nu: Option<Vec<i64>>,
    /// Sign exponent of the twisting character.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(0..=1))]
    chi_sign: Option<u8>,
    /// Real part of the character power.
    #[arg(long, global = true, allow_hyphen_values = true)]
    chi_power_re: Option<f64>,
    /// Imaginary part of the character power.
    #[arg(long, global = true, allow_hyphen_values = true)]
    chi_power_im: Option<f64>,
    /// Real part of the evaluation point.
    #[arg(long, global = true, allow_hyphen_values = true)]
    s_re: Option<f64>,
    /// Imaginary part of the evaluation point.
    #[arg(long, global = true, allow_hyphen_values = true)]
    s_im: Option<f64>,
    /// Monte-Carlo sample count.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Seed for every pseudo-random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trapezoid nodes for the block integrals.
    #[arg(long, global = true)]
    quad_nodes: Option<usize>,
    /// Print the merged configuration as canonical key=value lines and exit.
    #[arg(long, global = true)]
    emit_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalPoint {
    /// The interleaving base point.
    Base,
    /// A seeded Haar draw.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteChoice {
    All,
    Torus,
    Hw,
    Rank,
    Iwasawa,
    Haar,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the inducing weight and report the derived parameters.
    Params,
    /// Build the scalar minimal-type function and report its shape.
    Construct,
    /// Evaluate all sign components of the section at a point.
    Eval {
        /// Where to evaluate.
        #[arg(long, value_enum, default_value_t = EvalPoint::Base)]
        at: EvalPoint,
    },
    /// The gamma-factor product at the evaluation point.
    Lfactor,
    /// Per-block ray integrals (quadrature) and their combined product.
    Integrate,
    /// Monte-Carlo evaluation of the functional against the closed form.
    Sample,
    /// Run verification suites.
    Verify {
        /// Which suites to run; `torus` covers the base-pattern, torus,
        /// component, and right-block reports.
        #[arg(long, value_enum, default_value_t = SuiteChoice::All)]
        suite: SuiteChoice,
    },
    /// Everything: parameters, construction, suites, functional values.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Params => "params",
            Command::Construct => "construct",
            Command::Eval { .. } => "eval",
            Command::Lfactor => "lfactor",
            Command::Integrate => "integrate",
            Command::Sample => "sample",
            Command::Verify { .. } => "verify",
            Command::Report => "report",
        }
    }
}

fn c64_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn merged_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(nu) = &cli.nu {
        cfg.nu = nu.clone();
    }
    if let Some(v) = cli.chi_sign {
        cfg.chi_sign = v;
    }
    if let Some(v) = cli.chi_power_re {
        cfg.chi_power_re = v;
    }
    if let Some(v) = cli.chi_power_im {
        cfg.chi_power_im = v;
    }
    if let Some(v) = cli.s_re {
        cfg.s_re = v;
    }
    if let Some(v) = cli.s_im {
        cfg.s_im = v;
    }
    if let Some(v) = cli.samples {
        cfg.samples = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.quad_nodes {
        cfg.quad_nodes = v;
    }
    Ok(cfg)
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(raw) = std::env::var("TESTVECTOR_THREADS") {
        let threads: usize = raw
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| CliError::BadThreads(raw.clone()))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::ThreadPool(e.to_string()))?;
        eprintln!("testvector: using {threads} worker thread(s)");
    }
    Ok(())
}

/// Suites kept for each `--suite` choice; `None` means params-independent
/// suites only.
fn suite_filter(choice: SuiteChoice) -> Option<&'static [&'static str]> {
    match choice {
        SuiteChoice::All => Some(&[
            "base_pattern",
            "torus",
            "component",
            "right_blocks",
            "highest_weight",
            "dimension",
        ]),
        SuiteChoice::Torus => Some(&["base_pattern", "torus", "component", "right_blocks"]),
        SuiteChoice::Hw => Some(&["highest_weight"]),
        SuiteChoice::Rank => Some(&["dimension"]),
        SuiteChoice::Iwasawa | SuiteChoice::Haar => None,
    }
}

fn run_verify(cfg: &RunConfig, choice: SuiteChoice) -> Result<(Value, bool), CliError> {
    let mut reports: Vec<SuiteReport> = Vec::new();
    if let Some(keep) = suite_filter(choice) {
        let p = cfg.params()?;
        reports.extend(
            run_all(&p, cfg.chi_sign, cfg.seed)?
                .into_iter()
                .filter(|r| keep.contains(&r.suite.as_str())),
        );
    }
    if matches!(choice, SuiteChoice::All | SuiteChoice::Iwasawa) {
        let shapes: Vec<(usize, usize)> =
            (1..=3).flat_map(|a| (1..=3).map(move |b| (a, b))).collect();
        reports.push(iwasawa_suite(&shapes, 1112, cfg.seed));
    }
    if matches!(choice, SuiteChoice::All | SuiteChoice::Haar) {
        let n = cfg.params().map(|p| p.n).unwrap_or(1);
        let mut dims = vec![n.max(2), 2 * n];
        dims.dedup();
        for dim in dims {
            reports.extend(haar_suite(dim, 2000, cfg.seed));
        }
    }
    let all_pass = reports.iter().all(|r| r.pass);
    for r in reports.iter().filter(|r| !r.pass) {
        eprintln!(
            "testvector: suite {} FAILED (deviation {:.3e} vs tolerance {:.3e})",
            r.suite, r.max_deviation, r.tolerance
        );
    }
    Ok((json!({ "reports": reports, "all_pass": all_pass }), all_pass))
}

fn dispatch(command: &Command, cfg: &RunConfig) -> Result<(Value, bool), CliError> {
    match command {
        Command::Params => {
            let p = cfg.params()?;
            let (omega, omega_pi) = p.central_characters();
            let result = json!({
                "params": p,
                "omega": omega,
                "omega_pi": omega_pi,
                "modular_symbol_dimension": modular_symbol_dimension(p.n as u64),
            });
            Ok((result, true))
        }
        Command::Construct => {
            let p = cfg.params()?;
            let phi = build_phi(&p, cfg.chi_sign)?;
            let dim = weyl_dimension(&p.weights).ok();
            Ok((json!({ "phi": phi, "span_dimension": dim }), true))
        }
        Command::Eval { at } => {
            let p = cfg.params()?;
            let phi = build_phi(&p, cfg.chi_sign)?;
            let section = TestVectorSection::expand(phi.clone(), cfg.chi_sign);
            let (label, point) = match at {
                EvalPoint::Base => ("base", weyl_element(p.n)),
                EvalPoint::Random => (
                    "random",
                    haar_sample_k(p.n, &mut ChaCha8Rng::seed_from_u64(cfg.seed)),
                ),
            };
            let components: Vec<Value> = testvector_core::sign_patterns(p.n)
                .iter()
                .map(|eta| {
                    let v = section.component(eta, &point)?;
                    Ok(json!({ "pattern": eta, "value": c64_json(v) }))
                })
                .collect::<Result<_, TestVectorError>>()?;
            let result = json!({
                "at": label,
                "phi": c64_json(phi.eval(&point)),
                "components": components,
            });
            Ok((result, true))
        }
        Command::Lfactor => {
            let p = cfg.params()?;
            let lf = l_factor_pi(&p, &cfg.chi(), cfg.s())?;
            Ok((json!({ "l_factor": lf }), true))
        }
        Command::Integrate => {
            let p = cfg.params()?;
            let (chi, s, quad) = (cfg.chi(), cfg.s(), cfg.quad());
            let mut blocks = Vec::new();
            let mut product = Complex64::new(1.0, 0.0);
            for &k in &p.l {
                let plus = hecke_integral(k, p.m, &chi, s, Combo::Plus, &quad)?;
                let minus = hecke_integral(k, p.m, &chi, s, Combo::Minus, &quad)?;
                let symmetrized = hecke_integral(k, p.m, &chi, s, Combo::Symmetrized, &quad)?;
                product *= symmetrized;
                blocks.push(json!({
                    "k": k,
                    "plus": c64_json(plus),
                    "minus": c64_json(minus),
                    "symmetrized": c64_json(symmetrized),
                }));
            }
            Ok((
                json!({ "blocks": blocks, "product_symmetrized": c64_json(product) }),
                true,
            ))
        }
        Command::Sample => {
            let p = cfg.params()?;
            let (chi, s, quad) = (cfg.chi(), cfg.s(), cfg.quad());
            let exact = lambda_exact(&p, &chi, s, &quad)?;
            let mc = lambda_montecarlo(&p, &chi, s, cfg.samples, cfg.seed, &quad)?;
            let deviation = (mc.value - exact).norm();
            let within = deviation <= 3.0 * mc.stderr;
            let result = json!({
                "estimate": mc,
                "exact": c64_json(exact),
                "deviation": deviation,
                "within_three_sigma": within,
            });
            Ok((result, within))
        }
        Command::Verify { suite } => run_verify(cfg, *suite),
        Command::Report => {
            let p = cfg.params()?;
            let (chi, s, quad) = (cfg.chi(), cfg.s(), cfg.quad());
            let phi = build_phi(&p, cfg.chi_sign)?;
            let reports = run_all(&p, cfg.chi_sign, cfg.seed)?;
            let suites_pass = reports.iter().all(|r| r.pass);
            let lf = l_factor_pi(&p, &chi, s)?;
            let exact = lambda_exact(&p, &chi, s, &quad)?;
            let ratio = exact / lf.value;
            let ratio_dev = (ratio - Complex64::new(1.0, 0.0)).norm();
            let mc = lambda_montecarlo(&p, &chi, s, cfg.samples, cfg.seed, &quad)?;
            let mc_within = (mc.value - exact).norm() <= 3.0 * mc.stderr;
            let pass = suites_pass && ratio_dev <= 1e-10 && mc_within;
            let result = json!({
                "params": p,
                "phi": phi,
                "suites": reports,
                "l_factor": lf,
                "normalized_ratio": c64_json(ratio),
                "ratio_deviation": ratio_dev,
                "montecarlo": mc,
                "mc_within_three_sigma": mc_within,
                "all_pass": pass,
            });
            Ok((result, pass))
        }
    }
}

fn envelope(command: &str, cfg: &RunConfig, result: Value) -> Value {
    let unix_ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    json!({
        "meta": {
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "unix_ms": unix_ms,
        },
        "config": cfg,
        "result": result,
    })
}

fn exit_code(outcome: &Result<bool, CliError>) -> ExitCode {
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(_) => ExitCode::from(2),
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    init_threads()?;
    let cfg = merged_config(cli)?;
    if cli.emit_config {
        print!("{}", cfg.canonical());
        return Ok(true);
    }
    let (result, pass) = dispatch(&cli.command, &cfg)?;
    let out = envelope(cli.command.name(), &cfg, result);
    println!("{}", serde_json::to_string(&out)?);
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli);
    if let Err(e) = &outcome {
        eprintln!("testvector: error: {e}");
    }
    exit_code(&outcome)
}
