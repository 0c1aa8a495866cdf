//! The `gbsim` command-line front-end.
//!
//! Subcommands: `prob`, `sample`, `validate` (config driven), `permanent`,
//! `hafnian`, `permanent-psd` (matrix-file driven) and `haar`.
//! Exit codes: 0 success, 1 invalid input or failed validation, 2 cost limit.
//!
//! Environment: `GBS_THREADS` sets the default worker count for sampling and
//! `GBS_OUT_DIR` is the base directory for relative `--out` paths.

pub mod config;
pub mod matrix_io;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::engines::{prob_coherent, Engine};
use crate::error::{Error, Result};
use crate::fock_oracle::{prepare_input, Cutoff};
use crate::interferometer::Interferometer;
use crate::matrix_functions::{hafnian_parallel, permanent_with_limit, DEFAULT_HAFNIAN_LIMIT, DEFAULT_PERMANENT_LIMIT};
use crate::numeric::{fmt_f64, max_abs, CMatrix};
use crate::pattern::DetectionPattern;
use crate::psd_permanent::{estimate_permanent_with, ThermalEmbedding, EstimateOptions, DEFAULT_HEADROOM};
use crate::qform::OutputQForm;
use crate::sampler::{sample_patterns_with, SamplerOptions};

use config::{Inputs, RunConfig};
use matrix_io::{format_matrix, read_matrix};
use report::{Cell, Format, Report, Section};

/// Engine cross-check tolerance: relative, with an absolute floor for patterns of probability ~0.
pub const ENGINE_REL_TOL: f64 = 1e-10;
pub const ENGINE_ABS_FLOOR: f64 = 1e-15;
/// Engine-vs-oracle tolerance (truncation limited).
pub const ORACLE_TOL: f64 = 1e-6;

pub const THREADS_ENV: &str = "GBS_THREADS";
pub const OUT_DIR_ENV: &str = "GBS_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "gbsim", version, about = "Photon-counting probabilities for Gaussian inputs to linear-optical networks")]
struct Cli {
    /// Report format: table, csv or json.
    #[arg(long, global = true, default_value = "table")]
    format: Format,

    /// Write the report to this file (atomically) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact detection probabilities for the configured patterns.
    Prob(ProbArgs),
    /// Sample photon-count patterns (classical inputs only).
    Sample(SampleArgs),
    /// Permanent of a square matrix file.
    Permanent(MatrixArgs),
    /// Hafnian of a symmetric matrix file.
    Hafnian(MatrixArgs),
    /// Sampling estimate of the permanent of a PSD Hermitian matrix.
    PermanentPsd(PsdArgs),
    /// Cross-check every applicable engine, optionally against the Fock-space oracle.
    Validate(ValidateArgs),
    /// Haar-random unitary as a matrix file.
    Haar(HaarArgs),
}

#[derive(Debug, Args)]
struct ProbArgs {
    config: PathBuf,
    /// general, thermal, squeezed or auto.
    #[arg(long, default_value = "auto")]
    engine: String,
    /// Evaluate every applicable engine and report the largest disagreement.
    #[arg(long)]
    validate: bool,
    /// Append the output Q-function data (K, C, D~).
    #[arg(long)]
    dump_qform: bool,
}

#[derive(Debug, Args)]
struct SampleArgs {
    config: PathBuf,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct MatrixArgs {
    matrix: PathBuf,
    /// Largest dimension accepted before reporting a cost-limit error.
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Debug, Args)]
struct PsdArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Always attach the exact Ryser value.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = DEFAULT_HEADROOM)]
    headroom: f64,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    config: PathBuf,
    /// Add truncated Fock-space oracle columns (up to three modes).
    #[arg(long)]
    oracle: bool,
}

#[derive(Debug, Args)]
struct HaarArgs {
    #[arg(long)]
    modes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

struct Outcome {
    text: String,
    failed: Option<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self {
            text,
            failed: None,
            notes: Vec::new(),
        }
    }
}

/// Runs the CLI against the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = dispatch(&cli).and_then(|outcome| {
        match &cli.out {
            Some(p) => report::write_atomic(&resolve_out(p), outcome.text.as_bytes())?,
            None => out.write_all(outcome.text.as_bytes())?,
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            for n in &outcome.notes {
                let _ = writeln!(err, "note: {n}");
            }
            match outcome.failed {
                Some(msg) => {
                    let _ = writeln!(err, "error: {msg}");
                    1
                }
                None => 0,
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn resolve_out(p: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if p.is_relative() => Path::new(&dir).join(p),
        _ => p.to_path_buf(),
    }
}

fn default_workers(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::Parse(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let format = cli.format;
    match &cli.command {
        Command::Prob(a) => cmd_prob(a, format),
        Command::Sample(a) => cmd_sample(a, format),
        Command::Permanent(a) => cmd_permanent(a, format),
        Command::Hafnian(a) => cmd_hafnian(a, format),
        Command::PermanentPsd(a) => cmd_permanent_psd(a, format),
        Command::Validate(a) => cmd_validate(a, format),
        Command::Haar(a) => cmd_haar(a),
    }
}

fn pattern_label(p: &DetectionPattern) -> String {
    counts_label(&p.counts())
}

fn counts_label(counts: &[u32]) -> String {
    counts.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

fn config_report(command: &str, cfg: &RunConfig) -> Report {
    let mut r = Report::new(command, cfg.hash.clone());
    r.meta("modes", cfg.modes);
    r
}

fn engine_tolerance(p: f64) -> f64 {
    ENGINE_REL_TOL * p.abs() + ENGINE_ABS_FLOOR
}

fn cmd_prob(a: &ProbArgs, format: Format) -> Result<Outcome> {
    let cfg = RunConfig::load(&a.config)?;
    let patterns = cfg.patterns()?;
    let mut report = config_report("prob", &cfg);
    let mut columns = vec!["pattern", "n", "probability", "engine"];
    if a.validate {
        columns.push("max_engine_delta");
    }
    let mut table = Section::new("probabilities", &columns);
    let mut failures = 0usize;
    let mut qform = None;

    match &cfg.inputs {
        Inputs::Coherent(alpha) => {
            if a.engine != "auto" && a.engine != "coherent" {
                return Err(Error::Contract(format!("engine {} needs Gaussian input states", a.engine)));
            }
            if a.dump_qform {
                return Err(Error::Contract("--dump-qform needs Gaussian input states".into()));
            }
            for p in &patterns {
                let prob = prob_coherent(&cfg.network, alpha, p)?;
                let mut row: Vec<Cell> = vec![pattern_label(p).into(), p.n().into(), prob.into(), "coherent".into()];
                if a.validate {
                    row.push(0.0.into());
                }
                table.push(row);
            }
        }
        Inputs::Gaussian(states) => {
            let q = OutputQForm::build(states, &cfg.network)?;
            let engine = match a.engine.as_str() {
                "auto" => Engine::preferred(&q),
                name => name.parse::<Engine>()?,
            };
            let others = Engine::applicable(&q);
            for p in &patterns {
                let prob = engine.probability(&q, p)?;
                let mut row: Vec<Cell> = vec![pattern_label(p).into(), p.n().into(), prob.into(), engine.name().into()];
                if a.validate {
                    let mut delta = 0.0f64;
                    for e in &others {
                        delta = delta.max((e.probability(&q, p)? - prob).abs());
                    }
                    if delta > engine_tolerance(prob) {
                        failures += 1;
                    }
                    row.push(delta.into());
                }
                table.push(row);
            }
            if a.dump_qform {
                report.meta("k", q.k());
                report.meta("min_d_tilde_eigenvalue", q.min_d_tilde_eigenvalue());
                qform = Some(qform_section(&q));
            }
        }
    }
    report.sections.push(table);
    report.sections.extend(qform);
    Ok(finish(report, format, failures, "engine cross-check"))
}

fn finish(report: Report, format: Format, failures: usize, what: &str) -> Outcome {
    let mut outcome = Outcome::ok(report.render(format));
    if failures > 0 {
        outcome.failed = Some(format!("{what} exceeded tolerance on {failures} pattern(s)"));
    }
    outcome
}

fn qform_section(q: &OutputQForm) -> Section {
    let mut s = Section::new("qform", &["matrix", "i", "j", "re", "im"]);
    for (name, m) in [("C", q.c()), ("D_tilde", q.d_tilde())] {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                s.push(vec![name.into(), i.into(), j.into(), z.re.into(), z.im.into()]);
            }
        }
    }
    s
}

fn cmd_sample(a: &SampleArgs, format: Format) -> Result<Outcome> {
    let cfg = RunConfig::load(&a.config)?;
    let states = cfg.gaussian_states()?;
    let shots = a
        .shots
        .or(cfg.shots)
        .ok_or_else(|| Error::config("shots", "missing (set it in the config or pass --shots)"))?;
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let opts = SamplerOptions {
        workers: default_workers(a.workers)?,
    };
    let rep = sample_patterns_with(states, &cfg.network, shots, seed, &opts)?;

    let mut report = config_report("sample", &cfg);
    report.meta("shots", shots);
    report.meta("seed", seed);
    report.meta("mean_total_photons", rep.mean_total_photons());
    let mut table = Section::new("histogram", &["pattern", "count", "frequency"]);
    for (counts, &c) in &rep.histogram {
        table.push(vec![counts_label(counts).into(), c.into(), (c as f64 / shots as f64).into()]);
    }
    report.sections.push(table);
    let mut outcome = Outcome::ok(report.render(format));
    outcome.notes.push(format!(
        "{shots} shots in {:.3} s",
        rep.elapsed.as_secs_f64()
    ));
    Ok(outcome)
}

fn matrix_report(command: &str, path: &Path) -> Result<(CMatrix, Report)> {
    let (m, bytes) = read_matrix(path)?;
    let mut r = Report::new(command, hex::encode(Sha256::digest(&bytes)));
    r.meta("rows", m.nrows());
    r.meta("cols", m.ncols());
    Ok((m, r))
}

fn value_section(z: Complex64) -> Section {
    let mut s = Section::new("value", &["re", "im"]);
    s.push(vec![z.re.into(), z.im.into()]);
    s
}

fn cmd_permanent(a: &MatrixArgs, format: Format) -> Result<Outcome> {
    let (m, mut report) = matrix_report("permanent", &a.matrix)?;
    let per = permanent_with_limit(&m, a.limit.unwrap_or(DEFAULT_PERMANENT_LIMIT))?;
    report.sections.push(value_section(per));
    Ok(Outcome::ok(report.render(format)))
}

fn cmd_hafnian(a: &MatrixArgs, format: Format) -> Result<Outcome> {
    let (m, mut report) = matrix_report("hafnian", &a.matrix)?;
    if m.is_square() {
        let defect = max_abs(&(&m - m.transpose()));
        if defect > 1e-12 * max_abs(&m).max(1.0) {
            return Err(Error::Contract(format!("hafnian needs a symmetric matrix (asymmetry {defect:.3e})")));
        }
    }
    let haf = hafnian_parallel(&m, a.limit.unwrap_or(DEFAULT_HAFNIAN_LIMIT))?;
    report.sections.push(value_section(haf));
    Ok(Outcome::ok(report.render(format)))
}

fn cmd_permanent_psd(a: &PsdArgs, format: Format) -> Result<Outcome> {
    let (h, mut report) = matrix_report("permanent-psd", &a.matrix)?;
    let opts = EstimateOptions {
        headroom: a.headroom,
        force_exact: a.exact,
        sampler: SamplerOptions {
            workers: default_workers(a.workers)?,
        },
    };
    let emb = ThermalEmbedding::with_headroom(&h, a.headroom)?;
    let est = estimate_permanent_with(&h, a.shots, a.seed, &opts)?;
    report.meta("seed", a.seed);
    report.meta("headroom", a.headroom);
    report.meta("q", emb.q());
    let mut s = Section::new(
        "estimate",
        &["estimate", "standard_error", "exact", "ratio", "count", "shots", "low_confidence"],
    );
    s.push(vec![
        est.estimate.into(),
        est.standard_error.into(),
        est.exact.into(),
        est.ratio().into(),
        est.count.into(),
        est.shots.into(),
        est.low_confidence.into(),
    ]);
    report.sections.push(s);
    let mut outcome = Outcome::ok(report.render(format));
    if est.low_confidence {
        outcome
            .notes
            .push(format!("only {} all-ones events observed; the estimate is low-confidence", est.count));
    }
    Ok(outcome)
}

fn cmd_validate(a: &ValidateArgs, format: Format) -> Result<Outcome> {
    let cfg = RunConfig::load(&a.config)?;
    let states = cfg.gaussian_states()?;
    let patterns = cfg.patterns()?;
    let q = OutputQForm::build(states, &cfg.network)?;
    let applicable = Engine::applicable(&q);
    let oracle = if a.oracle {
        Some(prepare_input(states, Cutoff::Auto)?.apply_network(&cfg.network)?)
    } else {
        None
    };

    let mut report = config_report("validate", &cfg);
    let mut columns = vec!["pattern", "n", "general", "thermal", "squeezed", "max_engine_delta"];
    if let Some(o) = &oracle {
        columns.extend(["oracle", "max_oracle_delta"]);
        report.meta("oracle_cutoff", o.cutoff());
        report.meta("oracle_trace", o.trace());
        report.meta("oracle_tail_mass", o.tail_mass());
    }
    let mut table = Section::new("validation", &columns);
    let mut failures = 0usize;
    for p in &patterns {
        let mut values = [None; 3];
        for e in &applicable {
            let idx = match e {
                Engine::General => 0,
                Engine::Thermal => 1,
                Engine::Squeezed => 2,
            };
            values[idx] = Some(e.probability(&q, p)?);
        }
        let reference = values[0].expect("general engine always applies");
        let engine_delta = values.iter().flatten().map(|v| (v - reference).abs()).fold(0.0, f64::max);
        let mut bad = engine_delta > engine_tolerance(reference);
        let mut row: Vec<Cell> = vec![pattern_label(p).into(), p.n().into()];
        row.extend(values.iter().map(|&v| Cell::from(v)));
        row.push(engine_delta.into());
        if let Some(o) = &oracle {
            let ov = o.pattern_probability(p)?;
            let od = values.iter().flatten().map(|v| (v - ov).abs()).fold(0.0, f64::max);
            bad |= od > ORACLE_TOL;
            row.push(ov.into());
            row.push(od.into());
        }
        if bad {
            failures += 1;
        }
        table.push(row);
    }
    report.sections.push(table);
    let mut outcome = finish(report, format, failures, "validation");
    if let Some(o) = &oracle {
        if (o.trace() - 1.0).abs() > ORACLE_TOL {
            outcome.failed = Some(format!("oracle normalization {} is off by more than {ORACLE_TOL}", fmt_f64(o.trace())));
        }
    }
    Ok(outcome)
}

fn cmd_haar(a: &HaarArgs) -> Result<Outcome> {
    let net = Interferometer::haar_random(a.modes, a.seed)?;
    let id = format!("haar modes={} seed={}", a.modes, a.seed);
    let mut text = format!(
        "# tool: gbsim {}\n# command: haar\n# input_sha256: {}\n# modes: {}\n# seed: {}\n",
        crate::VERSION,
        hex::encode(Sha256::digest(id.as_bytes())),
        a.modes,
        a.seed
    );
    text.push_str(&format_matrix(net.matrix()));
    Ok(Outcome::ok(text))
}
