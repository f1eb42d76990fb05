use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use centro_spectra::eigen::{eigenvalues_centrosymmetric, spectral_radius, DEFAULT_EIGEN_TOL};
use centro_spectra::moments::{
    asymptotic_prediction, exact_moment, mc_trace_moment, MomentQuery, MomentResult, MIN_MC_TRIALS,
};
use centro_spectra::output::{emit_plot_data, run_summary, write_json, write_scatter_csv, write_trials_jsonl, PlotKind, PlotSource};
use centro_spectra::reduction::{block_reduce, orthogonality_residual, verify_reduction};
use centro_spectra::sampling::{moment_self_test, sample_centrosymmetric, MIN_SELF_TEST_DRAWS};
use centro_spectra::stats::{
    run_circular_law_experiment, run_clt_experiment, run_covariance_kernel_experiment, RunConfig, TestPolynomial,
    DEFAULT_CONTOUR_RADIUS, DEFAULT_RHO, DEFAULT_TAU,
};
use centro_spectra::{ComplexMatrix, EntryDistribution, Error, SeedStream};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

const HISTOGRAM_BINS: usize = 30;

#[derive(Parser)]
#[command(name = "centro-spectra", version, about = "Spectral experiments on random centrosymmetric matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one centrosymmetric matrix.
    Sample(SingleArgs),
    /// Split one sample into its two half-size blocks.
    Reduce(SingleArgs),
    /// Eigenvalues of one sample via the block path.
    Spectrum(SingleArgs),
    /// Pooled spectrum against the uniform law on the unit disc.
    CircularLaw(CircularArgs),
    /// Fluctuations of a polynomial linear eigenvalue statistic.
    Clt(CltArgs),
    /// Exact and Monte Carlo mixed trace moments E[Tr M^k conj(Tr M^l)].
    Moments(MomentArgs),
    /// Covariance of resolvent traces on contour points.
    ResolventCov(CovArgs),
    /// Moment check of the entry sampler.
    SelfTest(SelfTestArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for trial-level parallelism [default: available cores].
    #[arg(long, env = "CENTRO_SPECTRA_THREADS")]
    threads: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SingleArgs {
    #[arg(long)]
    n: usize,
    /// Substream of the master seed.
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CircularArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Guard {
    /// Spectral-radius guard; trials above it are rejected.
    #[arg(long, default_value_t = DEFAULT_RHO)]
    rho: f64,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
}

#[derive(Args)]
struct CltArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    trials: usize,
    /// Coefficients a_1,...,a_d of P(x) = a_1 x + ... + a_d x^d.
    #[arg(long, value_parser = parse_poly)]
    poly: Option<TestPolynomial>,
    /// Extra resolvent points "re,im;re,im;...".
    #[arg(long, value_parser = parse_contour)]
    contour: Option<Contour>,
    #[command(flatten)]
    guard: Guard,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct MomentArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 0)]
    l: u32,
    /// Monte Carlo trials; 0 skips the estimate.
    #[arg(long, default_value_t = 0)]
    trials: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CovArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    trials: usize,
    /// Contour points "re,im;re,im;..." [default: ±2.5, ±2.5i].
    #[arg(long, value_parser = parse_contour)]
    contour: Option<Contour>,
    #[command(flatten)]
    guard: Guard,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SelfTestArgs {
    #[arg(long, default_value_t = 1_000_000)]
    draws: usize,
    #[command(flatten)]
    common: Common,
}

fn parse_poly(s: &str) -> Result<TestPolynomial, String> {
    TestPolynomial::parse(s).map_err(|e| e.to_string())
}

#[derive(Clone)]
struct Contour(Vec<Complex64>);

fn parse_contour(s: &str) -> Result<Contour, String> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let parts: Vec<&str> = p.split(',').map(str::trim).collect();
            match parts.as_slice() {
                [re, im] => {
                    let re: f64 = re.parse().map_err(|_| format!("bad real part in {p:?}"))?;
                    let im: f64 = im.parse().map_err(|_| format!("bad imaginary part in {p:?}"))?;
                    Ok(Complex64::new(re, im))
                }
                _ => Err(format!("contour point {p:?} is not \"re,im\"")),
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .and_then(|v| if v.is_empty() { Err("empty contour".into()) } else { Ok(Contour(v)) })
}

enum Failure {
    Validation(String),
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionMismatch(_)
            | Error::NotSquare { .. }
            | Error::NonFinite { .. }
            | Error::InvalidArgument(_)
            | Error::NotCentrosymmetric { .. }
            | Error::BudgetExceeded { .. }
            | Error::UnsupportedDistribution(_) => Failure::Validation(e.to_string()),
            other => Failure::Runtime(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn invalid<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Validation(msg.into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> CliResult {
    match command {
        Command::Sample(a) => sample(a),
        Command::Reduce(a) => reduce(a),
        Command::Spectrum(a) => spectrum(a),
        Command::CircularLaw(a) => circular_law(a),
        Command::Clt(a) => clt(a),
        Command::Moments(a) => moments(a),
        Command::ResolventCov(a) => resolvent_cov(a),
        Command::SelfTest(a) => self_test(a),
    }
}

fn json_only(common: &Common, command: &str) -> CliResult {
    if common.format == Format::Csv {
        return invalid(format!("{command} has no CSV output; use --format json"));
    }
    Ok(())
}

fn check_threads(common: &Common) -> CliResult {
    if common.threads == Some(0) {
        return invalid("--threads must be >= 1");
    }
    Ok(())
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult {
    match out {
        Some(path) => write_json(value, path).with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut stdout = io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, value).context("writing stdout")?;
            writeln!(stdout).context("writing stdout")?;
        }
    }
    Ok(())
}

fn emit_scatter(eigenvalues: &[Complex64], out: Option<&Path>) -> CliResult {
    match out {
        Some(path) => emit_plot_data(PlotSource::Eigenvalues(eigenvalues), PlotKind::Scatter, path)?,
        None => write_scatter_csv(eigenvalues, io::stdout().lock())?,
    }
    Ok(())
}

/// `run.json` -> `run.<suffix>`.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    out.with_extension(suffix)
}

fn matrix_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.n_rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn draw(a: &SingleArgs) -> CliResult<centro_spectra::CentrosymmetricMatrix> {
    if a.n == 0 {
        return invalid("--n must be >= 1");
    }
    Ok(sample_centrosymmetric(a.n, &EntryDistribution::default(), SeedStream::new(a.common.seed, a.stream))?)
}

fn sample(a: SingleArgs) -> CliResult {
    let m = draw(&a)?;
    match a.common.format {
        Format::Json => emit_json(&m.to_dump(), a.common.out.as_deref()),
        Format::Csv => {
            let write = |w: &mut dyn Write| -> io::Result<()> {
                writeln!(w, "i,j,re,im")?;
                for i in 0..m.n() {
                    for (j, z) in m.matrix().row(i).iter().enumerate() {
                        writeln!(w, "{i},{j},{},{}", z.re, z.im)?;
                    }
                }
                w.flush()
            };
            match &a.common.out {
                Some(path) => {
                    let mut f = io::BufWriter::new(
                        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
                    );
                    write(&mut f).context("writing matrix CSV")?;
                }
                None => write(&mut io::stdout().lock()).context("writing stdout")?,
            }
            Ok(())
        }
    }
}

fn reduce(a: SingleArgs) -> CliResult {
    json_only(&a.common, "reduce")?;
    let m = draw(&a)?;
    let r = block_reduce(&m)?;
    let report = json!({
        "n": a.n,
        "seed": a.common.seed,
        "stream": a.stream,
        "parity": r.parity,
        "t1": matrix_rows(&r.t1),
        "t2": matrix_rows(&r.t2),
        "orthogonality_residual": orthogonality_residual(&r.q)?,
        "residual": verify_reduction(&m, &r)?,
    });
    emit_json(&report, a.common.out.as_deref())
}

fn spectrum(a: SingleArgs) -> CliResult {
    let m = draw(&a)?;
    let spec = eigenvalues_centrosymmetric(&m, DEFAULT_EIGEN_TOL)?;
    match a.common.format {
        Format::Json => {
            let report = json!({
                "n": a.n,
                "seed": a.common.seed,
                "stream": a.stream,
                "spectral_radius": spectral_radius(&spec)?,
                "spectrum": spec,
            });
            emit_json(&report, a.common.out.as_deref())
        }
        Format::Csv => emit_scatter(spec.eigenvalues(), a.common.out.as_deref()),
    }
}

fn circular_law(a: CircularArgs) -> CliResult {
    check_threads(&a.common)?;
    let cfg = RunConfig::new(a.n, a.trials, a.common.seed);
    let report = run_circular_law_experiment(&cfg, a.common.threads)?;
    match a.common.format {
        Format::Json => emit_json(&report, a.common.out.as_deref()),
        Format::Csv => emit_scatter(&report.eigenvalues, a.common.out.as_deref()),
    }
}

fn clt(a: CltArgs) -> CliResult {
    json_only(&a.common, "clt")?;
    check_threads(&a.common)?;
    let Some(poly) = a.poly else {
        return invalid("clt requires --poly");
    };
    let mut cfg = RunConfig::new(a.n, a.trials, a.common.seed).with_poly(poly);
    cfg.rho = a.guard.rho;
    cfg.tau = a.guard.tau;
    if let Some(Contour(points)) = a.contour {
        cfg = cfg.with_contour(points);
    }
    let batch = run_clt_experiment(&cfg, a.common.threads)?;
    let summary = run_summary(&batch);
    let Some(out) = a.common.out.as_deref() else {
        return emit_json(&summary, None);
    };
    emit_json(&summary, Some(out))?;

    let trials_path = sibling(out, "trials.jsonl");
    let f = std::fs::File::create(&trials_path).with_context(|| format!("creating {}", trials_path.display()))?;
    write_trials_jsonl(&batch, io::BufWriter::new(f))?;
    let bins = HISTOGRAM_BINS.min(batch.centered.len().max(1));
    for (suffix, scale) in [("hist.csv", 1.0), ("hist_scaled.csv", 1.0 / (a.n as f64).sqrt())] {
        let src = PlotSource::Batch { batch: &batch, bins, scale };
        emit_plot_data(src, PlotKind::Histogram, sibling(out, suffix))?;
    }
    Ok(())
}

fn moments(a: MomentArgs) -> CliResult {
    json_only(&a.common, "moments")?;
    check_threads(&a.common)?;
    if a.trials != 0 && a.trials < MIN_MC_TRIALS {
        return invalid(format!("--trials must be 0 or at least {MIN_MC_TRIALS}"));
    }
    let dist = EntryDistribution::default();
    let q = MomentQuery::new(a.n, a.k, a.l)?;
    let (exact, method) = exact_moment(q, &dist)?;
    let mc = if a.trials > 0 {
        Some(mc_trace_moment(q, a.trials, a.common.seed, &dist, a.common.threads)?)
    } else {
        None
    };
    let result = MomentResult {
        n: a.n,
        k: a.k,
        l: a.l,
        exact_text: Some(exact.to_string()),
        exact: Some(exact),
        method: Some(method),
        mc,
        prediction: asymptotic_prediction(a.k, a.l),
    };
    emit_json(&result, a.common.out.as_deref())
}

fn resolvent_cov(a: CovArgs) -> CliResult {
    json_only(&a.common, "resolvent-cov")?;
    check_threads(&a.common)?;
    let r = DEFAULT_CONTOUR_RADIUS;
    let points = a.contour.map(|c| c.0).unwrap_or_else(|| {
        vec![Complex64::new(r, 0.0), Complex64::new(-r, 0.0), Complex64::new(0.0, r), Complex64::new(0.0, -r)]
    });
    let mut cfg = RunConfig::new(a.n, a.trials, a.common.seed).with_contour(points);
    cfg.rho = a.guard.rho;
    cfg.tau = a.guard.tau;
    let report = run_covariance_kernel_experiment(&cfg, a.common.threads)?;
    emit_json(&report, a.common.out.as_deref())
}

fn self_test(a: SelfTestArgs) -> CliResult {
    json_only(&a.common, "self-test")?;
    if a.draws < MIN_SELF_TEST_DRAWS {
        return invalid(format!("--draws must be at least {MIN_SELF_TEST_DRAWS}"));
    }
    let report = moment_self_test(&EntryDistribution::default(), a.draws, SeedStream::new(a.common.seed, 0))?;
    emit_json(&report, a.common.out.as_deref())?;
    if !report.passed() {
        return Err(Failure::Runtime(anyhow::anyhow!(
            "sampler moments out of range: {}",
            report.violations.join("; ")
        )));
    }
    Ok(())
}
