//! The `dldiv` command line.
//!
//! Exit codes: 0 success, 1 input or data error, 2 endpoint/transport
//! error, 64 usage error.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dldiv::accumulation::{AccumulationCurve, CheckpointSchedule, Statistic};
use dldiv::diversity::DiversityOrder;
use dldiv::fit::{compare_models, fit_model, fit_power_law, FitResult, ModelKind, RankedModel};
use dldiv::lod::{self, EndpointConfig, LodProfile, Table4Row};
use dldiv::marc::{batch_series, read_marcxml_files, Facet, ViewOptions};
use dldiv::text::{corpus_reports, diversity_length_correlation, write_corpus_csv, LexicalOptions, TokenStream};
use dldiv::{Error, Execution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_TRANSPORT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "dldiv", version, about = "Diversity of digital-library data and metadata")]
pub struct Cli {
    /// Run batch work on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vocabulary and diversity growth of plain-text documents.
    Lexdiv(LexdivArgs),
    /// Fit a growth model to an `n,value` curve.
    Fit(FitArgs),
    /// Per-year growth of an author or subject facet in MARCXML catalogs.
    Marc(MarcArgs),
    /// Class and property diversity of SPARQL endpoints.
    Lod(LodArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LexdivArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Diversity order k.
    #[arg(long, default_value_t = 1.0)]
    pub order: f64,
    /// Checkpoint every this many tokens.
    #[arg(long, default_value_t = 100, conflicts_with = "per_decade")]
    pub every: u64,
    /// Logarithmically spaced checkpoints, this many per power of ten.
    #[arg(long)]
    pub per_decade: Option<u32>,
    /// Training limit for the model comparison.
    #[arg(long, default_value_t = 10_000)]
    pub train: u64,
    /// Also write one JSON report per document into this directory.
    #[arg(long)]
    pub reports: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    pub curve: PathBuf,
    /// m1, m2, m3, m4 or power.
    #[arg(long)]
    pub model: String,
    /// Fit on n ≤ N and rank M1..M4 by error on the rest.
    #[arg(long)]
    pub train: Option<u64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MarcArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// authors, subjects or subdivisions.
    #[arg(long)]
    pub facet: String,
    #[arg(long, default_value_t = 1.0)]
    pub order: f64,
    /// Take subjects from 600, 610 and 651 as well as 650.
    #[arg(long)]
    pub all_subject_fields: bool,
    /// Write the data-quality summary as JSON to this file.
    #[arg(long)]
    pub quality: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LodArgs {
    /// TOML roster of endpoints; the shipped roster when omitted.
    #[arg(long)]
    pub roster: Option<PathBuf>,
    /// Only these endpoints (repeatable); disabled entries may be named.
    #[arg(long = "endpoint")]
    pub endpoints: Vec<String>,
    /// Write the full profiles as JSON to this file.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_transport() { EXIT_TRANSPORT } else { EXIT_INPUT };
        Failure { code, message: e.to_string() }
    }
}

fn input(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: message.into() }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    input(format!("{}: {e}", path.display()))
}

/// Parses `argv` (program name first) and runs it.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Lexdiv(args) => lexdiv(args, exec, stdout, stderr),
        Command::Fit(args) => fit(args, exec, stdout),
        Command::Marc(args) => marc(args, exec, stdout, stderr),
        Command::Lod(args) => lod_cmd(args, exec, stdout, stderr),
    }
}

/// Runs `f` on the named file, or on `stdout` when there is none.
fn with_output(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<(), Failure>,
) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(|e| io_failure(p, e))?);
            f(&mut w)?;
            w.flush().map_err(|e| io_failure(p, e))
        }
        None => f(stdout),
    }
}

fn write_json<T: Serialize>(w: &mut dyn Write, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| input(e.to_string()))?;
    writeln!(w).map_err(|e| input(e.to_string()))
}

fn order(k: f64) -> Result<DiversityOrder, Failure> {
    Ok(DiversityOrder::new(k)?)
}

#[derive(Serialize)]
struct CorpusJson<'a> {
    reports: &'a [dldiv::text::LexicalReport],
    pearson_r: Option<f64>,
}

fn lexdiv(args: LexdivArgs, exec: Execution, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let schedule = match args.per_decade {
        Some(p) => CheckpointSchedule::logarithmic(p)?,
        None => CheckpointSchedule::every(args.every)?,
    };
    let opts = LexicalOptions { order: order(args.order)?, schedule, train_limit: args.train };
    let docs = args.files.iter().map(|p| TokenStream::read(p)).collect::<Result<Vec<_>, _>>()?;
    let reports = corpus_reports(&docs, &opts, exec).into_iter().collect::<Result<Vec<_>, _>>()?;
    let r = match diversity_length_correlation(&reports) {
        Ok(r) => Some(r),
        Err(e) => {
            let _ = writeln!(stderr, "note: pearson_r not available: {e}");
            None
        }
    };
    if let Some(dir) = &args.reports {
        std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
        for (report, path) in reports.iter().zip(&args.files) {
            let stem = path.file_stem().map_or("report".into(), |s| s.to_string_lossy());
            let target = dir.join(format!("{stem}.json"));
            with_output(Some(&target), stdout, |w| write_json(w, report))?;
        }
    }
    with_output(args.out.output.as_deref(), stdout, |w| match args.out.format {
        Format::Json => write_json(w, &CorpusJson { reports: &reports, pearson_r: r }),
        Format::Csv => {
            write_corpus_csv(&reports, &mut *w)?;
            let r = r.map_or("NA".to_owned(), |r| format!("{r:.4}"));
            writeln!(w, "# pearson_r,{r}").map_err(|e| input(e.to_string()))
        }
    })?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct FitWithRanking {
    fit: FitResult,
    ranking: Vec<RankedModel>,
}

fn fit(args: FitArgs, exec: Execution, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let kind: ModelKind = args.model.parse()?;
    let statistic = if kind == ModelKind::PowerLaw { Statistic::TypeCount } else { Statistic::Diversity };
    let file = File::open(&args.curve).map_err(|e| io_failure(&args.curve, e))?;
    let curve = AccumulationCurve::read_csv(BufReader::new(file), statistic)
        .map_err(|e| input(format!("{}: {e}", args.curve.display())))?;
    let fit_on = |c: &AccumulationCurve| match kind {
        ModelKind::PowerLaw => fit_power_law(c),
        other => fit_model(c, other),
    };
    with_output(args.output.as_deref(), stdout, |w| match args.train {
        None => write_json(w, &fit_on(&curve)?),
        Some(limit) => {
            let fit = fit_on(&curve.prefix(limit))?;
            let ranking = compare_models(&curve, limit, exec)?;
            write_json(w, &FitWithRanking { fit, ranking })
        }
    })?;
    Ok(EXIT_OK)
}

fn marc(args: MarcArgs, exec: Execution, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let facet: Facet = args.facet.parse()?;
    let k = order(args.order)?;
    let opts = ViewOptions { all_subject_fields: args.all_subject_fields };
    let batch = read_marcxml_files(&args.files, opts, exec)?;
    for w in &batch.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let series = batch_series(&batch, facet, k)?;
    if let Some(q) = &args.quality {
        with_output(Some(q), stdout, |w| write_json(w, &series.quality))?;
    }
    with_output(args.out.output.as_deref(), stdout, |w| match args.out.format {
        Format::Json => write_json(w, &series),
        Format::Csv => Ok(series.write_csv(&mut *w)?),
    })?;
    Ok(EXIT_OK)
}

fn select_endpoints(roster: Vec<EndpointConfig>, names: &[String]) -> Result<Vec<EndpointConfig>, Failure> {
    if names.is_empty() {
        return Ok(roster.into_iter().filter(|c| c.enabled).collect());
    }
    names
        .iter()
        .map(|n| {
            roster
                .iter()
                .find(|c| &c.name == n)
                .cloned()
                .ok_or_else(|| input(format!("no endpoint named {n:?} in the roster")))
        })
        .collect()
}

fn lod_cmd(args: LodArgs, exec: Execution, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let roster = match &args.roster {
        Some(p) => lod::load_roster(p)?,
        None => lod::default_roster(),
    };
    let endpoints = select_endpoints(roster, &args.endpoints)?;
    if endpoints.is_empty() {
        return Err(input("no enabled endpoints to harvest"));
    }
    let mut code = EXIT_OK;
    let mut profiles: Vec<LodProfile> = Vec::new();
    for (cfg, result) in endpoints.iter().zip(lod::harvest_endpoints(&endpoints, exec)) {
        match result {
            Ok(p) => {
                for w in &p.warnings {
                    let _ = writeln!(stderr, "warning: {}: {w}", cfg.name);
                }
                profiles.push(p);
            }
            Err(e) => {
                let _ = writeln!(stderr, "error: {}: {e}", cfg.name);
                let f = Failure::from(e);
                code = code.max(f.code);
            }
        }
    }
    if let Some(p) = &args.json {
        with_output(Some(p), stdout, |w| write_json(w, &profiles))?;
    }
    with_output(args.out.output.as_deref(), stdout, |w| match args.out.format {
        Format::Json => write_json(w, &profiles),
        Format::Csv => {
            let rows: Vec<Table4Row> = profiles.iter().map(Table4Row::from).collect();
            Ok(lod::write_table4(&rows, &mut *w)?)
        }
    })?;
    Ok(code)
}
