//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 capacity exceeded, 3 I/O or malformed
//! input, 4 selftest failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::codec::RangeTable;
use crate::imagery::synthetic::{self, Pattern};
use crate::imagery::{load_pgm, save_pgm, GrayImage, PgmVariant};
use crate::metrics::{self, ComparisonRow};
use crate::pvd::WideImage;
use crate::{apvd, pvd, selftest, Method, StegoError};

#[derive(Debug, Parser)]
#[command(name = "apvd", version, about = "Pixel-value-differencing steganography for grayscale PGM images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hide a payload in a cover image.
    Embed(EmbedArgs),
    /// Recover a payload from a stego image.
    Extract(ExtractArgs),
    /// Print the hiding capacity of a cover.
    Capacity(CapacityArgs),
    /// Compare PVD and APVD on one or more covers.
    Compare(CompareArgs),
    /// Run the exhaustive block check.
    Selftest(SelftestArgs),
    /// Write a synthetic cover image.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Comma-separated range widths; powers of two summing to 256.
    #[arg(long, default_value = "8,8,16,32,64,128")]
    pub widths: String,
}

impl TableArgs {
    fn table(&self) -> Result<RangeTable, CliError> {
        self.widths.parse().map_err(|e| CliError::Usage(format!("--widths: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub cover: PathBuf,
    /// File whose bytes are hidden. Mutually exclusive with --random-bytes.
    #[arg(long, conflicts_with = "random_bytes")]
    pub payload: Option<PathBuf>,
    /// Hide this many pseudo-random bytes derived from --seed.
    #[arg(long)]
    pub random_bytes: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Stego image path; the JSON report is written next to it with a `.json` suffix.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Apvd)]
    pub method: Method,
    #[command(flatten)]
    pub table: TableArgs,
    /// Write plain-text P2 instead of binary P5.
    #[arg(long)]
    pub ascii: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long, alias = "cover")]
    pub stego: PathBuf,
    /// Where to write the payload; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Method::Apvd)]
    pub method: Method,
    #[command(flatten)]
    pub table: TableArgs,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    #[arg(long)]
    pub cover: PathBuf,
    #[command(flatten)]
    pub table: TableArgs,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Cover files or directories of `.pgm` files. Built-in 512x512
    /// synthetic covers are used when none are given.
    #[arg(long)]
    pub cover: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rounds per cover, each with a fresh random payload.
    #[arg(long, default_value_t = 1)]
    pub rounds: u64,
    /// Fraction of net capacity to fill.
    #[arg(long, default_value_t = 1.0)]
    pub fill: f64,
    #[command(flatten)]
    pub table: TableArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[command(flatten)]
    pub table: TableArgs,
    /// Run on a single thread.
    #[arg(long)]
    pub serial: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value = "texture")]
    pub pattern: Pattern,
    #[arg(long, default_value_t = 512)]
    pub width: usize,
    #[arg(long, default_value_t = 512)]
    pub height: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Capacity(StegoError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Input(String),
    #[error("selftest failed: {0}")]
    SelfTest(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Capacity(_) => 2,
            CliError::Io { .. } | CliError::Input(_) => 3,
            CliError::SelfTest(_) => 4,
        }
    }
}

impl From<StegoError> for CliError {
    fn from(e: StegoError) -> Self {
        match e {
            StegoError::CapacityExceeded { .. } => CliError::Capacity(e),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_owned(), source }
}

fn read_image(path: &Path) -> Result<GrayImage, CliError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    load_pgm(&bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(io_err(path))
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Embed(args) => embed(args, stdout, stderr),
        Command::Extract(args) => extract(args, stdout),
        Command::Capacity(args) => capacity(args, stdout),
        Command::Compare(args) => compare(args, stdout),
        Command::Selftest(args) => run_selftest(args, stdout),
        Command::Synth(args) => {
            let img = args.pattern.render(args.width, args.height, args.seed);
            write_file(&args.out, &save_pgm(&img, PgmVariant::Binary))
        }
    }
    .inspect_err(|_e| {
        let _ = stdout.flush();
    })
}

#[derive(Debug, Serialize)]
struct EmbedReport {
    method: Method,
    widths: String,
    payload_bytes: usize,
    bits_embedded: usize,
    blocks_used: usize,
    capacity: metrics::Capacity,
    quality: metrics::QualityReport,
    violations: usize,
    clamped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    branch_counts: Option<apvd::BranchCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lossy_corner_count: Option<usize>,
    warnings: Vec<String>,
}

fn embed(args: EmbedArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let table = args.table.table()?;
    let cover = read_image(&args.cover)?;
    let message = match (&args.payload, args.random_bytes) {
        (Some(path), _) => fs::read(path).map_err(io_err(path))?,
        (None, Some(n)) => synthetic::random_message(n, args.seed),
        (None, None) => return Err(CliError::Usage("embed needs --payload or --random-bytes".into())),
    };
    let capacity = metrics::capacity(&cover, &table);
    let variant = if args.ascii { PgmVariant::Ascii } else { PgmVariant::Binary };

    let report = match args.method {
        Method::Apvd => {
            let out = apvd::embed_image(&cover, &message, &table)?;
            let mut warnings = Vec::new();
            if out.lossy_corner_count > 0 {
                warnings.push(format!(
                    "{} block(s) landed on the (0, 255) marking corner; extraction will not be exact",
                    out.lossy_corner_count
                ));
            }
            write_file(&args.out, &save_pgm(&out.stego, variant))?;
            EmbedReport {
                method: Method::Apvd,
                widths: table.to_string(),
                payload_bytes: message.len(),
                bits_embedded: out.bits_embedded,
                blocks_used: out.blocks_used,
                capacity,
                quality: out.quality,
                violations: 0,
                clamped: false,
                branch_counts: Some(out.branch_counts),
                lossy_corner_count: Some(out.lossy_corner_count),
                warnings,
            }
        }
        Method::Pvd => {
            let out = pvd::embed_image(&cover, &message, &table)?;
            let quality = metrics::psnr_wide(&cover, &out.stego).expect("same shape");
            let mut warnings = Vec::new();
            if out.violations > 0 {
                warnings.push(format!(
                    "{} pixel(s) left [0, 255] and were clamped in the written image; extraction may be corrupt",
                    out.violations
                ));
            }
            write_file(&args.out, &save_pgm(&out.stego.clamp_to_gray(), variant))?;
            EmbedReport {
                method: Method::Pvd,
                widths: table.to_string(),
                payload_bytes: message.len(),
                bits_embedded: out.bits_embedded,
                blocks_used: out.blocks_used,
                capacity,
                quality,
                violations: out.violations,
                clamped: out.violations > 0,
                branch_counts: None,
                lossy_corner_count: None,
                warnings,
            }
        }
    };

    for w in &report.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&sidecar_path(&args.out), json.as_bytes())?;

    let io = |e| CliError::Io { path: "<stdout>".into(), source: e };
    match args.format {
        Format::Json => writeln!(stdout, "{json}").map_err(io),
        Format::Csv => {
            writeln!(stdout, "method,payload_bytes,bits_embedded,psnr_db,violations").map_err(io)?;
            writeln!(
                stdout,
                "{},{},{},{},{}",
                report.method, report.payload_bytes, report.bits_embedded, report.quality.psnr_db, report.violations
            )
            .map_err(io)
        }
        Format::Table => {
            writeln!(stdout, "method         {}", report.method).map_err(io)?;
            writeln!(stdout, "payload bytes  {}", report.payload_bytes).map_err(io)?;
            writeln!(stdout, "bits embedded  {} of {}", report.bits_embedded, capacity.raw_bits).map_err(io)?;
            writeln!(stdout, "psnr           {} dB", report.quality.psnr_db).map_err(io)?;
            writeln!(stdout, "violations     {}", report.violations).map_err(io)
        }
    }
}

fn extract(args: ExtractArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let table = args.table.table()?;
    let stego = read_image(&args.stego)?;
    let message = match args.method {
        Method::Apvd => apvd::extract_image(&stego, &table)?,
        Method::Pvd => pvd::extract_image(&WideImage::from(&stego), &table)?,
    };
    match &args.out {
        Some(path) => write_file(path, &message),
        None => stdout
            .write_all(&message)
            .map_err(|e| CliError::Io { path: "<stdout>".into(), source: e }),
    }
}

fn capacity(args: CapacityArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let table = args.table.table()?;
    let cover = read_image(&args.cover)?;
    let cap = metrics::capacity(&cover, &table);
    let text = match args.format {
        Format::Json => serde_json::to_string(&cap).expect("serializes"),
        Format::Csv => format!("raw_bits,net_bytes\n{},{}", cap.raw_bits, cap.net_bytes),
        Format::Table => format!("raw_bits   {}\nnet_bytes  {}", cap.raw_bits, cap.net_bytes),
    };
    writeln!(stdout, "{text}").map_err(|e| CliError::Io { path: "<stdout>".into(), source: e })
}

fn collect_covers(paths: &[PathBuf], seed: u64) -> Result<Vec<(String, GrayImage)>, CliError> {
    if paths.is_empty() {
        return Ok(Pattern::ALL
            .iter()
            .map(|p| (p.name().to_owned(), p.render(512, 512, seed)))
            .collect());
    }
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(path)
                .map_err(io_err(path))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("pgm")))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(path.clone());
        }
    }
    files
        .iter()
        .map(|f| {
            let name = f.file_stem().map_or_else(|| f.display().to_string(), |s| s.to_string_lossy().into_owned());
            read_image(f).map(|img| (name, img))
        })
        .collect()
}

fn compare(args: CompareArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let table = args.table.table()?;
    if args.rounds == 0 {
        return Err(CliError::Usage("--rounds must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&args.fill) {
        return Err(CliError::Usage("--fill must lie in [0, 1]".into()));
    }
    let covers = collect_covers(&args.cover, args.seed)?;
    let seeds: Vec<u64> = (0..args.rounds).map(|r| args.seed.wrapping_add(r)).collect();
    let mut rows: Vec<ComparisonRow> = Vec::new();
    for (name, cover) in &covers {
        rows.extend(metrics::compare_rounds(name, cover, &table, &seeds, args.fill)?);
    }
    let io = |e| CliError::Io { path: "<stdout>".into(), source: e };
    match args.format {
        Format::Csv => metrics::write_csv(&rows, &mut *stdout).map_err(|e| CliError::Input(e.to_string())),
        Format::Table => write!(stdout, "{}", metrics::format_table(&rows)).map_err(io),
        Format::Json => {
            writeln!(stdout, "{}", serde_json::to_string_pretty(&rows).expect("serializes")).map_err(io)
        }
    }
}

fn run_selftest(args: SelftestArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let table = args.table.table()?;
    let started = Instant::now();
    let report = selftest::sweep(&table, !args.serial);
    let elapsed = started.elapsed();
    let io = |e| CliError::Io { path: "<stdout>".into(), source: e };

    match args.format {
        Format::Json => {
            let value = json!({
                "widths": table.to_string(),
                "elapsed_seconds": elapsed.as_secs_f64(),
                "report": report,
            });
            writeln!(stdout, "{}", serde_json::to_string_pretty(&value).expect("serializes")).map_err(io)?;
        }
        Format::Csv | Format::Table => {
            writeln!(stdout, "widths          {table}").map_err(io)?;
            writeln!(stdout, "total cases     {}", report.cases).map_err(io)?;
            writeln!(stdout, "pvd violations  {}", report.pvd_violations).map_err(io)?;
            for branch in apvd::Branch::ALL {
                writeln!(stdout, "branch {:<24} {}", format!("{branch:?}"), report.branch_counts.get(branch))
                    .map_err(io)?;
            }
            writeln!(stdout, "lossy corners   {}", report.lossy_corners).map_err(io)?;
            for (p, q, chunk) in &report.lossy_examples {
                writeln!(stdout, "  e.g. cover ({p}, {q}) chunk '{chunk}'").map_err(io)?;
            }
            writeln!(stdout, "failures        {}", report.failures).map_err(io)?;
            writeln!(stdout, "elapsed         {:.2}s", elapsed.as_secs_f64()).map_err(io)?;
        }
    }
    match report.first_failure {
        Some(first) => Err(CliError::SelfTest(format!("{} failing case(s), first: {first}", report.failures))),
        None => Ok(()),
    }
}
