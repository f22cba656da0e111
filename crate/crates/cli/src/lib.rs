//! Command-line front end: noise synthesis, denoising, manifest replay and
//! the PSNR benchmark.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use lowrank_impulse::bench::{run_bench, BenchOptions, BenchRow};
use lowrank_impulse::manifest::Operation;
use lowrank_impulse::pnm::{read_image, write_image};
use lowrank_impulse::{
    psnr, DenoiseSettings, Emit, Error, GrayImage, Method, NoiseSpec, PatchGeometry, RunManifest,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

const CSV_HEADER: [&str; 5] = ["image", "p", "method", "psnr_db", "seconds"];

#[derive(Debug, Parser)]
#[command(
    name = "lrimp",
    version,
    about = "Random-valued impulse noise removal with a patch low-rank prior"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corrupt a clean image with seeded impulse or Gaussian noise.
    AddNoise(AddNoiseArgs),
    /// Restore a noisy image.
    Denoise(DenoiseArgs),
    /// PSNR table over a directory of clean PGM images.
    Bench(BenchArgs),
    /// Re-run the operation recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Impulse,
    Gaussian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Pwmf,
    Plr,
    Admm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EmitArg {
    U,
    V,
}

#[derive(Debug, Args)]
struct AddNoiseArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Corruption probability (impulse).
    #[arg(long)]
    p: Option<f64>,
    /// Standard deviation (gaussian).
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct DenoiseArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "admm")]
    method: MethodArg,
    /// Patch side.
    #[arg(long, default_value_t = 7)]
    d: usize,
    /// Search window side.
    #[arg(long = "M", default_value_t = 43)]
    window: usize,
    /// Patches per group.
    #[arg(long = "m", default_value_t = 245)]
    group: usize,
    #[arg(long, default_value_t = 7.5)]
    t: f64,
    #[arg(long, default_value_t = 1.0 / 72.0)]
    alpha: f64,
    #[arg(long, default_value_t = 50)]
    iters: usize,
    #[arg(long, default_value_t = 4)]
    stride: usize,
    #[arg(long, value_enum, default_value = "v")]
    emit: EmitArg,
    /// Clean reference; prints the PSNR of the unrounded output.
    #[arg(long = "ref")]
    reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Directory of clean `.pgm` images.
    #[arg(long)]
    dir: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.3, 0.4, 0.5])]
    p: Vec<f64>,
    /// 128x128 center crops, stride 4, 20 iterations.
    #[arg(long)]
    desk: bool,
    /// Overrides the iteration count of the chosen protocol.
    #[arg(long)]
    iters: Option<usize>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    manifest: PathBuf,
    /// Write here instead of the recorded output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Parameter problems detectable before any file is read are usage errors.
fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::AddNoise(a) => add_noise(a),
        Command::Denoise(a) => denoise(a),
        Command::Bench(a) => bench(a),
        Command::Replay(a) => replay(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(m)) => {
            eprintln!("usage error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            EXIT_RUNTIME
        }
    }
}

fn check_output_format(path: &Path) -> Result<(), CliError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") => Err(CliError::Usage(format!(
            "{}: PNG output is not supported, use .pgm",
            path.display()
        ))),
        _ => Ok(()),
    }
}

fn noise_spec(a: &AddNoiseArgs) -> Result<NoiseSpec, CliError> {
    let spec = match (a.kind, a.p, a.sigma) {
        (KindArg::Impulse, Some(p), None) => NoiseSpec::impulse(p, a.seed),
        (KindArg::Gaussian, None, Some(sigma)) => NoiseSpec::gaussian(sigma, a.seed),
        (KindArg::Impulse, _, _) => {
            return Err(CliError::Usage(
                "--kind impulse takes --p and no --sigma".into(),
            ))
        }
        (KindArg::Gaussian, _, _) => {
            return Err(CliError::Usage(
                "--kind gaussian takes --sigma and no --p".into(),
            ))
        }
    };
    spec.validate().map_err(usage)?;
    Ok(spec)
}

fn write_with_manifest(img: &GrayImage, manifest: &RunManifest) -> Result<(), CliError> {
    write_image(img, &manifest.output)?;
    manifest.write(&RunManifest::path_for(&manifest.output))?;
    Ok(())
}

fn add_noise(a: AddNoiseArgs) -> Result<(), CliError> {
    let spec = noise_spec(&a)?;
    check_output_format(&a.out)?;
    let manifest = RunManifest::new(Operation::AddNoise(spec), &a.input, &a.out);
    let clean = read_image(&a.input)?;
    let noisy = manifest.execute(&clean)?;
    write_with_manifest(&noisy, &manifest)
}

fn denoise_settings(a: &DenoiseArgs) -> Result<DenoiseSettings, CliError> {
    let settings = DenoiseSettings {
        method: match a.method {
            MethodArg::Pwmf => Method::Pwmf,
            MethodArg::Plr => Method::Plr,
            MethodArg::Admm => Method::Admm,
        },
        geometry: PatchGeometry::new(a.d, a.window, a.group, a.stride).map_err(usage)?,
        t: a.t,
        alpha: a.alpha,
        iterations: a.iters,
        emit: match a.emit {
            EmitArg::U => Emit::U,
            EmitArg::V => Emit::V,
        },
        ..DenoiseSettings::default()
    };
    settings.admm_config().map_err(usage)?;
    Ok(settings)
}

fn denoise(a: DenoiseArgs) -> Result<(), CliError> {
    let settings = denoise_settings(&a)?;
    check_output_format(&a.out)?;
    let manifest = RunManifest::new(Operation::Denoise(settings), &a.input, &a.out);
    let noisy = read_image(&a.input)?;
    let clean = a.reference.as_deref().map(read_image).transpose()?;
    let restored = manifest.execute(&noisy)?;
    write_with_manifest(&restored, &manifest)?;
    if let Some(clean) = clean {
        println!("psnr_db={}", format_db(psnr(&restored, &clean)?));
    }
    Ok(())
}

fn replay(a: ReplayArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::read(&a.manifest)?;
    if let Some(out) = a.out {
        check_output_format(&out)?;
        manifest.output = out;
    }
    let input = read_image(&manifest.input)?;
    let output = manifest.execute(&input)?;
    write_with_manifest(&output, &manifest)
}

fn load_corpus(dir: &Path) -> Result<Vec<(String, GrayImage)>, CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_error(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
        })
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((name, read_image(&p)?))
        })
        .collect()
}

fn bench(a: BenchArgs) -> Result<(), CliError> {
    if let Some(p) = a.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(CliError::Usage(format!(
            "noise level {p} is outside [0, 1]"
        )));
    }
    let mut opts = if a.desk {
        BenchOptions::desk()
    } else {
        BenchOptions::full()
    };
    if let Some(iters) = a.iters {
        opts.settings.iterations = iters;
    }
    let corpus = load_corpus(&a.dir)?;
    if corpus.is_empty() {
        return Err(CliError::Runtime(format!(
            "no .pgm images in {}",
            a.dir.display()
        )));
    }
    let rows = run_bench(&corpus, &a.p, &opts)?;
    match &a.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
            write_csv(file, &rows)
                .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
        }
        None => write_csv(io::stdout().lock(), &rows).map_err(|e| CliError::Runtime(e.to_string())),
    }
}

fn format_db(db: f64) -> String {
    if db.is_infinite() {
        "inf".to_string()
    } else {
        format!("{db:.4}")
    }
}

fn write_csv<W: Write>(sink: W, rows: &[BenchRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.image.clone(),
            r.p.to_string(),
            r.method.to_string(),
            format_db(r.psnr_db),
            format!("{:.3}", r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}
