//! Command-line surface: compress/decompress archives, run estimates,
//! sweep rate-distortion curves, generate synthetic corpora, and emit CSV
//! reports.

use crate::codec::{
    compress_predictor, compress_transform, decompress, CodecFamily, CodecParams, CompressedArchive,
};
use crate::estimate::{
    estimate_ec, estimate_sz_bitrate, estimate_sz_psnr, estimate_sz_table_bits, ErrorHistogram,
    DEFAULT_EC_OFFSET, DEFAULT_N_PDF,
};
use crate::field::{block_digit, Dtype, Field, SamplingConfig};
use crate::metrics::compare;
use crate::select::{select_archive, BoundSpec, SelectionConfig};
use crate::synth::{generate, SynthKind};
use crate::transform::{lorenzo_sample_errors, BotMatrix, DEFAULT_BOT_T};
use clap::{Args, Parser, Subcommand};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const CSV_SCHEMA_VERSION: &str = "adcs-csv v1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest {path} line {line}: {message}")]
    Manifest {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
    #[error(transparent)]
    Codec(#[from] crate::codec::CodecError),
    #[error(transparent)]
    Select(#[from] crate::select::SelectError),
    #[error(transparent)]
    Estimate(#[from] crate::estimate::EstimateError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "adcs",
    about = "Error-bounded lossy compression with automatic online codec selection"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker thread count (default: ADCS_THREADS env var, then available
    /// parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress manifest fields into an archive; selection report CSV on stdout.
    Compress(CompressArgs),
    /// Decompress an archive into raw little-endian files.
    Decompress(DecompressArgs),
    /// Compare estimated vs. measured bit-rate and PSNR per codec; CSV on stdout.
    Estimate(EstimateArgs),
    /// Rate-distortion sweep over error bounds; CSV on stdout.
    Rdcurve(RdcurveArgs),
    /// Generate a synthetic field in the raw ingestion format.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct BoundArgs {
    /// Absolute error bound.
    #[arg(long, conflicts_with = "eb_rel")]
    eb_abs: Option<f64>,
    /// Value-range-relative error bound.
    #[arg(long)]
    eb_rel: Option<f64>,
}

impl BoundArgs {
    fn resolve(&self) -> Result<BoundSpec, CliError> {
        match (self.eb_abs, self.eb_rel) {
            (Some(eb), None) => Ok(BoundSpec::Abs(eb)),
            (None, Some(r)) => Ok(BoundSpec::Rel(r)),
            _ => Err(CliError::Usage(
                "exactly one of --eb-abs / --eb-rel is required".into(),
            )),
        }
    }
}

#[derive(Debug, Args)]
struct CompressArgs {
    /// Sidecar manifest: one `name dtype dims path` line per field.
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    bound: BoundArgs,
    /// Block sampling rate for estimation.
    #[arg(long, default_value_t = 0.05)]
    rsp: f64,
    /// Codec override.
    #[arg(long, default_value = "auto")]
    codec: CodecChoice,
    /// Output archive path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum CodecChoice {
    Auto,
    Predictor,
    Transform,
}

impl CodecChoice {
    fn forced(self) -> Option<CodecFamily> {
        match self {
            CodecChoice::Auto => None,
            CodecChoice::Predictor => Some(CodecFamily::Predictor),
            CodecChoice::Transform => Some(CodecFamily::Transform),
        }
    }
}

#[derive(Debug, Args)]
struct DecompressArgs {
    /// Archive to decode.
    archive: PathBuf,
    /// Output directory (one raw file per field).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    bound: BoundArgs,
    /// Comma-separated block sampling rates.
    #[arg(long, default_value = "0.05", value_delimiter = ',')]
    rsp: Vec<f64>,
    /// Skip the measured (full codec run) columns.
    #[arg(long)]
    no_verify: bool,
}

#[derive(Debug, Args)]
struct RdcurveArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Comma-separated relative error bounds.
    #[arg(long, value_delimiter = ',', required = true)]
    sweep: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    rsp: f64,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Generator kind: smooth-sine|ramp|gaussian-noise|turbulence-mix|piecewise-constant.
    kind: SynthKind,
    /// Dimensions, e.g. 64x64x32.
    #[arg(long)]
    dims: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output raw file (little-endian f64).
    #[arg(long)]
    out: PathBuf,
}

/// One manifest line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub name: String,
    pub dtype: Dtype,
    pub dims: Vec<usize>,
    pub path: PathBuf,
}

pub fn parse_dims(s: &str) -> Result<Vec<usize>, String> {
    let dims: Result<Vec<usize>, _> = s.split('x').map(|p| p.trim().parse::<usize>()).collect();
    match dims {
        Ok(d) if !d.is_empty() && d.len() <= 3 && d.iter().all(|&v| v > 0) => Ok(d),
        _ => Err(format!("bad dimension spec '{s}' (expected e.g. 64x64x32)")),
    }
}

/// Parse a sidecar manifest. Each non-comment line is
/// `name dtype dims path`; paths are relative to the manifest directory.
pub fn parse_manifest(path: &Path) -> Result<Vec<ManifestEntry>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mk_err = |message: String| CliError::Manifest {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(mk_err(format!(
                "expected `name dtype dims path`, got {} fields",
                parts.len()
            )));
        }
        let dtype = match parts[1] {
            "f32" => Dtype::F32,
            "f64" => Dtype::F64,
            other => return Err(mk_err(format!("unknown dtype '{other}'"))),
        };
        let dims = parse_dims(parts[2]).map_err(mk_err)?;
        entries.push(ManifestEntry {
            name: parts[0].to_string(),
            dtype,
            dims,
            path: base.join(parts[3]),
        });
    }
    Ok(entries)
}

pub fn load_fields(entries: &[ManifestEntry]) -> Result<Vec<Field>, CliError> {
    entries
        .iter()
        .map(|e| {
            let bytes = std::fs::read(&e.path).map_err(|source| CliError::Io {
                path: e.path.clone(),
                source,
            })?;
            Field::from_le_bytes(&e.name, &bytes, e.dims.clone(), e.dtype).map_err(CliError::Field)
        })
        .collect()
}

/// Six-significant-digit float formatting for CSV cells.
pub fn fmt6(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.5e}")
    }
}

fn thread_count(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("ADCS_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .filter(|&n| n > 0)
    .unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(cli.threads))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let result = pool.install(|| dispatch(&cli.command));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            // argument mistakes exit like clap's own usage errors
            if matches!(e, CliError::Usage(_)) {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(command: &Command) -> Result<(), CliError> {
    let mut stdout = String::new();
    match command {
        Command::Compress(args) => cmd_compress(args, &mut stdout)?,
        Command::Decompress(args) => cmd_decompress(args)?,
        Command::Estimate(args) => cmd_estimate(args, &mut stdout)?,
        Command::Rdcurve(args) => cmd_rdcurve(args, &mut stdout)?,
        Command::Synth(args) => cmd_synth(args)?,
    }
    print!("{stdout}");
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn cmd_compress(args: &CompressArgs, out: &mut String) -> Result<(), CliError> {
    let eb = args.bound.resolve()?;
    let entries = parse_manifest(&args.manifest)?;
    let fields = load_fields(&entries)?;
    let cfg = SelectionConfig {
        sampling: SamplingConfig::new(args.rsp),
        forced: args.codec.forced(),
        ..Default::default()
    };
    let (archive, reports) = select_archive(&fields, eb, &cfg)?;
    write_file(&args.out, &archive.to_bytes())?;
    let _ = writeln!(out, "# {CSV_SCHEMA_VERSION} compress");
    let _ = writeln!(
        out,
        "field,selection_bit,br_sz_est,br_zfp_est,psnr_zfp_est,delta,eb_abs,measured_ratio,estimate_secs,compress_secs"
    );
    for (record, report) in archive.records.iter().zip(&reports) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            record.name,
            record.selection_bit,
            fmt6(report.br_sz),
            fmt6(report.br_zfp),
            fmt6(report.psnr_zfp),
            fmt6(report.delta),
            fmt6(report.eb_abs),
            fmt6(record.compression_ratio()),
            fmt6(report.estimate_secs),
            fmt6(report.compress_secs),
        );
    }
    Ok(())
}

fn cmd_decompress(args: &DecompressArgs) -> Result<(), CliError> {
    let bytes = std::fs::read(&args.archive).map_err(|source| CliError::Io {
        path: args.archive.clone(),
        source,
    })?;
    let archive = CompressedArchive::from_bytes(&bytes)?;
    std::fs::create_dir_all(&args.out).map_err(|source| CliError::Io {
        path: args.out.clone(),
        source,
    })?;
    for record in &archive.records {
        let field = decompress(record)?;
        write_file(
            &args.out.join(format!("{}.raw", record.name)),
            &field.to_le_bytes(),
        )?;
    }
    Ok(())
}

/// Estimate both families on sampled data for one field, without running
/// either codec.
fn estimate_both(field: &Field, eb_abs: f64, rsp: f64) -> Result<(f64, f64, f64, f64), CliError> {
    let vr = field.value_range();
    let bot = BotMatrix::new(DEFAULT_BOT_T).expect("default parameter is valid");
    let blocks = field.sample_blocks(&SamplingConfig::new(rsp))?;
    let ec = estimate_ec(&blocks, eb_abs, vr, &bot)?;
    let ndim = field.ndim();
    let mut points = Vec::new();
    for block in &blocks {
        for slot in 0..block.slots() {
            if !block.padded[slot] {
                points.push(
                    (0..ndim)
                        .map(|ax| block.origin[ax] + block_digit(slot, ax))
                        .collect(),
                );
            }
        }
    }
    let errors = lorenzo_sample_errors(&field.data, &field.dims, &points);
    let hist = ErrorHistogram::build(&errors, DEFAULT_N_PDF)?;
    let delta = 2.0 * eb_abs;
    let br_sz = estimate_sz_bitrate(&hist, delta)?
        + estimate_sz_table_bits(&hist, delta) / field.len() as f64;
    let psnr_sz = estimate_sz_psnr(vr, delta);
    Ok((br_sz, psnr_sz, ec.bitrate + DEFAULT_EC_OFFSET, ec.psnr))
}

fn cmd_estimate(args: &EstimateArgs, out: &mut String) -> Result<(), CliError> {
    let eb = args.bound.resolve()?;
    let entries = parse_manifest(&args.manifest)?;
    let fields = load_fields(&entries)?;
    let _ = writeln!(out, "# {CSV_SCHEMA_VERSION} estimate");
    if args.no_verify {
        let _ = writeln!(out, "rsp,field,codec,est_br,est_psnr");
    } else {
        // relative error sign: negative = estimate below measurement
        let _ = writeln!(
            out,
            "rsp,field,codec,est_br,est_psnr,meas_br,meas_psnr,br_rel_err,psnr_rel_err"
        );
    }
    for &rsp in &args.rsp {
        for field in &fields {
            let vr = field.value_range();
            let eb_abs = eb.resolve(vr).max(f64::MIN_POSITIVE);
            let (br_sz, psnr_sz, br_zfp, psnr_zfp) = estimate_both(field, eb_abs, rsp)?;
            let rows: [(CodecFamily, f64, f64); 2] = [
                (CodecFamily::Predictor, br_sz, psnr_sz),
                (CodecFamily::Transform, br_zfp, psnr_zfp),
            ];
            for (family, est_br, est_psnr) in rows {
                if args.no_verify {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        fmt6(rsp),
                        field.name,
                        family,
                        fmt6(est_br),
                        fmt6(est_psnr)
                    );
                    continue;
                }
                let params = match family {
                    CodecFamily::Predictor => CodecParams::predictor(eb_abs),
                    CodecFamily::Transform => CodecParams::transform(eb_abs),
                };
                let record = crate::codec::compress(field, &params)?;
                let back = decompress(&record)?;
                let report = compare(field, &back, record.payload.len() * 8)
                    .expect("decompressed field has the original shape");
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    fmt6(rsp),
                    field.name,
                    family,
                    fmt6(est_br),
                    fmt6(est_psnr),
                    fmt6(report.bitrate),
                    fmt6(report.psnr),
                    fmt6((est_br - report.bitrate) / report.bitrate),
                    fmt6((est_psnr - report.psnr) / report.psnr),
                );
            }
        }
    }
    Ok(())
}

fn cmd_rdcurve(args: &RdcurveArgs, out: &mut String) -> Result<(), CliError> {
    if args.sweep.is_empty() {
        return Err(CliError::Usage(
            "--sweep requires at least one bound".into(),
        ));
    }
    let entries = parse_manifest(&args.manifest)?;
    let fields = load_fields(&entries)?;
    let _ = writeln!(out, "# {CSV_SCHEMA_VERSION} rdcurve");
    let _ = writeln!(out, "field,eb_rel,codec,bitrate,psnr");
    for field in &fields {
        let vr = field.value_range();
        for &eb_rel in &args.sweep {
            let eb_abs = (eb_rel * vr).max(f64::MIN_POSITIVE);
            let mut run =
                |label: &str, record: crate::codec::FieldRecord| -> Result<(), CliError> {
                    let back = decompress(&record)?;
                    let report = compare(field, &back, record.payload.len() * 8)
                        .expect("decompressed field has the original shape");
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        field.name,
                        fmt6(eb_rel),
                        label,
                        fmt6(report.bitrate),
                        fmt6(report.psnr)
                    );
                    Ok(())
                };
            run(
                "predictor",
                compress_predictor(field, &CodecParams::predictor(eb_abs))?,
            )?;
            run(
                "transform",
                compress_transform(field, &CodecParams::transform(eb_abs))?,
            )?;
            let cfg = SelectionConfig {
                sampling: SamplingConfig::new(args.rsp),
                ..Default::default()
            };
            let (record, _) =
                crate::select::select_and_compress(field, BoundSpec::Abs(eb_abs), &cfg)?;
            run("auto", record)?;
        }
    }
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    let dims = parse_dims(&args.dims).map_err(CliError::Usage)?;
    let field = generate(args.kind, "synthetic", &dims, args.seed);
    write_file(&args.out, &field.to_le_bytes())
}
