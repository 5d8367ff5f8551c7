//! Automatic online codec selection: estimate both families on a sampled
//! subset at matched PSNR, then compress each field with the cheaper one.

use crate::codec::{
    compress_predictor, compress_transform, CodecError, CodecFamily, CodecParams,
    CompressedArchive, FieldRecord,
};
use crate::estimate::{
    delta_from_psnr, estimate_ec, estimate_sz_bitrate_with_offset, estimate_sz_table_bits,
    ErrorHistogram, EstimateError, DEFAULT_EC_OFFSET, DEFAULT_N_PDF, DEFAULT_SZ_OFFSET,
    PSNR_SENTINEL,
};
use crate::field::{block_digit, Field, FieldError, SamplingConfig};
use crate::transform::{lorenzo_sample_errors, BotMatrix, DEFAULT_BOT_T};
use rayon::prelude::*;
use std::time::Instant;
use thiserror::Error;

/// Error-bound floor applied when a field has zero value range.
const ZERO_RANGE_EB: f64 = 1e-30;

#[derive(Debug, Error)]
pub enum SelectError {
    #[error("no fields to compress")]
    EmptyInput,
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("compression failed for {}", format_failures(.0))]
    FieldFailures(Vec<(String, String)>),
}

fn format_failures(failures: &[(String, String)]) -> String {
    failures
        .iter()
        .map(|(name, err)| format!("{name}: {err}"))
        .collect::<Vec<_>>()
        .join("; ")
}

/// User-facing error bound, resolved against the field's value range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundSpec {
    Abs(f64),
    Rel(f64),
}

impl BoundSpec {
    pub fn resolve(self, value_range: f64) -> f64 {
        match self {
            BoundSpec::Abs(eb) => eb,
            BoundSpec::Rel(r) => r * value_range,
        }
    }
}

/// Selector configuration.
#[derive(Debug, Clone, Copy)]
pub struct SelectionConfig {
    pub sampling: SamplingConfig,
    pub n_pdf: usize,
    pub sz_offset: f64,
    pub ec_offset: f64,
    pub bot_t: f64,
    /// Bypass estimation and force one family.
    pub forced: Option<CodecFamily>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            sampling: SamplingConfig::default(),
            n_pdf: DEFAULT_N_PDF,
            sz_offset: DEFAULT_SZ_OFFSET,
            ec_offset: DEFAULT_EC_OFFSET,
            bot_t: DEFAULT_BOT_T,
            forced: None,
        }
    }
}

/// Per-field outcome of the selection algorithm.
#[derive(Debug, Clone)]
pub struct SelectionReport {
    pub name: String,
    /// Estimated predictor-codec bit-rate (NaN when estimation was bypassed).
    pub br_sz: f64,
    /// Estimated transform-codec bit-rate.
    pub br_zfp: f64,
    /// Estimated transform-codec PSNR (the matching target).
    pub psnr_zfp: f64,
    /// Matched-PSNR quantization bin size.
    pub delta: f64,
    pub chosen: CodecFamily,
    pub selection_bit: u8,
    /// Resolved absolute bound handed to the chosen codec.
    pub eb_abs: f64,
    pub estimate_secs: f64,
    pub compress_secs: f64,
}

/// Run the selection algorithm on one field and compress it with the
/// winning codec.
pub fn select_and_compress(
    field: &Field,
    eb: BoundSpec,
    cfg: &SelectionConfig,
) -> Result<(FieldRecord, SelectionReport), SelectError> {
    let vr = field.value_range();
    let eb_abs = eb.resolve(vr);

    if let Some(forced) = cfg.forced {
        let eb_abs = eb_abs.max(ZERO_RANGE_EB);
        let t0 = Instant::now();
        let record = compress_with(field, forced, eb_abs)?;
        let compress_secs = t0.elapsed().as_secs_f64();
        let report = SelectionReport {
            name: field.name.clone(),
            br_sz: f64::NAN,
            br_zfp: f64::NAN,
            psnr_zfp: f64::NAN,
            delta: f64::NAN,
            chosen: forced,
            selection_bit: forced.selection_bit(),
            eb_abs,
            estimate_secs: 0.0,
            compress_secs,
        };
        return Ok((record, report));
    }

    if vr == 0.0 {
        // degenerate constant field: nothing to estimate, the predictor
        // codec stores it in a few bytes
        let eb_abs = eb_abs.max(ZERO_RANGE_EB);
        let t0 = Instant::now();
        let record = compress_with(field, CodecFamily::Predictor, eb_abs)?;
        let compress_secs = t0.elapsed().as_secs_f64();
        let report = SelectionReport {
            name: field.name.clone(),
            br_sz: 0.0,
            br_zfp: 0.0,
            psnr_zfp: PSNR_SENTINEL,
            delta: 0.0,
            chosen: CodecFamily::Predictor,
            selection_bit: 0,
            eb_abs,
            estimate_secs: 0.0,
            compress_secs,
        };
        return Ok((record, report));
    }

    let t0 = Instant::now();
    let bot = BotMatrix::new(cfg.bot_t).map_err(|e| CodecError::InvalidParams(e.to_string()))?;
    let blocks = field.sample_blocks(&cfg.sampling)?;
    let ec = estimate_ec(&blocks, eb_abs, vr, &bot)?;
    let (br_zfp, psnr_zfp) = (ec.bitrate + cfg.ec_offset, ec.psnr);
    let delta = delta_from_psnr(vr, psnr_zfp);

    // prediction-error histogram over the same sampled blocks
    let mut points: Vec<Vec<usize>> = Vec::with_capacity(blocks.len() * blocks[0].slots());
    let ndim = field.ndim();
    for block in &blocks {
        for slot in 0..block.slots() {
            if block.padded[slot] {
                continue;
            }
            let coords: Vec<usize> = (0..ndim)
                .map(|ax| block.origin[ax] + block_digit(slot, ax))
                .collect();
            points.push(coords);
        }
    }
    let errors = lorenzo_sample_errors(&field.data, &field.dims, &points);
    let hist = ErrorHistogram::build(&errors, cfg.n_pdf)?;
    let br_sz = estimate_sz_bitrate_with_offset(&hist, delta, cfg.sz_offset)?
        + estimate_sz_table_bits(&hist, delta) / field.len() as f64;
    let estimate_secs = t0.elapsed().as_secs_f64();

    let chosen = if br_sz < br_zfp {
        CodecFamily::Predictor
    } else {
        CodecFamily::Transform
    };
    let t1 = Instant::now();
    let record = match chosen {
        // matched-PSNR bound: bin size δ, never looser than the user bound
        CodecFamily::Predictor => compress_with(
            field,
            chosen,
            (delta / 2.0).min(eb_abs).max(f64::MIN_POSITIVE),
        )?,
        CodecFamily::Transform => compress_with(field, chosen, eb_abs)?,
    };
    let compress_secs = t1.elapsed().as_secs_f64();
    let report = SelectionReport {
        name: field.name.clone(),
        br_sz,
        br_zfp,
        psnr_zfp,
        delta,
        chosen,
        selection_bit: chosen.selection_bit(),
        eb_abs: record.eb_abs,
        estimate_secs,
        compress_secs,
    };
    Ok((record, report))
}

fn compress_with(
    field: &Field,
    family: CodecFamily,
    eb_abs: f64,
) -> Result<FieldRecord, CodecError> {
    match family {
        CodecFamily::Predictor => compress_predictor(field, &CodecParams::predictor(eb_abs)),
        CodecFamily::Transform => compress_transform(field, &CodecParams::transform(eb_abs)),
    }
}

/// Select and compress every field in parallel; archive records keep input
/// order and per-field failures are aggregated by name.
pub fn select_archive(
    fields: &[Field],
    eb: BoundSpec,
    cfg: &SelectionConfig,
) -> Result<(CompressedArchive, Vec<SelectionReport>), SelectError> {
    if fields.is_empty() {
        return Err(SelectError::EmptyInput);
    }
    let results: Vec<Result<(FieldRecord, SelectionReport), SelectError>> = fields
        .par_iter()
        .map(|f| select_and_compress(f, eb, cfg))
        .collect();
    let mut failures = Vec::new();
    let mut records = Vec::with_capacity(fields.len());
    let mut reports = Vec::with_capacity(fields.len());
    for (field, result) in fields.iter().zip(results) {
        match result {
            Ok((record, report)) => {
                records.push(record);
                reports.push(report);
            }
            Err(e) => failures.push((field.name.clone(), e.to_string())),
        }
    }
    if !failures.is_empty() {
        return Err(SelectError::FieldFailures(failures));
    }
    Ok((CompressedArchive { records }, reports))
}
