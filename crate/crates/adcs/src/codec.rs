//! The two end-to-end codec pipelines and the compressed archive container.

use crate::encode::{
    ec_decode_block, ec_encode_block, effective_bound, from_fixed, huffman_decode, huffman_encode,
    max_exponent, planes_for_bound, to_fixed, BitReader, BitWriter, EncodeError, HuffmanTable,
    FRACTION_BITS, MAX_BLOCK_EXPONENT, MIN_BLOCK_EXPONENT,
};
use crate::field::{Dtype, Field, FieldError, BLOCK_EDGE};
use crate::quantize::{QuantizerSpec, DEFAULT_BIN_COUNT};
use crate::transform::{bot_forward, bot_inverse, lorenzo_errors, lorenzo_reconstruct, BotMatrix};
use thiserror::Error;

pub const ARCHIVE_MAGIC: [u8; 4] = *b"ADCS";
pub const ARCHIVE_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("invalid codec parameters: {0}")]
    InvalidParams(String),
    #[error("corrupt or truncated archive")]
    CorruptStream,
    #[error("unsupported archive version {0}")]
    UnknownVersion(u16),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// The two codec families; the archive selection bit is 0 for the
/// prediction-based codec and 1 for the block-transform codec.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodecFamily {
    Predictor,
    Transform,
}

impl CodecFamily {
    pub fn selection_bit(self) -> u8 {
        match self {
            CodecFamily::Predictor => 0,
            CodecFamily::Transform => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Result<Self, CodecError> {
        match bit {
            0 => Ok(CodecFamily::Predictor),
            1 => Ok(CodecFamily::Transform),
            _ => Err(CodecError::CorruptStream),
        }
    }
}

impl std::fmt::Display for CodecFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CodecFamily::Predictor => "predictor",
            CodecFamily::Transform => "transform",
        })
    }
}

/// Per-field codec configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodecParams {
    pub family: CodecFamily,
    /// Absolute error bound (relative bounds are resolved before entry).
    pub eb_abs: f64,
    /// Block-transform parameter t in [0, 1].
    pub bot_t: f64,
    /// Quantization bin count for the predictor codec.
    pub bin_count: usize,
}

impl CodecParams {
    pub fn predictor(eb_abs: f64) -> Self {
        CodecParams {
            family: CodecFamily::Predictor,
            eb_abs,
            bot_t: crate::transform::DEFAULT_BOT_T,
            bin_count: DEFAULT_BIN_COUNT,
        }
    }

    pub fn transform(eb_abs: f64) -> Self {
        CodecParams {
            family: CodecFamily::Transform,
            ..Self::predictor(eb_abs)
        }
    }

    fn validate(&self) -> Result<(), CodecError> {
        if !(self.eb_abs > 0.0 && self.eb_abs.is_finite()) {
            return Err(CodecError::InvalidParams(format!(
                "error bound must be positive and finite, got {}",
                self.eb_abs
            )));
        }
        // the archive stores only eb_abs, so decoding assumes the default
        // quantizer width and transform parameter
        if self.bin_count != DEFAULT_BIN_COUNT {
            return Err(CodecError::InvalidParams(format!(
                "archives require the default bin count, got {}",
                self.bin_count
            )));
        }
        if self.bot_t != crate::transform::DEFAULT_BOT_T {
            return Err(CodecError::InvalidParams(format!(
                "archives require the default transform parameter, got {}",
                self.bot_t
            )));
        }
        Ok(())
    }
}

/// One compressed field inside an archive.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRecord {
    pub name: String,
    pub dtype: Dtype,
    pub dims: Vec<usize>,
    pub selection_bit: u8,
    pub eb_abs: f64,
    pub min: f64,
    pub max: f64,
    pub payload: Vec<u8>,
}

impl FieldRecord {
    pub fn family(&self) -> Result<CodecFamily, CodecError> {
        CodecFamily::from_bit(self.selection_bit)
    }

    pub fn element_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// Compressed bits per value, header included.
    pub fn bitrate(&self) -> f64 {
        (self.header_len() + self.payload.len()) as f64 * 8.0 / self.element_count() as f64
    }

    pub fn compression_ratio(&self) -> f64 {
        self.element_count() as f64 * self.dtype.size() as f64
            / (self.header_len() + self.payload.len()) as f64
    }

    fn header_len(&self) -> usize {
        2 + self.name.len() + 1 + 1 + 8 * self.dims.len() + 1 + 24 + 8
    }
}

/// Ordered collection of compressed fields with a versioned byte layout.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompressedArchive {
    pub records: Vec<FieldRecord>,
}

impl CompressedArchive {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&ARCHIVE_MAGIC);
        out.extend_from_slice(&ARCHIVE_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.records.len() as u32).to_le_bytes());
        for r in &self.records {
            out.extend_from_slice(&(r.name.len() as u16).to_le_bytes());
            out.extend_from_slice(r.name.as_bytes());
            out.push(match r.dtype {
                Dtype::F32 => 0,
                Dtype::F64 => 1,
            });
            out.push(r.dims.len() as u8);
            for &d in &r.dims {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            out.push(r.selection_bit);
            out.extend_from_slice(&r.eb_abs.to_le_bytes());
            out.extend_from_slice(&r.min.to_le_bytes());
            out.extend_from_slice(&r.max.to_le_bytes());
            out.extend_from_slice(&(r.payload.len() as u64).to_le_bytes());
            out.extend_from_slice(&r.payload);
        }
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self, CodecError> {
        let mut off = 0usize;
        if take(data, &mut off, 4)? != ARCHIVE_MAGIC {
            return Err(CodecError::CorruptStream);
        }
        let version = u16::from_le_bytes(take(data, &mut off, 2)?.try_into().unwrap());
        if version != ARCHIVE_VERSION {
            return Err(CodecError::UnknownVersion(version));
        }
        let count = u32::from_le_bytes(take(data, &mut off, 4)?.try_into().unwrap());
        let mut records = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let name_len = u16::from_le_bytes(take(data, &mut off, 2)?.try_into().unwrap());
            let name = String::from_utf8(take(data, &mut off, name_len as usize)?.to_vec())
                .map_err(|_| CodecError::CorruptStream)?;
            let dtype = match take(data, &mut off, 1)?[0] {
                0 => Dtype::F32,
                1 => Dtype::F64,
                _ => return Err(CodecError::CorruptStream),
            };
            let ndim = take(data, &mut off, 1)?[0] as usize;
            if !(1..=3).contains(&ndim) {
                return Err(CodecError::CorruptStream);
            }
            let mut dims = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                dims.push(
                    u64::from_le_bytes(take(data, &mut off, 8)?.try_into().unwrap()) as usize,
                );
            }
            let selection_bit = take(data, &mut off, 1)?[0];
            CodecFamily::from_bit(selection_bit)?;
            let eb_abs = f64::from_le_bytes(take(data, &mut off, 8)?.try_into().unwrap());
            let min = f64::from_le_bytes(take(data, &mut off, 8)?.try_into().unwrap());
            let max = f64::from_le_bytes(take(data, &mut off, 8)?.try_into().unwrap());
            let payload_len =
                u64::from_le_bytes(take(data, &mut off, 8)?.try_into().unwrap()) as usize;
            let payload = take(data, &mut off, payload_len)?.to_vec();
            records.push(FieldRecord {
                name,
                dtype,
                dims,
                selection_bit,
                eb_abs,
                min,
                max,
                payload,
            });
        }
        if off != data.len() {
            return Err(CodecError::CorruptStream);
        }
        Ok(CompressedArchive { records })
    }
}

fn take<'a>(data: &'a [u8], off: &mut usize, len: usize) -> Result<&'a [u8], CodecError> {
    if *off + len > data.len() {
        return Err(CodecError::CorruptStream);
    }
    let s = &data[*off..*off + len];
    *off += len;
    Ok(s)
}

fn read_u64(data: &[u8], off: &mut usize) -> Result<u64, CodecError> {
    Ok(u64::from_le_bytes(take(data, off, 8)?.try_into().unwrap()))
}

fn read_f64(data: &[u8], off: &mut usize) -> Result<f64, CodecError> {
    Ok(f64::from_le_bytes(take(data, off, 8)?.try_into().unwrap()))
}

/// Compress with the family named in `params`.
pub fn compress(field: &Field, params: &CodecParams) -> Result<FieldRecord, CodecError> {
    match params.family {
        CodecFamily::Predictor => compress_predictor(field, params),
        CodecFamily::Transform => compress_transform(field, params),
    }
}

/// Prediction-based pipeline: Lorenzo prediction → linear quantization of
/// prediction errors → canonical Huffman coding. Guarantees
/// max |x − x̃| ≤ eb_abs.
pub fn compress_predictor(field: &Field, params: &CodecParams) -> Result<FieldRecord, CodecError> {
    params.validate()?;
    let spec = QuantizerSpec::linear(params.eb_abs, params.bin_count)
        .map_err(|e| CodecError::InvalidParams(e.to_string()))?;
    // unpredictable (out-of-range) errors are stored raw with their indices
    // and excluded from the symbol stream
    let mut codes = Vec::with_capacity(field.len());
    let mut unpredictable: Vec<(u64, f64)> = Vec::new();
    lorenzo_errors(&field.data, &field.dims, |idx, err| {
        match spec.bin_of(err) {
            Some(bin) => {
                codes.push(bin as u32);
                spec.reconstruct(bin)
            }
            None => {
                unpredictable.push((idx as u64, err));
                err
            }
        }
    });
    let mut payload = Vec::new();
    payload.extend_from_slice(&(unpredictable.len() as u64).to_le_bytes());
    for &(idx, raw) in &unpredictable {
        payload.extend_from_slice(&idx.to_le_bytes());
        payload.extend_from_slice(&raw.to_le_bytes());
    }
    if codes.is_empty() {
        payload.push(0);
    } else {
        payload.push(1);
        let (bits, bit_len, table) = huffman_encode(&codes)?;
        table.serialize(&mut payload);
        payload.extend_from_slice(&(bit_len as u64).to_le_bytes());
        payload.extend_from_slice(&bits);
    }
    let (min, max) = field.min_max();
    Ok(FieldRecord {
        name: field.name.clone(),
        dtype: field.dtype,
        dims: field.dims.clone(),
        selection_bit: CodecFamily::Predictor.selection_bit(),
        eb_abs: params.eb_abs,
        min,
        max,
        payload,
    })
}

/// Block-transform pipeline: per 4^n block, orthogonal transform →
/// common-exponent fixed point → bit-plane embedded coding with an
/// eb-derived plane cut. The cut uses eb/2^n so the inverse transform's
/// worst-case max-norm amplification stays inside the bound.
pub fn compress_transform(field: &Field, params: &CodecParams) -> Result<FieldRecord, CodecError> {
    params.validate()?;
    let bot = BotMatrix::new(params.bot_t).map_err(|e| CodecError::InvalidParams(e.to_string()))?;
    let ndim = field.ndim();
    let eb_eff = effective_bound(params.eb_abs, ndim);
    let n_blocks = field.block_count();
    let mut exponents = Vec::with_capacity(n_blocks);
    let mut writer = BitWriter::new();
    for g in 0..n_blocks {
        let block = field.extract_block(&field.block_origin(g));
        let mut coeffs = block.values;
        bot_forward(&mut coeffs, ndim, &bot);
        match max_exponent(&coeffs) {
            None => exponents.push(0u8), // all-zero block sentinel
            Some(e) => {
                if e > MAX_BLOCK_EXPONENT {
                    return Err(CodecError::InvalidParams(format!(
                        "block exponent {e} exceeds storable range"
                    )));
                }
                let e = e.max(MIN_BLOCK_EXPONENT);
                // reject bounds so tight the fixed-point width cannot honor them
                if e - crate::encode::float_exponent(eb_eff) + 1 >= FRACTION_BITS as i32 {
                    return Err(CodecError::InvalidParams(format!(
                        "error bound {} too tight for the transform codec",
                        params.eb_abs
                    )));
                }
                exponents.push((e + 128) as u8);
                let planes = planes_for_bound(e, eb_eff)?;
                let fixed = to_fixed(&coeffs, e);
                ec_encode_block(&fixed, planes, &mut writer);
            }
        }
    }
    let (bits, bit_len) = writer.into_bytes();
    let mut payload = Vec::new();
    payload.extend_from_slice(&(n_blocks as u64).to_le_bytes());
    payload.extend_from_slice(&exponents);
    payload.extend_from_slice(&(bit_len as u64).to_le_bytes());
    payload.extend_from_slice(&bits);
    let (min, max) = field.min_max();
    Ok(FieldRecord {
        name: field.name.clone(),
        dtype: field.dtype,
        dims: field.dims.clone(),
        selection_bit: CodecFamily::Transform.selection_bit(),
        eb_abs: params.eb_abs,
        min,
        max,
        payload,
    })
}

/// Decode a record back into a field; the producing codec's error-bound
/// contract holds on the result.
pub fn decompress(record: &FieldRecord) -> Result<Field, CodecError> {
    match record.family()? {
        CodecFamily::Predictor => decompress_predictor(record),
        CodecFamily::Transform => decompress_transform(record),
    }
}

fn decompress_predictor(record: &FieldRecord) -> Result<Field, CodecError> {
    let n = record.element_count();
    let data = &record.payload;
    let mut off = 0usize;
    let n_unpred = read_u64(data, &mut off)? as usize;
    if n_unpred > n {
        return Err(CodecError::CorruptStream);
    }
    let mut raw_errs = vec![f64::NAN; n];
    for _ in 0..n_unpred {
        let idx = read_u64(data, &mut off)? as usize;
        let raw = read_f64(data, &mut off)?;
        if idx >= n || !raw_errs[idx].is_nan() {
            return Err(CodecError::CorruptStream);
        }
        raw_errs[idx] = raw;
    }
    let has_stream = take(data, &mut off, 1)?[0];
    let codes = if has_stream == 1 {
        let table = HuffmanTable::deserialize(data, &mut off)?;
        let bit_len = read_u64(data, &mut off)? as usize;
        let bits = &data[off..];
        huffman_decode(bits, bit_len, &table, n - n_unpred)?
    } else if has_stream == 0 && n_unpred == n {
        Vec::new()
    } else {
        return Err(CodecError::CorruptStream);
    };
    let spec = QuantizerSpec::linear(record.eb_abs, DEFAULT_BIN_COUNT)
        .map_err(|_| CodecError::CorruptStream)?;
    let mut code_iter = codes.iter();
    let mut errs = Vec::with_capacity(n);
    for &raw in &raw_errs {
        if raw.is_nan() {
            let &bin = code_iter.next().ok_or(CodecError::CorruptStream)?;
            if bin as usize >= spec.bin_count() {
                return Err(CodecError::CorruptStream);
            }
            errs.push(spec.reconstruct(bin as usize));
        } else {
            errs.push(raw);
        }
    }
    let values = lorenzo_reconstruct(&errs, &record.dims);
    Field::new(&record.name, record.dtype, record.dims.clone(), values).map_err(CodecError::Field)
}

fn decompress_transform(record: &FieldRecord) -> Result<Field, CodecError> {
    let data = &record.payload;
    let mut off = 0usize;
    let n_blocks = read_u64(data, &mut off)? as usize;
    let exponents = take(data, &mut off, n_blocks)?.to_vec();
    let bit_len = read_u64(data, &mut off)? as usize;
    let bits = &data[off..];
    let mut reader = BitReader::new(bits, bit_len);

    let dims = record.dims.clone();
    let ndim = dims.len();
    let slots = BLOCK_EDGE.pow(ndim as u32);
    let n = record.element_count();
    // an empty shell field used only for block geometry
    let shell = Field::new(&record.name, record.dtype, dims.clone(), vec![0.0; n])?;
    if n_blocks != shell.block_count() {
        return Err(CodecError::CorruptStream);
    }
    let bot = BotMatrix::new(crate::transform::DEFAULT_BOT_T)
        .map_err(|e| CodecError::InvalidParams(e.to_string()))?;
    let eb_eff = effective_bound(record.eb_abs, ndim);
    if !(eb_eff > 0.0 && eb_eff.is_finite()) {
        return Err(CodecError::CorruptStream);
    }
    let mut values = vec![0.0f64; n];
    for (g, &e_byte) in exponents.iter().enumerate().take(n_blocks) {
        let origin = shell.block_origin(g);
        if e_byte == 0 {
            continue; // all-zero block
        }
        let e = e_byte as i32 - 128;
        let planes = planes_for_bound(e, eb_eff)?;
        let fixed = ec_decode_block(slots, planes, &mut reader)?;
        let mut coeffs = from_fixed(&fixed, e);
        bot_inverse(&mut coeffs, ndim, &bot);
        for (slot, &v) in coeffs.iter().enumerate() {
            let mut idx = 0usize;
            let mut in_range = true;
            for ax in 0..ndim {
                let c = origin[ax] + crate::field::block_digit(slot, ax);
                if c >= dims[ax] {
                    in_range = false;
                    break;
                }
                idx = idx * dims[ax] + c;
            }
            if in_range {
                values[idx] = v;
            }
        }
    }
    Field::new(&record.name, record.dtype, dims, values).map_err(CodecError::Field)
}
