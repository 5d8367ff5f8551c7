//! Stage III entropy coding (canonical Huffman over bin indices) and
//! Stage II dynamic quantization (bit-plane embedded coding with per-block
//! exponent alignment).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("corrupt or truncated bitstream")]
    CorruptStream,
    #[error("cannot encode an empty symbol sequence")]
    EmptyInput,
    #[error("invalid error bound {0} (embedded coding is lossy-only)")]
    InvalidBound(f64),
    #[error("block exponent {0} outside storable range")]
    ExponentRange(i32),
    #[error("huffman code length overflow")]
    CodeLengthOverflow,
}

// ---------------------------------------------------------------------------
// bit-level IO, MSB first
// ---------------------------------------------------------------------------

#[derive(Debug, Default)]
pub struct BitWriter {
    buf: Vec<u8>,
    bits: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn write_bit(&mut self, bit: bool) {
        let byte = self.bits / 8;
        if byte == self.buf.len() {
            self.buf.push(0);
        }
        if bit {
            self.buf[byte] |= 0x80 >> (self.bits % 8);
        }
        self.bits += 1;
    }

    #[inline]
    pub fn write_bits(&mut self, value: u64, count: u8) {
        for i in (0..count).rev() {
            self.write_bit((value >> i) & 1 == 1);
        }
    }

    pub fn bit_len(&self) -> usize {
        self.bits
    }

    pub fn into_bytes(self) -> (Vec<u8>, usize) {
        (self.buf, self.bits)
    }
}

#[derive(Debug)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    limit: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8], bit_len: usize) -> Self {
        BitReader {
            data,
            pos: 0,
            limit: bit_len.min(data.len() * 8),
        }
    }

    #[inline]
    pub fn read_bit(&mut self) -> Result<bool, EncodeError> {
        if self.pos >= self.limit {
            return Err(EncodeError::CorruptStream);
        }
        let bit = (self.data[self.pos / 8] >> (7 - self.pos % 8)) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, count: u8) -> Result<u64, EncodeError> {
        let mut v = 0u64;
        for _ in 0..count {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// canonical Huffman
// ---------------------------------------------------------------------------

/// Canonical Huffman table, held as (symbol, code length) pairs sorted by
/// (length, symbol). A single-symbol table has length 0 and encodes to an
/// empty stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTable {
    lengths: Vec<(u32, u8)>,
}

impl HuffmanTable {
    /// Build from symbol frequencies using a deterministic two-queue merge.
    pub fn from_counts(counts: &[u64]) -> Result<Self, EncodeError> {
        let used: Vec<u32> = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(s, _)| s as u32)
            .collect();
        if used.is_empty() {
            return Err(EncodeError::EmptyInput);
        }
        if used.len() == 1 {
            return Ok(HuffmanTable {
                lengths: vec![(used[0], 0)],
            });
        }
        // heap of (weight, tie-break id) -> node index
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        let mut parent = vec![usize::MAX; used.len() * 2 - 1];
        let mut heap: BinaryHeap<Reverse<(u64, usize)>> = used
            .iter()
            .enumerate()
            .map(|(i, &s)| Reverse((counts[s as usize], i)))
            .collect();
        let mut next = used.len();
        while heap.len() > 1 {
            let Reverse((wa, a)) = heap.pop().unwrap();
            let Reverse((wb, b)) = heap.pop().unwrap();
            parent[a] = next;
            parent[b] = next;
            heap.push(Reverse((wa + wb, next)));
            next += 1;
        }
        let mut lengths: Vec<(u32, u8)> = used
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut depth = 0u32;
                let mut node = i;
                while parent[node] != usize::MAX {
                    node = parent[node];
                    depth += 1;
                }
                (s, depth as u8)
            })
            .collect();
        if lengths.iter().any(|&(_, l)| l > 63) {
            return Err(EncodeError::CodeLengthOverflow);
        }
        lengths.sort_by_key(|&(s, l)| (l, s));
        Ok(HuffmanTable { lengths })
    }

    pub fn symbol_count(&self) -> usize {
        self.lengths.len()
    }

    pub fn code_lengths(&self) -> &[(u32, u8)] {
        &self.lengths
    }

    /// Canonical (code, length) per table entry, in table order.
    fn assign_codes(&self) -> Vec<u64> {
        let mut codes = Vec::with_capacity(self.lengths.len());
        let mut code = 0u64;
        let mut prev_len = self.lengths.first().map(|&(_, l)| l).unwrap_or(0);
        for (i, &(_, len)) in self.lengths.iter().enumerate() {
            if i > 0 {
                code += 1;
            }
            code <<= len - prev_len;
            prev_len = len;
            codes.push(code);
        }
        codes
    }

    /// Serialize the span of code lengths, run-length coded when runs are
    /// long, as a raw byte-per-symbol array otherwise (dense jittery
    /// length arrays make one RLE entry per symbol, tripling the size).
    pub fn serialize(&self, out: &mut Vec<u8>) {
        let min = self.lengths.iter().map(|&(s, _)| s).min().unwrap();
        let max = self.lengths.iter().map(|&(s, _)| s).max().unwrap();
        out.extend_from_slice(&min.to_le_bytes());
        out.extend_from_slice(&max.to_le_bytes());
        let span = (max - min + 1) as usize;
        let mut lens = vec![0u8; span];
        for &(s, l) in &self.lengths {
            lens[(s - min) as usize] = l;
        }
        let mut rle = Vec::new();
        let mut i = 0;
        while i < span {
            let l = lens[i];
            let mut run = 1usize;
            while i + run < span && lens[i + run] == l && run < u16::MAX as usize {
                run += 1;
            }
            rle.push(l);
            rle.extend_from_slice(&(run as u16).to_le_bytes());
            i += run;
        }
        if rle.len() <= span {
            out.push(0);
            out.extend_from_slice(&rle);
        } else {
            out.push(1);
            out.extend_from_slice(&lens);
        }
    }

    pub fn deserialize(data: &[u8], off: &mut usize) -> Result<Self, EncodeError> {
        let min = read_u32(data, off)?;
        let max = read_u32(data, off)?;
        if max < min || *off >= data.len() {
            return Err(EncodeError::CorruptStream);
        }
        let format = data[*off];
        *off += 1;
        let span = (max - min + 1) as usize;
        let lens = match format {
            0 => {
                let mut lens = Vec::with_capacity(span);
                while lens.len() < span {
                    if *off + 3 > data.len() {
                        return Err(EncodeError::CorruptStream);
                    }
                    let l = data[*off];
                    let run = u16::from_le_bytes([data[*off + 1], data[*off + 2]]) as usize;
                    *off += 3;
                    if run == 0 || lens.len() + run > span {
                        return Err(EncodeError::CorruptStream);
                    }
                    lens.extend(std::iter::repeat_n(l, run));
                }
                lens
            }
            1 => {
                if *off + span > data.len() {
                    return Err(EncodeError::CorruptStream);
                }
                let lens = data[*off..*off + span].to_vec();
                *off += span;
                lens
            }
            _ => return Err(EncodeError::CorruptStream),
        };
        let mut lengths: Vec<(u32, u8)> = lens
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l > 0)
            .map(|(i, &l)| (min + i as u32, l))
            .collect();
        if lengths.is_empty() {
            // degenerate single-symbol table (length 0)
            if span != 1 {
                return Err(EncodeError::CorruptStream);
            }
            lengths = vec![(min, 0)];
        }
        lengths.sort_by_key(|&(s, l)| (l, s));
        Ok(HuffmanTable { lengths })
    }
}

fn read_u32(data: &[u8], off: &mut usize) -> Result<u32, EncodeError> {
    if *off + 4 > data.len() {
        return Err(EncodeError::CorruptStream);
    }
    let v = u32::from_le_bytes(data[*off..*off + 4].try_into().unwrap());
    *off += 4;
    Ok(v)
}

/// Encode a symbol sequence; returns (bytes, bit length, table).
pub fn huffman_encode(codes: &[u32]) -> Result<(Vec<u8>, usize, HuffmanTable), EncodeError> {
    if codes.is_empty() {
        return Err(EncodeError::EmptyInput);
    }
    let max_sym = *codes.iter().max().unwrap() as usize;
    let mut counts = vec![0u64; max_sym + 1];
    for &c in codes {
        counts[c as usize] += 1;
    }
    let table = HuffmanTable::from_counts(&counts)?;
    let assigned = table.assign_codes();
    let mut lut = vec![(0u64, 0u8); max_sym + 1];
    for (i, &(s, l)) in table.lengths.iter().enumerate() {
        lut[s as usize] = (assigned[i], l);
    }
    let mut w = BitWriter::new();
    for &c in codes {
        let (code, len) = lut[c as usize];
        w.write_bits(code, len);
    }
    let (bytes, bits) = w.into_bytes();
    Ok((bytes, bits, table))
}

/// Decode `count` symbols from a canonical Huffman bitstream.
pub fn huffman_decode(
    bytes: &[u8],
    bit_len: usize,
    table: &HuffmanTable,
    count: usize,
) -> Result<Vec<u32>, EncodeError> {
    if table.lengths.len() == 1 && table.lengths[0].1 == 0 {
        return Ok(vec![table.lengths[0].0; count]);
    }
    let max_len = table.lengths.last().map(|&(_, l)| l).unwrap_or(0) as usize;
    // per length: (first canonical code, offset into sorted symbols, count)
    let mut by_len = vec![(0u64, 0usize, 0usize); max_len + 1];
    {
        let mut code = 0u64;
        let mut prev_len = 0usize;
        let mut i = 0;
        while i < table.lengths.len() {
            let len = table.lengths[i].1 as usize;
            code <<= len - prev_len;
            prev_len = len;
            let start = i;
            while i < table.lengths.len() && table.lengths[i].1 as usize == len {
                i += 1;
            }
            by_len[len] = (code, start, i - start);
            code += (i - start) as u64;
        }
    }
    let mut r = BitReader::new(bytes, bit_len);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut code = 0u64;
        let mut len = 0usize;
        loop {
            code = (code << 1) | r.read_bit()? as u64;
            len += 1;
            if len > max_len {
                return Err(EncodeError::CorruptStream);
            }
            let (first, offset, n) = by_len[len];
            if n > 0 && code >= first && code - first < n as u64 {
                out.push(table.lengths[offset + (code - first) as usize].0);
                break;
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// bit-plane embedded coding
// ---------------------------------------------------------------------------

/// Fraction bits of the per-block fixed-point representation. Keeps 4^n
/// accumulation well inside 62-bit headroom.
pub const FRACTION_BITS: u32 = 30;

/// Largest per-block exponent storable in the one-byte block header.
pub const MAX_BLOCK_EXPONENT: i32 = 127;
pub const MIN_BLOCK_EXPONENT: i32 = -127;

/// floor(log2 |x|) for finite nonzero x.
#[inline]
pub fn float_exponent(x: f64) -> i32 {
    let bits = x.abs().to_bits();
    let e = ((bits >> 52) & 0x7ff) as i32;
    if e == 0 {
        -1023 // subnormal, clamped later
    } else {
        e - 1023
    }
}

/// Per-block maximum base-2 exponent, None for an all-zero block.
pub fn max_exponent(coeffs: &[f64]) -> Option<i32> {
    coeffs
        .iter()
        .filter(|v| **v != 0.0)
        .map(|&v| float_exponent(v))
        .max()
}

/// The transform codec cuts planes against eb/2^n: the inverse transform
/// can amplify a coefficientwise error by up to 2 per axis in max norm.
pub fn effective_bound(eb_abs: f64, ndim: usize) -> f64 {
    eb_abs / (1u32 << ndim) as f64
}

/// Number of bit-planes (MSB down) needed so that per-coefficient
/// truncation error stays below the bound, clamped to the fixed-point
/// fraction width.
pub fn planes_for_bound(e_max: i32, eb_abs: f64) -> Result<u32, EncodeError> {
    if !(eb_abs > 0.0 && eb_abs.is_finite()) {
        return Err(EncodeError::InvalidBound(eb_abs));
    }
    let eb_exp = float_exponent(eb_abs);
    Ok((e_max - eb_exp + 1).clamp(0, FRACTION_BITS as i32) as u32)
}

/// Convert coefficients with |w| < 2^(e_max+1) to fixed point with
/// FRACTION_BITS fraction bits, one ulp = 2^(e_max + 1 - FRACTION_BITS).
pub fn to_fixed(coeffs: &[f64], e_max: i32) -> Vec<i64> {
    let scale = (2f64).powi(FRACTION_BITS as i32 - e_max - 1);
    let cap = (1i64 << FRACTION_BITS) - 1;
    coeffs
        .iter()
        .map(|&w| ((w * scale).round() as i64).clamp(-cap, cap))
        .collect()
}

pub fn from_fixed(fixed: &[i64], e_max: i32) -> Vec<f64> {
    let scale = (2f64).powi(e_max + 1 - FRACTION_BITS as i32);
    fixed.iter().map(|&m| m as f64 * scale).collect()
}

/// Emit `planes_kept` magnitude planes MSB-first; each coefficient's sign
/// bit follows its first 1 bit.
pub fn ec_encode_block(fixed: &[i64], planes_kept: u32, w: &mut BitWriter) {
    if planes_kept == 0 {
        return;
    }
    let cut = FRACTION_BITS - planes_kept;
    let mut signed = vec![false; fixed.len()];
    for plane in (cut..FRACTION_BITS).rev() {
        for (i, &m) in fixed.iter().enumerate() {
            let bit = (m.unsigned_abs() >> plane) & 1 == 1;
            w.write_bit(bit);
            if bit && !signed[i] {
                w.write_bit(m < 0);
                signed[i] = true;
            }
        }
    }
}

/// Decode one block; reconstructed fixed-point values carry a half-ulp
/// offset at the cut plane.
pub fn ec_decode_block(
    count: usize,
    planes_kept: u32,
    r: &mut BitReader,
) -> Result<Vec<i64>, EncodeError> {
    let mut mags = vec![0u64; count];
    let mut neg = vec![false; count];
    if planes_kept > 0 {
        let cut = FRACTION_BITS - planes_kept;
        let mut signed = vec![false; count];
        for plane in (cut..FRACTION_BITS).rev() {
            for i in 0..count {
                if r.read_bit()? {
                    mags[i] |= 1 << plane;
                    if !signed[i] {
                        neg[i] = r.read_bit()?;
                        signed[i] = true;
                    }
                }
            }
        }
        for m in mags.iter_mut() {
            if *m != 0 && cut > 0 {
                *m += 1 << (cut - 1);
            }
        }
    }
    Ok(mags
        .iter()
        .zip(&neg)
        .map(|(&m, &n)| if n { -(m as i64) } else { m as i64 })
        .collect())
}

/// Half-ulp truncated reconstruction of a single fixed-point coefficient,
/// matching what [`ec_decode_block`] produces.
pub fn truncated_recon(fixed: i64, planes_kept: u32) -> i64 {
    if planes_kept == 0 {
        return 0;
    }
    let cut = FRACTION_BITS - planes_kept;
    let mut m = (fixed.unsigned_abs() >> cut) << cut;
    if m != 0 && cut > 0 {
        m += 1 << (cut - 1);
    }
    if fixed < 0 {
        -(m as i64)
    } else {
        m as i64
    }
}

/// Significant-bit count: plane positions from the block's MSB plane down
/// to the coefficient's lowest kept nonzero bit; 0 for a coefficient that
/// truncates to zero.
pub fn significant_bits(fixed: i64, planes_kept: u32) -> u32 {
    if planes_kept == 0 {
        return 0;
    }
    let cut = FRACTION_BITS - planes_kept;
    let t = fixed.unsigned_abs() >> cut;
    if t == 0 {
        0
    } else {
        planes_kept - t.trailing_zeros()
    }
}

/// Coefficient indices of a 4^n block ordered by increasing digit sum
/// (low-frequency first), ties by flat index.
pub fn zigzag_order(ndim: usize) -> Vec<usize> {
    let n = 4usize.pow(ndim as u32);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by_key(|&i| {
        let sum: usize = (0..ndim).map(|ax| (i >> (2 * ax)) & 3).sum();
        (sum, i)
    });
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn entropy(codes: &[u32]) -> f64 {
        let mut counts = std::collections::HashMap::new();
        for &c in codes {
            *counts.entry(c).or_insert(0u64) += 1;
        }
        let n = codes.len() as f64;
        counts
            .values()
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.log2()
            })
            .sum()
    }

    #[test]
    fn single_symbol_stream_degenerates() {
        let codes = vec![7u32; 1000];
        let (bytes, bits, table) = huffman_encode(&codes).unwrap();
        assert_eq!(bits, 0);
        let back = huffman_decode(&bytes, bits, &table, 1000).unwrap();
        assert_eq!(back, codes);
    }

    #[test]
    fn two_symbols_one_bit_each() {
        let codes: Vec<u32> = (0..1000).map(|i| i % 2).collect();
        let (_, bits, _) = huffman_encode(&codes).unwrap();
        assert_eq!(bits, 1000);
    }

    #[test]
    fn uniform_eight_symbols_three_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let codes: Vec<u32> = (0..8000).map(|_| rng.gen_range(0..8)).collect();
        let (bytes, bits, table) = huffman_encode(&codes).unwrap();
        let rate = bits as f64 / codes.len() as f64;
        assert!((3.0..3.05).contains(&rate), "rate {rate}");
        let back = huffman_decode(&bytes, bits, &table, codes.len()).unwrap();
        assert_eq!(back, codes);
    }

    #[test]
    fn bitrate_at_least_entropy_and_within_one_bit() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let nsym = rng.gen_range(2..40u32);
            let codes: Vec<u32> = (0..5000)
                .map(|_| {
                    // skewed distribution
                    let r: f64 = rng.gen();
                    ((r * r * nsym as f64) as u32).min(nsym - 1)
                })
                .collect();
            let (_, bits, _) = huffman_encode(&codes).unwrap();
            let rate = bits as f64 / codes.len() as f64;
            let h = entropy(&codes);
            assert!(rate >= h - 1e-9, "rate {rate} < entropy {h}");
            assert!(rate < h + 1.0, "rate {rate} entropy {h}");
        }
    }

    #[test]
    fn table_roundtrip_serialization() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let codes: Vec<u32> = (0..4000).map(|_| rng.gen_range(100..400)).collect();
        let (bytes, bits, table) = huffman_encode(&codes).unwrap();
        let mut ser = Vec::new();
        table.serialize(&mut ser);
        let mut off = 0;
        let table2 = HuffmanTable::deserialize(&ser, &mut off).unwrap();
        assert_eq!(off, ser.len());
        assert_eq!(table, table2);
        let back = huffman_decode(&bytes, bits, &table2, codes.len()).unwrap();
        assert_eq!(back, codes);
    }

    #[test]
    fn truncated_stream_detected() {
        let codes: Vec<u32> = (0..100).map(|i| i % 5).collect();
        let (bytes, bits, table) = huffman_decode_setup(&codes);
        let short = &bytes[..bytes.len() / 2];
        assert!(huffman_decode(short, bits.min(short.len() * 8), &table, 100).is_err());
    }

    fn huffman_decode_setup(codes: &[u32]) -> (Vec<u8>, usize, HuffmanTable) {
        huffman_encode(codes).unwrap()
    }

    #[test]
    fn planes_for_bound_examples() {
        // everything truncated when the bound dwarfs the block
        assert_eq!(planes_for_bound(0, 16.0).unwrap(), 0);
        // e_max 0, eb 2^-10 -> 12 planes
        assert_eq!(planes_for_bound(0, 2f64.powi(-10) * 1.5).unwrap(), 11);
        assert!(planes_for_bound(0, 0.0).is_err());
    }

    #[test]
    fn ec_block_roundtrip_error_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let coeffs: Vec<f64> = (0..64).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let e_max = max_exponent(&coeffs).unwrap();
            let eb = 1e-4;
            let planes = planes_for_bound(e_max, eb).unwrap();
            let fixed = to_fixed(&coeffs, e_max);
            let mut w = BitWriter::new();
            ec_encode_block(&fixed, planes, &mut w);
            let (bytes, bits) = w.into_bytes();
            let mut r = BitReader::new(&bytes, bits);
            let decoded = ec_decode_block(64, planes, &mut r).unwrap();
            let recon = from_fixed(&decoded, e_max);
            let bound = (2f64).powi(e_max - planes as i32);
            for (a, b) in coeffs.iter().zip(&recon) {
                // truncation half-ulp + fixed-point rounding
                let ulp = (2f64).powi(e_max + 1 - FRACTION_BITS as i32);
                assert!((a - b).abs() <= bound + ulp, "{a} vs {b}");
            }
            // decoder output matches the analytic truncated reconstruction
            for (d, &f) in decoded.iter().zip(&fixed) {
                assert_eq!(*d, truncated_recon(f, planes));
            }
        }
    }

    #[test]
    fn ec_zero_planes_zero_reconstruction() {
        let coeffs = vec![0.25, -0.1, 0.05, 0.0];
        let e_max = max_exponent(&coeffs).unwrap();
        let planes = planes_for_bound(e_max, 10.0).unwrap();
        assert_eq!(planes, 0);
        let fixed = to_fixed(&coeffs, e_max);
        let mut w = BitWriter::new();
        ec_encode_block(&fixed, planes, &mut w);
        assert_eq!(w.bit_len(), 0);
        let (bytes, bits) = w.into_bytes();
        let mut r = BitReader::new(&bytes, bits);
        let decoded = ec_decode_block(4, planes, &mut r).unwrap();
        assert!(decoded.iter().all(|&m| m == 0));
    }

    #[test]
    fn plane_monotonicity() {
        // Pure truncation error is pointwise non-increasing in planes_kept.
        // The half-ulp decoder additionally always stays inside the
        // per-plane worst-case bound 2^cut (which itself halves per plane);
        // it is not pointwise monotone for values near a bin midpoint.
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let coeffs: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let e_max = max_exponent(&coeffs).unwrap();
        let fixed = to_fixed(&coeffs, e_max);
        let mut prev_trunc: Vec<u64> = vec![u64::MAX; 16];
        for planes in 0..=FRACTION_BITS {
            let cut = FRACTION_BITS - planes;
            for (i, &f) in fixed.iter().enumerate() {
                let trunc_err = f.unsigned_abs() - ((f.unsigned_abs() >> cut) << cut);
                assert!(trunc_err <= prev_trunc[i], "planes {planes} coeff {i}");
                prev_trunc[i] = trunc_err;
                let half_ulp_err = (f - truncated_recon(f, planes)).unsigned_abs();
                let bound = if planes == 0 {
                    f.unsigned_abs()
                } else {
                    1u64 << cut.max(1)
                };
                assert!(half_ulp_err <= bound, "planes {planes} coeff {i}");
            }
        }
    }

    #[test]
    fn significant_bits_examples() {
        let planes = 8;
        assert_eq!(significant_bits(0, planes), 0);
        // leading bit only
        let top = 1i64 << (FRACTION_BITS - 1);
        assert_eq!(significant_bits(top, planes), 1);
        // binary 1011 at the top of the range
        let m = 0b1011i64 << (FRACTION_BITS - 4);
        assert_eq!(significant_bits(m, planes), 4);
    }

    #[test]
    fn zigzag_starts_at_dc() {
        let z = zigzag_order(2);
        assert_eq!(z[0], 0);
        assert_eq!(z.len(), 16);
        let mut sorted = z.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn float_exponent_matches_log2() {
        for &x in &[1.0, 1.5, 2.0, 0.75, 1e-9, 3.7e11] {
            assert_eq!(float_exponent(x), x.abs().log2().floor() as i32, "{x}");
        }
    }
}
