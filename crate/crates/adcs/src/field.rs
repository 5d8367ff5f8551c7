//! n-dimensional floating-point fields, block access, and the index
//! folding/unfolding used by the block transform.

use thiserror::Error;

/// Block edge length along every dimension.
pub const BLOCK_EDGE: usize = 4;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("byte length {got} does not match dims {dims:?} x {elem} bytes")]
    SizeMismatch {
        got: usize,
        dims: Vec<usize>,
        elem: usize,
    },
    #[error("non-finite value at element {index}")]
    NonFiniteValue { index: usize },
    #[error("unsupported dimensionality {0} (must be 1..=3)")]
    BadDims(usize),
    #[error("unfold/fold axis {axis} out of range for {ndim}-dimensional block")]
    AxisOutOfRange { axis: usize, ndim: usize },
    #[error("sampling rate {0} outside (0, 1]")]
    BadSamplingRate(f64),
}

/// Element precision of a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    pub fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    pub fn bits(self) -> usize {
        self.size() * 8
    }
}

/// An n-dimensional floating-point array, the unit of compression and
/// selection. Data is stored row-major (last dimension fastest) as f64
/// regardless of the declared element precision.
#[derive(Debug, Clone)]
pub struct Field {
    pub name: String,
    pub dtype: Dtype,
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

impl Field {
    pub fn new(
        name: impl Into<String>,
        dtype: Dtype,
        dims: Vec<usize>,
        data: Vec<f64>,
    ) -> Result<Self, FieldError> {
        if dims.is_empty() || dims.len() > 3 || dims.contains(&0) {
            return Err(FieldError::BadDims(dims.len()));
        }
        let n: usize = dims.iter().product();
        if n != data.len() {
            return Err(FieldError::SizeMismatch {
                got: data.len(),
                dims,
                elem: 1,
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFiniteValue { index });
        }
        Ok(Field {
            name: name.into(),
            dtype,
            dims,
            data,
        })
    }

    /// Ingest a headerless little-endian IEEE-754 array.
    pub fn from_le_bytes(
        name: impl Into<String>,
        bytes: &[u8],
        dims: Vec<usize>,
        dtype: Dtype,
    ) -> Result<Self, FieldError> {
        if dims.is_empty() || dims.len() > 3 || dims.contains(&0) {
            return Err(FieldError::BadDims(dims.len()));
        }
        let n: usize = dims.iter().product();
        if bytes.len() != n * dtype.size() {
            return Err(FieldError::SizeMismatch {
                got: bytes.len(),
                dims,
                elem: dtype.size(),
            });
        }
        let data: Vec<f64> = match dtype {
            Dtype::F32 => bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect(),
            Dtype::F64 => bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        };
        Field::new(name, dtype, dims, data)
    }

    /// Serialize in the ingestion byte layout.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.data.len() * self.dtype.size());
        match self.dtype {
            Dtype::F32 => {
                for &v in &self.data {
                    out.extend_from_slice(&(v as f32).to_le_bytes());
                }
            }
            Dtype::F64 => {
                for &v in &self.data {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Value range (max - min), recomputed from the data.
    pub fn value_range(&self) -> f64 {
        let (lo, hi) = self.min_max();
        hi - lo
    }

    /// Number of 4^n blocks along each dimension (partial blocks count).
    pub fn block_grid(&self) -> Vec<usize> {
        self.dims.iter().map(|&d| d.div_ceil(BLOCK_EDGE)).collect()
    }

    pub fn block_count(&self) -> usize {
        self.block_grid().iter().product()
    }

    /// Origin of the block with the given row-major grid index.
    pub fn block_origin(&self, grid_index: usize) -> Vec<usize> {
        let grid = self.block_grid();
        let mut rem = grid_index;
        let mut origin = vec![0usize; grid.len()];
        for ax in (0..grid.len()).rev() {
            origin[ax] = (rem % grid[ax]) * BLOCK_EDGE;
            rem /= grid[ax];
        }
        origin
    }

    /// Copy one 4^n block out of the field. Out-of-range slots are filled
    /// by edge replication and flagged as padded.
    pub fn extract_block(&self, origin: &[usize]) -> Block {
        let ndim = self.ndim();
        let slots = BLOCK_EDGE.pow(ndim as u32);
        let mut values = Vec::with_capacity(slots);
        let mut padded = Vec::with_capacity(slots);
        for bi in 0..slots {
            let mut coords = [0usize; 3];
            let mut is_pad = false;
            for ax in 0..ndim {
                let off = block_digit(bi, ax);
                let c = origin[ax] + off;
                if c >= self.dims[ax] {
                    coords[ax] = self.dims[ax] - 1;
                    is_pad = true;
                } else {
                    coords[ax] = c;
                }
            }
            values.push(self.data[self.flat_index(&coords[..ndim])]);
            padded.push(is_pad);
        }
        Block {
            origin: origin.to_vec(),
            ndim,
            values,
            padded,
        }
    }

    /// Row-major flat index of an n-dim coordinate.
    pub fn flat_index(&self, coords: &[usize]) -> usize {
        let mut idx = 0usize;
        for (ax, &c) in coords.iter().enumerate() {
            idx = idx * self.dims[ax] + c;
        }
        idx
    }

    /// Deterministic stride-based block sampling. Returns ceil(total * r_sp)
    /// blocks spread evenly over the row-major block grid.
    pub fn sample_block_indices(&self, cfg: &SamplingConfig) -> Result<Vec<usize>, FieldError> {
        if !(cfg.r_sp > 0.0 && cfg.r_sp <= 1.0) {
            return Err(FieldError::BadSamplingRate(cfg.r_sp));
        }
        let total = self.block_count();
        let count = ((total as f64 * cfg.r_sp).ceil() as usize).clamp(1, total);
        Ok((0..count).map(|i| i * total / count).collect())
    }

    pub fn sample_blocks(&self, cfg: &SamplingConfig) -> Result<Vec<Block>, FieldError> {
        let idx = self.sample_block_indices(cfg)?;
        Ok(idx
            .into_iter()
            .map(|i| self.extract_block(&self.block_origin(i)))
            .collect())
    }
}

/// Block-local digit of flat index `bi` along block dimension `ax`
/// (dimension 0 is the fastest-varying one in block storage).
#[inline]
pub fn block_digit(bi: usize, ax: usize) -> usize {
    (bi >> (2 * ax)) & 3
}

/// A 4^n block copied out of a field. Slots outside the field extent hold
/// replicated edge values and are marked padded; padded slots are excluded
/// from error statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub origin: Vec<usize>,
    pub ndim: usize,
    pub values: Vec<f64>,
    pub padded: Vec<bool>,
}

impl Block {
    pub fn slots(&self) -> usize {
        BLOCK_EDGE.pow(self.ndim as u32)
    }
}

/// Sampling configuration for the quality estimator.
#[derive(Debug, Clone, Copy)]
pub struct SamplingConfig {
    /// Fraction of blocks sampled, in (0, 1].
    pub r_sp: f64,
}

impl SamplingConfig {
    pub fn new(r_sp: f64) -> Self {
        SamplingConfig { r_sp }
    }

    /// Per-block point-sample count for embedded-coding estimation.
    pub fn ec_points(ndim: usize) -> usize {
        match ndim {
            1 => 3,
            2 => 9,
            _ => 16,
        }
    }
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { r_sp: 0.05 }
    }
}

/// Unfold a 4^n block along axis `axis` (1-based) into a row-major
/// 4 x 4^(n-1) matrix. Element with block digits (i_1..i_n) lands at
/// row i_axis, column formed by the remaining digits.
pub fn unfold(values: &[f64], ndim: usize, axis: usize) -> Result<Vec<f64>, FieldError> {
    if axis == 0 || axis > ndim {
        return Err(FieldError::AxisOutOfRange { axis, ndim });
    }
    let cols = BLOCK_EDGE.pow(ndim as u32 - 1);
    let mut out = vec![0.0; BLOCK_EDGE * cols];
    for row in 0..BLOCK_EDGE {
        for col in 0..cols {
            out[row * cols + col] = values[matrix_to_block_index(row, col, axis)];
        }
    }
    Ok(out)
}

/// Inverse of [`unfold`].
pub fn fold(matrix: &[f64], ndim: usize, axis: usize) -> Result<Vec<f64>, FieldError> {
    if axis == 0 || axis > ndim {
        return Err(FieldError::AxisOutOfRange { axis, ndim });
    }
    let cols = BLOCK_EDGE.pow(ndim as u32 - 1);
    let mut out = vec![0.0; BLOCK_EDGE * cols];
    for row in 0..BLOCK_EDGE {
        for col in 0..cols {
            out[matrix_to_block_index(row, col, axis)] = matrix[row * cols + col];
        }
    }
    Ok(out)
}

/// Block flat index of the matrix element (row, col) for an unfold along
/// `axis` (1-based): the low axis-1 digits of `col` stay below the row
/// digit, the rest shift one digit up.
#[inline]
pub fn matrix_to_block_index(row: usize, col: usize, axis: usize) -> usize {
    let shift = 2 * (axis - 1);
    let low = col & ((1 << shift) - 1);
    let high = col >> shift;
    low | (row << shift) | (high << (shift + 2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bytes_of(vals: &[f32]) -> Vec<u8> {
        vals.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    #[test]
    fn ingest_computes_value_range() {
        let f = Field::from_le_bytes("x", &bytes_of(&[1.0, 3.0]), vec![2], Dtype::F32).unwrap();
        assert_eq!(f.value_range(), 2.0);
    }

    #[test]
    fn ingest_rejects_size_mismatch() {
        let err = Field::from_le_bytes("x", &bytes_of(&[1.0]), vec![2], Dtype::F32).unwrap_err();
        assert!(matches!(err, FieldError::SizeMismatch { .. }));
    }

    #[test]
    fn ingest_rejects_nan() {
        let err = Field::from_le_bytes("x", &bytes_of(&[1.0, f32::NAN]), vec![2], Dtype::F32)
            .unwrap_err();
        assert!(matches!(err, FieldError::NonFiniteValue { index: 1 }));
    }

    #[test]
    fn sample_blocks_matches_stride_rule_2d() {
        let data = vec![0.0; 64 * 64];
        let f = Field::new("x", Dtype::F64, vec![64, 64], data).unwrap();
        let blocks = f.sample_blocks(&SamplingConfig::new(0.05)).unwrap();
        assert_eq!(blocks.len(), 13); // ceil(256 * 0.05)
    }

    #[test]
    fn sample_blocks_full_cover() {
        let f = Field::new("x", Dtype::F64, vec![16], vec![0.0; 16]).unwrap();
        let idx = f.sample_block_indices(&SamplingConfig::new(1.0)).unwrap();
        assert_eq!(idx, vec![0, 1, 2, 3]);
    }

    #[test]
    fn sample_blocks_1d_half() {
        let f = Field::new("x", Dtype::F64, vec![16], vec![0.0; 16]).unwrap();
        let idx = f.sample_block_indices(&SamplingConfig::new(0.5)).unwrap();
        assert_eq!(idx, vec![0, 2]);
    }

    #[test]
    fn unfold_1d_is_identity() {
        let vals: Vec<f64> = (0..4).map(|i| i as f64).collect();
        let m = unfold(&vals, 1, 1).unwrap();
        assert_eq!(m, vals);
    }

    #[test]
    fn unfold_2d_axis2_transposes() {
        // element (i1, i2) lands at row i2, column i1
        let vals: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let m = unfold(&vals, 2, 2).unwrap();
        for i1 in 0..4 {
            for i2 in 0..4 {
                let block_idx = i1 + 4 * i2;
                assert_eq!(m[i2 * 4 + i1], vals[block_idx]);
            }
        }
    }

    #[test]
    fn fold_unfold_roundtrip_all_axes() {
        for ndim in 1..=3usize {
            let slots = BLOCK_EDGE.pow(ndim as u32);
            let vals: Vec<f64> = (0..slots).map(|i| (i as f64).sin()).collect();
            for axis in 1..=ndim {
                let m = unfold(&vals, ndim, axis).unwrap();
                let back = fold(&m, ndim, axis).unwrap();
                assert_eq!(back, vals, "ndim={ndim} axis={axis}");
            }
        }
    }

    #[test]
    fn unfold_preserves_l2_norm() {
        let vals: Vec<f64> = (0..64).map(|i| (i as f64 * 0.7).cos()).collect();
        let n0: f64 = vals.iter().map(|v| v * v).sum();
        let m = unfold(&vals, 3, 2).unwrap();
        let n1: f64 = m.iter().map(|v| v * v).sum();
        assert!((n0 - n1).abs() < 1e-12 * n0); // summation order differs
    }

    #[test]
    fn padded_block_replicates_edges() {
        let f = Field::new("x", Dtype::F64, vec![5], (0..5).map(|i| i as f64).collect()).unwrap();
        let b = f.extract_block(&[4]);
        assert_eq!(b.values, vec![4.0, 4.0, 4.0, 4.0]);
        assert_eq!(b.padded, vec![false, true, true, true]);
    }

    #[test]
    fn sample_blocks_each_at_most_once() {
        let f = Field::new("x", Dtype::F64, vec![32, 32], vec![0.0; 1024]).unwrap();
        let idx = f.sample_block_indices(&SamplingConfig::new(0.37)).unwrap();
        let mut sorted = idx.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), idx.len());
        let idx2 = f.sample_block_indices(&SamplingConfig::new(0.37)).unwrap();
        assert_eq!(idx, idx2);
    }
}
