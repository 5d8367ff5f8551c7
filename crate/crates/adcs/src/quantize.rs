//! Stage II static quantizers: linear, log-scale, and equal-probability
//! vector quantization with midpoint reconstruction.

use crate::estimate::ErrorHistogram;
use thiserror::Error;

/// Default number of quantization bins (2n-1, odd).
pub const DEFAULT_BIN_COUNT: usize = 65_535;

/// Symbol reserved for out-of-range ("unpredictable") values.
pub const UNPREDICTABLE_CODE: u32 = 0;

#[derive(Debug, Error)]
pub enum QuantizeError {
    #[error("invalid error bound {0} (must be > 0)")]
    InvalidBound(f64),
    #[error("bin count {0} must be an odd integer >= 3")]
    InvalidBinCount(usize),
    #[error("histogram empty or mass not divisible into distinct bins")]
    EmptyHistogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantizerKind {
    Linear,
    Log,
    EqualProb,
}

/// A (2n-1)-bin vector quantizer: strictly increasing boundaries
/// s_1..s_2n, half-open bins [s_i, s_{i+1}), midpoint reconstruction.
/// The top boundary itself is treated as in range.
#[derive(Debug, Clone)]
pub struct QuantizerSpec {
    kind: QuantizerKind,
    boundaries: Vec<f64>,
    // linear fast path
    linear_delta: Option<f64>,
}

impl QuantizerSpec {
    /// Uniform bins of size 2*eb_abs centered on zero; reconstruction error
    /// of any in-range value is at most eb_abs.
    pub fn linear(eb_abs: f64, bin_count: usize) -> Result<Self, QuantizeError> {
        if !(eb_abs > 0.0 && eb_abs.is_finite()) {
            return Err(QuantizeError::InvalidBound(eb_abs));
        }
        check_bin_count(bin_count)?;
        let delta = 2.0 * eb_abs;
        let half = (bin_count / 2) as f64;
        let boundaries = (0..=bin_count)
            .map(|i| (i as f64 - half - 0.5) * delta)
            .collect();
        Ok(QuantizerSpec {
            kind: QuantizerKind::Linear,
            boundaries,
            linear_delta: Some(delta),
        })
    }

    /// Log-scale bins: center bin of size 2b, side bin i of size
    /// b^i - b^(i-1). The base is the smallest integer >= 2 whose (n-1)-th
    /// power reaches max_abs, so the n-1 exponential bins per side cover it.
    pub fn log_scale(max_abs: f64, bin_count: usize) -> Result<Self, QuantizeError> {
        if !(max_abs > 0.0 && max_abs.is_finite()) {
            return Err(QuantizeError::InvalidBound(max_abs));
        }
        check_bin_count(bin_count)?;
        let n = bin_count.div_ceil(2);
        let b = if n > 1 {
            max_abs.powf(1.0 / (n - 1) as f64).ceil().max(2.0)
        } else {
            max_abs.max(2.0)
        };
        let mut boundaries = vec![0.0; bin_count + 1];
        boundaries[n - 1] = -b;
        boundaries[n] = b;
        let mut acc = b;
        for i in 1..n {
            acc += b.powi(i as i32) - b.powi(i as i32 - 1);
            boundaries[n + i] = acc;
            boundaries[n - 1 - i] = -acc;
        }
        Ok(QuantizerSpec {
            kind: QuantizerKind::Log,
            boundaries,
            linear_delta: None,
        })
    }

    /// Boundaries at histogram quantiles so each bin holds mass
    /// ~1/bin_count. Built from quantiles, not clustering.
    pub fn equal_prob(hist: &ErrorHistogram, bin_count: usize) -> Result<Self, QuantizeError> {
        check_bin_count(bin_count)?;
        let mut boundaries = Vec::with_capacity(bin_count + 1);
        for k in 0..=bin_count {
            boundaries.push(hist.quantile(k as f64 / bin_count as f64));
        }
        if boundaries.windows(2).any(|w| w[1] <= w[0]) {
            return Err(QuantizeError::EmptyHistogram);
        }
        Ok(QuantizerSpec {
            kind: QuantizerKind::EqualProb,
            boundaries,
            linear_delta: None,
        })
    }

    pub fn kind(&self) -> QuantizerKind {
        self.kind
    }

    pub fn bin_count(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn bin_size(&self, i: usize) -> f64 {
        self.boundaries[i + 1] - self.boundaries[i]
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        (self.boundaries[i] + self.boundaries[i + 1]) / 2.0
    }

    /// Bin index of `x`, or None when x lies outside [s_1, s_2n].
    #[inline]
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        let first = self.boundaries[0];
        let last = *self.boundaries.last().unwrap();
        if !(x >= first && x <= last) {
            return None;
        }
        if let Some(delta) = self.linear_delta {
            let k = ((x - first) / delta).floor() as isize;
            return Some(k.clamp(0, self.bin_count() as isize - 1) as usize);
        }
        // count of interior boundaries <= x
        let interior = &self.boundaries[1..self.boundaries.len() - 1];
        Some(interior.partition_point(|&s| s <= x))
    }

    pub fn reconstruct(&self, bin: usize) -> f64 {
        self.midpoint(bin)
    }

    #[cfg(test)]
    pub(crate) fn from_boundaries_for_test(boundaries: Vec<f64>) -> Self {
        QuantizerSpec {
            kind: QuantizerKind::EqualProb,
            boundaries,
            linear_delta: None,
        }
    }
}

fn check_bin_count(bin_count: usize) -> Result<(), QuantizeError> {
    if bin_count < 3 || bin_count.is_multiple_of(2) {
        return Err(QuantizeError::InvalidBinCount(bin_count));
    }
    Ok(())
}

/// Quantized values: symbol per element (0 = unpredictable) plus the raw
/// values of out-of-range elements in scan order.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedField {
    pub codes: Vec<u32>,
    pub unpredictable: Vec<(usize, f64)>,
}

pub fn quantize(xs: &[f64], spec: &QuantizerSpec) -> QuantizedField {
    let mut codes = Vec::with_capacity(xs.len());
    let mut unpredictable = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        match spec.bin_of(x) {
            Some(bin) => codes.push(bin as u32 + 1),
            None => {
                codes.push(UNPREDICTABLE_CODE);
                unpredictable.push((i, x));
            }
        }
    }
    QuantizedField {
        codes,
        unpredictable,
    }
}

pub fn dequantize(q: &QuantizedField, spec: &QuantizerSpec) -> Vec<f64> {
    let mut raw = q.unpredictable.iter();
    q.codes
        .iter()
        .map(|&c| {
            if c == UNPREDICTABLE_CODE {
                raw.next().expect("unpredictable list too short").1
            } else {
                spec.reconstruct(c as usize - 1)
            }
        })
        .collect()
}
