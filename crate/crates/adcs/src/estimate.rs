//! Sampling-based bit-rate and PSNR estimation for both codec families.
//!
//! The predictor-codec estimators work from a probability histogram of
//! prediction errors (Eqs. 5–11 style closed forms); the transform-codec
//! estimator point-samples significant-bit counts inside transformed
//! blocks and interpolates.

use crate::codec::CodecFamily;
use crate::encode::{
    effective_bound, max_exponent, planes_for_bound, significant_bits, to_fixed, truncated_recon,
    FRACTION_BITS, MAX_BLOCK_EXPONENT, MIN_BLOCK_EXPONENT,
};
use crate::field::{Block, Dtype, SamplingConfig};
use crate::quantize::QuantizerSpec;
use crate::transform::{bot_forward, BotMatrix};
use thiserror::Error;

/// Default histogram resolution.
pub const DEFAULT_N_PDF: usize = 65_535;

/// Empirical implementation-gap offset added to the entropy bit-rate of
/// the predictor codec.
pub const DEFAULT_SZ_OFFSET: f64 = 0.5;

/// Implementation-gap offset for the transform codec: per value, the
/// plane coder also spends the trailing kept-zero bits below the lowest
/// significant bit (≈1 on dense data), one sign bit per significant
/// coefficient, and the per-block exponent header.
pub const DEFAULT_EC_OFFSET: f64 = 2.0;

/// Reported in place of an infinite PSNR (zero MSE).
pub const PSNR_SENTINEL: f64 = 999.0;

/// Storage cost of one unpredictable value in the predictor codec's
/// payload: an 8-byte position index plus the raw 8-byte value.
const UNPREDICTABLE_COST_BITS: f64 = 128.0;

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("cannot estimate from an empty sample")]
    EmptySample,
    #[error("invalid quantization bin size {0}")]
    InvalidDelta(f64),
}

/// Uniform-bin histogram of sampled values over [−A, A], A = max |sample|.
#[derive(Debug, Clone)]
pub struct ErrorHistogram {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
    prefix: Vec<u64>,
    total: u64,
}

impl ErrorHistogram {
    pub fn build(samples: &[f64], n_pdf: usize) -> Result<Self, EstimateError> {
        if samples.is_empty() || n_pdf == 0 {
            return Err(EstimateError::EmptySample);
        }
        let mut amp = samples.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        if amp == 0.0 {
            amp = 1.0;
        }
        let mut counts = vec![0u64; n_pdf];
        let width = 2.0 * amp / n_pdf as f64;
        for &x in samples {
            let b = (((x + amp) / width) as usize).min(n_pdf - 1);
            counts[b] += 1;
        }
        Ok(Self::from_counts(-amp, amp, counts))
    }

    /// Assemble directly from bin counts (range must be nonempty).
    pub fn from_counts(lo: f64, hi: f64, counts: Vec<u64>) -> Self {
        let mut prefix = Vec::with_capacity(counts.len() + 1);
        let mut acc = 0u64;
        prefix.push(0);
        for &c in &counts {
            acc += c;
            prefix.push(acc);
        }
        ErrorHistogram {
            lo,
            hi,
            total: acc,
            counts,
            prefix,
        }
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn probability(&self, bin: usize) -> f64 {
        self.counts[bin] as f64 / self.total as f64
    }

    /// Interpolated cumulative mass strictly left of `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return 1.0;
        }
        let w = self.bin_width();
        let pos = (x - self.lo) / w;
        let b = (pos as usize).min(self.counts.len() - 1);
        let frac = pos - b as f64;
        (self.prefix[b] as f64 + self.counts[b] as f64 * frac) / self.total as f64
    }

    /// Mass of the histogram inside [a, b).
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            0.0
        } else {
            self.cdf(b) - self.cdf(a)
        }
    }

    /// p-quantile, resolved to the center of the containing bin. Bin-center
    /// resolution (rather than in-bin interpolation) lets degenerate
    /// point-mass inputs surface as non-increasing quantiles downstream.
    pub fn quantile(&self, p: f64) -> f64 {
        let target = p.clamp(0.0, 1.0) * self.total as f64;
        let w = self.bin_width();
        let mut b = self
            .prefix
            .partition_point(|&c| (c as f64) < target)
            .saturating_sub(1)
            .min(self.counts.len() - 1);
        while self.counts[b] == 0 && b + 1 < self.counts.len() {
            b += 1;
        }
        self.lo + (b as f64 + 0.5) * w
    }
}

/// Convenience alias mirroring the selector's vocabulary.
pub fn build_histogram(samples: &[f64], n_pdf: usize) -> Result<ErrorHistogram, EstimateError> {
    ErrorHistogram::build(samples, n_pdf)
}

/// Predicted quality of one codec on one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityEstimate {
    pub family: CodecFamily,
    /// Bits per value.
    pub bitrate: f64,
    /// dB; [`PSNR_SENTINEL`] stands in for infinity.
    pub psnr: f64,
    pub mse: f64,
}

impl QualityEstimate {
    pub fn compression_ratio(&self, dtype: Dtype) -> f64 {
        if self.bitrate <= 0.0 {
            f64::INFINITY
        } else {
            dtype.bits() as f64 / self.bitrate
        }
    }
}

/// Shannon entropy (bits/value) of histogram mass aggregated into the
/// quantizer's bins; overflow mass folds into the two end bins.
pub fn entropy_bitrate(hist: &ErrorHistogram, spec: &QuantizerSpec) -> f64 {
    let bounds = spec.boundaries();
    let n = spec.bin_count();
    let mut h = 0.0;
    for i in 0..n {
        let a = if i == 0 { f64::NEG_INFINITY } else { bounds[i] };
        let b = if i == n - 1 {
            f64::INFINITY
        } else {
            bounds[i + 1]
        };
        let p = hist.mass_in(a.max(hist.lo - 1.0), b.min(hist.hi + 1.0));
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h.clamp(0.0, (n as f64).log2())
}

/// Eq. (9)-style predictor bit-rate: entropy over δ-wide bins centered on
/// zero, plus the implementation-gap offset.
pub fn estimate_sz_bitrate(hist: &ErrorHistogram, delta: f64) -> Result<f64, EstimateError> {
    estimate_sz_bitrate_with_offset(hist, delta, DEFAULT_SZ_OFFSET)
}

pub fn estimate_sz_bitrate_with_offset(
    hist: &ErrorHistogram,
    delta: f64,
    offset: f64,
) -> Result<f64, EstimateError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(EstimateError::InvalidDelta(delta));
    }
    let span = (hist.hi - hist.lo) / delta;
    let max_rate = (crate::quantize::DEFAULT_BIN_COUNT as f64).log2();
    // errors beyond the quantizer's reach are stored raw rather than coded
    let reach = crate::quantize::DEFAULT_BIN_COUNT as f64 * delta / 2.0;
    let p_out = (1.0 - hist.mass_in(-reach, reach)).max(0.0);
    let n_samples = hist.total as f64;
    let h = if span * 10.0 > n_samples {
        // Too few samples per δ-bin: the plug-in estimate saturates near
        // log2(sample count). Rebin coarsely enough that every bin is well
        // populated and use the differential limit H(δ) ≈ h(X) − log2 δ.
        let k = (n_samples.sqrt().ceil() as usize).clamp(1, hist.counts.len());
        let group = hist.counts.len().div_ceil(k);
        let w = hist.bin_width() * group as f64;
        let mut hd = 0.0;
        for chunk in hist.counts.chunks(group) {
            let c: u64 = chunk.iter().sum();
            if c > 0 {
                let p = c as f64 / n_samples;
                hd -= p * (p / w).log2();
            }
        }
        hd - delta.log2()
    } else {
        // aggregate into bins [iδ − δ/2, iδ + δ/2), in-reach bins only
        let first = ((hist.lo / delta) - 0.5).floor() as i64;
        let last = ((hist.hi / delta) + 0.5).ceil() as i64;
        let mut h = 0.0;
        for i in first..=last {
            let center = i as f64 * delta;
            if center.abs() > reach {
                continue;
            }
            let p = hist.mass_in((i as f64 - 0.5) * delta, (i as f64 + 0.5) * delta);
            if p > 0.0 {
                h -= p * p.log2();
            }
        }
        h
    };
    Ok(h.clamp(0.0, max_rate) + p_out * UNPREDICTABLE_COST_BITS + offset)
}

/// Estimated serialized Huffman-table size in bits: one byte per symbol
/// over the dense span of occupied δ-bins, plus the fixed header.
pub fn estimate_sz_table_bits(hist: &ErrorHistogram, delta: f64) -> f64 {
    let span = ((hist.hi - hist.lo) / delta + 1.0).min(crate::quantize::DEFAULT_BIN_COUNT as f64);
    (span + 9.0) * 8.0
}

/// Eq. (10): PSNR of linear quantization with bin size δ, assuming in-bin
/// errors uniform.
pub fn estimate_sz_psnr(vr: f64, delta: f64) -> f64 {
    20.0 * (vr / delta).log10() + 10.0 * 12f64.log10()
}

/// Eq. (11): the same PSNR written against a relative error bound
/// (δ = 2·eb_rel·VR).
pub fn psnr_from_eb(eb_rel: f64) -> f64 {
    -20.0 * eb_rel.log10() + 10.0 * 3f64.log10()
}

/// Inverts Eq. (10): bin size that linear quantization needs to reach a
/// target PSNR.
pub fn delta_from_psnr(vr: f64, psnr_target: f64) -> f64 {
    vr * 12f64.sqrt() * 10f64.powf(-psnr_target / 20.0)
}

/// Static-quantizer MSE: Σ δ_i³·P(m_i)/12 with P read as histogram density,
/// i.e. Σ δ_i²·mass_i/12.
pub fn estimate_mse_static(hist: &ErrorHistogram, spec: &QuantizerSpec) -> f64 {
    let bounds = spec.boundaries();
    let n = spec.bin_count();
    let mut mse = 0.0;
    for i in 0..n {
        let a = if i == 0 { f64::NEG_INFINITY } else { bounds[i] };
        let b = if i == n - 1 {
            f64::INFINITY
        } else {
            bounds[i + 1]
        };
        let mass = hist.mass_in(a.max(hist.lo - 1.0), b.min(hist.hi + 1.0));
        let width = bounds[i + 1] - bounds[i];
        mse += width * width * mass / 12.0;
    }
    mse
}

/// Closed-form quality of an equal-probability quantizer with 2n−1 bins:
/// BR = 1 + log₂ n; MSE = Σ δ_i² / (12(2n−1)) since every bin carries mass
/// 1/(2n−1).
pub fn estimate_equalprob(spec: &QuantizerSpec, vr: f64) -> QualityEstimate {
    let bins = spec.bin_count() as f64;
    let n = (bins + 1.0) / 2.0;
    let bitrate = 1.0 + n.log2();
    let sum_sq: f64 = spec
        .boundaries()
        .windows(2)
        .map(|w| (w[1] - w[0]).powi(2))
        .sum();
    let mse = sum_sq / (12.0 * bins);
    let psnr = if mse > 0.0 && vr > 0.0 {
        -10.0 * mse.log10() + 20.0 * vr.log10()
    } else {
        PSNR_SENTINEL
    };
    QualityEstimate {
        family: CodecFamily::Predictor,
        bitrate,
        psnr,
        mse,
    }
}

/// Point-sample statistics of one transformed block.
#[derive(Debug, Clone)]
pub struct EcStats {
    /// (flat position, n_sb) at the sampled positions.
    pub samples: Vec<(usize, f64)>,
    /// Mean interpolated n_sb over the whole block.
    pub mean_nsb: f64,
    /// Sum of squared truncation errors at the sampled positions, in
    /// original value units.
    pub sq_err_sum: f64,
}

/// Sampled-block estimate of the transform codec: BR = mean significant-bit
/// count (interpolated between sampled in-block positions), PSNR from the
/// sampled truncation errors.
pub fn estimate_ec(
    blocks: &[Block],
    eb_abs: f64,
    vr: f64,
    bot: &BotMatrix,
) -> Result<QualityEstimate, EstimateError> {
    if blocks.is_empty() {
        return Err(EstimateError::EmptySample);
    }
    let ndim = blocks[0].ndim;
    let slots = blocks[0].slots();
    let m = SamplingConfig::ec_points(ndim).min(slots);
    let eb_eff = effective_bound(eb_abs, ndim);
    if !(eb_eff > 0.0 && eb_eff.is_finite()) {
        return Err(EstimateError::InvalidDelta(eb_abs));
    }
    let positions: Vec<usize> = (0..m).map(|i| i * (slots - 1) / (m - 1).max(1)).collect();
    let mut nsb_sum = 0.0;
    let mut sq_err = 0.0;
    let mut n_err = 0usize;
    for block in blocks {
        let stats = block_ec_stats(block, &positions, eb_eff, bot);
        nsb_sum += stats.mean_nsb;
        sq_err += stats.sq_err_sum;
        n_err += stats.samples.len();
    }
    let bitrate = nsb_sum / blocks.len() as f64;
    let mse = sq_err / n_err.max(1) as f64;
    let psnr = if mse > 0.0 && vr > 0.0 {
        -10.0 * mse.log10() + 20.0 * vr.log10()
    } else {
        PSNR_SENTINEL
    };
    Ok(QualityEstimate {
        family: CodecFamily::Transform,
        bitrate,
        psnr,
        mse,
    })
}

fn block_ec_stats(block: &Block, positions: &[usize], eb_eff: f64, bot: &BotMatrix) -> EcStats {
    let mut coeffs = block.values.clone();
    bot_forward(&mut coeffs, block.ndim, bot);
    let slots = coeffs.len();
    let e_max = match max_exponent(&coeffs) {
        Some(e) => e.clamp(MIN_BLOCK_EXPONENT, MAX_BLOCK_EXPONENT),
        None => {
            // all-zero block: zero bits, zero error
            return EcStats {
                samples: positions.iter().map(|&p| (p, 0.0)).collect(),
                mean_nsb: 0.0,
                sq_err_sum: 0.0,
            };
        }
    };
    let planes = planes_for_bound(e_max, eb_eff).expect("positive bound");
    let fixed = to_fixed(&coeffs, e_max);
    let ulp = (2f64).powi(e_max + 1 - FRACTION_BITS as i32);
    let mut samples = Vec::with_capacity(positions.len());
    let mut sq_err_sum = 0.0;
    for &p in positions {
        let nsb = significant_bits(fixed[p], planes) as f64;
        samples.push((p, nsb));
        let err = (fixed[p] - truncated_recon(fixed[p], planes)) as f64 * ulp;
        sq_err_sum += err * err;
    }
    // piecewise-linear interpolation of n_sb over flat block order
    let mut total = 0.0;
    for w in samples.windows(2) {
        let (p0, v0) = w[0];
        let (p1, v1) = w[1];
        let span = (p1 - p0) as f64;
        // positions p0..p1 (half-open), linear in between
        for p in p0..p1 {
            let t = (p - p0) as f64 / span;
            total += v0 + (v1 - v0) * t;
        }
    }
    total += samples.last().map(|&(_, v)| v).unwrap_or(0.0);
    EcStats {
        mean_nsb: total / slots as f64,
        samples,
        sq_err_sum,
    }
}
