//! Ground-truth quality measurement for verifying estimates and codecs.

use crate::estimate::PSNR_SENTINEL;
use crate::field::Field;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),
}

/// Measured distortion and rate for one original/reconstruction pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub mse: f64,
    pub rmse: f64,
    /// RMSE / value range of the original.
    pub nrmse: f64,
    /// dB; [`PSNR_SENTINEL`] for an exact reconstruction.
    pub psnr: f64,
    pub max_abs_err: f64,
    /// Payload bits per value (header excluded).
    pub bitrate: f64,
    /// Element bits / bit-rate.
    pub compression_ratio: f64,
}

/// Compare a reconstruction against its original. `payload_bits` is the
/// compressed payload size in bits.
pub fn compare(
    original: &Field,
    reconstructed: &Field,
    payload_bits: usize,
) -> Result<QualityReport, MetricsError> {
    if original.dims != reconstructed.dims || original.dtype != reconstructed.dtype {
        return Err(MetricsError::ShapeMismatch(
            original.dims.clone(),
            reconstructed.dims.clone(),
        ));
    }
    let n = original.len() as f64;
    let mut sq = 0.0;
    let mut max_abs = 0.0f64;
    for (a, b) in original.data.iter().zip(&reconstructed.data) {
        let d = a - b;
        sq += d * d;
        max_abs = max_abs.max(d.abs());
    }
    let mse = sq / n;
    let rmse = mse.sqrt();
    let vr = original.value_range();
    let nrmse = if vr > 0.0 { rmse / vr } else { f64::INFINITY };
    let psnr = if rmse > 0.0 && vr > 0.0 {
        -20.0 * nrmse.log10()
    } else {
        PSNR_SENTINEL
    };
    let bitrate = payload_bits as f64 / n;
    let compression_ratio = if bitrate > 0.0 {
        original.dtype.bits() as f64 / bitrate
    } else {
        f64::INFINITY
    };
    Ok(QualityReport {
        mse,
        rmse,
        nrmse,
        psnr,
        max_abs_err: max_abs,
        bitrate,
        compression_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Dtype;

    fn field(data: Vec<f64>) -> Field {
        Field::new("f", Dtype::F32, vec![data.len()], data).unwrap()
    }

    #[test]
    fn identical_fields_sentinel_psnr() {
        let a = field(vec![1.0, 2.0, 3.0, 4.0]);
        let r = compare(&a, &a.clone(), 32).unwrap();
        assert_eq!(r.mse, 0.0);
        assert_eq!(r.psnr, PSNR_SENTINEL);
        assert_eq!(r.bitrate, 8.0);
        assert_eq!(r.compression_ratio, 4.0);
    }

    #[test]
    fn constant_offset_closed_form() {
        let a = field((0..100).map(|i| i as f64).collect());
        let delta = 0.5;
        let b = field((0..100).map(|i| i as f64 + delta / 2.0).collect());
        let r = compare(&a, &b, 800).unwrap();
        let vr = 99.0;
        let expect = 20.0 * (vr / (delta / 2.0)).log10();
        assert!((r.psnr - expect).abs() < 1e-9);
        assert!((r.max_abs_err - delta / 2.0).abs() < 1e-12);
    }

    #[test]
    fn psnr_decreases_with_noise() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = field((0..1000).map(|i| (i as f64 * 0.01).sin()).collect());
        let mut last = f64::INFINITY;
        for &amp in &[1e-6, 1e-4, 1e-2, 1.0] {
            let noisy = field(
                a.data
                    .iter()
                    .map(|v| v + rng.gen_range(-amp..amp))
                    .collect(),
            );
            let r = compare(&a, &noisy, 1000).unwrap();
            assert!(r.psnr < last);
            last = r.psnr;
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let a = field(vec![0.0; 8]);
        let b = Field::new("f", Dtype::F32, vec![2, 4], vec![0.0; 8]).unwrap();
        assert!(compare(&a, &b, 1).is_err());
    }
}
