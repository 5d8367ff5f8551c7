//! Stage I lossless transforms: the Lorenzo prediction transform and the
//! parametric 4x4 block orthogonal transform, plus their inverses.

use crate::field::{matrix_to_block_index, BLOCK_EDGE};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("transform parameter t={0} outside [0, 1]")]
    ParameterOutOfRange(f64),
}

/// The parametric orthogonal 4x4 transform matrix
/// T = 1/2 [[1,1,1,1],[c,s,-s,-c],[1,-1,-1,1],[s,-c,c,-s]]
/// with s = sqrt(2) sin(pi t / 2), c = sqrt(2) cos(pi t / 2).
///
/// t = 0 gives the Haar-type matrix, t = 1/4 the DCT-II-type matrix,
/// t = 1/2 the Walsh-Hadamard-type matrix.
#[derive(Debug, Clone, Copy)]
pub struct BotMatrix {
    t: f64,
    entries: [[f64; 4]; 4],
}

/// Default transform parameter (DCT-II-type).
pub const DEFAULT_BOT_T: f64 = 0.25;

impl BotMatrix {
    pub fn new(t: f64) -> Result<Self, TransformError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(TransformError::ParameterOutOfRange(t));
        }
        let s = std::f64::consts::SQRT_2 * (std::f64::consts::FRAC_PI_2 * t).sin();
        let c = std::f64::consts::SQRT_2 * (std::f64::consts::FRAC_PI_2 * t).cos();
        let entries = [
            [0.5, 0.5, 0.5, 0.5],
            [0.5 * c, 0.5 * s, -0.5 * s, -0.5 * c],
            [0.5, -0.5, -0.5, 0.5],
            [0.5 * s, -0.5 * c, 0.5 * c, -0.5 * s],
        ];
        Ok(BotMatrix { t, entries })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn entries(&self) -> &[[f64; 4]; 4] {
        &self.entries
    }

    /// max |T T^t - I|
    pub fn orthogonality_defect(&self) -> f64 {
        let t = &self.entries;
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = (0..4).map(|k| t[i][k] * t[j][k]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Apply T along axes 1..n of a 4^n block, in place.
pub fn bot_forward(values: &mut [f64], ndim: usize, m: &BotMatrix) {
    for axis in 1..=ndim {
        apply_axis(values, ndim, axis, m, false);
    }
}

/// Apply T^t along axes n..1 of a 4^n block, in place. Inverse of
/// [`bot_forward`].
pub fn bot_inverse(values: &mut [f64], ndim: usize, m: &BotMatrix) {
    for axis in (1..=ndim).rev() {
        apply_axis(values, ndim, axis, m, true);
    }
}

fn apply_axis(values: &mut [f64], ndim: usize, axis: usize, m: &BotMatrix, transpose: bool) {
    let cols = BLOCK_EDGE.pow(ndim as u32 - 1);
    let t = &m.entries;
    for col in 0..cols {
        let idx = [
            matrix_to_block_index(0, col, axis),
            matrix_to_block_index(1, col, axis),
            matrix_to_block_index(2, col, axis),
            matrix_to_block_index(3, col, axis),
        ];
        let v = [
            values[idx[0]],
            values[idx[1]],
            values[idx[2]],
            values[idx[3]],
        ];
        for r in 0..4 {
            let mut acc = 0.0;
            for i in 0..4 {
                let e = if transpose { t[i][r] } else { t[r][i] };
                acc += e * v[i];
            }
            values[idx[r]] = acc;
        }
    }
}

/// Lorenzo prediction of one point from already-reconstructed neighbors.
/// Out-of-range neighbors read as 0.
#[inline]
pub fn lorenzo_predict(recon: &[f64], dims: &[usize], coords: &[usize]) -> f64 {
    #[inline]
    fn get(recon: &[f64], dims: &[usize], c: &[usize; 3], sub: u8) -> f64 {
        let mut idx = 0usize;
        for (ax, &d) in dims.iter().enumerate() {
            let dec = (sub >> ax) & 1 == 1;
            let v = c[ax];
            if dec {
                if v == 0 {
                    return 0.0;
                }
                idx = idx * d + (v - 1);
            } else {
                idx = idx * d + v;
            }
        }
        recon[idx]
    }

    let mut c = [0usize; 3];
    c[..coords.len()].copy_from_slice(coords);
    match dims.len() {
        1 => get(recon, dims, &c, 0b1),
        2 => get(recon, dims, &c, 0b01) + get(recon, dims, &c, 0b10) - get(recon, dims, &c, 0b11),
        _ => {
            // 7-term inclusion-exclusion over the preceding cube corner
            get(recon, dims, &c, 0b001) + get(recon, dims, &c, 0b010) + get(recon, dims, &c, 0b100)
                - get(recon, dims, &c, 0b011)
                - get(recon, dims, &c, 0b101)
                - get(recon, dims, &c, 0b110)
                + get(recon, dims, &c, 0b111)
        }
    }
}

/// Run the prediction cascade in row-major order. `recon_err` receives each
/// point's flat index and raw prediction error and must return the
/// reconstructed (lossy) error; the reconstructed field uses only those
/// values, so compression and decompression see identical predictions.
///
/// Returns (raw prediction errors, reconstructed field).
pub fn lorenzo_errors(
    data: &[f64],
    dims: &[usize],
    mut recon_err: impl FnMut(usize, f64) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = data.len();
    let mut errors = vec![0.0; n];
    let mut recon = vec![0.0; n];
    let mut coords = vec![0usize; dims.len()];
    for idx in 0..n {
        let pred = lorenzo_predict(&recon, dims, &coords);
        let err = data[idx] - pred;
        errors[idx] = err;
        recon[idx] = pred + recon_err(idx, err);
        advance(&mut coords, dims);
    }
    (errors, recon)
}

/// Rebuild a field from reconstructed prediction errors.
pub fn lorenzo_reconstruct(errs: &[f64], dims: &[usize]) -> Vec<f64> {
    let n = errs.len();
    let mut recon = vec![0.0; n];
    let mut coords = vec![0usize; dims.len()];
    for idx in 0..n {
        let pred = lorenzo_predict(&recon, dims, &coords);
        recon[idx] = pred + errs[idx];
        advance(&mut coords, dims);
    }
    recon
}

#[inline]
fn advance(coords: &mut [usize], dims: &[usize]) {
    for ax in (0..dims.len()).rev() {
        coords[ax] += 1;
        if coords[ax] < dims[ax] {
            return;
        }
        coords[ax] = 0;
    }
}

/// Prediction errors computed against the *original* field values, a cheap
/// stand-in for the reconstruction cascade used by the sampling estimator.
pub fn lorenzo_sample_errors(data: &[f64], dims: &[usize], points: &[Vec<usize>]) -> Vec<f64> {
    points
        .iter()
        .map(|coords| {
            let mut idx = 0usize;
            for (ax, &c) in coords.iter().enumerate() {
                idx = idx * dims[ax] + c;
            }
            data[idx] - lorenzo_predict(data, dims, coords)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn l2(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn haar_matrix_rows() {
        let m = BotMatrix::new(0.0).unwrap();
        let r = std::f64::consts::SQRT_2 / 2.0;
        let row2 = m.entries()[1];
        assert!((row2[0] - r).abs() < 1e-15);
        assert!(row2[1].abs() < 1e-15);
        assert!(row2[2].abs() < 1e-15);
        assert!((row2[3] + r).abs() < 1e-15);
    }

    #[test]
    fn walsh_hadamard_entries() {
        let m = BotMatrix::new(0.5).unwrap();
        for row in m.entries() {
            for &e in row {
                assert!((e.abs() - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn orthogonality_across_parameter_range() {
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            let m = BotMatrix::new(t).unwrap();
            assert!(m.orthogonality_defect() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn parameter_out_of_range_rejected() {
        assert!(BotMatrix::new(1.5).is_err());
        assert!(BotMatrix::new(-0.1).is_err());
    }

    #[test]
    fn haar_constant_block_1d() {
        let m = BotMatrix::new(0.0).unwrap();
        let mut v = [1.0, 1.0, 1.0, 1.0];
        bot_forward(&mut v, 1, &m);
        assert!((v[0] - 2.0).abs() < 1e-14);
        for &x in &v[1..] {
            assert!(x.abs() < 1e-14);
        }
    }

    #[test]
    fn zero_block_stays_zero() {
        let m = BotMatrix::new(0.25).unwrap();
        let mut v = [0.0; 64];
        bot_forward(&mut v, 3, &m);
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn forward_inverse_roundtrip_and_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for ndim in 1..=3usize {
            let m = BotMatrix::new(0.25).unwrap();
            for _ in 0..50 {
                let n = BLOCK_EDGE.pow(ndim as u32);
                let orig: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
                let mut v = orig.clone();
                bot_forward(&mut v, ndim, &m);
                let rel = (l2(&v) / l2(&orig) - 1.0).abs();
                assert!(rel < 1e-10, "norm deviation {rel}");
                bot_inverse(&mut v, ndim, &m);
                for (a, b) in v.iter().zip(&orig) {
                    assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
                }
            }
        }
    }

    #[test]
    fn error_norm_preserved_under_transform() {
        // perturb transformed coefficients, invert, compare L2 of errors
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = BotMatrix::new(0.25).unwrap();
        let orig: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut coeffs = orig.clone();
        bot_forward(&mut coeffs, 3, &m);
        let mut perturbed = coeffs.clone();
        for v in perturbed.iter_mut() {
            *v += rng.gen_range(-1e-3..1e-3);
        }
        let coeff_err: Vec<f64> = coeffs.iter().zip(&perturbed).map(|(a, b)| a - b).collect();
        let mut recon = perturbed;
        bot_inverse(&mut recon, 3, &m);
        let data_err: Vec<f64> = orig.iter().zip(&recon).map(|(a, b)| a - b).collect();
        let rel = (l2(&data_err) / l2(&coeff_err) - 1.0).abs();
        assert!(rel < 1e-10);
    }

    #[test]
    fn lorenzo_constant_1d() {
        let c = 3.5;
        let (errs, recon) = lorenzo_errors(&[c, c, c, c], &[4], |_, e| e);
        assert_eq!(errs, vec![c, 0.0, 0.0, 0.0]);
        assert_eq!(recon, vec![c, c, c, c]);
    }

    #[test]
    fn lorenzo_2d_ramp_interior_zero() {
        let dims = [8usize, 8usize];
        let data: Vec<f64> = (0..64).map(|i| (i / 8 + i % 8) as f64).collect();
        let (errs, _) = lorenzo_errors(&data, &dims, |_, e| e);
        for i in 1..8 {
            for j in 1..8 {
                assert!(errs[i * 8 + j].abs() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn lossless_errors_reconstruct_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dims = [5usize, 7, 6];
        let data: Vec<f64> = (0..210).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let (errs, recon) = lorenzo_errors(&data, &dims, |_, e| e);
        let back = lorenzo_reconstruct(&errs, &dims);
        // decompression replays the same op sequence, so it matches the
        // compression-side reconstruction bit for bit
        assert_eq!(back, recon);
        for (a, b) in back.iter().zip(&data) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pointwise_error_equality_with_quantizing_callback() {
        // x - x_recon == e - e_recon, bit exact
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let dims = [12usize, 9];
        let data: Vec<f64> = (0..108).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let delta = 0.01;
        let quant = |e: f64| (e / delta).round() * delta;
        let mut recon_errs = vec![0.0; data.len()];
        let (errs, recon) = lorenzo_errors(&data, &dims, |i, e| {
            recon_errs[i] = quant(e);
            recon_errs[i]
        });
        for i in 0..data.len() {
            let lhs = data[i] - recon[i];
            let rhs = errs[i] - recon_errs[i];
            assert!((lhs - rhs).abs() < 1e-9 * 2.0, "i={i}");
        }
    }
}
