//! Deterministic synthetic field generators for testing and benchmarking.

use crate::field::{Dtype, Field};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::str::FromStr;

/// Available generator kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    SmoothSine,
    Ramp,
    GaussianNoise,
    TurbulenceMix,
    PiecewiseConstant,
}

impl FromStr for SynthKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "smooth-sine" => Ok(SynthKind::SmoothSine),
            "ramp" => Ok(SynthKind::Ramp),
            "gaussian-noise" => Ok(SynthKind::GaussianNoise),
            "turbulence-mix" => Ok(SynthKind::TurbulenceMix),
            "piecewise-constant" => Ok(SynthKind::PiecewiseConstant),
            other => Err(format!(
                "unknown synthetic kind '{other}' (expected smooth-sine|ramp|gaussian-noise|turbulence-mix|piecewise-constant)"
            )),
        }
    }
}

impl std::fmt::Display for SynthKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SynthKind::SmoothSine => "smooth-sine",
            SynthKind::Ramp => "ramp",
            SynthKind::GaussianNoise => "gaussian-noise",
            SynthKind::TurbulenceMix => "turbulence-mix",
            SynthKind::PiecewiseConstant => "piecewise-constant",
        })
    }
}

/// Generate one field. Identical (kind, dims, seed) inputs always produce
/// identical data.
pub fn generate(kind: SynthKind, name: &str, dims: &[usize], seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: usize = dims.iter().product();
    let data = match kind {
        SynthKind::SmoothSine => smooth_sine(dims, n, &mut rng),
        SynthKind::Ramp => ramp(dims, n, &mut rng),
        SynthKind::GaussianNoise => (0..n).map(|_| gaussian(&mut rng)).collect(),
        SynthKind::TurbulenceMix => turbulence_mix(dims, n, &mut rng),
        SynthKind::PiecewiseConstant => piecewise_constant(dims, n, &mut rng),
    };
    Field::new(name, Dtype::F64, dims.to_vec(), data).expect("generator output is well-formed")
}

fn coords_of(idx: usize, dims: &[usize]) -> Vec<f64> {
    let mut c = Vec::with_capacity(dims.len());
    let mut rest = idx;
    for &d in dims.iter().rev() {
        c.push((rest % d) as f64 / d as f64);
        rest /= d;
    }
    c.reverse();
    c
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn smooth_sine(dims: &[usize], n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let freqs: Vec<f64> = dims.iter().map(|_| rng.gen_range(1.0..4.0)).collect();
    let phases: Vec<f64> = dims
        .iter()
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();
    (0..n)
        .map(|i| {
            coords_of(i, dims)
                .iter()
                .zip(freqs.iter().zip(&phases))
                .map(|(&x, (&f, &p))| (std::f64::consts::TAU * f * x + p).sin())
                .product()
        })
        .collect()
}

fn ramp(dims: &[usize], n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let slopes: Vec<f64> = dims.iter().map(|_| rng.gen_range(-2.0..2.0)).collect();
    let offset: f64 = rng.gen_range(-1.0..1.0);
    (0..n)
        .map(|i| {
            offset
                + coords_of(i, dims)
                    .iter()
                    .zip(&slopes)
                    .map(|(&x, &s)| s * x)
                    .sum::<f64>()
        })
        .collect()
}

/// A superposition of random plane-wave modes with a power-law amplitude
/// spectrum, plus a white-noise floor. The spectral slope and noise level
/// are drawn from the seed, so a corpus spans smooth wave-dominated fields
/// through rough noise-dominated ones.
fn turbulence_mix(dims: &[usize], n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let ndim = dims.len();
    let n_modes = 8usize;
    let slope: f64 = rng.gen_range(0.8..2.2);
    let noise_amp: f64 = 10f64.powf(rng.gen_range(-1.3..-0.3));
    let modes: Vec<(Vec<f64>, f64, f64)> = (1..=n_modes)
        .map(|k| {
            let wave: Vec<f64> = (0..ndim)
                .map(|_| rng.gen_range(-(k as f64) - 2.0..k as f64 + 2.0))
                .collect();
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let amp = (k as f64).powf(-slope);
            (wave, phase, amp)
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let c = coords_of(i, dims);
        let mut v = 0.0;
        for (wave, phase, amp) in &modes {
            let arg: f64 = wave
                .iter()
                .zip(&c)
                .map(|(&w, &x)| std::f64::consts::TAU * w * x)
                .sum();
            v += amp * (arg + phase).sin();
        }
        v += noise_amp * gaussian(rng);
        out.push(v);
    }
    out
}

fn piecewise_constant(dims: &[usize], n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let segments = 5usize;
    let n_regions = segments.pow(dims.len() as u32);
    let levels: Vec<f64> = (0..n_regions).map(|_| rng.gen_range(-10.0..10.0)).collect();
    (0..n)
        .map(|i| {
            let region = coords_of(i, dims).iter().fold(0usize, |acc, &x| {
                acc * segments + ((x * segments as f64) as usize).min(segments - 1)
            });
            levels[region]
        })
        .collect()
}
