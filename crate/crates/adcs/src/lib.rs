//! Error-bounded lossy compression toolkit for structured floating-point
//! scientific arrays.
//!
//! Two codec families are provided: a prediction-based codec (Lorenzo
//! predictor + linear quantization + Huffman coding) and a block-transform
//! codec (4^n orthogonal block transform + fixed-point bit-plane coding).
//! A sampling-based estimator predicts bit-rate and PSNR for both families,
//! and the selector picks the cheaper codec per field at matched PSNR.

pub mod cli;
pub mod codec;
pub mod encode;
pub mod estimate;
pub mod field;
pub mod metrics;
pub mod quantize;
pub mod select;
pub mod synth;
pub mod transform;

pub use codec::{CodecFamily, CodecParams, CompressedArchive, FieldRecord};
pub use field::{Block, Dtype, Field, SamplingConfig};
pub use select::{BoundSpec, SelectionConfig, SelectionReport};
