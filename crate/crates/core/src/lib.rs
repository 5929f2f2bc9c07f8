//! Gray-level image segmentation by iterated mean-shift filtering, with two
//! stopping rules: the absolute entropy difference between consecutive
//! iterates, and the entropy of their pixel-wise difference in `Z_n`.

pub mod cli;
pub mod entropy;
pub mod error;
pub mod imageio;
pub mod meanshift;
pub mod ring;

pub use entropy::{
    entropy, histogram, nu, nu_hat, strongly_equivalent, weakly_equivalent, EntropyValue, Histogram,
};
pub use error::RingError;
pub use imageio::{
    extract_profile, load_image, save_image, write_trace_csv, ImageFormat, ImageIoError,
    ProfileLine,
};
pub use meanshift::{
    criterion_value, mean_shift_filter_pass, segment, segment_with, CriterionConfig, CriterionKind,
    IterationTrace, MeanShiftParams, SegmentationResult, StopReason, TraceEntry,
};
pub use ring::{scalar_image, RingImage, ScalarWitness, DEFAULT_MODULUS};
