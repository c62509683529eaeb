//! Compressed Hamming-weight-cutoff segment built on the structured
//! purification of the whole mixture.

pub mod alg2;
pub mod encoding;
pub mod structured;

pub use alg2::{
    default_cutoff, run_algorithm2, uncompressed_channel, Alg2Options, Alg2Run, CompressedSegment, KeySpace, SlotFrames,
};
pub use encoding::{binomial_tail, cutoff_for, encoding_error, PositionSpace, StdEncoder};
pub use structured::{StructLayout, StructuredPurification};
