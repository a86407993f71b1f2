//! Number variance and pair correlation of dilated integer sequences
//! `{α·aₙ mod 1}`, additive energy, and numerical checks of the estimates
//! that connect them.
//!
//! Points on the circle are 128-bit fixed point numerators, so dilation and
//! window membership are exact.

pub mod energy;
pub mod error;
pub mod fixed;
pub mod harness;
pub mod seqgen;
pub mod stats;
pub mod sum;
pub mod theory;

pub use error::{Error, Result};
pub use fixed::FixedPointReal;
pub use seqgen::{
    dilate_mod1, generate_sequence, sample_alpha, IntegerSequence, PointSet, SequenceSpec,
};
pub use stats::{TestFunction, WindowParams};
