// Index loops mirror the summation formulas; negated comparisons reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod beamsplitter;
pub mod detection;
pub mod error;
pub mod export;
pub mod fock;
pub mod jpstates;
pub mod numerics;
pub mod phasespace;
pub mod scalar;
pub mod statistics;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{PolyArg, Real};

pub type FockVectorF32 = fock::FockVector<f32>;
pub type FockVectorF64 = fock::FockVector<f64>;
pub type TwoModeStateF32 = beamsplitter::TwoModeState<f32>;
pub type TwoModeStateF64 = beamsplitter::TwoModeState<f64>;
pub type BeamSplitterF32 = beamsplitter::BeamSplitterParams<f32>;
pub type BeamSplitterF64 = beamsplitter::BeamSplitterParams<f64>;
pub type CoherentParamsF32 = fock::CoherentParams<f32>;
pub type CoherentParamsF64 = fock::CoherentParams<f64>;
pub type SqueezeParamsF32 = fock::SqueezeParams<f32>;
pub type SqueezeParamsF64 = fock::SqueezeParams<f64>;
