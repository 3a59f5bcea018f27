//! Core of the BVP pain-assessment pipeline: signals, beats, HRV and BVP
//! features, windowed datasets and synthetic recordings.
//!
//! The numeric kernels are generic over [`Scalar`]; the aliases below fix
//! the common choices.

pub mod beat;
pub mod bvp;
pub mod dataset;
pub mod error;
pub mod features;
pub mod hrv;
pub mod io;
pub mod scalar;
pub mod signal;
pub mod synth;

pub use error::{CoreError, Result};
pub use scalar::Scalar;

pub type Signal = signal::SampledSignal<f64>;
pub type Signal32 = signal::SampledSignal<f32>;
pub type Ibi = beat::IbiSeries<f64>;
pub type Ibi32 = beat::IbiSeries<f32>;
pub type Hrv = hrv::HrvFeatures<f64>;
pub type Hrv32 = hrv::HrvFeatures<f32>;
pub type Bvp = bvp::BvpFeatures<f64>;
pub type Bvp32 = bvp::BvpFeatures<f32>;
