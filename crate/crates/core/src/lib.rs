//! Photon-counting statistics of passive linear-optical networks fed with
//! single-mode Gaussian states.
//!
//! * [`states`]: per-mode Gaussian inputs and their Husimi parameters.
//! * [`interferometer`]: validated unitaries, Haar sampling, two-mode decomposition.
//! * [`qform`]: the output Q-function data `(K, C, D~)`.
//! * [`matrix_functions`]: Ryser permanent and matching-sum hafnian.
//! * [`engines`]: exact detection probabilities (coherent, general, thermal, squeezed).
//! * [`sampler`]: exact sampling for classical inputs.
//! * [`psd_permanent`]: PSD permanents estimated through thermal sampling.
//! * [`fock_oracle`]: truncated Fock-space reference for up to three modes.
//! * [`cli`]: the `gbsim` command-line front-end.

// `!(x >= bound)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod engines;
pub mod error;
pub mod fock_oracle;
pub mod interferometer;
pub mod matrix_functions;
pub mod numeric;
pub mod pattern;
pub mod psd_permanent;
pub mod qform;
pub mod sampler;
pub mod states;

pub use engines::{prob_coherent, prob_general, prob_squeezed, prob_thermal, Engine};
pub use error::{Error, Result};
pub use interferometer::Interferometer;
pub use numeric::CMatrix;
pub use pattern::{enumerate_patterns, DetectionPattern};
pub use qform::OutputQForm;
pub use states::{GaussianModeState, QFunctionParams};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
