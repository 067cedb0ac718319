//! Library for studying how losses in the transmission of two-mode squeezed
//! vacuum light degrade entanglement, and what that leaves for
//! continuous-variable teleportation.
//!
//! The crate is organized around one pipeline: a squeezed source
//! ([`gaussian::TmsvParams`]) is sent through a pair of lossy fibers
//! ([`gaussian::ChannelPair`]), and the transmitted state is interrogated by
//! three interchangeable entanglement quantifiers (the [`measures`] registry)
//! and by the teleportation fidelity machinery ([`teleport`]).
//!
//! Conventions used throughout: vacuum quadrature variance 1/2, entropies in
//! nats, squeezing amplitude q = tanh|zeta|, and all lengths expressed in
//! units of the fiber absorption length unless stated otherwise.
//!
//! # Example
//!
//! Send a one-photon-per-mode source through a tenth of an absorption
//! length on each arm and compare what the quantifiers report:
//!
//! ```
//! use cvent_core::distance::MinimizerConfig;
//! use cvent_core::fock::tmsv_entropy;
//! use cvent_core::{ChannelPair, MeasureRegistry, TmsvParams};
//!
//! let source = TmsvParams::from_mean_photons(1.0)?;
//! let fibers = ChannelPair::from_lengths(0.1, 0.1, 1.0)?;
//! let registry = MeasureRegistry::standard(30, MinimizerConfig::default());
//!
//! let distance = registry.get("distance").unwrap().evaluate(&source, &fibers)?;
//! let bound = registry.get("schmidt-bound").unwrap().evaluate(&source, &fibers)?;
//! assert!(distance.nats < bound.nats);
//! assert!(bound.nats < tmsv_entropy(source.q_mag())?);
//! # Ok::<(), cvent_core::CoreError>(())
//! ```

// Validation uses negated comparisons so that NaN inputs fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod distance;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod measures;
pub mod optim;
pub mod specfun;
pub mod teleport;

pub use error::{CoreError, Result};
pub use gaussian::{ChannelPair, StdFormVariance, TmsvParams};
pub use measures::{EntanglementMeasure, MeasureRegistry, MeasureValue};

/// Complex scalar used across the Fock and teleportation layers.
pub type Complex64 = nalgebra::Complex<f64>;
