//! Two-hidden-layer sigmoid networks built from cube localizers.
//!
//! The crate builds localized approximants on cubic partitions of the unit
//! cube, checks their localization and sparse-approximation bounds on
//! grids, estimates covering numbers of the bounded network class, and
//! runs least-squares learning experiments whose error decay is compared
//! with the `m^{-2r/(2r+d)}` rate.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix it to one of the two.

// negated comparisons are used on purpose so that NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod activation;
pub mod capacity;
pub mod error;
pub mod harness;
pub mod learn;
pub mod netcore;
pub mod partition;
pub mod scalar;
pub mod targets;
pub mod verify;

pub use activation::{
    eval_sigmoid, heaviside, learning_epsilon, level_for_learning, lipschitz_constant, step, threshold_for,
    SigmoidKind, SigmoidSpec,
};
pub use error::{Error, Result};
pub use netcore::{
    build_approximant, eval_localizer, eval_phi_net, eval_shallow, eval_sparse_approximant, project_clip,
    validate_params, AnchorRule, LocalizerNet, PhiBounds, PhiNetParams, PhiUnit, ShallowNetParams, ShallowUnit,
    SparseApproximant,
};
pub use partition::{make_partition, make_support, CubicPartition, MultiIndex, SupportSet};
pub use scalar::Scalar;
pub use targets::{make_lipschitz_target, make_sparse_target, SparseTarget};

pub type Localizer = netcore::LocalizerNet<f64>;
pub type Approximant = netcore::SparseApproximant<f64>;
pub type PhiNet = netcore::PhiNetParams<f64>;
pub type Target = targets::SparseTarget<f64>;
pub type Dataset = learn::Dataset<f64>;
pub type Fit = learn::FitResult<f64>;

pub type Localizer32 = netcore::LocalizerNet<f32>;
pub type Approximant32 = netcore::SparseApproximant<f32>;
pub type PhiNet32 = netcore::PhiNetParams<f32>;
pub type Target32 = targets::SparseTarget<f32>;
pub type Dataset32 = learn::Dataset<f32>;
pub type Fit32 = learn::FitResult<f32>;
