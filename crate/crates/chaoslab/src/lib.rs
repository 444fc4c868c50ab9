//! A finite-dimensional numerical laboratory for Wiener chaos analysis.
//!
//! The crate models an isonormal Gaussian process over `R^n` together with a
//! diagonal resolution of the identity: every orthonormal basis direction
//! carries a time stamp in `(0, 1]` and a channel label. On top of that it
//! provides
//!
//! - symmetric tensor kernels with contractions and generalized
//!   (time-restricted) contractions ([`tensor`], [`filtration`]),
//! - exact evaluation of multiple Wiener-Itô integrals, multiplication
//!   formulas and moment computations ([`chaos`]),
//! - the Malliavin derivative, adapted projection, Skorohod integral and the
//!   Clark-Ocone reconstruction ([`malliavin`]),
//! - the unitary transport between an abstract filtered basis and its
//!   concrete channel/time-cell model ([`transport`]),
//! - condition checkers and Monte-Carlo experiments for central and
//!   mixture-of-Gaussians limit theorems ([`limitlab`]).
//!
//! All values are immutable after construction and all operations are pure,
//! so everything can be shared freely across threads. Monte-Carlo loops use
//! counter-based random streams and merge partial results in a fixed block
//! order, which makes every experiment reproducible bit-for-bit regardless
//! of the number of worker threads (`CHAOSLAB_THREADS`).
//!
//! The `examples/` directory contains one runnable example per capability;
//! the `chaoslab` binary wraps the same entry points behind a small
//! subcommand CLI emitting JSON/CSV reports.

pub mod chaos;
pub mod cli;
pub mod error;
pub mod filtration;
pub mod kernel_file;
pub mod limitlab;
pub mod malliavin;
pub mod mc;
pub mod report;
pub mod tensor;
pub mod transport;

pub use chaos::{ChaosFunctional, GaussianSample};
pub use error::{Error, Result};
pub use filtration::{FilteredBasis, GeneratorSet, ProjectionMode, TimeChangeMap};
pub use malliavin::VectorField;
pub use tensor::{SymmetricKernel, Tensor};
pub use transport::UnitaryMap;
