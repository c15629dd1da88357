//! Chebyshev-bias densities for Frobenius races in Galois extensions.
//!
//! The crate is organized bottom-up:
//!
//! * [`group`], [`classfn`], [`embed`]: finite groups, character tables,
//!   class functions, Fourier analysis and induction.
//! * [`sn`]: partitions and symmetric-group combinatorics.
//! * [`catalog`]: extension families, ramification and Artin conductors.
//! * [`zeros`]: zero files, validation, synthesis and the cache.
//! * [`bias`]: the limiting random variable and the density δ.
//! * [`race`]: sieving, Frobenius classes and empirical races.
//! * [`special`]: Bessel J₀, quadrature rules, the normal distribution.

pub mod bias;
pub mod catalog;
pub mod classfn;
pub mod embed;
pub mod error;
pub mod group;
pub mod race;
pub mod sn;
pub mod special;
pub mod zeros;

pub use classfn::{race_function, root_count, ClassFunction, Norms, RaceSpec};
pub use embed::SubgroupEmbedding;
pub use error::{Error, Result};
pub use group::{build_group, FiniteGroup, FsType, Group, GroupKind, GroupSpec, C64};
