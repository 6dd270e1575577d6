//! Numerical laboratory for the two-dimensional critical random field Ising
//! model: exact partition functions and correlations on small lattices,
//! transfer matrices on strips, Monte Carlo sampling, polynomial chaos
//! expansions, wavelet Besov-Hölder norms, and the block-discretization /
//! fractional-moment pipeline for comparing the disordered and pure
//! magnetisation field laws.
//!
//! The numerical kernels are generic over the scalar type via [`Scalar`];
//! the concrete alias [`Real`] (`f64`) is what the harness and the
//! acceptance experiments run on.

pub mod besov;
pub mod chaos;
pub mod disorder;
pub mod error;
pub mod ising;
pub mod lattice;
pub mod moments;
pub mod profile;
pub mod rng;
pub mod scalar;
pub mod singularity;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::{critical_beta, Scalar};

/// Scalar type used by the harness and the acceptance suite.
pub type Real = f64;

/// Concrete aliases for the main lattice objects at the default precision.
pub type RLattice = lattice::Lattice<Real>;
pub type RDomainSpec = lattice::DomainSpec<Real>;
pub type RWhiteNoiseGrid = disorder::WhiteNoiseGrid<Real>;
pub type RExternalField = disorder::ExternalField<Real>;
pub type RProfile = profile::Profile<Real>;
pub type RComplex = num_complex::Complex<Real>;
