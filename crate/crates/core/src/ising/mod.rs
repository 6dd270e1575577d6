//! The critical 2D Ising model with fixed boundary spins and arbitrary
//! (complex) site fields: exact solvers on small lattices, transfer-matrix
//! evaluation on strips, Monte Carlo sampling, and the rescaled
//! magnetisation-field observables.

mod exact;
mod mc;
mod observables;
mod transfer;

pub use exact::{exact_correlations, exact_partition, CorrelationTable, ENUMERATION_CAP};
pub use mc::{Algorithm, EquilibrationReport, GibbsSampler};
pub use observables::{
    block_field_sums, characteristic_function, counterterm, high_temperature_rhs,
    magnetisation_observables, pair_magnetisation, rescaled_partition, BlockObservableSet,
    FieldRepresentation, MagnetisationField,
};
pub use transfer::{transfer_matrix_partition, TRANSFER_WIDTH_CAP};

use num_complex::Complex;

use crate::disorder::ExternalField;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, SiteRef};
use crate::scalar::{critical_beta, Scalar};

/// Fixed boundary spins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Boundary {
    /// The same value on every boundary site (`+1` is the default).
    Uniform(i8),
    PerSite(Vec<i8>),
}

impl Boundary {
    pub fn value(&self, b: usize) -> i8 {
        match self {
            Boundary::Uniform(v) => *v,
            Boundary::PerSite(vs) => vs[b],
        }
    }
}

/// Inverse temperature, boundary condition and per-site fields. The field is
/// stored as per-site real/imaginary parts; complex entries are accepted by
/// the exact solvers only.
#[derive(Debug, Clone)]
pub struct ModelParams<S: Scalar> {
    pub beta: S,
    pub boundary: Boundary,
    pub xi_re: Vec<S>,
    pub xi_im: Vec<S>,
}

impl<S: Scalar> ModelParams<S> {
    /// Critical temperature, `+` boundary, zero field.
    pub fn pure_plus(lat: &Lattice<S>) -> Self {
        ModelParams {
            beta: critical_beta(),
            boundary: Boundary::Uniform(1),
            xi_re: vec![S::zero(); lat.num_sites()],
            xi_im: vec![S::zero(); lat.num_sites()],
        }
    }

    /// Critical temperature, `+` boundary, field `xi^a` from an external field.
    pub fn with_field(lat: &Lattice<S>, field: &ExternalField<S>) -> Self {
        assert_eq!(field.num_sites(), lat.num_sites());
        ModelParams {
            beta: critical_beta(),
            boundary: Boundary::Uniform(1),
            xi_re: (0..lat.num_sites()).map(|i| field.xi(i)).collect(),
            xi_im: (0..lat.num_sites()).map(|i| field.xi_im(i)).collect(),
        }
    }

    /// Critical temperature, `+` boundary, explicit real field values.
    pub fn with_real_field(lat: &Lattice<S>, xi: Vec<S>) -> Self {
        assert_eq!(xi.len(), lat.num_sites());
        ModelParams {
            beta: critical_beta(),
            boundary: Boundary::Uniform(1),
            xi_re: xi,
            xi_im: vec![S::zero(); lat.num_sites()],
        }
    }

    /// Critical temperature, `+` boundary, explicit complex field values.
    pub fn with_complex_field(lat: &Lattice<S>, xi: Vec<Complex<S>>) -> Self {
        assert_eq!(xi.len(), lat.num_sites());
        ModelParams {
            beta: critical_beta(),
            boundary: Boundary::Uniform(1),
            xi_re: xi.iter().map(|z| z.re).collect(),
            xi_im: xi.iter().map(|z| z.im).collect(),
        }
    }

    pub fn field_is_zero(&self) -> bool {
        self.xi_re.iter().all(|&v| v == S::zero()) && self.field_is_real()
    }

    pub fn field_is_real(&self) -> bool {
        self.xi_im.iter().all(|&v| v == S::zero())
    }

    pub fn xi(&self, i: usize) -> Complex<S> {
        Complex::new(self.xi_re[i], self.xi_im[i])
    }

    /// Per-site field absorbed from the fixed boundary spins:
    /// `beta * sum of adjacent boundary values`.
    pub fn boundary_field(&self, lat: &Lattice<S>) -> Vec<S> {
        (0..lat.num_sites())
            .map(|i| {
                let mut k = 0i32;
                for nb in lat.neighbors(i) {
                    if let SiteRef::Boundary(b) = nb {
                        k += i32::from(self.boundary.value(b as usize));
                    }
                }
                self.beta * S::from_i32(k).unwrap()
            })
            .collect()
    }

    pub fn validate(&self, lat: &Lattice<S>) -> Result<()> {
        if self.xi_re.len() != lat.num_sites() || self.xi_im.len() != lat.num_sites() {
            return Err(Error::Invalid(format!(
                "field length {} does not match lattice sites {}",
                self.xi_re.len(),
                lat.num_sites()
            )));
        }
        if let Boundary::PerSite(vs) = &self.boundary {
            if vs.len() != lat.num_boundary() {
                return Err(Error::Invalid("boundary assignment length mismatch".into()));
            }
            if vs.iter().any(|&v| v != 1 && v != -1) {
                return Err(Error::Invalid("boundary values must be +-1".into()));
            }
        }
        Ok(())
    }
}

/// One `+-1` assignment on the interior sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfig {
    pub spins: Vec<i8>,
}

impl SpinConfig {
    pub fn all_plus(n: usize) -> Self {
        SpinConfig { spins: vec![1; n] }
    }

    pub fn total_magnetisation(&self) -> i64 {
        self.spins.iter().map(|&s| i64::from(s)).sum()
    }

    /// Pack into a bit array (1 bit per site, +1 -> 1), row-major site order.
    pub fn pack_bits(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.spins.len().div_ceil(8)];
        for (i, &s) in self.spins.iter().enumerate() {
            if s > 0 {
                out[i / 8] |= 1 << (i % 8);
            }
        }
        out
    }

    pub fn unpack_bits(n: usize, bytes: &[u8]) -> Self {
        let spins = (0..n)
            .map(|i| if bytes[i / 8] >> (i % 8) & 1 == 1 { 1 } else { -1 })
            .collect();
        SpinConfig { spins }
    }
}

/// JSON sidecar attached to packed spin snapshots.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SpinSnapshotMeta {
    pub mesh: f64,
    pub seed: u64,
    pub sweep_index: u64,
    pub sites: usize,
}

/// Interior-interior bonds of the lattice, each unordered pair once.
pub(crate) fn interior_bonds<S: Scalar>(lat: &Lattice<S>) -> Vec<(u32, u32)> {
    let mut bonds = Vec::new();
    for i in 0..lat.num_sites() {
        for nb in lat.neighbors(i) {
            if let SiteRef::Interior(j) = nb {
                if (j as usize) > i {
                    bonds.push((i as u32, j));
                }
            }
        }
    }
    bonds
}
