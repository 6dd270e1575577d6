//! Rescaled partition functions, the high-temperature expansion identity,
//! characteristic functions, and the magnetisation-field observables.

use num_complex::Complex;

use super::{exact_partition, transfer_matrix_partition, CorrelationTable, ModelParams, SpinConfig};
use crate::error::{Error, Result};
use crate::lattice::{BlockGrid, Lattice};
use crate::profile::Profile;
use crate::scalar::Scalar;

/// Deterministic counterterm `theta_a = exp(-a^{-1/4} ||lambda||_{L^2}^2 / 2)`.
pub fn counterterm<S: Scalar>(a: S, lambda_l2_sq: S) -> S {
    (-a.powf(S::from_f64_c(-0.25)) * lambda_l2_sq / S::from_f64_c(2.0)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Enumeration,
    Transfer,
}

/// `Ztilde^{omega,a} = theta_a Z^{omega,a}` through an exact backend.
pub fn rescaled_partition<S: Scalar>(
    lat: &Lattice<S>,
    params: &ModelParams<S>,
    lambda_l2_sq: S,
    backend: Backend,
) -> Result<Complex<S>> {
    let z = match backend {
        Backend::Enumeration => exact_partition(lat, params)?,
        Backend::Transfer => transfer_matrix_partition(lat, params)?,
    };
    Ok(z * counterterm(lat.mesh, lambda_l2_sq))
}

/// Right-hand side of the high-temperature expansion:
/// `theta_a cosh(xi)^Omega sum_I E[sigma^I] tanh(xi)^I`,
/// the module's master identity against [`rescaled_partition`].
pub fn high_temperature_rhs<S: Scalar>(
    corr: &CorrelationTable<S>,
    params: &ModelParams<S>,
    mesh: S,
    lambda_l2_sq: S,
) -> Result<Complex<S>> {
    let n = corr.num_sites();
    if params.xi_re.len() != n {
        return Err(Error::Invalid("field/correlation size mismatch".into()));
    }
    let mut cosh_prod = Complex::new(S::one(), S::zero());
    let tanh: Vec<Complex<S>> = (0..n)
        .map(|i| {
            let xi = params.xi(i);
            cosh_prod *= xi.cosh();
            xi.tanh()
        })
        .collect();
    // Fold the subset sum one site at a time:
    // v[m] <- v[m] + tanh_b * v[m | bit_b] collapses bit b.
    let mut v: Vec<Complex<S>> = (0..(1u64 << n))
        .map(|m| Complex::new(corr.by_mask(m), S::zero()))
        .collect();
    for b in 0..n {
        let bit = 1usize << b;
        for m in 0..v.len() {
            if m & bit == 0 {
                let hi = v[m | bit];
                v[m] += tanh[b] * hi;
            }
        }
    }
    Ok(v[0] * cosh_prod * counterterm(mesh, lambda_l2_sq))
}

/// Characteristic function of the magnetisation field at the test function
/// baked into `params.xi_im`:
/// `mu-hat(phi) = Ztilde_{lambda, h + i phitilde} / Ztilde_{lambda, h}`.
pub fn characteristic_function<S: Scalar>(
    lat: &Lattice<S>,
    params: &ModelParams<S>,
    backend: Backend,
) -> Result<Complex<S>> {
    let mut denom_params = params.clone();
    denom_params.xi_im = vec![S::zero(); lat.num_sites()];
    let num = match backend {
        Backend::Enumeration => exact_partition(lat, params)?,
        Backend::Transfer => transfer_matrix_partition(lat, params)?,
    };
    let den = match backend {
        Backend::Enumeration => exact_partition(lat, &denom_params)?,
        Backend::Transfer => transfer_matrix_partition(lat, &denom_params)?,
    };
    if den.norm_sqr() == S::zero() {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

/// Representation of the rescaled magnetisation field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRepresentation {
    /// Density `a^{-1/8} sigma_x` on the cell `S_a(x)`.
    PiecewiseConstant,
    /// Point mass `a^{15/8} sigma_x` at `x`.
    Atomic,
}

/// A spin configuration viewed as a distribution.
#[derive(Debug, Clone)]
pub struct MagnetisationField<S: Scalar> {
    pub representation: FieldRepresentation,
    pub spins: Vec<i8>,
    pub mesh: S,
}

impl<S: Scalar> MagnetisationField<S> {
    pub fn piecewise(config: &SpinConfig, mesh: S) -> Self {
        MagnetisationField {
            representation: FieldRepresentation::PiecewiseConstant,
            spins: config.spins.clone(),
            mesh,
        }
    }

    pub fn atomic(config: &SpinConfig, mesh: S) -> Self {
        MagnetisationField {
            representation: FieldRepresentation::Atomic,
            spins: config.spins.clone(),
            mesh,
        }
    }

    /// `<Phi, phi>`: cell integrals for the piecewise-constant field, point
    /// evaluation for the atomic one.
    pub fn pair(&self, lat: &Lattice<S>, phi: &Profile<S>) -> S {
        pair_magnetisation(lat, &self.spins, phi, self.representation)
    }
}

/// `<Phi^a, phi>` for either representation of the field built from `spins`.
pub fn pair_magnetisation<S: Scalar>(
    lat: &Lattice<S>,
    spins: &[i8],
    phi: &Profile<S>,
    repr: FieldRepresentation,
) -> S {
    assert_eq!(spins.len(), lat.num_sites());
    let mut acc = S::zero();
    match repr {
        FieldRepresentation::PiecewiseConstant => {
            let scale = lat.mesh.powf(S::from_f64_c(-1.0 / 8.0));
            for i in 0..lat.num_sites() {
                let (lo, hi) = lat.cell(i);
                acc += S::from_i8(spins[i]).unwrap() * phi.box_integral(lo, hi, 2);
            }
            acc * scale
        }
        FieldRepresentation::Atomic => {
            let scale = lat.mesh.powf(S::from_f64_c(15.0 / 8.0));
            for i in 0..lat.num_sites() {
                acc += S::from_i8(spins[i]).unwrap() * phi.eval(lat.position(i));
            }
            acc * scale
        }
    }
}

/// Per-block tested magnetisation `sum_{x in B} a^{15/8} lambda(x)^2 sigma_x`
/// (atomic field tested against `lambda^2 1_B`), row-major over blocks.
#[derive(Debug, Clone)]
pub struct BlockObservableSet<S> {
    pub n: usize,
    pub values: Vec<S>,
}

impl<S: Scalar> BlockObservableSet<S> {
    pub fn value(&self, i: usize, j: usize) -> S {
        self.values[(j - 1) * self.n + (i - 1)]
    }

    pub fn abs_sum(&self) -> S {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

/// Block observables of the magnetisation field.
pub fn block_field_sums<S: Scalar>(
    lat: &Lattice<S>,
    grid: &BlockGrid,
    lambda: &Profile<S>,
    spins: &[i8],
) -> BlockObservableSet<S> {
    assert_eq!(spins.len(), lat.num_sites());
    let scale = lat.mesh.powf(S::from_f64_c(15.0 / 8.0));
    let mut values = vec![S::zero(); grid.num_blocks()];
    for s in 0..lat.num_sites() {
        let (i, j) = grid.block_of(s);
        let l = lambda.eval(lat.position(s));
        values[(j as usize - 1) * grid.n + (i as usize - 1)] +=
            scale * l * l * S::from_i8(spins[s]).unwrap();
    }
    BlockObservableSet { n: grid.n, values }
}

/// Block observables plus pairings against a list of test functions.
pub fn magnetisation_observables<S: Scalar>(
    lat: &Lattice<S>,
    grid: &BlockGrid,
    lambda: &Profile<S>,
    spins: &[i8],
    test_functions: &[Profile<S>],
) -> (BlockObservableSet<S>, Vec<S>) {
    let blocks = block_field_sums(lat, grid, lambda, spins);
    let pairings = test_functions
        .iter()
        .map(|phi| pair_magnetisation(lat, spins, phi, FieldRepresentation::PiecewiseConstant))
        .collect();
    (blocks, pairings)
}
