//! The random environment: i.i.d. site disorder, the cell-averaged white
//! noise grid with exact dyadic refinement, and the scaled external field
//! `xi^a_x = lambda^a_x omega^a_x + h^a_x` (+ optional imaginary part).

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::profile::Profile;
use crate::rng::StreamKey;
use crate::scalar::Scalar;

/// Disorder distribution, normalized to mean 0 and variance 1. All three
/// families have finite exponential moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum DisorderLaw {
    Gaussian,
    Rademacher,
    /// Uniform on `[-sqrt(3), sqrt(3)]`.
    Uniform,
}

impl DisorderLaw {
    pub fn sample<S: Scalar, R: rand::Rng + ?Sized>(self, rng: &mut R) -> S {
        match self {
            DisorderLaw::Gaussian => S::standard_normal(rng),
            DisorderLaw::Rademacher => {
                if rng.gen::<bool>() {
                    S::one()
                } else {
                    -S::one()
                }
            }
            DisorderLaw::Uniform => {
                let s3 = S::from_f64_c(3.0f64.sqrt());
                (S::uniform_01(rng) * S::from_f64_c(2.0) - S::one()) * s3
            }
        }
    }

    /// Third absolute moment, used by the Lindeberg bound.
    pub fn third_abs_moment<S: Scalar>(self) -> S {
        match self {
            DisorderLaw::Gaussian => S::from_f64_c(2.0 * (2.0 / std::f64::consts::PI).sqrt()),
            DisorderLaw::Rademacher => S::one(),
            DisorderLaw::Uniform => S::from_f64_c(3.0f64.sqrt() * 3.0 / 4.0),
        }
    }
}

/// One disorder value per interior site, deterministic in `(key, site)`.
pub fn sample_disorder<S: Scalar>(lat: &Lattice<S>, law: DisorderLaw, key: StreamKey) -> Vec<S> {
    (0..lat.num_sites())
        .map(|i| law.sample(&mut key.index(i as u64).rng()))
        .collect()
}

/// Cell averages `theta^a_x = a^{-1} int_{S_a(x)} W(dy)` of a white noise,
/// i.i.d. standard Gaussians over the disjoint cells. `refine` generates the
/// mesh `a/2` grid on the four sub-cells of every cell, exactly consistent
/// with the parent values.
#[derive(Debug, Clone)]
pub struct WhiteNoiseGrid<S: Scalar> {
    pub mesh: S,
    pub values: Vec<S>,
    centers: Vec<[S; 2]>,
    parent_seed: StreamKey,
    depth: u32,
}

impl<S: Scalar> WhiteNoiseGrid<S> {
    pub fn centers(&self) -> &[[S; 2]] {
        &self.centers
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// `<W^a, 1_{S_a(x)}> = a * theta^a_x` for cell index `x`.
    pub fn cell_mass(&self, i: usize) -> S {
        self.mesh * self.values[i]
    }

    /// Children of cell `i` in the refined grid (SW, SE, NW, NE order).
    pub fn children_of(i: usize) -> [usize; 4] {
        [4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3]
    }

    /// The mesh `a/2` grid on the sub-cells, conditioned so that every parent
    /// equals half the sum of its four children.
    pub fn refine(&self) -> WhiteNoiseGrid<S> {
        let half = S::from_f64_c(0.5);
        let quarter = self.mesh / S::from_f64_c(4.0);
        let key = self.parent_seed.tagged("refine").index(self.depth as u64);
        let mut values = Vec::with_capacity(4 * self.values.len());
        let mut centers = Vec::with_capacity(4 * self.values.len());
        let offsets = [[-quarter, -quarter], [quarter, -quarter], [-quarter, quarter], [quarter, quarter]];
        for (i, (&v, &c)) in self.values.iter().zip(self.centers.iter()).enumerate() {
            let mut rng = key.index(i as u64).rng();
            let z: [S; 4] = std::array::from_fn(|_| S::standard_normal(&mut rng));
            let zbar = (z[0] + z[1] + z[2] + z[3]) / S::from_f64_c(4.0);
            for k in 0..4 {
                // Conditional law of 4 standard Gaussians given their sum:
                // shift each by (target sum)/4 - empirical mean.
                values.push(z[k] - zbar + half * v);
                centers.push([c[0] + offsets[k][0], c[1] + offsets[k][1]]);
            }
        }
        WhiteNoiseGrid {
            mesh: self.mesh * half,
            values,
            centers,
            parent_seed: self.parent_seed,
            depth: self.depth + 1,
        }
    }
}

/// Fresh white noise grid over the lattice cells.
pub fn sample_white_noise_grid<S: Scalar>(lat: &Lattice<S>, key: StreamKey) -> WhiteNoiseGrid<S> {
    let values = (0..lat.num_sites())
        .map(|i| S::standard_normal(&mut key.tagged("wn").index(i as u64).rng()))
        .collect();
    WhiteNoiseGrid {
        mesh: lat.mesh,
        values,
        centers: lat.positions().to_vec(),
        parent_seed: key,
        depth: 0,
    }
}

/// Scaled per-site external field. Real part `xi^a_x = lambda^a_x omega_x +
/// h^a_x` with `lambda^a_x = a^{7/8} lambda(x)`, `h^a_x = a^{15/8} h(x)`;
/// optional imaginary part `phitilde^a_x = a^{-1/8} int_{S_a(x)} phi`.
#[derive(Debug, Clone)]
pub struct ExternalField<S: Scalar> {
    pub lambda_a: Vec<S>,
    pub h_a: Vec<S>,
    pub omega: Vec<S>,
    pub phi_tilde_a: Option<Vec<S>>,
    lambda_min: S,
}

impl<S: Scalar> ExternalField<S> {
    /// Real field entry at site `i`.
    pub fn xi(&self, i: usize) -> S {
        self.lambda_a[i] * self.omega[i] + self.h_a[i]
    }

    /// Imaginary field entry at site `i` (zero if no test function attached).
    pub fn xi_im(&self, i: usize) -> S {
        self.phi_tilde_a.as_ref().map_or(S::zero(), |v| v[i])
    }

    pub fn lambda_min(&self) -> S {
        self.lambda_min
    }

    pub fn num_sites(&self) -> usize {
        self.lambda_a.len()
    }

    /// Errors unless `inf lambda > 0`, required whenever a chaos evaluation
    /// divides by `lambda^a_x`.
    pub fn require_positive_lambda(&self) -> Result<()> {
        if self.lambda_min > S::zero() {
            Ok(())
        } else {
            Err(Error::NonPositiveLambda)
        }
    }

    /// `sum_x (lambda^a_x)^2`.
    pub fn lambda_a_sq_sum(&self) -> S {
        self.lambda_a.iter().map(|&l| l * l).sum()
    }
}

/// Assemble the scaled field from profiles and a disorder vector. If a test
/// function `phi` is supplied, its smeared and scaled version is attached as
/// the imaginary part (cell integrals by 2x2 Gauss-Legendre).
pub fn build_external_field<S: Scalar>(
    lat: &Lattice<S>,
    lambda: &Profile<S>,
    h: &Profile<S>,
    omega: Vec<S>,
    phi: Option<&Profile<S>>,
) -> ExternalField<S> {
    assert_eq!(omega.len(), lat.num_sites());
    let a = lat.mesh;
    let la = a.powf(S::from_f64_c(7.0 / 8.0));
    let ha = a.powf(S::from_f64_c(15.0 / 8.0));
    let pa = a.powf(S::from_f64_c(-1.0 / 8.0));
    let mut lambda_a = Vec::with_capacity(lat.num_sites());
    let mut h_a = Vec::with_capacity(lat.num_sites());
    let mut lambda_min = S::infinity();
    for i in 0..lat.num_sites() {
        let p = lat.position(i);
        let l = lambda.eval(p);
        lambda_min = lambda_min.min(l);
        lambda_a.push(la * l);
        h_a.push(ha * h.eval(p));
    }
    let phi_tilde_a = phi.map(|ph| {
        (0..lat.num_sites())
            .map(|i| {
                let (lo, hi) = lat.cell(i);
                pa * ph.box_integral(lo, hi, 2)
            })
            .collect()
    });
    ExternalField {
        lambda_a,
        h_a,
        omega,
        phi_tilde_a,
        lambda_min,
    }
}

/// `<W-like field, phi> = a^{-1} sum_x w_x int_{S_a(x)} phi` for a vector of
/// per-site weights (disorder values or white-noise cell averages).
pub fn pair_white_noise<S: Scalar>(lat: &Lattice<S>, weights: &[S], phi: &Profile<S>) -> S {
    assert_eq!(weights.len(), lat.num_sites());
    let inv_a = S::one() / lat.mesh;
    let mut acc = S::zero();
    for i in 0..lat.num_sites() {
        let (lo, hi) = lat.cell(i);
        acc += weights[i] * phi.box_integral(lo, hi, 2);
    }
    acc * inv_a
}

/// Exact variance of `pair_white_noise` under unit-variance weights:
/// `sum_x a^{-2} (int_{S_a(x)} phi)^2`.
pub fn pair_white_noise_variance<S: Scalar>(lat: &Lattice<S>, phi: &Profile<S>) -> S {
    let inv_a2 = S::one() / (lat.mesh * lat.mesh);
    let mut acc = S::zero();
    for i in 0..lat.num_sites() {
        let (lo, hi) = lat.cell(i);
        let v = phi.box_integral(lo, hi, 2);
        acc += v * v;
    }
    acc * inv_a2
}

/// Serialize a per-site array as little-endian f64, row-major site order.
pub fn write_snapshot<S: Scalar, W: Write>(values: &[S], out: &mut W) -> Result<()> {
    for &v in values {
        out.write_all(&v.to_f64_c().to_le_bytes())?;
    }
    Ok(())
}

/// Read back a little-endian f64 array.
pub fn read_snapshot<S: Scalar, R: Read>(n: usize, input: &mut R) -> Result<Vec<S>> {
    let mut buf = [0u8; 8];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        input.read_exact(&mut buf)?;
        out.push(S::from_f64_c(f64::from_le_bytes(buf)));
    }
    Ok(out)
}

/// JSON sidecar describing a disorder snapshot.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SnapshotMeta {
    pub master_seed: u64,
    pub purpose: String,
    pub replica: u64,
    pub mesh: f64,
    pub law: DisorderLaw,
    pub sites: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{discretize_domain, DomainSpec};
    use crate::stats::{mean, variance};

    fn lat(a: f64) -> Lattice<f64> {
        discretize_domain(&DomainSpec::unit_square(a)).unwrap()
    }

    #[test]
    fn rademacher_support_and_determinism() {
        let l = lat(0.1);
        let key = StreamKey::new(1).tagged("dis");
        let w = sample_disorder(&l, DisorderLaw::Rademacher, key);
        assert!(w.iter().all(|&v| v == 1.0 || v == -1.0));
        let w2 = sample_disorder(&l, DisorderLaw::Rademacher, key);
        assert_eq!(w, w2);
    }

    #[test]
    fn gaussian_mean_tolerance() {
        // |mean| < 0.005 over 1e6 draws (3 sigma / sqrt(n) ~ 0.003).
        let l = lat(1.0 / 1001.0);
        assert_eq!(l.num_sites(), 1_000_000);
        let w = sample_disorder(&l, DisorderLaw::Gaussian, StreamKey::new(7));
        assert!(mean(&w).abs() < 0.005);
    }

    #[test]
    fn law_normalization() {
        let l = lat(1.0 / 301.0);
        for law in [DisorderLaw::Gaussian, DisorderLaw::Rademacher, DisorderLaw::Uniform] {
            let w = sample_disorder(&l, law, StreamKey::new(3));
            assert!(mean(&w).abs() < 0.01, "{law:?}");
            assert!((variance(&w) - 1.0).abs() < 0.02, "{law:?}");
        }
    }

    #[test]
    fn white_noise_variance_and_refinement() {
        let l = lat(1.0 / 1001.0);
        let g = sample_white_noise_grid(&l, StreamKey::new(5));
        // chi-square tolerance: sd of the variance estimate is sqrt(2/n).
        assert!((variance(&g.values) - 1.0).abs() < 0.01);

        let small = lat(0.25);
        let g0 = sample_white_noise_grid(&small, StreamKey::new(6));
        let g1 = g0.refine();
        assert!((g1.mesh - 0.125).abs() < 1e-15);
        for i in 0..g0.values.len() {
            let s: f64 = WhiteNoiseGrid::<f64>::children_of(i)
                .iter()
                .map(|&c| g1.values[c])
                .sum();
            assert!((g0.values[i] - 0.5 * s).abs() < 1e-12);
        }
    }

    #[test]
    fn refinement_martingale_two_levels() {
        let small = lat(0.5);
        let g0 = sample_white_noise_grid(&small, StreamKey::new(9));
        let g2 = g0.refine().refine();
        let s: f64 = g2.values.iter().sum();
        assert!((g0.values[0] - 0.25 * s).abs() < 1e-12);
        // Grandchildren are standard Gaussians in aggregate.
        assert_eq!(g2.values.len(), 16);
    }

    #[test]
    fn refined_marginals_are_standard() {
        let small = lat(0.5);
        let mut vals = Vec::new();
        for r in 0..40_000u64 {
            let g = sample_white_noise_grid(&small, StreamKey::new(11).index(r)).refine();
            vals.push(g.values[0]);
        }
        assert!(mean(&vals).abs() < 0.02);
        assert!((variance(&vals) - 1.0) .abs() < 0.03);
    }

    #[test]
    fn pairing_single_cell() {
        // phi = 1 on the unit square, a = 1/2, one site with omega = 1:
        // a^{-1} * a^2 = 1/2.
        let l = lat(0.5);
        let v = pair_white_noise(&l, &[1.0], &Profile::Constant(1.0));
        assert!((v - 0.5).abs() < 1e-14);
        assert_eq!(pair_white_noise(&l, &[1.0], &Profile::zero()), 0.0);
    }

    #[test]
    fn pairing_variance_approaches_l2_norm() {
        // Var(<W^{omega,a}, phi>) -> ||phi||_{L2}^2 within 2% at a = 1/64.
        let l = lat(1.0 / 64.0);
        let phi = Profile::Bump {
            center: [0.5, 0.5],
            radius: 0.3,
            height: 1.0,
            floor: 0.0,
        };
        let pred = pair_white_noise_variance(&l, &phi);
        // Riemann-sum oracle for ||phi||^2 on a fine grid.
        let k = 512usize;
        let mut l2 = 0.0;
        for i in 0..k {
            for j in 0..k {
                let p = [(i as f64 + 0.5) / k as f64, (j as f64 + 0.5) / k as f64];
                l2 += phi.eval(p).powi(2) / (k * k) as f64;
            }
        }
        assert!((pred / l2 - 1.0).abs() < 0.02, "pred {pred} l2 {l2}");
    }

    #[test]
    fn field_scaling_exponents() {
        // lambda^a / lambda^{a/2} = 2^{7/8}, h^a / h^{a/2} = 2^{15/8} at fixed x.
        let la = lat(0.25);
        let lb = lat(0.125);
        let lam = Profile::Constant(1.3);
        let h = Profile::Constant(0.7);
        let fa = build_external_field(&la, &lam, &h, vec![0.0; la.num_sites()], None);
        let fb = build_external_field(&lb, &lam, &h, vec![0.0; lb.num_sites()], None);
        let ia = la.positions().iter().position(|&p| p == [0.5, 0.5]).unwrap();
        let ib = lb.positions().iter().position(|&p| p == [0.5, 0.5]).unwrap();
        assert!((fa.lambda_a[ia] / fb.lambda_a[ib] - 2f64.powf(7.0 / 8.0)).abs() < 1e-12);
        assert!((fa.h_a[ia] / fb.h_a[ib] - 2f64.powf(15.0 / 8.0)).abs() < 1e-12);
        // lambda = 1, a = 1/4: lambda^a = (1/4)^{7/8} everywhere.
        let f1 = build_external_field(&la, &Profile::Constant(1.0), &h, vec![0.0; la.num_sites()], None);
        assert!(f1.lambda_a.iter().all(|&v| (v - 0.25f64.powf(7.0 / 8.0)).abs() < 1e-14));
    }

    #[test]
    fn constant_phi_tilde() {
        // phi = c constant: phitilde^a_x = a^{15/8} c.
        let l = lat(0.25);
        let f = build_external_field(
            &l,
            &Profile::Constant(1.0),
            &Profile::zero(),
            vec![0.0; l.num_sites()],
            Some(&Profile::Constant(2.0)),
        );
        let expect = 0.25f64.powf(15.0 / 8.0) * 2.0;
        for i in 0..l.num_sites() {
            assert!((f.xi_im(i) - expect).abs() < 1e-14);
        }
        // lambda = h = 0 -> xi = 0
        let f0 = build_external_field(&l, &Profile::zero(), &Profile::zero(), vec![1.0; l.num_sites()], None);
        assert!((0..l.num_sites()).all(|i| f0.xi(i) == 0.0));
    }

    #[test]
    fn snapshot_roundtrip() {
        let vals = vec![1.5f64, -2.25, 0.0, 3.125];
        let mut buf = Vec::new();
        write_snapshot(&vals, &mut buf).unwrap();
        assert_eq!(buf.len(), 32);
        let back: Vec<f64> = read_snapshot(4, &mut buf.as_slice()).unwrap();
        assert_eq!(vals, back);
    }
}
