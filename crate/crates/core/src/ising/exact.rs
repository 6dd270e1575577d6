//! Exact solvers by state enumeration: the field-dressed partition function
//! as a ratio of Boltzmann sums, and the full table of spin correlations
//! `E[sigma^I]` through a Walsh-Hadamard transform of the state weights.

use num_complex::Complex;

use super::{interior_bonds, ModelParams};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::scalar::Scalar;

/// Largest site count accepted by the enumeration backends.
pub const ENUMERATION_CAP: usize = 26;

/// Site count cap for the all-subset correlation table (2^n values held in
/// memory, and the WHT needs the full weight vector).
const CORRELATION_CAP: usize = 22;

struct Enumeration<S: Scalar> {
    n: usize,
    bonds: Vec<(u32, u32)>,
    /// `beta * (sum of adjacent fixed boundary spins)` per site.
    boundary_field: Vec<S>,
    exp_beta: Vec<S>,
    max_bonds: i64,
}

impl<S: Scalar> Enumeration<S> {
    fn new(lat: &Lattice<S>, params: &ModelParams<S>, cap: usize) -> Result<Self> {
        params.validate(lat)?;
        let n = lat.num_sites();
        if n > cap {
            return Err(Error::TooLarge { sites: n, cap });
        }
        let bonds = interior_bonds(lat);
        let max_bonds = bonds.len() as i64;
        // Bond sums are integers in [-#bonds, #bonds]; tabulate exp(beta k).
        let exp_beta: Vec<S> = (-max_bonds..=max_bonds)
            .map(|k| (params.beta * S::from_i64(k).unwrap()).exp())
            .collect();
        Ok(Enumeration {
            n,
            bonds,
            boundary_field: params.boundary_field(lat),
            exp_beta,
            max_bonds,
        })
    }

    #[inline]
    fn spin(state: u64, i: usize) -> i64 {
        1 - 2 * ((state >> i) & 1) as i64
    }

    /// Visit every state with its zero-field Boltzmann weight
    /// `exp(beta * bond_sum + sum_i bf_i sigma_i)`.
    fn for_each_state<F: FnMut(u64, S)>(&self, mut f: F) {
        for state in 0u64..(1u64 << self.n) {
            let mut k = 0i64;
            for &(i, j) in &self.bonds {
                k += Self::spin(state, i as usize) * Self::spin(state, j as usize);
            }
            let mut bf = S::zero();
            for (i, &b) in self.boundary_field.iter().enumerate() {
                bf += b * S::from_i64(Self::spin(state, i)).unwrap();
            }
            let w = self.exp_beta[(k + self.max_bonds) as usize] * bf.exp();
            f(state, w);
        }
    }
}

#[derive(Clone, Copy)]
struct KahanC<S: Scalar> {
    s: Complex<S>,
    c: Complex<S>,
}

impl<S: Scalar> KahanC<S> {
    fn new() -> Self {
        KahanC {
            s: Complex::new(S::zero(), S::zero()),
            c: Complex::new(S::zero(), S::zero()),
        }
    }
    #[inline]
    fn add(&mut self, v: Complex<S>) {
        let y = v - self.c;
        let t = self.s + y;
        self.c = (t - self.s) - y;
        self.s = t;
    }
}

/// The random partition function `Z^{omega,a} = E^a_Omega[exp(sum xi_x
/// sigma_x)]`, computed exactly as the ratio of the field-dressed to the
/// field-free Boltzmann sums. Complex fields are allowed.
pub fn exact_partition<S: Scalar>(
    lat: &Lattice<S>,
    params: &ModelParams<S>,
) -> Result<Complex<S>> {
    let e = Enumeration::new(lat, params, ENUMERATION_CAP)?;
    let mut num = KahanC::new();
    let mut den = KahanC::new();
    let field_zero = params.field_is_zero();
    e.for_each_state(|state, w| {
        den.add(Complex::new(w, S::zero()));
        if field_zero {
            num.add(Complex::new(w, S::zero()));
        } else {
            let mut s = Complex::new(S::zero(), S::zero());
            for i in 0..e.n {
                let sp = S::from_i64(Enumeration::<S>::spin(state, i)).unwrap();
                s.re += params.xi_re[i] * sp;
                s.im += params.xi_im[i] * sp;
            }
            num.add(s.exp() * w);
        }
    });
    if den.s.norm_sqr() == S::zero() {
        return Err(Error::ZeroDenominator);
    }
    Ok(num.s / den.s)
}

/// Exact spin correlations `E[sigma^I]` for every subset `I` of the interior
/// sites (filtered to `|I| <= k_max` by the accessors). The full table is a
/// Walsh-Hadamard transform of the normalized state weights.
#[derive(Debug, Clone)]
pub struct CorrelationTable<S: Scalar> {
    n: usize,
    values: Vec<S>,
    pub mesh: S,
    pub boundary_tag: i8,
    pub k_max: usize,
}

impl<S: Scalar> CorrelationTable<S> {
    pub fn num_sites(&self) -> usize {
        self.n
    }

    /// `E[sigma^I]` for the subset encoded as a bit mask.
    pub fn by_mask(&self, mask: u64) -> S {
        self.values[mask as usize]
    }

    /// `E[sigma^I]` for sorted site indices; errors if any index is out of
    /// range or the subset exceeds `k_max`.
    pub fn get(&self, sites: &[usize]) -> Result<S> {
        if sites.len() > self.k_max || sites.iter().any(|&s| s >= self.n) {
            return Err(Error::MissingCorrelation(sites.to_vec()));
        }
        let mut mask = 0u64;
        for &s in sites {
            mask |= 1 << s;
        }
        Ok(self.values[mask as usize])
    }

    /// CSV rows `k,i1;...;ik,value` for all `|I| <= k_max`.
    pub fn dump_csv<W: std::io::Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "degree,sites,value")?;
        for mask in 0..(1u64 << self.n) {
            let k = mask.count_ones() as usize;
            if k > self.k_max {
                continue;
            }
            let sites: Vec<String> = (0..self.n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| i.to_string())
                .collect();
            writeln!(out, "{},{},{}", k, sites.join(";"), self.values[mask as usize])?;
        }
        Ok(())
    }
}

/// Enumerate the pure model (fields must be zero: the scaling experiments
/// use the critical model) and return all correlations up to `k_max`.
pub fn exact_correlations<S: Scalar>(
    lat: &Lattice<S>,
    params: &ModelParams<S>,
    k_max: usize,
) -> Result<CorrelationTable<S>> {
    if !params.field_is_zero() {
        return Err(Error::Invalid(
            "exact_correlations requires a zero field (pure critical model)".into(),
        ));
    }
    let e = Enumeration::new(lat, params, CORRELATION_CAP)?;
    let size = 1usize << e.n;
    let mut w = vec![S::zero(); size];
    let mut total = S::zero();
    e.for_each_state(|state, weight| {
        w[state as usize] = weight;
        total += weight;
    });
    for v in w.iter_mut() {
        *v /= total;
    }
    // In-place WHT in the +-1 spin basis: after folding bit b,
    // w[I] accumulates sum_s p(s) * (-1)^{|s & I|}.
    let mut half = 1usize;
    while half < size {
        let mut i = 0;
        while i < size {
            for j in i..i + half {
                let u = w[j];
                let v = w[j + half];
                w[j] = u + v;
                w[j + half] = u - v;
            }
            i += 2 * half;
        }
        half *= 2;
    }
    let boundary_tag = match &params.boundary {
        super::Boundary::Uniform(v) => *v,
        super::Boundary::PerSite(_) => 0,
    };
    Ok(CorrelationTable {
        n: e.n,
        values: w,
        mesh: lat.mesh,
        boundary_tag,
        k_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::Boundary;
    use crate::lattice::Lattice;
    use crate::rng::StreamKey;
    use crate::scalar::critical_beta;

    fn one_site() -> (Lattice<f64>, ModelParams<f64>) {
        let lat = Lattice::strip(1, 1, 0.5_f64);
        let params = ModelParams::pure_plus(&lat);
        (lat, params)
    }

    #[test]
    fn zero_field_partition_is_one() {
        let lat = Lattice::strip(3, 3, 0.25_f64);
        let params = ModelParams::pure_plus(&lat);
        let z = exact_partition(&lat, &params).unwrap();
        assert!((z.re - 1.0).abs() < 1e-14 && z.im.abs() < 1e-15);
    }

    #[test]
    fn one_spin_closed_form() {
        // Z = (e^{4b+xi} + e^{-4b-xi}) / (e^{4b} + e^{-4b}).
        let (lat, mut params) = one_site();
        let xi = 0.37;
        params.xi_re[0] = xi;
        let z = exact_partition(&lat, &params).unwrap();
        let b = critical_beta::<f64>();
        let expect = ((4.0 * b + xi).exp() + (-4.0 * b - xi).exp()) / ((4.0 * b).exp() + (-4.0 * b).exp());
        assert!((z.re - expect).abs() < 1e-14);
        params.xi_re[0] = 0.0;
        let z0 = exact_partition(&lat, &params).unwrap();
        assert!((z0.re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn imaginary_field_conjugation_symmetry() {
        // Z(-i phi) = conj(Z(i phi)) and |Z| <= 1 + O(phi^2) for small phi.
        let lat = Lattice::strip(2, 2, 0.25_f64);
        let mut p_plus = ModelParams::pure_plus(&lat);
        let mut p_minus = ModelParams::pure_plus(&lat);
        let phis = [0.013, -0.007, 0.021, 0.002];
        for i in 0..4 {
            p_plus.xi_im[i] = phis[i];
            p_minus.xi_im[i] = -phis[i];
        }
        let zp = exact_partition(&lat, &p_plus).unwrap();
        let zm = exact_partition(&lat, &p_minus).unwrap();
        assert!((zp - zm.conj()).norm() < 1e-14);
        let phi2: f64 = phis.iter().map(|p| p * p).sum();
        assert!(zp.norm() <= 1.0 + 1e-12);
        assert!(zp.norm() >= 1.0 - phi2);
    }

    #[test]
    fn one_spin_correlation_is_tanh() {
        let (lat, params) = one_site();
        let corr = exact_correlations(&lat, &params, 1).unwrap();
        let expect = (4.0 * critical_beta::<f64>()).tanh();
        assert!((corr.get(&[0]).unwrap() - expect).abs() < 1e-14);
        assert!((expect - 0.9428).abs() < 1e-4);
        assert!((corr.get(&[]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn minus_boundary_flips_magnetisation() {
        let lat = Lattice::strip(2, 2, 0.25_f64);
        let plus = ModelParams::pure_plus(&lat);
        let mut minus = ModelParams::pure_plus(&lat);
        minus.boundary = Boundary::Uniform(-1);
        let cp = exact_correlations(&lat, &plus, 2).unwrap();
        let cm = exact_correlations(&lat, &minus, 2).unwrap();
        for i in 0..4 {
            assert!((cp.get(&[i]).unwrap() + cm.get(&[i]).unwrap()).abs() < 1e-14);
        }
        // Pair correlations are flip-invariant.
        assert!((cp.get(&[0, 3]).unwrap() - cm.get(&[0, 3]).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn griffiths_positivity_and_fkg_on_3x3() {
        let lat = Lattice::strip(3, 3, 0.25_f64);
        let params = ModelParams::pure_plus(&lat);
        let corr = exact_correlations(&lat, &params, 9).unwrap();
        for mask in 0u64..(1 << 9) {
            assert!(
                corr.by_mask(mask) >= -1e-15,
                "Griffiths violated at {mask:#b}: {}",
                corr.by_mask(mask)
            );
            assert!(corr.by_mask(mask) <= 1.0 + 1e-14);
        }
        // FKG: E[s_x s_y] >= E[s_x] E[s_y].
        for x in 0..9 {
            for y in (x + 1)..9 {
                let exy = corr.get(&[x, y]).unwrap();
                let ex = corr.get(&[x]).unwrap();
                let ey = corr.get(&[y]).unwrap();
                assert!(exy >= ex * ey - 1e-14);
            }
        }
    }

    #[test]
    fn wht_correlations_match_direct_sums() {
        // Independent oracle: direct E[sigma^I] from the state weights.
        let lat = Lattice::strip(2, 2, 0.25_f64);
        let mut params = ModelParams::pure_plus(&lat);
        params.beta = 0.3; // off-critical also fine for the identity
        let corr = exact_correlations(&lat, &params, 4).unwrap();
        let e = Enumeration::new(&lat, &params, 8).unwrap();
        for mask in 0u64..16 {
            let mut num = 0.0;
            let mut den = 0.0;
            e.for_each_state(|state, w| {
                den += w;
                num += w * (1 - 2 * ((state & mask).count_ones() as i64 % 2)) as f64;
            });
            assert!((corr.by_mask(mask) - num / den).abs() < 1e-13);
        }
    }

    #[test]
    fn too_large_is_rejected() {
        let lat = Lattice::strip(6, 5, 0.1_f64);
        let params = ModelParams::pure_plus(&lat);
        assert!(matches!(
            exact_correlations(&lat, &params, 2),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn random_complex_field_partition_matches_brute_force() {
        // Brute force with fresh exponentials per state, no weight table.
        let lat = Lattice::strip(2, 3, 0.25_f64);
        let mut params = ModelParams::pure_plus(&lat);
        let mut rng = StreamKey::new(42).tagged("xi").rng();
        for i in 0..6 {
            params.xi_re[i] = 0.4 * f64::standard_normal(&mut rng);
            params.xi_im[i] = 0.4 * f64::standard_normal(&mut rng);
        }
        let z = exact_partition(&lat, &params).unwrap();
        let bonds = interior_bonds(&lat);
        let bf = params.boundary_field(&lat);
        let mut num = Complex::new(0.0, 0.0);
        let mut den = 0.0f64;
        for state in 0u64..64 {
            let spin = |i: usize| 1.0 - 2.0 * ((state >> i) & 1) as f64;
            let mut energy = 0.0;
            for &(i, j) in &bonds {
                energy += spin(i as usize) * spin(j as usize);
            }
            energy *= params.beta;
            for (i, &b) in bf.iter().enumerate() {
                energy += b * spin(i);
            }
            let mut s = Complex::new(0.0, 0.0);
            for i in 0..6 {
                s += params.xi(i) * spin(i);
            }
            num += (Complex::new(energy, 0.0) + s).exp();
            den += energy.exp();
        }
        assert!((z - num / den).norm() < 1e-13);
    }

    use super::super::interior_bonds;
}
