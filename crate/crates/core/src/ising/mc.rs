//! Monte Carlo samplers for the (random field) Ising measure.
//!
//! Heat-bath single-site dynamics handles any real field and any fixed
//! boundary. The Wolff cluster sampler covers the zero-field model, with the
//! uniform boundary folded into a ghost spin. For field-dressed runs the
//! sampler can interleave heat-bath sweeps with cluster proposals that are
//! Metropolis-filtered on the field term, which mixes dramatically faster
//! near criticality and is validated against exact enumeration in the tests.

use super::{Boundary, ModelParams, SpinConfig};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, SiteRef};
use crate::rng::{CounterRng, StreamKey};
use crate::scalar::Scalar;
use crate::stats::integrated_autocorrelation;
use rand::RngCore;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    HeatBath,
    /// Zero field only; `+`/`-` uniform boundary via a ghost spin.
    Wolff,
    /// Heat-bath sweeps plus cluster proposals filtered on the field term.
    HybridCluster,
}

#[derive(Debug, Clone)]
pub struct EquilibrationReport<S> {
    /// Windowed estimate of the integrated autocorrelation time of the total
    /// magnetisation, in sweeps.
    pub tau: S,
    pub sweeps_discarded: usize,
}

pub struct GibbsSampler<S: Scalar> {
    alg: Algorithm,
    beta: S,
    n: usize,
    nbr: Vec<[i32; 4]>,
    /// Number of boundary neighbours per site (ghost bond multiplicity).
    ghost_k: Vec<u8>,
    /// Sites with at least one boundary neighbour.
    edge_sites: Vec<u32>,
    /// Per-site coupling to the ghost plus external field: `beta k_i + xi_i`
    /// for uniform boundary, `beta sum_b b + xi_i` with the ghost pinned for
    /// per-site boundaries.
    local_c: Vec<S>,
    xi: Vec<S>,
    measure_flip: i8,
    ghost_pinned: bool,
    spins: Vec<i8>,
    ghost: i8,
    /// Heat-bath thresholds `[ghost sign][site][(nbr_sum+4)/2]`.
    tables: [Vec<u64>; 2],
    p_bond: u64,
    p_ghost: [u64; 4],
    rng: CounterRng,
    stack: Vec<u32>,
    in_cluster: Vec<u32>,
    epoch: u32,
    pub clusters_per_sweep: usize,
    sweeps_done: u64,
}

#[inline]
fn prob_to_u64(p: f64) -> u64 {
    if p >= 1.0 {
        u64::MAX
    } else if p <= 0.0 {
        0
    } else {
        (p * (u64::MAX as f64)) as u64
    }
}

impl<S: Scalar> GibbsSampler<S> {
    pub fn new(
        lat: &Lattice<S>,
        params: &ModelParams<S>,
        alg: Algorithm,
        key: StreamKey,
    ) -> Result<Self> {
        params.validate(lat)?;
        if !params.field_is_real() {
            return Err(Error::Invalid("complex fields are exact-solver only".into()));
        }
        let field_zero = params.field_is_zero();
        if alg == Algorithm::Wolff && !field_zero {
            return Err(Error::WolffWithField);
        }
        let uniform = match &params.boundary {
            Boundary::Uniform(v) => Some(*v),
            Boundary::PerSite(_) => None,
        };
        if alg != Algorithm::HeatBath && uniform.is_none() {
            return Err(Error::Invalid(
                "cluster moves need a uniform boundary".into(),
            ));
        }
        if alg == Algorithm::HybridCluster && uniform != Some(1) {
            return Err(Error::Invalid(
                "the hybrid sampler is set up for the + boundary".into(),
            ));
        }

        let n = lat.num_sites();
        let mut nbr = vec![[-1i32; 4]; n];
        let mut ghost_k = vec![0u8; n];
        let mut per_site_bsum = vec![0i32; n];
        for i in 0..n {
            for (slot, r) in lat.neighbors(i).iter().enumerate() {
                match *r {
                    SiteRef::Interior(j) => nbr[i][slot] = j as i32,
                    SiteRef::Boundary(b) => {
                        ghost_k[i] += 1;
                        per_site_bsum[i] += i32::from(params.boundary.value(b as usize));
                    }
                }
            }
        }
        let edge_sites: Vec<u32> = (0..n as u32).filter(|&i| ghost_k[i as usize] > 0).collect();

        // For the ghost representation the internal boundary is +1 and a
        // uniform -1 boundary is recovered by flipping at measurement.
        let (ghost_pinned, measure_flip) = match (alg, uniform) {
            (Algorithm::HeatBath, _) => (true, 1),
            (_, Some(-1)) => (false, -1),
            _ => (false, 1),
        };
        let local_c: Vec<S> = (0..n)
            .map(|i| {
                let bpart = if ghost_pinned {
                    params.beta * S::from_i32(per_site_bsum[i]).unwrap()
                } else {
                    params.beta * S::from_u8(ghost_k[i]).unwrap()
                };
                let xi = if ghost_pinned || uniform == Some(1) {
                    params.xi_re[i]
                } else {
                    // measure_flip = -1: the field couples to physical spins.
                    -params.xi_re[i]
                };
                bpart + xi
            })
            .collect();

        let beta = params.beta;
        let mut tables = [vec![0u64; 9 * n], vec![0u64; 9 * n]];
        for (gi, g) in [1.0f64, -1.0].iter().enumerate() {
            for i in 0..n {
                for j in 0..9usize {
                    let sum = j as f64 - 4.0;
                    let m = beta.to_f64_c() * sum + g * local_c[i].to_f64_c();
                    let p = 1.0 / (1.0 + (-2.0 * m).exp());
                    tables[gi][9 * i + j] = prob_to_u64(p);
                }
            }
        }
        let pb = 1.0 - (-2.0 * beta.to_f64_c()).exp();
        let p_ghost = std::array::from_fn(|k| {
            prob_to_u64(1.0 - (-2.0 * beta.to_f64_c() * (k as f64 + 1.0)).exp())
        });

        Ok(GibbsSampler {
            alg,
            beta,
            n,
            nbr,
            ghost_k,
            edge_sites,
            local_c,
            xi: params.xi_re.clone(),
            measure_flip,
            ghost_pinned,
            spins: vec![1; n],
            ghost: 1,
            tables,
            p_bond: prob_to_u64(pb),
            p_ghost,
            rng: key.tagged("gibbs").rng(),
            stack: Vec::with_capacity(n),
            in_cluster: vec![0; n + 1],
            epoch: 0,
            clusters_per_sweep: 2,
            sweeps_done: 0,
        })
    }

    pub fn sweeps_done(&self) -> u64 {
        self.sweeps_done
    }

    /// Spins in the physical gauge (boundary as specified).
    pub fn physical_spins(&self) -> SpinConfig {
        let sign = if self.ghost_pinned {
            1
        } else {
            self.ghost * self.measure_flip
        };
        SpinConfig {
            spins: self.spins.iter().map(|&s| s * sign).collect(),
        }
    }

    pub fn total_magnetisation(&self) -> i64 {
        let sign = if self.ghost_pinned {
            1i64
        } else {
            i64::from(self.ghost * self.measure_flip)
        };
        sign * self.spins.iter().map(|&s| i64::from(s)).sum::<i64>()
    }

    #[inline]
    fn heat_bath_site(&mut self, i: usize) {
        let mut sum = 0i32;
        for &j in &self.nbr[i] {
            if j >= 0 {
                sum += i32::from(self.spins[j as usize]);
            }
        }
        // sum is any integer in [-4, 4]: odd for sites with an odd number of
        // interior neighbours.
        let gi = if self.ghost > 0 { 0 } else { 1 };
        let th = self.tables[gi][9 * i + (sum + 4) as usize];
        self.spins[i] = if self.rng.next_u64() < th { 1 } else { -1 };
    }

    fn heat_bath_sweep(&mut self) {
        for i in 0..self.n {
            self.heat_bath_site(i);
        }
    }

    /// Grow one cluster from `seed` in the extended (ghost) graph with the
    /// zero-field bond probabilities. Returns whether the ghost joined.
    fn grow_cluster(&mut self, seed: usize) -> bool {
        self.epoch += 1;
        let ep = self.epoch;
        self.stack.clear();
        self.stack.push(seed as u32);
        self.in_cluster[seed] = ep;
        let mut ghost_in = false;
        while let Some(u) = self.stack.pop() {
            let u = u as usize;
            let su = self.spins[u];
            for &v in &self.nbr[u] {
                if v >= 0 {
                    let v = v as usize;
                    if self.in_cluster[v] != ep
                        && self.spins[v] == su
                        && self.rng.next_u64() < self.p_bond
                    {
                        self.in_cluster[v] = ep;
                        self.stack.push(v as u32);
                    }
                }
            }
            // Multi-bond to the ghost.
            let k = self.ghost_k[u];
            if k > 0
                && !ghost_in
                && self.ghost == su
                && self.rng.next_u64() < self.p_ghost[(k - 1) as usize]
            {
                ghost_in = true;
                // Ghost joins: its neighbours are all edge sites.
                for idx in 0..self.edge_sites.len() {
                    let w = self.edge_sites[idx] as usize;
                    if self.in_cluster[w] != ep && self.spins[w] == self.ghost {
                        let kw = self.ghost_k[w];
                        if self.rng.next_u64() < self.p_ghost[(kw - 1) as usize] {
                            self.in_cluster[w] = ep;
                            self.stack.push(w as u32);
                        }
                    }
                }
            }
        }
        ghost_in
    }

    fn flip_marked(&mut self, ghost_in: bool) {
        let ep = self.epoch;
        for i in 0..self.n {
            if self.in_cluster[i] == ep {
                self.spins[i] = -self.spins[i];
            }
        }
        if ghost_in {
            self.ghost = -self.ghost;
        }
    }

    /// One Wolff cluster flip (zero field). Returns the cluster size.
    fn wolff_cluster(&mut self) -> usize {
        let seed = (self.rng.next_u64() % self.n as u64) as usize;
        let ghost_in = self.grow_cluster(seed);
        let size = (0..self.n).filter(|&i| self.in_cluster[i] == self.epoch).count();
        self.flip_marked(ghost_in);
        size
    }

    /// One cluster proposal filtered on the field term; valid for any real
    /// field. Returns true if accepted.
    fn filtered_cluster_move(&mut self) -> bool {
        let seed = (self.rng.next_u64() % self.n as u64) as usize;
        let ghost_in = self.grow_cluster(seed);
        let ep = self.epoch;
        // Field term of the extended Hamiltonian: ghost * sum_i xi_i s_i.
        // Flipping the cluster changes it by -2 ghost sum_{i in D} xi_i s_i,
        // D = cluster if the ghost stays, complement if the ghost flips.
        let mut d_sum = S::zero();
        for i in 0..self.n {
            let inside = self.in_cluster[i] == ep;
            if inside != ghost_in {
                d_sum += self.xi[i] * S::from_i8(self.spins[i]).unwrap();
            }
        }
        let delta = -S::from_f64_c(2.0) * S::from_i8(self.ghost).unwrap() * d_sum;
        let accept = if delta >= S::zero() {
            true
        } else {
            let u = (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            u < delta.to_f64_c().exp()
        };
        if accept {
            self.flip_marked(ghost_in);
        }
        accept
    }

    /// One sweep of the configured dynamics: a lattice pass for heat-bath,
    /// one cluster flip for Wolff, or a heat-bath pass plus
    /// `clusters_per_sweep` filtered proposals for the hybrid.
    ///
    /// A Wolff sweep is deliberately a fixed number of flips (one): batching
    /// "until the volume is touched" makes the measurement times depend on
    /// the trajectory, which length-biases the sampled states.
    pub fn sweep(&mut self) {
        match self.alg {
            Algorithm::HeatBath => self.heat_bath_sweep(),
            Algorithm::Wolff => {
                self.wolff_cluster();
            }
            Algorithm::HybridCluster => {
                self.heat_bath_sweep();
                for _ in 0..self.clusters_per_sweep {
                    self.filtered_cluster_move();
                }
            }
        }
        self.sweeps_done += 1;
    }

    /// Measure the autocorrelation time from a pilot run and discard
    /// `20 * tau` sweeps (including the pilot).
    pub fn equilibrate(&mut self, pilot_sweeps: usize) -> EquilibrationReport<S> {
        let mut series = Vec::with_capacity(pilot_sweeps);
        for _ in 0..pilot_sweeps {
            self.sweep();
            series.push(S::from_i64(self.total_magnetisation()).unwrap());
        }
        let tau = integrated_autocorrelation(&series);
        let want = (S::from_f64_c(20.0) * tau).to_f64_c().ceil() as usize;
        let extra = want.saturating_sub(pilot_sweeps);
        for _ in 0..extra {
            self.sweep();
        }
        EquilibrationReport {
            tau,
            sweeps_discarded: pilot_sweeps + extra,
        }
    }

    /// Equilibrate, then collect `n_samples` configurations `spacing` sweeps
    /// apart together with the magnetisation autocorrelation time.
    pub fn run(
        &mut self,
        pilot_sweeps: usize,
        n_samples: usize,
        spacing: usize,
    ) -> (Vec<SpinConfig>, EquilibrationReport<S>) {
        let report = self.equilibrate(pilot_sweeps);
        let mut out = Vec::with_capacity(n_samples);
        for _ in 0..n_samples {
            for _ in 0..spacing.max(1) {
                self.sweep();
            }
            out.push(self.physical_spins());
        }
        (out, report)
    }

    /// Replace the external field values (lattice and boundary unchanged),
    /// e.g. for a fresh disorder replica, keeping the current spins as the
    /// starting configuration.
    pub fn set_field(&mut self, xi: &[S]) {
        assert_eq!(xi.len(), self.n);
        assert!(
            self.alg != Algorithm::Wolff || xi.iter().all(|&v| v == S::zero()),
            "cluster sampler requires zero field"
        );
        for i in 0..self.n {
            let bpart = if self.ghost_pinned {
                self.local_c[i] - self.xi[i]
            } else {
                self.beta * S::from_u8(self.ghost_k[i]).unwrap()
            };
            self.local_c[i] = bpart + xi[i];
            self.xi[i] = xi[i];
            for (gi, g) in [1.0f64, -1.0].iter().enumerate() {
                for j in 0..9usize {
                    let sum = j as f64 - 4.0;
                    let m = self.beta.to_f64_c() * sum + g * self.local_c[i].to_f64_c();
                    let p = 1.0 / (1.0 + (-2.0 * m).exp());
                    self.tables[gi][9 * i + j] = prob_to_u64(p);
                }
            }
        }
    }

    /// Overwrite the current configuration (physical gauge).
    pub fn set_spins(&mut self, spins: &[i8]) {
        assert_eq!(spins.len(), self.n);
        let sign = if self.ghost_pinned {
            1
        } else {
            self.ghost * self.measure_flip
        };
        for i in 0..self.n {
            self.spins[i] = spins[i] * sign;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{exact_correlations, exact_partition, ModelParams};
    use crate::lattice::Lattice;
    use crate::scalar::critical_beta;
    use crate::stats::{mean, standard_error};

    #[test]
    fn wolff_with_field_is_rejected() {
        let lat = Lattice::strip(2, 2, 0.25_f64);
        let mut params = ModelParams::pure_plus(&lat);
        params.xi_re[0] = 0.1;
        assert!(matches!(
            GibbsSampler::new(&lat, &params, Algorithm::Wolff, StreamKey::new(0)),
            Err(Error::WolffWithField)
        ));
    }

    #[test]
    fn single_site_heat_bath_matches_tanh() {
        let lat = Lattice::strip(1, 1, 0.5_f64);
        let params = ModelParams::pure_plus(&lat);
        let mut s = GibbsSampler::new(&lat, &params, Algorithm::HeatBath, StreamKey::new(1)).unwrap();
        let n = 1_000_000usize;
        let mut vals = Vec::with_capacity(n);
        for _ in 0..n {
            s.sweep();
            vals.push(f64::from(s.physical_spins().spins[0]));
        }
        let expect = (4.0 * critical_beta::<f64>()).tanh();
        let (m, se) = (mean(&vals), standard_error(&vals));
        assert!((m - expect).abs() < 3.0 * se.max(1e-4), "m={m} expect={expect} se={se}");
    }

    #[test]
    fn infinite_temperature_is_fair_coin() {
        let lat = Lattice::strip(4, 4, 0.2_f64);
        let mut params = ModelParams::pure_plus(&lat);
        params.beta = 0.0;
        let mut s = GibbsSampler::new(&lat, &params, Algorithm::HeatBath, StreamKey::new(2)).unwrap();
        let mut vals = Vec::new();
        for _ in 0..20_000 {
            s.sweep();
            vals.push(s.total_magnetisation() as f64 / 16.0);
        }
        let (m, se) = (mean(&vals), standard_error(&vals));
        assert!(m.abs() < 3.0 * se.max(2e-3), "m={m}");
    }

    #[test]
    fn wolff_matches_enumeration_on_3x3() {
        let lat = Lattice::strip(3, 3, 0.25_f64);
        let params = ModelParams::pure_plus(&lat);
        let corr = exact_correlations(&lat, &params, 1).unwrap();
        let mut s = GibbsSampler::new(&lat, &params, Algorithm::Wolff, StreamKey::new(3)).unwrap();
        let (samples, _) = s.run(100, 40_000, 4);
        for site in [0usize, 4, 8] {
            let vals: Vec<f64> = samples.iter().map(|c| f64::from(c.spins[site])).collect();
            let expect = corr.get(&[site]).unwrap();
            let (m, se) = (mean(&vals), standard_error(&vals));
            assert!(
                (m - expect).abs() < 4.0 * se.max(1e-3),
                "site {site}: {m} vs {expect} (se {se})"
            );
        }
    }

    #[test]
    fn heat_bath_and_wolff_agree_on_8x8() {
        let lat = Lattice::strip(8, 8, 0.1_f64);
        let params = ModelParams::pure_plus(&lat);
        let center = 3 * 8 + 3;

        let mut hb = GibbsSampler::new(&lat, &params, Algorithm::HeatBath, StreamKey::new(4)).unwrap();
        let (hs, hrep) = hb.run(500, 30_000, 2);
        let hv: Vec<f64> = hs.iter().map(|c| f64::from(c.spins[center])).collect();

        let mut wf = GibbsSampler::new(&lat, &params, Algorithm::Wolff, StreamKey::new(5)).unwrap();
        let (ws, _) = wf.run(200, 30_000, 6);
        let wv: Vec<f64> = ws.iter().map(|c| f64::from(c.spins[center])).collect();

        let (hm, hse) = (mean(&hv), standard_error(&hv));
        let (wm, wse) = (mean(&wv), standard_error(&wv));
        // Inflate the heat-bath error by its autocorrelation time.
        let hse = hse * (2.0 * hrep.tau / 2.0).sqrt().max(1.0);
        let tol = 3.0 * (hse * hse + wse * wse).sqrt();
        assert!((hm - wm).abs() < tol.max(5e-3), "hb {hm}+-{hse} vs wolff {wm}+-{wse}");
    }

    #[test]
    fn minus_boundary_flips_wolff_measurement() {
        let lat = Lattice::strip(2, 2, 0.25_f64);
        let mut params = ModelParams::pure_plus(&lat);
        params.boundary = Boundary::Uniform(-1);
        let corr_minus = {
            let mut s =
                GibbsSampler::new(&lat, &params, Algorithm::Wolff, StreamKey::new(6)).unwrap();
            let (samples, _) = s.run(50, 30_000, 4);
            let vals: Vec<f64> = samples
                .iter()
                .map(|c| c.spins.iter().map(|&v| f64::from(v)).sum::<f64>() / 4.0)
                .collect();
            mean(&vals)
        };
        let exact = exact_correlations(&lat, &ModelParams::pure_plus(&lat), 1).unwrap();
        let expect: f64 = -(0..4).map(|i| exact.get(&[i]).unwrap()).sum::<f64>() / 4.0;
        assert!((corr_minus - expect).abs() < 0.01, "{corr_minus} vs {expect}");
    }

    // The hybrid sampler targets the field-dressed measure: compare the full
    // 16-state distribution on 2x2 against exact probabilities.
    #[test]
    fn hybrid_matches_exact_distribution_on_2x2() {
        let lat = Lattice::strip(2, 2, 0.25_f64);
        let mut params = ModelParams::pure_plus(&lat);
        params.xi_re = vec![0.4, -0.6, 0.2, -0.1];

        // Exact state probabilities.
        let bonds = super::super::interior_bonds(&lat);
        let bf = params.boundary_field(&lat);
        let mut probs = [0.0f64; 16];
        let mut total = 0.0;
        for state in 0..16u64 {
            let spin = |i: usize| 1.0 - 2.0 * ((state >> i) & 1) as f64;
            let mut e = 0.0;
            for &(i, j) in &bonds {
                e += spin(i as usize) * spin(j as usize);
            }
            e *= params.beta;
            for i in 0..4 {
                e += (bf[i] + params.xi_re[i]) * spin(i);
            }
            probs[state as usize] = e.exp();
            total += probs[state as usize];
        }
        for p in probs.iter_mut() {
            *p /= total;
        }

        let mut s =
            GibbsSampler::new(&lat, &params, Algorithm::HybridCluster, StreamKey::new(7)).unwrap();
        let n = 200_000usize;
        let mut counts = [0u64; 16];
        s.equilibrate(100);
        for _ in 0..n {
            s.sweep();
            let c = s.physical_spins();
            let mut state = 0usize;
            for (i, &sp) in c.spins.iter().enumerate() {
                if sp < 0 {
                    state |= 1 << i;
                }
            }
            counts[state] += 1;
        }
        for state in 0..16 {
            let emp = counts[state] as f64 / n as f64;
            let se = (probs[state] * (1.0 - probs[state]) / n as f64).sqrt();
            assert!(
                (emp - probs[state]).abs() < 6.0 * se.max(5e-4),
                "state {state}: emp {emp} vs exact {}",
                probs[state]
            );
        }
    }

    #[test]
    fn hybrid_agrees_with_heat_bath_on_field_average() {
        // Quenched field on 4x4; both dynamics must give the same E[sigma].
        let lat = Lattice::strip(4, 4, 0.2_f64);
        let mut params = ModelParams::pure_plus(&lat);
        let mut rng = StreamKey::new(8).tagged("field").rng();
        for i in 0..16 {
            params.xi_re[i] = 0.3 * f64::standard_normal(&mut rng);
        }
        let z = exact_partition(&lat, &params).unwrap().re;
        assert!(z.is_finite());

        let run = |alg: Algorithm, seed: u64| -> (f64, f64) {
            let mut s = GibbsSampler::new(&lat, &params, alg, StreamKey::new(seed)).unwrap();
            let (samples, rep) = s.run(400, 30_000, 2);
            let vals: Vec<f64> = samples
                .iter()
                .map(|c| c.spins.iter().map(|&v| f64::from(v)).sum::<f64>())
                .collect();
            let infl = (rep.tau).sqrt().max(1.0);
            (mean(&vals), standard_error(&vals) * infl)
        };
        let (hm, hse) = run(Algorithm::HeatBath, 9);
        let (cm, cse) = run(Algorithm::HybridCluster, 10);
        let tol = 4.0 * (hse * hse + cse * cse).sqrt();
        assert!((hm - cm).abs() < tol.max(0.02), "{hm}+-{hse} vs {cm}+-{cse}");
    }
}

