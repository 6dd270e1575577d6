//! Small statistics toolbox shared by the estimators: moments with standard
//! errors, bootstrap confidence intervals, the windowed autocorrelation
//! estimator, least-squares slopes and Gaussian quadrature rules.

use crate::rng::StreamKey;
use crate::scalar::Scalar;

/// Sample mean.
pub fn mean<S: Scalar>(xs: &[S]) -> S {
    if xs.is_empty() {
        return S::zero();
    }
    xs.iter().copied().sum::<S>() / S::from_usize(xs.len()).unwrap()
}

/// Unbiased sample variance.
pub fn variance<S: Scalar>(xs: &[S]) -> S {
    if xs.len() < 2 {
        return S::zero();
    }
    let m = mean(xs);
    let ss = xs.iter().map(|&x| (x - m) * (x - m)).sum::<S>();
    ss / S::from_usize(xs.len() - 1).unwrap()
}

/// Standard error of the sample mean (i.i.d. samples).
pub fn standard_error<S: Scalar>(xs: &[S]) -> S {
    (variance(xs) / S::from_usize(xs.len().max(1)).unwrap()).sqrt()
}

/// Mean with its standard error.
pub fn mean_se<S: Scalar>(xs: &[S]) -> (S, S) {
    (mean(xs), standard_error(xs))
}

/// Percentile bootstrap confidence interval for a statistic of one sample.
pub fn bootstrap_ci<S: Scalar, F: Fn(&[S]) -> S>(
    xs: &[S],
    stat: F,
    resamples: usize,
    level: f64,
    key: StreamKey,
) -> (S, S) {
    assert!(!xs.is_empty());
    let n = xs.len();
    let mut vals = Vec::with_capacity(resamples);
    let mut buf = vec![S::zero(); n];
    for b in 0..resamples {
        let k = key.index(b as u64);
        for (i, slot) in buf.iter_mut().enumerate() {
            let j = (k.word(i as u64) % n as u64) as usize;
            *slot = xs[j];
        }
        vals.push(stat(&buf));
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo_idx = ((1.0 - level) / 2.0 * resamples as f64) as usize;
    let hi_idx = (((1.0 + level) / 2.0) * resamples as f64) as usize;
    (vals[lo_idx.min(resamples - 1)], vals[hi_idx.min(resamples - 1)])
}

/// Integrated autocorrelation time of a scalar time series, by the standard
/// windowed estimator: `tau = 1 + 2 sum_{t<=w} rho(t)` with the window `w`
/// grown until `w >= c * tau` (c = 5).
pub fn integrated_autocorrelation<S: Scalar>(xs: &[S]) -> S {
    let n = xs.len();
    if n < 8 {
        return S::one();
    }
    let m = mean(xs);
    let c0 = xs.iter().map(|&x| (x - m) * (x - m)).sum::<S>() / S::from_usize(n).unwrap();
    if c0 <= S::zero() {
        return S::one();
    }
    let mut tau = S::one();
    let c = S::from_f64_c(5.0);
    let max_lag = n / 2;
    for t in 1..max_lag {
        let mut ct = S::zero();
        for i in 0..(n - t) {
            ct += (xs[i] - m) * (xs[i + t] - m);
        }
        ct = ct / S::from_usize(n - t).unwrap();
        tau += S::from_f64_c(2.0) * ct / c0;
        if S::from_usize(t).unwrap() >= c * tau {
            break;
        }
    }
    tau.max(S::one())
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit<S: Scalar>(x: &[S], y: &[S]) -> (S, S) {
    assert_eq!(x.len(), y.len());
    let n = S::from_usize(x.len()).unwrap();
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = S::zero();
    let mut sxy = S::zero();
    for i in 0..x.len() {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    let _ = n;
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Upper tail of the standard normal, `P(Z > z)`.
pub fn normal_upper_tail<S: Scalar>(z: S) -> S {
    S::from_f64_c(0.5 * libm::erfc(z.to_f64_c() / std::f64::consts::SQRT_2))
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre<S: Scalar>(n: usize) -> Vec<(S, S)> {
    // Newton iteration on the Legendre polynomial, standard construction.
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((S::from_f64_c(x), S::from_f64_c(w)));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights for Gauss-Hermite quadrature against the standard
/// normal density: `E[f(Z)] ~= sum w_i f(x_i)`.
pub fn gauss_hermite_normal<S: Scalar>(n: usize) -> Vec<(S, S)> {
    // Roots of the physicists' Hermite polynomial located by a sign-change
    // scan of the orthonormal recursion, refined by Newton. In the scaled
    // recursion the weight is simply 2 / h'_n(x)^2, and the change of
    // variables x -> sqrt(2) x turns the rule into an expectation against
    // the standard normal.
    assert!(n >= 1);
    let bound = (4.0 * n as f64 + 2.0).sqrt();
    let steps = 40 * n;
    let mut brackets = Vec::with_capacity(n);
    let mut prev_x = -bound;
    let mut prev_h = hermite_scaled(n, prev_x).0;
    for i in 1..=steps {
        let x = -bound + 2.0 * bound * i as f64 / steps as f64;
        let h = hermite_scaled(n, x).0;
        if prev_h == 0.0 || prev_h.signum() != h.signum() {
            brackets.push((prev_x, x));
        }
        prev_x = x;
        prev_h = h;
    }
    assert_eq!(brackets.len(), n, "hermite root scan found {} roots", brackets.len());
    let mut out = Vec::with_capacity(n);
    for (lo, hi) in brackets {
        let mut x = 0.5 * (lo + hi);
        for _ in 0..100 {
            let (h, dh) = hermite_scaled(n, x);
            let dx = h / dh;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dh) = hermite_scaled(n, x);
        out.push((
            S::from_f64_c(std::f64::consts::SQRT_2 * x),
            S::from_f64_c(2.0 / (dh * dh * std::f64::consts::PI.sqrt())),
        ));
    }
    out
}

/// Orthonormal Hermite recursion `h_k = H_k / sqrt(2^k k! sqrt(pi))`;
/// returns `(h_n(x), h_n'(x))` without overflow.
fn hermite_scaled(n: usize, x: f64) -> (f64, f64) {
    let mut h0 = std::f64::consts::PI.powf(-0.25);
    let mut h1 = std::f64::consts::SQRT_2 * x * h0;
    if n == 0 {
        return (h0, 0.0);
    }
    for k in 1..n {
        let k = k as f64;
        let h2 = ((2.0 / (k + 1.0)).sqrt() * x * h1) - ((k / (k + 1.0)).sqrt() * h0);
        h0 = h1;
        h1 = h2;
    }
    let dh = (2.0 * n as f64).sqrt() * h0;
    (h1, dh)
}
