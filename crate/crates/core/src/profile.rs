//! Field profiles for the coupling `lambda`, the mean field `h` and test
//! functions `phi`: named presets evaluable pointwise, integrable over lattice
//! cells, and square-integrable over the domain.

use crate::scalar::Scalar;
use crate::stats::gauss_legendre;

/// A named profile on the plane. `Constant`, `Linear` and `Bump` are the
/// presets the experiment manifests refer to.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile<S: Scalar> {
    Constant(S),
    /// `c0 + cx * x + cy * y`
    Linear { c0: S, cx: S, cy: S },
    /// `floor + height * exp(1 - 1/(1 - r^2))` inside `|p - center| < radius`,
    /// `floor` outside; a compactly supported smooth bump.
    Bump {
        center: [S; 2],
        radius: S,
        height: S,
        floor: S,
    },
}

impl<S: Scalar> Profile<S> {
    pub fn zero() -> Self {
        Profile::Constant(S::zero())
    }

    pub fn eval(&self, p: [S; 2]) -> S {
        match *self {
            Profile::Constant(c) => c,
            Profile::Linear { c0, cx, cy } => c0 + cx * p[0] + cy * p[1],
            Profile::Bump {
                center,
                radius,
                height,
                floor,
            } => {
                let dx = (p[0] - center[0]) / radius;
                let dy = (p[1] - center[1]) / radius;
                let r2 = dx * dx + dy * dy;
                if r2 < S::one() {
                    floor + height * (S::one() - S::one() / (S::one() - r2)).exp()
                } else {
                    floor
                }
            }
        }
    }

    /// Integral over the axis-aligned box `[lo, hi]` by tensor Gauss-Legendre
    /// with `order^2` points. Order 2 is exact for bilinear profiles.
    pub fn box_integral(&self, lo: [S; 2], hi: [S; 2], order: usize) -> S {
        if let Profile::Constant(c) = *self {
            return c * (hi[0] - lo[0]) * (hi[1] - lo[1]);
        }
        let rule = gauss_legendre::<S>(order);
        let half = S::from_f64_c(0.5);
        let (cx, rx) = (half * (lo[0] + hi[0]), half * (hi[0] - lo[0]));
        let (cy, ry) = (half * (lo[1] + hi[1]), half * (hi[1] - lo[1]));
        let mut acc = S::zero();
        for &(u, wu) in &rule {
            for &(v, wv) in &rule {
                acc += wu * wv * self.eval([cx + rx * u, cy + ry * v]);
            }
        }
        acc * rx * ry
    }

    /// `int_box f^2` by the same rule.
    pub fn box_integral_sq(&self, lo: [S; 2], hi: [S; 2], order: usize) -> S {
        if let Profile::Constant(c) = *self {
            return c * c * (hi[0] - lo[0]) * (hi[1] - lo[1]);
        }
        let rule = gauss_legendre::<S>(order);
        let half = S::from_f64_c(0.5);
        let (cx, rx) = (half * (lo[0] + hi[0]), half * (hi[0] - lo[0]));
        let (cy, ry) = (half * (lo[1] + hi[1]), half * (hi[1] - lo[1]));
        let mut acc = S::zero();
        for &(u, wu) in &rule {
            for &(v, wv) in &rule {
                let f = self.eval([cx + rx * u, cy + ry * v]);
                acc += wu * wv * f * f;
            }
        }
        acc * rx * ry
    }

    /// `||f||^2_{L^2}` over the unit square, composite 4x4 Gauss-Legendre on
    /// a `k x k` tiling.
    pub fn l2_sq_unit_square(&self, k: usize) -> S {
        let kf = S::from_usize(k).unwrap();
        let mut acc = S::zero();
        for i in 0..k {
            for j in 0..k {
                let lo = [S::from_usize(i).unwrap() / kf, S::from_usize(j).unwrap() / kf];
                let hi = [
                    S::from_usize(i + 1).unwrap() / kf,
                    S::from_usize(j + 1).unwrap() / kf,
                ];
                acc += self.box_integral_sq(lo, hi, 4);
            }
        }
        acc
    }

    /// Infimum over the closed unit square, exact for the presets.
    pub fn min_on_unit_square(&self) -> S {
        match *self {
            Profile::Constant(c) => c,
            Profile::Linear { c0, cx, cy } => {
                let mut m = c0;
                for x in [S::zero(), S::one()] {
                    for y in [S::zero(), S::one()] {
                        m = m.min(c0 + cx * x + cy * y);
                    }
                }
                m
            }
            Profile::Bump { height, floor, .. } => {
                if height < S::zero() {
                    floor + height
                } else {
                    floor
                }
            }
        }
    }
}
