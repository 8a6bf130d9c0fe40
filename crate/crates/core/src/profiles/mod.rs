//! Wave profiles `f` on `N` and regularizations `δ_ε` of the Dirac measure.

mod growth;
mod nets;
mod verify;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::geometry::{fd_step, ChartPoint, Manifold, TangentVector};

pub use growth::{classify_growth, GrowthClass, GrowthOptions, GrowthReport, GROWTH_MARGIN};
pub use nets::{
    bump, bump_derivative, bump_normalization, AsymmetricMollifier, DeltaNet, DeltaNetRef,
    FixedSupportNet, Mollifier, ScaledNet, SignedNet,
};
pub(crate) use growth::least_squares;
pub use verify::{verify_strict_delta_net, NetProperty, NetVerification, VerificationRow};

/// A smooth profile function `f: N → R` with its coordinate differential.
pub trait WaveProfile: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn value(&self, x: &[f64]) -> f64;

    /// Coordinate partials `∂f/∂x^j`; central differences unless overridden.
    fn differential(&self, x: &[f64]) -> Vec<f64> {
        central_differential(|p| self.value(p), x)
    }

    fn analytic_gradient(&self) -> bool {
        false
    }

    fn is_zero(&self) -> bool {
        false
    }
}

pub type ProfileRef = Arc<dyn WaveProfile>;

pub fn central_differential(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|j| {
            let step = fd_step(x[j]);
            probe[j] = x[j] + step;
            let plus = f(&probe);
            probe[j] = x[j] - step;
            let minus = f(&probe);
            probe[j] = x[j];
            (plus - minus) / (2.0 * step)
        })
        .collect()
}

/// `(∇_x f)^k = h^km ∂_m f` at `x`.
pub fn metric_gradient(
    profile: &dyn WaveProfile,
    model: &dyn Manifold,
    x: &ChartPoint,
) -> Result<TangentVector> {
    model.check_point(x.coords())?;
    let comps = raise_index(model, x.coords(), &profile.differential(x.coords()));
    TangentVector::new(x.clone(), comps)
}

pub(crate) fn raise_index(model: &dyn Manifold, x: &[f64], covector: &[f64]) -> Vec<f64> {
    let hinv = model.inverse_metric(x);
    let n = covector.len();
    (0..n)
        .map(|k| (0..n).map(|m| hinv[(k, m)] * covector[m]).sum())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constant {
    pub value: f64,
}

impl WaveProfile for Constant {
    fn name(&self) -> &str {
        "constant"
    }

    fn value(&self, _x: &[f64]) -> f64 {
        self.value
    }

    fn differential(&self, x: &[f64]) -> Vec<f64> {
        vec![0.0; x.len()]
    }

    fn analytic_gradient(&self) -> bool {
        true
    }

    fn is_zero(&self) -> bool {
        self.value == 0.0
    }
}

/// `f(x) = a·x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub coeffs: Vec<f64>,
    pub offset: f64,
}

impl WaveProfile for Linear {
    fn name(&self) -> &str {
        "linear"
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.offset + self.coeffs.iter().zip(x).map(|(a, x)| a * x).sum::<f64>()
    }

    fn differential(&self, _x: &[f64]) -> Vec<f64> {
        self.coeffs.clone()
    }

    fn analytic_gradient(&self) -> bool {
        true
    }

    fn is_zero(&self) -> bool {
        self.offset == 0.0 && self.coeffs.iter().all(|&a| a == 0.0)
    }
}

/// `f(x) = (x − c)ᵀ A (x − c)` with `A` symmetrized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    matrix: DMatrix<f64>,
    center: Vec<f64>,
}

impl QuadraticForm {
    pub fn new(matrix: DMatrix<f64>, center: Vec<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidInput("quadratic form needs a square matrix".into()));
        }
        check_dim(matrix.nrows(), center.len())?;
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        Ok(Self { matrix, center })
    }
}

impl WaveProfile for QuadraticForm {
    fn name(&self) -> &str {
        "quadratic-form"
    }

    fn value(&self, x: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        crate::geometry::quadratic_form(&self.matrix, &d)
    }

    fn differential(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                2.0 * (0..n)
                    .map(|j| self.matrix[(i, j)] * (x[j] - self.center[j]))
                    .sum::<f64>()
            })
            .collect()
    }

    fn analytic_gradient(&self) -> bool {
        true
    }
}

/// `f(x) = s |x − c|^p` in the chart-coordinate norm.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPower {
    pub exponent: f64,
    pub scale: f64,
    pub center: Vec<f64>,
}

impl WaveProfile for RadialPower {
    fn name(&self) -> &str {
        "radial-power"
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r = dist(x, &self.center);
        if r == 0.0 {
            return if self.exponent == 0.0 { self.scale } else { 0.0 };
        }
        self.scale * r.powf(self.exponent)
    }

    fn differential(&self, x: &[f64]) -> Vec<f64> {
        let r = dist(x, &self.center);
        if r == 0.0 {
            // the cone point has no classical gradient when p ≤ 1; use 0
            return vec![0.0; x.len()];
        }
        let k = self.scale * self.exponent * r.powf(self.exponent - 2.0);
        x.iter().zip(&self.center).map(|(a, c)| k * (a - c)).collect()
    }

    fn analytic_gradient(&self) -> bool {
        true
    }
}

/// `f(x) = A exp(−|x − c|² / (2 w²))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBump {
    pub amplitude: f64,
    pub width: f64,
    pub center: Vec<f64>,
}

impl WaveProfile for GaussianBump {
    fn name(&self) -> &str {
        "gaussian-bump"
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r2 = dist(x, &self.center).powi(2);
        self.amplitude * (-r2 / (2.0 * self.width * self.width)).exp()
    }

    fn differential(&self, x: &[f64]) -> Vec<f64> {
        let f = self.value(x);
        let w2 = self.width * self.width;
        x.iter().zip(&self.center).map(|(a, c)| -f * (a - c) / w2).collect()
    }

    fn analytic_gradient(&self) -> bool {
        true
    }

    fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }
}

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A profile given only by its values; the differential is differenced.
#[derive(Clone)]
pub struct FnProfile {
    name: String,
    f: ScalarFn,
}

impl FnProfile {
    pub fn new(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for FnProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnProfile").field("name", &self.name).finish_non_exhaustive()
    }
}

impl WaveProfile for FnProfile {
    fn name(&self) -> &str {
        &self.name
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

fn dist(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Euclidean, HyperbolicHalfPlane, SphereStereographic};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gradient_of_linear_profile_on_flat_space() {
        let f = Linear {
            coeffs: vec![1.0, 0.0],
            offset: 0.0,
        };
        let g = metric_gradient(&f, &Euclidean::new(2), &ChartPoint::new(vec![3.0, -1.0])).unwrap();
        assert_eq!(g.comps, vec![1.0, 0.0]);
    }

    #[test]
    fn gradient_on_half_plane_raises_with_inverse_metric() {
        let f = Linear {
            coeffs: vec![0.0, 1.0],
            offset: 0.0,
        };
        let g = metric_gradient(&f, &HyperbolicHalfPlane, &ChartPoint::new(vec![0.0, 1.0])).unwrap();
        assert_eq!(g.comps, vec![0.0, 1.0]);
        let g = metric_gradient(&f, &HyperbolicHalfPlane, &ChartPoint::new(vec![0.0, 2.0])).unwrap();
        assert_eq!(g.comps, vec![0.0, 4.0]);
    }

    #[test]
    fn constant_profile_has_zero_gradient() {
        let f = Constant { value: 3.5 };
        for model in [&SphereStereographic as &dyn Manifold, &HyperbolicHalfPlane] {
            let g = metric_gradient(&f, model, &ChartPoint::new(vec![0.4, 0.7])).unwrap();
            assert!(g.comps.iter().all(|&c| c == 0.0));
        }
    }

    #[test]
    fn gradient_domain_error_propagates() {
        let f = Constant { value: 1.0 };
        let r = metric_gradient(&f, &HyperbolicHalfPlane, &ChartPoint::new(vec![0.0, 0.0]));
        assert!(matches!(r, Err(Error::Domain { .. })));
    }

    #[test]
    fn analytic_differentials_match_difference_quotients() {
        let profiles: Vec<Box<dyn WaveProfile>> = vec![
            Box::new(Linear {
                coeffs: vec![0.3, -1.2],
                offset: 2.0,
            }),
            Box::new(
                QuadraticForm::new(
                    DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.1, 2.0]),
                    vec![0.2, -0.3],
                )
                .unwrap(),
            ),
            Box::new(RadialPower {
                exponent: 1.5,
                scale: 0.7,
                center: vec![0.0, 0.0],
            }),
            Box::new(GaussianBump {
                amplitude: 1.3,
                width: 0.6,
                center: vec![0.1, 0.9],
            }),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in &profiles {
            assert!(p.analytic_gradient());
            for _ in 0..40 {
                let x = [rng.gen_range(-2.0..2.0), rng.gen_range(0.1..2.0)];
                let a = p.differential(&x);
                let fd = central_differential(|q| p.value(q), &x);
                for (u, v) in a.iter().zip(&fd) {
                    assert!((u - v).abs() < 1e-6 * (1.0 + u.abs()), "{} at {x:?}", p.name());
                }
            }
        }
    }

    #[test]
    fn fn_profile_differential_falls_back_to_differences() {
        let p = FnProfile::new("sin", |x: &[f64]| x[0].sin() * x[1]);
        assert!(!p.analytic_gradient());
        let d = p.differential(&[0.5, 2.0]);
        assert!((d[0] - 2.0 * 0.5f64.cos()).abs() < 1e-8);
        assert!((d[1] - 0.5f64.sin()).abs() < 1e-8);
    }
}
