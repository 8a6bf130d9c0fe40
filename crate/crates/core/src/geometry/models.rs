use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::{christoffel_from_metric, Christoffel, Manifold};

/// Flat `R^n` with `h = δ`.
#[derive(Debug, Clone)]
pub struct Euclidean {
    dim: usize,
    name: String,
}

impl Euclidean {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "euclidean dimension must be positive");
        Self {
            dim,
            name: format!("euclidean({dim})"),
        }
    }
}

impl Manifold for Euclidean {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }

    fn metric(&self, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.dim, self.dim)
    }

    fn inverse_metric(&self, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.dim, self.dim)
    }

    fn christoffel(&self, _x: &[f64]) -> Christoffel {
        Christoffel::zeros(self.dim)
    }

    fn closed_form_distance(&self, x: &[f64], y: &[f64]) -> Option<f64> {
        Some(x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
    }
}

// Conformally flat metric h = e^{2φ} δ:
// Γ^k_ij = δ^k_i ∂_jφ + δ^k_j ∂_iφ − δ_ij ∂_kφ.
fn conformal_christoffel(dphi: &[f64]) -> Christoffel {
    let n = dphi.len();
    let mut g = Christoffel::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                if k == i {
                    v += dphi[j];
                }
                if k == j {
                    v += dphi[i];
                }
                if i == j {
                    v -= dphi[k];
                }
                g.set(k, i, j, v);
            }
        }
    }
    g
}

/// Upper half-plane `{x² > 0}` with `h = δ / (x²)²`, curvature −1.
#[derive(Debug, Clone, Default)]
pub struct HyperbolicHalfPlane;

impl Manifold for HyperbolicHalfPlane {
    fn name(&self) -> &str {
        "hyperbolic-half-plane"
    }

    fn dim(&self) -> usize {
        2
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x[1] > 0.0
    }

    fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(2, 2) / (x[1] * x[1])
    }

    fn inverse_metric(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(2, 2) * (x[1] * x[1])
    }

    fn christoffel(&self, x: &[f64]) -> Christoffel {
        // φ = −ln x²
        conformal_christoffel(&[0.0, -1.0 / x[1]])
    }

    fn closed_form_distance(&self, x: &[f64], y: &[f64]) -> Option<f64> {
        let chord = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
        Some(2.0 * (chord / (2.0 * (x[1] * y[1]).sqrt())).asinh())
    }
}

/// Unit 2-sphere in the stereographic chart from the north pole:
/// `h = 4 δ / (1 + |x|²)²`. The chart misses the north pole, which sits at
/// coordinate infinity; geodesics through it trip the blow-up guard.
#[derive(Debug, Clone, Default)]
pub struct SphereStereographic;

impl SphereStereographic {
    fn embed(x: &[f64]) -> [f64; 3] {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let d = 1.0 + r2;
        [2.0 * x[0] / d, 2.0 * x[1] / d, (r2 - 1.0) / d]
    }
}

impl Manifold for SphereStereographic {
    fn name(&self) -> &str {
        "sphere-stereographic"
    }

    fn dim(&self) -> usize {
        2
    }

    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }

    fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        let lam = 2.0 / (1.0 + x[0] * x[0] + x[1] * x[1]);
        DMatrix::identity(2, 2) * (lam * lam)
    }

    fn inverse_metric(&self, x: &[f64]) -> DMatrix<f64> {
        let lam = 2.0 / (1.0 + x[0] * x[0] + x[1] * x[1]);
        DMatrix::identity(2, 2) / (lam * lam)
    }

    fn christoffel(&self, x: &[f64]) -> Christoffel {
        // φ = ln 2 − ln(1 + |x|²)
        let d = 1.0 + x[0] * x[0] + x[1] * x[1];
        conformal_christoffel(&[-2.0 * x[0] / d, -2.0 * x[1] / d])
    }

    fn closed_form_distance(&self, x: &[f64], y: &[f64]) -> Option<f64> {
        let (p, q) = (Self::embed(x), Self::embed(y));
        let chord = p.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        Some(2.0 * (0.5 * chord).min(1.0).asin())
    }
}

pub type MetricFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
pub type DomainFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// User-supplied metric; Christoffel symbols come from central differences.
#[derive(Clone)]
pub struct CustomMetric {
    name: String,
    dim: usize,
    metric: MetricFn,
    domain: DomainFn,
    complete: bool,
}

impl CustomMetric {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        metric: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            metric: Arc::new(metric),
            domain: Arc::new(|_| true),
            complete: true,
        }
    }

    pub fn with_domain(mut self, domain: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        self.domain = Arc::new(domain);
        self
    }

    pub fn with_completeness(mut self, complete: bool) -> Self {
        self.complete = complete;
        self
    }
}

impl fmt::Debug for CustomMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomMetric")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl Manifold for CustomMetric {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        (self.domain)(x)
    }

    fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        (self.metric)(x)
    }

    fn christoffel(&self, x: &[f64]) -> Christoffel {
        christoffel_from_metric(self.dim, &*self.metric, x)
    }

    fn completeness_declared(&self) -> bool {
        self.complete
    }
}
