//! Single-chart Riemannian manifolds `(N, h)`.
//!
//! Every model lives in one coordinate chart. Points outside the chart domain
//! are rejected with [`Error::Domain`]; there is no atlas and no extrapolation.

mod distance;
pub(crate) mod geodesic;
mod models;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};

pub use distance::{distance_estimate, DistanceEstimate, DistanceKind};
pub use geodesic::{background_geodesic, BackgroundGeodesic};
pub use models::{CustomMetric, Euclidean, HyperbolicHalfPlane, SphereStereographic};

/// Optimal relative step for central first differences, `eps^(1/3)`.
pub fn fd_step(scale: f64) -> f64 {
    f64::EPSILON.cbrt() * scale.abs().max(1.0)
}

/// Chart coordinates `(x^1, ..., x^n)` of a point of `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Self { coords: coords.into() }
    }

    /// Builds a point and checks it against the model's dimension and chart.
    pub fn on(model: &dyn Manifold, coords: impl Into<Vec<f64>>) -> Result<Self> {
        let p = Self::new(coords);
        model.check_point(&p.coords)?;
        Ok(p)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// Components of a tangent vector at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: ChartPoint,
    pub comps: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: ChartPoint, comps: impl Into<Vec<f64>>) -> Result<Self> {
        let comps = comps.into();
        check_dim(base.dim(), comps.len())?;
        Ok(Self { base, comps })
    }

    /// Riemannian squared length `h_ij v^i v^j`.
    pub fn norm_squared(&self, model: &dyn Manifold) -> Result<f64> {
        model.check_point(self.base.coords())?;
        Ok(quadratic_form(&model.metric(self.base.coords()), &self.comps))
    }
}

/// Christoffel symbols `Γ^k_ij` of a chart at one point, stored densely.
#[derive(Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, value: f64) {
        self.data[(k * self.dim + i) * self.dim + j] = value;
    }

    /// Writes the contraction `Γ^k_ij a^i b^j` into `out`.
    pub fn contract_into(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for (k, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = 0.0;
            let block = &self.data[k * n * n..(k + 1) * n * n];
            for (row, &ai) in block.chunks_exact(n).zip(a) {
                if ai == 0.0 {
                    continue;
                }
                acc += ai * row.iter().zip(b).map(|(g, bj)| g * bj).sum::<f64>();
            }
            *o = acc;
        }
    }

    pub fn contract(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.contract_into(a, b, &mut out);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest violation of `Γ^k_ij = Γ^k_ji`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..i {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }
}

impl fmt::Debug for Christoffel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for k in 0..self.dim {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let g = self.get(k, i, j);
                    if g != 0.0 {
                        list.entry(&format_args!("Γ^{}_{}{} = {g}", k + 1, i + 1, j + 1));
                    }
                }
            }
        }
        list.finish()
    }
}

/// A Riemannian manifold covered by a single chart.
///
/// Implementors provide the metric and its Christoffel symbols on raw
/// coordinate slices; callers are expected to have checked `in_domain`.
pub trait Manifold: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn in_domain(&self, x: &[f64]) -> bool;

    /// `h_ij(x)`.
    fn metric(&self, x: &[f64]) -> DMatrix<f64>;

    /// `h^ij(x)`.
    fn inverse_metric(&self, x: &[f64]) -> DMatrix<f64> {
        let h = self.metric(x);
        h.clone()
            .cholesky()
            .map(|c| c.inverse())
            .or_else(|| h.try_inverse())
            .unwrap_or_else(|| DMatrix::from_element(self.dim(), self.dim(), f64::NAN))
    }

    fn christoffel(&self, x: &[f64]) -> Christoffel;

    fn completeness_declared(&self) -> bool {
        true
    }

    /// Exact Riemannian distance when a closed form is known.
    fn closed_form_distance(&self, _x: &[f64], _y: &[f64]) -> Option<f64> {
        None
    }

    /// Dimension and chart-domain check for a raw coordinate slice.
    fn check_point(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        if !x.iter().all(|c| c.is_finite()) || !self.in_domain(x) {
            return Err(Error::Domain {
                model: self.name().to_string(),
                coords: x.to_vec(),
            });
        }
        Ok(())
    }
}

pub type ManifoldRef = Arc<dyn Manifold>;

/// `Γ^k_ij(x)` with the chart-domain check applied.
pub fn christoffel_at(model: &dyn Manifold, x: &ChartPoint) -> Result<Christoffel> {
    model.check_point(x.coords())?;
    Ok(model.christoffel(x.coords()))
}

/// `h_ij a^i a^j`.
pub fn quadratic_form(h: &DMatrix<f64>, a: &[f64]) -> f64 {
    let n = a.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += h[(i, j)] * a[i] * a[j];
        }
    }
    acc
}

/// Christoffel symbols from a metric callback by central differences of `h`.
pub fn christoffel_from_metric(
    dim: usize,
    metric: &dyn Fn(&[f64]) -> DMatrix<f64>,
    x: &[f64],
) -> Christoffel {
    // dh[l] = ∂_l h
    let mut dh = Vec::with_capacity(dim);
    let mut probe = x.to_vec();
    for l in 0..dim {
        let step = fd_step(x[l]);
        probe[l] = x[l] + step;
        let plus = metric(&probe);
        probe[l] = x[l] - step;
        let minus = metric(&probe);
        probe[l] = x[l];
        dh.push((plus - minus) / (2.0 * step));
    }
    let h = metric(x);
    let hinv = h
        .clone()
        .try_inverse()
        .unwrap_or_else(|| DMatrix::from_element(dim, dim, f64::NAN));
    let mut gamma = Christoffel::zeros(dim);
    for k in 0..dim {
        for i in 0..dim {
            for j in i..dim {
                let mut acc = 0.0;
                for m in 0..dim {
                    acc += hinv[(k, m)] * (dh[i][(m, j)] + dh[j][(m, i)] - dh[m][(i, j)]);
                }
                gamma.set(k, i, j, 0.5 * acc);
                gamma.set(k, j, i, 0.5 * acc);
            }
        }
    }
    gamma
}

/// Residual of metric compatibility `∂_l h_ij − Γ^m_li h_mj − Γ^m_lj h_im`,
/// maximised over all index triples, with `∂_l h` by central differences.
pub fn metric_compatibility_residual(model: &dyn Manifold, x: &[f64]) -> f64 {
    let n = model.dim();
    let h = model.metric(x);
    let gamma = model.christoffel(x);
    let mut probe = x.to_vec();
    let mut worst: f64 = 0.0;
    for l in 0..n {
        let step = fd_step(x[l]);
        probe[l] = x[l] + step;
        let plus = model.metric(&probe);
        probe[l] = x[l] - step;
        let minus = model.metric(&probe);
        probe[l] = x[l];
        let dh = (plus - minus) / (2.0 * step);
        for i in 0..n {
            for j in 0..n {
                let mut rhs = 0.0;
                for m in 0..n {
                    rhs += gamma.get(m, l, i) * h[(m, j)] + gamma.get(m, l, j) * h[(i, m)];
                }
                worst = worst.max((dh[(i, j)] - rhs).abs());
            }
        }
    }
    worst
}
