use nalgebra::{DMatrix, DVector};

use super::geodesic::integrate_background;
use super::{quadratic_form, ChartPoint, Manifold};
use crate::error::Result;
use crate::quadrature;

const SHOOTING_TOL: f64 = 1e-10;
const SHOOTING_MAX_ITER: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceKind {
    /// Closed-form distance of the model.
    Exact,
    /// Length of a shooting geodesic that hits the target.
    Shooting,
    /// Shooting failed; the value is the Riemannian length of the coordinate
    /// segment, an upper bound on the distance.
    SegmentBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceEstimate {
    pub value: f64,
    pub kind: DistanceKind,
}

/// Estimates the Riemannian distance `d(x, x̄)`.
pub fn distance_estimate(model: &dyn Manifold, x: &ChartPoint, xbar: &ChartPoint) -> Result<DistanceEstimate> {
    model.check_point(x.coords())?;
    model.check_point(xbar.coords())?;
    if x == xbar {
        return Ok(DistanceEstimate {
            value: 0.0,
            kind: DistanceKind::Exact,
        });
    }
    if let Some(d) = model.closed_form_distance(x.coords(), xbar.coords()) {
        return Ok(DistanceEstimate {
            value: d,
            kind: DistanceKind::Exact,
        });
    }
    if let Some(d) = shoot(model, x.coords(), xbar.coords()) {
        return Ok(DistanceEstimate {
            value: d,
            kind: DistanceKind::Shooting,
        });
    }
    Ok(DistanceEstimate {
        value: segment_length(model, x.coords(), xbar.coords()),
        kind: DistanceKind::SegmentBound,
    })
}

fn endpoint(model: &dyn Manifold, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
    integrate_background(model, x, v, 0.0, 1.0, 1e-11, 1e8)
        .ok()
        .map(|g| g.end_state().0)
}

// Newton's method on v ↦ exp_x(v) − x̄ with a differenced Jacobian.
fn shoot(model: &dyn Manifold, x: &[f64], target: &[f64]) -> Option<f64> {
    let n = x.len();
    let scale = 1.0 + target.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let mut v: Vec<f64> = target.iter().zip(x).map(|(t, a)| t - a).collect();
    for _ in 0..SHOOTING_MAX_ITER {
        let end = endpoint(model, x, &v)?;
        let residual = DVector::from_iterator(n, end.iter().zip(target).map(|(e, t)| e - t));
        if residual.amax() < SHOOTING_TOL * scale {
            return Some(quadratic_form(&model.metric(x), &v).sqrt());
        }
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let step = 1e-7 * v[j].abs().max(1e-3);
            let mut probe = v.clone();
            probe[j] += step;
            let plus = endpoint(model, x, &probe)?;
            probe[j] = v[j] - step;
            let minus = endpoint(model, x, &probe)?;
            for i in 0..n {
                jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * step);
            }
        }
        let delta = jac.lu().solve(&residual)?;
        for (vi, d) in v.iter_mut().zip(delta.iter()) {
            *vi -= d;
        }
    }
    None
}

fn segment_length(model: &dyn Manifold, x: &[f64], y: &[f64]) -> f64 {
    let dir: Vec<f64> = y.iter().zip(x).map(|(b, a)| b - a).collect();
    let speed = |t: f64| {
        let p: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
        if !model.in_domain(&p) {
            return f64::INFINITY;
        }
        quadratic_form(&model.metric(&p), &dir).sqrt()
    };
    quadrature::integrate(speed, 0.0, 1.0, 1e-10, 2000)
        .map(|q| q.value)
        .unwrap_or(f64::INFINITY)
}
