use super::{quadratic_form, ChartPoint, Manifold, TangentVector};
use crate::dynamics::{IntegrationFailure, Phase};
use crate::error::{check_dim, Error, Result};
use crate::ode::{self, DenseOutput, FailureReason, OdeSystem, StepControl, StepStats};

/// `ẍ^k = −Γ^k_ij ẋ^i ẋ^j` with state `(x, ẋ)`.
pub(crate) struct BackgroundSystem<'a> {
    pub model: &'a dyn Manifold,
    pub blowup: f64,
}

impl OdeSystem for BackgroundSystem<'_> {
    fn dim(&self) -> usize {
        2 * self.model.dim()
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), FailureReason> {
        let n = self.model.dim();
        let (x, xdot) = y.split_at(n);
        if !y.iter().all(|v| v.is_finite()) || !self.model.in_domain(x) {
            return Err(FailureReason::ChartEscape);
        }
        dy[..n].copy_from_slice(xdot);
        let gamma = self.model.christoffel(x);
        gamma.contract_into(xdot, xdot, &mut dy[n..]);
        for a in &mut dy[n..] {
            *a = -*a;
        }
        Ok(())
    }

    fn admissible(&self, _t: f64, y: &[f64]) -> Result<(), FailureReason> {
        admissible_state(self.model, &y[..2 * self.model.dim()], self.blowup)
    }
}

pub(crate) fn admissible_state(
    model: &dyn Manifold,
    x_and_xdot: &[f64],
    blowup: f64,
) -> Result<(), FailureReason> {
    let n = model.dim();
    if x_and_xdot.iter().any(|v| !v.is_finite() || v.abs() > blowup) {
        return Err(FailureReason::BlowUp { bound: blowup });
    }
    if !model.in_domain(&x_and_xdot[..n]) {
        return Err(FailureReason::ChartEscape);
    }
    Ok(())
}

/// A geodesic of `(N, h)` with dense output over its parameter interval.
#[derive(Debug, Clone)]
pub struct BackgroundGeodesic {
    dim: usize,
    traj: DenseOutput,
    stats: StepStats,
}

impl BackgroundGeodesic {
    pub(crate) fn from_parts(dim: usize, traj: DenseOutput, stats: StepStats) -> Self {
        Self { dim, traj, stats }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn u_start(&self) -> f64 {
        self.traj.t_start()
    }

    pub fn u_end(&self) -> f64 {
        self.traj.t_end()
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    pub fn dense(&self) -> &DenseOutput {
        &self.traj
    }

    /// `(x(u), ẋ(u))`, or `None` outside the integrated interval.
    pub fn state_at(&self, u: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let (mut y, _) = self.traj.eval(u)?;
        let xdot = y.split_off(self.dim);
        Some((y, xdot))
    }

    pub fn x_at(&self, u: f64) -> Option<Vec<f64>> {
        self.state_at(u).map(|(x, _)| x)
    }

    pub fn end_state(&self) -> (Vec<f64>, Vec<f64>) {
        let y = &self.traj.last().y;
        (y[..self.dim].to_vec(), y[self.dim..].to_vec())
    }

    /// Largest relative change of `h(ẋ, ẋ)` over the accepted nodes.
    pub fn speed_drift(&self, model: &dyn Manifold) -> f64 {
        let n = self.dim;
        let speed = |y: &[f64]| quadratic_form(&model.metric(&y[..n]), &y[n..]);
        let s0 = speed(&self.traj.first().y);
        self.traj
            .nodes()
            .iter()
            .map(|node| (speed(&node.y) - s0).abs() / s0.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

/// Integrates `D_ẋ ẋ = 0` with data `(x0, ẋ0)` at `u_start` up to `u_end`.
pub fn background_geodesic(
    model: &dyn Manifold,
    x0: &ChartPoint,
    xdot0: &TangentVector,
    u_start: f64,
    u_end: f64,
    tol: f64,
    blowup: f64,
) -> Result<BackgroundGeodesic> {
    model.check_point(x0.coords())?;
    check_dim(model.dim(), xdot0.comps.len())?;
    if !(u_end > u_start) {
        return Err(Error::InvalidInput(format!(
            "empty parameter interval [{u_start}, {u_end}]"
        )));
    }
    integrate_background(model, x0.coords(), &xdot0.comps, u_start, u_end, tol, blowup)
}

pub(crate) fn integrate_background(
    model: &dyn Manifold,
    x0: &[f64],
    xdot0: &[f64],
    u_start: f64,
    u_end: f64,
    tol: f64,
    blowup: f64,
) -> Result<BackgroundGeodesic> {
    let n = model.dim();
    let sys = BackgroundSystem { model, blowup };
    let y0: Vec<f64> = x0.iter().chain(xdot0).copied().collect();
    let ctrl = StepControl::with_tolerance(tol);
    match ode::integrate(&sys, u_start, &y0, u_end, &ctrl) {
        Ok((traj, stats)) => Ok(BackgroundGeodesic::from_parts(n, traj, stats)),
        Err(f) => Err(IntegrationFailure {
            phase: Phase::Background,
            u: f.t,
            x: f.y[..n].to_vec(),
            xdot: f.y[n..].to_vec(),
            v: None,
            reason: f.reason,
        }
        .into()),
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{E, PI};

    use super::*;
    use crate::geometry::{Euclidean, HyperbolicHalfPlane, SphereStereographic};

    fn geodesic(model: &dyn Manifold, x0: &[f64], v0: &[f64], a: f64, b: f64) -> Result<BackgroundGeodesic> {
        let p = ChartPoint::new(x0.to_vec());
        let v = TangentVector::new(p.clone(), v0.to_vec()).unwrap();
        background_geodesic(model, &p, &v, a, b, 1e-10, 1e8)
    }

    #[test]
    fn straight_line_in_flat_space() {
        let g = geodesic(&Euclidean::new(2), &[0.0, 0.0], &[1.0, 0.0], -1.0, 1.0).unwrap();
        for u in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            let x = g.x_at(u).unwrap();
            assert!((x[0] - (u + 1.0)).abs() < 1e-12);
            assert!(x[1].abs() < 1e-15);
        }
    }

    #[test]
    fn vertical_geodesic_in_half_plane() {
        let g = geodesic(&HyperbolicHalfPlane, &[0.0, 1.0], &[0.0, 1.0], 0.0, 1.0).unwrap();
        let (x, _) = g.end_state();
        assert!(x[0].abs() < 1e-14);
        assert!((x[1] - E).abs() < 1e-8);
        for u in [0.25, 0.5, 0.75] {
            assert!((g.x_at(u).unwrap()[1] - u.exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn sphere_equator_closes_after_one_period() {
        // the equator is the unit circle of the chart; speed 1 ⇒ period 2π
        let g = geodesic(&SphereStereographic, &[1.0, 0.0], &[0.0, 1.0], 0.0, 2.0 * PI).unwrap();
        let (x, v) = g.end_state();
        assert!((x[0] - 1.0).abs() < 1e-8 && x[1].abs() < 1e-8, "{x:?}");
        assert!(v[0].abs() < 1e-8 && (v[1] - 1.0).abs() < 1e-8);
        let q = g.x_at(PI / 2.0).unwrap();
        assert!(q[0].abs() < 1e-8 && (q[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn great_circle_through_the_missing_pole_trips_the_guard() {
        // x(u) = tan(u) reaches coordinate infinity at u = π/2
        let err = geodesic(&SphereStereographic, &[0.0, 0.0], &[1.0, 0.0], 0.0, 2.0).unwrap_err();
        match err {
            Error::Integration(f) => {
                assert!(matches!(f.reason, FailureReason::BlowUp { .. }));
                assert!(f.u < PI / 2.0 && f.u > 1.5);
                assert_eq!(f.phase, Phase::Background);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn half_plane_boundary_is_never_crossed() {
        // vertical geodesic downwards approaches x² = 0 only asymptotically
        let g = geodesic(&HyperbolicHalfPlane, &[0.0, 1.0], &[0.0, -1.0], 0.0, 5.0).unwrap();
        assert!((g.end_state().0[1] - (-5f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn speed_is_conserved() {
        type Case = (Box<dyn Manifold>, [f64; 2], [f64; 2]);
        let models: Vec<Case> = vec![
            (Box::new(HyperbolicHalfPlane), [0.2, 0.8], [0.7, 0.3]),
            (Box::new(SphereStereographic), [0.3, -0.4], [0.5, 0.9]),
            (Box::new(Euclidean::new(2)), [1.0, 2.0], [-0.3, 0.2]),
        ];
        for (m, x, v) in &models {
            let g = geodesic(m.as_ref(), x, v, -1.0, 1.0).unwrap();
            assert!(g.speed_drift(m.as_ref()) < 1e-8, "{}", m.name());
        }
    }

    #[test]
    fn affine_reparametrization_traces_the_same_curve() {
        let m = HyperbolicHalfPlane;
        let slow = geodesic(&m, &[0.1, 1.2], &[0.6, -0.4], 0.0, 2.0).unwrap();
        let fast = geodesic(&m, &[0.1, 1.2], &[1.2, -0.8], 0.0, 1.0).unwrap();
        for k in 0..=20 {
            let s = k as f64 / 20.0;
            let a = slow.x_at(2.0 * s).unwrap();
            let b = fast.x_at(s).unwrap();
            assert!((a[0] - b[0]).abs() < 1e-8 && (a[1] - b[1]).abs() < 1e-8, "s = {s}");
        }
    }
}
