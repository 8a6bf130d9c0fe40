//! The `ε → 0` limit of regularized geodesics and measured convergence to it.
//!
//! In the limit `x` follows the background geodesic up to `u = 0` and is then
//! refracted: it continues as the background geodesic with velocity
//! `ẋ(0) + ½∇f(x(0))`. The `v` component picks up a jump and a kink,
//!
//! ```text
//! v(u) = v₀ + v̇₀(1 + u) + (J + κ u)·H(u),
//! J = −½ f(x(0)),   κ = −½ (ẋ^j(0) + ¼ ∇f^j(x(0))) ∂_j f(x(0)).
//! ```
//!
//! `κ` follows from conservation of `g(γ̇, γ̇) = |ẋ|² + 2v̇` across the strip.

use rayon::prelude::*;

use crate::dynamics::{
    integrate_impulsive_geodesic, GeodesicState, InitialData, IntegrationOptions, WaveSpacetime,
    DATA_SURFACE,
};
use crate::error::{Error, Result};
use crate::geometry::geodesic::integrate_background;
use crate::geometry::{BackgroundGeodesic, Manifold};
use crate::profiles::{least_squares, raise_index, WaveProfile};

/// Points of the inner-scale grid on `[−1, 1]`.
pub const INNER_GRID: usize = 201;

#[derive(Debug, Clone)]
pub struct LimitGeodesic {
    pub chart: String,
    pub base: BackgroundGeodesic,
    pub refracted: BackgroundGeodesic,
    pub v0: f64,
    pub vdot0: f64,
    pub x_zero: Vec<f64>,
    /// `ẋ(0⁻)`.
    pub xdot_before: Vec<f64>,
    /// `½ ∇f(x(0))`.
    pub velocity_kick: Vec<f64>,
    pub f_zero: f64,
    pub jump_coeff: f64,
    pub kink_coeff: f64,
}

impl LimitGeodesic {
    pub fn u_end(&self) -> f64 {
        self.refracted.u_end()
    }

    /// Limit state; `u = 0` is assigned its left limit.
    pub fn evaluate(&self, u: f64) -> Option<GeodesicState> {
        let (x, xdot) = if u <= 0.0 {
            self.base.state_at(u)?
        } else {
            self.refracted.state_at(u)?
        };
        let mut v = self.v0 + self.vdot0 * (1.0 + u);
        let mut vdot = self.vdot0;
        if u > 0.0 {
            v += self.jump_coeff + self.kink_coeff * u;
            vdot += self.kink_coeff;
        }
        Some(GeodesicState { u, x, xdot, v, vdot })
    }

    /// `v` only, valid on all of `[−1, u_end]` without touching the paths.
    pub fn v_at(&self, u: f64) -> f64 {
        let base = self.v0 + self.vdot0 * (1.0 + u);
        if u > 0.0 {
            base + self.jump_coeff + self.kink_coeff * u
        } else {
            base
        }
    }
}

/// Builds the limit geodesic of `data` on `[−1, u_end]`.
pub fn limit_geodesic(
    model: &dyn Manifold,
    profile: &dyn WaveProfile,
    data: &InitialData,
    u_end: f64,
    opts: &IntegrationOptions,
) -> Result<LimitGeodesic> {
    data.check(model)?;
    if !(u_end > 0.0) {
        return Err(Error::InvalidInput(format!("u_end = {u_end} must be positive")));
    }
    let base = integrate_background(model, data.x0.coords(), &data.xdot0, DATA_SURFACE, 0.0, opts.tol, opts.blowup)?;
    let (x_zero, xdot_before) = base.end_state();
    model.check_point(&x_zero)?;
    let df = profile.differential(&x_zero);
    let grad = raise_index(model, &x_zero, &df);
    let velocity_kick: Vec<f64> = grad.iter().map(|g| 0.5 * g).collect();
    let xdot_after: Vec<f64> = xdot_before.iter().zip(&velocity_kick).map(|(a, k)| a + k).collect();
    let refracted = integrate_background(model, &x_zero, &xdot_after, 0.0, u_end, opts.tol, opts.blowup)?;
    let f_zero = profile.value(&x_zero);
    let contraction: f64 = (0..df.len())
        .map(|j| (xdot_before[j] + 0.25 * grad[j]) * df[j])
        .sum();
    Ok(LimitGeodesic {
        chart: model.name().to_string(),
        base,
        refracted,
        v0: data.v0,
        vdot0: data.vdot0,
        x_zero,
        xdot_before,
        velocity_kick,
        f_zero,
        jump_coeff: -0.5 * f_zero,
        kink_coeff: -0.5 * contraction,
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

/// `sup_{|s| ≤ 1} |x_ε(εs) − x(0)|` on a 201-point grid, in chart coordinates.
pub fn inner_scale_error(
    wave: &WaveSpacetime,
    data: &InitialData,
    eps: f64,
    opts: &IntegrationOptions,
) -> Result<f64> {
    let path = integrate_impulsive_geodesic(wave, eps, data, 2.0 * eps, opts)?;
    let model = &*wave.manifold;
    let x_zero = integrate_background(model, data.x0.coords(), &data.xdot0, DATA_SURFACE, 0.0, opts.tol, opts.blowup)?
        .end_state()
        .0;
    let mut worst: f64 = 0.0;
    for k in 0..INNER_GRID {
        let s = -1.0 + 2.0 * k as f64 / (INNER_GRID - 1) as f64;
        let state = path.state_at(eps * s).expect("inner grid inside path");
        worst = worst.max(dist(&state.x, &x_zero));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub err_x: f64,
    pub err_xdot: f64,
    pub err_v: f64,
    /// `v̇_ε` after the strip (constant there).
    pub vdot_after: f64,
    /// Least-squares order of `max(err)` over this and all larger-ε rows.
    pub order_so_far: Option<f64>,
    pub failure: Option<String>,
}

impl ConvergenceRow {
    pub fn errors(&self) -> [f64; 3] {
        [self.err_x, self.err_xdot, self.err_v]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub chart: String,
    /// Sorted by decreasing `ε`.
    pub rows: Vec<ConvergenceRow>,
    pub probes: Vec<f64>,
    /// Fitted order of `err_x`, `err_xdot`, `err_v` on the smallest half of the schedule.
    pub orders: [Option<f64>; 3],
    /// Whether each error column is non-increasing as `ε` decreases.
    pub monotone: [bool; 3],
    pub jump_coeff: f64,
    pub kink_coeff: f64,
    /// `v̇₀ + κ`, the limit slope of `v` after the shock.
    pub limit_vdot_after: f64,
}

impl ConvergenceTable {
    pub fn failed_rows(&self) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(|r| r.failure.is_some())
    }
}

/// Slope of `log err` against `log ε`; `None` if fewer than two usable points.
pub fn fit_order(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(e, err)| *e > 0.0 && err.is_finite() && *err > 0.0)
        .map(|(e, err)| (e.ln(), err.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let (slope, _, _) = least_squares(&pts);
    slope.is_finite().then_some(slope)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StudyOptions {
    pub integration: IntegrationOptions,
    /// Worker threads for the per-ε rows; `None` uses the global pool.
    pub workers: Option<usize>,
}

/// Compares regularized geodesics against the limit at each `ε` of the
/// schedule, sampled at `probes` (which must stay clear of `|u| ≤ max ε`).
pub fn convergence_study(
    wave: &WaveSpacetime,
    data: &InitialData,
    eps_schedule: &[f64],
    probes: &[f64],
    opts: &StudyOptions,
) -> Result<ConvergenceTable> {
    if eps_schedule.is_empty() || probes.is_empty() {
        return Err(Error::InvalidInput("schedule and probes must be non-empty".into()));
    }
    if eps_schedule.iter().any(|&e| !(e > 0.0 && e <= 0.5)) {
        return Err(Error::InvalidInput("eps values must lie in (0, 1/2]".into()));
    }
    let eps_max = eps_schedule.iter().copied().fold(0.0, f64::max);
    if probes.iter().any(|&u| u.abs() <= eps_max || u < DATA_SURFACE) {
        return Err(Error::InvalidInput(format!(
            "probes must lie in [-1, u_end] outside |u| <= {eps_max}"
        )));
    }
    let u_end = probes.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(2.0 * eps_max);
    let limit = limit_geodesic(&*wave.manifold, &*wave.profile, data, u_end, &opts.integration)?;
    let limit_states: Vec<GeodesicState> = probes
        .iter()
        .map(|&u| limit.evaluate(u).expect("probe within limit path"))
        .collect();

    let mut schedule = eps_schedule.to_vec();
    schedule.sort_by(|a, b| b.total_cmp(a));
    schedule.dedup();

    let row = |eps: f64| -> ConvergenceRow {
        match integrate_impulsive_geodesic(wave, eps, data, u_end, &opts.integration) {
            Ok(path) => {
                let (mut ex, mut exd, mut ev) = (0.0_f64, 0.0_f64, 0.0_f64);
                for (&u, lim) in probes.iter().zip(&limit_states) {
                    let s = path.state_at(u).expect("probe within path");
                    ex = ex.max(dist(&s.x, &lim.x));
                    exd = exd.max(dist(&s.xdot, &lim.xdot));
                    ev = ev.max((s.v - lim.v).abs());
                }
                ConvergenceRow {
                    eps,
                    err_x: ex,
                    err_xdot: exd,
                    err_v: ev,
                    vdot_after: path.end_state().vdot,
                    order_so_far: None,
                    failure: None,
                }
            }
            Err(e) => ConvergenceRow {
                eps,
                err_x: f64::NAN,
                err_xdot: f64::NAN,
                err_v: f64::NAN,
                vdot_after: f64::NAN,
                order_so_far: None,
                failure: Some(e.to_string()),
            },
        }
    };
    let mut rows: Vec<ConvergenceRow> = match opts.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot build worker pool: {e}")))?
            .install(|| schedule.par_iter().map(|&e| row(e)).collect()),
        None => schedule.par_iter().map(|&e| row(e)).collect(),
    };

    let combined: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.eps, r.err_x.max(r.err_xdot).max(r.err_v)))
        .collect();
    for i in 0..rows.len() {
        rows[i].order_so_far = if i == 0 { None } else { fit_order(&combined[..=i]) };
    }

    let half = rows.len() - rows.len() / 2;
    let tail = &rows[rows.len() - half..];
    let column = |c: usize| -> Vec<(f64, f64)> { tail.iter().map(|r| (r.eps, r.errors()[c])).collect() };
    let orders = [fit_order(&column(0)), fit_order(&column(1)), fit_order(&column(2))];
    let monotone = [0, 1, 2].map(|c| {
        rows.windows(2)
            .all(|w| w[1].errors()[c] <= w[0].errors()[c] || w.iter().any(|r| r.failure.is_some()))
    });

    Ok(ConvergenceTable {
        chart: limit.chart.clone(),
        rows,
        probes: probes.to_vec(),
        orders,
        monotone,
        jump_coeff: limit.jump_coeff,
        kink_coeff: limit.kink_coeff,
        limit_vdot_after: data.vdot0 + limit.kink_coeff,
    })
}
