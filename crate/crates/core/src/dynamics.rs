//! The full geodesic system of the regularized impulsive wave
//!
//! ```text
//! ẍ^k = −Γ^k_ij ẋ^i ẋ^j + ½ (∇_x f)^k δ_ε(u)
//! v̈   = −∂_j f ẋ^j δ_ε(u) − ½ f δ̇_ε(u)
//! ```
//!
//! integrated from data at `u = −1` through the strip `|u| ≤ ε`. Outside the
//! strip the δ-terms are dropped and the background system is solved.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::geometry::geodesic::admissible_state;
use crate::geometry::{quadratic_form, ChartPoint, Manifold, ManifoldRef};
use crate::ode::{self, DenseOutput, FailureReason, OdeSystem, StepControl, StepStats};
use crate::profiles::{raise_index, DeltaNet, DeltaNetRef, ProfileRef, WaveProfile};

/// Parameter value at which initial data are posed.
pub const DATA_SURFACE: f64 = -1.0;
/// Largest admissible regularization parameter.
pub const MAX_EPS: f64 = 0.5;
/// Inside the strip the step is capped at `support_radius / STRIP_STEPS`.
pub const STRIP_STEPS: f64 = 50.0;

/// A space-time `N × R²₁` with metric `h + 2 du dv + f(x) δ_ε(u) du²`.
#[derive(Debug, Clone)]
pub struct WaveSpacetime {
    pub manifold: ManifoldRef,
    pub profile: ProfileRef,
    pub net: DeltaNetRef,
}

impl WaveSpacetime {
    pub fn new(
        manifold: impl Manifold + 'static,
        profile: impl WaveProfile + 'static,
        net: impl DeltaNet + 'static,
    ) -> Self {
        Self {
            manifold: Arc::new(manifold),
            profile: Arc::new(profile),
            net: Arc::new(net),
        }
    }

    pub fn from_refs(manifold: ManifoldRef, profile: ProfileRef, net: DeltaNetRef) -> Self {
        Self {
            manifold,
            profile,
            net,
        }
    }

    pub fn dim(&self) -> usize {
        self.manifold.dim()
    }

    pub fn with_net(&self, net: DeltaNetRef) -> Self {
        Self {
            net,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// `[−1, −ε]`, before the shock.
    Before,
    /// `[−ε, ε]`.
    Strip,
    /// `[ε, u_end]`.
    After,
    /// A geodesic of `N` alone.
    Background,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Before => "before-strip",
            Phase::Strip => "strip",
            Phase::After => "after-strip",
            Phase::Background => "background",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicState {
    pub u: f64,
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
    pub v: f64,
    pub vdot: f64,
}

impl GeodesicState {
    fn from_flat(u: f64, y: &[f64], n: usize) -> Self {
        Self {
            u,
            x: y[..n].to_vec(),
            xdot: y[n..2 * n].to_vec(),
            v: y[2 * n],
            vdot: y[2 * n + 1],
        }
    }

    fn to_flat(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 * self.x.len() + 2);
        y.extend_from_slice(&self.x);
        y.extend_from_slice(&self.xdot);
        y.push(self.v);
        y.push(self.vdot);
        y
    }
}

/// `(ẋ, ẍ, v̇, v̈)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivative {
    pub xdot: Vec<f64>,
    pub xddot: Vec<f64>,
    pub vdot: f64,
    pub vddot: f64,
}

/// Data `x(−1) = x₀, ẋ(−1) = ẋ₀, v(−1) = v₀, v̇(−1) = v̇₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub x0: ChartPoint,
    pub xdot0: Vec<f64>,
    pub v0: f64,
    pub vdot0: f64,
}

impl InitialData {
    pub fn new(x0: impl Into<Vec<f64>>, xdot0: impl Into<Vec<f64>>, v0: f64, vdot0: f64) -> Self {
        Self {
            x0: ChartPoint::new(x0),
            xdot0: xdot0.into(),
            v0,
            vdot0,
        }
    }

    pub fn check(&self, model: &dyn Manifold) -> Result<()> {
        model.check_point(self.x0.coords())?;
        check_dim(model.dim(), self.xdot0.len())?;
        if !self.xdot0.iter().all(|c| c.is_finite()) || !self.v0.is_finite() || !self.vdot0.is_finite() {
            return Err(Error::InvalidInput("initial data must be finite".into()));
        }
        Ok(())
    }

    /// The state at `u = −1`.
    pub fn state(&self) -> GeodesicState {
        GeodesicState {
            u: DATA_SURFACE,
            x: self.x0.coords().to_vec(),
            xdot: self.xdot0.clone(),
            v: self.v0,
            vdot: self.vdot0,
        }
    }
}

/// The integration stopped before reaching its end point.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationFailure {
    pub phase: Phase,
    pub u: f64,
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
    /// `(v, v̇)` when the `v` component was being integrated.
    pub v: Option<(f64, f64)>,
    pub reason: FailureReason,
}

impl fmt::Display for IntegrationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "integration failed in phase {} at u = {}: {} (last x = {:?})",
            self.phase, self.u, self.reason, self.x
        )
    }
}

impl std::error::Error for IntegrationFailure {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub tol: f64,
    /// Bound on `|x^i|` and `|ẋ^i|` beyond which the run is aborted.
    pub blowup: f64,
    /// Evaluate the δ-terms outside the strip instead of bypassing them.
    pub shock_terms_everywhere: bool,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            blowup: 1e8,
            shock_terms_everywhere: false,
        }
    }
}

impl IntegrationOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

struct ImpulsiveSystem<'a> {
    wave: &'a WaveSpacetime,
    eps: f64,
    shock: bool,
    blowup: f64,
}

impl ImpulsiveSystem<'_> {
    fn eval(&self, u: f64, y: &[f64], dy: &mut [f64]) {
        let model = &*self.wave.manifold;
        let n = model.dim();
        let (x, rest) = y.split_at(n);
        let xdot = &rest[..n];
        dy[..n].copy_from_slice(xdot);
        let gamma = model.christoffel(x);
        gamma.contract_into(xdot, xdot, &mut dy[n..2 * n]);
        for a in &mut dy[n..2 * n] {
            *a = -*a;
        }
        dy[2 * n] = y[2 * n + 1];
        dy[2 * n + 1] = 0.0;
        if !self.shock {
            return;
        }
        let net = &*self.wave.net;
        let d = net.eval(self.eps, u);
        let dd = net.deriv(self.eps, u);
        if d == 0.0 && dd == 0.0 {
            return;
        }
        let profile = &*self.wave.profile;
        let df = profile.differential(x);
        let grad = raise_index(model, x, &df);
        for k in 0..n {
            dy[n + k] += 0.5 * grad[k] * d;
        }
        let df_xdot: f64 = df.iter().zip(xdot).map(|(a, b)| a * b).sum();
        dy[2 * n + 1] = -df_xdot * d - 0.5 * profile.value(x) * dd;
    }
}

impl OdeSystem for ImpulsiveSystem<'_> {
    fn dim(&self) -> usize {
        2 * self.wave.dim() + 2
    }

    fn rhs(&self, u: f64, y: &[f64], dy: &mut [f64]) -> Result<(), FailureReason> {
        let n = self.wave.dim();
        if !y.iter().all(|v| v.is_finite()) || !self.wave.manifold.in_domain(&y[..n]) {
            return Err(FailureReason::ChartEscape);
        }
        self.eval(u, y, dy);
        Ok(())
    }

    fn admissible(&self, _u: f64, y: &[f64]) -> Result<(), FailureReason> {
        admissible_state(&*self.wave.manifold, &y[..2 * self.wave.dim()], self.blowup)?;
        if !y[2 * self.wave.dim()..].iter().all(|v| v.is_finite()) {
            return Err(FailureReason::BlowUp { bound: self.blowup });
        }
        Ok(())
    }
}

/// Right-hand side of the geodesic system at `state`.
pub fn rhs(state: &GeodesicState, wave: &WaveSpacetime, eps: f64) -> Result<StateDerivative> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let model = &*wave.manifold;
    model.check_point(&state.x)?;
    check_dim(model.dim(), state.xdot.len())?;
    let n = model.dim();
    let sys = ImpulsiveSystem {
        wave,
        eps,
        shock: true,
        blowup: f64::INFINITY,
    };
    let mut dy = vec![0.0; 2 * n + 2];
    sys.eval(state.u, &state.to_flat(), &mut dy);
    Ok(StateDerivative {
        xdot: dy[..n].to_vec(),
        xddot: dy[n..2 * n].to_vec(),
        vdot: dy[2 * n],
        vddot: dy[2 * n + 1],
    })
}

/// `g(γ̇, γ̇) = h_ij ẋ^i ẋ^j + 2 v̇ + f(x) δ_ε(u)` for `u̇ = 1`.
pub fn lagrangian_energy(state: &GeodesicState, wave: &WaveSpacetime, eps: f64) -> Result<f64> {
    let model = &*wave.manifold;
    model.check_point(&state.x)?;
    check_dim(model.dim(), state.xdot.len())?;
    let d = wave.net.eval(eps, state.u);
    let shock = if d == 0.0 { 0.0 } else { wave.profile.value(&state.x) * d };
    Ok(quadratic_form(&model.metric(&state.x), &state.xdot) + 2.0 * state.vdot + shock)
}

#[derive(Debug, Clone)]
pub struct PathSegment {
    pub phase: Phase,
    pub dense: DenseOutput,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathDiagnostics {
    pub initial_energy: f64,
    /// `max |g(u) − g(−1)|` over the accepted nodes.
    pub max_energy_drift: f64,
    pub steps: StepStats,
}

impl PathDiagnostics {
    pub fn relative_energy_drift(&self) -> f64 {
        self.max_energy_drift / (1.0 + self.initial_energy.abs())
    }
}

/// A regularized geodesic through the three phases, with dense output.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    dim: usize,
    eps: f64,
    segments: Vec<PathSegment>,
    diagnostics: PathDiagnostics,
}

impl GeodesicPath {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The strip boundaries `(−ε, ε)`.
    pub fn phase_marks(&self) -> (f64, f64) {
        (-self.eps, self.eps)
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    pub fn diagnostics(&self) -> &PathDiagnostics {
        &self.diagnostics
    }

    pub fn u_start(&self) -> f64 {
        self.segments[0].dense.t_start()
    }

    pub fn u_end(&self) -> f64 {
        self.segments[self.segments.len() - 1].dense.t_end()
    }

    pub fn segment(&self, phase: Phase) -> Option<&PathSegment> {
        self.segments.iter().find(|s| s.phase == phase)
    }

    pub fn state_at(&self, u: f64) -> Option<GeodesicState> {
        self.segments
            .iter()
            .find(|s| s.dense.contains(u))
            .and_then(|s| s.dense.eval(u))
            .map(|(y, _)| GeodesicState::from_flat(u, &y, self.dim))
    }

    pub fn end_state(&self) -> GeodesicState {
        let last = self.segments[self.segments.len() - 1].dense.last();
        GeodesicState::from_flat(last.t, &last.y, self.dim)
    }

    /// Accepted integrator nodes, in order; the junctions appear twice.
    pub fn node_states(&self) -> impl Iterator<Item = GeodesicState> + '_ {
        self.segments.iter().flat_map(move |s| {
            s.dense
                .nodes()
                .iter()
                .map(move |n| GeodesicState::from_flat(n.t, &n.y, self.dim))
        })
    }

    /// States on `count ≥ 2` equally spaced parameter values spanning the path.
    pub fn sample(&self, count: usize) -> Vec<GeodesicState> {
        let (a, b) = (self.u_start(), self.u_end());
        let count = count.max(2);
        (0..count)
            .map(|i| {
                let u = if i + 1 == count {
                    b
                } else {
                    a + (b - a) * i as f64 / (count - 1) as f64
                };
                self.state_at(u).expect("sample inside path")
            })
            .collect()
    }
}

/// Integrates the pasted regularized geodesic from `u = −1` to `u_end`.
///
/// Step boundaries are forced at `u = ±ε`; inside the strip the step size
/// never exceeds `support_radius(ε) / 50`.
pub fn integrate_impulsive_geodesic(
    wave: &WaveSpacetime,
    eps: f64,
    data: &InitialData,
    u_end: f64,
    opts: &IntegrationOptions,
) -> Result<GeodesicPath> {
    if !(eps > 0.0 && eps <= MAX_EPS) {
        return Err(Error::InvalidInput(format!("eps must lie in (0, 1/2], got {eps}")));
    }
    if !(u_end > eps) {
        return Err(Error::InvalidInput(format!("u_end = {u_end} must exceed eps = {eps}")));
    }
    data.check(&*wave.manifold)?;
    let n = wave.dim();
    let strip_cap = wave.net.support_radius(eps) / STRIP_STEPS;

    let plan = [
        (Phase::Before, DATA_SURFACE, -eps, false, f64::INFINITY),
        (Phase::Strip, -eps, eps, true, strip_cap),
        (Phase::After, eps, u_end, false, f64::INFINITY),
    ];
    let mut y = data.state().to_flat();
    let mut segments = Vec::with_capacity(3);
    let mut steps = StepStats::default();
    for (phase, a, b, in_strip, h_max) in plan {
        let sys = ImpulsiveSystem {
            wave,
            eps,
            shock: in_strip || opts.shock_terms_everywhere,
            blowup: opts.blowup,
        };
        let ctrl = StepControl::with_tolerance(opts.tol).h_max(h_max);
        let (dense, stats) = ode::integrate(&sys, a, &y, b, &ctrl).map_err(|f| IntegrationFailure {
            phase,
            u: f.t,
            x: f.y[..n].to_vec(),
            xdot: f.y[n..2 * n].to_vec(),
            v: Some((f.y[2 * n], f.y[2 * n + 1])),
            reason: f.reason,
        })?;
        steps += stats;
        y = dense.last().y.clone();
        segments.push(PathSegment { phase, dense });
    }

    let initial_energy = lagrangian_energy(&data.state(), wave, eps)?;
    let mut max_energy_drift: f64 = 0.0;
    for seg in &segments {
        for node in seg.dense.nodes() {
            let s = GeodesicState::from_flat(node.t, &node.y, n);
            let g = lagrangian_energy(&s, wave, eps)?;
            max_energy_drift = max_energy_drift.max((g - initial_energy).abs());
        }
    }

    Ok(GeodesicPath {
        dim: n,
        eps,
        segments,
        diagnostics: PathDiagnostics {
            initial_energy,
            max_energy_drift,
            steps,
        },
    })
}
