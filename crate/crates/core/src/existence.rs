//! A-priori existence intervals for the geodesic system inside the strip.
//!
//! On a coordinate ball `I₁ = {|y − x₀| ≤ b}` and velocity ball
//! `I₂ = {|z − ẋ₀| ≤ c + K‖F₂‖}` with
//!
//! ```text
//! F₁(y, z)^k = −Γ^k_ij(y) z^i z^j,    F₂(y)^k = ½ h^km(y) ∂_m f(y),
//! ```
//!
//! the fixed-point argument yields a solution on `[−ε, α − ε]` for
//! `α = min(1, b / (|ẋ₀| + ‖F₁‖ + K‖F₂‖), c / ‖F₁‖)`, and every `ε ≤ α / 2`
//! crosses the strip. Sup norms and Lipschitz constants are estimated by
//! sampling, so certificates are heuristic rather than proof-grade.

use crate::dynamics::{WaveSpacetime, DATA_SURFACE, MAX_EPS};
use crate::error::{check_dim, Error, Result};
use crate::geometry::geodesic::integrate_background;
use crate::geometry::{fd_step, Manifold};
use crate::profiles::{raise_index, WaveProfile};
use crate::quadrature::cumulative_simpson;

/// Relative margin added to sampled extrema: `max + SAFETY·(max − min)`.
pub const SAFETY: f64 = 0.1;
pub const MIN_GRID: usize = 9;

fn inflate(max: f64, min: f64) -> f64 {
    max + SAFETY * (max - min)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

/// Sample points of the closed ball `|p − center| ≤ r`: the cube grid points
/// inside the ball plus their radial projections onto the sphere.
fn ball_samples(center: &[f64], r: f64, grid: usize) -> Vec<Vec<f64>> {
    let n = center.len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    let step = 2.0 * r / (grid - 1) as f64;
    loop {
        let off: Vec<f64> = idx.iter().map(|&i| -r + step * i as f64).collect();
        let len = norm(&off);
        if len <= r * (1.0 + 1e-12) {
            out.push(center.iter().zip(&off).map(|(c, o)| c + o).collect());
        }
        if len > 0.0 && r > 0.0 {
            out.push(center.iter().zip(&off).map(|(c, o)| c + r * o / len).collect());
        }
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < grid {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    out
}

/// `F₂(y) = ½ ∇f(y)`.
pub fn f2(model: &dyn Manifold, profile: &dyn WaveProfile, y: &[f64]) -> Vec<f64> {
    raise_index(model, y, &profile.differential(y))
        .into_iter()
        .map(|g| 0.5 * g)
        .collect()
}

/// Sampled sup norms and Lipschitz constants over `I₁` and `I₃ = I₁ × I₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupNorms {
    pub norm_f1: f64,
    pub norm_f2: f64,
    pub lip_f1: f64,
    pub lip_f2: f64,
    /// `c + K‖F₂‖`.
    pub i2_radius: f64,
    pub grid: usize,
}

pub fn estimate_sup_norms(
    model: &dyn Manifold,
    profile: &dyn WaveProfile,
    x0: &[f64],
    xdot0: &[f64],
    b: f64,
    c: f64,
    k: f64,
    grid: usize,
) -> Result<SupNorms> {
    let n = model.dim();
    model.check_point(x0)?;
    check_dim(n, xdot0.len())?;
    if grid < MIN_GRID {
        return Err(Error::InvalidInput(format!("grid must have at least {MIN_GRID} points per axis")));
    }
    if !(b > 0.0 && c > 0.0 && k > 0.0) {
        return Err(Error::InvalidInput("b, c and K must be positive".into()));
    }
    let ys = ball_samples(x0, b, grid);
    for y in &ys {
        model.check_point(y)?;
    }

    let (mut f2_max, mut f2_min) = (0.0_f64, f64::INFINITY);
    let (mut l2_max, mut l2_min) = (0.0_f64, f64::INFINITY);
    for y in &ys {
        let v = norm(&f2(model, profile, y));
        f2_max = f2_max.max(v);
        f2_min = f2_min.min(v);
        let mut jac2 = 0.0;
        let mut probe = y.clone();
        for l in 0..n {
            let h = fd_step(y[l]);
            probe[l] = y[l] + h;
            let plus = f2(model, profile, &probe);
            probe[l] = y[l] - h;
            let minus = f2(model, profile, &probe);
            probe[l] = y[l];
            jac2 += plus
                .iter()
                .zip(&minus)
                .map(|(p, m)| ((p - m) / (2.0 * h)).powi(2))
                .sum::<f64>();
        }
        l2_max = l2_max.max(jac2.sqrt());
        l2_min = l2_min.min(jac2.sqrt());
    }
    let norm_f2 = inflate(f2_max, f2_min);
    let lip_f2 = inflate(l2_max, l2_min);
    let i2_radius = c + k * norm_f2;

    let zs = ball_samples(xdot0, i2_radius, grid);
    let (mut f1_max, mut f1_min) = (0.0_f64, f64::INFINITY);
    let (mut l1_max, mut l1_min) = (0.0_f64, f64::INFINITY);
    let mut out = vec![0.0; n];
    for y in &ys {
        let gamma = model.christoffel(y);
        let mut shifted = Vec::with_capacity(n);
        let mut probe = y.clone();
        for l in 0..n {
            let h = fd_step(y[l]);
            probe[l] = y[l] + h;
            let plus = model.christoffel(&probe);
            probe[l] = y[l] - h;
            let minus = model.christoffel(&probe);
            probe[l] = y[l];
            shifted.push((plus, minus, h));
        }
        for z in &zs {
            gamma.contract_into(z, z, &mut out);
            let v = norm(&out);
            f1_max = f1_max.max(v);
            f1_min = f1_min.min(v);
            // ∂F₁^k/∂z^m = −2 Γ^k_mj z^j
            let mut jac = 0.0;
            for kk in 0..n {
                for m in 0..n {
                    let d: f64 = (0..n).map(|j| gamma.get(kk, m, j) * z[j]).sum();
                    jac += 4.0 * d * d;
                }
            }
            let mut a = vec![0.0; n];
            let mut bvec = vec![0.0; n];
            for (plus, minus, h) in &shifted {
                plus.contract_into(z, z, &mut a);
                minus.contract_into(z, z, &mut bvec);
                jac += a
                    .iter()
                    .zip(&bvec)
                    .map(|(p, q)| ((p - q) / (2.0 * h)).powi(2))
                    .sum::<f64>();
            }
            l1_max = l1_max.max(jac.sqrt());
            l1_min = l1_min.min(jac.sqrt());
        }
    }
    Ok(SupNorms {
        norm_f1: inflate(f1_max, f1_min),
        norm_f2,
        lip_f1: inflate(l1_max, l1_min),
        lip_f2,
        i2_radius,
        grid,
    })
}

/// `(α, ε₀)` with the convention `c / 0 = ∞` (and likewise for `b`).
pub fn alpha_bound(
    xdot0_norm: f64,
    b: f64,
    c: f64,
    norm_f1: f64,
    norm_f2: f64,
    k: f64,
) -> Result<(f64, f64)> {
    if !(b > 0.0 && c > 0.0 && k > 0.0) {
        return Err(Error::InvalidInput("b, c and K must be positive".into()));
    }
    if !(xdot0_norm >= 0.0 && norm_f1 >= 0.0 && norm_f2 >= 0.0) {
        return Err(Error::InvalidInput("norms must be non-negative".into()));
    }
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };
    let alpha = 1f64
        .min(ratio(b, xdot0_norm + norm_f1 + k * norm_f2))
        .min(ratio(c, norm_f1));
    Ok((alpha, alpha / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub b: f64,
    pub c: f64,
    pub grid: usize,
    /// Halve `b` until `I₁` fits in the chart instead of failing.
    pub shrink_ball: bool,
    /// Integrator tolerance used to reach the entry point `u = −ε`.
    pub tol: f64,
    pub blowup: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            b: 1.0,
            c: 1.0,
            grid: 9,
            shrink_ball: false,
            tol: 1e-10,
            blowup: 1e8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExistenceCertificate {
    pub chart: String,
    /// The `ε` whose entry data `(x(−ε), ẋ(−ε))` are the centre, if any.
    pub eps: Option<f64>,
    pub x0: Vec<f64>,
    pub xdot0: Vec<f64>,
    pub b: f64,
    pub c: f64,
    pub i2_radius: f64,
    pub norm_f1: f64,
    pub norm_f2: f64,
    pub k: f64,
    pub lip_f1: f64,
    pub lip_f2: f64,
    pub alpha: f64,
    pub eps0: f64,
    pub grid: usize,
}

impl ExistenceCertificate {
    pub fn in_i1(&self, x: &[f64]) -> bool {
        dist(x, &self.x0) <= self.b * (1.0 + 1e-9)
    }

    pub fn in_i2(&self, xdot: &[f64]) -> bool {
        dist(xdot, &self.xdot0) <= self.i2_radius * (1.0 + 1e-9)
    }

    /// `[−ε, α − ε]`.
    pub fn interval(&self, eps: f64) -> (f64, f64) {
        (-eps, self.alpha - eps)
    }

    pub fn covers(&self, eps: f64) -> bool {
        eps > 0.0 && eps <= self.eps0
    }

    /// `Σ_{n=2}^{max_n} a_n`.
    pub fn weissinger_budget(&self, max_n: usize) -> f64 {
        weissinger_partial_sums(max_n, self.alpha, self.lip_f1, self.lip_f2, self.k)
            .last()
            .copied()
            .unwrap_or(0.0)
    }

    /// Key/value pairs in display order.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        let vec = |v: &[f64]| format!("{v:?}");
        vec![
            ("chart", self.chart.clone()),
            ("eps", self.eps.map_or_else(|| "-".into(), |e| e.to_string())),
            ("x0", vec(&self.x0)),
            ("xdot0", vec(&self.xdot0)),
            ("b", self.b.to_string()),
            ("c", self.c.to_string()),
            ("I2_radius", self.i2_radius.to_string()),
            ("norm_F1", self.norm_f1.to_string()),
            ("norm_F2", self.norm_f2.to_string()),
            ("K", self.k.to_string()),
            ("lip_F1", self.lip_f1.to_string()),
            ("lip_F2", self.lip_f2.to_string()),
            ("alpha", self.alpha.to_string()),
            ("eps0", self.eps0.to_string()),
            ("grid", self.grid.to_string()),
        ]
    }
}

fn fit_ball(model: &dyn Manifold, x0: &[f64], mut b: f64, grid: usize) -> Result<f64> {
    for _ in 0..40 {
        if ball_samples(x0, b, grid).iter().all(|p| model.check_point(p).is_ok()) {
            return Ok(b);
        }
        b *= 0.5;
    }
    Err(Error::Domain {
        model: model.name().to_string(),
        coords: x0.to_vec(),
    })
}

/// Certificate centred on `(x0, ẋ0)`, the state entering the strip.
pub fn certify(
    wave: &WaveSpacetime,
    x0: &[f64],
    xdot0: &[f64],
    opts: &CertifyOptions,
) -> Result<ExistenceCertificate> {
    let model = &*wave.manifold;
    model.check_point(x0)?;
    check_dim(model.dim(), xdot0.len())?;
    let b = if opts.shrink_ball {
        fit_ball(model, x0, opts.b, opts.grid)?
    } else {
        opts.b
    };
    let k = wave.net.l1_bound();
    let s = estimate_sup_norms(model, &*wave.profile, x0, xdot0, b, opts.c, k, opts.grid)?;
    let (alpha, eps0) = alpha_bound(norm(xdot0), b, opts.c, s.norm_f1, s.norm_f2, k)?;
    Ok(ExistenceCertificate {
        chart: model.name().to_string(),
        eps: None,
        x0: x0.to_vec(),
        xdot0: xdot0.to_vec(),
        b,
        c: opts.c,
        i2_radius: s.i2_radius,
        norm_f1: s.norm_f1,
        norm_f2: s.norm_f2,
        k,
        lip_f1: s.lip_f1,
        lip_f2: s.lip_f2,
        alpha,
        eps0,
        grid: s.grid,
    })
}

/// The background state at `u = −ε` of data posed at `u = −1`.
pub fn entry_state(
    model: &dyn Manifold,
    x0: &[f64],
    xdot0: &[f64],
    eps: f64,
    tol: f64,
    blowup: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(eps > 0.0 && eps <= MAX_EPS) {
        return Err(Error::InvalidInput(format!("eps must lie in (0, 1/2], got {eps}")));
    }
    model.check_point(x0)?;
    check_dim(model.dim(), xdot0.len())?;
    Ok(integrate_background(model, x0, xdot0, DATA_SURFACE, -eps, tol, blowup)?.end_state())
}

/// Certificate for the entry data of a given `ε`.
pub fn certify_at(
    wave: &WaveSpacetime,
    x0: &[f64],
    xdot0: &[f64],
    eps: f64,
    opts: &CertifyOptions,
) -> Result<ExistenceCertificate> {
    let (x, xd) = entry_state(&*wave.manifold, x0, xdot0, eps, opts.tol, opts.blowup)?;
    let mut cert = certify(wave, &x, &xd, opts)?;
    cert.eps = Some(eps);
    Ok(cert)
}

/// Finds an `ε` covered by its own certificate, starting from `ε = ½` and
/// moving to the certified `ε₀` until `ε ≤ ε₀(ε)`.
pub fn certify_auto(
    wave: &WaveSpacetime,
    x0: &[f64],
    xdot0: &[f64],
    opts: &CertifyOptions,
) -> Result<ExistenceCertificate> {
    let mut eps = MAX_EPS;
    for _ in 0..100 {
        let cert = certify_at(wave, x0, xdot0, eps, opts)?;
        if cert.covers(eps) {
            return Ok(cert);
        }
        eps = cert.eps0.min(eps * (1.0 - 1e-3));
    }
    Err(Error::InvalidInput("no self-consistent eps0 found".into()))
}

/// `a_n = 4·max(Lip F₁, K·Lip F₂)·α^(2n−2) / (2n−2)!` for `n ≥ 2`.
pub fn weissinger_coefficient(n: usize, alpha: f64, lip_f1: f64, lip_f2: f64, k: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("Weissinger coefficients start at n = 2, got {n}")));
    }
    let lead = 4.0 * lip_f1.max(k * lip_f2);
    if lead == 0.0 {
        return Ok(0.0);
    }
    let m = 2 * n - 2;
    let mut term = 1.0;
    for j in 1..=m {
        term *= alpha / j as f64;
    }
    Ok(lead * term)
}

/// Partial sums `Σ_{j=2}^{n} a_j` for `n = 2..=max_n`.
pub fn weissinger_partial_sums(max_n: usize, alpha: f64, lip_f1: f64, lip_f2: f64, k: f64) -> Vec<f64> {
    let mut acc = 0.0;
    (2..=max_n)
        .map(|n| {
            acc += weissinger_coefficient(n, alpha, lip_f1, lip_f2, k).expect("n >= 2");
            acc
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Stop when the C¹ grid-norm change of one application is at most this.
    pub tol: f64,
    pub max_iter: usize,
    pub min_intervals: usize,
    pub max_intervals: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 200,
            min_intervals: 2000,
            max_intervals: 2000 << 6,
        }
    }
}

/// Box `I₁ × I₂` and Lipschitz data used to police and bound the iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardBox {
    pub b: f64,
    pub i2_radius: f64,
    pub lip_f1: f64,
    pub lip_f2: f64,
    pub k: f64,
}

impl From<&ExistenceCertificate> for PicardBox {
    fn from(c: &ExistenceCertificate) -> Self {
        Self {
            b: c.b,
            i2_radius: c.i2_radius,
            lip_f1: c.lip_f1,
            lip_f2: c.lip_f2,
            k: c.k,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardSolution {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub xdot: Vec<Vec<f64>>,
    /// Applications of the operator on the final grid.
    pub iterations: usize,
    /// Applications that changed the iterate by more than the tolerance.
    pub corrective_iterations: usize,
    pub residual: f64,
    pub intervals: usize,
    /// Largest change between the last two grids at shared nodes.
    pub grid_shift: f64,
    pub grid_converged: bool,
    /// `(Σ_{n≥iterations} a_n)·‖x¹ − x⁰‖` when Lipschitz data were supplied.
    pub a_priori_bound: Option<f64>,
}

impl PicardSolution {
    /// Linear interpolation of `x` at `t` on the solution grid.
    pub fn x_at(&self, t: f64) -> Option<Vec<f64>> {
        let (t0, t1) = (self.t[0], self.t[self.t.len() - 1]);
        if t < t0 || t > t1 {
            return None;
        }
        let h = (t1 - t0) / self.intervals as f64;
        let i = (((t - t0) / h).floor() as usize).min(self.intervals - 1);
        let w = (t - self.t[i]) / h;
        Some(
            self.x[i]
                .iter()
                .zip(&self.x[i + 1])
                .map(|(a, b)| a + w * (b - a))
                .collect(),
        )
    }
}

struct GridRun {
    x: Vec<Vec<f64>>,
    xdot: Vec<Vec<f64>>,
    iterations: usize,
    corrective: usize,
    residual: f64,
    first_change: f64,
}

fn run_grid(
    wave: &WaveSpacetime,
    eps: f64,
    x0: &[f64],
    xdot0: &[f64],
    t: &[f64],
    h: f64,
    opts: &PicardOptions,
    bx: Option<&PicardBox>,
) -> Result<GridRun> {
    let model = &*wave.manifold;
    let profile = &*wave.profile;
    let net = &*wave.net;
    let n = model.dim();
    let m = t.len();
    // seed: the straight line x₀ + ẋ₀(t + ε)
    let mut x: Vec<Vec<f64>> = t
        .iter()
        .map(|&ti| x0.iter().zip(xdot0).map(|(a, v)| a + v * (ti + eps)).collect())
        .collect();
    let mut xdot: Vec<Vec<f64>> = vec![xdot0.to_vec(); m];
    let delta: Vec<f64> = t.iter().map(|&ti| net.eval(eps, ti)).collect();
    let mut g = vec![vec![0.0; m]; n];
    let mut acc = vec![0.0; n];
    let mut first_change = 0.0;
    let mut last_change = f64::NAN;
    for it in 1..=opts.max_iter {
        for i in 0..m {
            if !model.in_domain(&x[i]) || x[i].iter().any(|c| !c.is_finite()) {
                return Err(Error::CertificateViolation {
                    t: t[i],
                    detail: format!("iterate left the chart at {:?}", x[i]),
                });
            }
            model.christoffel(&x[i]).contract_into(&xdot[i], &xdot[i], &mut acc);
            let push = if delta[i] != 0.0 {
                f2(model, profile, &x[i])
            } else {
                vec![0.0; n]
            };
            for k in 0..n {
                g[k][i] = -acc[k] + push[k] * delta[i];
            }
        }
        let mut new_x = vec![vec![0.0; n]; m];
        let mut new_xdot = vec![vec![0.0; n]; m];
        for k in 0..n {
            let vel = cumulative_simpson(&g[k], h);
            let vel: Vec<f64> = vel.iter().map(|v| xdot0[k] + v).collect();
            let pos = cumulative_simpson(&vel, h);
            for i in 0..m {
                new_xdot[i][k] = vel[i];
                new_x[i][k] = x0[k] + pos[i];
            }
        }
        let mut change: f64 = 0.0;
        for i in 0..m {
            change = change
                .max(dist(&new_x[i], &x[i]))
                .max(dist(&new_xdot[i], &xdot[i]));
        }
        if it == 1 {
            first_change = change;
        }
        if let Some(bx) = bx {
            for i in 0..m {
                if dist(&new_x[i], x0) > bx.b * (1.0 + 1e-9) {
                    return Err(Error::CertificateViolation {
                        t: t[i],
                        detail: format!("x = {:?} outside I1 (b = {})", new_x[i], bx.b),
                    });
                }
                if dist(&new_xdot[i], xdot0) > bx.i2_radius * (1.0 + 1e-9) {
                    return Err(Error::CertificateViolation {
                        t: t[i],
                        detail: format!("xdot = {:?} outside I2 (radius {})", new_xdot[i], bx.i2_radius),
                    });
                }
            }
        }
        x = new_x;
        xdot = new_xdot;
        if change <= opts.tol {
            return Ok(GridRun {
                x,
                xdot,
                iterations: it,
                // every application before the last one moved the iterate
                corrective: it - 1,
                residual: change,
                first_change,
            });
        }
        last_change = change;
    }
    Err(Error::PicardDiverged {
        iterations: opts.max_iter,
        residual: last_change,
    })
}

/// Fixed-point iteration of the integral operator on a uniform grid over
/// `[−ε, α − ε]`, doubling the grid until the solution moves by at most `tol`.
pub fn picard_solve(
    wave: &WaveSpacetime,
    eps: f64,
    x0: &[f64],
    xdot0: &[f64],
    alpha: f64,
    opts: &PicardOptions,
    bx: Option<&PicardBox>,
) -> Result<PicardSolution> {
    let model = &*wave.manifold;
    model.check_point(x0)?;
    check_dim(model.dim(), xdot0.len())?;
    if !(eps > 0.0 && alpha > 0.0 && eps <= alpha / 2.0) {
        return Err(Error::InvalidInput(format!(
            "need 0 < eps <= alpha/2, got eps = {eps}, alpha = {alpha}"
        )));
    }
    if !(opts.tol > 0.0) || opts.min_intervals < 2 {
        return Err(Error::InvalidInput("picard tolerance and grid must be positive".into()));
    }
    let grid = |intervals: usize| -> (Vec<f64>, f64) {
        let h = alpha / intervals as f64;
        ((0..=intervals).map(|i| -eps + h * i as f64).collect(), h)
    };

    let mut intervals = opts.min_intervals;
    let (mut t, h) = grid(intervals);
    let mut run = run_grid(wave, eps, x0, xdot0, &t, h, opts, bx)?;
    let mut grid_shift = f64::INFINITY;
    let mut grid_converged = false;
    while intervals * 2 <= opts.max_intervals {
        let (t2, h2) = grid(intervals * 2);
        let run2 = run_grid(wave, eps, x0, xdot0, &t2, h2, opts, bx)?;
        grid_shift = (0..=intervals)
            .map(|i| {
                dist(&run.x[i], &run2.x[2 * i]).max(dist(&run.xdot[i], &run2.xdot[2 * i]))
            })
            .fold(0.0, f64::max);
        intervals *= 2;
        t = t2;
        run = run2;
        if grid_shift <= opts.tol {
            grid_converged = true;
            break;
        }
    }

    let a_priori_bound = bx.map(|bx| {
        let start = run.iterations.max(2);
        let tail: f64 = (start..start + 60)
            .map(|n| weissinger_coefficient(n, alpha, bx.lip_f1, bx.lip_f2, bx.k).expect("n >= 2"))
            .sum();
        tail * run.first_change
    });

    Ok(PicardSolution {
        t,
        x: run.x,
        xdot: run.xdot,
        iterations: run.iterations,
        corrective_iterations: run.corrective,
        residual: run.residual,
        intervals,
        grid_shift,
        grid_converged,
        a_priori_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Euclidean, HyperbolicHalfPlane};
    use crate::profiles::{Constant, FnProfile, GaussianBump, Linear, Mollifier};
    use crate::profiles::DeltaNet;
    use crate::quadrature;

    fn flat_linear() -> WaveSpacetime {
        WaveSpacetime::new(
            Euclidean::new(2),
            Linear {
                coeffs: vec![1.0, 0.0],
                offset: 0.0,
            },
            Mollifier,
        )
    }

    #[test]
    fn alpha_examples() {
        let (a, e) = alpha_bound(1.0, 1.0, 1.0, 0.0, 0.5, 1.0).unwrap();
        assert!((a - 2.0 / 3.0).abs() < 1e-15 && (e - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(alpha_bound(2.0, 1.0, 1.0, 0.0, 0.0, 1.0).unwrap().0, 0.5);
        assert_eq!(alpha_bound(0.0, 100.0, 1.0, 4.0, 0.0, 1.0).unwrap().0, 0.25);
        assert_eq!(alpha_bound(0.0, 1.0, 1.0, 0.0, 0.0, 1.0).unwrap().0, 1.0);
        assert!(alpha_bound(1.0, 0.0, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(alpha_bound(1.0, 1.0, 1.0, -1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn sup_norms_flat_linear() {
        let s = estimate_sup_norms(
            &Euclidean::new(2),
            &Linear {
                coeffs: vec![1.0, 0.0],
                offset: 0.0,
            },
            &[0.3, 0.0],
            &[1.0, 0.0],
            1.0,
            1.0,
            1.0,
            9,
        )
        .unwrap();
        assert_eq!((s.norm_f1, s.norm_f2, s.lip_f1, s.lip_f2), (0.0, 0.5, 0.0, 0.0));
        assert_eq!(s.i2_radius, 1.5);
    }

    #[test]
    fn sup_norm_of_quadratic_profile() {
        let f = FnProfile::new("x1^2", |x: &[f64]| x[0] * x[0]);
        let s = estimate_sup_norms(&Euclidean::new(2), &f, &[1.0, 0.0], &[0.0, 0.0], 1.0, 1.0, 1.0, 9)
            .unwrap();
        // exact sup of |x¹| on the unit ball around (1, 0) is 2
        assert!(s.norm_f2 >= 2.0 - 1e-6 && s.norm_f2 <= 2.2 + 1e-6, "{}", s.norm_f2);
        assert!((s.lip_f2 - 1.0).abs() < 1e-5 || s.lip_f2 >= 1.0);
    }

    #[test]
    fn sup_norm_of_geodesic_forcing_on_half_plane() {
        let (x0, xd0) = ([0.0, 1.0], [0.3, -0.2]);
        let s = estimate_sup_norms(&HyperbolicHalfPlane, &Constant { value: 0.0 }, &x0, &xd0, 0.5, 1.0, 1.0, 11)
            .unwrap();
        assert_eq!(s.norm_f2, 0.0);
        // brute-force oracle on a much finer polar sampling of I₃
        let mut worst: f64 = 0.0;
        for i in 0..=40 {
            for j in 0..=40 {
                let (r1, a1) = (0.5 * i as f64 / 40.0, j as f64 * std::f64::consts::TAU / 40.0);
                let y = [x0[0] + r1 * a1.cos(), x0[1] + r1 * a1.sin()];
                let gamma = HyperbolicHalfPlane.christoffel(&y);
                for a2 in 0..40 {
                    let a2 = a2 as f64 * std::f64::consts::TAU / 40.0;
                    let z = [xd0[0] + a2.cos(), xd0[1] + a2.sin()];
                    worst = worst.max(norm(&gamma.contract(&z, &z)));
                }
            }
        }
        assert!(s.norm_f1 >= 0.97 * worst, "{} vs oracle {worst}", s.norm_f1);
        assert!(s.norm_f1 <= 1.5 * worst);
    }

    #[test]
    fn ball_outside_chart_is_rejected() {
        let r = estimate_sup_norms(&HyperbolicHalfPlane, &Constant { value: 0.0 }, &[0.0, 0.5], &[0.0, 0.0], 1.0, 1.0, 1.0, 9);
        assert!(matches!(r, Err(Error::Domain { .. })));
        let wave = WaveSpacetime::new(HyperbolicHalfPlane, Constant { value: 0.0 }, Mollifier);
        let opts = CertifyOptions {
            shrink_ball: true,
            ..CertifyOptions::default()
        };
        let cert = certify(&wave, &[0.0, 0.5], &[0.0, 0.0], &opts).unwrap();
        assert!(cert.b < 0.5);
    }

    #[test]
    fn flat_linear_certificate() {
        let wave = flat_linear();
        let cert = certify_at(&wave, &[0.0, 0.0], &[1.0, 0.0], 0.25, &CertifyOptions::default()).unwrap();
        assert!((cert.x0[0] - 0.75).abs() < 1e-12);
        assert!((cert.alpha - 2.0 / 3.0).abs() < 1e-15);
        assert!((cert.eps0 - 1.0 / 3.0).abs() < 1e-15);
        assert!(cert.covers(0.25));
        let auto = certify_auto(&wave, &[0.0, 0.0], &[1.0, 0.0], &CertifyOptions::default()).unwrap();
        assert!(auto.covers(auto.eps.unwrap()));
        assert!(auto.eps.unwrap() <= 1.0 / 3.0);
    }

    #[test]
    fn weissinger_examples() {
        assert_eq!(weissinger_coefficient(2, 1.0, 1.0, 0.0, 1.0).unwrap(), 2.0);
        let a3 = weissinger_coefficient(3, 2.0 / 3.0, 3.0, 0.0, 1.0).unwrap();
        assert!((a3 - 4.0 * 3.0 * (2.0f64 / 3.0).powi(4) / 24.0).abs() < 1e-15);
        assert!((a3 - 0.098_765_432).abs() < 1e-8);
        assert_eq!(weissinger_coefficient(7, 0.5, 0.0, 0.0, 1.0).unwrap(), 0.0);
        assert!(weissinger_coefficient(1, 0.5, 1.0, 1.0, 1.0).is_err());
        // K scales the second constant
        assert_eq!(weissinger_coefficient(2, 1.0, 1.0, 1.0, 3.0).unwrap(), 6.0);
    }

    #[test]
    fn weissinger_series_is_summable() {
        let sums = weissinger_partial_sums(40, 1.0, 1e3, 1e3, 1.5);
        let last = sums[sums.len() - 1];
        assert!((sums[30] - last).abs() <= 1e-12 * last);
        // closed form: Σ_{m≥1} α^{2m}/(2m)! = cosh α − 1
        let s = weissinger_partial_sums(40, 0.7, 0.25, 0.0, 1.0);
        assert!((s[s.len() - 1] - (0.7f64.cosh() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn straight_line_is_a_fixed_point() {
        let wave = WaveSpacetime::new(Euclidean::new(2), Constant { value: 0.0 }, Mollifier);
        let sol = picard_solve(&wave, 0.1, &[0.0, 0.0], &[1.0, 2.0], 0.5, &PicardOptions::default(), None)
            .unwrap();
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.corrective_iterations, 0);
        assert!(sol.residual < 1e-12);
    }

    #[test]
    fn flat_linear_picard_matches_double_integral() {
        let wave = flat_linear();
        let cert = certify_at(&wave, &[0.0, 0.0], &[1.0, 0.0], 0.25, &CertifyOptions::default()).unwrap();
        let eps = 0.25;
        let sol = picard_solve(&wave, eps, &cert.x0, &cert.xdot0, cert.alpha, &PicardOptions::default(), Some(&(&cert).into()))
            .unwrap();
        assert_eq!(sol.corrective_iterations, 1);
        assert_eq!(sol.a_priori_bound, Some(0.0));
        for (i, &t) in sol.t.iter().enumerate().step_by(97) {
            let dbl = if t <= -eps {
                0.0
            } else {
                quadrature::integrate(|r| (t - r) * Mollifier.eval(eps, r), -eps, t.min(eps), 1e-14, 4000)
                    .unwrap()
                    .value
            };
            let exact = cert.x0[0] + (t + eps) + 0.5 * dbl;
            assert!((sol.x[i][0] - exact).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn picard_agrees_with_runge_kutta_on_half_plane() {
        let wave = WaveSpacetime::new(
            HyperbolicHalfPlane,
            GaussianBump {
                amplitude: 1.0,
                width: 0.5,
                center: vec![0.0, 1.0],
            },
            Mollifier,
        );
        let data = crate::dynamics::InitialData::new(vec![-0.4, 1.0], vec![0.4, 0.1], 0.0, 0.0);
        let opts = CertifyOptions {
            b: 0.5,
            ..CertifyOptions::default()
        };
        let auto = certify_auto(&wave, data.x0.coords(), &data.xdot0, &opts).unwrap();
        let eps = auto.eps0 / 2.0;
        let cert = certify_at(&wave, data.x0.coords(), &data.xdot0, eps, &opts).unwrap();
        let sol = picard_solve(&wave, eps, &cert.x0, &cert.xdot0, cert.alpha, &PicardOptions::default(), Some(&(&cert).into()))
            .unwrap();
        let path = crate::dynamics::integrate_impulsive_geodesic(
            &wave,
            eps,
            &data,
            (cert.alpha - eps).max(2.0 * eps),
            &crate::dynamics::IntegrationOptions::default(),
        )
        .unwrap();
        let mut worst: f64 = 0.0;
        for (i, &t) in sol.t.iter().enumerate() {
            let s = path.state_at(t).unwrap();
            worst = worst.max(dist(&s.x, &sol.x[i])).max(dist(&s.xdot, &sol.xdot[i]));
        }
        assert!(worst < 1e-6, "picard vs rk: {worst}");
    }

    #[test]
    fn leaving_the_box_is_reported() {
        let wave = flat_linear();
        let tiny = PicardBox {
            b: 1e-3,
            i2_radius: 1e-3,
            lip_f1: 0.0,
            lip_f2: 0.0,
            k: 1.0,
        };
        let r = picard_solve(&wave, 0.1, &[0.0, 0.0], &[1.0, 0.0], 0.5, &PicardOptions::default(), Some(&tiny));
        assert!(matches!(r, Err(Error::CertificateViolation { .. })));
    }

    #[test]
    fn picard_preconditions() {
        let wave = flat_linear();
        let o = PicardOptions::default();
        assert!(picard_solve(&wave, 0.4, &[0.0, 0.0], &[1.0, 0.0], 0.5, &o, None).is_err());
        assert!(picard_solve(&wave, 0.1, &[0.0], &[1.0, 0.0], 0.5, &o, None).is_err());
    }
}
