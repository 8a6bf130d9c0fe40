//! Explicit adaptive Dormand–Prince 5(4) integrator with its fourth-order
//! continuous extension as dense output.

use std::fmt;

/// Why a right-hand side or an accepted state was refused.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FailureReason {
    /// A coordinate or velocity component exceeded the configured bound.
    BlowUp { bound: f64 },
    /// The state left the chart domain.
    ChartEscape,
    StepUnderflow,
    MaxSteps,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::BlowUp { bound } => write!(f, "blow-up guard triggered (bound {bound:e})"),
            FailureReason::ChartEscape => write!(f, "trajectory left the chart domain"),
            FailureReason::StepUnderflow => write!(f, "step size underflow"),
            FailureReason::MaxSteps => write!(f, "maximum number of steps exceeded"),
        }
    }
}

pub trait OdeSystem {
    fn dim(&self) -> usize;

    /// Evaluates `dy = f(t, y)`. An `Err` makes the integrator reject the step.
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), FailureReason>;

    /// Called on every accepted state; an `Err` aborts the integration.
    fn admissible(&self, _t: f64, _y: &[f64]) -> Result<(), FailureReason> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }

    pub fn h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }
}

impl Default for StepControl {
    fn default() -> Self {
        Self::with_tolerance(1e-10)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub t: f64,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

impl std::ops::AddAssign for StepStats {
    fn add_assign(&mut self, rhs: Self) {
        self.accepted += rhs.accepted;
        self.rejected += rhs.rejected;
        self.rhs_evals += rhs.rhs_evals;
    }
}

/// Accepted nodes of one integration run with the per-step interpolants.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOutput {
    nodes: Vec<Node>,
    // five coefficient vectors per step, flattened: [r1 | r2 | r3 | r4 | r5]
    coeffs: Vec<Vec<f64>>,
}

impl DenseOutput {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn t_start(&self) -> f64 {
        self.nodes[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].t
    }

    pub fn first(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn last(&self) -> &Node {
        &self.nodes[self.nodes.len() - 1]
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start() && t <= self.t_end()
    }

    /// Interpolated state and derivative at `t`, or `None` outside the range.
    pub fn eval(&self, t: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        if !self.contains(t) {
            return None;
        }
        let idx = match self
            .nodes
            .binary_search_by(|n| n.t.partial_cmp(&t).expect("finite node times"))
        {
            Ok(i) => {
                let n = &self.nodes[i];
                return Some((n.y.clone(), n.dy.clone()));
            }
            Err(i) => i - 1,
        };
        let (a, b) = (&self.nodes[idx], &self.nodes[idx + 1]);
        let h = b.t - a.t;
        let s = (t - a.t) / h;
        let s1 = 1.0 - s;
        let n = a.y.len();
        let r = &self.coeffs[idx];
        let mut y = Vec::with_capacity(n);
        let mut dy = Vec::with_capacity(n);
        for i in 0..n {
            let (r1, r2, r3, r4, r5) = (r[i], r[n + i], r[2 * n + i], r[3 * n + i], r[4 * n + i]);
            // y = r1 + s(r2 + s1(r3 + s(r4 + s1 r5)))
            let q4 = r4 + s1 * r5;
            let q3 = r3 + s * q4;
            let q2 = r2 + s1 * q3;
            y.push(r1 + s * q2);
            let d4 = -r5;
            let d3 = q4 + s * d4;
            let d2 = -q3 + s1 * d3;
            dy.push((q2 + s * d2) / h);
        }
        Some((y, dy))
    }
}

#[derive(Debug, Clone)]
pub struct OdeFailure {
    pub t: f64,
    /// Last accepted state.
    pub y: Vec<f64>,
    pub reason: FailureReason,
    pub stats: StepStats,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// continuous extension weights
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];
// b − b̂
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

fn rms_norm(v: &[f64], scale: &[f64]) -> f64 {
    let s: f64 = v.iter().zip(scale).map(|(a, s)| (a / s).powi(2)).sum();
    (s / v.len().max(1) as f64).sqrt()
}

/// Integrates `sys` from `t0` to `t1 > t0`, landing exactly on `t1`.
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t1: f64,
    ctrl: &StepControl,
) -> Result<(DenseOutput, StepStats), OdeFailure> {
    let n = sys.dim();
    assert_eq!(y0.len(), n, "initial state has wrong dimension");
    assert!(t1 > t0, "integration interval must be increasing");
    let mut stats = StepStats::default();
    let fail = |t: f64, y: &[f64], reason, stats| OdeFailure {
        t,
        y: y.to_vec(),
        reason,
        stats,
    };

    if let Err(reason) = sys.admissible(t0, y0) {
        return Err(fail(t0, y0, reason, stats));
    }
    let mut f0 = vec![0.0; n];
    stats.rhs_evals += 1;
    if let Err(reason) = sys.rhs(t0, y0, &mut f0) {
        return Err(fail(t0, y0, reason, stats));
    }

    let span = t1 - t0;
    let mut h = initial_step(sys, t0, y0, &f0, ctrl, span, &mut stats).min(ctrl.h_max);
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut nodes = vec![Node {
        t,
        y: y.clone(),
        dy: f0.clone(),
    }];
    let mut coeffs: Vec<Vec<f64>> = Vec::new();

    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    k[0].copy_from_slice(&f0);
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut scale = vec![0.0; n];
    let mut last_reject_reason: Option<FailureReason> = None;
    let mut just_rejected = false;

    loop {
        if stats.accepted + stats.rejected >= ctrl.max_steps {
            return Err(fail(t, &y, FailureReason::MaxSteps, stats));
        }
        let remaining = t1 - t;
        let mut last = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            last = true;
        }
        let h_min = 16.0 * f64::EPSILON * t.abs().max(span);
        if h < h_min {
            let reason = match last_reject_reason {
                Some(FailureReason::ChartEscape) => FailureReason::ChartEscape,
                Some(r @ FailureReason::BlowUp { .. }) => r,
                _ => FailureReason::StepUnderflow,
            };
            return Err(fail(t, &y, reason, stats));
        }

        let mut stage_failure = None;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                stage[i] = y[i] + h * acc;
            }
            let ts = if s == 6 { t + h } else { t + C[s] * h };
            stats.rhs_evals += 1;
            if let Err(reason) = sys.rhs(ts, &stage, &mut k[s]) {
                stage_failure = Some(reason);
                break;
            }
            if s == 6 {
                y_new.copy_from_slice(&stage);
            }
        }

        if let Some(reason) = stage_failure {
            stats.rejected += 1;
            last_reject_reason = Some(reason);
            just_rejected = true;
            h *= 0.25;
            continue;
        }

        for i in 0..n {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate() {
                acc += E[j] * kj[i];
            }
            err[i] = h * acc;
            scale[i] = ctrl.atol + ctrl.rtol * y[i].abs().max(y_new[i].abs());
        }
        let err_norm = rms_norm(&err, &scale);

        if err_norm <= 1.0 && err_norm.is_finite() {
            if let Err(reason) = sys.admissible(t + h, &y_new) {
                return Err(fail(t, &y, reason, stats));
            }
            stats.accepted += 1;
            let mut r = vec![0.0; 5 * n];
            for i in 0..n {
                let dy = y_new[i] - y[i];
                let bspl = h * k[0][i] - dy;
                r[i] = y[i];
                r[n + i] = dy;
                r[2 * n + i] = bspl;
                r[3 * n + i] = dy - h * k[6][i] - bspl;
                r[4 * n + i] = h * D.iter().zip(&k).map(|(d, kj)| d * kj[i]).sum::<f64>();
            }
            coeffs.push(r);
            t = if last { t1 } else { t + h };
            y.copy_from_slice(&y_new);
            k.swap(0, 6);
            nodes.push(Node {
                t,
                y: y.clone(),
                dy: k[0].clone(),
            });
            if last {
                return Ok((DenseOutput { nodes, coeffs }, stats));
            }
            let mut fac = if err_norm == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err_norm.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            if just_rejected {
                fac = fac.min(1.0);
            }
            just_rejected = false;
            last_reject_reason = None;
            h = (h * fac).min(ctrl.h_max);
        } else {
            stats.rejected += 1;
            just_rejected = true;
            last_reject_reason = None;
            let fac = if err_norm.is_finite() {
                (SAFETY * err_norm.powf(-0.2)).clamp(FAC_MIN, 1.0)
            } else {
                FAC_MIN
            };
            h *= fac;
        }
    }
}

// Starting step heuristic of Hairer, Nørsett & Wanner.
fn initial_step<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    ctrl: &StepControl,
    span: f64,
    stats: &mut StepStats,
) -> f64 {
    let n = y0.len();
    let scale: Vec<f64> = y0.iter().map(|y| ctrl.atol + ctrl.rtol * y.abs()).collect();
    let d0 = rms_norm(y0, &scale);
    let d1 = rms_norm(f0, &scale);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span).min(ctrl.h_max);
    let y1: Vec<f64> = (0..n).map(|i| y0[i] + h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    stats.rhs_evals += 1;
    if sys.rhs(t0 + h0, &y1, &mut f1).is_err() {
        return h0;
    }
    let diff: Vec<f64> = (0..n).map(|i| f1[i] - f0[i]).collect();
    let d2 = rms_norm(&diff, &scale) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;

    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }

        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), FailureReason> {
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        }
    }

    struct Tangent;

    impl OdeSystem for Tangent {
        fn dim(&self) -> usize {
            1
        }

        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), FailureReason> {
            dy[0] = 1.0 + y[0] * y[0];
            Ok(())
        }

        fn admissible(&self, _t: f64, y: &[f64]) -> Result<(), FailureReason> {
            if y[0].abs() > 1e8 {
                Err(FailureReason::BlowUp { bound: 1e8 })
            } else {
                Ok(())
            }
        }
    }

    #[test]
    fn harmonic_oscillator_to_tolerance() {
        let ctrl = StepControl::with_tolerance(1e-10);
        let (out, stats) = integrate(&Oscillator, 0.0, &[1.0, 0.0], 10.0, &ctrl).unwrap();
        assert_eq!(out.t_end(), 10.0);
        let last = out.last();
        assert!((last.y[0] - 10f64.cos()).abs() < 1e-8);
        assert!((last.y[1] + 10f64.sin()).abs() < 1e-8);
        assert!(stats.accepted > 10);
        for t in [0.37, 2.5, 7.77] {
            let (y, dy) = out.eval(t).unwrap();
            assert!((y[0] - t.cos()).abs() < 1e-8, "dense output at {t}");
            assert!((dy[0] + t.sin()).abs() < 1e-6);
        }
        for k in 0..=1000 {
            let t = k as f64 / 100.0;
            let (y, dy) = out.eval(t).unwrap();
            assert!((y[0] - t.cos()).abs() < 1e-8 && (y[1] + t.sin()).abs() < 1e-8, "t = {t}");
            assert!((dy[0] + t.sin()).abs() < 1e-7, "t = {t}");
        }
        assert!(out.eval(10.5).is_none());
    }

    #[test]
    fn step_cap_is_respected() {
        let ctrl = StepControl::with_tolerance(1e-6).h_max(0.01);
        let (out, _) = integrate(&Oscillator, 0.0, &[1.0, 0.0], 1.0, &ctrl).unwrap();
        for w in out.nodes().windows(2) {
            assert!(w[1].t - w[0].t <= 0.01 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn blow_up_is_reported_with_last_state() {
        let ctrl = StepControl::with_tolerance(1e-10);
        let err = integrate(&Tangent, 0.0, &[0.0], 2.0, &ctrl).unwrap_err();
        assert!(matches!(err.reason, FailureReason::BlowUp { .. }));
        assert!(err.t < std::f64::consts::FRAC_PI_2 && err.t > 1.5);
        assert!(err.y[0].is_finite());
    }
}
