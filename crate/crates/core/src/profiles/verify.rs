use std::fmt;

use super::nets::DeltaNet;
use crate::error::{Error, Result};
use crate::quadrature;

/// Absolute quadrature tolerance for the net integrals.
pub const NET_QUADRATURE_TOL: f64 = 1e-12;
const MAX_INTERVALS: usize = 4000;
const SUPPORT_PROBES: usize = 64;

/// The three defining properties of a strict delta net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetProperty {
    /// Supports shrink to `{0}`: `supp δ_ε ⊆ (−ε, ε)`.
    ShrinkingSupport,
    /// `∫ δ_ε → 1`.
    UnitMass,
    /// `∫ |δ_ε| ≤ K`.
    BoundedL1,
}

impl fmt::Display for NetProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NetProperty::ShrinkingSupport => "shrinking-support",
            NetProperty::UnitMass => "unit-mass",
            NetProperty::BoundedL1 => "bounded-l1",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationRow {
    pub eps: f64,
    pub support_radius: f64,
    /// Declared radius within `ε` and no nonzero value found outside it.
    pub support_ok: bool,
    pub integral: Option<f64>,
    pub abs_integral: Option<f64>,
    pub indeterminate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetVerification {
    pub net: String,
    pub declared_k: f64,
    pub tol: f64,
    pub rows: Vec<VerificationRow>,
    pub support_pass: bool,
    pub mass_pass: bool,
    pub l1_pass: bool,
    /// Largest measured `∫|δ_ε|`.
    pub measured_k: f64,
}

impl NetVerification {
    pub fn passes(&self) -> bool {
        self.support_pass && self.mass_pass && self.l1_pass && !self.has_indeterminate()
    }

    pub fn has_indeterminate(&self) -> bool {
        self.rows.iter().any(|r| r.indeterminate)
    }

    pub fn failed_properties(&self) -> Vec<NetProperty> {
        let mut out = Vec::new();
        if !self.support_pass {
            out.push(NetProperty::ShrinkingSupport);
        }
        if !self.mass_pass {
            out.push(NetProperty::UnitMass);
        }
        if !self.l1_pass {
            out.push(NetProperty::BoundedL1);
        }
        out
    }
}

fn support_respected(net: &dyn DeltaNet, eps: f64) -> bool {
    let r = net.support_radius(eps);
    if !(r > 0.0) || r > eps * (1.0 + 1e-12) {
        return false;
    }
    // probe beyond the declared radius and beyond ε out to |u| = 2
    let far = 2.0_f64.max(2.0 * eps);
    (0..=SUPPORT_PROBES).all(|j| {
        let t = j as f64 / SUPPORT_PROBES as f64;
        [r, eps].iter().all(|&edge| {
            let u = edge + t * (far - edge);
            net.eval(eps, u) == 0.0 && net.eval(eps, -u) == 0.0
        })
    })
}

/// Checks the strict-delta-net properties over a decreasing `ε` schedule.
///
/// Unit mass passes when `|∫δ_ε − 1|` is non-increasing along the schedule
/// (up to `tol`) and below `tol` at the smallest `ε`; the L¹ property passes
/// when every `∫|δ_ε| ≤ K + tol`.
pub fn verify_strict_delta_net(
    net: &dyn DeltaNet,
    eps_schedule: &[f64],
    tol: f64,
) -> Result<NetVerification> {
    if eps_schedule.is_empty() {
        return Err(Error::InvalidInput("empty eps schedule".into()));
    }
    if eps_schedule.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidInput("eps schedule must be positive".into()));
    }
    if eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("eps schedule must be strictly decreasing".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }

    let rows: Vec<VerificationRow> = eps_schedule
        .iter()
        .map(|&eps| {
            let radius = net.support_radius(eps);
            let span = radius.max(eps);
            let integral =
                quadrature::integrate(|u| net.eval(eps, u), -span, span, NET_QUADRATURE_TOL, MAX_INTERVALS)
                    .ok()
                    .map(|q| q.value);
            let abs_integral = quadrature::integrate(
                |u| net.eval(eps, u).abs(),
                -span,
                span,
                NET_QUADRATURE_TOL,
                MAX_INTERVALS,
            )
            .ok()
            .map(|q| q.value);
            VerificationRow {
                eps,
                support_radius: radius,
                support_ok: support_respected(net, eps),
                indeterminate: integral.is_none() || abs_integral.is_none(),
                integral,
                abs_integral,
            }
        })
        .collect();

    let support_pass = rows.iter().all(|r| r.support_ok);

    let mass_errors: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.integral)
        .map(|i| (i - 1.0).abs())
        .collect();
    let mass_pass = match mass_errors.last() {
        Some(&last) => last < tol && mass_errors.windows(2).all(|w| w[1] <= w[0] + tol),
        None => false,
    };

    let measured_k = rows
        .iter()
        .filter_map(|r| r.abs_integral)
        .fold(0.0_f64, f64::max);
    let l1_pass = rows.iter().any(|r| r.abs_integral.is_some()) && measured_k <= net.l1_bound() + tol;

    Ok(NetVerification {
        net: net.name().to_string(),
        declared_k: net.l1_bound(),
        tol,
        rows,
        support_pass,
        mass_pass,
        l1_pass,
        measured_k,
    })
}
