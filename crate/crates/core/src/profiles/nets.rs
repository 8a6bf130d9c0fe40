use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::quadrature;

/// Unnormalized bump `exp(−1/(1−s²))` on `(−1, 1)`, zero elsewhere.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        return 0.0;
    }
    (-1.0 / (1.0 - s * s)).exp()
}

/// Derivative of [`bump`].
pub fn bump_derivative(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - s * s;
    bump(s) * (-2.0 * s / (q * q))
}

/// `C` with `∫ C·bump = 1`.
pub fn bump_normalization() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| {
        let q = quadrature::integrate(bump, -1.0, 1.0, 1e-15, 4000)
            .expect("bump integral converges");
        1.0 / q.value
    })
}

/// A family `δ_ε` of smooth functions approximating the Dirac measure.
///
/// `eval(ε, u)` must vanish for `|u| ≥ support_radius(ε)`.
pub trait DeltaNet: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn eval(&self, eps: f64, u: f64) -> f64;

    /// `d/du δ_ε(u)`. The default differences `eval`, which loses roughly
    /// a third of the significant digits since `δ̇_ε` is `O(ε⁻²)`.
    fn deriv(&self, eps: f64, u: f64) -> f64 {
        let h = f64::EPSILON.cbrt() * eps;
        (self.eval(eps, u + h) - self.eval(eps, u - h)) / (2.0 * h)
    }

    fn analytic_derivative(&self) -> bool {
        false
    }

    fn support_radius(&self, eps: f64) -> f64;

    /// Declared bound `K` on `∫|δ_ε|`.
    fn l1_bound(&self) -> f64;
}

pub type DeltaNetRef = Arc<dyn DeltaNet>;

/// `δ_ε(u) = ρ(u/ε)/ε` with `ρ = C·bump`; nonnegative, `K = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Mollifier;

impl DeltaNet for Mollifier {
    fn name(&self) -> &str {
        "mollifier"
    }

    fn eval(&self, eps: f64, u: f64) -> f64 {
        bump_normalization() * bump(u / eps) / eps
    }

    fn deriv(&self, eps: f64, u: f64) -> f64 {
        bump_normalization() * bump_derivative(u / eps) / (eps * eps)
    }

    fn analytic_derivative(&self) -> bool {
        true
    }

    fn support_radius(&self, eps: f64) -> f64 {
        eps
    }

    fn l1_bound(&self) -> f64 {
        1.0
    }
}

// (−1, 0.5) is the image of (−1, 1) under s ↦ 0.75 t − 0.25.
const ASYM_HALF_WIDTH: f64 = 0.75;
const ASYM_SHIFT: f64 = -0.25;

/// Mollifier profile squeezed onto `(−1, 0.5)`: nonnegative, unit mass,
/// first moment `−ε/4`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AsymmetricMollifier;

impl AsymmetricMollifier {
    fn shape(s: f64) -> f64 {
        bump_normalization() * bump((s - ASYM_SHIFT) / ASYM_HALF_WIDTH) / ASYM_HALF_WIDTH
    }

    fn shape_deriv(s: f64) -> f64 {
        bump_normalization() * bump_derivative((s - ASYM_SHIFT) / ASYM_HALF_WIDTH)
            / (ASYM_HALF_WIDTH * ASYM_HALF_WIDTH)
    }
}

impl DeltaNet for AsymmetricMollifier {
    fn name(&self) -> &str {
        "asymmetric"
    }

    fn eval(&self, eps: f64, u: f64) -> f64 {
        Self::shape(u / eps) / eps
    }

    fn deriv(&self, eps: f64, u: f64) -> f64 {
        Self::shape_deriv(u / eps) / (eps * eps)
    }

    fn analytic_derivative(&self) -> bool {
        true
    }

    fn support_radius(&self, eps: f64) -> f64 {
        eps
    }

    fn l1_bound(&self) -> f64 {
        1.0
    }
}

const SIGNED_POS: f64 = 1.25;
const SIGNED_NEG: f64 = 0.25;
const SIGNED_NEG_CENTER: f64 = 0.5;
const SIGNED_NEG_WIDTH: f64 = 0.25;

/// `(1.25 ρ_a − 0.25 ρ_b)(u/ε)/ε` with `ρ_a` the mollifier profile and `ρ_b`
/// a unit-mass bump on `(0.25, 0.75)`. Takes negative values near `u = ε/2`;
/// `K = 1.5`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SignedNet;

impl SignedNet {
    fn shape(s: f64) -> f64 {
        let c = bump_normalization();
        SIGNED_POS * c * bump(s)
            - SIGNED_NEG * c * bump((s - SIGNED_NEG_CENTER) / SIGNED_NEG_WIDTH) / SIGNED_NEG_WIDTH
    }

    fn shape_deriv(s: f64) -> f64 {
        let c = bump_normalization();
        SIGNED_POS * c * bump_derivative(s)
            - SIGNED_NEG * c * bump_derivative((s - SIGNED_NEG_CENTER) / SIGNED_NEG_WIDTH)
                / (SIGNED_NEG_WIDTH * SIGNED_NEG_WIDTH)
    }
}

impl DeltaNet for SignedNet {
    fn name(&self) -> &str {
        "signed"
    }

    fn eval(&self, eps: f64, u: f64) -> f64 {
        Self::shape(u / eps) / eps
    }

    fn deriv(&self, eps: f64, u: f64) -> f64 {
        Self::shape_deriv(u / eps) / (eps * eps)
    }

    fn analytic_derivative(&self) -> bool {
        true
    }

    fn support_radius(&self, eps: f64) -> f64 {
        eps
    }

    fn l1_bound(&self) -> f64 {
        SIGNED_POS + SIGNED_NEG
    }
}

/// `factor · δ_ε`; its declared `K` scales with the factor. With a factor
/// other than 1 the integrals converge to `factor`, violating unit mass.
#[derive(Debug, Clone)]
pub struct ScaledNet {
    pub inner: DeltaNetRef,
    pub factor: f64,
}

impl DeltaNet for ScaledNet {
    fn name(&self) -> &str {
        "scaled"
    }

    fn eval(&self, eps: f64, u: f64) -> f64 {
        self.factor * self.inner.eval(eps, u)
    }

    fn deriv(&self, eps: f64, u: f64) -> f64 {
        self.factor * self.inner.deriv(eps, u)
    }

    fn analytic_derivative(&self) -> bool {
        self.inner.analytic_derivative()
    }

    fn support_radius(&self, eps: f64) -> f64 {
        self.inner.support_radius(eps)
    }

    fn l1_bound(&self) -> f64 {
        self.factor.abs() * self.inner.l1_bound()
    }
}

/// The mollifier profile at `ε = 1` for every `ε`: the support never shrinks.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedSupportNet;

impl DeltaNet for FixedSupportNet {
    fn name(&self) -> &str {
        "fixed-support"
    }

    fn eval(&self, _eps: f64, u: f64) -> f64 {
        bump_normalization() * bump(u)
    }

    fn deriv(&self, _eps: f64, u: f64) -> f64 {
        bump_normalization() * bump_derivative(u)
    }

    fn analytic_derivative(&self) -> bool {
        true
    }

    fn support_radius(&self, _eps: f64) -> f64 {
        1.0
    }

    fn l1_bound(&self) -> f64 {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // ∫_{-1}^{1} exp(−1/(1−s²)) ds (30-digit mpmath quadrature, rounded to f64).
    const BUMP_MASS: f64 = 0.443_993_816_168_079_4;

    fn nets() -> Vec<Box<dyn DeltaNet>> {
        vec![
            Box::new(Mollifier),
            Box::new(AsymmetricMollifier),
            Box::new(SignedNet),
        ]
    }

    fn integral(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        quadrature::integrate(f, a, b, 1e-13, 4000).unwrap().value
    }

    #[test]
    fn normalization_constant() {
        assert!((1.0 / bump_normalization() - BUMP_MASS).abs() < 1e-15);
    }

    #[test]
    fn builtin_nets_vanish_outside_support() {
        for net in nets() {
            for eps in [0.5, 0.1, 1e-3] {
                let r = net.support_radius(eps);
                assert!(r <= eps);
                for u in [r, -r, 1.0001 * r, -3.0 * r, 10.0] {
                    assert_eq!(net.eval(eps, u), 0.0, "{} at {u}", net.name());
                    assert_eq!(net.deriv(eps, u), 0.0);
                }
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        for net in nets() {
            for eps in [0.5, 0.01] {
                let scale = 1.0 / (eps * eps);
                for k in -19..20 {
                    let u = eps * k as f64 / 20.0;
                    let h = 1e-6 * eps;
                    let fd = (net.eval(eps, u + h) - net.eval(eps, u - h)) / (2.0 * h);
                    assert!(
                        (net.deriv(eps, u) - fd).abs() < 1e-6 * scale,
                        "{} eps={eps} u={u}",
                        net.name()
                    );
                }
            }
        }
    }

    #[test]
    fn derivative_integrates_to_zero() {
        for net in nets() {
            let eps = 0.03;
            let v = integral(|u| net.deriv(eps, u), -eps, eps);
            assert!(v.abs() < 1e-10, "{}: {v}", net.name());
        }
    }

    #[test]
    fn moments_of_builtin_nets() {
        let eps = 0.1;
        let m1 = |net: &dyn DeltaNet| integral(|u| u * net.eval(eps, u), -eps, eps);
        assert!(m1(&Mollifier).abs() < 1e-14);
        assert!((m1(&AsymmetricMollifier) + 0.25 * eps).abs() < 1e-12);
        let l1 = integral(|u| SignedNet.eval(eps, u).abs(), -eps, eps);
        assert!(l1 > 1.0 && l1 <= 1.5 + 1e-8, "signed L1 = {l1}");
        assert!(SignedNet.eval(eps, 0.5 * eps) < 0.0);
    }

    #[test]
    fn scaled_and_fixed_nets() {
        let s = ScaledNet {
            inner: Arc::new(Mollifier),
            factor: 2.0,
        };
        assert_eq!(s.l1_bound(), 2.0);
        assert_eq!(s.eval(0.1, 0.0), 2.0 * Mollifier.eval(0.1, 0.0));
        assert_eq!(FixedSupportNet.support_radius(1e-3), 1.0);
        assert_eq!(FixedSupportNet.eval(1e-3, 0.5), FixedSupportNet.eval(0.5, 0.5));
    }
}
