//! Built-in model/profile/net combinations and seeded random initial data.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{InitialData, WaveSpacetime};
use crate::existence::CertifyOptions;
use crate::geometry::{Euclidean, HyperbolicHalfPlane, ManifoldRef, SphereStereographic};
use crate::profiles::{
    AsymmetricMollifier, DeltaNetRef, GaussianBump, Linear, Mollifier, ProfileRef, QuadraticForm,
};

pub const MANIFOLDS: [&str; 3] = ["euclidean", "hyperbolic-half-plane", "sphere-stereographic"];
pub const PROFILES: [&str; 3] = ["linear", "quadratic-form", "gaussian-bump"];
pub const NETS: [&str; 2] = ["mollifier", "asymmetric"];

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub wave: WaveSpacetime,
    pub data: InitialData,
    pub certify: CertifyOptions,
}

/// A reproducible generator for random initial data.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn manifold(name: &str) -> ManifoldRef {
    match name {
        "euclidean" => Arc::new(Euclidean::new(2)),
        "hyperbolic-half-plane" => Arc::new(HyperbolicHalfPlane),
        _ => Arc::new(SphereStereographic),
    }
}

// a reference point near where the default geodesic meets the shock
fn anchor(manifold: &str) -> [f64; 2] {
    match manifold {
        "euclidean" => [1.0, 0.0],
        "hyperbolic-half-plane" => [0.0, 1.0],
        _ => [0.0, 0.1],
    }
}

fn profile(name: &str, manifold: &str) -> ProfileRef {
    let [a, b] = anchor(manifold);
    match name {
        "linear" => Arc::new(Linear {
            coeffs: vec![1.0, 0.0],
            offset: 0.0,
        }),
        "quadratic-form" => Arc::new(
            QuadraticForm::new(
                DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]),
                vec![a - 0.5, b + 0.2],
            )
            .expect("square 2x2 form"),
        ),
        _ => Arc::new(GaussianBump {
            amplitude: 1.0,
            width: 0.5,
            center: vec![a, b + 0.1],
        }),
    }
}

fn net(name: &str) -> DeltaNetRef {
    match name {
        "mollifier" => Arc::new(Mollifier),
        _ => Arc::new(AsymmetricMollifier),
    }
}

fn default_data(manifold: &str) -> InitialData {
    match manifold {
        "euclidean" => InitialData::new(vec![0.0, 0.0], vec![1.0, 0.0], 0.0, 0.0),
        "hyperbolic-half-plane" => InitialData::new(vec![-0.5, 1.0], vec![0.5, 0.1], 0.0, 0.0),
        _ => InitialData::new(vec![-0.4, 0.1], vec![0.4, 0.05], 0.0, 0.0),
    }
}

impl Scenario {
    pub fn new(manifold_name: &str, profile_name: &str, net_name: &str) -> Option<Self> {
        if !MANIFOLDS.contains(&manifold_name)
            || !PROFILES.contains(&profile_name)
            || !NETS.contains(&net_name)
        {
            return None;
        }
        Some(Self {
            name: format!("{manifold_name}/{profile_name}/{net_name}"),
            wave: WaveSpacetime::from_refs(
                manifold(manifold_name),
                profile(profile_name, manifold_name),
                net(net_name),
            ),
            data: default_data(manifold_name),
            certify: CertifyOptions {
                shrink_ball: true,
                ..CertifyOptions::default()
            },
        })
    }

    /// Random data in a box adapted to the chart, with `v₀, v̇₀ ∈ [−1, 1]`.
    pub fn random_data(&self, rng: &mut impl Rng) -> InitialData {
        let (x, xdot) = match self.wave.manifold.name() {
            "hyperbolic-half-plane" => (
                vec![rng.gen_range(-1.0..1.0), rng.gen_range(0.7..1.5)],
                vec![rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)],
            ),
            _ => (
                vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            ),
        };
        InitialData::new(x, xdot, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }
}

/// All 3 × 3 × 2 combinations, in a fixed order.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let mut out = Vec::new();
    for m in MANIFOLDS {
        for p in PROFILES {
            for n in NETS {
                out.push(Scenario::new(m, p, n).expect("built-in names"));
            }
        }
    }
    out
}

/// Flat space, `f = x¹`, symmetric mollifier, `x₀ = 0`, `ẋ₀ = (1, 0)`.
pub fn flat_linear() -> Scenario {
    Scenario::new("euclidean", "linear", "mollifier").expect("built-in names")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_is_complete() {
        let all = builtin_scenarios();
        assert_eq!(all.len(), 18);
        for s in &all {
            s.data.check(&*s.wave.manifold).unwrap();
        }
        assert!(Scenario::new("torus", "linear", "mollifier").is_none());
    }

    #[test]
    fn random_data_is_reproducible_and_admissible() {
        let s = Scenario::new("hyperbolic-half-plane", "gaussian-bump", "mollifier").unwrap();
        let (mut a, mut b) = (rng(11), rng(11));
        for _ in 0..20 {
            let d = s.random_data(&mut a);
            assert_eq!(d, s.random_data(&mut b));
            d.check(&*s.wave.manifold).unwrap();
        }
    }
}
