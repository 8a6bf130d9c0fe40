use std::fmt;

use super::WaveProfile;
use crate::error::{Error, Result};
use crate::geometry::{distance_estimate, ChartPoint, Manifold, TangentVector};
use crate::geometry::{quadratic_form, BackgroundGeodesic};

/// Half-width of the band around `p = 2` classified as at-most-quadratic.
pub const GROWTH_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthClass {
    Subquadratic,
    AtMostQuadratic,
    Superquadratic,
}

impl GrowthClass {
    pub fn from_exponent(p: f64, margin: f64) -> Self {
        if p < 2.0 - margin {
            GrowthClass::Subquadratic
        } else if p > 2.0 + margin {
            GrowthClass::Superquadratic
        } else {
            GrowthClass::AtMostQuadratic
        }
    }
}

impl fmt::Display for GrowthClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GrowthClass::Subquadratic => "subquadratic",
            GrowthClass::AtMostQuadratic => "at-most-quadratic",
            GrowthClass::Superquadratic => "superquadratic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthOptions {
    /// Fraction of the (largest) radii used in the fit; at least two radii.
    pub fit_fraction: f64,
    pub margin: f64,
    pub tol: f64,
    pub blowup: f64,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        Self {
            fit_fraction: 0.5,
            margin: GROWTH_MARGIN,
            tol: 1e-10,
            blowup: 1e12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    /// Fitted exponent `p̂` of `|f| ~ R₁ d^p̂`.
    pub exponent: f64,
    pub std_error: f64,
    pub class: GrowthClass,
    pub r1: f64,
    /// Smallest `R₂ ≥ 0` with `f ≤ R₁ d^p̂ + R₂` on every sample.
    pub r2: f64,
    pub used_directions: usize,
    pub dropped: Vec<(usize, String)>,
    /// `(distance, max |f|)` per radius, in radius order.
    pub envelope: Vec<(f64, f64)>,
}

/// Samples `f` along radial geodesics from `x̄` and fits the growth exponent
/// by least squares on `log max|f|` against `log d`.
pub fn classify_growth(
    profile: &dyn WaveProfile,
    model: &dyn Manifold,
    xbar: &ChartPoint,
    directions: &[TangentVector],
    radii: &[f64],
    opts: &GrowthOptions,
) -> Result<GrowthReport> {
    model.check_point(xbar.coords())?;
    if radii.len() < 2 {
        return Err(Error::InvalidInput("growth fit needs at least two radii".into()));
    }
    if radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("radii must be positive and increasing".into()));
    }
    if directions.is_empty() {
        return Err(Error::InvalidInput("no ray directions given".into()));
    }
    let h = model.metric(xbar.coords());
    let r_max = radii[radii.len() - 1];

    // samples[r][dir] = (distance, f)
    let mut samples: Vec<Vec<(f64, f64)>> = vec![Vec::new(); radii.len()];
    let mut dropped = Vec::new();
    for (idx, dir) in directions.iter().enumerate() {
        let speed2 = quadratic_form(&h, &dir.comps);
        if dir.comps.len() != model.dim() || !(speed2 > 0.0) {
            dropped.push((idx, "zero or malformed direction".to_string()));
            continue;
        }
        let unit: Vec<f64> = dir.comps.iter().map(|c| c / speed2.sqrt()).collect();
        let ray = match crate::geometry::geodesic::integrate_background(
            model,
            xbar.coords(),
            &unit,
            0.0,
            r_max,
            opts.tol,
            opts.blowup,
        ) {
            Ok(ray) => ray,
            Err(e) => {
                dropped.push((idx, e.to_string()));
                continue;
            }
        };
        match sample_ray(profile, model, xbar, &ray, radii) {
            Ok(row) => {
                for (slot, s) in samples.iter_mut().zip(row) {
                    slot.push(s);
                }
            }
            Err(e) => dropped.push((idx, e.to_string())),
        }
    }
    let used = directions.len() - dropped.len();
    if used == 0 {
        return Err(Error::Growth(format!("all {} directions dropped", directions.len())));
    }

    let envelope: Vec<(f64, f64)> = samples
        .iter()
        .map(|row| {
            row.iter()
                .copied()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(d, f)| (d, f.abs()))
                .expect("every radius has a sample from each used direction")
        })
        .collect();

    let fit_count = ((radii.len() as f64 * opts.fit_fraction).ceil() as usize)
        .clamp(2, radii.len());
    let fit = &envelope[envelope.len() - fit_count..];
    let (exponent, intercept, std_error) = if fit.iter().all(|&(_, g)| g <= f64::MIN_POSITIVE) {
        (0.0, f64::NEG_INFINITY, 0.0)
    } else {
        let pts: Vec<(f64, f64)> = fit
            .iter()
            .map(|&(d, g)| (d.ln(), g.max(f64::MIN_POSITIVE).ln()))
            .collect();
        least_squares(&pts)
    };
    let r1 = intercept.exp();
    let r2 = samples
        .iter()
        .flatten()
        .map(|&(d, f)| f - r1 * d.powf(exponent))
        .fold(0.0_f64, f64::max);

    Ok(GrowthReport {
        exponent,
        std_error,
        class: GrowthClass::from_exponent(exponent, opts.margin),
        r1,
        r2,
        used_directions: used,
        dropped,
        envelope,
    })
}

fn sample_ray(
    profile: &dyn WaveProfile,
    model: &dyn Manifold,
    xbar: &ChartPoint,
    ray: &BackgroundGeodesic,
    radii: &[f64],
) -> Result<Vec<(f64, f64)>> {
    radii
        .iter()
        .map(|&r| {
            let x = ray.x_at(r).expect("ray covers every radius");
            let point = ChartPoint::new(x);
            let d = distance_estimate(model, &point, xbar)?.value;
            Ok((d, profile.value(point.coords())))
        })
        .collect()
}

/// Slope, intercept and slope standard error of an ordinary least-squares line.
pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let se = if pts.len() > 2 {
        let ssr: f64 = pts
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum();
        (ssr / (m - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, intercept, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Euclidean;
    use crate::profiles::{Constant, FnProfile, RadialPower};

    fn setup() -> (Euclidean, ChartPoint, Vec<TangentVector>, Vec<f64>) {
        let origin = ChartPoint::new(vec![0.0, 0.0]);
        let dirs = (0..8)
            .map(|k| {
                let a = k as f64 * std::f64::consts::FRAC_PI_4;
                TangentVector::new(origin.clone(), vec![a.cos(), a.sin()]).unwrap()
            })
            .collect();
        let radii = (0..8).map(|k| 2f64.powi(k)).collect();
        (Euclidean::new(2), origin, dirs, radii)
    }

    // log-log regression on exact samples s·r^p
    fn oracle_exponent(p: f64, radii: &[f64]) -> f64 {
        let pts: Vec<(f64, f64)> = radii.iter().map(|r| (r.ln(), p * r.ln())).collect();
        least_squares(&pts).0
    }

    #[test]
    fn power_laws_are_classified() {
        let (m, o, dirs, radii) = setup();
        for (p, class) in [
            (1.5, GrowthClass::Subquadratic),
            (2.0, GrowthClass::AtMostQuadratic),
            (3.0, GrowthClass::Superquadratic),
        ] {
            let f = RadialPower {
                exponent: p,
                scale: 1.0,
                center: vec![0.0, 0.0],
            };
            let r = classify_growth(&f, &m, &o, &dirs, &radii, &GrowthOptions::default()).unwrap();
            assert!((r.exponent - oracle_exponent(p, &radii)).abs() < 1e-8);
            assert!((r.exponent - p).abs() < 1e-8);
            assert_eq!(r.class, class);
            assert_eq!(r.used_directions, 8);
        }
    }

    #[test]
    fn constant_profile_does_not_grow() {
        let (m, o, dirs, radii) = setup();
        let r = classify_growth(&Constant { value: 4.0 }, &m, &o, &dirs, &radii, &GrowthOptions::default())
            .unwrap();
        assert!(r.exponent.abs() < 1e-12);
        assert_eq!(r.class, GrowthClass::Subquadratic);
        assert!((r.r1 - 4.0).abs() < 1e-10);
    }

    #[test]
    fn anisotropic_profile_uses_the_envelope() {
        let (m, o, dirs, radii) = setup();
        // grows like r^3 along x¹ only
        let f = FnProfile::new("cubic-x", |x: &[f64]| x[0].abs().powi(3));
        let r = classify_growth(&f, &m, &o, &dirs, &radii, &GrowthOptions::default()).unwrap();
        assert!((r.exponent - 3.0).abs() < 1e-6);
        assert!(r.r2 >= 0.0);
    }

    #[test]
    fn zero_directions_are_dropped() {
        let (m, o, mut dirs, radii) = setup();
        dirs.push(TangentVector::new(o.clone(), vec![0.0, 0.0]).unwrap());
        let f = RadialPower {
            exponent: 1.5,
            scale: 1.0,
            center: vec![0.0, 0.0],
        };
        let r = classify_growth(&f, &m, &o, &dirs, &radii, &GrowthOptions::default()).unwrap();
        assert_eq!(r.dropped.len(), 1);
        let only_zero = vec![TangentVector::new(o.clone(), vec![0.0, 0.0]).unwrap()];
        assert!(matches!(
            classify_growth(&f, &m, &o, &only_zero, &radii, &GrowthOptions::default()),
            Err(Error::Growth(_))
        ));
    }

    #[test]
    fn rejects_bad_radii() {
        let (m, o, dirs, _) = setup();
        let f = Constant { value: 1.0 };
        let opts = GrowthOptions::default();
        assert!(classify_growth(&f, &m, &o, &dirs, &[1.0], &opts).is_err());
        assert!(classify_growth(&f, &m, &o, &dirs, &[2.0, 1.0], &opts).is_err());
    }
}
