use std::fmt;
use std::path::PathBuf;

use crate::dynamics::{integrate_impulsive_geodesic, lagrangian_energy, GeodesicState};
use crate::error::{Error, Result};
use crate::existence::{certify_at, certify_auto, picard_solve, ExistenceCertificate};
use crate::geometry::{ChartPoint, TangentVector};
use crate::limits::{convergence_study, limit_geodesic, StudyOptions};
use crate::profiles::{classify_growth, verify_strict_delta_net, GrowthOptions};

use super::artifact::{num, PathTable, Payload, Provenance, RunArtifact};
use super::config::ScenarioConfig;

pub const WORKERS_ENV: &str = "IMPULSE_GEO_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Integrate,
    Limit,
    Certify,
    Sweep,
    VerifyNet,
    ClassifyGrowth,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Subcommand::Integrate,
        Subcommand::Limit,
        Subcommand::Certify,
        Subcommand::Sweep,
        Subcommand::VerifyNet,
        Subcommand::ClassifyGrowth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Integrate => "integrate",
            Subcommand::Limit => "limit",
            Subcommand::Certify => "certify",
            Subcommand::Sweep => "sweep",
            Subcommand::VerifyNet => "verify-net",
            Subcommand::ClassifyGrowth => "classify-growth",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub eps: Option<f64>,
    pub eps_schedule: Option<Vec<f64>>,
    pub u_end: Option<f64>,
    pub tol: Option<f64>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub svg: bool,
}

impl Overrides {
    /// Applies the overrides (and `IMPULSE_GEO_WORKERS`, which sits between the
    /// config and the flag) and revalidates.
    pub fn apply(&self, mut cfg: ScenarioConfig, env_workers: Option<&str>) -> Result<ScenarioConfig> {
        if let Some(e) = self.eps {
            cfg.eps = Some(e);
        }
        if let Some(s) = &self.eps_schedule {
            cfg.eps_schedule = Some(s.clone());
        }
        if let Some(u) = self.u_end {
            cfg.u_end = u;
        }
        if let Some(t) = self.tol {
            cfg.tolerances.integrator = t;
        }
        if let Some(raw) = env_workers {
            let w = raw
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
            cfg.output.workers = Some(w);
        }
        if let Some(w) = self.workers {
            cfg.output.workers = Some(w);
        }
        if let Some(d) = &self.out_dir {
            cfg.output.dir = d.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        if self.svg {
            cfg.output.svg = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn vec_str(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().copied().map(num).collect();
    format!("[{}]", parts.join(", "))
}

fn kv(k: &str, v: impl Into<String>) -> (String, String) {
    (k.to_string(), v.into())
}

/// Runs one subcommand on a validated config.
pub fn run(sub: Subcommand, cfg: &ScenarioConfig) -> Result<Vec<RunArtifact>> {
    cfg.validate()?;
    // where results are written and how many threads compute them does not
    // change them, so neither enters the hash
    let mut hashed = cfg.clone();
    hashed.output.dir = PathBuf::new();
    hashed.output.workers = None;
    let provenance = Provenance::new(&hashed.to_toml(), sub.name(), cfg.seed);
    let artifact = |name: &str, payload: Payload| RunArtifact {
        name: name.to_string(),
        payload,
        provenance: provenance.clone(),
    };
    match sub {
        Subcommand::Integrate => {
            let (path, summary) = run_integrate(cfg)?;
            Ok(vec![artifact("path", Payload::Path(path)), artifact("integrate", summary)])
        }
        Subcommand::Limit => Ok(vec![artifact("limit", run_limit(cfg)?)]),
        Subcommand::Certify => {
            let (cert, extra) = run_certify(cfg)?;
            Ok(vec![artifact("certificate", Payload::Certificate { cert, extra })])
        }
        Subcommand::Sweep => {
            let wave = cfg.wave()?;
            let data = cfg.initial_data();
            let schedule = cfg.require_schedule()?;
            let eps_max = schedule.iter().copied().fold(0.0, f64::max);
            let probes = match &cfg.probes {
                Some(p) => p.clone(),
                None => default_probes(eps_max, cfg.u_end),
            };
            let table = convergence_study(
                &wave,
                &data,
                &schedule,
                &probes,
                &StudyOptions {
                    integration: cfg.integration_options(),
                    workers: cfg.output.workers,
                },
            )?;
            Ok(vec![artifact("sweep", Payload::Table(table))])
        }
        Subcommand::VerifyNet => Ok(vec![artifact("verify-net", run_verify_net(cfg)?)]),
        Subcommand::ClassifyGrowth => Ok(vec![artifact("growth", run_growth(cfg)?)]),
    }
}

/// `{−1, −½, ±…}` restricted to `|u| > eps_max` and `u ≤ u_end`.
pub fn default_probes(eps_max: f64, u_end: f64) -> Vec<f64> {
    let mut p: Vec<f64> = [-1.0, -0.5]
        .into_iter()
        .chain([0.5, 0.75, 1.0].map(|s| s * u_end))
        .filter(|u: &f64| u.abs() > eps_max && *u <= u_end)
        .collect();
    p.dedup();
    p
}

fn state_row(s: &GeodesicState, extra: Option<f64>) -> Vec<f64> {
    let mut r = vec![s.u];
    r.extend(&s.x);
    r.extend(&s.xdot);
    r.push(s.v);
    r.push(s.vdot);
    if let Some(e) = extra {
        r.push(e);
    }
    r
}

fn run_integrate(cfg: &ScenarioConfig) -> Result<(PathTable, Payload)> {
    let wave = cfg.wave()?;
    let eps = cfg.require_eps()?;
    let data = cfg.initial_data();
    let path = integrate_impulsive_geodesic(&wave, eps, &data, cfg.u_end, &cfg.integration_options())?;
    let mut rows = Vec::with_capacity(cfg.output.samples);
    for s in path.sample(cfg.output.samples) {
        let g = lagrangian_energy(&s, &wave, eps)?;
        rows.push(state_row(&s, Some(g)));
    }
    let end = path.end_state();
    let d = path.diagnostics();
    let summary = Payload::Report {
        title: "regularized geodesic".into(),
        fields: vec![
            kv("chart", wave.manifold.name()),
            kv("profile", wave.profile.name()),
            kv("net", wave.net.name()),
            kv("eps", num(eps)),
            kv("u_end", num(end.u)),
            kv("x_end", vec_str(&end.x)),
            kv("xdot_end", vec_str(&end.xdot)),
            kv("v_end", num(end.v)),
            kv("vdot_end", num(end.vdot)),
            kv("energy", num(d.initial_energy)),
            kv("energy_drift", num(d.max_energy_drift)),
            kv("steps_accepted", d.steps.accepted.to_string()),
            kv("steps_rejected", d.steps.rejected.to_string()),
        ],
        table: None,
    };
    Ok((
        PathTable {
            dim: wave.dim(),
            rows,
            marks: Some(path.phase_marks()),
        },
        summary,
    ))
}

fn run_limit(cfg: &ScenarioConfig) -> Result<Payload> {
    let wave = cfg.wave()?;
    let data = cfg.initial_data();
    let lg = limit_geodesic(&*wave.manifold, &*wave.profile, &data, cfg.u_end, &cfg.integration_options())?;
    let n = wave.dim();
    let count = cfg.output.samples;
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let u = -1.0 + (cfg.u_end + 1.0) * i as f64 / (count - 1) as f64;
        let s = lg.evaluate(u).expect("sample inside the limit path");
        rows.push(state_row(&s, None).into_iter().map(num).collect());
    }
    let mut header = vec!["u".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=n).map(|i| format!("xdot{i}")));
    header.extend(["v".to_string(), "vdot".to_string()]);
    Ok(Payload::Report {
        title: "limit geodesic".into(),
        fields: vec![
            kv("chart", lg.chart.clone()),
            kv("x_at_shock", vec_str(&lg.x_zero)),
            kv("xdot_before", vec_str(&lg.xdot_before)),
            kv("velocity_kick", vec_str(&lg.velocity_kick)),
            kv("f_at_shock", num(lg.f_zero)),
            kv("jump_coeff", num(lg.jump_coeff)),
            kv("kink_coeff", num(lg.kink_coeff)),
            kv("v_end", num(lg.v_at(cfg.u_end))),
        ],
        table: Some((header, rows)),
    })
}

fn run_certify(cfg: &ScenarioConfig) -> Result<(ExistenceCertificate, Vec<(String, String)>)> {
    let wave = cfg.wave()?;
    let data = cfg.initial_data();
    let opts = cfg.certify_options();
    let (x0, xd0) = (data.x0.coords(), &data.xdot0[..]);
    let cert = match cfg.eps {
        Some(eps) => certify_at(&wave, x0, xd0, eps, &opts)?,
        None => certify_auto(&wave, x0, xd0, &opts)?,
    };
    let mut extra = vec![
        kv("covers_eps", cert.eps.map_or(true, |e| cert.covers(e)).to_string()),
        kv("weissinger_budget", num(cert.weissinger_budget(40))),
    ];
    if cfg.certificate.picard {
        let eps = cert.eps0 / 2.0;
        let inner = certify_at(&wave, x0, xd0, eps, &opts)?;
        let sol = picard_solve(&wave, eps, &inner.x0, &inner.xdot0, inner.alpha, &cfg.picard_options(), Some(&(&inner).into()))?;
        let path = integrate_impulsive_geodesic(&wave, eps, &data, (inner.alpha - eps).max(2.0 * eps), &cfg.integration_options())?;
        let mut worst: f64 = 0.0;
        for (i, &t) in sol.t.iter().enumerate() {
            let s = path.state_at(t).expect("picard grid inside path");
            for k in 0..s.x.len() {
                worst = worst.max((s.x[k] - sol.x[i][k]).abs()).max((s.xdot[k] - sol.xdot[i][k]).abs());
            }
        }
        extra.extend([
            kv("picard_eps", num(eps)),
            kv("picard_alpha", num(inner.alpha)),
            kv("picard_iterations", sol.iterations.to_string()),
            kv("picard_corrective_iterations", sol.corrective_iterations.to_string()),
            kv("picard_intervals", sol.intervals.to_string()),
            kv("picard_residual", num(sol.residual)),
            kv("picard_grid_shift", num(sol.grid_shift)),
            kv("picard_vs_rk", num(worst)),
        ]);
    }
    Ok((cert, extra))
}

fn run_verify_net(cfg: &ScenarioConfig) -> Result<Payload> {
    let net = cfg.net.build();
    let schedule = cfg
        .eps_schedule
        .clone()
        .unwrap_or_else(|| (1..=10).map(|k| 2f64.powi(-k)).collect());
    let report = verify_strict_delta_net(&*net, &schedule, cfg.tolerances.net)?;
    let failed: Vec<String> = report.failed_properties().iter().map(|p| p.to_string()).collect();
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.eps),
                num(r.support_radius),
                r.support_ok.to_string(),
                opt(r.integral),
                opt(r.abs_integral),
            ]
        })
        .collect();
    Ok(Payload::Report {
        title: "strict delta net verification".into(),
        fields: vec![
            kv("net", report.net.clone()),
            kv("verdict", if report.passes() { "pass" } else { "fail" }),
            kv("failed", if failed.is_empty() { "-".into() } else { failed.join(",") }),
            kv("shrinking_support", report.support_pass.to_string()),
            kv("unit_mass", report.mass_pass.to_string()),
            kv("bounded_l1", report.l1_pass.to_string()),
            kv("declared_K", num(report.declared_k)),
            kv("measured_K", num(report.measured_k)),
            kv("tol", num(report.tol)),
        ],
        table: Some((
            ["eps", "support_radius", "support_ok", "integral", "abs_integral"].map(String::from).to_vec(),
            rows,
        )),
    })
}

fn run_growth(cfg: &ScenarioConfig) -> Result<Payload> {
    let wave = cfg.wave()?;
    let model = &*wave.manifold;
    let n = model.dim();
    let center = cfg.growth.center.clone().unwrap_or_else(|| cfg.data.x0.clone());
    let xbar = ChartPoint::on(model, center)?;
    let count = cfg.growth.directions.max(1);
    let directions = (0..count)
        .map(|k| {
            let mut d = vec![0.0; n];
            if n == 1 {
                d[0] = if k % 2 == 0 { 1.0 } else { -1.0 };
            } else {
                let a = std::f64::consts::TAU * k as f64 / count as f64;
                d[0] = a.cos();
                d[1] = a.sin();
            }
            TangentVector::new(xbar.clone(), d)
        })
        .collect::<Result<Vec<_>>>()?;
    let opts = GrowthOptions {
        tol: cfg.tolerances.integrator,
        blowup: cfg.tolerances.blowup.max(1e12),
        ..GrowthOptions::default()
    };
    let r = classify_growth(&*wave.profile, model, &xbar, &directions, &cfg.growth.radii, &opts)?;
    Ok(Payload::Report {
        title: "growth classification".into(),
        fields: vec![
            kv("chart", model.name()),
            kv("profile", wave.profile.name()),
            kv("exponent", num(r.exponent)),
            kv("std_error", num(r.std_error)),
            kv("class", r.class.to_string()),
            kv("R1", num(r.r1)),
            kv("R2", num(r.r2)),
            kv("directions_used", r.used_directions.to_string()),
            kv("directions_dropped", r.dropped.len().to_string()),
        ],
        table: Some((
            vec!["distance".into(), "max_abs_f".into()],
            r.envelope.iter().map(|&(d, f)| vec![num(d), num(f)]).collect(),
        )),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::artifact::{emit_to_string, Format};

    fn flat() -> ScenarioConfig {
        ScenarioConfig::parse(
            r#"
schema_version = 1
net = "mollifier"
eps = 0.01
eps_schedule = [0.25, 0.125, 0.0625]

[manifold]
name = "euclidean"

[profile]
name = "linear"
coeffs = [1.0, 0.0]

[data]
x0 = [0.0, 0.0]
xdot0 = [1.0, 0.0]

[output]
samples = 11
"#,
        )
        .unwrap()
    }

    #[test]
    fn integrate_rows_match_samples() {
        let a = run(Subcommand::Integrate, &flat()).unwrap();
        let csv = emit_to_string(&a[0], Format::Csv).unwrap();
        assert_eq!(csv.lines().count(), 12);
        assert!(csv.starts_with("u,x1,x2,xdot1,xdot2,v,vdot,energy\n"));
    }

    #[test]
    fn certificate_of_flat_linear_scenario() {
        let mut cfg = flat();
        cfg.eps = Some(0.25);
        let a = run(Subcommand::Certify, &cfg).unwrap();
        let text = emit_to_string(&a[0], Format::Text).unwrap();
        assert!(text.contains("alpha") && text.contains("0.6666666666666666"), "{text}");
        assert!(text.contains("eps0") && text.contains("0.3333333333333333"));
        assert!(text.contains("config_sha256"));
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = run(Subcommand::Sweep, &flat()).unwrap();
        let b = run(Subcommand::Sweep, &flat()).unwrap();
        let (ca, cb) = (
            emit_to_string(&a[0], Format::Csv).unwrap(),
            emit_to_string(&b[0], Format::Csv).unwrap(),
        );
        assert_eq!(ca, cb);
        assert_eq!(ca.lines().count(), 4);
    }

    #[test]
    fn overrides_take_precedence() {
        let o = Overrides {
            eps: Some(0.02),
            workers: Some(3),
            ..Overrides::default()
        };
        let cfg = o.apply(flat(), Some("5")).unwrap();
        assert_eq!(cfg.eps, Some(0.02));
        assert_eq!(cfg.output.workers, Some(3));
        let cfg = Overrides::default().apply(flat(), Some("5")).unwrap();
        assert_eq!(cfg.output.workers, Some(5));
        assert!(Overrides::default().apply(flat(), Some("many")).is_err());
        let bad = Overrides {
            eps: Some(2.0),
            ..Overrides::default()
        };
        assert!(bad.apply(flat(), None).unwrap_err().is_validation());
    }

    #[test]
    fn default_probes_avoid_the_strip() {
        assert_eq!(default_probes(0.5, 1.0), vec![-1.0, 0.75, 1.0]);
        assert_eq!(default_probes(0.1, 1.0), vec![-1.0, -0.5, 0.5, 0.75, 1.0]);
    }
}
