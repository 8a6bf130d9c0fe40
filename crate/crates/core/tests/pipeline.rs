use std::path::Path;

use impulse_geo::harness::{emit_to_string, run, ArtifactKind, Format, Overrides, ScenarioConfig, Subcommand};

fn load(name: &str) -> ScenarioConfig {
    ScenarioConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)).unwrap()
}

#[test]
fn every_shipped_config_round_trips() {
    for name in ["flat-linear.toml", "unperturbed.toml", "hyperbolic-bump.toml", "growth.toml"] {
        let cfg = load(name);
        assert_eq!(ScenarioConfig::parse(&cfg.to_toml()).unwrap(), cfg, "{name}");
    }
}

#[test]
fn each_subcommand_yields_the_documented_artifacts() {
    let cfg = load("hyperbolic-bump.toml");
    let cases = [
        (Subcommand::Integrate, vec![ArtifactKind::Path, ArtifactKind::Report]),
        (Subcommand::Limit, vec![ArtifactKind::Report]),
        (Subcommand::Certify, vec![ArtifactKind::Certificate]),
        (Subcommand::Sweep, vec![ArtifactKind::Table]),
        (Subcommand::VerifyNet, vec![ArtifactKind::Report]),
        (Subcommand::ClassifyGrowth, vec![ArtifactKind::Report]),
    ];
    for (sub, kinds) in cases {
        let arts = run(sub, &cfg).unwrap();
        assert_eq!(arts.iter().map(|a| a.kind()).collect::<Vec<_>>(), kinds, "{sub:?}");
        for a in &arts {
            assert_eq!(a.provenance.seed, Some(7));
            assert_eq!(a.provenance.config_sha256.len(), 64);
            assert!(a.supports(Format::Csv));
            emit_to_string(a, Format::Csv).unwrap();
        }
    }
}

#[test]
fn svg_is_refused_for_certificates_and_text_for_paths() {
    let cfg = load("flat-linear.toml");
    let cert = &run(Subcommand::Certify, &cfg).unwrap()[0];
    let err = emit_to_string(cert, Format::Svg).unwrap_err();
    assert!(err.is_validation());
    let text = emit_to_string(cert, Format::Text).unwrap();
    for key in ["alpha", "eps0"] {
        assert!(text.lines().any(|l| l.trim_start().starts_with(key)), "{text}");
    }

    let path = &run(Subcommand::Integrate, &cfg).unwrap()[0];
    assert!(emit_to_string(path, Format::Text).unwrap_err().is_validation());
    assert!(emit_to_string(path, Format::Svg).unwrap().contains("<polyline"));
}

#[test]
fn path_rows_follow_the_sample_count() {
    let mut cfg = load("flat-linear.toml");
    cfg.output.samples = 57;
    let csv = emit_to_string(&run(Subcommand::Integrate, &cfg).unwrap()[0], Format::Csv).unwrap();
    assert_eq!(csv.lines().count(), 58);
}

#[test]
fn provenance_ignores_output_location_but_not_physics() {
    let base = load("flat-linear.toml");
    let hash = |cfg: &ScenarioConfig| run(Subcommand::Certify, cfg).unwrap()[0].provenance.config_sha256.clone();
    let moved = Overrides {
        out_dir: Some("elsewhere".into()),
        workers: Some(5),
        ..Overrides::default()
    }
    .apply(base.clone(), None)
    .unwrap();
    assert_eq!(hash(&base), hash(&moved));
    let changed = Overrides {
        eps: Some(0.02),
        ..Overrides::default()
    }
    .apply(base.clone(), None)
    .unwrap();
    assert_ne!(hash(&base), hash(&changed));
}

#[test]
fn environment_sits_between_config_and_flag() {
    let base = load("flat-linear.toml");
    let env_only = Overrides::default().apply(base.clone(), Some("6")).unwrap();
    assert_eq!(env_only.output.workers, Some(6));
    let flagged = Overrides {
        workers: Some(2),
        ..Overrides::default()
    }
    .apply(base, Some("6"))
    .unwrap();
    assert_eq!(flagged.output.workers, Some(2));
}
