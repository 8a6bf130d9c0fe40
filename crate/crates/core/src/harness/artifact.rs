use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::svg;
use crate::error::{Error, Result};
use crate::existence::ExistenceCertificate;
use crate::limits::ConvergenceTable;

pub const TOOL_VERSION: &str = concat!("impulse-geo ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub config_sha256: String,
    pub tool_version: String,
    pub subcommand: String,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(config_text: &str, subcommand: &str, seed: Option<u64>) -> Self {
        Self {
            config_sha256: hex::encode(Sha256::digest(config_text.as_bytes())),
            tool_version: TOOL_VERSION.to_string(),
            subcommand: subcommand.to_string(),
            seed,
        }
    }

    pub fn fields(&self) -> Vec<(String, String)> {
        vec![
            ("config_sha256".into(), self.config_sha256.clone()),
            ("tool_version".into(), self.tool_version.clone()),
            ("subcommand".into(), self.subcommand.clone()),
            ("seed".into(), self.seed.map_or_else(|| "-".into(), |s| s.to_string())),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArtifactKind {
    Path,
    Certificate,
    Table,
    Report,
}

impl fmt::Display for ArtifactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArtifactKind::Path => "path",
            ArtifactKind::Certificate => "certificate",
            ArtifactKind::Table => "table",
            ArtifactKind::Report => "report",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Svg => "svg",
            Format::Text => "txt",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            "text" | "txt" => Ok(Format::Text),
            other => Err(Error::InvalidInput(format!("unknown format {other:?} (csv, svg, text)"))),
        }
    }
}

/// Sampled path rows `u, x.., ẋ.., v, v̇, energy`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTable {
    pub dim: usize,
    pub rows: Vec<Vec<f64>>,
    /// Strip boundaries, drawn on plots.
    pub marks: Option<(f64, f64)>,
}

impl PathTable {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["u".to_string()];
        h.extend((1..=self.dim).map(|i| format!("x{i}")));
        h.extend((1..=self.dim).map(|i| format!("xdot{i}")));
        h.extend(["v", "vdot", "energy"].map(String::from));
        h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Path(PathTable),
    Certificate {
        cert: ExistenceCertificate,
        extra: Vec<(String, String)>,
    },
    Table(ConvergenceTable),
    Report {
        title: String,
        fields: Vec<(String, String)>,
        /// Optional tabular detail: header and rows.
        table: Option<(Vec<String>, Vec<Vec<String>>)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifact {
    /// File stem used when writing to a directory.
    pub name: String,
    pub payload: Payload,
    pub provenance: Provenance,
}

impl RunArtifact {
    pub fn kind(&self) -> ArtifactKind {
        match self.payload {
            Payload::Path(_) => ArtifactKind::Path,
            Payload::Certificate { .. } => ArtifactKind::Certificate,
            Payload::Table(_) => ArtifactKind::Table,
            Payload::Report { .. } => ArtifactKind::Report,
        }
    }

    pub fn supports(&self, format: Format) -> bool {
        match (self.kind(), format) {
            (_, Format::Csv) => true,
            (ArtifactKind::Path | ArtifactKind::Table, Format::Svg) => true,
            (ArtifactKind::Path, Format::Text) => false,
            (_, Format::Text) => true,
            _ => false,
        }
    }
}

pub fn num(x: f64) -> String {
    // fold -0 into 0 so outputs do not depend on the sign of a zero product
    format!("{}", if x == 0.0 { 0.0 } else { x })
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn write_csv(out: &mut dyn Write, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn write_key_values(out: &mut dyn Write, title: &str, fields: &[(String, String)]) -> Result<()> {
    let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    writeln!(out, "{title}")?;
    for (k, v) in fields {
        writeln!(out, "  {k:<width$}  {v}")?;
    }
    Ok(())
}

pub fn table_header() -> Vec<String> {
    ["eps", "err_x", "err_xdot", "err_v", "order"].map(String::from).to_vec()
}

pub fn table_rows(t: &ConvergenceTable) -> Vec<Vec<String>> {
    t.rows
        .iter()
        .map(|r| {
            vec![
                num(r.eps),
                num(r.err_x),
                num(r.err_xdot),
                num(r.err_v),
                r.order_so_far.map(num).unwrap_or_default(),
            ]
        })
        .collect()
}

fn certificate_fields(cert: &ExistenceCertificate, extra: &[(String, String)]) -> Vec<(String, String)> {
    cert.fields()
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .chain(extra.iter().cloned())
        .collect()
}

/// Renders `artifact` in `format`. Text output carries the provenance inline;
/// CSV and SVG output is pure data (see [`write_artifact`]).
pub fn emit(artifact: &RunArtifact, format: Format, out: &mut dyn Write) -> Result<()> {
    if !artifact.supports(format) {
        return Err(Error::InvalidInput(format!(
            "{} artifacts cannot be emitted as {}",
            artifact.kind(),
            format.extension()
        )));
    }
    match (&artifact.payload, format) {
        (Payload::Path(p), Format::Csv) => {
            let rows: Vec<Vec<String>> = p.rows.iter().map(|r| r.iter().copied().map(num).collect()).collect();
            write_csv(out, &p.header(), &rows)
        }
        (Payload::Path(p), Format::Svg) => Ok(out.write_all(svg::path_plot(p).as_bytes())?),
        (Payload::Table(t), Format::Csv) => write_csv(out, &table_header(), &table_rows(t)),
        (Payload::Table(t), Format::Svg) => Ok(out.write_all(svg::error_plot(t).as_bytes())?),
        (Payload::Table(t), Format::Text) => {
            let mut fields = vec![
                ("chart".to_string(), t.chart.clone()),
                ("probes".into(), format!("{:?}", t.probes)),
                ("jump_coeff".into(), num(t.jump_coeff)),
                ("kink_coeff".into(), num(t.kink_coeff)),
            ];
            for (name, (o, m)) in ["x", "xdot", "v"].iter().zip(t.orders.iter().zip(t.monotone)) {
                fields.push((format!("order_{name}"), o.map(num).unwrap_or_else(|| "-".into())));
                fields.push((format!("monotone_{name}"), m.to_string()));
            }
            fields.extend(artifact.provenance.fields());
            write_key_values(out, "convergence study", &fields)?;
            writeln!(out)?;
            let rows = table_rows(t);
            writeln!(out, "{}", table_header().join("\t"))?;
            for (r, row) in rows.iter().zip(&t.rows) {
                match &row.failure {
                    Some(f) => writeln!(out, "{}\t# failed: {f}", r.join("\t"))?,
                    None => writeln!(out, "{}", r.join("\t"))?,
                }
            }
            Ok(())
        }
        (Payload::Certificate { cert, extra }, Format::Csv) => {
            let rows: Vec<Vec<String>> = certificate_fields(cert, extra)
                .into_iter()
                .map(|(k, v)| vec![k, v])
                .collect();
            write_csv(out, &["key".into(), "value".into()], &rows)
        }
        (Payload::Certificate { cert, extra }, Format::Text) => {
            let mut fields = certificate_fields(cert, extra);
            fields.extend(artifact.provenance.fields());
            write_key_values(out, "existence certificate", &fields)
        }
        (Payload::Report { fields, table, .. }, Format::Csv) => match table {
            Some((h, rows)) => write_csv(out, h, rows),
            None => {
                let rows: Vec<Vec<String>> = fields.iter().map(|(k, v)| vec![k.clone(), v.clone()]).collect();
                write_csv(out, &["key".into(), "value".into()], &rows)
            }
        },
        (Payload::Report { title, fields, table }, Format::Text) => {
            let mut all = fields.clone();
            all.extend(artifact.provenance.fields());
            write_key_values(out, title, &all)?;
            if let Some((h, rows)) = table {
                writeln!(out)?;
                writeln!(out, "{}", h.join("\t"))?;
                for r in rows {
                    writeln!(out, "{}", r.join("\t"))?;
                }
            }
            Ok(())
        }
        _ => unreachable!("unsupported pairs are rejected above"),
    }
}

pub fn emit_to_string(artifact: &RunArtifact, format: Format) -> Result<String> {
    let mut buf = Vec::new();
    emit(artifact, format, &mut buf)?;
    Ok(String::from_utf8(buf).expect("emitters write UTF-8"))
}

/// Writes `<dir>/<name>.<ext>`; CSV and SVG files get a `<file>.provenance`
/// sidecar so the data files stay machine-readable.
pub fn write_artifact(artifact: &RunArtifact, format: Format, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.{}", artifact.name, format.extension()));
    let text = emit_to_string(artifact, format)?;
    fs::write(&path, text)?;
    if format != Format::Text {
        let mut side = String::new();
        side.push_str(&format!("kind = {}\n", artifact.kind()));
        for (k, v) in artifact.provenance.fields() {
            side.push_str(&format!("{k} = {v}\n"));
        }
        let mut name = path.as_os_str().to_owned();
        name.push(".provenance");
        fs::write(PathBuf::from(name), side)?;
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::ConvergenceRow;

    fn table() -> ConvergenceTable {
        ConvergenceTable {
            chart: "euclidean(2)".into(),
            rows: vec![
                ConvergenceRow {
                    eps: 0.25,
                    err_x: 0.1,
                    err_xdot: 0.2,
                    err_v: 0.3,
                    vdot_after: -0.5,
                    order_so_far: None,
                    failure: None,
                },
                ConvergenceRow {
                    eps: 0.125,
                    err_x: 0.05,
                    err_xdot: 0.1,
                    err_v: 0.15,
                    vdot_after: -0.5,
                    order_so_far: Some(1.0),
                    failure: None,
                },
            ],
            probes: vec![0.5, 1.0],
            orders: [Some(1.0); 3],
            monotone: [true; 3],
            jump_coeff: -0.5,
            kink_coeff: -0.625,
            limit_vdot_after: -0.625,
        }
    }

    fn artifact(payload: Payload) -> RunArtifact {
        RunArtifact {
            name: "t".into(),
            payload,
            provenance: Provenance::new("schema_version = 1\n", "sweep", Some(3)),
        }
    }

    #[test]
    fn table_csv_schema() {
        let s = emit_to_string(&artifact(Payload::Table(table())), Format::Csv).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "eps,err_x,err_xdot,err_v,order");
        assert_eq!(lines[1], "0.25,0.1,0.2,0.3,");
        assert_eq!(lines[2], "0.125,0.05,0.1,0.15,1");
        assert!(!s.contains('\r'));
    }

    #[test]
    fn path_cannot_be_text() {
        let p = PathTable {
            dim: 1,
            rows: vec![vec![0.0; 6]],
            marks: None,
        };
        let a = artifact(Payload::Path(p));
        assert!(matches!(emit_to_string(&a, Format::Text), Err(Error::InvalidInput(_))));
        let csv = emit_to_string(&a, Format::Csv).unwrap();
        assert!(csv.starts_with("u,x1,xdot1,v,vdot,energy\n"));
    }

    #[test]
    fn provenance_hash_is_stable() {
        let p = Provenance::new("abc", "integrate", None);
        assert_eq!(
            p.config_sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn sidecar_is_written() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_artifact(&artifact(Payload::Table(table())), Format::Svg, dir.path()).unwrap();
        let side = fs::read_to_string(dir.path().join("t.svg.provenance")).unwrap();
        assert!(side.contains("config_sha256 = ") && side.contains("seed = 3"));
        assert!(fs::read_to_string(path).unwrap().starts_with("<svg"));
    }
}
