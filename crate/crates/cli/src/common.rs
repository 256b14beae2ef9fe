//! Loading, digests and output shared by the subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use devcert_core::io::{load_model, raw_box};
use devcert_core::{
    Budget, CertSpec, CertificationSet, Component, DeviationFn, EnsembleOptions, Error, FeatureBox,
    FeatureKind, FeatureSpace, ModelFile, Result, Scale,
};
use sha2::{Digest, Sha256};

use crate::{PairArgs, ScaleArg};

/// Running SHA-256 over labelled input files and options.
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn new(command: &str) -> Self {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0]);
        InputDigest(h)
    }

    pub fn file(&mut self, label: &str, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        self.bytes(label, &bytes);
        Ok(())
    }

    pub fn option(&mut self, label: &str, value: &str) {
        self.bytes(label, value.as_bytes());
    }

    fn bytes(&mut self, label: &str, bytes: &[u8]) {
        self.0.update(label.as_bytes());
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
    }

    pub fn hex(self) -> String {
        self.0.finalize().iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Model, reference and everything the certifiers need from a `PairArgs`.
pub struct Pair {
    pub model: ModelFile,
    pub reference: ModelFile,
    pub spec: CertSpec,
    pub deviation: DeviationFn,
    pub opts: EnsembleOptions,
}

impl Pair {
    pub fn load(a: &PairArgs) -> Result<Self> {
        let spec: CertSpec = a.certset.parse()?;
        let deviation: DeviationFn = a.deviation.parse()?;
        let model = load_model(&a.model)?;
        let reference = load_model(&a.reference)?;
        if model.space() != reference.space() {
            return Err(Error::SchemaMismatch(format!(
                "{} and {} declare different feature spaces",
                a.model.display(),
                a.reference.display()
            )));
        }
        let time_limit = match a.time_limit {
            Some(t) if !(t >= 0.0) || !t.is_finite() => {
                return Err(Error::InvalidArgument(format!(
                    "--time-limit must be a non-negative number of seconds, got {t}"
                )))
            }
            t => t.map(Duration::from_secs_f64),
        };
        let opts = EnsembleOptions {
            scale: scale(a.scale),
            budget: Budget {
                time_limit,
                node_limit: a.node_limit,
            },
            threads: threads()?,
            ..EnsembleOptions::default()
        };
        Ok(Pair {
            model,
            reference,
            spec,
            deviation,
            opts,
        })
    }

    pub fn space(&self) -> &FeatureSpace {
        self.model.space()
    }

    pub fn certset(&self) -> Result<CertificationSet> {
        self.spec.load(self.space())
    }
}

pub fn scale(s: ScaleArg) -> Scale {
    match s {
        ScaleArg::Prob => Scale::Output,
        ScaleArg::Link => Scale::Link,
    }
}

pub fn scale_name(s: ScaleArg) -> &'static str {
    match s {
        ScaleArg::Prob => "prob",
        ScaleArg::Link => "link",
    }
}

/// Worker count from `DEVCERT_THREADS`, default 1.
pub fn threads() -> Result<usize> {
    match std::env::var("DEVCERT_THREADS") {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::InvalidArgument(format!(
                "DEVCERT_THREADS must be a positive integer, got `{v}`"
            ))),
        },
    }
}

/// Digest of the pair's files, the certset file and the options.
pub fn pair_digest(command: &str, a: &PairArgs, spec: &CertSpec) -> Result<InputDigest> {
    let mut d = InputDigest::new(command);
    d.file("model", &a.model)?;
    d.file("reference", &a.reference)?;
    match spec {
        CertSpec::Full => {}
        CertSpec::Points(p) | CertSpec::Balls { path: p, .. } => d.file("certset", p)?,
    }
    d.option("certset", &spec.to_string());
    d.option("deviation", &a.deviation);
    d.option("scale", scale_name(a.scale));
    d.option("time_limit", &format!("{:?}", a.time_limit));
    d.option("node_limit", &format!("{:?}", a.node_limit));
    Ok(d)
}

/// Writes `text` to `out` or stdout.
pub fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", p.display()),
            ))
        }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Comma-separated numbers; `inf` is accepted.
pub fn parse_list(flag: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|_| {
                Error::InvalidArgument(format!("{flag}: `{}` is not a number", t.trim()))
            })
        })
        .collect()
}

pub fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x}")
    }
}

/// Raw-unit text of one component, e.g. `[0,0.5)` or `{a|b}`.
pub fn component_text(space: &FeatureSpace, j: usize, c: &Component) -> String {
    match (c, &space.feature(j).kind) {
        (Component::Interval(i), _) => format!(
            "{}{},{}{}",
            if i.lo_open { '(' } else { '[' },
            fmt_num(i.lo),
            fmt_num(i.hi),
            if i.hi_open { ')' } else { ']' }
        ),
        (Component::Categories(s), FeatureKind::Categorical { categories }) => {
            let names: Vec<&str> = s.iter().map(|k| categories[k].as_str()).collect();
            format!("{{{}}}", names.join("|"))
        }
        (Component::Categories(s), _) => format!("{s:?}"),
    }
}

/// Restricted features of a standardized box in raw units, `;`-separated;
/// `*` when no feature is restricted.
pub fn box_text(space: &FeatureSpace, b: &FeatureBox) -> String {
    let dom = space.domain_box();
    let raw = raw_box(space, b);
    let parts: Vec<String> = b
        .components()
        .iter()
        .zip(dom.components())
        .enumerate()
        .filter(|(_, (c, d))| c != d)
        .map(|(j, _)| {
            format!(
                "{}:{}",
                space.feature(j).name,
                component_text(space, j, &raw.components()[j])
            )
        })
        .collect();
    if parts.is_empty() {
        "*".into()
    } else {
        parts.join(";")
    }
}

/// One CSV record.
pub fn csv_line(fields: &[String]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(fields).expect("in-memory csv");
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 fields")
}
