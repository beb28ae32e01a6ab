//! Plain-text model files.
//!
//! ```text
//! rdwd-model v1
//! d 3
//! R 2.5000000000000000e-1
//! O 0 3.3333333333333331e-1
//! meta penalty 1.0000000000000000e1
//! ```
//!
//! Center (or normal) entries are listed sparsely with 0-based indices.
//! Hyperplane files use the header `hyperplane-model v1`, `w <index> <value>`
//! lines and one `beta <value>` line.

use std::fmt::Write as _;

use thiserror::Error;

use crate::baselines::{BaselineMethod, HyperplaneModel};
use crate::data::format_real;
use crate::rdwd::SphereModel;

pub const SPHERE_HEADER: &str = "rdwd-model";
pub const HYPERPLANE_HEADER: &str = "hyperplane-model";
pub const FORMAT_VERSION: &str = "v1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelIoError {
    #[error("not a model file (first line `{0}`)")]
    UnknownKind(String),
    #[error("unsupported model version `{0}`")]
    UnsupportedVersion(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing `{0}` line")]
    Missing(&'static str),
}

/// Either kind of fitted model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Sphere(SphereModel),
    Hyperplane(HyperplaneModel),
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Sphere(m) => m.center.len(),
            Model::Hyperplane(m) => m.normal.len(),
        }
    }

    pub fn scorer(&self) -> &dyn crate::Scorer {
        match self {
            Model::Sphere(m) => m,
            Model::Hyperplane(m) => m,
        }
    }

    pub fn method_name(&self) -> &'static str {
        match self {
            Model::Sphere(_) => "rdwd",
            Model::Hyperplane(m) => m.method.name(),
        }
    }
}

/// A model plus the `meta` lines that are not part of the model itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: Model,
    pub extra_meta: Vec<(String, String)>,
}

impl ModelFile {
    pub fn new(model: Model) -> Self {
        Self {
            model,
            extra_meta: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: &str) -> Self {
        self.extra_meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.extra_meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match &self.model {
            Model::Sphere(m) => {
                let _ = writeln!(s, "{SPHERE_HEADER} {FORMAT_VERSION}");
                let _ = writeln!(s, "d {}", m.center.len());
                let _ = writeln!(s, "R {}", format_real(m.radius));
                write_sparse(&mut s, "O", &m.center);
                let c = &m.config;
                let meta: [(&str, String); 9] = [
                    ("penalty", format_real(m.penalty)),
                    ("weight_plus", format_real(m.weights.0)),
                    ("weight_minus", format_real(m.weights.1)),
                    ("stop_eps", format_real(c.stop_eps)),
                    ("step_length", format_real(c.step_length)),
                    ("init", c.init.name().to_string()),
                    ("iterations", m.iterations.to_string()),
                    ("converged", m.converged.to_string()),
                    ("objective", format_real(m.objective)),
                ];
                for (k, v) in meta {
                    let _ = writeln!(s, "meta {k} {v}");
                }
            }
            Model::Hyperplane(m) => {
                let _ = writeln!(s, "{HYPERPLANE_HEADER} {FORMAT_VERSION}");
                let _ = writeln!(s, "d {}", m.normal.len());
                write_sparse(&mut s, "w", &m.normal);
                let _ = writeln!(s, "beta {}", format_real(m.intercept));
                let _ = writeln!(s, "meta method {}", m.method.name());
                if let BaselineMethod::LinearDwd { penalty } = m.method {
                    let _ = writeln!(s, "meta penalty {}", format_real(penalty));
                }
            }
        }
        for (k, v) in &self.extra_meta {
            let _ = writeln!(s, "meta {k} {v}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, ModelIoError> {
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim_end_matches('\r')));
        let (_, first) = lines.next().ok_or(ModelIoError::UnknownKind(String::new()))?;
        let (kind, version) = first.split_once(' ').unwrap_or((first, ""));
        let sphere = match kind {
            SPHERE_HEADER => true,
            HYPERPLANE_HEADER => false,
            _ => return Err(ModelIoError::UnknownKind(first.to_string())),
        };
        if version != FORMAT_VERSION {
            return Err(ModelIoError::UnsupportedVersion(version.to_string()));
        }

        let mut dim: Option<usize> = None;
        let mut scalar: Option<f64> = None;
        let mut entries: Vec<(usize, f64, usize)> = Vec::new();
        let mut meta: Vec<(String, String)> = Vec::new();
        let (entry_key, scalar_key) = if sphere { ("O", "R") } else { ("w", "beta") };
        for (line, raw) in lines {
            if raw.trim().is_empty() {
                continue;
            }
            let bad = |message: String| ModelIoError::Malformed { line, message };
            let fields: Vec<&str> = raw.split(' ').collect();
            match fields.as_slice() {
                ["d", v] if dim.is_none() => {
                    dim = Some(v.parse().map_err(|_| bad(format!("bad dimension `{v}`")))?);
                }
                [k, v] if *k == scalar_key && scalar.is_none() => {
                    scalar = Some(parse_real(v).ok_or_else(|| bad(format!("bad number `{v}`")))?);
                }
                [k, i, v] if *k == entry_key => {
                    let i: usize = i.parse().map_err(|_| bad(format!("bad index `{i}`")))?;
                    let v = parse_real(v).ok_or_else(|| bad(format!("bad number `{v}`")))?;
                    entries.push((i, v, line));
                }
                ["meta", k, v] => meta.push((k.to_string(), v.to_string())),
                _ => return Err(bad(format!("unexpected line `{raw}`"))),
            }
        }
        let dim = dim.ok_or(ModelIoError::Missing("d"))?;
        let scalar = scalar.ok_or(ModelIoError::Missing(if sphere { "R" } else { "beta" }))?;
        let mut dense = vec![0.0; dim];
        for (i, v, line) in entries {
            if i >= dim {
                return Err(ModelIoError::Malformed {
                    line,
                    message: format!("index {i} out of range for d = {dim}"),
                });
            }
            dense[i] = v;
        }

        let take = |meta: &mut Vec<(String, String)>, key: &str| {
            meta.iter()
                .position(|(k, _)| k == key)
                .map(|p| meta.remove(p).1)
        };
        let model = if sphere {
            let mut m = SphereModel::new(dense, scalar);
            let real = |s: Option<String>| s.as_deref().and_then(parse_real);
            if let Some(v) = real(take(&mut meta, "penalty")) {
                m.penalty = v;
            }
            if let (Some(p), Some(q)) = (
                real(take(&mut meta, "weight_plus")),
                real(take(&mut meta, "weight_minus")),
            ) {
                m.weights = (p, q);
            }
            if let Some(v) = real(take(&mut meta, "stop_eps")) {
                m.config.stop_eps = v;
            }
            if let Some(v) = real(take(&mut meta, "step_length")) {
                m.config.step_length = v;
            }
            if let Some(v) = take(&mut meta, "init") {
                if v == "median" {
                    m.config.init = crate::rdwd::InitMode::MedianPlus;
                }
            }
            if let Some(v) = take(&mut meta, "iterations").and_then(|v| v.parse().ok()) {
                m.iterations = v;
            }
            if let Some(v) = take(&mut meta, "converged").and_then(|v| v.parse().ok()) {
                m.converged = v;
            }
            if let Some(v) = real(take(&mut meta, "objective")) {
                m.objective = v;
            }
            Model::Sphere(m)
        } else {
            let method = match take(&mut meta, "method").as_deref() {
                Some("ldwd") => {
                    let penalty = take(&mut meta, "penalty")
                        .as_deref()
                        .and_then(parse_real)
                        .unwrap_or(f64::NAN);
                    BaselineMethod::LinearDwd { penalty }
                }
                _ => BaselineMethod::MeanDifference,
            };
            Model::Hyperplane(HyperplaneModel {
                normal: dense,
                intercept: scalar,
                method,
            })
        };
        Ok(Self {
            model,
            extra_meta: meta,
        })
    }
}

fn write_sparse(s: &mut String, key: &str, values: &[f64]) {
    for (i, &v) in values.iter().enumerate() {
        if v != 0.0 {
            let _ = writeln!(s, "{key} {i} {}", format_real(v));
        }
    }
}

fn parse_real(s: &str) -> Option<f64> {
    s.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_round_trip_is_bit_exact() {
        let mut m = SphereModel::new(vec![0.1, 0.0, 1.0 / 3.0], std::f64::consts::PI);
        m.penalty = 12.5;
        m.weights = (0.3, 0.7);
        m.iterations = 17;
        m.objective = 4.25;
        let file = ModelFile::new(Model::Sphere(m.clone())).with_meta("normalize", "true");
        let text = file.to_text();
        assert!(text.starts_with("rdwd-model v1\nd 3\nR 3.1415926535897931e0\nO 0 "));
        assert!(!text.contains("O 1 "));
        let back = ModelFile::parse(&text).unwrap();
        let Model::Sphere(b) = &back.model else { panic!() };
        assert_eq!(b.center, m.center);
        assert_eq!(b.radius.to_bits(), m.radius.to_bits());
        assert_eq!((b.penalty, b.weights, b.iterations), (12.5, (0.3, 0.7), 17));
        assert_eq!(back.meta("normalize"), Some("true"));
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn hyperplane_round_trip() {
        let m = HyperplaneModel {
            normal: vec![0.0, -0.5, 2.0e-17],
            intercept: -1.25,
            method: BaselineMethod::LinearDwd { penalty: 100.0 },
        };
        let text = ModelFile::new(Model::Hyperplane(m.clone())).to_text();
        assert!(text.contains("\nbeta -1.2500000000000000e0\n"));
        let back = ModelFile::parse(&text).unwrap();
        assert_eq!(back.model, Model::Hyperplane(m));
    }

    #[test]
    fn rejects_unknown_versions_and_kinds() {
        assert_eq!(
            ModelFile::parse("rdwd-model v2\nd 1\nR 1\n"),
            Err(ModelIoError::UnsupportedVersion("v2".into()))
        );
        assert!(matches!(
            ModelFile::parse("svm-model v1\n"),
            Err(ModelIoError::UnknownKind(_))
        ));
    }

    #[test]
    fn malformed_lines_are_located() {
        assert_eq!(
            ModelFile::parse("rdwd-model v1\nd 2\nR 1\nO 5 1\n"),
            Err(ModelIoError::Malformed {
                line: 4,
                message: "index 5 out of range for d = 2".into()
            })
        );
        assert_eq!(
            ModelFile::parse("rdwd-model v1\nd 2\n"),
            Err(ModelIoError::Missing("R"))
        );
    }
}
