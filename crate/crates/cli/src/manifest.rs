//! JSON manifests describing a structure and how to sample it.

use std::path::Path;
use std::sync::Arc;

use acmetric::curvature::OmegaSource;
use acmetric::{AdaptedChart, AdaptedStructure, GeometryError, ScalarField};
use serde::Deserialize;
use thiserror::Error;

pub const DEFAULT_SAMPLES: usize = 32;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("schema error in `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("cannot parse `{field}` at byte {offset}: {message}")]
    Expression {
        field: String,
        offset: usize,
        message: String,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> ManifestError {
    ManifestError::Schema {
        field: field.into(),
        message: message.into(),
    }
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}
fn default_omega_source() -> String {
    OmegaSource::DEta.name().to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    dimension: usize,
    coordinates: Vec<String>,
    gamma: Vec<String>,
    metric_frame: Vec<Vec<String>>,
    phi_frame: Vec<Vec<String>>,
    domain: Vec<[f64; 2]>,
    #[serde(default)]
    avoid: Vec<String>,
    #[serde(default = "default_samples")]
    samples: usize,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_tolerance")]
    tolerance: f64,
    #[serde(default)]
    pseudo: bool,
    #[serde(default = "default_omega_source")]
    omega_source: String,
}

/// A validated manifest with every expression parsed.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub structure: AdaptedStructure,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub omega_source: OmegaSource,
}

pub fn load_manifest(path: &Path) -> Result<Manifest, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|e| ManifestError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_manifest(&text)
}

pub fn parse_manifest(text: &str) -> Result<Manifest, ManifestError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawManifest = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let field = if field == "." {
            "manifest".to_string()
        } else {
            field
        };
        schema(field, e.into_inner().to_string())
    })?;
    raw.validate()
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

const RESERVED: [&str; 5] = ["sin", "cos", "exp", "ln", "sqrt"];

impl RawManifest {
    fn validate(self) -> Result<Manifest, ManifestError> {
        let n = self.dimension;
        if n < 3 || n.is_multiple_of(2) {
            return Err(schema(
                "dimension",
                format!("must be odd and at least 3, got {n}"),
            ));
        }
        if self.coordinates.len() != n {
            return Err(schema(
                "coordinates",
                format!("expected {n} names, found {}", self.coordinates.len()),
            ));
        }
        for (i, c) in self.coordinates.iter().enumerate() {
            if !is_identifier(c) || RESERVED.contains(&c.as_str()) {
                return Err(schema(
                    format!("coordinates[{i}]"),
                    format!("`{c}` is not a usable name"),
                ));
            }
            if self.coordinates[..i].contains(c) {
                return Err(schema(
                    format!("coordinates[{i}]"),
                    format!("duplicate name `{c}`"),
                ));
            }
        }
        let m = n - 1;
        if self.gamma.len() != m {
            return Err(schema(
                "gamma",
                format!("expected {m} entries, found {}", self.gamma.len()),
            ));
        }
        for (what, rows) in [
            ("metric_frame", &self.metric_frame),
            ("phi_frame", &self.phi_frame),
        ] {
            if rows.len() != m {
                return Err(schema(
                    what,
                    format!("expected {m} rows, found {}", rows.len()),
                ));
            }
            for (i, r) in rows.iter().enumerate() {
                if r.len() != m {
                    return Err(schema(
                        format!("{what}[{i}]"),
                        format!("expected {m} entries, found {}", r.len()),
                    ));
                }
            }
        }
        if self.domain.len() != n {
            return Err(schema(
                "domain",
                format!("expected {n} intervals, found {}", self.domain.len()),
            ));
        }
        for (i, [lo, hi]) in self.domain.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(schema(
                    format!("domain[{i}]"),
                    format!("[{lo}, {hi}] is not an interval"),
                ));
            }
        }
        if self.samples == 0 {
            return Err(schema("samples", "must be at least 1"));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(schema("tolerance", "must be positive"));
        }
        let omega_source = OmegaSource::from_name(&self.omega_source).ok_or_else(|| {
            schema(
                "omega_source",
                format!(
                    "`{}` is neither d_eta nor fundamental_form",
                    self.omega_source
                ),
            )
        })?;

        let coords: Arc<[String]> = self.coordinates.into();
        let parse = |field: String, text: &str| {
            ScalarField::parse(text, coords.clone()).map_err(|e| ManifestError::Expression {
                field,
                offset: e.offset(),
                message: e.to_string(),
            })
        };
        let gamma = self
            .gamma
            .iter()
            .enumerate()
            .map(|(i, t)| parse(format!("gamma[{i}]"), t))
            .collect::<Result<Vec<_>, _>>()?;
        let avoid = self
            .avoid
            .iter()
            .enumerate()
            .map(|(i, t)| parse(format!("avoid[{i}]"), t))
            .collect::<Result<Vec<_>, _>>()?;
        let matrix = |what: &str, rows: &[Vec<String>]| {
            rows.iter()
                .enumerate()
                .map(|(i, r)| {
                    r.iter()
                        .enumerate()
                        .map(|(j, t)| parse(format!("{what}[{i}][{j}]"), t))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()
        };
        let g = matrix("metric_frame", &self.metric_frame)?;
        let phi = matrix("phi_frame", &self.phi_frame)?;
        let domain = self.domain.iter().map(|[lo, hi]| (*lo, *hi)).collect();
        let chart = AdaptedChart::new(coords.clone(), gamma, domain, avoid)?;
        let structure = AdaptedStructure::new(chart, g, phi, self.pseudo)?;
        Ok(Manifest {
            structure,
            samples: self.samples,
            seed: self.seed,
            tolerance: self.tolerance,
            omega_source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "dimension": 3,
        "coordinates": ["x", "y", "t"],
        "gamma": ["y", "0"],
        "metric_frame": [["1", "0"], ["0", "1"]],
        "phi_frame": [["0", "-1"], ["1", "0"]],
        "domain": [[-1, 1], [-1, 1], [-1, 1]]
    }"#;

    #[test]
    fn defaults_apply() {
        let m = parse_manifest(MINIMAL).unwrap();
        assert_eq!(m.samples, 32);
        assert_eq!(m.seed, 42);
        assert_eq!(m.tolerance, 1e-7);
        assert_eq!(m.omega_source, OmegaSource::DEta);
        assert!(!m.structure.is_pseudo());
    }

    fn field_of(err: ManifestError) -> String {
        match err {
            ManifestError::Schema { field, .. } | ManifestError::Expression { field, .. } => field,
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn schema_errors_name_the_field() {
        let short = MINIMAL.replace(r#"["y", "0"]"#, r#"["y"]"#);
        assert_eq!(field_of(parse_manifest(&short).unwrap_err()), "gamma");
        let typo = MINIMAL.replace("\"domain\"", "\"domian\"");
        assert_eq!(field_of(parse_manifest(&typo).unwrap_err()), "domian");
        let wrong = MINIMAL.replace("\"dimension\": 3", "\"dimension\": \"three\"");
        assert_eq!(field_of(parse_manifest(&wrong).unwrap_err()), "dimension");
        let even = MINIMAL.replace("\"dimension\": 3", "\"dimension\": 4");
        assert_eq!(field_of(parse_manifest(&even).unwrap_err()), "dimension");
    }

    #[test]
    fn expression_errors_carry_offsets() {
        let bad = MINIMAL.replace(r#"["1", "0"], ["0", "1"]"#, r#"["1", "0"], ["0", "1 + w"]"#);
        match parse_manifest(&bad).unwrap_err() {
            ManifestError::Expression { field, offset, .. } => {
                assert_eq!(field, "metric_frame[1][1]");
                assert_eq!(offset, 4);
            }
            other => panic!("unexpected {other}"),
        }
    }
}
