//! Run configuration: a JSON document with global defaults and a list of
//! experiment blocks.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use qhgeo_core::harness::ExperimentSpec;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{CliError, Issue, IssueKind};

/// Top-level layout of a config file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    output_dir: Option<PathBuf>,
    /// Default seed for blocks without `sample.seed`.
    #[serde(default)]
    seed: Option<u64>,
    /// Tolerance defaults, overridden field by field in each block.
    #[serde(default)]
    tolerances: Option<Map<String, Value>>,
    #[serde(default)]
    plots: bool,
    experiments: Vec<Value>,
}

/// A fully validated run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub specs: Vec<ExperimentSpec>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub plots: bool,
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} experiment(s):", self.specs.len())?;
        for s in &self.specs {
            write!(f, " {}", s.name)?;
        }
        Ok(())
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::FileNotFound(path.to_path_buf()),
        _ => CliError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    parse_config_str(&text)
}

fn issue_from(path: String, err: &serde_json::Error) -> Issue {
    let msg = err.to_string();
    // serde reports the offending tag as "unknown variant `x`, expected ..."
    let kind = if msg.starts_with("unknown variant") {
        IssueKind::UnknownKind
    } else {
        IssueKind::Schema
    };
    let reason = match msg.find(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg,
    };
    Issue { path, kind, reason }
}

fn join(prefix: &str, path: &str) -> String {
    match path {
        "" | "." => prefix.to_string(),
        p if p.starts_with('[') => format!("{prefix}{p}"),
        p => format!("{prefix}.{p}"),
    }
}

/// Overlays `over` on `base`, recursing into objects.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Invalid(vec![issue_from(join("", &path), e.inner())])
    })?;
    let mut issues = Vec::new();
    let mut specs = Vec::new();
    let mut names = BTreeSet::new();
    if raw.experiments.is_empty() {
        issues.push(Issue::schema("experiments", "at least one experiment block is required"));
    }
    for (i, block) in raw.experiments.into_iter().enumerate() {
        let prefix = format!("experiments[{i}]");
        let mut block = block;
        if let Value::Object(obj) = &mut block {
            if let Some(t) = &raw.tolerances {
                let mut tol = Value::Object(t.clone());
                if let Some(own) = obj.remove("tolerances") {
                    merge(&mut tol, own);
                }
                obj.insert("tolerances".into(), tol);
            }
            if let Some(seed) = raw.seed {
                let sample = obj.entry("sample").or_insert_with(|| Value::Object(Map::new()));
                if let Value::Object(s) = sample {
                    s.entry("seed").or_insert(Value::from(seed));
                }
            }
        }
        let spec: ExperimentSpec = match serde_path_to_error::deserialize(block) {
            Ok(s) => s,
            Err(e) => {
                let path = e.path().to_string();
                issues.push(issue_from(join(&prefix, &path), e.inner()));
                continue;
            }
        };
        for (field, reason) in spec.validate() {
            issues.push(Issue::schema(join(&prefix, &field), reason));
        }
        if !valid_name(&spec.name) {
            issues.push(Issue::schema(
                join(&prefix, "name"),
                "names become file names: use letters, digits, '-', '_' and '.'",
            ));
        } else if !names.insert(spec.name.clone()) {
            issues.push(Issue::schema(join(&prefix, "name"), format!("duplicate name `{}`", spec.name)));
        }
        specs.push(spec);
    }
    if !issues.is_empty() {
        return Err(CliError::Invalid(issues));
    }
    Ok(RunConfig {
        specs,
        output_dir: raw.output_dir,
        seed: raw.seed,
        plots: raw.plots,
    })
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('.')
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}
