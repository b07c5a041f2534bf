//! Problem files: `{generator, x0, direction?, method?, step?, steps?, ranks?, seed?}`
//! where each tensor is either inline `{"shape", "data"}` or a path to a
//! JSON or TNSR file, resolved against the problem file's directory.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use tenscalc::io;
use tenscalc::ode::Method;
use tenscalc::DenseTensor;

use crate::CliError;

#[derive(Debug, Clone)]
pub enum TensorRef {
    Inline(DenseTensor),
    Path(PathBuf),
}

impl<'de> Deserialize<'de> for TensorRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RefVisitor;

        impl<'de> Visitor<'de> for RefVisitor {
            type Value = TensorRef;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a tensor object {\"shape\", \"data\"} or a file path")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<TensorRef, E> {
                Ok(TensorRef::Path(PathBuf::from(v)))
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<TensorRef, A::Error> {
                DenseTensor::deserialize(de::value::MapAccessDeserializer::new(map))
                    .map(TensorRef::Inline)
            }
        }

        d.deserialize_any(RefVisitor)
    }
}

impl TensorRef {
    pub fn resolve(&self, base: &Path, field: &str) -> Result<DenseTensor, CliError> {
        match self {
            TensorRef::Inline(t) => Ok(t.clone()),
            TensorRef::Path(p) => {
                let full = if p.is_absolute() {
                    p.clone()
                } else {
                    base.join(p)
                };
                io::read_tensor(&full).map_err(|e| CliError::Usage(format!("{field}: {e}")))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub generator: TensorRef,
    pub x0: TensorRef,
    #[serde(default)]
    pub direction: Option<TensorRef>,
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
    /// One rank per state mode, in order.
    #[serde(default)]
    pub ranks: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub source: PathBuf,
    pub generator: DenseTensor,
    pub x0: DenseTensor,
    pub direction: Option<DenseTensor>,
    pub file: ProblemFile,
}

/// Parses with field-path diagnostics, e.g. `generator.data[3]: invalid type`.
pub fn parse_problem(text: &str) -> Result<ProblemFile, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Usage(format!("problem field `{path}`: {}", e.into_inner()))
    })
}

pub fn load_problem(path: &Path) -> Result<Problem, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let file = parse_problem(&text).map_err(|e| match e {
        CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
        other => other,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(Problem {
        source: path.to_path_buf(),
        generator: file.generator.resolve(base, "generator")?,
        x0: file.x0.resolve(base, "x0")?,
        direction: file
            .direction
            .as_ref()
            .map(|d| d.resolve(base, "direction"))
            .transpose()?,
        file,
    })
}

/// Solver settings after applying command-line overrides to the problem file.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub problem: PathBuf,
    pub generator_shape: Vec<usize>,
    pub x0_shape: Vec<usize>,
    pub direction_shape: Option<Vec<usize>>,
    pub method: Method,
    pub step: f64,
    pub steps: usize,
    pub ranks: Option<Vec<usize>>,
    pub seed: Option<u64>,
}
